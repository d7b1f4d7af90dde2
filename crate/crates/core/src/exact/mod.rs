//! Exact oracle for algebras whose basis elements are ad-nilpotent.
//!
//! Every factor `exp(-t^m ad(xi_m))` of the Ad-chain is then a finite Taylor
//! sum, so the Maurer-Cartan coefficients and their continuation are
//! polynomials with Gaussian-rational coefficients. No floating point is used
//! here except when converting inputs in and results out.

mod gaussian;
mod poly;

pub use gaussian::GaussianRational;
pub use poly::{Monomial, Poly, PolyMatrix};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::coords::CoordinatePoint;
use crate::lie::LieAlgebra;
use crate::residual::ResidualTensor;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error("not nilpotent: power {power} of {what} is nonzero at entry ({row}, {col})")]
    NotNilpotent { what: String, power: usize, row: usize, col: usize },
    #[error("structure constant {0} is not representable exactly")]
    NotRational(String),
    #[error("Jacobi identity fails exactly at {0:?}")]
    JacobiNotExact([usize; 4]),
    #[error("point coordinate is not finite")]
    NonFinitePoint,
}

/// Structure constants over the Gaussian rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalAlgebra {
    dim: usize,
    c: Vec<GaussianRational>,
}

impl RationalAlgebra {
    /// Entries `(a, b, g, c)` with `a < b`, zero-based; checked for the exact Jacobi identity.
    pub fn from_upper(dim: usize, entries: Vec<(usize, usize, usize, GaussianRational)>) -> Result<Self, ExactError> {
        let mut c = vec![GaussianRational::zero(); dim * dim * dim];
        for (a, b, g, v) in entries {
            let neg = -&v;
            c[(a * dim + b) * dim + g] += &v;
            c[(b * dim + a) * dim + g] += &neg;
        }
        let alg = Self { dim, c };
        alg.check_jacobi()?;
        Ok(alg)
    }

    /// Exact image of a floating-point algebra (each double is a dyadic rational).
    pub fn from_algebra(algebra: &LieAlgebra) -> Result<Self, ExactError> {
        let s = algebra.dim();
        let entries = algebra
            .constants()
            .upper_entries()
            .into_iter()
            .map(|(a, b, g, z)| {
                GaussianRational::from_c64(z)
                    .map(|q| (a, b, g, q))
                    .ok_or_else(|| ExactError::NotRational(format!("c[{}][{}][{}]", a + 1, b + 1, g + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_upper(s, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize, g: usize) -> &GaussianRational {
        &self.c[(a * self.dim + b) * self.dim + g]
    }

    fn check_jacobi(&self) -> Result<(), ExactError> {
        let s = self.dim;
        for a in 0..s {
            for b in 0..s {
                for g in 0..s {
                    for n in 0..s {
                        let mut acc = GaussianRational::zero();
                        for m in 0..s {
                            acc += &(self.get(a, b, m) * self.get(m, g, n));
                            acc += &(self.get(b, g, m) * self.get(m, a, n));
                            acc += &(self.get(g, a, m) * self.get(m, b, n));
                        }
                        if !acc.is_zero() {
                            return Err(ExactError::JacobiNotExact([a + 1, b + 1, g + 1, n + 1]));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// `ad(xi_a)` with entry `(g, b) = c[a][b][g]`.
    pub fn adjoint(&self, a: usize) -> Vec<Vec<GaussianRational>> {
        (0..self.dim).map(|g| (0..self.dim).map(|b| self.get(a, b, g).clone()).collect()).collect()
    }

    /// Bracket of two vectors of polynomials.
    fn bracket(&self, u: &[&Poly], v: &[&Poly]) -> Vec<Poly> {
        let s = self.dim;
        let nvars = u[0].nvars();
        let mut out = vec![Poly::zero(nvars); s];
        for (a, ua) in u.iter().enumerate() {
            for (b, vb) in v.iter().enumerate() {
                if ua.is_zero() || vb.is_zero() {
                    continue;
                }
                let uv = ua.mul(vb);
                for (g, slot) in out.iter_mut().enumerate() {
                    let c = self.get(a, b, g);
                    if !c.is_zero() {
                        *slot = slot.add(&uv.scale(c));
                    }
                }
            }
        }
        out
    }
}

fn var_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("t{i}")).collect()
}

fn mat_mul(a: &[Vec<GaussianRational>], b: &[Vec<GaussianRational>]) -> Vec<Vec<GaussianRational>> {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = GaussianRational::zero();
                    for (k, row) in b.iter().enumerate() {
                        acc += &(&a[i][k] * &row[j]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `sum_{j < k} (scalar * matrix)^j / j!` where `matrix^k = 0`, with `k <= size`.
///
/// `what` names the matrix in the error.
pub fn exact_exp_nilpotent(
    vars: Vec<String>,
    matrix: &[Vec<GaussianRational>],
    scalar: &Poly,
    what: &str,
) -> Result<PolyMatrix, ExactError> {
    let n = matrix.len();
    let mut powers = vec![matrix.to_vec()];
    loop {
        let last = powers.last().expect("non-empty");
        if last.iter().flatten().all(GaussianRational::is_zero) {
            powers.pop();
            break;
        }
        if powers.len() == n.max(1) {
            let (row, col) = (0..n)
                .flat_map(|r| (0..n).map(move |c| (r, c)))
                .find(|&(r, c)| !last[r][c].is_zero())
                .expect("nonzero entry");
            return Err(ExactError::NotNilpotent { what: what.to_string(), power: n, row: row + 1, col: col + 1 });
        }
        let next = mat_mul(last, matrix);
        powers.push(next);
    }

    let mut out = PolyMatrix::identity(vars.clone(), n);
    let mut scalar_pow = Poly::constant(scalar.nvars(), GaussianRational::one());
    let mut factorial = BigInt::one();
    for (j, pw) in powers.iter().enumerate() {
        scalar_pow = scalar_pow.mul(scalar);
        factorial *= BigInt::from(j + 1);
        let coeff = GaussianRational::new(BigRational::new(BigInt::one(), factorial.clone()), BigRational::zero());
        let term = PolyMatrix::from_constants(vars.clone(), pw).scale_poly(&scalar_pow.scale(&coeff));
        out = out.add(&term);
    }
    Ok(out)
}

/// Maurer-Cartan coefficients as polynomials: column `a` is the Ad-chain applied to `e_a`.
pub fn exact_omega(algebra: &RationalAlgebra) -> Result<PolyMatrix, ExactError> {
    let s = algebra.dim();
    let vars = var_names(s);
    let mut chain = PolyMatrix::identity(vars.clone(), s);
    let mut out = PolyMatrix::zeros(vars.clone(), s, s);
    // check every factor first so the error names the offending basis element
    let factors = (0..s)
        .map(|a| {
            let scalar = Poly::var(s, a).neg();
            exact_exp_nilpotent(vars.clone(), &algebra.adjoint(a), &scalar, &format!("ad(xi{})", a + 1))
        })
        .collect::<Result<Vec<_>, _>>()?;
    for (a, factor) in factors.iter().enumerate() {
        for g in 0..s {
            out.set(g, a, chain.get(g, a).clone());
        }
        if a + 1 < s {
            chain = chain.mul(factor);
        }
    }
    Ok(out)
}

/// `lambda(t) = omega(-i t)`.
pub fn exact_lambda(algebra: &RationalAlgebra) -> Result<PolyMatrix, ExactError> {
    Ok(continue_to_lambda(&exact_omega(algebra)?))
}

fn continue_to_lambda(omega: &PolyMatrix) -> PolyMatrix {
    let minus_i = GaussianRational::i().conj();
    let factors = vec![minus_i; omega.nvars()];
    omega.map(|p| p.scale_vars(&factors))
}

/// Polynomial residual tensor, `a < b` stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactResidual {
    dim: usize,
    upper: Vec<Poly>,
}

impl ExactResidual {
    fn offset(&self, a: usize, b: usize) -> usize {
        (a * (2 * self.dim - a - 1) / 2 + (b - a - 1)) * self.dim
    }

    pub fn get(&self, a: usize, b: usize, g: usize) -> Poly {
        use std::cmp::Ordering::*;
        match a.cmp(&b) {
            Less => self.upper[self.offset(a, b) + g].clone(),
            Greater => self.upper[self.offset(b, a) + g].neg(),
            Equal => Poly::zero(self.dim),
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        self.upper.iter().all(Poly::is_zero)
    }

    /// First nonzero component, one-based.
    pub fn first_nonzero(&self) -> Option<([usize; 3], Poly)> {
        let s = self.dim;
        (0..s)
            .flat_map(|a| (a + 1..s).map(move |b| (a, b)))
            .flat_map(|(a, b)| (0..s).map(move |g| (a, b, g)))
            .map(|(a, b, g)| ([a + 1, b + 1, g + 1], self.get(a, b, g)))
            .find(|(_, p)| !p.is_zero())
    }

    pub fn eval(&self, at: CoordinatePoint, point: &[GaussianRational]) -> ResidualTensor {
        ResidualTensor::from_fn(at, self.dim, self.dim, |a, b, g| self.get(a, b, g).eval(point).to_c64())
    }

    pub fn to_json(&self) -> Value {
        let s = self.dim;
        let comps: Vec<Value> = (0..s)
            .flat_map(|a| (a + 1..s).map(move |b| (a, b)))
            .flat_map(|(a, b)| (0..s).map(move |g| (a, b, g)))
            .map(|(a, b, g)| json!({ "indices": [a + 1, b + 1, g + 1], "poly": self.get(a, b, g).to_json() }))
            .collect();
        json!({ "identically_zero": self.is_identically_zero(), "components": comps })
    }
}

/// `d_a M_b^g - d_b M_a^g + w * [M_a, M_b]^g` for coefficient matrix `m`.
fn residual_of(algebra: &RationalAlgebra, m: &PolyMatrix, bracket_weight: &GaussianRational) -> ExactResidual {
    let s = algebra.dim();
    let partials: Vec<PolyMatrix> = (0..s).map(|i| m.map(|p| p.derivative(i))).collect();
    let mut upper = Vec::with_capacity(s * s.saturating_sub(1) / 2 * s);
    for a in 0..s {
        for b in a + 1..s {
            let col_a: Vec<&Poly> = (0..s).map(|g| m.get(g, a)).collect();
            let col_b: Vec<&Poly> = (0..s).map(|g| m.get(g, b)).collect();
            let br = algebra.bracket(&col_a, &col_b);
            for (g, bracket) in br.iter().enumerate() {
                let d = partials[a].get(g, b).sub(partials[b].get(g, a));
                upper.push(d.add(&bracket.scale(bracket_weight)));
            }
        }
    }
    ExactResidual { dim: s, upper }
}

/// Flatness residual `d_a lambda_b - d_b lambda_a - i [lambda_a, lambda_b]`, which should vanish identically.
pub fn exact_flatness_residual(algebra: &RationalAlgebra) -> Result<ExactResidual, ExactError> {
    let lambda = exact_lambda(algebra)?;
    Ok(residual_of(algebra, &lambda, &GaussianRational::i().conj()))
}

/// Maurer-Cartan residual `d_a omega_b - d_b omega_a + [omega_a, omega_b]`.
pub fn exact_maurer_cartan_residual(algebra: &RationalAlgebra) -> Result<ExactResidual, ExactError> {
    let omega = exact_omega(algebra)?;
    Ok(residual_of(algebra, &omega, &GaussianRational::one()))
}

/// Everything the oracle knows about one algebra, computed once.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub algebra: RationalAlgebra,
    pub omega: PolyMatrix,
    pub lambda: PolyMatrix,
    pub flatness: ExactResidual,
    pub maurer_cartan: ExactResidual,
}

impl Oracle {
    pub fn new(algebra: &LieAlgebra) -> Result<Self, ExactError> {
        Self::from_rational(RationalAlgebra::from_algebra(algebra)?)
    }

    pub fn from_rational(algebra: RationalAlgebra) -> Result<Self, ExactError> {
        let omega = exact_omega(&algebra)?;
        let lambda = continue_to_lambda(&omega);
        let flatness = residual_of(&algebra, &lambda, &GaussianRational::i().conj());
        let maurer_cartan = residual_of(&algebra, &omega, &GaussianRational::one());
        Ok(Self { algebra, omega, lambda, flatness, maurer_cartan })
    }

    /// Converts a real point exactly.
    pub fn rational_point(t: &[f64]) -> Result<Vec<GaussianRational>, ExactError> {
        t.iter().map(|&x| GaussianRational::from_f64(x).ok_or(ExactError::NonFinitePoint)).collect()
    }

    pub(crate) fn flatness_residual_at(&self, at: CoordinatePoint, t: &[f64]) -> ResidualTensor {
        let q = Self::rational_point(t).expect("finite point");
        self.flatness.eval(at, &q)
    }

    pub(crate) fn maurer_cartan_residual_at(&self, at: CoordinatePoint, t: &[f64]) -> ResidualTensor {
        let q = Self::rational_point(t).expect("finite point");
        self.maurer_cartan.eval(at, &q)
    }
}
