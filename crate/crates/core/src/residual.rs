//! Residual tensors `R[a][b][g]`, antisymmetric in `(a, b)`, and the grid report envelope.

use serde::Serialize;

use crate::coords::CoordinatePoint;
use crate::fd::{FdDiagnostic, FdSpec, Jet};
use crate::grid::GridSpec;
use crate::lie::LieAlgebra;
use crate::C64;

/// Stores only `a < b`; the rest is reconstructed, so antisymmetry holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualTensor {
    pub at: CoordinatePoint,
    active: usize,
    dim: usize,
    upper: Vec<C64>,
}

impl ResidualTensor {
    pub fn zeros(at: CoordinatePoint, active: usize, dim: usize) -> Self {
        let pairs = active * active.saturating_sub(1) / 2;
        Self { at, active, dim, upper: vec![C64::new(0.0, 0.0); pairs * dim] }
    }

    /// Fills `a < b` entries from `f(a, b, g)`.
    pub fn from_fn(
        at: CoordinatePoint,
        active: usize,
        dim: usize,
        mut f: impl FnMut(usize, usize, usize) -> C64,
    ) -> Self {
        let mut t = Self::zeros(at, active, dim);
        for a in 0..active {
            for b in a + 1..active {
                for g in 0..dim {
                    let i = t.offset(a, b) + g;
                    t.upper[i] = f(a, b, g);
                }
            }
        }
        t
    }

    fn offset(&self, a: usize, b: usize) -> usize {
        // index of pair (a, b), a < b, in row-major upper-triangle order
        let pair = a * (2 * self.active - a - 1) / 2 + (b - a - 1);
        pair * self.dim
    }

    /// Number of lower indices `(a, b)` in play.
    pub fn active(&self) -> usize {
        self.active
    }

    /// Range of the upper index `g`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }

    pub fn get(&self, a: usize, b: usize, g: usize) -> C64 {
        use std::cmp::Ordering::*;
        match a.cmp(&b) {
            Less => self.upper[self.offset(a, b) + g],
            Greater => -self.upper[self.offset(b, a) + g],
            Equal => C64::new(0.0, 0.0),
        }
    }

    /// Largest component modulus with its zero-based indices.
    pub fn max_abs(&self) -> (f64, Option<[usize; 3]>) {
        let mut best = (0.0, None);
        for a in 0..self.active {
            for b in a + 1..self.active {
                for g in 0..self.dim {
                    let v = self.get(a, b, g).norm();
                    if v > best.0 || best.1.is_none() {
                        best = (v, Some([a, b, g]));
                    }
                }
            }
        }
        best
    }

    /// `factor * self` over the same point.
    pub fn scaled(&self, factor: C64) -> Self {
        Self { upper: self.upper.iter().map(|&z| z * factor).collect(), ..self.clone() }
    }

    /// Largest componentwise difference between two tensors of the same shape.
    pub fn max_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.active, self.dim), (other.active, other.dim), "residual shape mismatch");
        self.upper.iter().zip(&other.upper).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let comps: Vec<serde_json::Value> = (0..self.active)
            .flat_map(|a| (a + 1..self.active).map(move |b| (a, b)))
            .flat_map(|(a, b)| (0..self.dim).map(move |g| (a, b, g)))
            .map(|(a, b, g)| {
                let z = self.get(a, b, g);
                serde_json::json!({ "indices": [a + 1, b + 1, g + 1], "value": [z.re, z.im] })
            })
            .collect();
        serde_json::json!({
            "convention": "lhs_minus_rhs",
            "at": self.at,
            "components": comps,
        })
    }
}

/// `P_a[g, b] - P_b[g, a]`: the exterior derivative of the coefficient one-form.
pub(crate) fn exterior_derivative(jet: &Jet, a: usize, b: usize, g: usize) -> C64 {
    jet.partials[a][(g, b)] - jet.partials[b][(g, a)]
}

/// `sum_{m,n} V[m, a] V[n, b] c[m][n][g]` for all `g`.
pub(crate) fn bracket_columns(algebra: &LieAlgebra, jet: &Jet, a: usize, b: usize) -> Vec<C64> {
    let u = jet.value.column(a).into_owned();
    let v = jet.value.column(b).into_owned();
    algebra.bracket(&u, &v).iter().copied().collect()
}

/// Residual combining derivative and bracket terms as `wd * d + wb * [.,.]`.
pub(crate) fn combine(
    algebra: &LieAlgebra,
    jet: &Jet,
    at: CoordinatePoint,
    active: usize,
    derivative_weight: C64,
    bracket_weight: C64,
) -> ResidualTensor {
    let s = algebra.dim();
    let mut brackets = vec![Vec::new(); active * active];
    for a in 0..active {
        for b in a + 1..active {
            brackets[a * active + b] = bracket_columns(algebra, jet, a, b);
        }
    }
    ResidualTensor::from_fn(at, active, s, |a, b, g| {
        derivative_weight * exterior_derivative(jet, a, b, g) + bracket_weight * brackets[a * active + b][g]
    })
}

/// Witness of the worst residual in a grid sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub point: CoordinatePoint,
    /// One-based `[a, b, g]`; absent when the tensor is empty.
    pub indices: Option<[usize; 3]>,
}

/// JSON report envelope shared by every residual check.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub check: String,
    pub max_residual: f64,
    pub witness: Option<Witness>,
    pub grid: GridSpec,
    pub fd: FdSpec,
    pub points: usize,
    pub diagnostics: Vec<FdDiagnostic>,
}

impl ResidualReport {
    /// Folds per-point tensors into the envelope.
    pub(crate) fn from_tensors(check: &str, grid: &GridSpec, fd: &FdSpec, tensors: &[ResidualTensor]) -> Self {
        let mut max_residual = 0.0;
        let mut witness = None;
        for t in tensors {
            let (v, idx) = t.max_abs();
            if witness.is_none() || v > max_residual {
                max_residual = v;
                witness = Some(Witness { point: t.at.clone(), indices: idx.map(|[a, b, g]| [a + 1, b + 1, g + 1]) });
            }
        }
        Self {
            check: check.to_string(),
            max_residual,
            witness,
            grid: grid.clone(),
            fd: *fd,
            points: tensors.len(),
            diagnostics: Vec::new(),
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual <= tol
    }
}
