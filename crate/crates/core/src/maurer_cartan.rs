//! Maurer-Cartan coefficients in exponential coordinates of the second kind.
//!
//! With `g = exp(t^s xi_s) ... exp(t^1 xi_1)`, the `dt^a` component of the
//! left-invariant form `g^{-1} dg` is
//!
//! ```text
//! Ad(exp(-t^1 xi_1)) ... Ad(exp(-t^{a-1} xi_{a-1})) xi_a
//! ```
//!
//! and `Ad(exp X) = exp(ad X)`. Column `a` of the coefficient matrix is
//! therefore `E_1 E_2 ... E_{a-1} e_a` with `E_m = exp(-t^m ad(xi_m))`, which
//! reads only `t^1 .. t^{a-1}`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::coords::{CoefficientMatrix, CoordinatePoint, EvalError, DEFAULT_R_MAX};
use crate::exact;
use crate::expm::{expm, nilpotency_index, taylor_finite};
use crate::fd::{self, DerivativeMode, FdSpec, Jet};
use crate::grid::GridSpec;
use crate::lie::LieAlgebra;
use crate::residual::{self, ResidualReport, ResidualTensor};
use crate::C64;

/// An algebra together with its adjoint matrices and a validity radius.
#[derive(Debug, Clone)]
pub struct SecondKindChart<'a> {
    algebra: &'a LieAlgebra,
    ads: Vec<DMatrix<C64>>,
    /// Nilpotency index of each `ad(xi_a)`; unchanged by scaling with `t^a`.
    nil: Vec<Option<usize>>,
    r_max: f64,
}

impl<'a> SecondKindChart<'a> {
    pub fn new(algebra: &'a LieAlgebra) -> Self {
        let ads = algebra.adjoint_matrices();
        let nil = ads.iter().map(nilpotency_index).collect();
        Self { algebra, ads, nil, r_max: DEFAULT_R_MAX }
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = r_max;
        self
    }

    pub fn algebra(&self) -> &'a LieAlgebra {
        self.algebra
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Coefficient matrix at a (possibly complex) point.
    pub fn omega(&self, point: &CoordinatePoint) -> Result<CoefficientMatrix, EvalError> {
        point.check(self.algebra.dim(), self.r_max)?;
        Ok(CoefficientMatrix { at: point.clone(), values: self.omega_values(point.coords())? })
    }

    /// The Ad-chain without the chart check.
    pub(crate) fn omega_values(&self, t: &[C64]) -> Result<DMatrix<C64>, EvalError> {
        let s = self.algebra.dim();
        let mut chain = DMatrix::<C64>::identity(s, s);
        let mut out = DMatrix::<C64>::zeros(s, s);
        for (a, &ta) in t.iter().enumerate().take(s) {
            out.set_column(a, &chain.column(a));
            if a + 1 == s || ta == C64::new(0.0, 0.0) || self.nil[a] == Some(1) {
                continue;
            }
            let m = &self.ads[a] * -ta;
            let factor = match self.nil[a] {
                Some(k) => taylor_finite(&m, k),
                None => expm(&m)?,
            };
            chain = &chain * factor;
        }
        Ok(out)
    }

    /// Value and partials in the first `axes` real coordinates, `t -> coords(t)`
    /// composed with the Ad-chain.
    pub(crate) fn jet_with<F>(&self, t: &[f64], axes: usize, fd: &FdSpec, coords: F) -> Result<Jet, EvalError>
    where
        F: Fn(&[f64]) -> Vec<C64>,
    {
        let f = |x: &[f64]| self.omega_values(&coords(x));
        Ok(Jet { value: f(t)?, partials: fd::partials(&f, t, axes, fd)? })
    }
}

/// Coefficients `omega[g][a]` at `point` with the default validity radius.
pub fn omega_at(algebra: &LieAlgebra, point: &CoordinatePoint) -> Result<CoefficientMatrix, EvalError> {
    SecondKindChart::new(algebra).omega(point)
}

/// `D[a][b][g] = d_a omega_b^g - d_b omega_a^g + sum omega_a^m omega_b^n c[m][n][g]` at a real point.
pub fn maurer_cartan_residual(
    chart: &SecondKindChart<'_>,
    point: &CoordinatePoint,
    fd: &FdSpec,
) -> Result<ResidualTensor, EvalError> {
    let algebra = chart.algebra();
    let s = algebra.dim();
    point.check(s, chart.r_max())?;
    let t = point.to_real().ok_or(EvalError::ComplexPoint)?;
    match fd.mode {
        DerivativeMode::ExactPolynomial => {
            let oracle = exact::Oracle::new(algebra)?;
            Ok(oracle.maurer_cartan_residual_at(point.clone(), &t))
        }
        DerivativeMode::FiniteDifference => {
            fd.validate()?;
            let jet = chart.jet_with(&t, s, fd, real_coords)?;
            let one = C64::new(1.0, 0.0);
            Ok(residual::combine(algebra, &jet, point.clone(), s, one, one))
        }
    }
}

fn real_coords(x: &[f64]) -> Vec<C64> {
    x.iter().map(|&v| C64::new(v, 0.0)).collect()
}

/// Sweeps the Maurer-Cartan residual over `grid` with the default validity radius.
pub fn verify_maurer_cartan(algebra: &LieAlgebra, grid: &GridSpec, fd: &FdSpec) -> Result<ResidualReport, EvalError> {
    verify_maurer_cartan_in(&SecondKindChart::new(algebra), grid, fd)
}

pub fn verify_maurer_cartan_in(
    chart: &SecondKindChart<'_>,
    grid: &GridSpec,
    fd: &FdSpec,
) -> Result<ResidualReport, EvalError> {
    let s = chart.algebra().dim();
    match fd.mode {
        DerivativeMode::ExactPolynomial => {
            let oracle = exact::Oracle::new(chart.algebra())?;
            sweep("maurer_cartan", s, grid, fd, |p, _| {
                p.check(s, chart.r_max())?;
                let t = p.to_real().ok_or(EvalError::ComplexPoint)?;
                Ok(oracle.maurer_cartan_residual_at(p.clone(), &t))
            })
        }
        DerivativeMode::FiniteDifference => {
            sweep("maurer_cartan", s, grid, fd, |p, spec| maurer_cartan_residual(chart, p, spec))
        }
    }
}

/// Runs `eval` over every grid point in parallel, then probes the step at the witness.
pub(crate) fn sweep<F>(
    check: &str,
    dim: usize,
    grid: &GridSpec,
    fd: &FdSpec,
    eval: F,
) -> Result<ResidualReport, EvalError>
where
    F: Fn(&CoordinatePoint, &FdSpec) -> Result<ResidualTensor, EvalError> + Sync,
{
    if fd.mode == DerivativeMode::FiniteDifference {
        fd.validate()?;
    }
    let points: Vec<CoordinatePoint> =
        grid.points(dim).iter().map(|p| CoordinatePoint::real(p)).collect::<Result<_, _>>()?;
    let tensors: Vec<ResidualTensor> = points.par_iter().map(|p| eval(p, fd)).collect::<Result<_, _>>()?;
    let mut report = ResidualReport::from_tensors(check, grid, fd, &tensors);
    if let Some(w) = &report.witness {
        if fd.mode == DerivativeMode::FiniteDifference && report.max_residual > 0.0 {
            let doubled = FdSpec { step: 2.0 * fd.step, ..*fd };
            let coarse = eval(&w.point, &doubled)?.max_abs().0;
            report.diagnostics.extend(fd::classify_step(fd, report.max_residual, coarse));
        }
    }
    Ok(report)
}
