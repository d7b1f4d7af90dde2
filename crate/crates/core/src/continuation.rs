//! Analytic continuation `lambda(t) = omega(-i t)` and the flatness system
//!
//! ```text
//! d_a lambda_b^g - d_b lambda_a^g = i lambda_a^m lambda_b^n c_{mn}^g
//! ```
//!
//! Each factor of the Ad-chain is entire in its coordinate, so the chain is
//! evaluated directly at the complex point `-i t`, i.e. with factors
//! `exp(+i t^m ad(xi_m))`. Residuals are "left-hand side minus right-hand side".

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coords::{CoefficientMatrix, CoordinatePoint, EvalError};
use crate::exact;
use crate::fd::{DerivativeMode, FdSpec, Jet};
use crate::grid::{GridSpec, DEFAULT_SEED};
use crate::lie::LieAlgebra;
use crate::maurer_cartan::{sweep, SecondKindChart};
use crate::residual::{self, ResidualReport, ResidualTensor};
use crate::C64;

pub const DEPENDENCE_TOL: f64 = 1e-12;

const MINUS_I: C64 = C64::new(0.0, -1.0);
const I: C64 = C64::new(0.0, 1.0);

pub(crate) fn continued_coords(x: &[f64]) -> Vec<C64> {
    x.iter().map(|&v| MINUS_I * v).collect()
}

impl SecondKindChart<'_> {
    /// `lambda` at `point`; the stored `at` is the original (unrotated) point.
    pub fn lambda(&self, point: &CoordinatePoint) -> Result<CoefficientMatrix, EvalError> {
        let rotated = point.scaled(MINUS_I);
        let omega = self.omega(&rotated)?;
        Ok(CoefficientMatrix { at: point.clone(), values: omega.values })
    }

    /// `lambda` at a real point without the chart check.
    pub(crate) fn lambda_values(&self, t: &[f64]) -> Result<DMatrix<C64>, EvalError> {
        self.omega_values(&continued_coords(t))
    }

    pub(crate) fn lambda_jet(&self, t: &[f64], axes: usize, fd: &FdSpec) -> Result<Jet, EvalError> {
        self.jet_with(t, axes, fd, continued_coords)
    }
}

/// `lambda_a^g(t)` with the default validity radius.
pub fn lambda_at(algebra: &LieAlgebra, point: &CoordinatePoint) -> Result<CoefficientMatrix, EvalError> {
    SecondKindChart::new(algebra).lambda(point)
}

fn real_point(chart: &SecondKindChart<'_>, point: &CoordinatePoint) -> Result<Vec<f64>, EvalError> {
    point.check(chart.algebra().dim(), chart.r_max())?;
    point.to_real().ok_or(EvalError::ComplexPoint)
}

/// `R = (d_a lambda_b - d_b lambda_a) - i [lambda_a, lambda_b]`.
pub fn flatness_residual(
    algebra: &LieAlgebra,
    point: &CoordinatePoint,
    fd: &FdSpec,
) -> Result<ResidualTensor, EvalError> {
    flatness_residual_in(&SecondKindChart::new(algebra), point, fd)
}

pub fn flatness_residual_in(
    chart: &SecondKindChart<'_>,
    point: &CoordinatePoint,
    fd: &FdSpec,
) -> Result<ResidualTensor, EvalError> {
    let t = real_point(chart, point)?;
    match fd.mode {
        DerivativeMode::ExactPolynomial => {
            let oracle = exact::Oracle::new(chart.algebra())?;
            Ok(oracle.flatness_residual_at(point.clone(), &t))
        }
        DerivativeMode::FiniteDifference => {
            fd.validate()?;
            let s = chart.algebra().dim();
            let jet = chart.lambda_jet(&t, s, fd)?;
            Ok(flatness_from_jet(chart.algebra(), &jet, point.clone(), s))
        }
    }
}

pub(crate) fn flatness_from_jet(algebra: &LieAlgebra, jet: &Jet, at: CoordinatePoint, active: usize) -> ResidualTensor {
    residual::combine(algebra, jet, at, active, C64::new(1.0, 0.0), MINUS_I)
}

/// `dLambda - (i/2) [Lambda, Lambda]`, with the graded bracket expanded in both orders.
pub fn bracket_form_residual(
    algebra: &LieAlgebra,
    point: &CoordinatePoint,
    fd: &FdSpec,
) -> Result<ResidualTensor, EvalError> {
    bracket_form_residual_in(&SecondKindChart::new(algebra), point, fd)
}

pub fn bracket_form_residual_in(
    chart: &SecondKindChart<'_>,
    point: &CoordinatePoint,
    fd: &FdSpec,
) -> Result<ResidualTensor, EvalError> {
    let t = real_point(chart, point)?;
    let s = chart.algebra().dim();
    let jet = match fd.mode {
        DerivativeMode::ExactPolynomial => exact_lambda_jet(chart.algebra(), &t)?,
        DerivativeMode::FiniteDifference => {
            fd.validate()?;
            chart.lambda_jet(&t, s, fd)?
        }
    };
    Ok(bracket_form_from_jet(chart.algebra(), &jet, point.clone()))
}

fn bracket_form_from_jet(algebra: &LieAlgebra, jet: &Jet, at: CoordinatePoint) -> ResidualTensor {
    let s = algebra.dim();
    let half_i = C64::new(0.0, 0.5);
    ResidualTensor::from_fn(at, s, s, |a, b, g| {
        let mut graded = C64::new(0.0, 0.0);
        for m in 0..s {
            for n in 0..s {
                let c = algebra.constants().get(m, n, g);
                graded += jet.value[(m, a)] * jet.value[(n, b)] * c - jet.value[(m, b)] * jet.value[(n, a)] * c;
            }
        }
        residual::exterior_derivative(jet, a, b, g) - half_i * graded
    })
}

/// Exact values and partials of `lambda`, rounded once to doubles.
fn exact_lambda_jet(algebra: &LieAlgebra, t: &[f64]) -> Result<Jet, EvalError> {
    let oracle = exact::Oracle::new(algebra)?;
    let q = exact::Oracle::rational_point(t)?;
    let s = algebra.dim();
    let to_matrix = |rows: Vec<Vec<exact::GaussianRational>>| DMatrix::from_fn(s, s, |r, c| rows[r][c].to_c64());
    let value = to_matrix(oracle.lambda.eval(&q));
    let partials = (0..s).map(|i| to_matrix(oracle.lambda.map(|p| p.derivative(i)).eval(&q))).collect();
    Ok(Jet { value, partials })
}

/// Flatness and bracket-form residuals from one shared derivative estimate.
pub fn flatness_and_bracket_form(
    chart: &SecondKindChart<'_>,
    point: &CoordinatePoint,
    fd: &FdSpec,
) -> Result<(ResidualTensor, ResidualTensor), EvalError> {
    let t = real_point(chart, point)?;
    fd.validate()?;
    let s = chart.algebra().dim();
    let jet = chart.lambda_jet(&t, s, fd)?;
    Ok((
        flatness_from_jet(chart.algebra(), &jet, point.clone(), s),
        bracket_form_from_jet(chart.algebra(), &jet, point.clone()),
    ))
}

/// Flatness residual over a grid.
pub fn verify_flatness(chart: &SecondKindChart<'_>, grid: &GridSpec, fd: &FdSpec) -> Result<ResidualReport, EvalError> {
    let s = chart.algebra().dim();
    match fd.mode {
        DerivativeMode::ExactPolynomial => {
            let oracle = exact::Oracle::new(chart.algebra())?;
            sweep("flatness", s, grid, fd, |p, _| {
                let t = real_point(chart, p)?;
                Ok(oracle.flatness_residual_at(p.clone(), &t))
            })
        }
        DerivativeMode::FiniteDifference => {
            sweep("flatness", s, grid, fd, |p, spec| flatness_residual_in(chart, p, spec))
        }
    }
}

/// Largest difference between the indexed and bracket forms over a grid.
pub fn bracket_form_agreement(
    chart: &SecondKindChart<'_>,
    grid: &GridSpec,
    fd: &FdSpec,
) -> Result<ResidualReport, EvalError> {
    let s = chart.algebra().dim();
    let mut report = sweep(
        "bracket_form_agreement",
        s,
        grid,
        &FdSpec { mode: DerivativeMode::FiniteDifference, ..*fd },
        |p, spec| {
            let (flat, bracket) = flatness_and_bracket_form(chart, p, spec)?;
            let n = flat.active();
            Ok(ResidualTensor::from_fn(p.clone(), n, n, |a, b, g| flat.get(a, b, g) - bracket.get(a, b, g)))
        },
    )?;
    // a difference of residuals says nothing about the step
    report.diagnostics.clear();
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct DependenceWitness {
    /// One-based column.
    pub column: usize,
    pub point: CoordinatePoint,
    pub perturbed: CoordinatePoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct DependenceReport {
    pub check: String,
    pub passed: bool,
    pub samples: usize,
    pub trials: usize,
    pub tolerance: f64,
    pub max_deviation: f64,
    pub witness: Option<DependenceWitness>,
}

/// Column `a` of `lambda` must not move when `t^a, ..., t^s` change.
pub fn check_triangular_dependence(algebra: &LieAlgebra, samples: usize) -> Result<DependenceReport, EvalError> {
    let chart = SecondKindChart::new(algebra);
    let half_width = 0.5 * chart.r_max();
    check_triangular_dependence_in(&chart, samples, half_width, DEFAULT_SEED)
}

pub fn check_triangular_dependence_in(
    chart: &SecondKindChart<'_>,
    samples: usize,
    half_width: f64,
    seed: u64,
) -> Result<DependenceReport, EvalError> {
    let s = chart.algebra().dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = DependenceReport {
        check: "triangular_dependence".into(),
        passed: true,
        samples,
        trials: 0,
        tolerance: DEPENDENCE_TOL,
        max_deviation: 0.0,
        witness: None,
    };
    let draw = |rng: &mut ChaCha8Rng| rng.gen_range(-half_width..=half_width);
    for _ in 0..samples.max(1) {
        let base: Vec<f64> = (0..s).map(|_| draw(&mut rng)).collect();
        let base_point = CoordinatePoint::real(&base)?;
        let lam = chart.lambda(&base_point)?;
        for a in 0..s {
            let mut moved = base.clone();
            for x in moved.iter_mut().skip(a) {
                *x = draw(&mut rng);
            }
            let moved_point = CoordinatePoint::real(&moved)?;
            let other = chart.lambda(&moved_point)?;
            let dev = (0..s).fold(0.0f64, |m, g| m.max((lam.values[(g, a)] - other.values[(g, a)]).norm()));
            report.trials += 1;
            if dev > report.max_deviation || (report.witness.is_none() && dev > DEPENDENCE_TOL) {
                report.max_deviation = dev;
                if dev > DEPENDENCE_TOL {
                    report.passed = false;
                    report.witness =
                        Some(DependenceWitness { column: a + 1, point: base_point.clone(), perturbed: moved_point });
                }
            }
        }
    }
    Ok(report)
}

/// Commutation coefficients `C = [lambda_a, lambda_b] + i (d_a lambda_b - d_b lambda_a)` for
/// `a, b < active`, from an arbitrary coefficient field evaluated at real points.
pub fn commutation_residual_of<F>(
    algebra: &LieAlgebra,
    field: &F,
    point: &CoordinatePoint,
    active: usize,
    fd: &FdSpec,
) -> Result<ResidualTensor, EvalError>
where
    F: Fn(&[f64]) -> Result<DMatrix<C64>, EvalError>,
{
    fd.validate()?;
    let t = point.to_real().ok_or(EvalError::ComplexPoint)?;
    let jet = Jet { value: field(&t)?, partials: crate::fd::partials(field, &t, active, fd)? };
    Ok(residual::combine(algebra, &jet, point.clone(), active, I, C64::new(1.0, 0.0)))
}
