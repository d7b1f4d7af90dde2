//! Central finite differences with Richardson extrapolation, and step diagnostics.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::coords::EvalError;
use crate::C64;

pub const MIN_STEP: f64 = 1e-8;
pub const MAX_STEP: f64 = 1e-2;
pub const MAX_RICHARDSON_LEVELS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    FiniteDifference,
    ExactPolynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSpec {
    pub step: f64,
    pub richardson_levels: usize,
    pub mode: DerivativeMode,
}

impl Default for FdSpec {
    fn default() -> Self {
        Self { step: 1e-4, richardson_levels: 1, mode: DerivativeMode::FiniteDifference }
    }
}

impl FdSpec {
    pub fn exact() -> Self {
        Self { mode: DerivativeMode::ExactPolynomial, ..Self::default() }
    }

    pub fn plain(step: f64) -> Self {
        Self { step, richardson_levels: 0, mode: DerivativeMode::FiniteDifference }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if !(MIN_STEP..=MAX_STEP).contains(&self.step) {
            return Err(EvalError::InvalidFdSpec(format!("step {} outside [{MIN_STEP:e}, {MAX_STEP:e}]", self.step)));
        }
        if self.richardson_levels > MAX_RICHARDSON_LEVELS {
            return Err(EvalError::InvalidFdSpec(format!(
                "richardson_levels {} exceeds {MAX_RICHARDSON_LEVELS}",
                self.richardson_levels
            )));
        }
        Ok(())
    }

    /// Leading truncation order of the extrapolated central difference.
    pub fn order(&self) -> i32 {
        2 * (self.richardson_levels as i32 + 1)
    }
}

/// Value and first partials of a matrix-valued function at a point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub value: DMatrix<C64>,
    pub partials: Vec<DMatrix<C64>>,
}

/// Partials along the first `axes` coordinates of `f` at the real point `t`.
pub fn partials<F>(f: &F, t: &[f64], axes: usize, fd: &FdSpec) -> Result<Vec<DMatrix<C64>>, EvalError>
where
    F: Fn(&[f64]) -> Result<DMatrix<C64>, EvalError>,
{
    (0..axes).map(|axis| partial(f, t, axis, fd.step, fd.richardson_levels)).collect()
}

fn central<F>(f: &F, t: &[f64], axis: usize, h: f64) -> Result<DMatrix<C64>, EvalError>
where
    F: Fn(&[f64]) -> Result<DMatrix<C64>, EvalError>,
{
    let mut plus = t.to_vec();
    let mut minus = t.to_vec();
    plus[axis] += h;
    minus[axis] -= h;
    Ok((f(&plus)? - f(&minus)?) * C64::new(0.5 / h, 0.0))
}

fn partial<F>(f: &F, t: &[f64], axis: usize, step: f64, levels: usize) -> Result<DMatrix<C64>, EvalError>
where
    F: Fn(&[f64]) -> Result<DMatrix<C64>, EvalError>,
{
    // Richardson table on h, h/2, h/4, ...; row j column k cancels h^2..h^{2k}.
    let mut prev: Vec<DMatrix<C64>> = Vec::with_capacity(levels + 1);
    for j in 0..=levels {
        let h = step / f64::from(1u32 << j);
        let mut row = vec![central(f, t, axis, h)?];
        for k in 1..=j {
            let w = 4f64.powi(k as i32);
            let next = (&row[k - 1] * C64::new(w, 0.0) - &prev[k - 1]) * C64::new(1.0 / (w - 1.0), 0.0);
            row.push(next);
        }
        prev = row;
    }
    Ok(prev.pop().expect("non-empty table"))
}

/// Diagnostic emitted when probing the step at the worst residual point.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FdDiagnostic {
    /// Doubling the step did not increase the residual: round-off dominates.
    StepTooSmall { residual: f64, residual_doubled: f64 },
    /// The residual grows like the truncation order under step doubling.
    StepTooLarge { residual: f64, residual_doubled: f64, expected_ratio: f64 },
}

/// Compares residuals computed with step `h` and `2h` at one point.
pub fn classify_step(fd: &FdSpec, residual: f64, residual_doubled: f64) -> Option<FdDiagnostic> {
    if residual == 0.0 || fd.mode == DerivativeMode::ExactPolynomial {
        return None;
    }
    let ratio = residual_doubled / residual;
    let expected_ratio = 2f64.powi(fd.order());
    if ratio <= 1.0 {
        Some(FdDiagnostic::StepTooSmall { residual, residual_doubled })
    } else if ratio >= 0.5 * expected_ratio {
        Some(FdDiagnostic::StepTooLarge { residual, residual_doubled, expected_ratio })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_field(t: &[f64]) -> Result<DMatrix<C64>, EvalError> {
        Ok(DMatrix::from_element(1, 1, C64::new(0.0, t[0] + 2.0 * t[1]).exp()))
    }

    #[test]
    fn richardson_improves_accuracy() {
        let t = [0.3, -0.2];
        let exact = C64::new(0.0, 1.0) * C64::new(0.0, t[0] + 2.0 * t[1]).exp();
        let plain = partials(&exp_field, &t, 1, &FdSpec::plain(1e-2)).unwrap();
        let rich =
            partials(&exp_field, &t, 1, &FdSpec { step: 1e-2, richardson_levels: 2, ..FdSpec::default() }).unwrap();
        let e_plain = (plain[0][(0, 0)] - exact).norm();
        let e_rich = (rich[0][(0, 0)] - exact).norm();
        assert!(e_plain > 1e-6 && e_plain < 1e-4);
        assert!(e_rich < 1e-11, "{e_rich}");
    }

    #[test]
    fn plain_central_is_second_order() {
        let t = [0.1, 0.4];
        let exact = C64::new(0.0, 2.0) * C64::new(0.0, t[0] + 2.0 * t[1]).exp();
        let err = |h: f64| (partials(&exp_field, &t, 2, &FdSpec::plain(h)).unwrap()[1][(0, 0)] - exact).norm();
        let ratio = err(1e-2) / err(5e-3);
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn validation() {
        assert!(FdSpec::default().validate().is_ok());
        assert!(FdSpec::plain(1e-9).validate().is_err());
        assert!(FdSpec::plain(0.1).validate().is_err());
        assert!(FdSpec { richardson_levels: 9, ..FdSpec::default() }.validate().is_err());
    }

    #[test]
    fn step_classification() {
        let fd = FdSpec::plain(1e-3);
        assert!(matches!(classify_step(&fd, 1e-6, 4e-6), Some(FdDiagnostic::StepTooLarge { .. })));
        assert!(matches!(classify_step(&fd, 1e-12, 6e-13), Some(FdDiagnostic::StepTooSmall { .. })));
        assert_eq!(classify_step(&fd, 1e-10, 1.5e-10), None);
        assert_eq!(classify_step(&fd, 0.0, 0.0), None);
    }
}
