//! Coordinate points in second-kind exponential coordinates and coefficient samples.

use nalgebra::DMatrix;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::exact::ExactError;
use crate::expm::ExpmError;
use crate::C64;

/// Default validity radius of the chart, in the max-norm of `t`.
pub const DEFAULT_R_MAX: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("coordinate {0} is not finite")]
    NonFinite(usize),
    #[error("point has {got} coordinates, algebra has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point norm {norm} exceeds validity radius {r_max}")]
    OutsideChart { norm: f64, r_max: f64 },
    #[error("finite differences need a real point")]
    ComplexPoint,
    #[error("invalid finite-difference settings: {0}")]
    InvalidFdSpec(String),
    #[error(transparent)]
    Expm(#[from] ExpmError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// A point `t = (t^1, ..., t^s)`; complex entries are admitted for the continuation.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinatePoint {
    t: Vec<C64>,
}

impl CoordinatePoint {
    pub fn new(t: Vec<C64>) -> Result<Self, EvalError> {
        if let Some(i) = t.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(EvalError::NonFinite(i + 1));
        }
        Ok(Self { t })
    }

    pub fn real(t: &[f64]) -> Result<Self, EvalError> {
        Self::new(t.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn origin(dim: usize) -> Self {
        Self { t: vec![C64::new(0.0, 0.0); dim] }
    }

    pub fn coords(&self) -> &[C64] {
        &self.t
    }

    pub fn dim(&self) -> usize {
        self.t.len()
    }

    pub fn max_norm(&self) -> f64 {
        self.t.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn is_real(&self) -> bool {
        self.t.iter().all(|z| z.im == 0.0)
    }

    pub fn to_real(&self) -> Option<Vec<f64>> {
        self.is_real().then(|| self.t.iter().map(|z| z.re).collect())
    }

    /// `factor * t`, entrywise.
    pub fn scaled(&self, factor: C64) -> Self {
        Self { t: self.t.iter().map(|&z| z * factor).collect() }
    }

    /// Zero-pads (or truncates) to `dim` coordinates.
    pub fn padded(&self, dim: usize) -> Self {
        let mut t = self.t.clone();
        t.resize(dim, C64::new(0.0, 0.0));
        Self { t }
    }

    pub(crate) fn check(&self, dim: usize, r_max: f64) -> Result<(), EvalError> {
        if self.dim() != dim {
            return Err(EvalError::DimensionMismatch { expected: dim, got: self.dim() });
        }
        let norm = self.max_norm();
        if norm > r_max {
            return Err(EvalError::OutsideChart { norm, r_max });
        }
        Ok(())
    }
}

impl Serialize for CoordinatePoint {
    /// Real points serialize as plain numbers, complex ones as `[re, im]` pairs.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.t.len()))?;
        if self.is_real() {
            for z in &self.t {
                seq.serialize_element(&z.re)?;
            }
        } else {
            for z in &self.t {
                seq.serialize_element(&[z.re, z.im])?;
            }
        }
        seq.end()
    }
}

/// `values[(g, a)]` is the coefficient of `xi_g` in the `dt^a` component.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    pub at: CoordinatePoint,
    pub values: DMatrix<C64>,
}

impl CoefficientMatrix {
    pub fn column(&self, a: usize) -> Vec<C64> {
        self.values.column(a).iter().copied().collect()
    }
}

/// Serializes a complex matrix row by row as `[[[re, im], ...], ...]`.
pub(crate) fn complex_rows(m: &DMatrix<C64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert_eq!(CoordinatePoint::real(&[0.0, f64::NAN]), Err(EvalError::NonFinite(2)));
    }

    #[test]
    fn chart_check() {
        let p = CoordinatePoint::real(&[0.2, -1.5]).unwrap();
        assert!(matches!(p.check(2, 1.0), Err(EvalError::OutsideChart { .. })));
        assert!(p.check(2, 2.0).is_ok());
        assert!(matches!(p.check(3, 2.0), Err(EvalError::DimensionMismatch { .. })));
    }

    #[test]
    fn serializes_real_and_complex() {
        let p = CoordinatePoint::real(&[0.5, -1.0]).unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), "[0.5,-1.0]");
        let q = p.scaled(C64::new(0.0, -1.0));
        assert_eq!(serde_json::to_string(&q).unwrap(), "[[0.0,-0.5],[0.0,1.0]]");
    }
}
