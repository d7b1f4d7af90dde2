//! Matrix exponential for small complex matrices.
//!
//! Exactly nilpotent inputs use the finite Taylor sum. Everything else goes
//! through scaling and squaring with the degree-13 Padé approximant
//! (Higham, SIAM J. Matrix Anal. Appl. 26 (2005)).

use nalgebra::DMatrix;
use thiserror::Error;

use crate::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpmError {
    #[error("matrix exponential did not converge: {0}")]
    ConvergenceFailure(String),
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA_13: f64 = 5.371920351148152;

/// Cap on squarings; beyond this the input norm is far outside any chart we evaluate on.
const MAX_SQUARINGS: i32 = 64;

/// Smallest `k` with `m^k == 0` exactly, if `k <= dim`.
pub fn nilpotency_index(m: &DMatrix<C64>) -> Option<usize> {
    let n = m.nrows();
    if m.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Some(1);
    }
    let mut p = m.clone();
    for k in 2..=n {
        p = &p * m;
        if p.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            return Some(k);
        }
    }
    None
}

/// `exp(m)`.
pub fn expm(m: &DMatrix<C64>) -> Result<DMatrix<C64>, ExpmError> {
    assert!(m.is_square(), "expm of non-square matrix");
    let n = m.nrows();
    if let Some(k) = nilpotency_index(m) {
        return Ok(taylor_finite(m, k));
    }
    if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(ExpmError::ConvergenceFailure("non-finite input".into()));
    }

    let norm1 = (0..n).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm1 > THETA_13 { (norm1 / THETA_13).log2().ceil() as i32 } else { 0 };
    if squarings > MAX_SQUARINGS {
        return Err(ExpmError::ConvergenceFailure(format!("1-norm {norm1:e} too large")));
    }
    let a = m * C64::new(0.5f64.powi(squarings), 0.0);

    let id = DMatrix::<C64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |i: usize| C64::new(PADE13[i], 0.0);

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9)) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8)) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or_else(|| ExpmError::ConvergenceFailure("singular Padé denominator".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if !r.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(ExpmError::ConvergenceFailure("overflow during squaring".into()));
    }
    Ok(r)
}

/// `sum_{j < order} m^j / j!`, exact when `m^order == 0`.
pub(crate) fn taylor_finite(m: &DMatrix<C64>, order: usize) -> DMatrix<C64> {
    let n = m.nrows();
    let mut out = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for j in 1..order {
        term = &term * m * C64::new(1.0 / j as f64, 0.0);
        out += &term;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DMatrix<C64>, b: &DMatrix<C64>, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() <= tol)
    }

    #[test]
    fn zero_gives_identity_exactly() {
        let e = expm(&DMatrix::zeros(4, 4)).unwrap();
        assert_eq!(e, DMatrix::identity(4, 4));
    }

    #[test]
    fn nilpotent_shift() {
        let mut m = DMatrix::<C64>::zeros(3, 3);
        m[(1, 0)] = C64::new(2.0, 0.0);
        m[(2, 1)] = C64::new(3.0, 0.0);
        assert_eq!(nilpotency_index(&m), Some(3));
        let e = expm(&m).unwrap();
        assert_eq!(e[(2, 0)], C64::new(3.0, 0.0)); // 2*3/2
        assert_eq!(e[(1, 0)], C64::new(2.0, 0.0));
    }

    #[test]
    fn diagonal_matches_scalar_exp() {
        let d = [C64::new(-3.0, 0.5), C64::new(0.0, 7.0), C64::new(1.5, 0.0)];
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&d));
        let e = expm(&m).unwrap();
        for (i, z) in d.iter().enumerate() {
            assert!((e[(i, i)] - z.exp()).norm() < 1e-13 * z.exp().norm().max(1.0));
        }
    }

    #[test]
    fn rotation_generator() {
        let theta = 2.3;
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(-theta, 0.0), C64::new(theta, 0.0), C64::new(0.0, 0.0)],
        );
        let e = expm(&m).unwrap();
        let expected = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(theta.cos(), 0.0),
                C64::new(-theta.sin(), 0.0),
                C64::new(theta.sin(), 0.0),
                C64::new(theta.cos(), 0.0),
            ],
        );
        assert!(close(&e, &expected, 1e-14));
    }

    #[test]
    fn agrees_with_nalgebra_on_dense_input() {
        // independent implementation as oracle
        let m = DMatrix::from_fn(4, 4, |i, j| {
            C64::new(((i * 7 + j * 3) % 5) as f64 * 0.9 - 1.7, ((i + 2 * j) % 3) as f64 * 0.4)
        });
        let ours = expm(&m).unwrap();
        let theirs = m.clone().exp();
        let scale = theirs.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        assert!(close(&ours, &theirs, 1e-12 * scale));
    }

    #[test]
    fn non_finite_input_fails() {
        let mut m = DMatrix::<C64>::identity(2, 2);
        m[(0, 1)] = C64::new(f64::INFINITY, 0.0);
        assert!(expm(&m).is_err());
    }
}
