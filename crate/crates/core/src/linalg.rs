//! Small dense complex linear algebra: numerical rank and column-space bases.

use nalgebra::DMatrix;

use crate::C64;

/// Relative singular-value cut-off used for every rank decision in the crate.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Singular values of `m`, largest first. Empty matrices have none.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank: number of singular values above `rel_tol * sigma_max`.
pub fn rank(m: &DMatrix<C64>, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        Some(&top) if top > 0.0 => sv.iter().filter(|&&s| s > rel_tol * top).count(),
        _ => 0,
    }
}

/// Orthonormal basis (as columns) of the column space of `m`.
///
/// `scale` sets the absolute reference for the cut-off, so that a matrix whose
/// columns are all round-off relative to `scale` gets an empty basis.
pub fn column_space(m: &DMatrix<C64>, rel_tol: f64, scale: f64) -> DMatrix<C64> {
    let rows = m.nrows();
    if rows == 0 || m.ncols() == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let cut = rel_tol * scale.max(f64::MIN_POSITIVE);
    let keep: Vec<usize> = svd.singular_values.iter().enumerate().filter(|(_, &s)| s > cut).map(|(i, _)| i).collect();
    DMatrix::from_fn(rows, keep.len(), |r, c| u[(r, keep[c])])
}

/// Horizontal concatenation of equally tall blocks.
pub fn hstack(blocks: &[&DMatrix<C64>]) -> DMatrix<C64> {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack: row mismatch");
        out.columns_mut(at, b.ncols()).copy_from(b);
        at += b.ncols();
    }
    out
}

/// Entrywise complex conjugate.
pub fn conj(m: &DMatrix<C64>) -> DMatrix<C64> {
    m.map(|z| z.conj())
}

/// Largest entry modulus, 0 for empty matrices.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Distance from `v` to the span of the orthonormal columns of `q`.
pub fn distance_to_span(q: &DMatrix<C64>, v: &DMatrix<C64>) -> f64 {
    let proj = q * (q.adjoint() * v);
    (v - proj).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rank_of_conjugate_pair() {
        // xi1 + i xi2 and its conjugate are independent; (1+i) xi1 and its conjugate are not.
        let h = DMatrix::from_column_slice(3, 1, &[c(1., 0.), c(0., 1.), c(0., 0.)]);
        assert_eq!(rank(&hstack(&[&h, &conj(&h)]), DEFAULT_RANK_TOL), 2);
        let bad = DMatrix::from_column_slice(3, 1, &[c(1., 1.), c(0., 0.), c(0., 0.)]);
        assert_eq!(rank(&hstack(&[&bad, &conj(&bad)]), DEFAULT_RANK_TOL), 1);
    }

    #[test]
    fn zero_and_empty() {
        assert_eq!(rank(&DMatrix::zeros(3, 3), DEFAULT_RANK_TOL), 0);
        assert_eq!(rank(&DMatrix::zeros(3, 0), DEFAULT_RANK_TOL), 0);
        assert_eq!(column_space(&DMatrix::zeros(4, 2), 1e-10, 1.0).ncols(), 0);
    }

    #[test]
    fn distance_to_axis() {
        let q = DMatrix::from_column_slice(2, 1, &[c(1., 0.), c(0., 0.)]);
        let v = DMatrix::from_column_slice(2, 1, &[c(5., 0.), c(0., 3.)]);
        assert!((distance_to_span(&q, &v) - 3.0).abs() < 1e-14);
    }
}
