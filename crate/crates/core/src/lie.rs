//! Finite-dimensional complex Lie algebras given by structure constants.
//!
//! Indices are zero-based throughout the Rust API. Serialized witnesses and
//! error messages use one-based indices, matching the algebra file format.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::linalg;
use crate::C64;

/// Default Jacobi tolerance, relative to the size of the constants.
pub const DEFAULT_JACOBI_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("dimension must be positive")]
    EmptyAlgebra,
    #[error("tensor has {got} entries, expected {expected} for dimension {dim}")]
    ShapeMismatch { dim: usize, expected: usize, got: usize },
    #[error("non-finite structure constant at ({0}, {1}, {2})")]
    NonFinite(usize, usize, usize),
    #[error("antisymmetry violated at ({alpha}, {beta}, {gamma}): {lhs} vs {rhs}")]
    AntisymmetryViolation { alpha: usize, beta: usize, gamma: usize, lhs: C64, rhs: C64 },
    #[error("bracket entry ({0}, {1}) must have i < j")]
    NotUpperTriangular(usize, usize),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("Jacobi identity violated: residual {residual:e} at indices {witness:?}")]
    JacobiViolation { residual: f64, witness: [usize; 4] },
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
}

/// Antisymmetric tensor `c[a][b][g]` with `[xi_a, xi_b] = sum_g c[a][b][g] xi_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    dim: usize,
    tensor: Vec<C64>,
}

impl StructureConstants {
    /// Accepts a full `dim^3` tensor (row-major in `(a, b, g)`) and checks antisymmetry exactly.
    pub fn from_tensor(dim: usize, tensor: Vec<C64>) -> Result<Self, LieError> {
        if dim == 0 {
            return Err(LieError::EmptyAlgebra);
        }
        let expected = dim * dim * dim;
        if tensor.len() != expected {
            return Err(LieError::ShapeMismatch { dim, expected, got: tensor.len() });
        }
        let sc = Self { dim, tensor };
        for a in 0..dim {
            for b in 0..dim {
                for g in 0..dim {
                    let lhs = sc.get(a, b, g);
                    if !(lhs.re.is_finite() && lhs.im.is_finite()) {
                        return Err(LieError::NonFinite(a + 1, b + 1, g + 1));
                    }
                    let rhs = sc.get(b, a, g);
                    if lhs != -rhs {
                        return Err(LieError::AntisymmetryViolation {
                            alpha: a + 1,
                            beta: b + 1,
                            gamma: g + 1,
                            lhs,
                            rhs,
                        });
                    }
                }
            }
        }
        Ok(sc)
    }

    /// Builds the tensor from entries `(a, b, g, c)` with `a < b`; the lower half is completed.
    /// Repeated entries accumulate.
    pub fn from_upper<I>(dim: usize, entries: I) -> Result<Self, LieError>
    where
        I: IntoIterator<Item = (usize, usize, usize, C64)>,
    {
        if dim == 0 {
            return Err(LieError::EmptyAlgebra);
        }
        let mut tensor = vec![C64::new(0.0, 0.0); dim * dim * dim];
        for (a, b, g, c) in entries {
            for index in [a, b, g] {
                if index >= dim {
                    return Err(LieError::IndexOutOfRange { index: index + 1, dim });
                }
            }
            if a >= b {
                return Err(LieError::NotUpperTriangular(a + 1, b + 1));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(LieError::NonFinite(a + 1, b + 1, g + 1));
            }
            tensor[(a * dim + b) * dim + g] += c;
            tensor[(b * dim + a) * dim + g] -= c;
        }
        Ok(Self { dim, tensor })
    }

    /// Same as [`from_upper`](Self::from_upper) for real constants.
    pub fn from_upper_real<I>(dim: usize, entries: I) -> Result<Self, LieError>
    where
        I: IntoIterator<Item = (usize, usize, usize, f64)>,
    {
        Self::from_upper(dim, entries.into_iter().map(|(a, b, g, c)| (a, b, g, C64::new(c, 0.0))))
    }

    pub fn zero(dim: usize) -> Result<Self, LieError> {
        Self::from_upper(dim, std::iter::empty())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, g: usize) -> C64 {
        self.tensor[(a * self.dim + b) * self.dim + g]
    }

    pub fn max_abs(&self) -> f64 {
        self.tensor.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn is_real(&self) -> bool {
        self.tensor.iter().all(|z| z.im == 0.0)
    }

    /// Entries with `a < b` that are nonzero, in index order.
    pub fn upper_entries(&self) -> Vec<(usize, usize, usize, C64)> {
        let s = self.dim;
        let mut out = Vec::new();
        for a in 0..s {
            for b in a + 1..s {
                for g in 0..s {
                    let c = self.get(a, b, g);
                    if c != C64::new(0.0, 0.0) {
                        out.push((a, b, g, c));
                    }
                }
            }
        }
        out
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { dim: self.dim, tensor: self.tensor.iter().map(|&c| c * factor).collect() }
    }

    /// Relabels the basis so that new vector `i` is old vector `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let s = self.dim;
        assert_eq!(perm.len(), s, "permutation length");
        let mut tensor = vec![C64::new(0.0, 0.0); s * s * s];
        for a in 0..s {
            for b in 0..s {
                for g in 0..s {
                    tensor[(a * s + b) * s + g] = self.get(perm[a], perm[b], perm[g]);
                }
            }
        }
        Self { dim: s, tensor }
    }

    /// Largest Jacobi defect over all index quadruples, with its (one-based) witness.
    pub fn jacobi_residual(&self) -> (f64, [usize; 4]) {
        let s = self.dim;
        let mut worst = (0.0, [1, 1, 1, 1]);
        for a in 0..s {
            for b in 0..s {
                for g in 0..s {
                    for n in 0..s {
                        let mut acc = C64::new(0.0, 0.0);
                        for m in 0..s {
                            acc += self.get(a, b, m) * self.get(m, g, n)
                                + self.get(b, g, m) * self.get(m, a, n)
                                + self.get(g, a, m) * self.get(m, b, n);
                        }
                        if acc.norm() > worst.0 {
                            worst = (acc.norm(), [a + 1, b + 1, g + 1, n + 1]);
                        }
                    }
                }
            }
        }
        worst
    }
}

/// Structural class, tightest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgebraClass {
    Abelian,
    Nilpotent { step: usize },
    Solvable { derived_length: usize },
    General,
}

impl AlgebraClass {
    pub fn is_nilpotent(&self) -> bool {
        matches!(self, Self::Abelian | Self::Nilpotent { .. })
    }

    pub fn is_solvable(&self) -> bool {
        !matches!(self, Self::General)
    }
}

impl std::fmt::Display for AlgebraClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Abelian => write!(f, "abelian"),
            Self::Nilpotent { step } => write!(f, "nilpotent({step})"),
            Self::Solvable { derived_length } => write!(f, "solvable({derived_length})"),
            Self::General => write!(f, "general"),
        }
    }
}

/// A validated Lie algebra. Immutable after construction.
#[derive(Debug, Clone)]
pub struct LieAlgebra {
    constants: StructureConstants,
    labels: Option<Vec<String>>,
    jacobi_residual: f64,
}

/// Validates `constants` against the Jacobi identity with the default tolerance.
pub fn build_algebra(constants: StructureConstants) -> Result<LieAlgebra, LieError> {
    LieAlgebra::new(constants, None)
}

impl LieAlgebra {
    pub fn new(constants: StructureConstants, labels: Option<Vec<String>>) -> Result<Self, LieError> {
        Self::with_tolerance(constants, labels, DEFAULT_JACOBI_TOL)
    }

    /// The tolerance is scaled by `max(|c|, |c|^2)`, since the Jacobi sums are quadratic in `c`.
    pub fn with_tolerance(
        constants: StructureConstants,
        labels: Option<Vec<String>>,
        jacobi_tol: f64,
    ) -> Result<Self, LieError> {
        if let Some(l) = &labels {
            if l.len() != constants.dim() {
                return Err(LieError::LabelCount { expected: constants.dim(), got: l.len() });
            }
        }
        let (residual, witness) = constants.jacobi_residual();
        let m = constants.max_abs();
        if residual > jacobi_tol * m.max(m * m) {
            return Err(LieError::JacobiViolation { residual, witness });
        }
        Ok(Self { constants, labels, jacobi_residual: residual })
    }

    pub fn dim(&self) -> usize {
        self.constants.dim()
    }

    pub fn constants(&self) -> &StructureConstants {
        &self.constants
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> String {
        self.labels.as_ref().and_then(|l| l.get(i).cloned()).unwrap_or_else(|| format!("xi{}", i + 1))
    }

    pub fn jacobi_residual(&self) -> f64 {
        self.jacobi_residual
    }

    pub fn is_real(&self) -> bool {
        self.constants.is_real()
    }

    /// Matrix of `ad(xi_alpha)`: entry `(g, b)` is `c[alpha][b][g]`.
    pub fn adjoint_matrix(&self, alpha: usize) -> Result<DMatrix<C64>, LieError> {
        let s = self.dim();
        if alpha >= s {
            return Err(LieError::IndexOutOfRange { index: alpha + 1, dim: s });
        }
        Ok(DMatrix::from_fn(s, s, |g, b| self.constants.get(alpha, b, g)))
    }

    /// All adjoint matrices in basis order.
    pub fn adjoint_matrices(&self) -> Vec<DMatrix<C64>> {
        (0..self.dim()).map(|a| self.adjoint_matrix(a).expect("in range")).collect()
    }

    /// Bilinear (not sesquilinear) bracket of coordinate vectors.
    pub fn bracket(&self, u: &DVector<C64>, v: &DVector<C64>) -> DVector<C64> {
        let s = self.dim();
        let mut out = DVector::zeros(s);
        for a in 0..s {
            if u[a] == C64::new(0.0, 0.0) {
                continue;
            }
            for b in 0..s {
                let w = u[a] * v[b];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                for g in 0..s {
                    out[g] += w * self.constants.get(a, b, g);
                }
            }
        }
        out
    }

    /// Classifies via the lower central and derived series.
    pub fn classify(&self) -> AlgebraClass {
        let s = self.dim();
        let whole = DMatrix::<C64>::identity(s, s);
        let scale = self.constants.max_abs().max(1.0);

        let first = self.bracket_span(&whole, &whole, scale);
        if first.ncols() == 0 {
            return AlgebraClass::Abelian;
        }

        // lower central series g, [g,g], [g,[g,g]], ...
        let mut term = first.clone();
        let mut step = 1;
        loop {
            if term.ncols() == 0 {
                return AlgebraClass::Nilpotent { step };
            }
            let next = self.bracket_span(&whole, &term, scale);
            if next.ncols() == term.ncols() {
                break;
            }
            term = next;
            step += 1;
        }

        let mut term = first;
        let mut length = 1;
        loop {
            if term.ncols() == 0 {
                return AlgebraClass::Solvable { derived_length: length };
            }
            let next = self.bracket_span(&term, &term, scale);
            if next.ncols() == term.ncols() {
                return AlgebraClass::General;
            }
            term = next;
            length += 1;
        }
    }

    /// Orthonormal basis of `span{[u, v] : u in cols(a), v in cols(b)}`.
    fn bracket_span(&self, a: &DMatrix<C64>, b: &DMatrix<C64>, scale: f64) -> DMatrix<C64> {
        let s = self.dim();
        let mut cols = Vec::with_capacity(a.ncols() * b.ncols());
        for i in 0..a.ncols() {
            let u = a.column(i).into_owned();
            for j in 0..b.ncols() {
                cols.push(self.bracket(&u, &b.column(j).into_owned()));
            }
        }
        if cols.is_empty() {
            return DMatrix::zeros(s, 0);
        }
        let m = DMatrix::from_columns(&cols);
        linalg::column_space(&m, linalg::DEFAULT_RANK_TOL, scale)
    }

    /// Same algebra in the basis `new_i = old_{perm[i]}`.
    pub fn permuted(&self, perm: &[usize]) -> LieAlgebra {
        LieAlgebra {
            constants: self.constants.permuted(perm),
            labels: self.labels.as_ref().map(|l| perm.iter().map(|&p| l[p].clone()).collect()),
            jacobi_residual: self.jacobi_residual,
        }
    }

    /// The span of the first `len` basis vectors, if it is closed under the bracket.
    pub fn truncated(&self, len: usize) -> Option<LieAlgebra> {
        let s = self.dim();
        if len == 0 || len > s {
            return None;
        }
        let mut entries = Vec::new();
        for a in 0..len {
            for b in a + 1..len {
                for g in 0..s {
                    let c = self.constants.get(a, b, g);
                    if g >= len && c != C64::new(0.0, 0.0) {
                        return None;
                    }
                    if g < len {
                        entries.push((a, b, g, c));
                    }
                }
            }
        }
        let constants = StructureConstants::from_upper(len, entries).ok()?;
        let labels = self.labels.as_ref().map(|l| l[..len].to_vec());
        LieAlgebra::new(constants, labels).ok()
    }
}
