//! Left-invariant CR structures on Lie groups and their extension by the frame
//! `Y_a = lambda_a^g(t) X_g + i d/dt^a` on `G x R^l`.
//!
//! A structure of type `(n, k)` on a group of dimension `2n + k` is given by a
//! complex `n`-dimensional subspace `h` of the complexified algebra (the fiber
//! of `D^{0,1}` at the identity). Frame vectors live in `g_C (+) C^l`; the
//! first `s` rows are algebra coordinates in the caller's basis, the last `l`
//! rows the `d/dt` directions.

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::continuation::commutation_residual_of;
use crate::coords::{complex_rows, CoordinatePoint, EvalError, DEFAULT_R_MAX};
use crate::exact;
use crate::fd::{DerivativeMode, FdSpec};
use crate::grid::{random_box, DEFAULT_SEED};
use crate::lie::LieAlgebra;
use crate::linalg::{self, DEFAULT_RANK_TOL};
use crate::maurer_cartan::SecondKindChart;
use crate::residual::ResidualTensor;
use crate::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CrError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("structure constants must be real")]
    NonRealConstants,
    #[error("h_basis has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("bracket of h columns {columns:?} leaves h (distance {defect:e})")]
    NotIntegrable { defect: f64, columns: [usize; 2] },
    #[error("h meets its conjugate: rank of [h | conj h] is {rank}, expected {expected}")]
    IntersectsConjugate { rank: usize, expected: usize },
    #[error("target l = {target} is not reachable; at most {achievable} transverse directions")]
    TargetUnreachable { target: usize, achievable: usize },
    #[error("target l must be positive")]
    InvalidTarget,
    #[error("selection does not match the structure: {0}")]
    SelectionMismatch(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A left-invariant CR structure of type `(n, k)`; shape-checked, not yet validated.
#[derive(Debug, Clone)]
pub struct GroupCRStructure {
    algebra: LieAlgebra,
    h_basis: DMatrix<C64>,
    n: usize,
    k: usize,
}

impl GroupCRStructure {
    pub fn new(algebra: LieAlgebra, h_basis: DMatrix<C64>, n: usize, k: usize) -> Result<Self, CrError> {
        let s = algebra.dim();
        if s != 2 * n + k {
            return Err(CrError::ShapeMismatch(format!("algebra dimension {s} but 2n + k = {}", 2 * n + k)));
        }
        if h_basis.shape() != (s, n) {
            return Err(CrError::ShapeMismatch(format!("h_basis is {:?}, expected ({s}, {n})", h_basis.shape())));
        }
        if h_basis.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(CrError::ShapeMismatch("h_basis has non-finite entries".into()));
        }
        if !algebra.is_real() {
            return Err(CrError::NonRealConstants);
        }
        Ok(Self { algebra, h_basis, n, k })
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn h_basis(&self) -> &DMatrix<C64> {
        &self.h_basis
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Same structure in the basis `new_i = old_{perm[i]}`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let h = DMatrix::from_fn(self.h_basis.nrows(), self.n, |r, c| self.h_basis[(perm[r], c)]);
        Self { algebra: self.algebra.permuted(perm), h_basis: h, n: self.n, k: self.k }
    }

    /// `[h | conj h]`, spanning `D_C` at the identity.
    fn distribution(&self) -> DMatrix<C64> {
        linalg::hstack(&[&self.h_basis, &linalg::conj(&self.h_basis)])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub h_rank: usize,
    pub h_conj_rank: usize,
    pub expected_h_conj_rank: usize,
    /// Largest distance from a bracket of two `h` columns to `span h`.
    pub integrability_defect: f64,
    /// One-based columns attaining the defect.
    pub worst_pair: Option<[usize; 2]>,
    pub violations: Vec<String>,
    #[serde(skip)]
    errors: Vec<CrError>,
}

impl ValidationReport {
    /// The first violated invariant, if any.
    pub fn error(&self) -> Option<&CrError> {
        self.errors.first()
    }
}

/// Relative tolerance on the integrability defect.
pub const INTEGRABILITY_TOL: f64 = 1e-10;

/// Checks rank, trivial intersection with the conjugate, and closure of `h` under the bracket.
pub fn validate_cr_structure(structure: &GroupCRStructure) -> ValidationReport {
    let n = structure.n;
    let h = &structure.h_basis;
    let h_rank = linalg::rank(h, DEFAULT_RANK_TOL);
    let h_conj_rank = linalg::rank(&structure.distribution(), DEFAULT_RANK_TOL);

    let scale = linalg::max_abs(h).max(f64::MIN_POSITIVE);
    let q = linalg::column_space(h, DEFAULT_RANK_TOL, scale);
    let c_max = structure.algebra.constants().max_abs().max(1.0);
    let mut defect = 0.0;
    let mut worst_pair = None;
    let mut relative_worst = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let u = h.column(i).into_owned();
            let v = h.column(j).into_owned();
            let w = structure.algebra.bracket(&u, &v);
            let d = linalg::distance_to_span(&q, &DMatrix::from_column_slice(w.len(), 1, w.as_slice()));
            let rel = d / (c_max * u.norm() * v.norm()).max(f64::MIN_POSITIVE);
            if worst_pair.is_none() || rel > relative_worst {
                relative_worst = rel;
                defect = d;
                worst_pair = Some([i + 1, j + 1]);
            }
        }
    }

    let mut errors = Vec::new();
    if h_rank != n {
        errors.push(CrError::RankDeficient { rank: h_rank, expected: n });
    }
    if h_conj_rank != 2 * n {
        errors.push(CrError::IntersectsConjugate { rank: h_conj_rank, expected: 2 * n });
    }
    if relative_worst > INTEGRABILITY_TOL {
        errors.push(CrError::NotIntegrable { defect, columns: worst_pair.unwrap_or([1, 1]) });
    }
    let violations = errors
        .iter()
        .map(|e| match e {
            CrError::RankDeficient { .. } => "RankDeficient".to_string(),
            CrError::IntersectsConjugate { .. } => "IntersectsConjugate".to_string(),
            CrError::NotIntegrable { .. } => "NotIntegrable".to_string(),
            other => other.to_string(),
        })
        .collect();
    ValidationReport {
        valid: errors.is_empty(),
        h_rank,
        h_conj_rank,
        expected_h_conj_rank: 2 * n,
        integrability_defect: defect,
        worst_pair,
        violations,
        errors,
    }
}

/// Basis reordering that puts the `ell` transverse vectors first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSelection {
    /// New basis vector `i` is old vector `permutation[i]` (zero-based).
    pub permutation: Vec<usize>,
    pub ell: usize,
}

impl BasisSelection {
    /// Zero-based indices of the kept vectors in the original basis.
    pub fn kept(&self) -> &[usize] {
        &self.permutation[..self.ell]
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ell": self.ell,
            "permutation": self.permutation.iter().map(|p| p + 1).collect::<Vec<_>>(),
            "kept": self.kept().iter().map(|p| p + 1).collect::<Vec<_>>(),
        })
    }

    fn check(&self, structure: &GroupCRStructure) -> Result<(), CrError> {
        let s = structure.algebra.dim();
        let mut seen = vec![false; s];
        if self.permutation.len() != s
            || self.permutation.iter().any(|&p| p >= s || std::mem::replace(&mut seen[p], true))
        {
            return Err(CrError::SelectionMismatch(format!("not a permutation of 1..{s}")));
        }
        if self.ell == 0 || self.ell > structure.k {
            return Err(CrError::SelectionMismatch(format!("ell = {} outside 1..={}", self.ell, structure.k)));
        }
        Ok(())
    }
}

/// Greedy scan of `xi_1 .. xi_s`, keeping each basis vector that enlarges
/// `h + conj(h) + span(kept)`, i.e. that is transverse to `D` and to the vectors
/// already kept. Stops at `target_ell` (default `k`).
pub fn select_transverse_basis(
    structure: &GroupCRStructure,
    target_ell: Option<usize>,
) -> Result<BasisSelection, CrError> {
    let s = structure.algebra.dim();
    let cap = match target_ell {
        Some(0) => return Err(CrError::InvalidTarget),
        Some(t) if t > structure.k => return Err(CrError::TargetUnreachable { target: t, achievable: structure.k }),
        Some(t) => t,
        None => structure.k,
    };
    let mut span = structure.distribution();
    let mut rank = linalg::rank(&span, DEFAULT_RANK_TOL);
    let mut kept = Vec::new();
    for a in 0..s {
        if kept.len() == cap {
            break;
        }
        let mut e = DMatrix::<C64>::zeros(s, 1);
        e[(a, 0)] = C64::new(1.0, 0.0);
        let candidate = linalg::hstack(&[&span, &e]);
        let r = linalg::rank(&candidate, DEFAULT_RANK_TOL);
        if r > rank {
            kept.push(a);
            span = candidate;
            rank = r;
        }
    }
    if kept.len() < cap.max(1) {
        return Err(CrError::TargetUnreachable { target: cap.max(1), achievable: kept.len() });
    }
    let ell = kept.len();
    let rest: Vec<usize> = (0..s).filter(|a| !kept.contains(a)).collect();
    let mut permutation = kept;
    permutation.extend(rest);
    Ok(BasisSelection { permutation, ell })
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameCheck {
    pub passed: bool,
    pub real_part_rank: usize,
    pub vectors: usize,
    pub witness: Option<String>,
}

/// Each column must have a nonzero real part, and the real parts must be independent.
pub fn check_frame_vectors(vectors: &DMatrix<C64>) -> FrameCheck {
    let count = vectors.ncols();
    let real = vectors.map(|z| C64::new(z.re, 0.0));
    let real_part_rank = linalg::rank(&real, DEFAULT_RANK_TOL);
    let mut witness = None;
    for j in 0..count {
        let full = vectors.column(j).norm();
        let re = real.column(j).norm();
        if re <= DEFAULT_RANK_TOL * full || full == 0.0 {
            witness = Some(format!("frame vector {} is purely imaginary", j + 1));
            break;
        }
    }
    if witness.is_none() && real_part_rank < count {
        witness = Some(format!("real parts have rank {real_part_rank} < {count}"));
    }
    FrameCheck { passed: witness.is_none(), real_part_rank, vectors: count, witness }
}

/// Applies [`check_frame_vectors`] to the kept basis vectors.
pub fn check_not_purely_imaginary(structure: &GroupCRStructure, selection: &BasisSelection) -> FrameCheck {
    let s = structure.algebra.dim();
    let v = DMatrix::from_fn(s, selection.ell, |r, c| {
        if r == selection.permutation[c] {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    check_frame_vectors(&v)
}

/// The `ell` vectors `Y_a` at one point of `R^ell`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedFramePoint {
    pub base: CoordinatePoint,
    /// `(s + ell) x ell`; column `a` is `lambda_a (+) i e_a`.
    pub vectors: DMatrix<C64>,
}

impl ExtendedFramePoint {
    /// Wraps caller-supplied vectors, e.g. for degenerate test input.
    pub fn from_vectors(base: CoordinatePoint, vectors: DMatrix<C64>) -> Self {
        Self { base, vectors }
    }

    pub fn ell(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn to_json(&self) -> Value {
        json!({ "base": self.base, "vectors": complex_rows(&self.vectors) })
    }
}

fn active_point(point: &CoordinatePoint, ell: usize) -> Result<(), CrError> {
    if point.dim() != ell {
        return Err(CrError::SelectionMismatch(format!("point has {} coordinates, ell = {ell}", point.dim())));
    }
    Ok(())
}

pub fn build_extended_frame(
    structure: &GroupCRStructure,
    selection: &BasisSelection,
    point: &CoordinatePoint,
) -> Result<ExtendedFramePoint, CrError> {
    build_extended_frame_in(structure, selection, point, DEFAULT_R_MAX)
}

pub fn build_extended_frame_in(
    structure: &GroupCRStructure,
    selection: &BasisSelection,
    point: &CoordinatePoint,
    r_max: f64,
) -> Result<ExtendedFramePoint, CrError> {
    selection.check(structure)?;
    let ell = selection.ell;
    active_point(point, ell)?;
    let s = structure.algebra.dim();
    let permuted = structure.algebra.permuted(&selection.permutation);
    let chart = SecondKindChart::new(&permuted).with_r_max(r_max);
    let lambda = chart.lambda(&point.padded(s))?;
    let mut vectors = DMatrix::<C64>::zeros(s + ell, ell);
    for a in 0..ell {
        for g in 0..s {
            vectors[(selection.permutation[g], a)] = lambda.values[(g, a)];
        }
        vectors[(s + a, a)] = C64::new(0.0, 1.0);
    }
    Ok(ExtendedFramePoint { base: point.clone(), vectors })
}

/// Coefficients of `X_g` in `[Y_a, Y_b]`, `a < b < ell`, in the reordered basis.
pub fn verify_commutation(
    structure: &GroupCRStructure,
    selection: &BasisSelection,
    point: &CoordinatePoint,
    fd: &FdSpec,
) -> Result<ResidualTensor, CrError> {
    verify_commutation_in(structure, selection, point, fd, DEFAULT_R_MAX)
}

pub fn verify_commutation_in(
    structure: &GroupCRStructure,
    selection: &BasisSelection,
    point: &CoordinatePoint,
    fd: &FdSpec,
    r_max: f64,
) -> Result<ResidualTensor, CrError> {
    selection.check(structure)?;
    let ell = selection.ell;
    active_point(point, ell)?;
    let s = structure.algebra.dim();
    let permuted = structure.algebra.permuted(&selection.permutation);
    let chart = SecondKindChart::new(&permuted).with_r_max(r_max);
    point.padded(s).check(s, r_max)?;
    match fd.mode {
        DerivativeMode::ExactPolynomial => {
            let oracle = exact::Oracle::new(&permuted).map_err(EvalError::from)?;
            let t = point.to_real().ok_or(EvalError::ComplexPoint)?;
            let mut padded = t.clone();
            padded.resize(s, 0.0);
            let q = exact::Oracle::rational_point(&padded).map_err(EvalError::from)?;
            let i = exact::GaussianRational::i();
            Ok(ResidualTensor::from_fn(point.clone(), ell, s, |a, b, g| {
                (&i * &oracle.flatness.get(a, b, g).eval(&q)).to_c64()
            }))
        }
        DerivativeMode::FiniteDifference => {
            let field = |t: &[f64]| {
                let mut padded = t.to_vec();
                padded.resize(s, 0.0);
                chart.lambda_values(&padded)
            };
            Ok(commutation_residual_of(&permuted, &field, point, ell, fd)?)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CrConditionReport {
    pub passed: bool,
    pub rank: usize,
    pub expected: usize,
    pub at: CoordinatePoint,
}

/// Rank of `[h (+) 0 | Y | conj(h (+) 0) | conj Y]` must be `2(n + ell)`.
pub fn verify_cr_condition(structure: &GroupCRStructure, frame: &ExtendedFramePoint) -> CrConditionReport {
    let s = structure.algebra.dim();
    let ell = frame.ell();
    let mut lifted = DMatrix::<C64>::zeros(s + ell, structure.n);
    lifted.rows_mut(0, s).copy_from(&structure.h_basis);
    let m = linalg::hstack(&[&lifted, &frame.vectors, &linalg::conj(&lifted), &linalg::conj(&frame.vectors)]);
    let rank = linalg::rank(&m, DEFAULT_RANK_TOL);
    let expected = 2 * (structure.n + ell);
    CrConditionReport { passed: rank == expected, rank, expected, at: frame.base.clone() }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub r_max: f64,
    pub fd: FdSpec,
    /// Pass threshold for the commutation residual.
    pub tol: f64,
    pub samples: usize,
    /// Sample radius as a fraction of `r_max`.
    pub sample_fraction: f64,
    pub seed: u64,
    pub target_ell: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            r_max: DEFAULT_R_MAX,
            fd: FdSpec::default(),
            tol: 1e-8,
            samples: 50,
            sample_fraction: 0.3,
            seed: DEFAULT_SEED,
            target_ell: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub stage: String,
    pub passed: bool,
    pub report: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingCertificate {
    pub n: usize,
    pub k: usize,
    pub ell: usize,
    /// `(n + ell, k - ell)`.
    pub extension_type: [usize; 2],
    pub complex_structure: bool,
    pub selection: Value,
    pub normalising_hypothesis: String,
    pub stages: Vec<StageReport>,
}

#[derive(Debug, Clone, Error)]
#[error("stage {stage} failed: {message}")]
pub struct PipelineFailure {
    pub stage: String,
    pub message: String,
    pub stages: Vec<StageReport>,
}

fn fail(stage: &str, message: String, mut stages: Vec<StageReport>, report: Value) -> PipelineFailure {
    stages.push(StageReport { stage: stage.into(), passed: false, report });
    PipelineFailure { stage: stage.into(), message, stages }
}

/// Validate, select `ell = k` transverse vectors, and check the extended frame
/// at the origin and at sampled points of `R^ell`.
fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

pub fn corollary_pipeline(structure: &GroupCRStructure) -> Result<EmbeddingCertificate, PipelineFailure> {
    corollary_pipeline_with(structure, &PipelineConfig::default())
}

pub fn corollary_pipeline_with(
    structure: &GroupCRStructure,
    config: &PipelineConfig,
) -> Result<EmbeddingCertificate, PipelineFailure> {
    let mut stages = Vec::new();

    let validation = validate_cr_structure(structure);
    if let Some(err) = validation.error() {
        return Err(fail("validate", err.to_string(), stages, to_value(&validation)));
    }
    stages.push(StageReport { stage: "validate".into(), passed: true, report: to_value(&validation) });

    let target = config.target_ell.unwrap_or(structure.k);
    let selection = match select_transverse_basis(structure, Some(target)) {
        Ok(sel) => sel,
        Err(e) => return Err(fail("select", e.to_string(), stages, json!({ "error": e.to_string() }))),
    };
    stages.push(StageReport { stage: "select".into(), passed: true, report: selection.to_json() });

    let frame_check = check_not_purely_imaginary(structure, &selection);
    if !frame_check.passed {
        let msg = frame_check.witness.clone().unwrap_or_default();
        return Err(fail("not_purely_imaginary", msg, stages, to_value(&frame_check)));
    }
    stages.push(StageReport { stage: "not_purely_imaginary".into(), passed: true, report: to_value(&frame_check) });

    let ell = selection.ell;
    let mut points = vec![CoordinatePoint::origin(ell)];
    for p in random_box(ell, config.samples, config.sample_fraction * config.r_max, config.seed) {
        points.push(CoordinatePoint::real(&p).expect("finite sample"));
    }

    let mut worst = (0.0f64, None::<Value>);
    for p in &points {
        let r = verify_commutation_in(structure, &selection, p, &config.fd, config.r_max)
            .map_err(|e| fail("commutation", e.to_string(), stages.clone(), json!({ "error": e.to_string() })))?;
        let (v, idx) = r.max_abs();
        if worst.1.is_none() || v > worst.0 {
            worst = (v, Some(json!({ "point": p, "indices": idx.map(|[a, b, g]| [a + 1, b + 1, g + 1]) })));
        }
    }
    let commutation = json!({
        "max_residual": worst.0,
        "tolerance": config.tol,
        "points": points.len(),
        "witness": worst.1,
        "basis": "reordered",
        "fd": config.fd,
    });
    if worst.0 > config.tol {
        return Err(fail(
            "commutation",
            format!("residual {:e} exceeds {:e}", worst.0, config.tol),
            stages,
            commutation,
        ));
    }
    stages.push(StageReport { stage: "commutation".into(), passed: true, report: commutation });

    let mut ranks = Vec::with_capacity(points.len());
    for p in &points {
        let frame = build_extended_frame_in(structure, &selection, p, config.r_max)
            .map_err(|e| fail("cr_condition", e.to_string(), stages.clone(), json!({ "error": e.to_string() })))?;
        let rep = verify_cr_condition(structure, &frame);
        if !rep.passed {
            let msg = format!("rank {} < {} at {:?}", rep.rank, rep.expected, p.coords());
            return Err(fail("cr_condition", msg, stages, to_value(&rep)));
        }
        ranks.push(rep.rank);
    }
    stages.push(StageReport {
        stage: "cr_condition".into(),
        passed: true,
        report: json!({ "points": ranks.len(), "rank": ranks[0], "expected": 2 * (structure.n + ell) }),
    });

    Ok(EmbeddingCertificate {
        n: structure.n,
        k: structure.k,
        ell,
        extension_type: [structure.n + ell, structure.k - ell],
        complex_structure: structure.k == ell,
        selection: selection.to_json(),
        normalising_hypothesis: "unchecked: automatic for right-invariant fields against a left-invariant structure"
            .into(),
        stages,
    })
}
