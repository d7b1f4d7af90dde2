//! JSON file formats for algebras and CR structures. Indices are one-based.
//!
//! Algebra:
//!
//! ```json
//! { "dim": 3, "brackets": [ { "i": 1, "j": 2, "coeffs": { "3": [1.0, 0.0] } } ], "labels": ["x", "y", "z"] }
//! ```
//!
//! Structure: `{ "algebra": <algebra>, "n": 1, "k": 1, "h_basis": [[[1, 0], [0, 1], [0, 0]]] }`,
//! one inner list per column of `h`.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cr_frame::{CrError, GroupCRStructure};
use crate::lie::{LieAlgebra, LieError, StructureConstants};
use crate::C64;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Cr(#[from] CrError),
}

impl FormatError {
    /// Input that could not be read as the file format at all, as opposed to a
    /// well-formed file describing an invalid object.
    pub fn is_parse_error(&self) -> bool {
        matches!(
            self,
            Self::Json(_)
                | Self::Invalid(_)
                | Self::Lie(LieError::NotUpperTriangular(..))
                | Self::Lie(LieError::IndexOutOfRange { .. })
                | Self::Lie(LieError::LabelCount { .. })
                | Self::Cr(CrError::ShapeMismatch(_))
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub coeffs: BTreeMap<String, [f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub dim: usize,
    pub brackets: Vec<BracketEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl AlgebraFile {
    pub fn to_constants(&self) -> Result<StructureConstants, FormatError> {
        let s = self.dim;
        if s == 0 {
            return Err(FormatError::Invalid("dim must be positive".into()));
        }
        let mut seen = BTreeSet::new();
        let mut entries = Vec::new();
        for b in &self.brackets {
            if b.i == 0 || b.j == 0 || b.i > s || b.j > s {
                return Err(FormatError::Invalid(format!("bracket ({}, {}) out of range 1..={s}", b.i, b.j)));
            }
            if b.i >= b.j {
                return Err(FormatError::Invalid(format!("bracket ({}, {}) must have i < j", b.i, b.j)));
            }
            if !seen.insert((b.i, b.j)) {
                return Err(FormatError::Invalid(format!("bracket ({}, {}) listed twice", b.i, b.j)));
            }
            for (key, [re, im]) in &b.coeffs {
                let g: usize =
                    key.trim().parse().map_err(|_| FormatError::Invalid(format!("bad coefficient index {key:?}")))?;
                if g == 0 || g > s {
                    return Err(FormatError::Invalid(format!("coefficient index {g} out of range 1..={s}")));
                }
                entries.push((b.i - 1, b.j - 1, g - 1, C64::new(*re, *im)));
            }
        }
        Ok(StructureConstants::from_upper(s, entries)?)
    }

    pub fn to_algebra(&self) -> Result<LieAlgebra, FormatError> {
        Ok(LieAlgebra::new(self.to_constants()?, self.labels.clone())?)
    }

    pub fn from_algebra(algebra: &LieAlgebra) -> Self {
        let mut grouped: BTreeMap<(usize, usize), BTreeMap<String, [f64; 2]>> = BTreeMap::new();
        for (a, b, g, c) in algebra.constants().upper_entries() {
            grouped.entry((a + 1, b + 1)).or_default().insert((g + 1).to_string(), [c.re, c.im]);
        }
        Self {
            dim: algebra.dim(),
            brackets: grouped.into_iter().map(|((i, j), coeffs)| BracketEntry { i, j, coeffs }).collect(),
            labels: algebra.labels().map(<[String]>::to_vec),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    pub algebra: AlgebraFile,
    pub n: usize,
    pub k: usize,
    pub h_basis: Vec<Vec<[f64; 2]>>,
}

impl StructureFile {
    pub fn to_structure(&self) -> Result<GroupCRStructure, FormatError> {
        let algebra = self.algebra.to_algebra()?;
        let s = algebra.dim();
        if self.h_basis.len() != self.n {
            return Err(FormatError::Invalid(format!("h_basis has {} columns, n = {}", self.h_basis.len(), self.n)));
        }
        if let Some(col) = self.h_basis.iter().find(|c| c.len() != s) {
            return Err(FormatError::Invalid(format!("h_basis column has {} entries, dim = {s}", col.len())));
        }
        let h = DMatrix::from_fn(s, self.n, |r, c| C64::new(self.h_basis[c][r][0], self.h_basis[c][r][1]));
        Ok(GroupCRStructure::new(algebra, h, self.n, self.k)?)
    }

    pub fn from_structure(structure: &GroupCRStructure) -> Self {
        let h = structure.h_basis();
        Self {
            algebra: AlgebraFile::from_algebra(structure.algebra()),
            n: structure.n(),
            k: structure.k(),
            h_basis: (0..h.ncols()).map(|c| (0..h.nrows()).map(|r| [h[(r, c)].re, h[(r, c)].im]).collect()).collect(),
        }
    }
}

pub fn parse_algebra(text: &str) -> Result<LieAlgebra, FormatError> {
    serde_json::from_str::<AlgebraFile>(text)?.to_algebra()
}

pub fn parse_structure(text: &str) -> Result<GroupCRStructure, FormatError> {
    serde_json::from_str::<StructureFile>(text)?.to_structure()
}
