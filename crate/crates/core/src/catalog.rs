//! Built-in algebras and CR structures.

use nalgebra::DMatrix;

use crate::cr_frame::GroupCRStructure;
use crate::lie::{LieAlgebra, StructureConstants};
use crate::C64;

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub algebra: LieAlgebra,
    pub structure: Option<GroupCRStructure>,
    pub notes: &'static str,
}

fn algebra(dim: usize, brackets: &[(usize, usize, usize, f64)], labels: &[&str]) -> LieAlgebra {
    // one-based indices, as in the file format
    let sc = StructureConstants::from_upper_real(dim, brackets.iter().map(|&(a, b, g, c)| (a - 1, b - 1, g - 1, c)))
        .expect("catalog constants are well formed");
    let labels = (!labels.is_empty()).then(|| labels.iter().map(|s| s.to_string()).collect());
    LieAlgebra::new(sc, labels).expect("catalog algebras satisfy Jacobi")
}

pub fn abelian(dim: usize) -> LieAlgebra {
    algebra(dim, &[], &[])
}

/// `[x, y] = z`.
pub fn heisenberg3() -> LieAlgebra {
    algebra(3, &[(1, 2, 3, 1.0)], &["x", "y", "z"])
}

/// `[xi1, xi_i] = xi_{i+1}` for `2 <= i < dim`.
pub fn filiform(dim: usize) -> LieAlgebra {
    let brackets: Vec<_> = (2..dim).map(|i| (1, i, i + 1, 1.0)).collect();
    algebra(dim, &brackets, &[])
}

/// `[a, b] = b`.
pub fn affine_line() -> LieAlgebra {
    algebra(2, &[(1, 2, 2, 1.0)], &["a", "b"])
}

/// Basis `h, e, f` with `[h, e] = 2e`, `[h, f] = -2f`, `[e, f] = h`.
pub fn sl2() -> LieAlgebra {
    algebra(3, &[(1, 2, 2, 2.0), (1, 3, 3, -2.0), (2, 3, 1, 1.0)], &["h", "e", "f"])
}

/// `[e1, e2] = e3` and cyclic.
pub fn su2() -> LieAlgebra {
    algebra(3, &[(1, 2, 3, 1.0), (2, 3, 1, 1.0), (1, 3, 2, -1.0)], &["e1", "e2", "e3"])
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Type (1, 1) on the Heisenberg group, `h = span{x + i y}`.
pub fn heisenberg3_cr() -> GroupCRStructure {
    let h = DMatrix::from_column_slice(3, 1, &[c(1., 0.), c(0., 1.), c(0., 0.)]);
    GroupCRStructure::new(heisenberg3(), h, 1, 1).expect("catalog structure")
}

/// Type (1, 2) on `R^4`, `h = span{xi1 + i xi2}`.
pub fn abelian4_cr() -> GroupCRStructure {
    let h = DMatrix::from_column_slice(4, 1, &[c(1., 0.), c(0., 1.), c(0., 0.), c(0., 0.)]);
    GroupCRStructure::new(abelian(4), h, 1, 2).expect("catalog structure")
}

pub fn entries() -> Vec<CatalogEntry> {
    let plain = |name, algebra, notes| CatalogEntry { name, algebra, structure: None, notes };
    let with = |name, s: GroupCRStructure, notes| CatalogEntry {
        name,
        algebra: s.algebra().clone(),
        structure: Some(s),
        notes,
    };
    vec![
        plain("abelian3", abelian(3), "zero bracket, s = 3"),
        plain("abelian4", abelian(4), "zero bracket, s = 4"),
        plain("heisenberg3", heisenberg3(), "nilpotent, step 2"),
        plain("filiform4", filiform(4), "nilpotent, step 3"),
        plain("filiform5", filiform(5), "nilpotent, step 4"),
        plain("axb", affine_line(), "solvable, not nilpotent; omega_2^2 = exp(-t1)"),
        plain("sl2", sl2(), "simple, split real form"),
        plain("su2", su2(), "simple, compact real form"),
        with("heisenberg3-cr", heisenberg3_cr(), "left-invariant CR structure of type (1, 1)"),
        with("abelian4-cr", abelian4_cr(), "CR structure of type (1, 2) on R^4"),
    ]
}

pub fn get(name: &str) -> Option<CatalogEntry> {
    entries().into_iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::AlgebraClass;

    #[test]
    fn classes() {
        assert_eq!(abelian(4).classify(), AlgebraClass::Abelian);
        assert_eq!(filiform(4).classify(), AlgebraClass::Nilpotent { step: 3 });
        assert_eq!(filiform(5).classify(), AlgebraClass::Nilpotent { step: 4 });
        assert_eq!(su2().classify(), AlgebraClass::General);
    }

    #[test]
    fn names_are_unique() {
        let names: std::collections::BTreeSet<_> = entries().iter().map(|e| e.name).collect();
        assert_eq!(names.len(), entries().len());
        assert!(get("sl2").is_some() && get("nope").is_none());
    }
}
