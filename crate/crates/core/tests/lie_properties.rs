use crext::catalog;
use crext::exact::{GaussianRational, RationalAlgebra};
use crext::{build_algebra, AlgebraClass, LieError, StructureConstants, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn random_antisymmetric_tensors_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut rejected = 0;
    let trials = 500;
    for _ in 0..trials {
        let dim = rng.gen_range(3..=5);
        let mut entries = Vec::new();
        for a in 0..dim {
            for b in a + 1..dim {
                for g in 0..dim {
                    entries.push((a, b, g, rng.gen_range(-1.0..1.0)));
                }
            }
        }
        let sc = StructureConstants::from_upper_real(dim, entries).unwrap();
        if matches!(build_algebra(sc), Err(LieError::JacobiViolation { .. })) {
            rejected += 1;
        }
    }
    assert!(rejected >= trials * 99 / 100, "only {rejected}/{trials} rejected");
}

#[test]
fn catalog_is_accepted() {
    for e in catalog::entries() {
        assert!(e.algebra.jacobi_residual() <= 1e-12, "{}", e.name);
    }
}

fn catalog_algebra() -> impl Strategy<Value = crext::LieAlgebra> {
    (0..catalog::entries().len()).prop_map(|i| catalog::entries()[i].algebra.clone())
}

proptest! {
    #[test]
    fn adjoint_is_linear_in_constants(alg in catalog_algebra(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let k = C64::new(re, im);
        let scaled = build_algebra(alg.constants().scaled(k)).unwrap();
        for a in 0..alg.dim() {
            let lhs = scaled.adjoint_matrix(a).unwrap();
            let rhs = alg.adjoint_matrix(a).unwrap() * k;
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn abelian_classifies_as_abelian(dim in 1usize..9) {
        let alg = build_algebra(StructureConstants::zero(dim).unwrap()).unwrap();
        prop_assert_eq!(alg.classify(), AlgebraClass::Abelian);
    }

    #[test]
    fn nilpotent_adjoints_are_nilpotent(alg in catalog_algebra(), scale in 0.25f64..4.0) {
        let alg = build_algebra(alg.constants().scaled(C64::new(scale, 0.0))).unwrap();
        prop_assume!(alg.classify().is_nilpotent());
        let s = alg.dim();
        for a in 0..s {
            let ad = alg.adjoint_matrix(a).unwrap();
            let mut p = DMatrix::<C64>::identity(s, s);
            for _ in 0..s {
                p = &p * &ad;
            }
            prop_assert!(p.iter().all(|z| z.norm() <= 1e-12));
        }
        let exact = RationalAlgebra::from_algebra(&alg).unwrap();
        for a in 0..s {
            let ad = exact.adjoint(a);
            let mut p = ad.clone();
            for _ in 1..s {
                p = mat_mul(&p, &ad);
            }
            prop_assert!(p.iter().flatten().all(GaussianRational::is_zero));
        }
    }
}

fn mat_mul(a: &[Vec<GaussianRational>], b: &[Vec<GaussianRational>]) -> Vec<Vec<GaussianRational>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n).map(|j| (0..n).fold(GaussianRational::zero(), |acc, k| &acc + &(&a[i][k] * &b[k][j]))).collect()
        })
        .collect()
}

#[test]
fn classification_of_catalog() {
    let class = |name: &str| catalog::get(name).unwrap().algebra.classify();
    assert_eq!(class("abelian3"), AlgebraClass::Abelian);
    assert_eq!(class("heisenberg3"), AlgebraClass::Nilpotent { step: 2 });
    assert_eq!(class("axb"), AlgebraClass::Solvable { derived_length: 2 });
    assert_eq!(class("sl2"), AlgebraClass::General);
}
