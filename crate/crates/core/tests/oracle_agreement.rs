use crext::catalog;
use crext::exact::{exact_flatness_residual, exact_omega, ExactError, GaussianRational, Oracle, RationalAlgebra};
use crext::{lambda_at, omega_at, CoordinatePoint, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NILPOTENT: [&str; 5] = ["abelian3", "abelian4", "heisenberg3", "filiform4", "filiform5"];

fn rational_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<GaussianRational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..dim).map(|_| GaussianRational::ratio(rng.gen_range(-50..=50), rng.gen_range(100..=997))).collect())
        .collect()
}

#[test]
fn omega_and_lambda_match_exact_values() {
    for name in NILPOTENT {
        let alg = catalog::get(name).unwrap().algebra;
        let oracle = Oracle::new(&alg).unwrap();
        let s = alg.dim();
        for q in rational_points(s, 20, 7) {
            let t: Vec<f64> = q.iter().map(|x| x.to_c64().re).collect();
            let p = CoordinatePoint::real(&t).unwrap();
            let w = omega_at(&alg, &p).unwrap().values;
            let l = lambda_at(&alg, &p).unwrap().values;
            let we = oracle.omega.eval(&q);
            let le = oracle.lambda.eval(&q);
            for g in 0..s {
                for a in 0..s {
                    assert!((w[(g, a)] - we[g][a].to_c64()).norm() <= 1e-12, "{name} omega[{g}][{a}]");
                    assert!((l[(g, a)] - le[g][a].to_c64()).norm() <= 1e-12, "{name} lambda[{g}][{a}]");
                }
            }
        }
    }
}

#[test]
fn flatness_is_identically_zero_for_nilpotent_catalog() {
    for name in NILPOTENT {
        let alg = RationalAlgebra::from_algebra(&catalog::get(name).unwrap().algebra).unwrap();
        assert!(exact_flatness_residual(&alg).unwrap().is_identically_zero(), "{name}");
    }
}

#[test]
fn omega_degree_is_below_dimension() {
    for name in NILPOTENT {
        let alg = RationalAlgebra::from_algebra(&catalog::get(name).unwrap().algebra).unwrap();
        let w = exact_omega(&alg).unwrap();
        assert!(w.max_total_degree().unwrap_or(0) < alg.dim() as u32, "{name}");
    }
    let f5 = RationalAlgebra::from_algebra(&catalog::filiform(5)).unwrap();
    assert_eq!(exact_omega(&f5).unwrap().max_total_degree(), Some(3));
}

#[test]
fn non_nilpotent_algebras_are_outside_the_domain() {
    for name in ["axb", "sl2", "su2"] {
        let err = Oracle::new(&catalog::get(name).unwrap().algebra).unwrap_err();
        assert!(matches!(err, ExactError::NotNilpotent { .. }), "{name}: {err}");
    }
}

#[test]
fn lambda_entry_of_filiform4() {
    // omega[4][2] = t1^2 / 2, so lambda[4][2] = (-i t1)^2 / 2 = -t1^2 / 2
    let oracle = Oracle::new(&catalog::filiform(4)).unwrap();
    let q = vec![
        GaussianRational::ratio(1, 3),
        GaussianRational::zero(),
        GaussianRational::zero(),
        GaussianRational::zero(),
    ];
    assert_eq!(oracle.lambda.eval(&q)[3][1], GaussianRational::ratio(-1, 18));
    assert_eq!(oracle.omega.eval(&q)[3][1].to_c64(), C64::new(1.0 / 18.0, 0.0));
}
