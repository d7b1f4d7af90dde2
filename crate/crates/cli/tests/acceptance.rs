//! Acceptance criteria 1-8, one `criterion N: PASS|FAIL` line each.
//! Runs without the libtest harness so the lines always reach the output.

use std::path::PathBuf;
use std::process::Command;

use crext::catalog;
use crext::continuation::{commutation_residual_of, flatness_and_bracket_form, flatness_residual_in};
use crext::cr_frame::{build_extended_frame, select_transverse_basis, verify_cr_condition, GroupCRStructure};
use crext::exact::{exact_flatness_residual, ExactError, Oracle, RationalAlgebra};
use crext::grid::random_box;
use crext::maurer_cartan::maurer_cartan_residual;
use crext::{check_triangular_dependence, lambda_at, omega_at, CoordinatePoint, FdSpec, SecondKindChart, C64};
use nalgebra::DMatrix;
use serde_json::Value;

const SEED: u64 = 20240611;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_crext")).args(args).output().expect("binary runs");
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().expect("exit code"), v)
}

fn pt(t: &[f64]) -> CoordinatePoint {
    CoordinatePoint::real(t).unwrap()
}

fn report(n: u32, what: &str, failures: &[String]) -> bool {
    if failures.is_empty() {
        println!("criterion {n}: PASS  {what}");
    } else {
        println!("criterion {n}: FAIL  {what}");
        for f in failures {
            println!("    {f}");
        }
    }
    failures.is_empty()
}

/// Random points with `|t| <= r` in the max-norm; every f64 is a dyadic rational.
fn sample(dim: usize, count: usize, r: f64, seed: u64) -> Vec<Vec<f64>> {
    random_box(dim, count, r, seed)
}

fn criterion_1_exact_flatness() -> bool {
    let mut failures = Vec::new();
    for name in ["heisenberg3", "filiform4", "filiform5"] {
        let (code, v) = run(&["oracle", &format!("catalog:{name}"), "--json"]);
        if code != 0 || v["flatness_residual"]["identically_zero"] != Value::Bool(true) {
            failures.push(format!(
                "{name}: oracle exit {code}, identically_zero = {}",
                v["flatness_residual"]["identically_zero"]
            ));
        }
        let alg = RationalAlgebra::from_algebra(&catalog::get(name).unwrap().algebra).unwrap();
        if !exact_flatness_residual(&alg).unwrap().is_identically_zero() {
            failures.push(format!("{name}: library residual is not the zero polynomial"));
        }
    }
    report(1, "oracle certifies the flatness residual is identically zero for h3, n4, n5", &failures)
}

fn criterion_2_numeric_flatness() -> bool {
    let mut failures = Vec::new();
    let points = sample(3, 200, 0.5, SEED);
    let fd = FdSpec::default();

    let h3 = catalog::heisenberg3();
    let chart = SecondKindChart::new(&h3);
    let oracle = Oracle::new(&h3).unwrap();
    let mut worst_h3 = 0.0f64;
    let mut worst_vs_exact = 0.0f64;
    for t in &points {
        let numeric = flatness_residual_in(&chart, &pt(t), &fd).unwrap();
        let exact = flatness_residual_in(&chart, &pt(t), &FdSpec::exact()).unwrap();
        worst_h3 = worst_h3.max(numeric.max_abs().0);
        worst_vs_exact = worst_vs_exact.max(numeric.max_diff(&exact));
    }
    if !oracle.flatness.is_identically_zero() {
        failures.push("h3: exact flatness residual is not the zero polynomial".into());
    }
    if worst_h3 > 1e-8 || worst_vs_exact > 1e-8 {
        failures.push(format!("h3: max residual {worst_h3:e}, max |FD - exact| {worst_vs_exact:e} (bound 1e-8)"));
    }

    let sl2 = catalog::sl2();
    let chart = SecondKindChart::new(&sl2);
    let worst = |spec: &FdSpec| {
        points.iter().map(|t| flatness_residual_in(&chart, &pt(t), spec).unwrap().max_abs().0).fold(0.0, f64::max)
    };
    let worst_sl2 = worst(&fd);
    if worst_sl2 > 1e-6 {
        failures.push(format!("sl2: max residual {worst_sl2:e} (bound 1e-6)"));
    }
    // plain central differences, so the leading error is O(h^2)
    let coarse = worst(&FdSpec::plain(1e-3));
    let fine = worst(&FdSpec::plain(5e-4));
    let ratio = coarse / fine;
    if ratio < 3.5 {
        failures.push(format!("sl2 step halving: {coarse:e} -> {fine:e}, ratio {ratio:.3} < 3.5"));
    }
    report(
        2,
        &format!("h3 max {worst_h3:.2e} (|FD-exact| {worst_vs_exact:.2e}), sl2 max {worst_sl2:.2e}, halving ratio {ratio:.2}"),
        &failures,
    )
}

fn criterion_3_affine_line_closed_form() -> bool {
    let mut failures = Vec::new();
    let axb = catalog::affine_line();
    let chart = SecondKindChart::new(&axb);
    let mut worst_closed = 0.0f64;
    let mut worst_flat = 0.0f64;
    for t in sample(2, 20, 0.5, SEED + 3) {
        let l = lambda_at(&axb, &pt(&t)).unwrap().values;
        worst_closed = worst_closed.max((l[(1, 1)] - C64::new(0.0, t[0]).exp()).norm());
        let w = omega_at(&axb, &pt(&t)).unwrap().values;
        worst_closed = worst_closed.max((w[(1, 1)] - C64::new((-t[0]).exp(), 0.0)).norm());
        worst_flat = worst_flat.max(flatness_residual_in(&chart, &pt(&t), &FdSpec::default()).unwrap().max_abs().0);
    }
    if worst_closed > 1e-12 {
        failures.push(format!("lambda_2^2 vs exp(i t1): {worst_closed:e}"));
    }
    if worst_flat > 1e-8 {
        failures.push(format!("flatness residual {worst_flat:e}"));
    }
    report(3, &format!("ax+b closed form error {worst_closed:.2e}, flatness {worst_flat:.2e}"), &failures)
}

fn criterion_4_oracle_agreement() -> bool {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for entry in catalog::entries().into_iter().filter(|e| e.structure.is_none() && e.algebra.classify().is_nilpotent())
    {
        let alg = &entry.algebra;
        let s = alg.dim();
        let oracle = Oracle::new(alg).unwrap();
        for t in sample(s, 20, 0.9, SEED + 4) {
            let q = Oracle::rational_point(&t).unwrap();
            let (we, le) = (oracle.omega.eval(&q), oracle.lambda.eval(&q));
            let w = omega_at(alg, &pt(&t)).unwrap().values;
            let l = lambda_at(alg, &pt(&t)).unwrap().values;
            for g in 0..s {
                for a in 0..s {
                    worst = worst.max((w[(g, a)] - we[g][a].to_c64()).norm());
                    worst = worst.max((l[(g, a)] - le[g][a].to_c64()).norm());
                }
            }
        }
        if worst > 1e-12 {
            failures.push(format!("{}: max deviation {worst:e}", entry.name));
        }
    }
    report(4, &format!("numeric omega and lambda vs exact values, max deviation {worst:.2e}"), &failures)
}

fn criterion_5_triangular_dependence() -> bool {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for entry in catalog::entries() {
        let r = check_triangular_dependence(&entry.algebra, 50).unwrap();
        worst = worst.max(r.max_deviation);
        if !r.passed || r.max_deviation > 1e-12 || r.samples != 50 {
            failures.push(format!("{}: max deviation {:e}, witness {:?}", entry.name, r.max_deviation, r.witness));
        }
    }
    report(5, &format!("every catalog algebra, 50 trials each, max deviation {worst:.2e}"), &failures)
}

fn criterion_6_structural_identities() -> bool {
    let mut failures = Vec::new();
    let fd = FdSpec::default();
    let i = C64::new(0.0, 1.0);
    let (mut bracket, mut commutation, mut conjugation) = (0.0f64, 0.0f64, 0.0f64);
    for entry in catalog::entries() {
        let alg = &entry.algebra;
        let s = alg.dim();
        let chart = SecondKindChart::new(alg);
        if lambda_at(alg, &CoordinatePoint::origin(s)).unwrap().values != DMatrix::identity(s, s) {
            failures.push(format!("{}: lambda(0) is not the identity", entry.name));
        }
        let mut points = vec![vec![0.0; s]];
        points.extend(sample(s, 20, 0.5, SEED + 6));
        for t in &points {
            let p = pt(t);
            let (r, b) = flatness_and_bracket_form(&chart, &p, &fd).unwrap();
            let d = maurer_cartan_residual(&chart, &p, &fd).unwrap();
            for a in 0..s {
                for bb in 0..s {
                    for g in 0..s {
                        if r.get(a, bb, g) != -r.get(bb, a, g) || d.get(a, bb, g) != -d.get(bb, a, g) {
                            failures.push(format!("{}: antisymmetry broken at {t:?}", entry.name));
                        }
                    }
                }
            }
            bracket = bracket.max(r.max_diff(&b));
            let field = |x: &[f64]| Ok(lambda_at(alg, &pt(x))?.values);
            let c = commutation_residual_of(alg, &field, &p, s, &fd).unwrap();
            commutation = commutation.max(c.max_diff(&r.scaled(i)));
            if alg.is_real() {
                let neg: Vec<f64> = t.iter().map(|x| -x).collect();
                let l = lambda_at(alg, &p).unwrap().values;
                let m = lambda_at(alg, &pt(&neg)).unwrap().values;
                conjugation =
                    conjugation.max(l.iter().zip(m.iter()).map(|(x, y)| (x.conj() - y).norm()).fold(0.0, f64::max));
            }
        }
    }
    for (name, v) in [
        ("bracket form vs indexed form", bracket),
        ("C - iR", commutation),
        ("conj lambda(t) - lambda(-t)", conjugation),
    ] {
        if v > 1e-12 {
            failures.push(format!("{name}: {v:e}"));
        }
    }
    failures.dedup();
    report(
        6,
        &format!("lambda(0) = I, antisymmetry exact, bracket {bracket:.1e}, C - iR {commutation:.1e}, conjugation {conjugation:.1e}"),
        &failures,
    )
}

fn cr_ranks(st: &GroupCRStructure, failures: &mut Vec<String>, name: &str) -> usize {
    let sel = select_transverse_basis(st, None).unwrap();
    let ell = sel.ell;
    let mut points = vec![vec![0.0; ell]];
    points.extend(sample(ell, 50, 0.3, SEED + 7));
    for t in &points {
        let frame = build_extended_frame(st, &sel, &pt(t)).unwrap();
        let r = verify_cr_condition(st, &frame);
        if r.rank != 2 * (st.n() + ell) {
            failures.push(format!("{name}: rank {} != {} at {t:?}", r.rank, 2 * (st.n() + ell)));
        }
    }
    points.len()
}

fn criterion_7_corollary_certificates() -> bool {
    let mut failures = Vec::new();
    for (name, ell, ty) in [("heisenberg3-cr", 1, [2, 0]), ("abelian4-cr", 2, [3, 0])] {
        let (code, v) = run(&["embed", &format!("catalog:{name}"), "--json"]);
        let cert = &v["certificate"];
        let stages_ok =
            cert["stages"].as_array().is_some_and(|s| !s.is_empty() && s.iter().all(|x| x["passed"] == true));
        if code != 0 || cert["ell"] != ell || cert["extension_type"] != serde_json::json!(ty) || !stages_ok {
            failures.push(format!(
                "{name}: exit {code}, ell {}, type {}, stages ok {stages_ok}",
                cert["ell"], cert["extension_type"]
            ));
        }
        let st = catalog::get(name).unwrap().structure.unwrap();
        let n = cr_ranks(&st, &mut failures, name);
        if n != 51 {
            failures.push(format!("{name}: rank checked at {n} points, expected 51"));
        }
    }
    report(
        7,
        "h3 CR: ell 1, type (2, 0); R^4 CR: ell 2, type (3, 0); CR rank 2(n + ell) at origin and 50 points",
        &failures,
    )
}

fn criterion_8_negative_controls() -> bool {
    let mut failures = Vec::new();

    let (code, _) = run(&["validate", &fixture("heisenberg3_perturbed.json"), "--json"]);
    if code != 1 {
        failures.push(format!("perturbed Jacobi input: exit {code}, expected 1"));
    }

    let h3 = catalog::heisenberg3();
    let frozen = |_: &[f64]| Ok(DMatrix::<C64>::identity(3, 3));
    let mut frozen_ok = true;
    for t in sample(3, 10, 0.5, SEED + 8) {
        let c = commutation_residual_of(&h3, &frozen, &pt(&t), 3, &FdSpec::default()).unwrap();
        let (max, idx) = c.max_abs();
        frozen_ok &= max == 1.0 && idx == Some([0, 1, 2]) && c.get(0, 1, 2) == C64::new(1.0, 0.0);
    }
    if !frozen_ok {
        failures.push("frozen lambda = I on h3 does not give component (1, 2, 3) of magnitude 1".into());
    }

    let (code, v) = run(&["embed", &fixture("heisenberg3_self_conjugate.json"), "--json"]);
    if code != 1 || v["failed_stage"] != "validate" {
        failures.push(format!("h = conj(h): exit {code}, failed stage {}", v["failed_stage"]));
    }

    let (code, _) = run(&["oracle", "catalog:sl2"]);
    let lib = Oracle::new(&catalog::sl2());
    if code != 3 || !matches!(lib, Err(ExactError::NotNilpotent { .. })) {
        failures.push(format!("sl2 oracle: exit {code}, library {:?}", lib.err()));
    }
    report(8, "perturbed Jacobi exit 1; frozen lambda residual 1 at (1, 2, 3); h = conj(h) rejected at validate; sl2 NotNilpotent", &failures)
}

fn main() {
    let criteria: [(u32, fn() -> bool); 8] = [
        (1, criterion_1_exact_flatness),
        (2, criterion_2_numeric_flatness),
        (3, criterion_3_affine_line_closed_form),
        (4, criterion_4_oracle_agreement),
        (5, criterion_5_triangular_dependence),
        (6, criterion_6_structural_identities),
        (7, criterion_7_corollary_certificates),
        (8, criterion_8_negative_controls),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        let ok = std::panic::catch_unwind(f).unwrap_or_else(|_| {
            println!("criterion {n}: FAIL  panicked");
            false
        });
        failed += usize::from(!ok);
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
