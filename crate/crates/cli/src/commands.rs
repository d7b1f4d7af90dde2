use std::fmt::Write as _;

use crext::catalog;
use crext::continuation::{bracket_form_agreement, check_triangular_dependence_in, verify_flatness, DependenceReport};
use crext::cr_frame::{corollary_pipeline_with, validate_cr_structure, GroupCRStructure, PipelineConfig};
use crext::exact::{ExactError, Oracle, PolyMatrix};
use crext::io::{AlgebraFile, FormatError, StructureFile};
use crext::maurer_cartan::verify_maurer_cartan_in;
use crext::residual::ResidualReport;
use crext::{EvalError, LieAlgebra, LieError, SecondKindChart};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;

pub struct Outcome {
    pub code: i32,
    pub report: Value,
    pub human: String,
}

impl Outcome {
    fn new(passed: bool, report: Value, human: String) -> Self {
        Self { code: if passed { EXIT_PASS } else { EXIT_FAIL }, report, human }
    }
}

/// Either an algebra or a CR structure, from `catalog:<name>` or a JSON file.
pub enum Input {
    Algebra(LieAlgebra),
    Structure(GroupCRStructure),
}

impl Input {
    fn algebra(&self) -> &LieAlgebra {
        match self {
            Self::Algebra(a) => a,
            Self::Structure(s) => s.algebra(),
        }
    }
}

pub enum Loaded {
    Ok(String, Input),
    /// Well-formed file whose constants violate Jacobi.
    Jacobi(String, LieError),
}

pub fn load(spec: &str) -> Result<Loaded, CliError> {
    if let Some(name) = spec.strip_prefix("catalog:") {
        let entry = catalog::get(name).ok_or_else(|| CliError::Input(format!("no catalog entry {name:?}")))?;
        let input = match entry.structure {
            Some(s) => Input::Structure(s),
            None => Input::Algebra(entry.algebra),
        };
        return Ok(Loaded::Ok(entry.name.to_string(), input));
    }
    let text = std::fs::read_to_string(spec).map_err(|e| CliError::Input(format!("cannot read {spec}: {e}")))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{spec}: {e}")))?;
    let parsed = if value.get("algebra").is_some() {
        serde_json::from_value::<StructureFile>(value)
            .map_err(FormatError::from)
            .and_then(|f| f.to_structure())
            .map(Input::Structure)
    } else {
        serde_json::from_value::<AlgebraFile>(value)
            .map_err(FormatError::from)
            .and_then(|f| f.to_algebra())
            .map(Input::Algebra)
    };
    match parsed {
        Ok(input) => Ok(Loaded::Ok(spec.to_string(), input)),
        Err(FormatError::Lie(e @ LieError::JacobiViolation { .. })) => Ok(Loaded::Jacobi(spec.to_string(), e)),
        Err(e) if e.is_parse_error() => Err(CliError::Input(format!("{spec}: {e}"))),
        Err(e) => Err(CliError::Domain(format!("{spec}: {e}"))),
    }
}

fn load_ok(spec: &str) -> Result<(String, Input), CliError> {
    match load(spec)? {
        Loaded::Ok(name, input) => Ok((name, input)),
        Loaded::Jacobi(name, e) => Err(CliError::Failure(format!("{name}: {e}"))),
    }
}

fn eval_error(e: EvalError) -> CliError {
    match e {
        EvalError::InvalidFdSpec(_) | EvalError::DimensionMismatch { .. } | EvalError::OutsideChart { .. } => {
            CliError::Input(e.to_string())
        }
        _ => CliError::Domain(e.to_string()),
    }
}

fn fmt_point(v: &Value) -> String {
    let parts: Vec<String> = v
        .as_array()
        .map(|a| {
            a.iter()
                .map(|x| match x {
                    Value::Array(c) => format!("{}{:+}i", c[0], c[1].as_f64().unwrap_or(0.0)),
                    other => other.to_string(),
                })
                .collect()
        })
        .unwrap_or_default();
    format!("({})", parts.join(", "))
}

fn witness_text(report: &ResidualReport) -> String {
    match &report.witness {
        Some(w) if report.max_residual > 0.0 => {
            let point = fmt_point(&serde_json::to_value(&w.point).unwrap_or(Value::Null));
            match w.indices {
                Some([a, b, g]) => format!("  worst at t = {point}, (a, b, g) = ({a}, {b}, {g})"),
                None => format!("  worst at t = {point}"),
            }
        }
        _ => String::new(),
    }
}

pub fn validate(spec: &str) -> Result<Outcome, CliError> {
    let (name, input) = match load(spec)? {
        Loaded::Ok(name, input) => (name, input),
        Loaded::Jacobi(name, e) => {
            let LieError::JacobiViolation { residual, witness } = e else { unreachable!() };
            let w = witness;
            let human = format!(
                "{name}: INVALID\n  Jacobi identity fails: residual {residual:e} for (a, b, c) = ({}, {}, {}), component {}\n",
                w[0], w[1], w[2], w[3]
            );
            let report = json!({
                "command": "validate",
                "input": name,
                "valid": false,
                "error": "jacobi_violation",
                "jacobi_residual": residual,
                "witness": w,
            });
            return Ok(Outcome::new(false, report, human));
        }
    };
    let alg = input.algebra();
    let class = alg.classify();
    let mut human = format!(
        "{name}: valid Lie algebra\n  dimension {}\n  class {class}\n  Jacobi residual {:e}\n",
        alg.dim(),
        alg.jacobi_residual()
    );
    let mut report = json!({
        "command": "validate",
        "input": name,
        "valid": true,
        "dim": alg.dim(),
        "class": class,
        "jacobi_residual": alg.jacobi_residual(),
    });
    let mut valid = true;
    if let Input::Structure(st) = &input {
        let v = validate_cr_structure(st);
        valid = v.valid;
        let _ = writeln!(
            human,
            "  CR structure of type ({}, {}): {}\n  rank h = {}, rank [h | conj h] = {} (expected {}), integrability defect {:e}",
            st.n(),
            st.k(),
            if v.valid { "valid" } else { "INVALID" },
            v.h_rank,
            v.h_conj_rank,
            v.expected_h_conj_rank,
            v.integrability_defect
        );
        for msg in &v.violations {
            let _ = writeln!(human, "  violation: {msg}");
        }
        report["valid"] = json!(valid);
        report["cr_structure"] = serde_json::to_value(&v).expect("report serializes");
    }
    Ok(Outcome::new(valid, report, human))
}

struct CheckLine {
    passed: bool,
    value: Value,
    line: String,
}

fn residual_check(report: ResidualReport, tol: f64) -> CheckLine {
    let passed = report.passes(tol);
    let mut line = format!(
        "{:<22} max {:<10.3e} over {} points  {}",
        report.check,
        report.max_residual,
        report.points,
        if passed { "PASS" } else { "FAIL" }
    );
    let w = witness_text(&report);
    if !w.is_empty() {
        line.push('\n');
        line.push_str(&w);
    }
    for d in &report.diagnostics {
        let _ = write!(line, "\n  note: {}", serde_json::to_string(d).unwrap_or_default());
    }
    let mut value = serde_json::to_value(&report).expect("report serializes");
    value["passed"] = json!(passed);
    CheckLine { passed, value, line }
}

fn dependence_check(report: DependenceReport) -> CheckLine {
    let mut line = format!(
        "{:<22} max {:<10.3e} over {} trials  {}",
        report.check,
        report.max_deviation,
        report.trials,
        if report.passed { "PASS" } else { "FAIL" }
    );
    if let Some(w) = &report.witness {
        let p = fmt_point(&serde_json::to_value(&w.point).unwrap_or(Value::Null));
        let _ = write!(line, "\n  column {} moved, base t = {p}", w.column);
    }
    CheckLine { passed: report.passed, value: serde_json::to_value(&report).expect("report serializes"), line }
}

/// The numeric checks behind `verify`, shared with `selftest`.
fn verify_algebra(alg: &LieAlgebra, cfg: &RunConfig) -> Result<(bool, Vec<CheckLine>), CliError> {
    let chart = SecondKindChart::new(alg).with_r_max(cfg.r_max);
    let grid = cfg.grid_for(alg.dim());
    let checks = vec![
        residual_check(verify_maurer_cartan_in(&chart, &grid, &cfg.fd).map_err(eval_error)?, cfg.tol),
        residual_check(verify_flatness(&chart, &grid, &cfg.fd).map_err(eval_error)?, cfg.tol),
        residual_check(bracket_form_agreement(&chart, &grid, &cfg.fd).map_err(eval_error)?, cfg.tol),
        dependence_check(
            check_triangular_dependence_in(&chart, cfg.samples, cfg.half_width(), cfg.seed).map_err(eval_error)?,
        ),
    ];
    Ok((checks.iter().all(|c| c.passed), checks))
}

pub fn verify(spec: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (name, input) = load_ok(spec)?;
    let alg = input.algebra();
    let (passed, checks) = verify_algebra(alg, cfg)?;
    let mut human = format!("{name}: dimension {}, class {}\n", alg.dim(), alg.classify());
    for c in &checks {
        human.push_str(&c.line);
        human.push('\n');
    }
    let _ = writeln!(human, "result: {} (tolerance {:e})", if passed { "PASS" } else { "FAIL" }, cfg.tol);
    let report = json!({
        "command": "verify",
        "input": name,
        "passed": passed,
        "tolerance": cfg.tol,
        "residual_convention": "lhs_minus_rhs",
        "checks": checks.into_iter().map(|c| c.value).collect::<Vec<_>>(),
        "config": cfg.to_json(),
    });
    Ok(Outcome::new(passed, report, human))
}

fn pipeline_config(cfg: &RunConfig) -> PipelineConfig {
    PipelineConfig {
        r_max: cfg.r_max,
        fd: cfg.fd,
        tol: cfg.tol,
        samples: cfg.samples,
        seed: cfg.seed,
        target_ell: cfg.target_l,
        ..PipelineConfig::default()
    }
}

fn embed_structure(name: &str, st: &GroupCRStructure, cfg: &RunConfig) -> Outcome {
    match corollary_pipeline_with(st, &pipeline_config(cfg)) {
        Ok(cert) => {
            let mut human = format!(
                "{name}: CR structure of type ({}, {})\n  ell = {}\n  extension type ({}, {})\n  kept basis vectors {}\n",
                cert.n,
                cert.k,
                cert.ell,
                cert.extension_type[0],
                cert.extension_type[1],
                cert.selection["kept"]
            );
            for s in &cert.stages {
                let _ = writeln!(human, "  stage {:<22} PASS", s.stage);
            }
            let _ = writeln!(human, "  normalising hypothesis: {}", cert.normalising_hypothesis);
            let mut report = json!({ "command": "embed", "input": name, "passed": true });
            report["certificate"] = serde_json::to_value(&cert).expect("certificate serializes");
            Outcome::new(true, report, human)
        }
        Err(f) => {
            let mut human = format!("{name}: embedding FAILED at stage {}\n  {}\n", f.stage, f.message);
            for s in &f.stages {
                let _ = writeln!(human, "  stage {:<22} {}", s.stage, if s.passed { "PASS" } else { "FAIL" });
            }
            let report = json!({
                "command": "embed",
                "input": name,
                "passed": false,
                "failed_stage": f.stage,
                "message": f.message,
                "stages": serde_json::to_value(&f.stages).expect("stages serialize"),
            });
            Outcome::new(false, report, human)
        }
    }
}

pub fn embed(spec: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (name, input) = load_ok(spec)?;
    match input {
        Input::Structure(st) => Ok(embed_structure(&name, &st, cfg)),
        Input::Algebra(_) => Err(CliError::Input(format!("{name} is an algebra, not a CR structure"))),
    }
}

fn exact_error(e: ExactError) -> CliError {
    match e {
        ExactError::NonFinitePoint => CliError::Input(e.to_string()),
        _ => CliError::Domain(e.to_string()),
    }
}

fn matrix_text(out: &mut String, title: &str, m: &PolyMatrix) {
    let _ = writeln!(out, "  {title} (row g, column a):");
    for g in 0..m.rows() {
        for a in 0..m.cols() {
            let p = m.get(g, a);
            if !p.is_zero() {
                let _ = writeln!(out, "    [{}][{}] = {p}", g + 1, a + 1);
            }
        }
    }
}

pub fn oracle(spec: &str) -> Result<Outcome, CliError> {
    let (name, input) = load_ok(spec)?;
    let o = Oracle::new(input.algebra()).map_err(exact_error)?;
    let flat = o.flatness.is_identically_zero();
    let mc = o.maurer_cartan.is_identically_zero();
    let yes = |b: bool| if b { "yes" } else { "no" };
    let mut human = format!("{name}: exact coefficients over Q(i)\n");
    matrix_text(&mut human, "omega", &o.omega);
    matrix_text(&mut human, "lambda", &o.lambda);
    let _ = writeln!(human, "  flatness residual identically zero: {}", yes(flat));
    if let Some((idx, p)) = o.flatness.first_nonzero() {
        let _ = writeln!(human, "    first nonzero component ({}, {}, {}) = {p}", idx[0], idx[1], idx[2]);
    }
    let _ = writeln!(human, "  Maurer-Cartan residual identically zero: {}", yes(mc));
    let report = json!({
        "command": "oracle",
        "input": name,
        "passed": flat && mc,
        "omega": o.omega.to_json(),
        "lambda": o.lambda.to_json(),
        "flatness_residual": o.flatness.to_json(),
        "maurer_cartan_residual": o.maurer_cartan.to_json(),
    });
    Ok(Outcome::new(flat && mc, report, human))
}

pub fn selftest(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut all = true;
    let mut human = String::new();
    let mut rows = Vec::new();
    for entry in catalog::entries() {
        let alg = &entry.algebra;
        let (verified, _) = verify_algebra(alg, cfg)?;
        let oracle = if alg.classify().is_nilpotent() {
            let o = Oracle::new(alg).map_err(exact_error)?;
            Some(o.flatness.is_identically_zero() && o.maurer_cartan.is_identically_zero())
        } else {
            None
        };
        let embedded = entry.structure.as_ref().map(|st| embed_structure(entry.name, st, cfg).code == EXIT_PASS);
        let passed = verified && oracle.unwrap_or(true) && embedded.unwrap_or(true);
        all &= passed;
        let tag = |o: Option<bool>| match o {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "-",
        };
        let _ = writeln!(
            human,
            "{:<16} verify {:<4}  oracle {:<4}  embed {:<4}  {}",
            entry.name,
            tag(Some(verified)),
            tag(oracle),
            tag(embedded),
            if passed { "PASS" } else { "FAIL" }
        );
        rows.push(json!({
            "name": entry.name,
            "passed": passed,
            "verify": verified,
            "oracle": oracle,
            "embed": embedded,
        }));
    }
    let report = json!({ "command": "selftest", "passed": all, "entries": rows, "config": cfg.to_json() });
    Ok(Outcome::new(all, report, human))
}

pub fn catalog_list() -> Outcome {
    let mut human = String::new();
    let mut rows = Vec::new();
    for e in catalog::entries() {
        let kind = match &e.structure {
            Some(st) => format!("CR type ({}, {})", st.n(), st.k()),
            None => "algebra".into(),
        };
        let class = e.algebra.classify();
        let _ = writeln!(
            human,
            "{:<16} dim {}  {:<18} {:<16} {}",
            e.name,
            e.algebra.dim(),
            class.to_string(),
            kind,
            e.notes
        );
        rows.push(json!({
            "name": e.name,
            "dim": e.algebra.dim(),
            "class": class,
            "structure": e.structure.as_ref().map(|st| json!({ "n": st.n(), "k": st.k() })),
            "notes": e.notes,
        }));
    }
    Outcome::new(true, json!({ "command": "catalog list", "entries": rows }), human)
}
