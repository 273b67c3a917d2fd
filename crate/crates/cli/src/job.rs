use std::path::{Path, PathBuf};

use clap::ValueEnum;
use oblique_core::douglas;
use oblique_core::interpolant;
use oblique_core::io::{self, matrix_json, subspace_json, vector_json};
use oblique_core::oblique as obl;
use oblique_core::oprange;
use oblique_core::{Error, Operator, PsdOperator, Subspace, Tolerance};
use serde_json::{json, Map, Value};

use crate::battery;
use crate::Command;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Formula {
    /// Block decomposition and Douglas step.
    Block,
    /// (PAP)^† PA + P_N.
    Pinv,
    /// P (PAP + (I−P)A(I−P))^{-1} A, full-rank weights only.
    Invertible,
}

impl Formula {
    fn name(self) -> &'static str {
        match self {
            Formula::Block => "block",
            Formula::Pinv => "pinv",
            Formula::Invertible => "invertible",
        }
    }
}

#[derive(Debug, Clone)]
pub struct JobSpec {
    pub command: Command,
    pub input_a: Option<PathBuf>,
    pub input_s: Option<PathBuf>,
    pub input_b: Option<PathBuf>,
    pub input_x: Option<PathBuf>,
    pub tol_rank: f64,
    pub tol_eq: f64,
    pub seed: u64,
    pub formula: Formula,
    pub least_squares: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum JobError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(Error),
}

impl JobError {
    pub fn exit_code(&self) -> u8 {
        match self {
            JobError::Input(_) => 2,
            JobError::Numerical(_) => 3,
        }
    }
}

impl From<Error> for JobError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::DimensionMismatch(_)
            | Error::NonFinite
            | Error::InvalidTolerance(_) => JobError::Input(e.to_string()),
            other => JobError::Numerical(other),
        }
    }
}

pub struct Outcome {
    pub document: Value,
    pub code: u8,
}

fn read(path: &Option<PathBuf>, flag: &str) -> Result<(String, String), JobError> {
    let path: &Path = path
        .as_deref()
        .ok_or_else(|| JobError::Input(format!("missing required --{flag}")))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| JobError::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok((path.display().to_string(), text))
}

struct Loaded {
    inputs: Map<String, Value>,
}

impl Loaded {
    fn matrix(
        &mut self,
        path: &Option<PathBuf>,
        flag: &str,
        key: &str,
    ) -> Result<Operator, JobError> {
        let (name, text) = read(path, flag)?;
        let m = io::parse_matrix(&text)?;
        self.inputs.insert(
            key.into(),
            json!({ "file": name, "matrix": matrix_json(&m) }),
        );
        Ok(m)
    }

    fn weight(&mut self, spec: &JobSpec, tol: &Tolerance) -> Result<PsdOperator, JobError> {
        let m = self.matrix(&spec.input_a, "input-a", "a")?;
        Ok(PsdOperator::new(&m, tol)?)
    }

    fn subspace(&mut self, spec: &JobSpec, tol: &Tolerance) -> Result<Subspace, JobError> {
        let (name, text) = read(&spec.input_s, "input-s")?;
        let s = io::parse_subspace(&text, tol)?;
        self.inputs.insert(
            "s".into(),
            json!({ "file": name, "basis": subspace_json(&s) }),
        );
        Ok(s)
    }
}

fn tolerance_json(tol: &Tolerance) -> Value {
    json!({ "rank_rel": tol.rank_rel(), "eq_abs": tol.eq_abs(), "psd_neg": tol.psd_neg() })
}

fn check(pass: bool, defect: f64) -> Value {
    json!({ "pass": pass, "defect": defect })
}

pub fn run(spec: &JobSpec) -> Result<Outcome, JobError> {
    let tol = Tolerance::default()
        .with_rank_rel(spec.tol_rank)?
        .with_eq_abs(spec.tol_eq)?;
    let mut loaded = Loaded { inputs: Map::new() };
    let (results, checks) = match spec.command {
        Command::Compat => compat(spec, &tol, &mut loaded)?,
        Command::Project => project(spec, &tol, &mut loaded)?,
        Command::Douglas => douglas_cmd(spec, &tol, &mut loaded)?,
        Command::Interpolate => interpolate(spec, &tol, &mut loaded)?,
        Command::Oprange => oprange_cmd(spec, &tol, &mut loaded)?,
        Command::Report => {
            let a = loaded.weight(spec, &tol)?;
            let s = loaded.subspace(spec, &tol)?;
            loaded.inputs.insert("seed".into(), json!(spec.seed));
            battery::run(&a, &s, &tol, spec.seed)?
        }
    };
    let failed = checks
        .values()
        .any(|c| c.get("pass").and_then(Value::as_bool) == Some(false));
    let mut command = Map::new();
    command.insert("command".into(), json!(command_name(spec.command)));
    let mut inputs = loaded.inputs;
    inputs.append(&mut command);
    let document = json!({
        "inputs": inputs,
        "results": results,
        "checks": checks,
        "tolerances": tolerance_json(&tol),
        "versions": { "oblique": env!("CARGO_PKG_VERSION"), "report_format": 1 },
    });
    let code = if failed && spec.command == Command::Report {
        4
    } else {
        0
    };
    Ok(Outcome { document, code })
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Compat => "compat",
        Command::Project => "project",
        Command::Douglas => "douglas",
        Command::Interpolate => "interpolate",
        Command::Oprange => "oprange",
        Command::Report => "report",
    }
}

pub type Sections = (Map<String, Value>, Map<String, Value>);

fn compat(spec: &JobSpec, tol: &Tolerance, l: &mut Loaded) -> Result<Sections, JobError> {
    let a = l.weight(spec, tol)?;
    let s = l.subspace(spec, tol)?;
    let rep = obl::diagnostics_chain(&a, &s, tol)?;
    let mut r = Map::new();
    r.insert("compatible".into(), json!(rep.compatible));
    r.insert("sum_check".into(), json!(rep.sum_check));
    r.insert("degenerate".into(), subspace_json(&rep.degenerate));
    r.insert("preimage_perp".into(), subspace_json(&rep.preimage_perp));
    r.insert(
        "d".into(),
        rep.d.as_ref().map(matrix_json).unwrap_or(Value::Null),
    );
    r.insert(
        "pas".into(),
        rep.pas
            .as_ref()
            .map(|p| matrix_json(p.matrix()))
            .unwrap_or(Value::Null),
    );
    r.insert("chain".into(), chain_json(&rep));
    r.insert(
        "range_projection_compat".into(),
        json!(rep.range_projection_compat),
    );
    r.insert("angle_cosine".into(), json!(rep.angle_cosine));
    let mut c = Map::new();
    c.insert(
        "compatible_matches_sum".into(),
        check(rep.compatible == rep.sum_check, 0.0),
    );
    c.insert(
        "chain_implications".into(),
        check(rep.implications_respected(), 0.0),
    );
    Ok((r, c))
}

pub fn chain_json(rep: &obl::CompatibilityReport) -> Value {
    const NAMES: [&str; 6] = [
        "compatible",
        "image_closed_in_range",
        "preimage_of_image",
        "sqrt_image_closed",
        "sum_with_null_closed",
        "range_projection_closed",
    ];
    let mut m = Map::new();
    for (name, flag) in NAMES.iter().zip(rep.chain) {
        m.insert((*name).into(), json!(flag));
    }
    Value::Object(m)
}

fn project(spec: &JobSpec, tol: &Tolerance, l: &mut Loaded) -> Result<Sections, JobError> {
    let a = l.weight(spec, tol)?;
    let s = l.subspace(spec, tol)?;
    let build = |f: Formula| -> Result<oblique_core::ObliqueProjection, Error> {
        match f {
            Formula::Block => obl::pas(&a, &s, tol),
            Formula::Pinv => obl::pas_closed_range(&a, &s),
            Formula::Invertible => obl::pas_invertible(&a, &s),
        }
    };
    let p = build(spec.formula)?;
    let mut r = Map::new();
    r.insert("formula".into(), json!(spec.formula.name()));
    r.insert("matrix".into(), matrix_json(p.matrix()));
    r.insert("range".into(), subspace_json(p.range()));
    r.insert("nullspace".into(), subspace_json(p.nullspace()));
    let mut c = Map::new();
    for other in [Formula::Block, Formula::Pinv, Formula::Invertible] {
        if other == spec.formula || (other == Formula::Invertible && !a.is_invertible()) {
            continue;
        }
        let q = build(other)?;
        let gap = (p.matrix().as_matrix() - q.matrix().as_matrix()).norm();
        c.insert(
            format!("agrees_with_{}", other.name()),
            check(gap <= 10.0 * tol.eq_abs(), gap),
        );
    }
    c.insert("idempotent".into(), {
        let d = p.idempotency_defect();
        check(d <= tol.eq_abs(), d)
    });
    c.insert(
        "a_hermitian".into(),
        check(obl::krein_check(&p, &a, &s)?, 0.0),
    );
    Ok((r, c))
}

fn douglas_cmd(spec: &JobSpec, tol: &Tolerance, l: &mut Loaded) -> Result<Sections, JobError> {
    let a = l.matrix(&spec.input_a, "input-a", "a")?;
    let b = l.matrix(&spec.input_b, "input-b", "b")?;
    let mut r = Map::new();
    let mut c = Map::new();
    let feasible = douglas::range_inclusion(&b, &a, tol)?;
    let sol = if spec.least_squares && !feasible {
        r.insert(
            "mode".into(),
            json!("least-squares: B is not in the range of A, the result minimizes the residual and is not a reduced solution"),
        );
        douglas::least_squares(&a, &b, tol)?
    } else {
        r.insert("mode".into(), json!("reduced"));
        let sol = douglas::reduced_solution(&a, &b, tol)?;
        let lambda = douglas::minimal_lambda(&a, &b, tol)?;
        r.insert("minimal_lambda".into(), json!(lambda));
        let rel = (lambda - sol.norm_sq()).abs() / sol.norm_sq().max(f64::MIN_POSITIVE);
        c.insert(
            "lambda_matches_norm".into(),
            check(rel <= 1e-6 || sol.norm_sq() == 0.0, rel),
        );
        sol
    };
    r.insert("range_inclusion".into(), json!(feasible));
    r.insert("d".into(), matrix_json(sol.solution()));
    r.insert("norm_sq".into(), json!(sol.norm_sq()));
    r.insert("residual".into(), json!(sol.residual()));
    Ok((r, c))
}

fn interpolate(spec: &JobSpec, tol: &Tolerance, l: &mut Loaded) -> Result<Sections, JobError> {
    let a = l.weight(spec, tol)?;
    let s = l.subspace(spec, tol)?;
    let (name, text) = read(&spec.input_x, "input-x")?;
    let x = io::parse_vector(&text)?;
    l.inputs.insert(
        "x".into(),
        json!({ "file": name, "vector": vector_json(&x) }),
    );
    let res = interpolant::spline_from_weight(&a, &s, &x, tol)?;
    let mut r = Map::new();
    r.insert("minimizer".into(), vector_json(res.minimizer()));
    r.insert("value".into(), json!(res.value()));
    r.insert("unique".into(), json!(res.unique()));
    r.insert("nonempty".into(), json!(res.nonempty()));
    r.insert(
        "solution_directions".into(),
        subspace_json(res.solution_directions()),
    );
    let oracle = interpolant::spline_oracle(a.sqrt(), &s, &x, tol)?;
    let gap = (res.minimizer() - oracle).norm();
    let mut c = Map::new();
    c.insert(
        "agrees_with_oracle".into(),
        check(gap <= tol.eq_abs() * (1.0 + x.norm()), gap),
    );
    Ok((r, c))
}

fn oprange_cmd(spec: &JobSpec, tol: &Tolerance, l: &mut Loaded) -> Result<Sections, JobError> {
    let a = l.weight(spec, tol)?;
    let s = l.subspace(spec, tol)?;
    let q = oprange::qas(&a, &s, tol)?;
    let mut r = Map::new();
    r.insert("qas_chart".into(), matrix_json(q.coord_matrix()));
    r.insert("qas_ambient".into(), matrix_json(&q.ambient_matrix()));
    r.insert("range_image".into(), subspace_json(q.range_image()));
    r.insert("null_image".into(), subspace_json(q.null_image()));
    let (img, equal) = oprange::qas_range_image(&a, &s, tol)?;
    r.insert("qas_of_range".into(), subspace_json(&img));
    r.insert(
        "sharp_projection".into(),
        matrix_json(&oprange::sharp_projection(&a, &s, tol)?),
    );
    let pas = obl::pas(&a, &s, tol)?;
    r.insert(
        "theta_pas".into(),
        matrix_json(oprange::theta(&a, pas.matrix(), tol)?.chart()),
    );
    if spec.input_b.is_some() {
        let b = l.matrix(&spec.input_b, "input-b", "b")?;
        let ext = oprange::theta(&a, &b, tol)?;
        r.insert(
            "theta_b".into(),
            json!({ "chart": matrix_json(ext.chart()), "null_leak": ext.null_leak(), "bounded": ext.bounded() }),
        );
    }
    let mut c = Map::new();
    c.insert(
        "theta_pas_is_qas".into(),
        check(oprange::theta_pas_identity(&a, &s, tol)?, 0.0),
    );
    let compatible = obl::is_compatible(&a, &s, tol)?;
    c.insert(
        "qas_range_image_matches_compat".into(),
        check(equal == compatible, 0.0),
    );
    Ok((r, c))
}
