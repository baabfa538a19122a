use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thermoform::analysis::{
    approach_along_energy, concavity_conditions, entropy_hessian, leaf_solve, third_law_classify,
    AnalysisError, ThirdLawClass,
};
use thermoform::entropy::{
    entropy_form, gibbs_duhem_reconstruct, route, EntropyError, EntropyField, EntropySurface,
};
use thermoform::pfaffian::{StatePoint, ThermoModel, DEFAULT_LAMBDAS};
use thermoform::tolerances::Tolerances;
use thiserror::Error;

use crate::json::{format_float, SCHEMA_VERSION};
use crate::model_file::{LoadError, LoadedModel};
use crate::points::{parse_grid, parse_point, parse_values, PointError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Load(_) | CliError::Invalid(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<PointError> for CliError {
    fn from(e: PointError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

fn numeric(e: impl std::fmt::Display) -> CliError {
    CliError::Numeric(e.to_string())
}

fn analysis_error(e: AnalysisError) -> CliError {
    match e {
        AnalysisError::NotInterior(_)
        | AnalysisError::NonPositiveLevel(_)
        | AnalysisError::NoLeafSolution { .. }
        | AnalysisError::NotIncreasing(_)
        | AnalysisError::ApproachTooShort { .. } => CliError::Invalid(e.to_string()),
        other => numeric(other),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    CheckFailed,
    NumericFailure,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::CheckFailed => 2,
            Status::NumericFailure => 4,
        }
    }
}

pub struct Outcome {
    pub json: Value,
    pub text: String,
    /// Printed verbatim in place of either report, e.g. CSV on stdout.
    pub raw: Option<String>,
    pub status: Status,
}

pub struct Context {
    pub loaded: LoadedModel,
    pub tolerances: Tolerances,
}

impl Context {
    fn model(&self) -> &ThermoModel {
        &self.loaded.model
    }

    fn names(&self) -> Vec<&str> {
        self.model().coordinates().iter().map(String::as_str).collect()
    }

    fn field(&self) -> EntropyField {
        EntropyField::new(self.model().clone(), self.tolerances)
    }

    fn envelope(&self, command: &str, passed: bool, result: Value) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "model": {
                "name": self.model().name(),
                "digest": self.loaded.digest,
            },
            "tolerances": to_value(&self.tolerances),
            "passed": passed,
            "result": result,
        })
    }

    fn outcome(&self, command: &str, status: Status, result: Value, text: String) -> Outcome {
        Outcome {
            json: self.envelope(command, status == Status::Pass, result),
            text,
            raw: None,
            status,
        }
    }

    fn admissible_point(&self, spec: &str) -> Result<StatePoint, CliError> {
        let x = parse_point(spec, &self.names())?;
        if !self.model().admissible(&x) {
            return Err(CliError::Invalid(format!(
                "{x} is not an interior state with positive integrating factor"
            )));
        }
        Ok(x)
    }
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn sci(v: f64) -> String {
    format!("{v:.6e}")
}

// ---- check ----

struct Verdicts {
    homogeneity: bool,
    integrability: bool,
    exactness: bool,
    json: Value,
    text: String,
}

impl Verdicts {
    fn passed(&self) -> bool {
        self.homogeneity && self.integrability && self.exactness
    }
}

/// Reference state scaled per coordinate by 1/2, 1, 3/2 and 2, with the
/// energy measured above the ground surface; inadmissible states dropped.
fn sample_states(model: &ThermoModel) -> Result<Vec<StatePoint>, CliError> {
    let factors = [0.5, 1.0, 1.5, 2.0];
    let r = model.reference();
    let b_ref = model.energy_above_ground(r).map_err(numeric)?;
    let mut raw: Vec<Vec<f64>> = vec![vec![]];
    for i in 0..model.dim() {
        let base = if i == 0 { b_ref } else { r[i] };
        raw = raw
            .into_iter()
            .flat_map(|p| {
                factors.iter().map(move |k| {
                    let mut q = p.clone();
                    q.push(base * k);
                    q
                })
            })
            .collect();
    }
    let mut out = Vec::new();
    for p in raw {
        let p = StatePoint::from(p);
        let x = model.at_energy_above_ground(&p, p[0]).map_err(numeric)?;
        if model.admissible(&x) {
            out.push(x);
        }
    }
    if out.is_empty() {
        return Err(CliError::Numeric("no admissible sample states near the reference".into()));
    }
    Ok(out)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run_checks(ctx: &Context) -> Result<Verdicts, CliError> {
    let model = ctx.model();
    let tol = &ctx.tolerances;
    let samples = sample_states(model)?;
    let form = model.heat_form();

    let degree = form
        .check_homogeneity_within(&samples, &DEFAULT_LAMBDAS, tol.homogeneity, |x| model.contains(x))
        .map_err(numeric)?;
    let homogeneity = degree.passed();

    let mut l_worst: f64 = 0.0;
    let mut l_failures = Vec::new();
    let mut e_worst: f64 = 0.0;
    let mut e_failures = Vec::new();
    let entropy = entropy_form(model);
    for x in &samples {
        for r in form.integrability_residuals(x).map_err(numeric)? {
            l_worst = l_worst.max(r.normalized.abs());
            if r.normalized.abs() > tol.integrability {
                l_failures.push(json!({"point": x, "residual": to_value(&r)}));
            }
        }
        for r in entropy.exactness_residuals(x).map_err(numeric)? {
            e_worst = e_worst.max(r.normalized.abs());
            if r.normalized.abs() > tol.exactness {
                e_failures.push(json!({"point": x, "residual": to_value(&r)}));
            }
        }
    }
    let integrability = l_failures.is_empty();
    let exactness = e_failures.is_empty();

    let mut text = String::new();
    let _ = writeln!(text, "model {} ({} sample states)", model.name(), samples.len());
    let _ = writeln!(
        text,
        "homogeneity    {}  worst deviation {}",
        verdict(homogeneity),
        sci(degree.worst_deviation)
    );
    let _ = writeln!(text, "integrability  {}  worst residual {}", verdict(integrability), sci(l_worst));
    for f in l_failures.iter().take(5) {
        let r = &f["residual"];
        let names: Vec<&str> = r["coordinates"]
            .as_array()
            .map(|a| a.iter().filter_map(Value::as_str).collect())
            .unwrap_or_default();
        let _ = writeln!(
            text,
            "  l_{} = {} at {}",
            names.concat(),
            sci(r["raw"].as_f64().unwrap_or(f64::NAN)),
            f["point"]
        );
    }
    let _ = writeln!(text, "exactness      {}  worst residual {}", verdict(exactness), sci(e_worst));

    let json = json!({
        "samples": samples.len(),
        "homogeneity": {
            "passed": homogeneity,
            "nominal_degree": degree.nominal_degree,
            "observed_degrees": degree.observed_degrees,
            "worst_deviation": degree.worst_deviation,
            "failures": degree.failures().count(),
            "untestable": degree.untestable(),
        },
        "integrability": {
            "passed": integrability,
            "worst_residual": l_worst,
            "failures": l_failures,
        },
        "exactness": {
            "passed": exactness,
            "worst_residual": e_worst,
            "failures": e_failures,
        },
    });
    Ok(Verdicts {
        homogeneity,
        integrability,
        exactness,
        json,
        text,
    })
}

pub fn check(ctx: &Context) -> Result<Outcome, CliError> {
    let v = run_checks(ctx)?;
    let status = if v.passed() { Status::Pass } else { Status::CheckFailed };
    let mut text = v.text.clone();
    let _ = writeln!(text, "verdict: {}", verdict(v.passed()));
    Ok(ctx.outcome("check", status, v.json, text))
}

/// Commands that need an entropy run the checks first and stop on failure.
fn gate(ctx: &Context, command: &str) -> Result<Option<Outcome>, CliError> {
    let v = run_checks(ctx)?;
    if v.passed() {
        return Ok(None);
    }
    let reason = "the heat form fails the model checks, so no entropy exists";
    let mut text = v.text.clone();
    let _ = writeln!(text, "refused: {reason}");
    let result = json!({"refused": reason, "checks": v.json});
    Ok(Some(ctx.outcome(command, Status::CheckFailed, result, text)))
}

// ---- reconstruct ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub struct ReconstructArgs {
    pub grid: String,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub force: bool,
}

struct Row {
    point: StatePoint,
    value: Result<RowValue, String>,
}

struct RowValue {
    entropy: f64,
    temperature: f64,
    error_estimate: f64,
    analytic_delta: Option<f64>,
}

fn evaluate_row(field: &EntropyField, x: &StatePoint) -> Result<RowValue, String> {
    let model = field.model();
    if !model.contains(x) {
        return Err(format!("{x} is outside the model domain"));
    }
    let v = field.evaluate(x).map_err(|e| e.to_string())?;
    let f = model.integrating_factor(x).map_err(|e| e.to_string())?;
    let analytic_delta = match model.analytic_entropy_at(x) {
        Some(Ok(s)) => Some(v.entropy - s),
        _ => None,
    };
    Ok(RowValue {
        entropy: v.entropy,
        temperature: f / v.entropy,
        // first order: δS = S δŜ
        error_estimate: v.entropy * v.error_estimate,
        analytic_delta,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render_csv(names: &[&str], rows: &[Row]) -> String {
    let mut out = String::new();
    let header: Vec<&str> = names
        .iter()
        .copied()
        .chain(["S", "T", "err_estimate", "analytic_delta", "status"])
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let mut cells: Vec<String> = row.point.coords().iter().map(|v| format_float(*v)).collect();
        match &row.value {
            Ok(v) => {
                cells.push(format_float(v.entropy));
                cells.push(format_float(v.temperature));
                cells.push(format_float(v.error_estimate));
                cells.push(v.analytic_delta.map(format_float).unwrap_or_default());
                cells.push("ok".into());
            }
            Err(e) => {
                cells.extend(std::iter::repeat_n(String::new(), 4));
                cells.push(csv_field(&format!("error: {e}")));
            }
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn rows_json(rows: &[Row]) -> Vec<Value> {
    rows.iter()
        .map(|row| match &row.value {
            Ok(v) => json!({
                "point": row.point,
                "entropy": v.entropy,
                "temperature": v.temperature,
                "error_estimate": v.error_estimate,
                "analytic_delta": v.analytic_delta,
                "error": null,
            }),
            Err(e) => json!({
                "point": row.point,
                "entropy": null,
                "temperature": null,
                "error_estimate": null,
                "analytic_delta": null,
                "error": e,
            }),
        })
        .collect()
}

pub fn reconstruct(ctx: &Context, args: &ReconstructArgs) -> Result<Outcome, CliError> {
    let names = ctx.names();
    let points = parse_grid(&args.grid, &names)?;
    if !args.force {
        if let Some(refused) = gate(ctx, "reconstruct")? {
            return Ok(refused);
        }
    }
    let field = ctx.field();
    let rows: Vec<Row> = points
        .par_iter()
        .map(|x| Row {
            point: x.clone(),
            value: evaluate_row(&field, x),
        })
        .collect();
    let failed = rows.iter().filter(|r| r.value.is_err()).count();
    let max_relative_delta = rows
        .iter()
        .filter_map(|r| r.value.as_ref().ok())
        .filter_map(|v| v.analytic_delta.map(|d| (d / (v.entropy - d)).abs()))
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
    // more than a tenth of the grid failing is a numeric failure
    let status = if failed * 10 > rows.len() {
        Status::NumericFailure
    } else {
        Status::Pass
    };

    let mut summary = json!({
        "coordinates": names,
        "points": rows.len(),
        "failed": failed,
        "max_relative_analytic_delta": max_relative_delta,
    });
    let mut text = format!(
        "{} points, {} failed{}\n",
        rows.len(),
        failed,
        max_relative_delta.map_or(String::new(), |d| format!(", max |ΔS/S| vs analytic {}", sci(d)))
    );
    match &args.out {
        Some(path) => {
            let body = match args.format {
                Format::Csv => render_csv(&names, &rows),
                Format::Json => crate::json::render(&ctx.envelope(
                    "reconstruct",
                    status == Status::Pass,
                    json!({"rows": rows_json(&rows)}),
                )),
            };
            std::fs::write(path, body)
                .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
            summary["output"] = json!(path.display().to_string());
            let _ = writeln!(text, "written to {}", path.display());
        }
        None => {
            summary["rows"] = Value::Array(rows_json(&rows));
        }
    }
    let mut outcome = ctx.outcome("reconstruct", status, summary, text);
    if args.out.is_none() && args.format == Format::Csv {
        outcome.raw = Some(render_csv(&names, &rows));
    }
    Ok(outcome)
}

// ---- hessian ----

pub fn hessian(ctx: &Context, at: &str) -> Result<Outcome, CliError> {
    let x = ctx.admissible_point(at)?;
    if let Some(refused) = gate(ctx, "hessian")? {
        return Ok(refused);
    }
    let tol = &ctx.tolerances;
    let field = ctx.field();
    let h = entropy_hessian(&field, &x, tol.minor_band, tol.hessian_cross_check).map_err(analysis_error)?;
    let c = concavity_conditions(&field, &x, tol.minor_band, tol.hessian_cross_check)
        .map_err(analysis_error)?;
    let concave = h.concave && c.passed;

    let mut text = format!("D²S at {x}, S = {}\n", sci(h.entropy));
    for row in &h.hessian {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>14.6e}")).collect();
        let _ = writeln!(text, "  [{}]", cells.join(" "));
    }
    for m in &h.minors {
        let _ = writeln!(text, "minor {}: {} ({:?})", m.order, sci(m.value), m.sign);
    }
    let _ = writeln!(text, "determinant {}", sci(h.determinant));
    let eigenvalues: Vec<String> = h.eigenvalues.iter().map(|v| sci(*v)).collect();
    let _ = writeln!(text, "eigenvalues {}", eigenvalues.join(" "));
    if let (Some(a), Some(b)) = (c.heat_capacity_term, c.second_minor_term) {
        let _ = writeln!(text, "1 - ∂f/∂U = {} (must be < 0)", sci(a));
        let _ = writeln!(text, "second minor term = {} (must be > 0)", sci(b));
    }
    let _ = writeln!(text, "verdict: {}", if concave { "concave" } else { "not concave" });

    let result = json!({
        "verdict": if concave { "concave" } else { "not concave" },
        "hessian": to_value(&h),
        "concavity": to_value(&c),
    });
    let status = if concave { Status::Pass } else { Status::CheckFailed };
    Ok(ctx.outcome("hessian", status, result, text))
}

// ---- third law ----

pub fn third_law(ctx: &Context, ray: Option<&str>, epsilon: f64) -> Result<Outcome, CliError> {
    let start = match ray {
        Some(spec) => ctx.admissible_point(spec)?,
        None => ctx.model().reference().clone(),
    };
    if !(epsilon > 0.0) {
        return Err(CliError::Invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if let Some(refused) = gate(ctx, "third-law")? {
        return Ok(refused);
    }
    let field = ctx.field();
    let approach = approach_along_energy(&field, &start, epsilon).map_err(analysis_error)?;
    let r = third_law_classify(&field, &approach).map_err(analysis_error)?;

    let mut text = String::new();
    for s in &r.samples {
        let _ = writeln!(text, "B = {:.0e}  S^ = {}  S = {}", s.energy_above_ground, sci(s.hat_s), sci(s.entropy));
    }
    if let Some(z) = &r.interior_zero {
        let _ = writeln!(text, "f ≤ 0 at {z}");
    }
    if let Some(slope) = r.slope {
        let _ = writeln!(text, "slope dS^/dlnB = {}", sci(slope));
    }
    let _ = writeln!(text, "classification: {} ({})", r.classification.label(), r.reason);
    let status = if r.classification == ThirdLawClass::PlanckCompliant {
        Status::Pass
    } else {
        Status::CheckFailed
    };
    Ok(ctx.outcome("third-law", status, to_value(&r), text))
}

// ---- leaf ----

pub fn leaf(ctx: &Context, level: f64, params: &str) -> Result<Outcome, CliError> {
    if !(level > 0.0 && level.is_finite()) {
        return Err(CliError::Invalid(format!("--s-value must be positive, got {level}")));
    }
    let names = ctx.names();
    let values = parse_values(params, &names[1..])?;
    let mut coords = vec![0.0];
    coords.extend(values);
    let fiber = StatePoint::from(coords);
    if let Some(refused) = gate(ctx, "leaf")? {
        return Ok(refused);
    }
    let field = ctx.field();
    let sol = leaf_solve(&field, level, &fiber, ctx.tolerances.leaf).map_err(analysis_error)?;
    let text = format!(
        "B_c = {}\nstate {}\nresidual {}\n",
        format_float(sol.energy_above_ground),
        sol.point,
        sci(sol.residual)
    );
    let status = if sol.converged { Status::Pass } else { Status::NumericFailure };
    Ok(ctx.outcome("leaf", status, to_value(&sol), text))
}

// ---- gibbs-duhem ----

pub fn gibbs_duhem(ctx: &Context, from: &str, to: &str) -> Result<Outcome, CliError> {
    let a = ctx.admissible_point(from)?;
    let b = ctx.admissible_point(to)?;
    let model = ctx.model();
    let path = route(model, &a, &b, ctx.tolerances.quadrature_settings())
        .map_err(|d| CliError::Numeric(format!("no admissible path from {a} to {b}: {:?} at {}", d.kind, d.point)))?;
    match gibbs_duhem_reconstruct(model, &path, ctx.tolerances.exactness) {
        Ok(d) => {
            let text = format!(
                "Δlog(1/T) = {}\nT(to)/T(from) = {}\n",
                format_float(d.delta_log_inverse_t),
                format_float((-d.delta_log_inverse_t).exp())
            );
            let result = json!({
                "from": a,
                "to": b,
                "path": path.waypoints(),
                "delta_log_inverse_t": d.delta_log_inverse_t,
                "temperature_ratio": (-d.delta_log_inverse_t).exp(),
                "error_estimate": d.error_estimate,
                "reliable": d.reliable,
            });
            Ok(ctx.outcome("gibbs-duhem", Status::Pass, result, text))
        }
        Err(EntropyError::NotExact { point, residuals }) => {
            let mut text = format!("refused: the Gibbs-Duhem form is not exact at {point}\n");
            for r in &residuals {
                let _ = writeln!(
                    text,
                    "  {}{}: raw {} normalized {}",
                    r.coordinates[0],
                    r.coordinates[1],
                    sci(r.raw),
                    sci(r.normalized)
                );
            }
            let result = json!({
                "refused": "the Gibbs-Duhem form is not exact",
                "point": point,
                "residuals": to_value(&residuals),
            });
            Ok(ctx.outcome("gibbs-duhem", Status::CheckFailed, result, text))
        }
        Err(e) => Err(numeric(e)),
    }
}
