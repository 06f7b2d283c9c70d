//! Results files and run manifests.
//!
//! Sweeps are written as CSV, equilibrium reports and Nash checks as JSON.
//! Every results file carries the SHA-256 of its run manifest; numbers are
//! rounded to nine significant digits so outputs are byte-stable.

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::alignment::{AlignmentEstimate, Estimator};
use crate::config::ExperimentConfig;
use crate::equilibria::{EquilibriumError, EquilibriumReport, Tolerance};
use crate::ipd::{AgentId, JointAction, PayoffMatrix};
use crate::values::ValueId;

pub const MANIFEST_HASH_KEY: &str = "manifest_sha256";

#[derive(Debug, Error, PartialEq)]
pub enum CompareError {
    #[error("results file has no manifest hash")]
    MissingManifest,
    #[error("manifest mismatch: {0} vs {1}")]
    ManifestMismatch(String, String),
}

/// Rounds to nine significant digits. Negative zero becomes zero.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{x:.8e}").parse().expect("float round trip");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn fmt_num(x: f64) -> String {
    round_sig(x).to_string()
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: String,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig) -> Self {
        let version = match option_env!("VALIGN_GIT_DESCRIBE") {
            Some(g) => format!("{}+{g}", env!("CARGO_PKG_VERSION")),
            None => env!("CARGO_PKG_VERSION").to_string(),
        };
        Self {
            tool: "valign",
            version,
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

fn csv_header(hash: &str, first: &str, second: &str) -> String {
    format!(
        "# {MANIFEST_HASH_KEY}={hash}\n{first},{second},agent,value,mean,std_error,n_paths,path_length\n"
    )
}

fn csv_row(out: &mut String, first: &str, second: &str, agent: AgentId, value: ValueId, e: &AlignmentEstimate) {
    out.push_str(&format!(
        "{first},{second},{agent},{value},{},{},{},{}\n",
        fmt_num(e.mean),
        fmt_num(e.std_error),
        e.num_paths,
        e.path_length
    ));
}

/// One block of rows per `(agent, value, matrix)`; matrices are indexed
/// `[row option][column option]`.
pub struct SweepBlock<'a> {
    pub agent: AgentId,
    pub value: ValueId,
    pub matrix: &'a [Vec<AlignmentEstimate>],
}

pub fn sweep_csv(
    hash: &str,
    row_header: &str,
    col_header: &str,
    row_labels: &[String],
    col_labels: &[String],
    blocks: &[SweepBlock<'_>],
) -> String {
    let mut out = csv_header(hash, row_header, col_header);
    for b in blocks {
        for (r, row) in b.matrix.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                csv_row(&mut out, &row_labels[r], &col_labels[c], b.agent, b.value, e);
            }
        }
    }
    out
}

pub fn align_csv(
    hash: &str,
    alpha: &str,
    beta: &str,
    rows: &[(AgentId, ValueId, AlignmentEstimate)],
) -> String {
    let mut out = csv_header(hash, "alpha_strategy", "beta_strategy");
    for (agent, value, e) in rows {
        csv_row(&mut out, alpha, beta, *agent, *value, e);
    }
    out
}

fn estimate_json(e: &AlignmentEstimate) -> Value {
    json!({
        "mean": round_sig(e.mean),
        "std_error": round_sig(e.std_error),
    })
}

fn tolerance_json(t: &Tolerance) -> Value {
    match t {
        Tolerance::Fixed(v) => json!({ "rule": "fixed", "value": round_sig(*v) }),
        Tolerance::StdErrors(k) => json!({ "rule": "std_errors", "value": round_sig(*k) }),
    }
}

pub fn report_json(hash: &str, report: &EquilibriumReport) -> Result<String, EquilibriumError> {
    let space = &report.space;
    let name = |id| {
        let (a, b) = space.specs(id);
        (a.to_string(), b.to_string())
    };
    let mut equilibria = Vec::new();
    for &id in &report.equilibria {
        let (a, b) = name(id);
        let equivalent: Vec<String> = report
            .behaviorally_equivalent(id)?
            .into_iter()
            .map(|o| space.label(o))
            .collect();
        equilibria.push(json!({
            "alpha": a,
            "beta": b,
            "pareto_optimal": report.is_pareto_optimal(id),
            "behaviorally_equivalent_to": equivalent,
        }));
    }
    let pareto: Vec<Value> = report
        .pareto_optimal
        .iter()
        .map(|&id| {
            let (a, b) = name(id);
            json!({ "alpha": a, "beta": b })
        })
        .collect();
    let table: Vec<Value> = report
        .table
        .iter()
        .map(|(&id, cell)| {
            let (a, b) = name(id);
            json!({
                "alpha": a,
                "beta": b,
                "alpha_alignment": estimate_json(&cell.alpha),
                "beta_alignment": estimate_json(&cell.beta),
            })
        })
        .collect();
    let (estimator, num_paths) = match report.params.estimator {
        Estimator::Exact => ("exact", Value::Null),
        Estimator::MonteCarlo { num_paths, .. } => ("monte_carlo", json!(num_paths)),
    };
    let doc = json!({
        MANIFEST_HASH_KEY: hash,
        "space": space.kind.to_string(),
        "value_alpha": report.assignment.value_alpha,
        "value_beta": report.assignment.value_beta,
        "estimator": estimator,
        "path_length": report.params.path_length,
        "num_paths": num_paths,
        "tolerance": tolerance_json(&report.tolerance),
        "equilibria": equilibria,
        "pareto_optimal": pareto,
        "alignment_table": table,
    });
    Ok(pretty(&doc))
}

pub fn nash_json(hash: &str, matrix: &PayoffMatrix, nash: &[JointAction], pareto: &[JointAction]) -> String {
    let names = |v: &[JointAction]| v.iter().map(|a| a.to_string()).collect::<Vec<_>>();
    let dominated_by: serde_json::Map<String, Value> = nash
        .iter()
        .map(|n| {
            let by: Vec<String> = JointAction::ALL
                .iter()
                .filter(|&&a| crate::equilibria::stage_pareto_dominates(matrix, a, *n))
                .map(|a| a.to_string())
                .collect();
            (n.to_string(), json!(by))
        })
        .collect();
    pretty(&json!({
        MANIFEST_HASH_KEY: hash,
        "payoff_matrix": matrix,
        "nash_equilibria": names(nash),
        "stage_pareto_optimal": names(pareto),
        "nash_pareto_dominated_by": dominated_by,
    }))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

/// Manifest hash embedded in a CSV or JSON results file.
pub fn embedded_hash(results: &str) -> Option<String> {
    let prefix = format!("# {MANIFEST_HASH_KEY}=");
    if let Some(rest) = results.lines().next().and_then(|l| l.strip_prefix(&prefix)) {
        return Some(rest.trim().to_string());
    }
    serde_json::from_str::<Value>(results)
        .ok()?
        .get(MANIFEST_HASH_KEY)?
        .as_str()
        .map(str::to_string)
}

/// Compares two results files, refusing when their manifests differ.
pub fn compare_results(a: &str, b: &str) -> Result<bool, CompareError> {
    let ha = embedded_hash(a).ok_or(CompareError::MissingManifest)?;
    let hb = embedded_hash(b).ok_or(CompareError::MissingManifest)?;
    if ha != hb {
        return Err(CompareError::ManifestMismatch(ha, hb));
    }
    Ok(a == b)
}
