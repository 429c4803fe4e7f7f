//! Input parsing and output serialization. Inputs are JSON documents with
//! either explicit vertices or chart coordinates; outputs carry the frame
//! list with every float printed to 17 significant digits so that
//! re-parsing reproduces the run bit-for-bit.

use linkfold::chart::{arm_extract, cycle_extract, ArmChart, ChartState, CycleChart, LinkageKind};
use linkfold::geom::Point;
use serde::Deserialize;

/// Exit-code classification of a failure.
#[derive(Debug)]
pub enum CliError {
    /// Malformed input, invalid state, infeasible lengths: exit 1.
    Validation(String),
    /// A flow or search that did not converge within budget: exit 2.
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::NonConvergence(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::NonConvergence(m) => m,
        }
    }
}

pub fn classify(err: linkfold::Error) -> CliError {
    use linkfold::Error::*;
    match err {
        ConvergenceFailure(_) | Stalled { .. } | NoConnectionFound { .. } => {
            CliError::NonConvergence(err.to_string())
        }
        _ => CliError::Validation(err.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Linkage,
    Config,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Linkage => "linkage",
            Mode::Config => "config",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    pub kind: String,
    #[serde(default)]
    pub vertices: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub chart: Option<ChartSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    #[serde(default)]
    pub rho: Option<Vec<f64>>,
    #[serde(default)]
    pub lengths: Option<Vec<f64>>,
    pub theta: Vec<f64>,
}

/// A parsed input: the moduli-space kind implied by the document kind and
/// the requested mode, plus the chart state.
#[derive(Debug, Clone)]
pub struct ParsedInput {
    pub kind: LinkageKind,
    pub state: ChartState,
    pub seed: Option<u64>,
}

pub fn read_input(path: &str, mode: Mode) -> Result<ParsedInput, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {path}: {e}")))?;
    let doc: InputDocument = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{path}: {e}")))?;
    parse_document(&doc, mode).map_err(|e| CliError::Validation(format!("{path}: {e}")))
}

pub fn parse_document(doc: &InputDocument, mode: Mode) -> Result<ParsedInput, String> {
    if doc.vertices.is_some() == doc.chart.is_some() {
        return Err("exactly one of \"vertices\" or \"chart\" must be present".into());
    }
    let seed = doc.seed;
    match (doc.kind.as_str(), mode) {
        ("arm", _) => {
            let arm = match (&doc.vertices, &doc.chart) {
                (Some(vertices), None) => {
                    arm_extract(&to_points(vertices)).map_err(|e| e.to_string())?
                }
                (None, Some(chart)) => {
                    let rho = chart
                        .rho
                        .clone()
                        .ok_or("an arm chart needs field \"rho\"")?;
                    if chart.lengths.is_some() {
                        return Err("an arm chart takes \"rho\", not \"lengths\"".into());
                    }
                    ArmChart::new(rho, chart.theta.clone()).map_err(|e| e.to_string())?
                }
                _ => unreachable!(),
            };
            let kind = match mode {
                Mode::Linkage => LinkageKind::ArmLinkage,
                Mode::Config => LinkageKind::ArmConfig,
            };
            Ok(ParsedInput { kind, state: ChartState::Arm(arm), seed })
        }
        ("cycle", Mode::Linkage) => {
            let cycle = match (&doc.vertices, &doc.chart) {
                (Some(vertices), None) => {
                    cycle_extract(&to_points(vertices)).map_err(|e| e.to_string())?
                }
                (None, Some(chart)) => {
                    let lengths = chart
                        .lengths
                        .clone()
                        .ok_or("a cycle chart needs field \"lengths\"")?;
                    if chart.rho.is_some() {
                        return Err("a cycle chart takes \"lengths\", not \"rho\"".into());
                    }
                    CycleChart::new(lengths, chart.theta.clone()).map_err(|e| e.to_string())?
                }
                _ => unreachable!(),
            };
            Ok(ParsedInput {
                kind: LinkageKind::CycleLinkage,
                state: ChartState::Cycle(cycle),
                seed,
            })
        }
        ("cycle", Mode::Config) => {
            let arm = match (&doc.vertices, &doc.chart) {
                (Some(vertices), None) => {
                    arm_extract(&to_points(vertices)).map_err(|e| e.to_string())?
                }
                (None, Some(chart)) => {
                    let lengths = chart
                        .lengths
                        .clone()
                        .ok_or("a cycle chart needs field \"lengths\"")?;
                    let m = lengths.len();
                    let arm = ArmChart::new(lengths[..m - 1].to_vec(), chart.theta.clone())
                        .map_err(|e| e.to_string())?;
                    let derived = linkfold::chart::closing_length(&arm);
                    if (derived - lengths[m - 1]).abs() > 1e-6 * lengths[m - 1] {
                        return Err(format!(
                            "closing length {} inconsistent with the chart (derived {derived})",
                            lengths[m - 1]
                        ));
                    }
                    arm
                }
                _ => unreachable!(),
            };
            Ok(ParsedInput {
                kind: LinkageKind::CycleConfig,
                state: ChartState::Arm(arm),
                seed,
            })
        }
        (other, _) => Err(format!("unknown kind {other:?}; expected \"arm\" or \"cycle\"")),
    }
}

fn to_points(vertices: &[[f64; 2]]) -> Vec<Point> {
    vertices.iter().map(|v| Point::new(v[0], v[1])).collect()
}

/// One output frame.
pub struct Frame {
    pub t: f64,
    pub vertices: Vec<Point>,
    pub f: f64,
}

/// The run result serialized to standard output.
pub struct OutputDocument {
    pub kind: &'static str,
    pub mode: Mode,
    pub frames: Vec<Frame>,
    pub termination: String,
    /// Fixed-order key/value metadata (tolerances, options, version).
    pub metadata: Vec<(String, MetaValue)>,
}

pub enum MetaValue {
    Float(f64),
    Int(u64),
    Text(String),
}

/// 17 significant digits; round-trips any finite f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_output(doc: &OutputDocument) -> String {
    let mut out = String::with_capacity(4096);
    out.push_str("{\n");
    out.push_str(&format!("  \"kind\": \"{}\",\n", doc.kind));
    out.push_str(&format!("  \"mode\": \"{}\",\n", doc.mode.as_str()));
    out.push_str("  \"frames\": [\n");
    for (i, frame) in doc.frames.iter().enumerate() {
        out.push_str("    {\"t\": ");
        out.push_str(&fmt_float(frame.t));
        out.push_str(", \"vertices\": [");
        for (j, v) in frame.vertices.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            out.push_str(&format!("[{}, {}]", fmt_float(v.x), fmt_float(v.y)));
        }
        out.push_str("], \"f\": ");
        out.push_str(&fmt_float(frame.f));
        out.push('}');
        if i + 1 < doc.frames.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ],\n");
    out.push_str(&format!("  \"termination\": \"{}\",\n", doc.termination));
    out.push_str("  \"metadata\": {");
    for (i, (key, value)) in doc.metadata.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("\n    ");
        out.push_str(&format!("\"{key}\": "));
        match value {
            MetaValue::Float(x) => out.push_str(&fmt_float(*x)),
            MetaValue::Int(n) => out.push_str(&n.to_string()),
            MetaValue::Text(s) => out.push_str(&format!("\"{s}\"")),
        }
    }
    out.push_str("\n  }\n}\n");
    out
}
