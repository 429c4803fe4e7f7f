//! Command-line driver: straighten and convexify linkages, refold state
//! pairs, project onto the straight or cocircular strata, and run the
//! property suite. Standard output carries exactly one JSON document; the
//! LINKFOLD_LOG environment variable (off | info | debug) adds diagnostics
//! on standard error.

mod io;
mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use io::{classify, fmt_float, CliError, Frame, MetaValue, Mode, OutputDocument, ParsedInput};
use linkfold::chart::{embedded_vertices, ChartState, LinkageKind};
use linkfold::energy::{lr_function, project_cocircular, project_straight, ScalarField};
use linkfold::flow::{gradient_flow, projected_flow, FlowOptions, Termination, Trajectory};
use linkfold::geom::cocircular_polygon;
use linkfold::refold::{refold, RefoldOptions};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "linkfold", version, about = "Deform self-avoiding polygonal linkages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Flow an arm toward the straight configuration.
    Straighten {
        input: String,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Flow a cycle toward the convex (cocircular) configuration.
    Convexify {
        input: String,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Connect two same-kind states by the renormalization refolding.
    Refold {
        input0: String,
        input1: String,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long = "max-iter", default_value_t = 400)]
        max_iter: usize,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Emit the straight or cocircular projection of a state.
    Project {
        which: Projection,
        input: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Linkage)]
        mode: ModeArg,
    },
    /// Run the seeded property suite and report pass/fail counts.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Projection {
    Straight,
    Cocircular,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum ModeArg {
    Linkage,
    Config,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Linkage => Mode::Linkage,
            ModeArg::Config => Mode::Config,
        }
    }
}

#[derive(Args)]
struct FlowArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Linkage)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[arg(long = "grad-tol", default_value_t = 1e-6)]
    grad_tol: f64,
    #[arg(long = "t-max", default_value_t = 1e4)]
    t_max: f64,
    /// Store every k-th accepted frame.
    #[arg(long = "frames", default_value_t = 1)]
    frames: usize,
    /// Write one SVG per stored frame into this directory.
    #[arg(long = "svg")]
    svg_dir: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

impl FlowArgs {
    fn options(&self) -> FlowOptions {
        FlowOptions {
            step: self.step,
            grad_tol: self.grad_tol,
            t_max: self.t_max,
            frame_stride: self.frames.max(1),
            ..FlowOptions::default()
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd)]
enum LogLevel {
    Off,
    Info,
    Debug,
}

fn log_level() -> LogLevel {
    match std::env::var("LINKFOLD_LOG").as_deref() {
        Ok("info") => LogLevel::Info,
        Ok("debug") => LogLevel::Debug,
        _ => LogLevel::Off,
    }
}

fn log(level: LogLevel, msg: &str) {
    if log_level() >= level {
        eprintln!("linkfold: {msg}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("linkfold: error: {}", err.message());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Straighten { input, flow } => {
            let parsed = io::read_input(&input, flow.mode.into())?;
            if !matches!(parsed.kind, LinkageKind::ArmLinkage | LinkageKind::ArmConfig) {
                return Err(CliError::Validation(
                    "straighten needs an \"arm\" input".into(),
                ));
            }
            run_flow("straighten", parsed, flow)
        }
        Command::Convexify { input, flow } => {
            let parsed = io::read_input(&input, flow.mode.into())?;
            if !matches!(parsed.kind, LinkageKind::CycleLinkage | LinkageKind::CycleConfig) {
                return Err(CliError::Validation(
                    "convexify needs a \"cycle\" input".into(),
                ));
            }
            run_flow("convexify", parsed, flow)
        }
        Command::Refold { input0, input1, delta, samples, max_iter, flow } => {
            run_refold(&input0, &input1, delta, samples, max_iter, flow)
        }
        Command::Project { which, input, mode } => run_project(which, &input, mode.into()),
        Command::Verify { seed } => run_verify(seed),
    }
}

fn check_valid(kind: LinkageKind, state: &ChartState) -> Result<(), CliError> {
    let report = linkfold::chart::validate(kind, state);
    if report.is_valid() {
        return Ok(());
    }
    let reason = if !report.simple {
        "not self-avoiding"
    } else if report.positively_oriented == Some(false) {
        "not positively oriented"
    } else if report.c1_satisfied == Some(false) {
        "infeasible lengths"
    } else {
        "invalid state"
    };
    Err(CliError::Validation(reason.into()))
}

fn run_flow(command: &str, parsed: ParsedInput, flow: FlowArgs) -> Result<ExitCode, CliError> {
    check_valid(parsed.kind, &parsed.state)?;
    let field = lr_function(parsed.kind);
    let opts = flow.options();
    log(LogLevel::Info, &format!("{command}: kind {}", parsed.kind.as_str()));

    let trajectory: Trajectory = match parsed.kind {
        LinkageKind::CycleLinkage => {
            let cycle = parsed.state.as_cycle().map_err(classify)?;
            projected_flow(&field, cycle, &opts).map_err(classify)?
        }
        _ => gradient_flow(&field, &parsed.state, &opts).map_err(classify)?,
    };
    log(
        LogLevel::Debug,
        &format!(
            "{} frames stored, termination {:?}",
            trajectory.frames.len(),
            trajectory.termination
        ),
    );

    let closed = parsed.kind.is_cycle();
    let mut frames = Vec::with_capacity(trajectory.frames.len());
    for (i, state) in trajectory.frames.iter().enumerate() {
        frames.push(Frame {
            t: trajectory.times[i],
            vertices: embedded_vertices(parsed.kind, state).map_err(classify)?,
            f: trajectory.f_values[i],
        });
    }
    let termination = match trajectory.termination {
        Termination::Converged => "converged",
        Termination::TMaxReached => "t_max_reached",
        Termination::GuardTripped => "guard_tripped",
    };
    let mode = match parsed.kind {
        LinkageKind::ArmLinkage | LinkageKind::CycleLinkage => Mode::Linkage,
        _ => Mode::Config,
    };
    let doc = OutputDocument {
        kind: if closed { "cycle" } else { "arm" },
        mode,
        frames,
        termination: termination.into(),
        metadata: flow_metadata(command, &flow, parsed.seed),
    };
    print!("{}", io::write_output(&doc));
    if let Some(dir) = &flow.svg_dir {
        write_svgs(dir, &doc, closed)?;
    }
    if trajectory.termination == Termination::Converged {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(2))
    }
}

fn flow_metadata(command: &str, flow: &FlowArgs, seed: Option<u64>) -> Vec<(String, MetaValue)> {
    let mut meta = vec![
        ("command".into(), MetaValue::Text(command.into())),
        ("version".into(), MetaValue::Text(env!("CARGO_PKG_VERSION").into())),
        ("step".into(), MetaValue::Float(flow.step)),
        ("grad_tol".into(), MetaValue::Float(flow.grad_tol)),
        ("t_max".into(), MetaValue::Float(flow.t_max)),
        ("frame_stride".into(), MetaValue::Int(flow.frames.max(1) as u64)),
        ("constraint_tol".into(), MetaValue::Float(FlowOptions::default().constraint_tol)),
    ];
    if let Some(seed) = seed {
        meta.push(("seed".into(), MetaValue::Int(seed)));
    }
    meta
}

fn run_refold(
    input0: &str,
    input1: &str,
    delta: f64,
    samples: usize,
    max_iter: usize,
    flow: FlowArgs,
) -> Result<ExitCode, CliError> {
    let p0 = io::read_input(input0, flow.mode.into())?;
    let p1 = io::read_input(input1, flow.mode.into())?;
    if p0.kind != p1.kind {
        return Err(CliError::Validation("refold inputs must share a kind".into()));
    }
    check_valid(p0.kind, &p0.state)?;
    check_valid(p1.kind, &p1.state)?;
    let opts = RefoldOptions { delta, samples, max_iter, flow_opts: flow.options() };
    let motion = refold(p0.kind, &p0.state, &p1.state, &opts).map_err(classify)?;
    log(LogLevel::Info, &format!("refold: connected after {} increments", motion.n0));

    let field = lr_function(p0.kind);
    let mut frames = Vec::with_capacity(motion.frames.len());
    for (i, state) in motion.frames.iter().enumerate() {
        frames.push(Frame {
            t: i as f64,
            vertices: embedded_vertices(p0.kind, state).map_err(classify)?,
            f: field.value(state).map_err(classify)?,
        });
    }
    let closed = p0.kind.is_cycle();
    let mut metadata = flow_metadata("refold", &flow, p0.seed.or(p1.seed));
    metadata.push(("delta".into(), MetaValue::Float(delta)));
    metadata.push(("samples".into(), MetaValue::Int(samples as u64)));
    metadata.push(("n0".into(), MetaValue::Int(motion.n0 as u64)));
    let doc = OutputDocument {
        kind: if closed { "cycle" } else { "arm" },
        mode: flow.mode.into(),
        frames,
        termination: "connected".into(),
        metadata,
    };
    print!("{}", io::write_output(&doc));
    if let Some(dir) = &flow.svg_dir {
        write_svgs(dir, &doc, closed)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_project(which: Projection, input: &str, mode: Mode) -> Result<ExitCode, CliError> {
    match which {
        Projection::Straight => {
            let parsed = io::read_input(input, mode)?;
            let arm = parsed
                .state
                .as_arm()
                .map_err(|_| CliError::Validation("straight projection needs an arm".into()))?;
            let projected = ChartState::Arm(project_straight(arm));
            let field = lr_function(LinkageKind::ArmConfig);
            let doc = OutputDocument {
                kind: "arm",
                mode,
                frames: vec![Frame {
                    t: 0.0,
                    vertices: embedded_vertices(LinkageKind::ArmConfig, &projected)
                        .map_err(classify)?,
                    f: field.value(&projected).map_err(classify)?,
                }],
                termination: "projected".into(),
                metadata: vec![
                    ("command".into(), MetaValue::Text("project_straight".into())),
                    ("version".into(), MetaValue::Text(env!("CARGO_PKG_VERSION").into())),
                ],
            };
            print!("{}", io::write_output(&doc));
            Ok(ExitCode::SUCCESS)
        }
        Projection::Cocircular => {
            let parsed = io::read_input(input, mode)?;
            if !parsed.kind.is_cycle() {
                return Err(CliError::Validation(
                    "cocircular projection needs a \"cycle\" input".into(),
                ));
            }
            check_valid(parsed.kind, &parsed.state)?;
            let projected = project_cocircular(parsed.kind, &parsed.state).map_err(classify)?;
            let lengths = side_lengths(parsed.kind, &parsed.state)?;
            let sol = cocircular_polygon(&lengths).map_err(classify)?;
            let field = lr_function(parsed.kind);
            let doc = OutputDocument {
                kind: "cycle",
                mode,
                frames: vec![Frame {
                    t: 0.0,
                    vertices: embedded_vertices(parsed.kind, &projected).map_err(classify)?,
                    f: field.value(&projected).map_err(classify)?,
                }],
                termination: "projected".into(),
                metadata: vec![
                    ("command".into(), MetaValue::Text("project_cocircular".into())),
                    ("version".into(), MetaValue::Text(env!("CARGO_PKG_VERSION").into())),
                    ("circumradius".into(), MetaValue::Float(sol.radius)),
                    ("area".into(), MetaValue::Float(sol.area())),
                ],
            };
            print!("{}", io::write_output(&doc));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn side_lengths(kind: LinkageKind, state: &ChartState) -> Result<Vec<f64>, CliError> {
    match (kind, state) {
        (LinkageKind::CycleLinkage, ChartState::Cycle(c)) => Ok(c.lengths.clone()),
        (LinkageKind::CycleConfig, ChartState::Arm(a)) => {
            let mut lengths = a.rho.clone();
            lengths.push(linkfold::chart::closing_length(a));
            Ok(lengths)
        }
        _ => Err(CliError::Validation("expected a cycle state".into())),
    }
}

fn run_verify(seed: u64) -> Result<ExitCode, CliError> {
    let report = linkfold::verify::run_suite(seed).map_err(classify)?;
    let mut out = String::with_capacity(2048);
    out.push_str("{\n");
    out.push_str(&format!("  \"seed\": {},\n", report.seed));
    out.push_str(&format!("  \"passed\": {},\n", report.passed()));
    out.push_str(&format!("  \"total_cases\": {},\n", report.total_cases()));
    out.push_str(&format!("  \"total_failures\": {},\n", report.total_failures()));
    out.push_str("  \"checks\": [\n");
    for (i, check) in report.checks.iter().enumerate() {
        out.push_str(&format!(
            "    {{\"name\": \"{}\", \"cases\": {}, \"failures\": {}, \"worst\": {}}}{}\n",
            check.name,
            check.cases,
            check.failures,
            fmt_float(check.worst),
            if i + 1 < report.checks.len() { "," } else { "" }
        ));
    }
    out.push_str("  ]\n}\n");
    print!("{out}");
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn write_svgs(dir: &str, doc: &OutputDocument, closed: bool) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Validation(format!("cannot create {dir}: {e}")))?;
    let frames: Vec<Vec<linkfold::geom::Point>> =
        doc.frames.iter().map(|f| f.vertices.clone()).collect();
    let opts = svg::SvgOptions { closed, ..Default::default() };
    let docs = svg::render_svg(&frames, &opts);
    let count = docs.len();
    for (i, text) in docs.into_iter().enumerate() {
        let path = format!("{dir}/frame_{i:04}.svg");
        std::fs::write(&path, text)
            .map_err(|e| CliError::Validation(format!("cannot write {path}: {e}")))?;
    }
    log(LogLevel::Info, &format!("wrote {count} SVG frames to {dir}"));
    Ok(())
}
