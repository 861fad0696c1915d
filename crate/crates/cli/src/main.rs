use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sphere_dubins::control::{ControlPiece, ControlSchedule};
use sphere_dubins::error::SphereError;
use sphere_dubins::io::{
    chart_rows_from_frames, write_chart_trace, write_frame_trace, IntegrateRequest, PlanRequest,
    PlanResponse,
};
use sphere_dubins::planner::{candidate_segments, plan_between, SolverConfig};
use sphere_dubins::sabban::{integrate_frame_with, sample_trace, Segment};
use sphere_dubins::spherical::{integrate_with, spherical_control, to_rotation, SphericalParams};
use sphere_dubins::suites::{run_suite, Suite};

const EXIT_VERIFY: u8 = 1;
const EXIT_SCHEMA: u8 = 2;
const EXIT_NO_SOLUTION: u8 = 3;
const EXIT_OUT_OF_DOMAIN: u8 = 4;

#[derive(Parser)]
#[command(name = "sphere-dubins", version, about = "Curvature-constrained shortest paths on the unit sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shortest path between two configurations.
    Plan {
        /// Plan request JSON.
        #[arg(long)]
        input: PathBuf,
        /// Directory for plan.json and traces.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the sampled path in frame and chart form.
        #[arg(long)]
        trace: bool,
        /// Arc-length spacing of trace samples.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Plan even when the tight radius lies outside the proven domain.
        #[arg(long)]
        allow_out_of_domain: bool,
    },
    /// Integrates one model under a piecewise-constant control.
    Integrate {
        #[arg(long, value_enum)]
        model: Model,
        /// Integrate request JSON.
        #[arg(long)]
        input: PathBuf,
        /// Directory for the trace CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Runs a verification suite and reports pass/fail counts.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Replaces every check's tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Directory for the report JSON; stdout only when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Sabban,
    Spherical,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: SphereError| e.to_string())
}

enum Failure {
    Schema(String),
    NoSolution(String),
    OutOfDomain(String),
    Verify,
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.into())
    }
}

fn schema<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Schema(e.to_string())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Schema(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Schema(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure::Other(e.into()))?;
    s.push('\n');
    Ok(s)
}

fn create_file(dir: &Path, name: &str) -> Result<fs::File, Failure> {
    fs::create_dir_all(dir)?;
    Ok(fs::File::create(dir.join(name))?)
}

fn core(e: SphereError) -> Failure {
    Failure::Other(e.into())
}

fn cmd_plan(
    input: &Path,
    out: Option<&Path>,
    trace: bool,
    step: f64,
    allow_out_of_domain: bool,
) -> Result<(), Failure> {
    let req: PlanRequest = read_json(input)?;
    let params = req.params().map_err(schema)?;
    let start = req.start.to_rotation().map_err(schema)?;
    let goal = req.goal.to_rotation().map_err(schema)?;
    if !(step > 0.0) {
        return Err(Failure::Schema(format!("step must be positive, got {step}")));
    }
    let cfg = SolverConfig {
        allow_out_of_domain: allow_out_of_domain || req.allow_out_of_domain,
        ..SolverConfig::default()
    };
    let result = match plan_between(&start, &goal, &params, &cfg) {
        Ok(r) => r,
        Err(e @ SphereError::OutOfDomain { .. }) => return Err(Failure::OutOfDomain(e.to_string())),
        Err(e @ SphereError::NoSolution(_)) => return Err(Failure::NoSolution(e.to_string())),
        Err(e) => return Err(core(e)),
    };
    if result.out_of_domain {
        eprintln!(
            "warning: tight radius {} is outside the proven domain; the candidate family may not contain the optimum",
            params.radius()
        );
    }
    let text = to_json(&PlanResponse::from(&result))?;
    print!("{text}");
    if let Some(dir) = out {
        create_file(dir, "plan.json")?.write_all(text.as_bytes())?;
    }
    if trace {
        let dir = out.unwrap_or(Path::new("."));
        let segments: Vec<Segment<f64>> = candidate_segments(&result.best)
            .into_iter()
            .map(|(kind, length)| Segment { kind, length })
            .collect();
        let samples = sample_trace(&start, &segments, &params, step).map_err(core)?;
        let frames: Vec<_> = samples.iter().map(|t| (t.s, t.frame, t.u)).collect();
        write_frame_trace(create_file(dir, "plan_frame.csv")?, &frames).map_err(core)?;
        let sp = SphericalParams::from_sabban(&params);
        let chart: Vec<_> = chart_rows_from_frames(&frames)
            .into_iter()
            .map(|(s, c, kappa)| (s, c, spherical_control(kappa, &sp)))
            .collect();
        write_chart_trace(create_file(dir, "plan_chart.csv")?, &chart).map_err(core)?;
    }
    Ok(())
}

fn cmd_integrate(model: Model, input: &Path, out: Option<&Path>, step: f64) -> Result<(), Failure> {
    let req: IntegrateRequest = read_json(input)?;
    let eta = req
        .config
        .eta
        .ok_or_else(|| Failure::Schema("config.eta is required".into()))?;
    let p = SphericalParams::new(eta).map_err(schema)?;
    let c0 = req.config.to_config().map_err(schema)?;
    if !(step > 0.0) {
        return Err(Failure::Schema(format!("step must be positive, got {step}")));
    }
    let bound = match model {
        Model::Sabban => p.u_max(),
        Model::Spherical => 1.0,
    };
    if let Some(piece) = req.control.iter().find(|q| q.u.abs() > bound * (1.0 + 1e-12)) {
        return Err(Failure::Schema(format!("control {} exceeds the bound {bound}", piece.u)));
    }
    let control = ControlSchedule::new(
        req.control
            .iter()
            .map(|q| ControlPiece { u: q.u, length: q.length })
            .collect(),
    )
    .map_err(schema)?;
    control.clipped(req.s_end).map_err(schema)?;
    let mut buf = Vec::new();
    let name = match model {
        Model::Sabban => {
            let g0 = to_rotation(&c0).map_err(schema)?;
            let mut rows = Vec::new();
            integrate_frame_with(&g0, &control, req.s_end, step, |s, g, u| rows.push((s, *g, u))).map_err(core)?;
            write_frame_trace(&mut buf, &rows).map_err(core)?;
            "trace_sabban.csv"
        }
        Model::Spherical => {
            let mut rows = Vec::new();
            integrate_with(&c0, &control, &p, req.s_end, step, |s, c, u| rows.push((s, *c, u))).map_err(core)?;
            write_chart_trace(&mut buf, &rows).map_err(core)?;
            "trace_spherical.csv"
        }
    };
    match out {
        Some(dir) => create_file(dir, name)?.write_all(&buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}

fn cmd_verify(suite: Suite, seed: u64, tolerance: Option<f64>, out: Option<&Path>) -> Result<(), Failure> {
    if let Some(t) = tolerance {
        if !(t >= 0.0) {
            return Err(Failure::Schema(format!("tolerance must be nonnegative, got {t}")));
        }
    }
    let report = run_suite(suite, seed, tolerance).map_err(core)?;
    let text = to_json(&report)?;
    print!("{text}");
    if let Some(dir) = out {
        create_file(dir, &format!("report_{suite}.json"))?.write_all(text.as_bytes())?;
    }
    eprintln!("{suite}: {} passed, {} failed", report.passed, report.failed);
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan {
            input,
            out,
            trace,
            step,
            allow_out_of_domain,
        } => cmd_plan(input, out.as_deref(), *trace, *step, *allow_out_of_domain),
        Command::Integrate { model, input, out, step } => cmd_integrate(*model, input, out.as_deref(), *step),
        Command::Verify {
            suite,
            seed,
            tolerance,
            out,
        } => cmd_verify(*suite, *seed, *tolerance, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Schema(msg)) => {
            eprintln!("error: invalid input: {msg}");
            ExitCode::from(EXIT_SCHEMA)
        }
        Err(Failure::NoSolution(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NO_SOLUTION)
        }
        Err(Failure::OutOfDomain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_OUT_OF_DOMAIN)
        }
        Err(Failure::Verify) => ExitCode::from(EXIT_VERIFY),
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
