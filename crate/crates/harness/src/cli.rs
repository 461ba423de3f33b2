//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use chfsim_core::models::PathSimulator;
use chfsim_core::{
    estimate, EstimatorKind, Innovation, ModelFamily, ModelKind, ObjectiveConfig, SeedPlan,
    StreamPurpose, WeightFamily, WeightSpec,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{parse_list, ExperimentConfig};
use crate::diagnose::{chf_error_diagnostic, diagnostic_csv};
use crate::replicate::{run_replications, summary_csv, write_outputs};
use crate::{read_series, series_csv, HarnessError};

#[derive(Debug, Parser)]
#[command(name = "chfsim", version, about = "Characteristic-function matching estimators for stationary time series")]
struct Cli {
    /// Master seed for every random stream (default 0; for `replicate`, the
    /// config file's `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (`estimate`, `diagnose`, `simulate`) or directory (`replicate`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate parameters from a single-column CSV series; prints JSON.
    Estimate(EstimateArgs),
    /// Run a replication study described by a config file.
    Replicate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Tabulate chf approximation errors at weight-sampled points.
    Diagnose(DiagnoseArgs),
    /// Simulate a path of a model and write it as CSV.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct ObjectiveArgs {
    /// Block length.
    #[arg(long, default_value_t = 3)]
    p: usize,
    /// Number of simulated blocks.
    #[arg(long, default_value_t = 3000)]
    h: usize,
    #[arg(long, default_value = "laplace")]
    weight: WeightFamily,
    /// Variance threshold for the control-variate chf.
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    /// Integration points for the control-variate objective.
    #[arg(long, default_value_t = 2000)]
    m: usize,
    #[arg(long, default_value_t = 1e-6)]
    variance_floor: f64,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    /// ar1, arfima or poisson-ar.
    #[arg(long)]
    model: ModelKind,
    /// oracle, sim or cv.
    #[arg(long, default_value = "sim")]
    estimator: EstimatorKind,
    #[command(flatten)]
    objective: ObjectiveArgs,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    #[arg(long)]
    model: ModelKind,
    /// Comma-separated parameter values.
    #[arg(long, allow_hyphen_values = true)]
    theta: String,
    #[arg(long, default_value = "laplace")]
    weight: WeightFamily,
    #[arg(long, default_value_t = 3)]
    p: usize,
    /// Number of points t.
    #[arg(long, default_value_t = 500)]
    count: usize,
    /// Number of simulated blocks.
    #[arg(long, default_value_t = 3000)]
    h: usize,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    model: ModelKind,
    #[arg(long, default_value = "gaussian")]
    innovation: Innovation,
    /// Comma-separated parameter values.
    #[arg(long, allow_hyphen_values = true)]
    theta: String,
    /// Path length.
    #[arg(long)]
    n: usize,
}

#[derive(Debug, Serialize)]
struct EstimateJson<'a> {
    model: String,
    estimator: String,
    params: &'a [&'a str],
    theta_hat: &'a [f64],
    objective_value: f64,
    evaluations: usize,
    converged: bool,
    master_seed: u64,
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), HarnessError> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, text)?;
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), HarnessError> {
    let plan = SeedPlan::new(cli.seed.unwrap_or(0));
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Estimate(a) => {
            let series = read_series(&a.input)?;
            let o = &a.objective;
            if a.estimator == EstimatorKind::ControlVariates && o.weight == WeightFamily::Cauchy {
                writeln!(
                    stderr,
                    "warning: the heavy-tailed cauchy weight makes the control-variate objective high-variance; laplace is recommended"
                )?;
            }
            let model = ModelFamily::new(a.model, Innovation::Gaussian)?;
            let config = ObjectiveConfig {
                p: o.p,
                h: o.h,
                weight: WeightSpec::new(o.weight, o.p),
                k: o.k,
                m: o.m,
                seed_plan: plan,
                variance_floor: o.variance_floor,
                replication: 0,
            };
            let r = estimate(&series, &model, a.estimator, &config)?;
            let json = serde_json::to_string(&EstimateJson {
                model: model.kind.to_string(),
                estimator: a.estimator.to_string(),
                params: model.param_names(),
                theta_hat: r.theta_hat.values(),
                objective_value: r.objective_value,
                evaluations: r.evaluations,
                converged: r.converged,
                master_seed: r.master_seed,
            })
            .map_err(|e| HarnessError::Input(e.to_string()))?;
            writeln!(stdout, "{json}")?;
            if let Some(path) = out {
                emit(Some(path), &format!("{json}\n"), stdout)?;
            }
        }
        Command::Replicate { config } => {
            let text = std::fs::read_to_string(config)?;
            let mut exp = ExperimentConfig::parse(&text)?;
            if let Some(seed) = cli.seed {
                exp.master_seed = seed;
                exp.objective.seed_plan = SeedPlan::new(seed);
            }
            if exp.estimators.contains(&EstimatorKind::ControlVariates)
                && exp.objective.weight.family == WeightFamily::Cauchy
            {
                writeln!(
                    stderr,
                    "warning: the heavy-tailed cauchy weight makes the control-variate objective high-variance; laplace is recommended"
                )?;
            }
            let dir = out
                .map(Path::to_path_buf)
                .or_else(|| exp.out.clone())
                .ok_or_else(|| HarnessError::Config("no output directory: pass --out or set 'out'".into()))?;
            let summary = run_replications(&exp)?;
            write_outputs(&summary, &dir)?;
            stdout.write_all(summary_csv(&summary).as_bytes())?;
        }
        Command::Diagnose(a) => {
            let model = ModelFamily::new(a.model, Innovation::Gaussian)?;
            let theta = parse_list("theta", &a.theta)?;
            let weight = WeightSpec::new(a.weight, a.p);
            let mut stream = plan.stream_for(0, StreamPurpose::DiagnosticT, 0);
            let rows = chf_error_diagnostic(&model, &theta, &weight, a.count, a.h, &mut stream)?;
            emit(out, &diagnostic_csv(&rows), stdout)?;
        }
        Command::Simulate(a) => {
            let model = ModelFamily::new(a.model, a.innovation)?;
            let theta = parse_list("theta", &a.theta)?;
            let sim = PathSimulator::new(model, &theta, a.n)?;
            let series = sim.simulate(&mut plan.stream_for(0, StreamPurpose::Data, 0))?;
            emit(out, &series_csv(&series), stdout)?;
        }
    }
    Ok(())
}

/// Runs the CLI on `argv` (including the program name) and returns the exit
/// code: 0 on success, 1 on failure, 2 on usage errors.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return e.exit_code();
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => {
                // The pool runs the command on a worker thread; buffer its output.
                let (mut out, mut err) = (Vec::new(), Vec::new());
                let r = pool.install(|| execute(&cli, &mut out, &mut err));
                let _ = stdout.write_all(&out);
                let _ = stderr.write_all(&err);
                r
            }
            Err(e) => Err(HarnessError::Config(e.to_string())),
        },
        None => execute(&cli, stdout, stderr),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
