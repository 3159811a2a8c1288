//! Command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | internal error |
//! | 2 | invalid configuration or arguments |
//! | 3 | I/O failure |
//! | 4 | dataset schema mismatch |
//! | 5 | filter divergence or numerical breakdown |
//! | 6 | Jacobian validation above threshold |

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Error;
use crate::estimator::DualEkf;
use crate::io;
use crate::jacobians::validation::{self, Fault};
use crate::simulator::{
    generate_dataset, run_estimator, run_workflow, score_estimates, MetricsSummary,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_SCHEMA: i32 = 4;
pub const EXIT_DIVERGENCE: i32 = 5;
pub const EXIT_THRESHOLD: i32 = 6;

#[derive(Debug, Parser)]
#[command(
    name = "shape-dekf",
    version,
    about = "Planar continuum-segment shape estimation with a dual EKF"
)]
pub struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file (simulate, estimate) or directory (report).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Overrides `sim.seed`.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Suppress summaries on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a noisy dataset CSV from perturbed parameters.
    Simulate,
    /// Run the dual EKF over a dataset CSV and write the estimates CSV.
    Estimate {
        /// Dataset CSV as written by `simulate`.
        #[arg(long, value_name = "PATH")]
        dataset: PathBuf,
        /// Metrics JSON path; `output.metrics` from the config when omitted.
        #[arg(long, value_name = "PATH")]
        metrics: Option<PathBuf>,
    },
    /// Compare analytic Jacobians with finite differences at random points.
    ValidateJacobians {
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        /// Corrupt the analytic position rows (negative control).
        #[arg(long, hide = true)]
        flip_sign: bool,
    },
    /// Simulate, estimate and score in one run, writing all artifacts.
    Report,
}

/// Map a library error to its exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_)
        | Error::InvalidQuadrature(_)
        | Error::InvalidParams(_)
        | Error::OutOfDomain { .. } => EXIT_CONFIG,
        Error::NotPositiveSemiDefinite { .. } => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        Error::Schema { .. } | Error::LengthMismatch { .. } => EXIT_SCHEMA,
        Error::Divergence { .. }
        | Error::SingularInnovation { .. }
        | Error::DegenerateHomotopy { .. }
        | Error::ZeroInputDenominator => EXIT_DIVERGENCE,
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Error::Io(e).into()
}

/// Parse `args` and run the command, writing normal output to `stdout` and
/// diagnostics to `stderr`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    Ok(cfg.with_seed(cli.seed))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure {
        code: EXIT_INTERNAL,
        message: e.to_string(),
    })?;
    std::fs::write(path, text + "\n").map_err(io_failure)
}

#[derive(Serialize)]
struct EstimateMetrics<'a> {
    dataset: String,
    ticks: usize,
    summary: &'a MetricsSummary,
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = load_config(cli)?;
    let say = |out: &mut dyn Write, text: String| -> Result<(), Failure> {
        if !cli.quiet {
            out.write_all(text.as_bytes()).map_err(io_failure)?;
        }
        Ok(())
    };

    match &cli.command {
        Command::Simulate => {
            let wf = cfg.workflow()?;
            let sim = generate_dataset(&wf.sim, &wf.geometry, &wf.quadrature)?;
            let path = cli
                .out
                .clone()
                .unwrap_or_else(|| cfg.output.dataset.clone());
            io::save_dataset(&path, &sim.dataset)?;
            let w = sim.initial_truth().to_vector();
            say(
                stdout,
                format!(
                    "n_samples: {}\nseed: {}\nw_true: [{}]\ndataset: {}\n",
                    sim.dataset.len(),
                    wf.sim.seed,
                    w.iter()
                        .map(|v| io::fmt_num(*v))
                        .collect::<Vec<_>>()
                        .join(", "),
                    path.display()
                ),
            )?;
            Ok(EXIT_OK)
        }
        Command::Estimate { dataset, metrics } => {
            let wf = cfg.workflow()?;
            let data = io::load_dataset(dataset)?;
            let ekf = DualEkf::new(wf.estimator, wf.geometry, wf.quadrature.clone())?;
            let estimates = run_estimator(&ekf, &data, wf.input_mode)?;
            let out = cli
                .out
                .clone()
                .unwrap_or_else(|| cfg.output.estimates.clone());
            io::save_estimates(&out, &estimates)?;
            let floors = [wf.sim.noise_pos, wf.sim.noise_pos, wf.sim.noise_ang];
            let m = score_estimates(&data, &estimates, None, floors)?;
            let summary = m.summary(cfg.report.burn_in, cfg.report.threshold);
            let report = EstimateMetrics {
                dataset: dataset.display().to_string(),
                ticks: estimates.len(),
                summary: &summary,
            };
            let metrics_path = metrics
                .clone()
                .unwrap_or_else(|| cfg.output.metrics.clone());
            write_json(&metrics_path, &report)?;
            say(
                stdout,
                serde_json::to_string_pretty(&report).unwrap_or_default() + "\n",
            )?;
            Ok(EXIT_OK)
        }
        Command::ValidateJacobians { trials, flip_sign } => {
            let wf = cfg.workflow()?;
            let fault = flip_sign.then_some(Fault::FlipPositionSign);
            let report = validation::validate(
                *trials as usize,
                wf.sim.seed,
                &wf.geometry,
                &wf.quadrature,
                fault,
            )?;
            let mut text = format!("{} trials, seed {}\n", report.trials, wf.sim.seed);
            for (name, dev, tol) in report.rows() {
                let verdict = if dev <= tol { "ok" } else { "FAIL" };
                text += &format!(
                    "{name:<26} max rel. deviation {dev:.3e} (threshold {tol:.0e}) {verdict}\n"
                );
            }
            say(stdout, text)?;
            Ok(if report.passed() {
                EXIT_OK
            } else {
                EXIT_THRESHOLD
            })
        }
        Command::Report => {
            let wf = cfg.workflow()?;
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir).map_err(io_failure)?;
            let result = run_workflow(&wf)?;
            io::save_dataset(
                &dir.join(file_name(&cfg.output.dataset)),
                &result.simulation.dataset,
            )?;
            io::save_estimates(
                &dir.join(file_name(&cfg.output.estimates)),
                &result.estimates,
            )?;
            let summary = result
                .metrics
                .summary(cfg.report.burn_in, cfg.report.threshold);
            let report = WorkflowReport {
                seed: wf.sim.seed,
                n_samples: wf.sim.n_samples,
                w_true: result.simulation.initial_truth().to_vector().into(),
                w_final: result.estimates.last().map(|e| e.params.mean.into()),
                summary: &summary,
            };
            write_json(&dir.join(file_name(&cfg.output.metrics)), &report)?;
            say(
                stdout,
                serde_json::to_string_pretty(&report).unwrap_or_default() + "\n",
            )?;
            Ok(EXIT_OK)
        }
    }
}

#[derive(Serialize)]
struct WorkflowReport<'a> {
    seed: u64,
    n_samples: usize,
    w_true: [f64; 5],
    w_final: Option<[f64; 5]>,
    summary: &'a MetricsSummary,
}

fn file_name(p: &Path) -> &Path {
    p.file_name().map(Path::new).unwrap_or(p)
}
