//! `signorini`: batch front-end. Exit codes: 0 ok, 1 configuration error,
//! 2 numerical failure (non-convergence, failed suite checks).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use signorini_core::config::{geometric_ladder, ExperimentConfig, FieldSource};
use signorini_core::freeboundary::{
    classifications_to_csv, classify_point, snap_to_free_boundary, ClassificationRow,
};
use signorini_core::functionals::{profile, WeissParams};
use signorini_core::grid::GridFunction;
use signorini_core::io::write_field;
use signorini_core::rescale::{blowup, fit_regular_profile, fit_singular_polynomial, BlowupFit, BlowupResult, SphereSamples};
use signorini_core::suites::{run_suite, SuiteContext, SUITES};
use signorini_core::Error;

#[derive(Parser)]
#[command(name = "signorini", version, about = "Thin obstacle solver and free-boundary analysis")]
struct Cli {
    /// Worker threads for the analysis stages.
    #[arg(long, env = "SIGNORINI_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured problem; writes the field dump and diagnostics.
    Solve(Paths),
    /// Frequency and Weiss profiles at each configured center.
    Profile(Paths),
    /// Classify each configured center.
    Classify(Paths),
    /// Blowup sequence and profile fit at each configured center.
    Blowup(Paths),
    /// Run a named acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Paths {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `output` or `out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
    suite: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence { .. }
            | Error::DegenerateBoundaryMass { .. }
            | Error::DegenerateField
            | Error::NotInQ
            | Error::NotRegularSeed
            | Error::NoCrossingInWindow
            | Error::NonFinite { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = match &cli.command {
        Command::Solve(p) => with_config(p, cmd_solve),
        Command::Profile(p) => with_config(p, cmd_profile),
        Command::Classify(p) => with_config(p, cmd_classify),
        Command::Blowup(p) => with_config(p, cmd_blowup),
        Command::Verify(v) => cmd_verify(v),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn with_config(paths: &Paths, run: fn(&ExperimentConfig, &Path) -> Outcome) -> Outcome {
    let cfg = ExperimentConfig::load(&paths.config)?;
    let out = paths
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out)?;
    run(&cfg, &out)
}

fn write_json(path: &Path, value: &impl Serialize) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Config(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn cmd_solve(cfg: &ExperimentConfig, out: &Path) -> Outcome {
    let (field, diagnostics, failure) = match cfg.solve() {
        Ok((u, d)) => (u, d, None),
        Err(Error::NonConvergence { diagnostics, field }) => {
            let msg = format!("solver did not converge after {} sweeps", diagnostics.sweeps_used);
            (*field, diagnostics, Some(msg))
        }
        Err(e) => return Err(e.into()),
    };
    write_field(&field, &out.join("field"))?;
    write_json(&out.join("diagnostics.json"), &diagnostics)?;
    match failure {
        Some(msg) => Err(Failure::Numerical(msg)),
        None => Ok(()),
    }
}

fn centers(cfg: &ExperimentConfig) -> Vec<Vec<f64>> {
    if cfg.analysis.centers.is_empty() {
        vec![vec![0.0; cfg.grid.dim]]
    } else {
        cfg.analysis.centers.clone()
    }
}

fn analysis_inputs(cfg: &ExperimentConfig) -> Result<(GridFunction, WeissParams), Failure> {
    let u = cfg.analysis_field()?;
    let params = cfg.analysis.params(u.grid().dim())?;
    Ok((u, params))
}

#[derive(Serialize)]
struct ProfileSidecar<'a> {
    center: &'a [f64],
    params: &'a WeissParams,
    kappas: &'a [f64],
    field: String,
}

fn cmd_profile(cfg: &ExperimentConfig, out: &Path) -> Outcome {
    let (u, params) = analysis_inputs(cfg)?;
    let radii = cfg.radii(u.grid(), &params)?;
    for (k, c) in centers(cfg).iter().enumerate() {
        let p = profile(&u, c, &radii, &params, &cfg.analysis.kappas)?;
        fs::write(out.join(format!("profile_{k}.csv")), p.to_csv())?;
        let sidecar = ProfileSidecar {
            center: c,
            params: &params,
            kappas: &cfg.analysis.kappas,
            field: match &cfg.field {
                FieldSource::Solve => "solve".into(),
                FieldSource::Exact => "exact".into(),
                FieldSource::File(p) => p.display().to_string(),
            },
        };
        write_json(&out.join(format!("profile_{k}.json")), &sidecar)?;
    }
    Ok(())
}

fn cmd_classify(cfg: &ExperimentConfig, out: &Path) -> Outcome {
    let (u, params) = analysis_inputs(cfg)?;
    let mut rows = Vec::new();
    let mut details = Vec::new();
    for c in centers(cfg) {
        let class = classify_point(&u, &c, &params, &cfg.analysis.thresholds)?;
        rows.push(ClassificationRow::from(&class));
        details.push(class);
    }
    fs::write(out.join("classification.csv"), classifications_to_csv(u.grid().dim(), &rows))?;
    write_json(&out.join("classification.json"), &details)
}

#[derive(Serialize)]
struct BlowupRecord {
    #[serde(flatten)]
    result: BlowupResult,
    fit: Option<BlowupFit>,
    fit_error: Option<String>,
}

fn cmd_blowup(cfg: &ExperimentConfig, out: &Path) -> Outcome {
    let (u, params) = analysis_inputs(cfg)?;
    let b = &cfg.analysis.blowup;
    let ladder = if b.ladder.is_empty() {
        let floor = cfg.analysis.thresholds.blowup_min_cells * u.grid().spacing();
        let rungs = ((params.t0 / floor).log2().floor() as usize + 1).max(3);
        let mut l = geometric_ladder(params.t0 / 2f64.powi(rungs as i32 - 1), params.t0, rungs);
        l.reverse();
        l
    } else {
        b.ladder.clone()
    };
    for (k, c) in centers(cfg).iter().enumerate() {
        let c = snap_to_free_boundary(&u, c, cfg.analysis.thresholds.policy);
        let result = blowup(&u, &c, b.kappa, &ladder, &params, b.resolution)?;
        let samples = SphereSamples::from_field(result.limit_estimate());
        let fit = if (b.kappa - 1.5).abs() < 1e-12 {
            fit_regular_profile(&samples)
        } else if b.kappa.fract() == 0.0 && (b.kappa as u32).is_multiple_of(2) {
            fit_singular_polynomial(&samples, b.kappa as u32)
        } else {
            Err(Error::InvalidParameter(format!("no profile family for kappa {}", b.kappa)))
        };
        write_field(result.limit_estimate(), &out.join(format!("blowup_{k}_limit")))?;
        let (fit, fit_error) = match fit {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        write_json(&out.join(format!("blowup_{k}.json")), &BlowupRecord { result, fit, fit_error })?;
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Outcome {
    let ctx = SuiteContext::new();
    let report = run_suite(&args.suite, &ctx)?;
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("report.json"), report.to_json())?;
    fs::write(args.out.join("series.csv"), report.series_csv())?;
    fs::write(args.out.join("timings.json"), report.timings_json())?;
    for line in report.lines() {
        println!("{line}");
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("suite `{}` has failing checks", args.suite)))
    }
}
