use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use twistorlab_cli::{emit_report, parse_config, run, Format, TOL_SCALE_ENV};

/// Verify the twistor and Killing-field identities on a metric family.
#[derive(Parser, Debug)]
#[command(name = "verify", version)]
struct Args {
    /// Run configuration file.
    config: PathBuf,
    /// Output directory (default: the config's output.dir, else the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; repeat for several.
    #[arg(long, value_enum)]
    format: Vec<Format>,
    /// Override run.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override run.samples.
    #[arg(long)]
    samples: Option<usize>,
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return fail(format!("{}: {e}", args.config.display())),
    };
    let mut config = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => return fail(format!("{}: {e}", args.config.display())),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(n) = args.samples {
        if let Err(e) = config.set_samples(n) {
            return fail(e);
        }
    }
    if !args.format.is_empty() {
        config.formats = args.format.clone();
    }
    if let Ok(v) = std::env::var(TOL_SCALE_ENV) {
        let scale = match v.trim().parse::<f64>() {
            Ok(s) => s,
            Err(_) => return fail(format!("{TOL_SCALE_ENV}: '{v}' is not a number")),
        };
        if let Err(e) = config.apply_tol_scale(scale) {
            return fail(e);
        }
    }
    let out = args.out.or_else(|| config.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));

    let report = run(&config);
    for &f in &config.formats {
        match emit_report(&report, f, &out) {
            Ok(p) => eprintln!("wrote {}", p.display()),
            Err(e) => return fail(format!("{}: {e}", out.display())),
        }
    }
    let s = &report.summary;
    match &report.construction_error {
        Some(e) => eprintln!("construction failed: {e}"),
        None => eprintln!(
            "{} records: {} passed, {} failed, {} skipped, {} not applicable{}",
            s.total,
            s.passed,
            s.failed,
            s.skipped,
            s.not_applicable,
            s.classification.as_deref().map(|c| format!("; classification {c}")).unwrap_or_default()
        ),
    }
    ExitCode::from(report.exit_code() as u8)
}
