use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use eitchain::config::{ConfigError, Settings};
use eitchain::experiment::{self, ExperimentError, Mode, PRESETS};

#[derive(Parser)]
#[command(
    name = "eitchain",
    version,
    about = "Photon transport through driven atom chains in waveguides"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transmission (and reflection) against frequency.
    Spectrum(Common),
    /// Bloch dispersion of a periodic chain.
    Bands(Common),
    /// Disorder-averaged transmission and localization length.
    Ensemble(Common),
    /// Closed-form disorder averages for a chiral chain.
    Analytic(Common),
    /// Runs a bundled preset; its `mode` key picks the experiment.
    Preset {
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Lists the bundled presets.
    Presets,
}

#[derive(Args)]
struct Common {
    /// Configuration file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, applied after the config file (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed, overriding `ensemble.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for Monte Carlo runs.
    #[arg(long, env = "EITCHAIN_THREADS")]
    threads: Option<usize>,
}

fn settings(
    base: Option<&str>,
    common: &Common,
    mode: Option<Mode>,
) -> Result<Settings, ExperimentError> {
    let mut s = Settings::default();
    if let Some(text) = base {
        s.merge(text)?;
    }
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigError::new(None, None, format!("cannot read {}: {e}", path.display()))
        })?;
        s.merge(&text)?;
    }
    for o in &common.overrides {
        s.set(o)?;
    }
    if let Some(seed) = common.seed {
        s.set(&format!("ensemble.seed={seed}"))?;
    }
    if let Some(mode) = mode {
        s.set(&format!("mode={mode}"))?;
    }
    Ok(s)
}

fn execute(base: Option<&str>, common: &Common, mode: Option<Mode>) -> Result<(), ExperimentError> {
    if let Some(threads) = common.threads {
        if threads == 0 {
            return Err(ConfigError::new(None, Some("threads"), "must be at least 1").into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| ExperimentError::Numerical(format!("thread pool: {e}")))?;
    }
    let s = settings(base, common, mode)?;
    let mode: Mode = s.get_parsed("mode")?;
    let start = Instant::now();
    let mut report = experiment::run(&s, mode)?;
    report.summary["duration_seconds"] = serde_json::json!(start.elapsed().as_secs_f64());

    let io = |e: std::io::Error| ExperimentError::Numerical(format!("output: {e}"));
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match &common.out {
        Some(path) => std::fs::write(path, &report.csv).map_err(|e| {
            ExperimentError::Config(ConfigError::new(
                None,
                Some("out"),
                format!("cannot write {}: {e}", path.display()),
            ))
        })?,
        None => out.write_all(report.csv.as_bytes()).map_err(io)?,
    }
    writeln!(out, "{}", report.summary).map_err(io)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Spectrum(c) => execute(None, c, Some(Mode::Spectrum)),
        Command::Bands(c) => execute(None, c, Some(Mode::Bands)),
        Command::Ensemble(c) => execute(None, c, Some(Mode::Ensemble)),
        Command::Analytic(c) => execute(None, c, Some(Mode::Analytic)),
        Command::Preset { name, common } => match experiment::preset(name) {
            Some(text) => execute(Some(text), common, None),
            None => Err(ConfigError::new(
                None,
                None,
                format!("unknown preset '{name}', run `eitchain presets` for the list"),
            )
            .into()),
        },
        Command::Presets => {
            for (name, text) in PRESETS {
                let title: Vec<&str> = text.lines().map_while(|l| l.strip_prefix("# ")).collect();
                println!("{name}\t{}", title.join(" "));
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eitchain: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
