use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polariton_dqc::config::{parse_list, GridConfig, RunConfig};
use polariton_dqc::output::{render_levels, render_spectra, write_all, Rendered};
use polariton_dqc::selfcheck::run_selfcheck;
use polariton_dqc::{Error, Result};

#[derive(Parser)]
#[command(name = "polariton", version, about = "Vibrational polariton DQC 2D spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Grid CSV, metadata sidecar and peak table per sweep point.
    Spectrum(RunArgs),
    /// Like `spectrum`, but a g~ sweep list is required.
    Sweep(RunArgs),
    /// Peak tables only, also printed to stdout.
    Peaks(RunArgs),
    /// Energy-level and transition tables only.
    Levels(RunArgs),
    /// Runs the invariant suite and prints one line per check.
    Selfcheck,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Preset system: amide-I or amide-I+II.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Comma-separated g~ values (cm^-1) applied to every mode.
    #[arg(long, value_name = "LIST")]
    gt: Option<String>,
    /// Delay t1 in fs.
    #[arg(long, value_name = "FS")]
    t1: Option<f64>,
    #[arg(long, value_name = "DIR")]
    out: Option<String>,
    /// Peak threshold as a fraction of the maximum.
    #[arg(long, value_name = "F")]
    threshold: Option<f64>,
    /// Omega2 and omega3 axes: lo2:hi2:step2,lo3:hi3:step3.
    #[arg(long, value_name = "GRID")]
    grid: Option<String>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(name) = &self.preset {
            config.preset = Some(name.clone());
            config.system = None;
        }
        if let Some(list) = &self.gt {
            config.sweep = Some(parse_list(list)?);
        }
        if let Some(t1) = self.t1 {
            config.t1 = t1;
        }
        if let Some(out) = &self.out {
            config.out = out.clone();
        }
        if let Some(threshold) = self.threshold {
            config.threshold = threshold;
        }
        if let Some(grid) = &self.grid {
            config.grid = GridConfig::parse(grid)?;
        }
        config.plan()?;
        Ok(config)
    }
}

fn is_peak_table(path: &Path) -> bool {
    path.to_str().is_some_and(|p| p.ends_with("_peaks.csv"))
}

// Write errors (e.g. a closed pipe) are ignored: the files are already on disk.
fn report(written: &[PathBuf]) {
    let mut out = std::io::stdout().lock();
    for path in written {
        let _ = writeln!(out, "{}", path.display());
    }
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Spectrum(args) => {
            report(&write_all(&render_spectra(&args.resolve()?)?)?);
        }
        Command::Sweep(args) => {
            let config = args.resolve()?;
            if config.sweep.is_none() {
                return Err(Error::Config("`sweep` needs a g~ list (--gt or `sweep = [...]`)".into()));
            }
            report(&write_all(&render_spectra(&config)?)?);
        }
        Command::Peaks(args) => {
            let files: Vec<Rendered> = render_spectra(&args.resolve()?)?
                .into_iter()
                .filter(|(path, _)| is_peak_table(path))
                .collect();
            write_all(&files)?;
            let mut out = std::io::stdout().lock();
            for (path, text) in &files {
                let _ = write!(out, "# {}\n{text}", path.display());
            }
        }
        Command::Levels(args) => {
            report(&write_all(&render_levels(&args.resolve()?)?)?);
        }
        Command::Selfcheck => {
            let report = run_selfcheck();
            let _ = write!(std::io::stdout().lock(), "{report}");
            return Ok(report.all_passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
