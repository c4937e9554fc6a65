use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lambda_coherence::cli::{apply_overrides, fit_csv, parse_config, run, serialize_config, RunConfig};
use lambda_coherence::output::Format;
use lambda_coherence::Error;

/// Λ-atom ground-state coherence simulator with a four-wave-mixing readout.
#[derive(Parser)]
#[command(name = "simulate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `out_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fractional STIRAP with a probe-delay scan and tail fit.
    Fstirap(Shortcut),
    /// Coherent population return swept over Stokes peak Rabi frequencies.
    Cpr {
        /// Comma-separated peak Stokes Rabi frequencies (rad/ns).
        #[arg(long, value_delimiter = ',')]
        stokes_peaks: Vec<f64>,
        #[command(flatten)]
        common: Shortcut,
    },
    /// Fit an exponential decay to a column of an existing CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        from_ns: f64,
        #[arg(long)]
        to_ns: f64,
        /// Column to fit; defaults to the last one.
        #[arg(long)]
        column: Option<String>,
        /// Also write fit.json into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct Shortcut {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long)]
    emit_raw_rho: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Config override as KEY=VALUE (VALUE parsed as JSON); repeatable.
    #[arg(long = "set", value_parser = parse_pair)]
    set: Vec<(String, String)>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn parse_pair(raw: &str) -> Result<(String, String), String> {
    raw.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected KEY=VALUE, got `{raw}`"))
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn shortcut_config(scenario: &str, common: &Shortcut, extra: Vec<(String, String)>) -> Result<RunConfig, Error> {
    let mut pairs = vec![("scenario".to_string(), format!("\"{scenario}\""))];
    let format = match common.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    pairs.push(("format".into(), serde_json::to_string(&format).expect("format serializes")));
    if common.emit_raw_rho {
        pairs.push(("emit_raw_rho".into(), "true".into()));
    }
    if let Some(seed) = common.seed {
        pairs.push(("seed".into(), seed.to_string()));
    }
    pairs.extend(extra);
    pairs.extend(common.set.iter().cloned());
    parse_config(&apply_overrides("", &pairs)?)
}

fn execute(config: &RunConfig, out: &Path) -> Result<(), Error> {
    let report = run(config, out)?;
    for file in &report.files {
        println!("{}", out.join(file).display());
    }
    if let Some(fit) = report.fit {
        eprintln!("decay constant: {:.1} ns (rms log residual {:.2e})", fit.time_constant, fit.rms_residual);
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, out } => {
            let parsed = parse_config(&read(&config)?)?;
            let out = out
                .or_else(|| parsed.out_dir.clone())
                .ok_or_else(|| Error::Config("no output directory: pass --out or set \"out_dir\"".into()))?;
            execute(&parsed, &out)
        }
        Command::Fstirap(common) => {
            let config = shortcut_config("fstirap", &common, Vec::new())?;
            execute(&config, &common.out)
        }
        Command::Cpr { stokes_peaks, common } => {
            let extra = if stokes_peaks.is_empty() {
                Vec::new()
            } else {
                vec![("stokes_peaks".to_string(), serde_json::to_string(&stokes_peaks).expect("floats serialize"))]
            };
            let config = shortcut_config("cpr", &common, extra)?;
            execute(&config, &common.out)
        }
        Command::Fit { input, from_ns, to_ns, column, out } => {
            let value = fit_csv(&input, column.as_deref(), from_ns, to_ns)?;
            let text = serde_json::to_string_pretty(&value).expect("fit serializes");
            if let Some(dir) = out {
                fs::create_dir_all(&dir).map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
                lambda_coherence::output::write_file(&dir.join("fit.json"), &text)?;
            }
            println!("{text}");
            Ok(())
        }
        Command::Validate { config } => {
            let parsed = parse_config(&read(&config)?)?;
            println!("{}", serialize_config(&parsed));
            eprintln!("config ok ({} defaults applied)", parsed.defaults_applied().len());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
