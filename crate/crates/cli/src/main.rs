use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use attractor_lab::config::ExperimentConfig;
use attractor_lab::error::CliError;
use attractor_lab::{analyze_artifact, apply_override, expand_glob, presets, run_experiment, sweep};

#[derive(Parser)]
#[command(
    name = "attractor-lab",
    version,
    about = "Configuration-driven wave-field experiments: run, analyze, sweep"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a config file or a named preset.
    Run {
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Seed for preset initial data (overrides the preset default).
        #[arg(long)]
        seed: Option<u64>,
        /// Artifact output directory (default: ./artifact).
        #[arg(long, default_value = "artifact")]
        out: PathBuf,
        /// Dotted-path config overrides, e.g. --set integrator.t_final=5.0
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Re-run a configured analysis on a stored artifact.
    Analyze {
        #[arg(long)]
        artifact: PathBuf,
        #[arg(long)]
        analysis: String,
    },
    /// Run many configs in parallel and write a summary table.
    Sweep {
        #[arg(long = "config-glob")]
        config_glob: String,
        #[arg(short = 'j', long, default_value_t = 2)]
        parallelism: usize,
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
    },
    /// List the built-in presets (optionally write their configs to a directory).
    Presets {
        #[arg(long)]
        write: Option<PathBuf>,
    },
    /// Validate a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_config(
    config: &Option<PathBuf>,
    preset: &Option<String>,
    seed: Option<u64>,
    overrides: &[String],
) -> Result<ExperimentConfig, CliError> {
    let mut doc: serde_json::Value = match (config, preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?
        }
        (None, Some(name)) => {
            let preset = presets::find(name).ok_or_else(|| {
                CliError::Validation(format!(
                    "unknown preset '{name}'; available: {}",
                    presets::PRESETS
                        .iter()
                        .map(|p| p.name)
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })?;
            let cfg = (preset.build)(seed.unwrap_or(1));
            serde_json::to_value(&cfg).expect("preset serializes")
        }
        _ => {
            return Err(CliError::Validation(
                "exactly one of --config or --preset is required".into(),
            ))
        }
    };
    if let (Some(s), Some(_)) = (seed, config.as_ref()) {
        apply_override(&mut doc, "seed", &s.to_string())?;
    }
    for kv in overrides {
        let (key, value) = kv.split_once('=').ok_or_else(|| {
            CliError::Validation(format!("--set expects KEY=VALUE, got '{kv}'"))
        })?;
        apply_override(&mut doc, key, value)?;
    }
    let cfg: ExperimentConfig = serde_json::from_value(doc)
        .map_err(|e| CliError::Validation(format!("/: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

fn execute() -> Result<(), CliError> {
    match Cli::parse().command {
        Command::Run {
            config,
            preset,
            seed,
            out,
            overrides,
        } => {
            let cfg = load_config(&config, &preset, seed, &overrides)?;
            let dir = run_experiment(&cfg, &out)?;
            println!("artifact: {}", dir.display());
            Ok(())
        }
        Command::Analyze { artifact, analysis } => {
            let report = analyze_artifact(&artifact, &analysis)?;
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(())
        }
        Command::Sweep {
            config_glob,
            parallelism,
            out,
        } => {
            let paths = expand_glob(&config_glob)?;
            let outcomes = sweep(&paths, parallelism, &out)?;
            for o in &outcomes {
                println!(
                    "{} -> {} [{}]",
                    o.config_path.display(),
                    o.artifact.display(),
                    match &o.status {
                        Ok(()) => "ok".to_string(),
                        Err(e) => format!("error: {e}"),
                    }
                );
            }
            println!("summary: {}", out.join("summary.csv").display());
            Ok(())
        }
        Command::Presets { write } => {
            for p in presets::PRESETS {
                println!("{:<20} {}", p.name, p.summary);
                if let Some(dir) = &write {
                    std::fs::create_dir_all(dir)?;
                    let cfg = (p.build)(7);
                    let path = dir.join(format!("{}.json", p.name));
                    std::fs::write(&path, cfg.to_json())?;
                    println!("  wrote {}", path.display());
                }
            }
            Ok(())
        }
        Command::Validate { config } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Validation(format!("{}: {e}", config.display())))?;
            ExperimentConfig::from_json(&text)?;
            println!("ok");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
