//! Artifact-producing experiment execution: run + analyses into a
//! self-describing directory, re-analysis of stored artifacts, and parallel
//! sweeps over config sets.

use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

use attractor_core::RunRecord;

use crate::analyses::run_analysis;
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Execute a validated config and write the artifact directory:
/// `manifest.json`, the run record (snapshots/traces/energy CSVs), and one
/// report per configured analysis. CSV outputs are byte-identical across
/// runs of the same config on one platform; the manifest carries wall time.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<PathBuf> {
    config.validate()?;
    let started = Instant::now();
    let initial = config.build_initial()?;
    let params = config.integrator.step_params();
    let record = attractor_core::run(
        &config.model,
        &initial,
        config.integrator.t_final,
        &params,
        &config.observers,
    )
    .map_err(CliError::from)?;

    std::fs::create_dir_all(out_dir)?;
    record.save_dir(out_dir).map_err(CliError::from)?;

    let reports_dir = out_dir.join("reports");
    for spec in &config.analyses {
        run_analysis(config, &record, spec, &reports_dir)?;
    }

    let config_json = serde_json::to_string(config)?;
    let mut hasher = Sha256::new();
    hasher.update(config_json.as_bytes());
    let manifest = serde_json::json!({
        "tool_version": TOOL_VERSION,
        "config_sha256": format!("{:x}", hasher.finalize()),
        "wall_time_s": started.elapsed().as_secs_f64(),
        "sponge_used": record.sponge_used,
        "n_snapshots": record.snapshots.len(),
        "n_traces": record.traces.len(),
        "config": serde_json::to_value(config)?,
    });
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(out_dir.to_path_buf())
}

/// Load a stored artifact and re-run one analysis kind from its manifest
/// config, overwriting `reports/<name>.json`.
pub fn analyze_artifact(artifact: &Path, analysis: &str) -> Result<serde_json::Value> {
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(artifact.join("manifest.json")).map_err(
            |e| CliError::Validation(format!("artifact manifest: {e}")),
        )?)?;
    let config: ExperimentConfig = serde_json::from_value(manifest["config"].clone())
        .map_err(|e| CliError::Validation(format!("artifact config: {e}")))?;
    let spec = config
        .analyses
        .iter()
        .find(|a| a.name() == analysis)
        .ok_or_else(|| {
            CliError::Validation(format!(
                "analysis '{analysis}' is not configured in this artifact"
            ))
        })?;
    let record = RunRecord::load_dir(artifact).map_err(CliError::from)?;
    run_analysis(&config, &record, spec, &artifact.join("reports"))
}

/// One sweep row.
#[derive(Debug)]
pub struct SweepOutcome {
    pub config_path: PathBuf,
    pub artifact: PathBuf,
    pub status: std::result::Result<(), String>,
    pub wall_time_s: f64,
}

/// Run the configs in parallel (at most `parallelism` at a time); each run
/// is isolated in its own subdirectory and failures do not abort the sweep.
/// Writes `summary.csv` under `out_dir`.
pub fn sweep(config_paths: &[PathBuf], parallelism: usize, out_dir: &Path) -> Result<Vec<SweepOutcome>> {
    std::fs::create_dir_all(out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let outcomes: Vec<SweepOutcome> = pool.install(|| {
        use rayon::prelude::*;
        config_paths
            .par_iter()
            .enumerate()
            .map(|(idx, path)| {
                let t0 = Instant::now();
                let artifact = out_dir.join(format!(
                    "run_{idx:03}_{}",
                    path.file_stem().and_then(|s| s.to_str()).unwrap_or("cfg")
                ));
                let status = std::fs::read_to_string(path)
                    .map_err(|e| e.to_string())
                    .and_then(|text| {
                        ExperimentConfig::from_json(&text).map_err(|e| e.to_string())
                    })
                    .and_then(|cfg| {
                        run_experiment(&cfg, &artifact)
                            .map(|_| ())
                            .map_err(|e| e.to_string())
                    });
                SweepOutcome {
                    config_path: path.clone(),
                    artifact,
                    status,
                    wall_time_s: t0.elapsed().as_secs_f64(),
                }
            })
            .collect()
    });

    let mut w = csv::Writer::from_path(out_dir.join("summary.csv"))
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    w.write_record(["config", "artifact", "status", "wall_time_s"])
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    for o in &outcomes {
        w.serialize((
            o.config_path.display().to_string(),
            o.artifact.display().to_string(),
            match &o.status {
                Ok(()) => "ok".to_string(),
                Err(e) => format!("error: {e}"),
            },
            o.wall_time_s,
        ))
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    w.flush().map_err(CliError::from)?;
    Ok(outcomes)
}

/// Minimal star-only glob over one directory level (e.g. `cfg/*.json`).
pub fn expand_glob(pattern: &str) -> Result<Vec<PathBuf>> {
    let path = Path::new(pattern);
    if !pattern.contains('*') {
        return Ok(if path.exists() {
            vec![path.to_path_buf()]
        } else {
            Vec::new()
        });
    }
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name_pattern = path
        .file_name()
        .and_then(|s| s.to_str())
        .ok_or_else(|| CliError::Validation(format!("bad glob pattern {pattern}")))?;
    if dir.to_str().map_or(false, |d| d.contains('*')) {
        return Err(CliError::Validation(
            "glob stars are supported in the file name only".into(),
        ));
    }
    let matcher = |name: &str| -> bool {
        let parts: Vec<&str> = name_pattern.split('*').collect();
        let mut rest = name;
        for (i, part) in parts.iter().enumerate() {
            if part.is_empty() {
                continue;
            }
            if i == 0 {
                match rest.strip_prefix(part) {
                    Some(r) => rest = r,
                    None => return false,
                }
            } else if i + 1 == parts.len() {
                return rest.ends_with(part);
            } else {
                match rest.find(part) {
                    Some(pos) => rest = &rest[pos + part.len()..],
                    None => return false,
                }
            }
        }
        parts.last().map_or(true, |p| p.is_empty()) || name_pattern.ends_with('*')
    };
    let mut out = Vec::new();
    if dir.exists() {
        for entry in std::fs::read_dir(dir)? {
            let entry = entry?;
            if let Some(name) = entry.file_name().to_str() {
                if matcher(name) {
                    out.push(entry.path());
                }
            }
        }
    }
    out.sort();
    Ok(out)
}
