//! Analysis execution: turn a finished run into JSON reports (plus CSV for
//! spectra). Analyses are pure functions of the stored run data, so
//! re-running them on a saved artifact reproduces the reports byte for byte.

use std::path::Path;

use serde_json::json;

use attractor_core::diagnostics::{
    detect_kinks, dominant_cluster, gap_mass, point_trace_spectrum, track_kinks, count_solitons,
};
use attractor_core::effdyn::{
    build_chart, compare_adiabatic, integrate_effective, velocity_grid, EffectiveState,
};
use attractor_core::{ExternalField, ModelFamily, RunRecord};

use crate::config::{AnalysisSpec, ExperimentConfig};
use crate::error::{CliError, Result};

/// Execute one analysis and write `reports/<name>.json` (and a CSV for
/// spectra); returns the report value.
pub fn run_analysis(
    config: &ExperimentConfig,
    record: &RunRecord,
    spec: &AnalysisSpec,
    reports_dir: &Path,
) -> Result<serde_json::Value> {
    std::fs::create_dir_all(reports_dir)?;
    let report = match spec {
        AnalysisSpec::Kinks { eps } => {
            let frames: Vec<(f64, Vec<_>)> = record
                .snapshots
                .iter()
                .map(|s| (s.time, detect_kinks(s, *eps)))
                .collect();
            let tracks = if frames.len() >= 5 {
                track_kinks(&frames).map_err(CliError::from)?
            } else {
                Vec::new()
            };
            json!({
                "eps": eps,
                "frames": frames.iter().map(|(t, ks)| json!({
                    "t": t,
                    "kinks": ks,
                })).collect::<Vec<_>>(),
                "tracks": tracks,
            })
        }
        AnalysisSpec::Spectrum {
            x0,
            start,
            end,
            gap_mass_margin,
        } => {
            let trace = record.trace_near(*x0).map_err(CliError::from)?;
            let mut rep = point_trace_spectrum(trace, *start, *end).map_err(CliError::from)?;
            if let Some(delta) = gap_mass_margin {
                let g = gap_mass(&rep, config.model.mass, *delta).map_err(CliError::from)?;
                rep.gap_mass_fraction = Some(g);
            }
            rep.write_csv(&reports_dir.join("spectrum.csv"))
                .map_err(CliError::from)?;
            let (cluster_fraction, cluster_range) = dominant_cluster(&rep, 1e-3);
            json!({
                "x0": trace.x0,
                "window": [start, end],
                "peak_freq": rep.peak_freq,
                "refined_peak": rep.refined_peak(),
                "gap_mass_fraction": rep.gap_mass_fraction,
                "cluster_fraction": cluster_fraction,
                "cluster_range": cluster_range,
                "bins": rep.freqs.len(),
            })
        }
        AnalysisSpec::GapSeries {
            x0,
            mass,
            delta,
            windows,
        } => {
            let trace = record.trace_near(*x0).map_err(CliError::from)?;
            let mut series = Vec::new();
            for (a, b) in windows {
                let rep = point_trace_spectrum(trace, *a, *b).map_err(CliError::from)?;
                let g = gap_mass(&rep, *mass, *delta).map_err(CliError::from)?;
                series.push(json!({
                    "window": [a, b],
                    "gap_mass": g,
                    "peak": rep.refined_peak(),
                }));
            }
            json!({ "mass": mass, "delta": delta, "series": series })
        }
        AnalysisSpec::SolitonCount {
            threshold,
            min_separation,
        } => {
            let last = record
                .snapshots
                .last()
                .ok_or_else(|| CliError::Runtime("no snapshots recorded".into()))?;
            let peaks = count_solitons(last, *threshold, *min_separation);
            json!({
                "t": last.time,
                "threshold": threshold,
                "count": peaks.len(),
                "peaks": peaks.iter().map(|(x, a)| json!({"x": x, "amplitude": a})).collect::<Vec<_>>(),
            })
        }
        AnalysisSpec::Adiabatic {
            omega0,
            v_max,
            epsilon,
        } => {
            let base = config.base_model()?;
            let field = match &config.model.family {
                ModelFamily::ExternalPotential { field, .. } => field.clone(),
                _ => ExternalField::Cosine {
                    amplitude: 0.0,
                    wavenumber: 1.0,
                },
            };
            let chart =
                build_chart(&base, *omega0, &velocity_grid(*v_max, 65)).map_err(CliError::from)?;
            let first = record
                .snapshots
                .first()
                .ok_or_else(|| CliError::Runtime("no snapshots recorded".into()))?;
            let s0 = EffectiveState {
                q: attractor_core::effdyn::centroid(first),
                p: attractor_core::effdyn::field_momentum(first),
            };
            let reduced = integrate_effective(&chart, &field, s0, record.t_final, 1e-3)
                .map_err(CliError::from)?;
            let rep = compare_adiabatic(record, &reduced, *epsilon).map_err(CliError::from)?;
            serde_json::to_value(&rep)?
        }
        AnalysisSpec::EnergyDrift => {
            if record.energies.is_empty() {
                return Err(CliError::Runtime(
                    "energy analysis needs an energy observer".into(),
                ));
            }
            let e0 = record.energies[0].breakdown.total;
            let max_rel = record
                .energies
                .iter()
                .map(|e| ((e.breakdown.total - e0) / e0).abs())
                .fold(0.0f64, f64::max);
            json!({
                "initial": e0,
                "final": record.energies.last().unwrap().breakdown.total,
                "max_relative_deviation": max_rel,
                "sponge_used": record.sponge_used,
            })
        }
    };
    let path = reports_dir.join(format!("{}.json", spec.name()));
    std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}
