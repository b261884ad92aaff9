//! Experiment configuration: a single JSON document carrying the model, the
//! initial condition, integrator settings, observers and analyses. Full
//! provenance lives in the file; the command line only selects a config (or
//! preset), an output directory, and dotted-path overrides.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use attractor_core::profiles::{kink_boost, soliton_boost, soliton_profile};
use attractor_core::{FieldState, ModelSpec, ObserverSpec, StepParams};

use crate::error::{CliError, Result};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub model: ModelSpec,
    pub initial: InitialSpec,
    pub integrator: IntegratorConfig,
    pub observers: Vec<ObserverSpec>,
    #[serde(default)]
    pub analyses: Vec<AnalysisSpec>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub boundary: attractor_core::Boundary,
    pub t_final: f64,
}

impl IntegratorConfig {
    pub fn step_params(&self) -> StepParams {
        StepParams::leapfrog(self.dt, self.boundary)
    }
}

/// Initial-condition constructors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialSpec {
    /// Constant state `psi = value`, `pi = 0`.
    Vacuum { value: f64 },
    /// Kink (optionally boosted).
    Kink { x0: f64, v: f64 },
    /// Travelling solitary wave slice at frequency `omega`.
    Soliton { omega: f64, x0: f64, v: f64 },
    /// Solitary profile placed at `x0` with zero time derivative (off the
    /// solitary manifold).
    SolitonNoRotation { omega: f64, x0: f64 },
    /// Seeded sum of Gaussian bumps over an optional kink background.
    SeededBumps {
        n_bumps: usize,
        amplitude: f64,
        width_min: f64,
        width_max: f64,
        span: f64,
        background: BumpBackground,
    },
    /// Seeded complex bumps (random phases), for charge-carrying data.
    SeededComplexBumps {
        n_bumps: usize,
        amplitude: f64,
        width_min: f64,
        width_max: f64,
        span: f64,
    },
    /// Narrowband packet on a constant vacuum:
    /// `psi = vacuum + a cos(k0 (x-c)) exp(-((x-c)/w)^2)`, right-moving.
    WavePacket {
        k0: f64,
        amplitude: f64,
        width: f64,
        center: f64,
        vacuum: f64,
    },
    /// Rotating Gaussian hump `psi = A e^{-x^2/w^2} e^{i k x}`,
    /// `pi = i rotation psi`.
    GaussianComplex {
        amplitude: f64,
        width: f64,
        phase_k: f64,
        rotation: f64,
    },
    /// Load a stored snapshot (CSV + JSON sidecar).
    Snapshot { path: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpBackground {
    None,
    Kink,
    ThreeKinks,
}

/// Analyses performed after the run; each writes `reports/<name>.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalysisSpec {
    /// Kink detection on every snapshot plus track assembly.
    Kinks { eps: f64 },
    /// Windowed spectrum of the trace nearest `x0`, with optional gap-mass
    /// margin.
    Spectrum {
        x0: f64,
        start: f64,
        end: f64,
        gap_mass_margin: Option<f64>,
    },
    /// Gap-mass series over successive windows of the trace nearest `x0`.
    GapSeries {
        x0: f64,
        mass: f64,
        delta: f64,
        windows: Vec<(f64, f64)>,
    },
    /// Count localized humps in the final snapshot.
    SolitonCount { threshold: f64, min_separation: f64 },
    /// Compare the tracked center and momentum against the reduced
    /// Hamiltonian trajectory built from the boosted-family chart.
    Adiabatic {
        omega0: f64,
        v_max: f64,
        epsilon: f64,
    },
    /// Energy drift summary from the recorded energy series.
    EnergyDrift,
}

impl AnalysisSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AnalysisSpec::Kinks { .. } => "kinks",
            AnalysisSpec::Spectrum { .. } => "spectrum",
            AnalysisSpec::GapSeries { .. } => "gap_series",
            AnalysisSpec::SolitonCount { .. } => "solitons",
            AnalysisSpec::Adiabatic { .. } => "adiabatic",
            AnalysisSpec::EnergyDrift => "energy_drift",
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s)
            .map_err(|e| CliError::Validation(format!("/: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Semantic validation with JSON-pointer-style paths in the messages.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(CliError::Validation(format!(
                "/schema_version: unsupported value {}",
                self.schema_version
            )));
        }
        self.model
            .validate()
            .map_err(|e| CliError::Validation(format!("/model: {e}")))?;
        self.integrator
            .step_params()
            .validate(&self.model.grid)
            .map_err(|e| CliError::Validation(format!("/integrator: {e}")))?;
        if !(self.integrator.t_final >= 0.0) {
            return Err(CliError::Validation(format!(
                "/integrator/t_final: bad value {}",
                self.integrator.t_final
            )));
        }
        for (i, obs) in self.observers.iter().enumerate() {
            let every = match obs {
                ObserverSpec::Snapshots { every }
                | ObserverSpec::PointTrace { every, .. }
                | ObserverSpec::Energy { every } => *every,
            };
            if !(every > 0.0) {
                return Err(CliError::Validation(format!(
                    "/observers/{i}/every: must be positive, got {every}"
                )));
            }
        }
        match &self.initial {
            InitialSpec::Kink { v, .. } | InitialSpec::Soliton { v, .. } => {
                if v.abs() >= 1.0 {
                    return Err(CliError::Validation(format!(
                        "/initial/v: |v| = {} must be below 1",
                        v.abs()
                    )));
                }
            }
            InitialSpec::Snapshot { path } => {
                if !std::path::Path::new(path).exists() {
                    return Err(CliError::Validation(format!(
                        "/initial/path: file not found: {path}"
                    )));
                }
            }
            InitialSpec::SeededBumps {
                width_min,
                width_max,
                ..
            }
            | InitialSpec::SeededComplexBumps {
                width_min,
                width_max,
                ..
            } => {
                if !(*width_min > 0.0 && width_max >= width_min) {
                    return Err(CliError::Validation(format!(
                        "/initial: bump widths [{width_min}, {width_max}] invalid"
                    )));
                }
            }
            _ => {}
        }
        for (i, a) in self.analyses.iter().enumerate() {
            if let AnalysisSpec::Kinks { eps } = a {
                if !(*eps > 0.0 && *eps < 0.5) {
                    return Err(CliError::Validation(format!(
                        "/analyses/{i}/eps: must sit in (0, 0.5), got {eps}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Construct the initial field state on the model grid.
    pub fn build_initial(&self) -> Result<FieldState> {
        let grid = self.model.grid;
        let state = match &self.initial {
            InitialSpec::Vacuum { value } => {
                let v = *value;
                FieldState::from_real_fn(grid, move |_| v, |_| 0.0)
            }
            InitialSpec::Kink { x0, v } => kink_boost(grid, *x0, *v)
                .map_err(|e| CliError::Validation(format!("/initial: {e}")))?,
            InitialSpec::Soliton { omega, x0, v } => {
                let profile = soliton_profile(&self.base_model()?, *omega, grid)
                    .map_err(|e| CliError::Validation(format!("/initial: {e}")))?;
                soliton_boost(&profile, *v, *x0, grid)
                    .map_err(|e| CliError::Validation(format!("/initial: {e}")))?
            }
            InitialSpec::SolitonNoRotation { omega, x0 } => {
                let profile = soliton_profile(&self.base_model()?, *omega, grid)
                    .map_err(|e| CliError::Validation(format!("/initial: {e}")))?;
                let x0 = *x0;
                FieldState::from_complex_fn(
                    grid,
                    move |x| Complex64::new(profile.eval(x - x0), 0.0),
                    |_| Complex64::default(),
                )
            }
            InitialSpec::SeededBumps {
                n_bumps,
                amplitude,
                width_min,
                width_max,
                span,
                background,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let bumps: Vec<(f64, f64, f64)> = (0..*n_bumps)
                    .map(|_| {
                        (
                            rng.gen_range(-span..*span),
                            rng.gen_range(-amplitude..*amplitude),
                            rng.gen_range(*width_min..*width_max),
                        )
                    })
                    .collect();
                let bg = *background;
                FieldState::from_real_fn(
                    grid,
                    move |x| {
                        let base = match bg {
                            BumpBackground::None => 0.0,
                            BumpBackground::Kink => (x / std::f64::consts::SQRT_2).tanh(),
                            BumpBackground::ThreeKinks => {
                                ((x + 12.0) / std::f64::consts::SQRT_2).tanh()
                                    - (x / std::f64::consts::SQRT_2).tanh()
                                    + ((x - 12.0) / std::f64::consts::SQRT_2).tanh()
                            }
                        };
                        base + bumps
                            .iter()
                            .map(|(c, a, w)| a * (-((x - c) / w).powi(2)).exp())
                            .sum::<f64>()
                    },
                    |_| 0.0,
                )
            }
            InitialSpec::SeededComplexBumps {
                n_bumps,
                amplitude,
                width_min,
                width_max,
                span,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let bumps: Vec<(f64, f64, f64, f64, f64)> = (0..*n_bumps)
                    .map(|_| {
                        (
                            rng.gen_range(-span..*span),
                            rng.gen_range(0.2 * amplitude..*amplitude),
                            rng.gen_range(*width_min..*width_max),
                            rng.gen_range(0.0..std::f64::consts::TAU),
                            rng.gen_range(-1.0..1.0),
                        )
                    })
                    .collect();
                let bumps2 = bumps.clone();
                FieldState::from_complex_fn(
                    grid,
                    move |x| {
                        bumps
                            .iter()
                            .map(|(c, a, w, ph, _)| {
                                Complex64::from_polar(
                                    a * (-((x - c) / w).powi(2)).exp(),
                                    *ph,
                                )
                            })
                            .sum()
                    },
                    move |x| {
                        bumps2
                            .iter()
                            .map(|(c, a, w, ph, rot)| {
                                Complex64::from_polar(
                                    a * (-((x - c) / w).powi(2)).exp(),
                                    *ph,
                                ) * Complex64::new(0.0, *rot)
                            })
                            .sum()
                    },
                )
            }
            InitialSpec::WavePacket {
                k0,
                amplitude,
                width,
                center,
                vacuum,
            } => {
                let omega = (k0 * k0 + 2.0f64).sqrt();
                let (k0, a, w, c, vac) = (*k0, *amplitude, *width, *center, *vacuum);
                FieldState::from_real_fn(
                    grid,
                    move |x| vac + a * (k0 * (x - c)).cos() * (-((x - c) / w).powi(2)).exp(),
                    move |x| omega * a * (k0 * (x - c)).sin() * (-((x - c) / w).powi(2)).exp(),
                )
            }
            InitialSpec::GaussianComplex {
                amplitude,
                width,
                phase_k,
                rotation,
            } => {
                let (a, w, k, rot) = (*amplitude, *width, *phase_k, *rotation);
                FieldState::from_complex_fn(
                    grid,
                    move |x| {
                        Complex64::from_polar(a * (-(x / w).powi(2)).exp(), k * x)
                    },
                    move |x| {
                        Complex64::from_polar(a * (-(x / w).powi(2)).exp(), k * x)
                            * Complex64::new(0.0, rot)
                    },
                )
            }
            InitialSpec::Snapshot { path } => {
                let state = FieldState::read_snapshot(std::path::Path::new(path))
                    .map_err(|e| CliError::Validation(format!("/initial/path: {e}")))?;
                if state.grid != grid {
                    return Err(CliError::Validation(
                        "/initial/path: snapshot grid does not match the model grid".into(),
                    ));
                }
                state
            }
        };
        Ok(state)
    }

    /// The model stripped of any external potential (used for charts and
    /// solitary-profile construction).
    pub fn base_model(&self) -> Result<ModelSpec> {
        let mut model = self.model.clone();
        if let attractor_core::ModelFamily::ExternalPotential { base, .. } = model.family {
            model.family = *base;
        }
        model
            .validate()
            .map_err(|e| CliError::Validation(format!("/model: {e}")))?;
        Ok(model)
    }
}

/// Apply a `--set key=value` override onto the raw JSON value; dotted path,
/// value parsed as JSON with a plain-string fallback.
pub fn apply_override(doc: &mut serde_json::Value, key: &str, value: &str) -> Result<()> {
    let parsed: serde_json::Value =
        serde_json::from_str(value).unwrap_or(serde_json::Value::String(value.to_string()));
    let mut cursor = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        if last {
            match cursor {
                serde_json::Value::Object(map) => {
                    map.insert(part.to_string(), parsed);
                    return Ok(());
                }
                serde_json::Value::Array(arr) => {
                    let idx: usize = part.parse().map_err(|_| {
                        CliError::Validation(format!("--set {key}: bad array index {part}"))
                    })?;
                    if idx >= arr.len() {
                        return Err(CliError::Validation(format!(
                            "--set {key}: index {idx} out of bounds"
                        )));
                    }
                    arr[idx] = parsed;
                    return Ok(());
                }
                _ => {
                    return Err(CliError::Validation(format!(
                        "--set {key}: path does not address an object"
                    )))
                }
            }
        }
        cursor = match cursor {
            serde_json::Value::Object(map) => map.get_mut(*part).ok_or_else(|| {
                CliError::Validation(format!("--set {key}: unknown field {part}"))
            })?,
            serde_json::Value::Array(arr) => {
                let idx: usize = part.parse().map_err(|_| {
                    CliError::Validation(format!("--set {key}: bad array index {part}"))
                })?;
                arr.get_mut(idx).ok_or_else(|| {
                    CliError::Validation(format!("--set {key}: index {idx} out of bounds"))
                })?
            }
            _ => {
                return Err(CliError::Validation(format!(
                    "--set {key}: path does not address a container"
                )))
            }
        };
    }
    Ok(())
}
