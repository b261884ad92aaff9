//! Built-in experiment presets. Parameters the source material leaves open
//! (initial bump statistics, domains, cadences) are pinned here and recorded
//! in every artifact's manifest.

use attractor_core::{Boundary, ExternalField, ModelSpec, ObserverSpec};
use attractor_core::Grid1D;

use crate::config::{
    AnalysisSpec, BumpBackground, ExperimentConfig, InitialSpec, IntegratorConfig,
    CONFIG_SCHEMA_VERSION,
};

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub build: fn(u64) -> ExperimentConfig,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "E1_three_kinks",
        summary: "double-well field with seeded chaotic data decaying to three kinks plus dispersion",
        build: e1_three_kinks,
    },
    Preset {
        name: "E2_soliton_decay",
        summary: "relativistic field with seeded complex data decaying to solitary humps",
        build: e2_soliton_decay,
    },
    Preset {
        name: "E3_adiabatic",
        summary: "solitary hump in a slow cosine potential vs the reduced Hamiltonian dynamics",
        build: e3_adiabatic,
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

fn e1_three_kinks(seed: u64) -> ExperimentConfig {
    let grid = Grid1D::symmetric(160.0, 0.01).unwrap();
    ExperimentConfig {
        schema_version: CONFIG_SCHEMA_VERSION,
        model: ModelSpec::ginzburg_landau(grid).unwrap(),
        initial: InitialSpec::SeededBumps {
            n_bumps: 6,
            amplitude: 0.9,
            width_min: 0.8,
            width_max: 2.0,
            span: 18.0,
            background: BumpBackground::ThreeKinks,
        },
        integrator: IntegratorConfig {
            dt: 2.5e-3,
            boundary: Boundary::FixedVacuum,
            t_final: 100.0,
        },
        observers: vec![
            ObserverSpec::Snapshots { every: 2.0 },
            ObserverSpec::PointTrace { x0: 0.0, every: 0.05 },
            ObserverSpec::Energy { every: 5.0 },
        ],
        analyses: vec![
            AnalysisSpec::Kinks { eps: 0.2 },
            AnalysisSpec::EnergyDrift,
        ],
        seed,
    }
}

fn e2_soliton_decay(seed: u64) -> ExperimentConfig {
    let grid = Grid1D::symmetric(120.0, 0.01).unwrap();
    ExperimentConfig {
        schema_version: CONFIG_SCHEMA_VERSION,
        model: ModelSpec::relativistic_nlw(grid, 10.0, 6, 8.75, 5).unwrap(),
        initial: InitialSpec::SeededComplexBumps {
            n_bumps: 5,
            amplitude: 0.9,
            width_min: 2.0,
            width_max: 5.0,
            span: 18.0,
        },
        integrator: IntegratorConfig {
            dt: 2.5e-3,
            boundary: Boundary::Sponge { width: 15.0 },
            t_final: 100.0,
        },
        observers: vec![
            ObserverSpec::Snapshots { every: 5.0 },
            ObserverSpec::PointTrace { x0: 0.0, every: 0.05 },
        ],
        analyses: vec![AnalysisSpec::SolitonCount {
            threshold: 0.3,
            min_separation: 5.0,
        }],
        seed,
    }
}

fn e3_adiabatic(seed: u64) -> ExperimentConfig {
    let grid = Grid1D::symmetric(60.0, 0.01).unwrap();
    let model = ModelSpec::relativistic_nlw(grid, 10.0, 6, 8.75, 5)
        .unwrap()
        .with_external(ExternalField::Cosine {
            amplitude: -0.2,
            wavenumber: 0.31,
        })
        .unwrap();
    ExperimentConfig {
        schema_version: CONFIG_SCHEMA_VERSION,
        model,
        initial: InitialSpec::SolitonNoRotation {
            omega: 0.6,
            x0: 5.0,
        },
        integrator: IntegratorConfig {
            dt: 2e-3,
            boundary: Boundary::Sponge { width: 10.0 },
            t_final: 170.0,
        },
        observers: vec![
            ObserverSpec::Snapshots { every: 1.0 },
            ObserverSpec::PointTrace { x0: 0.0, every: 0.05 },
        ],
        analyses: vec![AnalysisSpec::Adiabatic {
            omega0: 0.6,
            v_max: 0.8,
            epsilon: 0.2,
        }],
        seed,
    }
}
