//! Numerical laboratory for nonlinear Hamiltonian wave models on the line:
//! finite-difference evolution with symplectic time stepping, closed-form
//! reductions (free-wave limits, string-oscillator ODE, 3D point-interaction
//! splitting), profile constructors for kinks and travelling solitary waves,
//! and the measurement layer that turns trajectories into attractor
//! diagnostics (kink tracks, windowed spectra, gap statistics, effective
//! soliton dynamics).

pub mod diagnostics;
pub mod effdyn;
pub mod error;
pub mod grid;
pub mod integrator;
pub mod model;
pub mod numeric;
pub mod point3d;
pub mod profiles;

pub use error::{Error, Result};
pub use grid::{
    charge_quadrature, local_seminorm, weighted_metric_dist, EnergyBreakdown, FieldState, Grid1D,
    SeminormVariant,
};
pub use integrator::{
    evolve, run, step, Boundary, ObserverSpec, RunRecord, Scheme, StepParams, Trace,
};
pub use model::{
    BumpProfile, ExternalField, FieldKind, ModelFamily, ModelSpec, PolyPotential,
};
