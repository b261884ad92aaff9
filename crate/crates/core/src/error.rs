use thiserror::Error;

/// Errors surfaced by the simulation and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("CFL violation: dt/dx = {ratio:.4} exceeds 0.9")]
    Cfl { ratio: f64 },
    #[error("field blow-up at t = {t:.6}: max |psi| = {max:.3e}")]
    BlowUp { t: f64, max: f64 },
    #[error("radius {radius} exceeds domain half-width {half_width}")]
    RadiusTooLarge { radius: f64, half_width: f64 },
    #[error("charge is undefined for a real-field model")]
    RealFieldCharge,
    #[error("point-interaction site x = {0} does not coincide with a grid node")]
    SiteOffGrid(f64),
    #[error("model validation failed: {0}")]
    InvalidModel(String),
    #[error("boost speed |v| = {0} is not below 1")]
    SuperluminalBoost(f64),
    #[error("no localized profile for these parameters: {0}")]
    NoHomoclinic(String),
    #[error("value {value} outside range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("trajectory does not cover requested time {0}")]
    TrajectoryCoverage(f64),
    #[error("window too short: {0}")]
    WindowTooShort(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
