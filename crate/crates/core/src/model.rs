//! Evolution-law descriptions: which wave equation is being solved, with
//! which nonlinearity, where the nonlinearity acts, and on which grid.
//!
//! All supported laws are of the form
//!
//! ```text
//!   psidd = psi'' - m^2 psi + N(x, psi) - V(x) psi
//! ```
//!
//! with `N` either distributed (Ginzburg-Landau, relativistic families),
//! localized at grid sites (delta couplings), or absent (free wave). Forces
//! derive from potentials, `F = -grad U`, which is checked numerically at
//! construction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    charge_quadrature, EnergyBreakdown, FieldState, Grid1D, SeminormVariant,
};
use crate::numeric::{gradient, trapezoid};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// Real or complex field values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Real,
    Complex,
}

/// Potential that is polynomial in |psi|^2:
/// `U(psi) = u(|psi|^2)` with `u(s) = sum_j u_coeffs[j] s^j`,
/// hence `F(psi) = -grad U = -2 u'(|psi|^2) psi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyPotential {
    pub u_coeffs: Vec<f64>,
}

impl PolyPotential {
    pub fn new(u_coeffs: Vec<f64>) -> Self {
        Self { u_coeffs }
    }

    /// Ginzburg-Landau double well `U = (|psi|^2 - 1)^2 / 4`, zero at the vacua.
    pub fn ginzburg_landau() -> Self {
        Self::new(vec![0.25, -0.5, 0.25])
    }

    /// Soft U(1) oscillator well `U = |psi|^4/4 - |psi|^2/2`.
    pub fn soft_well() -> Self {
        Self::new(vec![0.0, -0.5, 0.25])
    }

    fn u(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.u_coeffs.iter().rev() {
            acc = acc * s + c;
        }
        acc
    }

    fn du(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (j, &c) in self.u_coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * s + j as f64 * c;
        }
        acc
    }

    pub(crate) fn du1(&self, s: f64) -> f64 {
        self.du(s)
    }

    pub fn potential(&self, psi: Complex64) -> f64 {
        self.u(psi.norm_sqr())
    }

    pub fn force(&self, psi: Complex64) -> Complex64 {
        psi * (-2.0 * self.du(psi.norm_sqr()))
    }

    /// True when `U -> +inf` as `|psi| -> inf`.
    pub fn is_confining(&self) -> bool {
        match self.u_coeffs.iter().rposition(|&c| c != 0.0) {
            Some(j) if j >= 1 => self.u_coeffs[j] > 0.0,
            _ => false,
        }
    }

    /// Polynomial in |psi|^2 of degree >= 2 with positive leading coefficient.
    pub fn is_strictly_nonlinear(&self) -> bool {
        match self.u_coeffs.iter().rposition(|&c| c != 0.0) {
            Some(j) if j >= 2 => self.u_coeffs[j] > 0.0,
            _ => false,
        }
    }

    /// Check `F = -grad U` by centered differences on a set of sample values.
    fn check_gradient_consistency(&self) -> Result<()> {
        let h = 1e-5;
        for k in 0..40 {
            let r = -2.0 + 4.0 * k as f64 / 39.0;
            for im in [0.0, 0.37] {
                let psi = Complex64::new(r, im);
                // d/d(re): U(psi + h) - U(psi - h)
                let dre = (self.potential(psi + h) - self.potential(psi - h)) / (2.0 * h);
                let dim = (self.potential(psi + Complex64::new(0.0, h))
                    - self.potential(psi - Complex64::new(0.0, h)))
                    / (2.0 * h);
                let f = self.force(psi);
                if (f.re + dre).abs() > 1e-6 * (1.0 + dre.abs())
                    || (f.im + dim).abs() > 1e-6 * (1.0 + dim.abs())
                {
                    return Err(Error::InvalidModel(format!(
                        "force/potential mismatch at psi = {psi}: F = {f}, grad U = ({dre}, {dim})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Smooth compactly supported coupling profile
/// `chi(x) = amplitude * exp(1 - 1/(1 - u^2))` for `u = (x-center)/half_width`, |u| < 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub center: f64,
    pub half_width: f64,
    pub amplitude: f64,
}

impl BumpProfile {
    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.half_width;
        if u.abs() >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - u * u)).exp()
        }
    }
}

/// External potential `V(x)` multiplying the field linearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExternalField {
    Cosine { amplitude: f64, wavenumber: f64 },
    Quadratic { curvature: f64 },
}

impl ExternalField {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ExternalField::Cosine {
                amplitude,
                wavenumber,
            } => amplitude * (wavenumber * x).cos(),
            ExternalField::Quadratic { curvature } => 0.5 * curvature * x * x,
        }
    }

    pub fn gradient(&self, x: f64) -> f64 {
        match self {
            ExternalField::Cosine {
                amplitude,
                wavenumber,
            } => -amplitude * wavenumber * (wavenumber * x).sin(),
            ExternalField::Quadratic { curvature } => curvature * x,
        }
    }
}

/// The supported evolution-law families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelFamily {
    /// Free wave `psidd = psi''`.
    Dalembert,
    /// Distributed compact coupling `psidd = psi'' + chi(x) F(psi)`.
    Distributed {
        chi: BumpProfile,
        potential: PolyPotential,
    },
    /// String with an oscillator attached at x = 0:
    /// `(1 + M delta) psidd = psi'' + delta(x) F(psi(0))`.
    Lamb {
        point_mass: f64,
        potential: PolyPotential,
    },
    /// Klein-Gordon field with delta-site oscillators (one shared force law):
    /// `psidd = psi'' - m^2 psi + sum_k delta(x - x_k) F(psi(x_k))`.
    KgPoint {
        sites: Vec<f64>,
        potential: PolyPotential,
    },
    /// `psidd = psi'' + psi - psi^3` (kink-bearing double well).
    GinzburgLandau,
    /// Relativistic wave equation with the confining two-term potential
    /// `U(psi) = a |psi|^{2m} - b |psi|^{2n}` (a, b > 0, m > n >= 2), so
    /// `F(psi) = -grad U = 2 b n |psi|^{2n-2} psi - 2 a m |psi|^{2m-2} psi`.
    /// Solitary waves exist for frequencies between the edge set by the
    /// potential hump and the gap edge |omega| = mass.
    RelativisticNlw {
        a: f64,
        m_exp: u32,
        b: f64,
        n_exp: u32,
    },
    /// Base law plus an external potential term `- V(x) psi`.
    ExternalPotential {
        field: ExternalField,
        base: Box<ModelFamily>,
    },
}

/// A fully specified model: family, mass, field kind and grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(default = "schema_version")]
    pub model_schema: u32,
    pub family: ModelFamily,
    pub mass: f64,
    pub field_kind: FieldKind,
    pub grid: Grid1D,
}

fn schema_version() -> u32 {
    MODEL_SCHEMA_VERSION
}

impl ModelSpec {
    fn build(family: ModelFamily, mass: f64, field_kind: FieldKind, grid: Grid1D) -> Result<Self> {
        let spec = Self {
            model_schema: MODEL_SCHEMA_VERSION,
            family,
            mass,
            field_kind,
            grid,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dalembert(grid: Grid1D) -> Result<Self> {
        Self::build(ModelFamily::Dalembert, 0.0, FieldKind::Real, grid)
    }

    pub fn distributed(grid: Grid1D, chi: BumpProfile, potential: PolyPotential) -> Result<Self> {
        Self::build(
            ModelFamily::Distributed { chi, potential },
            0.0,
            FieldKind::Real,
            grid,
        )
    }

    pub fn lamb(grid: Grid1D, point_mass: f64, potential: PolyPotential) -> Result<Self> {
        Self::build(
            ModelFamily::Lamb {
                point_mass,
                potential,
            },
            0.0,
            FieldKind::Real,
            grid,
        )
    }

    pub fn kg_point(grid: Grid1D, mass: f64, sites: Vec<f64>, potential: PolyPotential) -> Result<Self> {
        Self::build(
            ModelFamily::KgPoint { sites, potential },
            mass,
            FieldKind::Complex,
            grid,
        )
    }

    pub fn ginzburg_landau(grid: Grid1D) -> Result<Self> {
        Self::build(ModelFamily::GinzburgLandau, 0.0, FieldKind::Real, grid)
    }

    pub fn relativistic_nlw(grid: Grid1D, a: f64, m_exp: u32, b: f64, n_exp: u32) -> Result<Self> {
        Self::build(
            ModelFamily::RelativisticNlw { a, m_exp, b, n_exp },
            1.0,
            FieldKind::Complex,
            grid,
        )
    }

    /// Wrap this model with an external potential term `- V(x) psi`.
    pub fn with_external(mut self, field: ExternalField) -> Result<Self> {
        self.family = ModelFamily::ExternalPotential {
            field,
            base: Box::new(self.family),
        };
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.model_schema != MODEL_SCHEMA_VERSION {
            return Err(Error::InvalidModel(format!(
                "unsupported model_schema {}",
                self.model_schema
            )));
        }
        if !(self.mass >= 0.0) {
            return Err(Error::InvalidModel(format!("mass {} < 0", self.mass)));
        }
        self.validate_family(&self.family)?;
        Ok(())
    }

    fn validate_family(&self, family: &ModelFamily) -> Result<()> {
        match family {
            ModelFamily::Dalembert | ModelFamily::GinzburgLandau => Ok(()),
            ModelFamily::Distributed { chi, potential } => {
                if chi.half_width <= 0.0 || chi.amplitude < 0.0 {
                    return Err(Error::InvalidModel(
                        "coupling profile needs positive width and nonnegative amplitude".into(),
                    ));
                }
                potential.check_gradient_consistency()
            }
            ModelFamily::Lamb {
                point_mass,
                potential,
            } => {
                if *point_mass <= 0.0 {
                    return Err(Error::InvalidModel("point mass must be positive".into()));
                }
                self.grid.index_of(0.0)?;
                potential.check_gradient_consistency()
            }
            ModelFamily::KgPoint { sites, potential } => {
                if sites.is_empty() {
                    return Err(Error::InvalidModel("no oscillator sites".into()));
                }
                for &x in sites {
                    self.grid.index_of(x)?;
                }
                potential.check_gradient_consistency()
            }
            ModelFamily::RelativisticNlw { a, m_exp, b, n_exp } => {
                if *a <= 0.0 || *b <= 0.0 || m_exp <= n_exp || *n_exp < 2 {
                    return Err(Error::InvalidModel(
                        "relativistic family needs a,b > 0 and m_exp > n_exp >= 2".into(),
                    ));
                }
                Ok(())
            }
            ModelFamily::ExternalPotential { base, .. } => self.validate_family(base),
        }
    }

    /// The polynomial `u(s)` coefficients of the distributed potential, when
    /// the family has one (Ginzburg-Landau and relativistic laws).
    pub fn distributed_potential(&self) -> Option<PolyPotential> {
        fn inner(f: &ModelFamily) -> Option<PolyPotential> {
            match f {
                ModelFamily::GinzburgLandau => Some(PolyPotential::ginzburg_landau()),
                ModelFamily::RelativisticNlw { a, m_exp, b, n_exp } => {
                    let mut u = vec![0.0; (*m_exp as usize) + 1];
                    u[*m_exp as usize] = *a;
                    u[*n_exp as usize] -= *b;
                    Some(PolyPotential::new(u))
                }
                ModelFamily::ExternalPotential { base, .. } => inner(base),
                _ => None,
            }
        }
        inner(&self.family)
    }

    /// Site indices and shared point potential for delta-coupled families.
    pub fn point_sites(&self) -> Result<Option<(Vec<usize>, PolyPotential)>> {
        fn inner(spec: &ModelSpec, f: &ModelFamily) -> Result<Option<(Vec<usize>, PolyPotential)>> {
            match f {
                ModelFamily::Lamb { potential, .. } => Ok(Some((
                    vec![spec.grid.index_of(0.0)?],
                    potential.clone(),
                ))),
                ModelFamily::KgPoint { sites, potential } => {
                    let idx: Result<Vec<usize>> =
                        sites.iter().map(|&x| spec.grid.index_of(x)).collect();
                    Ok(Some((idx?, potential.clone())))
                }
                ModelFamily::ExternalPotential { base, .. } => inner(spec, base),
                _ => Ok(None),
            }
        }
        inner(self, &self.family)
    }

    pub fn external_field(&self) -> Option<&ExternalField> {
        match &self.family {
            ModelFamily::ExternalPotential { field, .. } => Some(field),
            _ => None,
        }
    }

    pub fn lamb_point_mass(&self) -> Option<f64> {
        fn inner(f: &ModelFamily) -> Option<f64> {
            match f {
                ModelFamily::Lamb { point_mass, .. } => Some(*point_mass),
                ModelFamily::ExternalPotential { base, .. } => inner(base),
                _ => None,
            }
        }
        inner(&self.family)
    }

    pub fn chi_profile(&self) -> Option<(&BumpProfile, &PolyPotential)> {
        match &self.family {
            ModelFamily::Distributed { chi, potential } => Some((chi, potential)),
            _ => None,
        }
    }

    /// Seminorm used for convergence statements about this family.
    pub fn seminorm_variant(&self) -> SeminormVariant {
        fn inner(f: &ModelFamily) -> SeminormVariant {
            match f {
                ModelFamily::Dalembert
                | ModelFamily::Distributed { .. }
                | ModelFamily::Lamb { .. } => SeminormVariant::DAlembert,
                ModelFamily::KgPoint { .. }
                | ModelFamily::GinzburgLandau
                | ModelFamily::RelativisticNlw { .. } => SeminormVariant::KleinGordon,
                ModelFamily::ExternalPotential { base, .. } => inner(base),
            }
        }
        inner(&self.family)
    }

    /// Conserved U(1) charge; defined for complex-field models only.
    pub fn charge(&self, state: &FieldState) -> Result<f64> {
        if self.field_kind == FieldKind::Real {
            return Err(Error::RealFieldCharge);
        }
        self.check_state(state)?;
        Ok(charge_quadrature(state))
    }

    pub fn check_state(&self, state: &FieldState) -> Result<()> {
        if state.grid != self.grid {
            return Err(Error::GridMismatch(
                "state grid does not match model grid".into(),
            ));
        }
        state.validate_finite()
    }

    /// Discrete Hamiltonian of `state` under this model, split by term.
    ///
    /// Trapezoid quadrature over the grid; field gradient by centered
    /// differences (one-sided at the ends). Point terms contribute
    /// `U(psi(x_k))` plus, for the Lamb family, the lumped kinetic term
    /// `M |pi(0)|^2 / 2`.
    pub fn energy(&self, state: &FieldState) -> Result<EnergyBreakdown> {
        self.check_state(state)?;
        self.energy_on_window(state, 0, self.grid.n_points - 1)
    }

    /// Hamiltonian restricted to the window `|x| <= radius`.
    pub fn energy_in_ball(&self, state: &FieldState, radius: f64) -> Result<EnergyBreakdown> {
        self.check_state(state)?;
        let lo = self.grid.nearest_index(-radius);
        let hi = self.grid.nearest_index(radius);
        self.energy_on_window(state, lo, hi)
    }

    fn energy_on_window(&self, state: &FieldState, lo: usize, hi: usize) -> Result<EnergyBreakdown> {
        let dx = self.grid.dx();
        let grad = gradient(&state.psi, dx);

        let kin_density: Vec<f64> = state.pi[lo..=hi].iter().map(|z| 0.5 * z.norm_sqr()).collect();
        let grad_density: Vec<f64> = grad[lo..=hi].iter().map(|z| 0.5 * z.norm_sqr()).collect();
        let mut kinetic = trapezoid(&kin_density, dx);
        let gradient_term = trapezoid(&grad_density, dx);

        let mass_term = if self.mass > 0.0 {
            let d: Vec<f64> = state.psi[lo..=hi]
                .iter()
                .map(|z| 0.5 * self.mass * self.mass * z.norm_sqr())
                .collect();
            trapezoid(&d, dx)
        } else {
            0.0
        };

        let mut potential = 0.0;
        if let Some(pot) = self.distributed_potential() {
            let d: Vec<f64> = state.psi[lo..=hi].iter().map(|z| pot.potential(*z)).collect();
            potential += trapezoid(&d, dx);
        }
        if let Some((chi, pot)) = self.chi_profile() {
            let d: Vec<f64> = (lo..=hi)
                .map(|i| chi.eval(self.grid.node(i)) * pot.potential(state.psi[i]))
                .collect();
            potential += trapezoid(&d, dx);
        }
        if let Some((sites, pot)) = self.point_sites()? {
            for i in sites {
                if i >= lo && i <= hi {
                    potential += pot.potential(state.psi[i]);
                    if let Some(m) = self.lamb_point_mass() {
                        kinetic += 0.5 * m * state.pi[i].norm_sqr();
                    }
                }
            }
        }
        if let Some(field) = self.external_field() {
            let d: Vec<f64> = (lo..=hi)
                .map(|i| 0.5 * field.eval(self.grid.node(i)) * state.psi[i].norm_sqr())
                .collect();
            potential += trapezoid(&d, dx);
        }

        Ok(EnergyBreakdown::new(
            kinetic,
            gradient_term,
            mass_term,
            potential,
        ))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }
}
