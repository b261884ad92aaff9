//! Closed-form constructions and reductions: free-wave long-time limits,
//! the string-oscillator reduced ODE, kink profiles and their Lorentz
//! boosts, travelling solitary-wave families, and the kink linearization
//! potential.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{FieldState, Grid1D};
use crate::model::{ModelFamily, ModelSpec, PolyPotential};
use crate::numeric::{bisect, trapezoid};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Long-time limits of the free wave equation for data with constant tails:
/// `S_pm = (C_+ + C_-)/2 ± (1/2) ∫ pi dy`. The asymptotic constants are read
/// from the outermost 5% of grid nodes on each side (averaged).
pub fn dalembert_limits(state: &FieldState) -> (f64, f64) {
    let n = state.grid.n_points;
    let tail = (n / 20).max(1);
    let c_minus: f64 = state.psi[..tail].iter().map(|z| z.re).sum::<f64>() / tail as f64;
    let c_plus: f64 =
        state.psi[n - tail..].iter().map(|z| z.re).sum::<f64>() / tail as f64;
    let pi_re: Vec<f64> = state.pi.iter().map(|z| z.re).collect();
    let integral = trapezoid(&pi_re, state.grid.dx());
    let mean = 0.5 * (c_plus + c_minus);
    (mean + 0.5 * integral, mean - 0.5 * integral)
}

/// Solution of the reduced oscillator equation of the string-oscillator
/// system: `M ydd = F(y) - 2 ydot + 2 w_in_dot(t)`.
#[derive(Debug, Clone)]
pub struct ReducedTrajectory {
    pub times: Vec<f64>,
    pub y: Vec<f64>,
    pub ydot: Vec<f64>,
}

/// Integrate the reduced oscillator ODE with velocity-Verlet; the linear
/// damping is handled by an implicit midpoint (trapezoidal) velocity update,
/// which keeps the scheme second order.
///
/// `w_in_dot` must be sampled at `t = 0, dt, 2dt, ...` and cover `t_final`.
pub fn solve_lamb_reduced(
    model: &ModelSpec,
    y0: f64,
    v0: f64,
    w_in_dot: &[f64],
    t_final: f64,
    dt: f64,
) -> Result<ReducedTrajectory> {
    let (point_mass, potential) = match &model.family {
        ModelFamily::Lamb {
            point_mass,
            potential,
        } => (*point_mass, potential),
        _ => {
            return Err(Error::InvalidModel(
                "reduced oscillator solve needs a string-oscillator model".into(),
            ))
        }
    };
    let n = (t_final / dt).round() as usize;
    if w_in_dot.len() < n + 1 {
        return Err(Error::InvalidInput(format!(
            "w_in_dot has {} samples, need {}",
            w_in_dot.len(),
            n + 1
        )));
    }
    let force = |y: f64| potential.force(Complex64::new(y, 0.0)).re;
    let m = point_mass;
    let mut y = y0;
    let mut v = v0;
    let mut times = Vec::with_capacity(n + 1);
    let mut ys = Vec::with_capacity(n + 1);
    let mut vs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        times.push(k as f64 * dt);
        ys.push(y);
        vs.push(v);
        if k == n {
            break;
        }
        let a0 = (force(y) - 2.0 * v + 2.0 * w_in_dot[k]) / m;
        let y1 = y + dt * v + 0.5 * dt * dt * a0;
        // v1 = v + dt/2 [a0 + (F(y1) - 2 v1 + 2 w1)/m], linear in v1.
        let rhs = v + 0.5 * dt * (a0 + (force(y1) + 2.0 * w_in_dot[k + 1]) / m);
        let v1 = rhs / (1.0 + dt / m);
        if !y1.is_finite() || y1.abs() > crate::integrator::BLOWUP_GUARD {
            return Err(Error::BlowUp {
                t: (k + 1) as f64 * dt,
                max: y1.abs(),
            });
        }
        y = y1;
        v = v1;
    }
    Ok(ReducedTrajectory {
        times,
        y: ys,
        ydot: vs,
    })
}

/// Standing kink `psi = tanh((x - x0)/sqrt 2)`, `pi = 0`.
pub fn kink_profile(grid: Grid1D, x0: f64) -> FieldState {
    FieldState::from_real_fn(grid, |x| ((x - x0) / SQRT2).tanh(), |_| 0.0)
}

/// Lorentz-boosted kink: `psi = tanh(gamma (x - x0)/sqrt 2)`,
/// `pi = -v d_x psi` (the t = 0 slice of the travelling wave).
pub fn kink_boost(grid: Grid1D, x0: f64, v: f64) -> Result<FieldState> {
    if v.abs() >= 1.0 {
        return Err(Error::SuperluminalBoost(v));
    }
    let gamma = 1.0 / (1.0 - v * v).sqrt();
    let dpsi = move |x: f64| {
        let arg = gamma * (x - x0) / SQRT2;
        let sech = 1.0 / arg.cosh();
        gamma / SQRT2 * sech * sech
    };
    Ok(FieldState::from_real_fn(
        grid,
        move |x| (gamma * (x - x0) / SQRT2).tanh(),
        move |x| -v * dpsi(x),
    ))
}

/// Shape of the kink's discrete internal oscillation mode,
/// `chi(x) ∝ tanh((x-x0)/sqrt 2) sech((x-x0)/sqrt 2)` (unit peak value).
pub fn kink_mode_shape(grid: Grid1D, x0: f64) -> Vec<f64> {
    // tanh * sech peaks at 1/2.
    grid.coords()
        .map(|x| {
            let a = (x - x0) / SQRT2;
            2.0 * a.tanh() / a.cosh()
        })
        .collect()
}

/// Kink linearization potential `V(x) = -3 / cosh^2(x / sqrt 2)`.
pub fn gl_linearization_potential(grid: Grid1D) -> Vec<f64> {
    grid.coords()
        .map(|x| {
            let c = (x / SQRT2).cosh();
            -3.0 / (c * c)
        })
        .collect()
}

/// Standing solitary-wave profile of a relativistic law at frequency omega:
/// the even positive solution of `phi'' = (m^2 - omega^2) phi - F(phi)`.
#[derive(Debug, Clone)]
pub struct SolitonProfile {
    pub omega: f64,
    pub amplitude: f64,
    /// Tail decay exponent `sqrt(m^2 - omega^2)`.
    pub decay_rate: f64,
    /// Samples of the even profile on the construction grid.
    pub samples: Vec<f64>,
    /// Dense uniform table of (phi, phi') on x >= 0, spacing `h`.
    h: f64,
    phi: Vec<f64>,
    dphi: Vec<f64>,
}

impl SolitonProfile {
    /// Evaluate the profile at signed offset `xi`: even continuation, cubic
    /// Hermite between table points (value and slope are both tabulated so
    /// the interpolant is C1 and locally quartic-accurate), exponential tail
    /// beyond the table.
    pub fn eval(&self, xi: f64) -> f64 {
        let x = xi.abs();
        let n = self.phi.len();
        let s = x / self.h;
        if s >= (n - 1) as f64 {
            let x_end = (n - 1) as f64 * self.h;
            return self.phi[n - 1] * (-self.decay_rate * (x - x_end)).exp();
        }
        let i = s.floor() as usize;
        let t = s - i as f64;
        let (y0, y1) = (self.phi[i], self.phi[i + 1]);
        let (m0, m1) = (self.dphi[i] * self.h, self.dphi[i + 1] * self.h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1
    }

    /// Signed-derivative variant of [`eval`] (odd in `xi`).
    pub fn eval_slope(&self, xi: f64) -> f64 {
        let x = xi.abs();
        let n = self.phi.len();
        let s = x / self.h;
        let inner = if s >= (n - 1) as f64 {
            let x_end = (n - 1) as f64 * self.h;
            -self.decay_rate * self.phi[n - 1] * (-self.decay_rate * (x - x_end)).exp()
        } else {
            let i = s.floor() as usize;
            let t = s - i as f64;
            let (y0, y1) = (self.phi[i], self.phi[i + 1]);
            let (m0, m1) = (self.dphi[i] * self.h, self.dphi[i + 1] * self.h);
            let t2 = t * t;
            ((6.0 * t2 - 6.0 * t) * y0
                + (3.0 * t2 - 4.0 * t + 1.0) * m0
                + (-6.0 * t2 + 6.0 * t) * y1
                + (3.0 * t2 - 2.0 * t) * m1)
                / self.h
        };
        if xi >= 0.0 {
            inner
        } else {
            -inner
        }
    }
}

/// Effective energy function `G(phi) = (m^2 - omega^2) phi^2 / 2 + U(phi)`
/// whose positive hump supplies `phi'^2 / 2 = G(phi)` along the profile.
fn energy_function(pot: &PolyPotential, kappa_sq: f64, phi: f64) -> f64 {
    0.5 * kappa_sq * phi * phi + pot.potential(Complex64::new(phi, 0.0))
}

/// Construct the solitary profile of a relativistic model at `omega`
/// (`omega^2 < m^2`). The amplitude solves `G(phi_max) = 0` by bisection to
/// 1e-12 of the bracket; the shape is then marched outward from the peak by
/// RK4 on `phi'' = G'(phi)` with a substep that lands exactly on the grid
/// nodes, handing off to the exponential tail once the profile falls below
/// 1e-3 of the amplitude (the nonlinearity is far below round-off there).
pub fn soliton_profile(model: &ModelSpec, omega: f64, grid: Grid1D) -> Result<SolitonProfile> {
    let pot = model.distributed_potential().ok_or_else(|| {
        Error::InvalidModel("solitary profiles need a distributed nonlinearity".into())
    })?;
    if !matches!(
        model.family,
        ModelFamily::RelativisticNlw { .. } | ModelFamily::ExternalPotential { .. }
    ) {
        return Err(Error::InvalidModel(
            "solitary profiles are defined for the relativistic family".into(),
        ));
    }
    let kappa_sq = model.mass * model.mass - omega * omega;
    if kappa_sq <= 0.0 {
        return Err(Error::NoHomoclinic(format!(
            "omega^2 = {} is not inside the spectral gap (m = {})",
            omega * omega,
            model.mass
        )));
    }
    let g = |phi: f64| energy_function(&pot, kappa_sq, phi);

    // Scan outward for the first sign change of G beyond phi = 0.
    let scan_step = 1e-3;
    let mut hi = scan_step;
    let mut found = None;
    while hi < 1e3 {
        if g(hi) <= 0.0 {
            found = Some(hi);
            break;
        }
        hi += scan_step;
    }
    let hi = found.ok_or_else(|| {
        Error::NoHomoclinic("energy function has no positive zero; no turning amplitude".into())
    })?;
    let amplitude = bisect(g, hi - scan_step, hi, 1e-12 * hi)?;
    // Validate the hump: G > 0 strictly between 0 and the amplitude.
    for k in 1..400 {
        let phi = amplitude * k as f64 / 400.0;
        if g(phi) <= 0.0 {
            return Err(Error::NoHomoclinic(format!(
                "energy function dips nonpositive at phi = {phi}"
            )));
        }
    }

    // March phi'' = G'(phi) outward from (A, 0). The substep divides dx so
    // every node value is a table entry, never an interpolant.
    let n_sub = 8 * ((grid.dx() / 0.01).round().max(1.0) as usize);
    let h = grid.dx() / n_sub as f64;
    let g_prime = |phi: f64| kappa_sq * phi + 2.0 * phi * pot.du1(phi * phi);
    let floor = 1e-3 * amplitude;
    let mut phi = vec![amplitude];
    let mut dphi = vec![0.0];
    let (mut y, mut v) = (amplitude, 0.0);
    loop {
        let k1 = (v, g_prime(y));
        let k2 = (v + 0.5 * h * k1.1, g_prime(y + 0.5 * h * k1.0));
        let k3 = (v + 0.5 * h * k2.1, g_prime(y + 0.5 * h * k2.0));
        let k4 = (v + h * k3.1, g_prime(y + h * k3.0));
        y += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if y <= floor || v > 0.0 || y < 0.0 {
            break;
        }
        phi.push(y);
        dphi.push(v);
        if phi.len() > 40_000_000 {
            return Err(Error::NoHomoclinic("profile march did not terminate".into()));
        }
    }

    let mut profile = SolitonProfile {
        omega,
        amplitude,
        decay_rate: kappa_sq.sqrt(),
        samples: Vec::new(),
        h,
        phi,
        dphi,
    };
    profile.samples = grid.coords().map(|x| profile.eval(x)).collect();
    Ok(profile)
}

/// The t = 0 slice of the boosted travelling solitary wave
///
/// ```text
///   psi(x, t) = phi(gamma (x - v t - x0)) exp(-i gamma omega (t - v x))
/// ```
///
/// so that at rest (`v = 0`) `psi = phi(x - x0)` and `pi = -i omega psi`.
/// The phase convention is fixed by the residual test against the evolution
/// law rather than by any external reference.
pub fn soliton_boost(
    profile: &SolitonProfile,
    v: f64,
    x0: f64,
    grid: Grid1D,
) -> Result<FieldState> {
    if v.abs() >= 1.0 {
        return Err(Error::SuperluminalBoost(v));
    }
    let gamma = 1.0 / (1.0 - v * v).sqrt();
    let omega = profile.omega;
    let state = FieldState::from_complex_fn(
        grid,
        |x| {
            let phase = Complex64::from_polar(1.0, gamma * omega * v * x);
            phase * profile.eval(gamma * (x - x0))
        },
        |x| {
            let phase = Complex64::from_polar(1.0, gamma * omega * v * x);
            // d/dt at t=0: (-v gamma phi' - i gamma omega phi) e^{i gamma omega v x}
            let dphi = profile.eval_slope(gamma * (x - x0));
            phase
                * Complex64::new(
                    -v * gamma * dphi,
                    -gamma * omega * profile.eval(gamma * (x - x0)),
                )
        },
    );
    Ok(state)
}
