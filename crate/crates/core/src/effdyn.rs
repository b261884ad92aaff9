//! Adiabatic effective dynamics of travelling solitary waves: the
//! momentum/energy chart of the boosted family, the reduced Hamiltonian ODE
//! `Qdot = v(P), Pdot = -V'(Q)`, the comparison of full and reduced
//! trajectories, and the scalar utilities for radial charge densities
//! (effective-mass increment and the nonvanishing-transform check).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::FieldState;
#[cfg(test)]
use crate::grid::Grid1D;
use crate::integrator::RunRecord;
use crate::model::{ExternalField, ModelSpec};
use crate::numeric::{bisect, gradient, trapezoid, MonotoneCubic};
use crate::profiles::{soliton_boost, soliton_profile};

/// Field momentum `P = -Re ∫ conj(pi) psi' dx`. The sign makes the momentum
/// of a right-moving boosted profile positive.
pub fn field_momentum(state: &FieldState) -> f64 {
    let grad = gradient(&state.psi, state.grid.dx());
    let density: Vec<f64> = state
        .pi
        .iter()
        .zip(&grad)
        .map(|(p, g)| -(p.conj() * g).re)
        .collect();
    trapezoid(&density, state.grid.dx())
}

/// Center of the field by the |psi|^2-weighted coordinate mean.
pub fn centroid(state: &FieldState) -> f64 {
    let dx = state.grid.dx();
    let weights: Vec<f64> = state.psi.iter().map(|z| z.norm_sqr()).collect();
    let mass = trapezoid(&weights, dx);
    if mass == 0.0 {
        return 0.0;
    }
    let weighted: Vec<f64> = state
        .grid
        .coords()
        .zip(&weights)
        .map(|(x, w)| x * w)
        .collect();
    trapezoid(&weighted, dx) / mass
}

/// Tabulated boosted family at fixed rest frequency: velocity vs field
/// momentum and energy, with monotone inverses for the reduced dynamics.
#[derive(Debug, Clone)]
pub struct SolitonChart {
    pub omega0: f64,
    pub v_grid: Vec<f64>,
    pub p_of_v: Vec<f64>,
    pub e_of_v: Vec<f64>,
    v_of_p: MonotoneCubic,
    e_of_p: MonotoneCubic,
}

impl SolitonChart {
    /// Velocity at momentum `p` through the direct monotone inverse of the
    /// tabulated `P(v)` (exact at the chart knots).
    pub fn velocity_at(&self, p: f64) -> Result<f64> {
        self.v_of_p
            .eval(p)
            .map_err(|_| Error::OutOfRange {
                value: p,
                lo: self.p_of_v[0],
                hi: *self.p_of_v.last().unwrap(),
            })
    }

    pub fn energy_at(&self, p: f64) -> Result<f64> {
        self.e_of_p.eval(p).map_err(|_| Error::OutOfRange {
            value: p,
            lo: self.p_of_v[0],
            hi: *self.p_of_v.last().unwrap(),
        })
    }

    /// `dE/dP` from the energy interpolant itself. The reduced flow uses
    /// this derivative so that `E(P) + V(Q)` is an exact invariant of the
    /// continuous reduced system; the agreement with [`velocity_at`] is the
    /// dispersion-identity check, not an assumption.
    pub fn dedp_at(&self, p: f64) -> Result<f64> {
        self.e_of_p
            .eval_derivative(p)
            .map_err(|_| Error::OutOfRange {
                value: p,
                lo: self.p_of_v[0],
                hi: *self.p_of_v.last().unwrap(),
            })
    }

    /// Rest mass `M0 = lim_{v->0} P(v)/v`.
    pub fn rest_mass(&self) -> f64 {
        // Smallest positive grid velocity.
        let mut best = (f64::INFINITY, 0.0);
        for (v, p) in self.v_grid.iter().zip(&self.p_of_v) {
            if *v > 0.0 && *v < best.0 {
                best = (*v, p / v);
            }
        }
        best.1
    }

    /// `E''(P)` at rest from the tabulated points around `v = 0`.
    pub fn rest_curvature(&self) -> f64 {
        let i0 = self
            .v_grid
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let (pm, p0, pp) = (
            self.p_of_v[i0 - 1],
            self.p_of_v[i0],
            self.p_of_v[i0 + 1],
        );
        let (em, e0, ep) = (
            self.e_of_v[i0 - 1],
            self.e_of_v[i0],
            self.e_of_v[i0 + 1],
        );
        2.0 * ((ep - e0) / (pp - p0) - (e0 - em) / (p0 - pm)) / (pp - pm)
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["v", "P", "E"])?;
        for i in 0..self.v_grid.len() {
            w.serialize((self.v_grid[i], self.p_of_v[i], self.e_of_v[i]))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Boost the rest profile across `v_grid`, evaluate field momentum and
/// energy by quadrature, and build the monotone inverse `P -> v`.
pub fn build_chart(model: &ModelSpec, omega0: f64, v_grid: &[f64]) -> Result<SolitonChart> {
    if v_grid.len() < 5 || v_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "velocity grid must be increasing with at least 5 entries".into(),
        ));
    }
    if v_grid.iter().any(|v| v.abs() > 0.9) {
        return Err(Error::InvalidInput(
            "velocity grid must stay within |v| <= 0.9".into(),
        ));
    }
    let profile = soliton_profile(model, omega0, model.grid)?;
    let mut p_of_v = Vec::with_capacity(v_grid.len());
    let mut e_of_v = Vec::with_capacity(v_grid.len());
    for &v in v_grid {
        let state = soliton_boost(&profile, v, 0.0, model.grid)?;
        p_of_v.push(field_momentum(&state));
        e_of_v.push(model.energy(&state)?.total);
    }
    if p_of_v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidModel(
            "field momentum is not increasing across the velocity grid".into(),
        ));
    }
    let v_of_p = MonotoneCubic::new(p_of_v.clone(), v_grid.to_vec())?;
    let e_of_p = MonotoneCubic::new(p_of_v.clone(), e_of_v.clone())?;
    Ok(SolitonChart {
        omega0,
        v_grid: v_grid.to_vec(),
        p_of_v,
        e_of_v,
        v_of_p,
        e_of_p,
    })
}

/// Evenly spaced velocity grid for chart building.
pub fn velocity_grid(v_max: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| -v_max + 2.0 * v_max * k as f64 / (n - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveState {
    pub q: f64,
    pub p: f64,
}

/// Leapfrog integration of the reduced Hamiltonian system
/// `Qdot = dE/dP, Pdot = -V'(Q)`; errors out if the momentum leaves the
/// chart range.
pub fn integrate_effective(
    chart: &SolitonChart,
    field: &ExternalField,
    s0: EffectiveState,
    t_final: f64,
    dt: f64,
) -> Result<Vec<(f64, EffectiveState)>> {
    let n = (t_final / dt).round() as usize;
    let mut out = Vec::with_capacity(n + 1);
    let mut q = s0.q;
    let mut p = s0.p;
    out.push((0.0, EffectiveState { q, p }));
    for k in 0..n {
        let p_half = p - 0.5 * dt * field.gradient(q);
        q += dt * chart.dedp_at(p_half)?;
        p = p_half - 0.5 * dt * field.gradient(q);
        out.push(((k + 1) as f64 * dt, EffectiveState { q, p }));
    }
    Ok(out)
}

/// Deviation report between a full run and the reduced trajectory. The
/// comparison horizon is `min(run length, 1/epsilon)`, with `epsilon` the
/// external-potential amplitude.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdiabaticReport {
    pub epsilon: f64,
    pub t_horizon: f64,
    pub max_q_dev: f64,
    pub max_p_dev: f64,
    /// (t, q_full, q_reduced, p_full, p_reduced) samples inside the horizon.
    pub samples: Vec<(f64, f64, f64, f64, f64)>,
    pub soliton_lost: bool,
}

/// Track the full run's soliton (centroid and field momentum per snapshot)
/// against the reduced trajectory. Reports deviations; imposes no pass/fail.
pub fn compare_adiabatic(
    run: &RunRecord,
    reduced: &[(f64, EffectiveState)],
    epsilon: f64,
) -> Result<AdiabaticReport> {
    if run.snapshots.is_empty() || reduced.len() < 2 {
        return Err(Error::InvalidInput(
            "adiabatic comparison needs snapshots and a reduced trajectory".into(),
        ));
    }
    let t_horizon = if epsilon > 0.0 {
        run.t_final.min(1.0 / epsilon)
    } else {
        run.t_final
    };
    let rdt = reduced[1].0 - reduced[0].0;
    let mut samples = Vec::new();
    let mut max_q: f64 = 0.0;
    let mut max_p: f64 = 0.0;
    let mut soliton_lost = false;
    for snap in &run.snapshots {
        if snap.time > t_horizon + 1e-9 {
            break;
        }
        let idx = (snap.time / rdt).round() as usize;
        if idx >= reduced.len() {
            break;
        }
        let q_full = centroid(snap);
        let p_full = field_momentum(snap);
        // A vanished or dispersed hump has no meaningful centroid.
        let peak = snap.psi.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        if peak < 0.1 {
            soliton_lost = true;
        }
        let r = reduced[idx].1;
        max_q = max_q.max((q_full - r.q).abs());
        max_p = max_p.max((p_full - r.p).abs());
        samples.push((snap.time, q_full, r.q, p_full, r.p));
    }
    Ok(AdiabaticReport {
        epsilon,
        t_horizon,
        max_q_dev: max_q,
        max_p_dev: max_p,
        samples,
        soliton_lost,
    })
}

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Radial Fourier transform `rho_hat(k) = (4 pi / k) ∫ r sin(kr) rho(r) dr`
/// (the 3D transform of a radial density), with the `k -> 0` limit
/// `4 pi ∫ r^2 rho dr`.
pub fn radial_fourier(r: &[f64], rho: &[f64], k: f64) -> f64 {
    assert_eq!(r.len(), rho.len());
    let dr = r[1] - r[0];
    if k.abs() < 1e-12 {
        let vals: Vec<f64> = r.iter().zip(rho).map(|(ri, di)| ri * ri * di).collect();
        return FOUR_PI * trapezoid(&vals, dr);
    }
    let vals: Vec<f64> = r
        .iter()
        .zip(rho)
        .map(|(ri, di)| ri * (k * ri).sin() * di)
        .collect();
    FOUR_PI / k * trapezoid(&vals, dr)
}

/// Effective-mass increment of a slow travelling source with radial density
/// `rho`: `m_e = -(1/3) <rho, Laplace^{-1} rho>`, evaluated on the Fourier
/// side as `m_e = (1/(6 pi^2)) ∫_0^inf |rho_hat(k)|^2 dk`.
pub fn effective_mass_increment(r: &[f64], rho: &[f64]) -> Result<f64> {
    validate_radial(r, rho)?;
    // Adaptive k range: extend until the transform tail is negligible.
    let mut k_max = 8.0 / (r[r.len() - 1] * 0.05).max(1e-3);
    let hat0 = radial_fourier(r, rho, 0.0).abs().max(1e-300);
    for _ in 0..40 {
        if (radial_fourier(r, rho, k_max) / hat0).abs() < 1e-9 {
            break;
        }
        k_max *= 1.5;
    }
    let n_k = 4096;
    let dk = k_max / n_k as f64;
    let vals: Vec<f64> = (0..=n_k)
        .map(|j| {
            let k = j as f64 * dk;
            let h = radial_fourier(r, rho, k);
            h * h
        })
        .collect();
    Ok(trapezoid(&vals, dk) / (6.0 * std::f64::consts::PI * std::f64::consts::PI))
}

/// Real-space cross-check of [`effective_mass_increment`]:
/// `m_e = (1/3) ∫ rho Phi 4 pi r^2 dr` with `Phi = (-Laplace)^{-1} rho`
/// computed from the radial Newton kernel,
/// `Phi(r) = (1/r) ∫_0^r s^2 rho ds + ∫_r^inf s rho ds`.
pub fn effective_mass_increment_realspace(r: &[f64], rho: &[f64]) -> Result<f64> {
    validate_radial(r, rho)?;
    let n = r.len();
    let dr = r[1] - r[0];
    let s2rho: Vec<f64> = r.iter().zip(rho).map(|(s, d)| s * s * d).collect();
    let srho: Vec<f64> = r.iter().zip(rho).map(|(s, d)| s * d).collect();
    let inner = crate::numeric::cumulative_trapezoid(&s2rho, dr);
    let outer_total = trapezoid(&srho, dr);
    let outer_partial = crate::numeric::cumulative_trapezoid(&srho, dr);
    let mut integrand = vec![0.0; n];
    for i in 0..n {
        let phi = if r[i] == 0.0 {
            outer_total
        } else {
            inner[i] / r[i] + (outer_total - outer_partial[i])
        };
        integrand[i] = rho[i] * phi * FOUR_PI * r[i] * r[i];
    }
    Ok(trapezoid(&integrand, dr) / 3.0)
}

fn validate_radial(r: &[f64], rho: &[f64]) -> Result<()> {
    if r.len() != rho.len() || r.len() < 8 {
        return Err(Error::InvalidInput("radial density too short".into()));
    }
    let tail = rho[rho.len() - 1].abs();
    let peak = rho.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 && tail > 1e-6 * peak {
        return Err(Error::InvalidInput(format!(
            "radial density does not decay: tail/peak = {:.2e}",
            tail / peak
        )));
    }
    Ok(())
}

/// Result of the nonvanishing-transform check on a radial density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WienerReport {
    pub passes: bool,
    pub min_abs: f64,
    pub zeros: Vec<f64>,
}

/// Evaluate `rho_hat` on `n_k` points of [0, k_max]; the check passes iff
/// the transform never changes sign and stays above 1e-8 in magnitude.
/// Zeros are located by bisection on the sign changes.
pub fn wiener_check(r: &[f64], rho: &[f64], k_max: f64, n_k: usize) -> WienerReport {
    let mut min_abs = f64::INFINITY;
    let mut zeros = Vec::new();
    let mut prev_k = 0.0;
    let mut prev = radial_fourier(r, rho, 0.0);
    for j in 1..=n_k {
        let k = k_max * j as f64 / n_k as f64;
        let val = radial_fourier(r, rho, k);
        min_abs = min_abs.min(val.abs());
        if prev * val < 0.0 {
            if let Ok(z) = bisect(|kk| radial_fourier(r, rho, kk), prev_k, k, 1e-12) {
                zeros.push(z);
            }
        }
        prev = val;
        prev_k = k;
    }
    min_abs = min_abs.min(prev.abs());
    WienerReport {
        passes: zeros.is_empty() && min_abs > 1e-8,
        min_abs,
        zeros,
    }
}
