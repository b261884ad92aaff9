//! Semi-analytic solver for the 3D wave field coupled to an oscillator
//! concentrated at the origin:
//!
//! ```text
//!   psidd = Laplace psi + zeta(t) delta(x),
//!   lim_{x->0} (psi(x,t) - zeta(t) G(x)) = F(zeta(t)),   G = 1/(4 pi |x|),
//! ```
//!
//! with `F = U'` for a confining scalar potential `U`. The solution splits
//! into the free-wave evolution of the initial data plus a spherical wave
//! carrying the point amplitude:
//!
//! ```text
//!   psi = psi_f + theta(t - r) zeta(t - r) / (4 pi r),
//! ```
//!
//! where `zeta` obeys the ODE `(1/4pi) zetadot + F(zeta) = lambda(t)` driven
//! by the free field's trace at the origin. Everything is exact in time up
//! to the data horizon; only radial quadratures and the ODE step discretize.

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bisect, cumulative_trapezoid, gradient_real, sample_uniform, trapezoid};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Uniform radial grid `r_i = i dr` on [0, r_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_max: f64,
    pub n_points: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_max > 0.0) || n_points < 3 {
            return Err(Error::InvalidGrid(format!(
                "radial grid r_max {r_max}, n {n_points}"
            )));
        }
        Ok(Self { r_max, n_points })
    }

    /// Construction at resolution `dr` (default experiments use 1e-2).
    pub fn with_dr(r_max: f64, dr: f64) -> Result<Self> {
        let n = (r_max / dr).round() as usize + 1;
        Self::new(r_max, n)
    }

    pub fn dr(&self) -> f64 {
        self.r_max / (self.n_points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.r_max * i as f64 / (self.n_points - 1) as f64
    }

    pub fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.node(i))
    }
}

/// Scalar potential `U(zeta) = sum_j coeffs[j] zeta^j` with force `F = U'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarPotential {
    pub coeffs: Vec<f64>,
}

impl ScalarPotential {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// The double well `U = zeta^4/4 - zeta^2/2`, `F = zeta^3 - zeta`.
    pub fn double_well() -> Self {
        Self::new(vec![0.0, 0.0, -0.5, 0.0, 0.25])
    }

    pub fn potential(&self, z: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn force(&self, z: f64) -> f64 {
        let mut acc = 0.0;
        for (j, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * z + j as f64 * c;
        }
        acc
    }

    pub fn is_confining(&self) -> bool {
        match self.coeffs.iter().rposition(|&c| c != 0.0) {
            Some(j) if j >= 2 && j % 2 == 0 => self.coeffs[j] > 0.0,
            _ => false,
        }
    }

    /// Zeros of the force inside [-bound, bound], by sign-change bisection.
    pub fn force_zeros(&self, bound: f64) -> Vec<f64> {
        let n = 4096;
        let mut zeros = Vec::new();
        let mut prev = -bound;
        let mut fprev = self.force(prev);
        for k in 1..=n {
            let z = -bound + 2.0 * bound * k as f64 / n as f64;
            let f = self.force(z);
            if fprev == 0.0 {
                zeros.push(prev);
            } else if fprev * f < 0.0 {
                if let Ok(root) = bisect(|y| self.force(y), prev, z, 1e-14) {
                    zeros.push(root);
                }
            }
            prev = z;
            fprev = f;
        }
        zeros
    }
}

/// Initial data: regular radial parts plus the singular pair
/// `(zeta0 G, eta0 G)`.
#[derive(Debug, Clone)]
pub struct RadialInitialData {
    pub grid: RadialGrid,
    pub psi0_reg: Vec<f64>,
    pub pi0_reg: Vec<f64>,
    pub zeta0: f64,
    pub eta0: f64,
}

impl RadialInitialData {
    pub fn new(
        grid: RadialGrid,
        psi0_reg: Vec<f64>,
        pi0_reg: Vec<f64>,
        zeta0: f64,
        eta0: f64,
    ) -> Result<Self> {
        if psi0_reg.len() != grid.n_points || pi0_reg.len() != grid.n_points {
            return Err(Error::GridMismatch(
                "radial arrays do not match the radial grid".into(),
            ));
        }
        if !(psi0_reg.iter().all(|v| v.is_finite())
            && pi0_reg.iter().all(|v| v.is_finite())
            && zeta0.is_finite()
            && eta0.is_finite())
        {
            return Err(Error::NonFinite("radial initial data".into()));
        }
        // Tail decay: the outermost 1% of nodes must sit below 1e-8.
        let tail_start = grid.n_points - (grid.n_points / 100).max(1);
        let tail_max = psi0_reg[tail_start..]
            .iter()
            .chain(&pi0_reg[tail_start..])
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if tail_max > 1e-8 {
            return Err(Error::InvalidInput(format!(
                "regular data does not decay at r_max (tail max {tail_max:.2e})"
            )));
        }
        Ok(Self {
            grid,
            psi0_reg,
            pi0_reg,
            zeta0,
            eta0,
        })
    }

    pub fn from_fn(
        grid: RadialGrid,
        psi: impl Fn(f64) -> f64,
        pi: impl Fn(f64) -> f64,
        zeta0: f64,
        eta0: f64,
    ) -> Result<Self> {
        Self::new(
            grid,
            grid.coords().map(&psi).collect(),
            grid.coords().map(&pi).collect(),
            zeta0,
            eta0,
        )
    }

    /// CSV `r,psi0_reg,pi0_reg` plus JSON sidecar `{zeta0, eta0}`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["r", "psi0_reg", "pi0_reg"])?;
        for (i, r) in self.grid.coords().enumerate() {
            w.serialize((r, self.psi0_reg[i], self.pi0_reg[i]))?;
        }
        w.flush()?;
        let sidecar = serde_json::json!({"zeta0": self.zeta0, "eta0": self.eta0});
        let mut f = std::fs::File::create(path.with_extension("json"))?;
        f.write_all(serde_json::to_string_pretty(&sidecar)?.as_bytes())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let sidecar: serde_json::Value =
            serde_json::from_reader(std::fs::File::open(path.with_extension("json"))?)?;
        let zeta0 = sidecar["zeta0"]
            .as_f64()
            .ok_or_else(|| Error::InvalidInput("sidecar missing zeta0".into()))?;
        let eta0 = sidecar["eta0"]
            .as_f64()
            .ok_or_else(|| Error::InvalidInput("sidecar missing eta0".into()))?;
        let mut r = csv::Reader::from_path(path)?;
        let mut rs = Vec::new();
        let mut psi = Vec::new();
        let mut pi = Vec::new();
        for rec in r.deserialize() {
            let (rr, p, q): (f64, f64, f64) = rec?;
            rs.push(rr);
            psi.push(p);
            pi.push(q);
        }
        let grid = RadialGrid::new(*rs.last().unwrap_or(&0.0), rs.len())?;
        Self::new(grid, psi, pi, zeta0, eta0)
    }
}

/// Point-amplitude history with the driving trace and the force zeros it can
/// settle on.
#[derive(Debug, Clone)]
pub struct ZetaTrajectory {
    pub times: Vec<f64>,
    pub zeta: Vec<f64>,
    pub lambda: Vec<f64>,
    pub targets: Vec<f64>,
}

impl ZetaTrajectory {
    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn t_final(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn zeta_at(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t > self.t_final() + 1e-12 {
            return Err(Error::TrajectoryCoverage(t));
        }
        Ok(sample_uniform(0.0, self.dt(), &self.zeta, t))
    }

    pub fn lambda_at(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t > self.t_final() + 1e-12 {
            return Err(Error::TrajectoryCoverage(t));
        }
        Ok(sample_uniform(0.0, self.dt(), &self.lambda, t))
    }

    /// `zetadot = 4 pi (lambda - F(zeta))`, evaluated from the stored traces.
    pub fn zeta_dot_at(&self, force: &ScalarPotential, t: f64) -> Result<f64> {
        Ok(FOUR_PI * (self.lambda_at(t)? - force.force(self.zeta_at(t)?)))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "zeta", "lambda"])?;
        for i in 0..self.times.len() {
            w.serialize((self.times[i], self.zeta[i], self.lambda[i]))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Odd/even extensions of the radial data used by the spherical-means
/// formulas: `W(s) = s psi0(|s|) sign(s)` (odd), its derivative (even), the
/// momentum analogue `V`, and the even antiderivative `IV(s) = int_0^s V`.
struct RadialTables {
    dr: f64,
    w: Vec<f64>,
    dw: Vec<f64>,
    v: Vec<f64>,
    iv: Vec<f64>,
}

impl RadialTables {
    fn new(data: &RadialInitialData) -> Self {
        let dr = data.grid.dr();
        let w: Vec<f64> = data
            .grid
            .coords()
            .zip(&data.psi0_reg)
            .map(|(r, p)| r * p)
            .collect();
        // d/ds [s psi0(s)] = psi0 + s psi0'; radial derivative by centered
        // differences, one-sided at the ends.
        let dpsi = gradient_real(&data.psi0_reg, dr);
        let dw: Vec<f64> = data
            .grid
            .coords()
            .enumerate()
            .map(|(i, r)| data.psi0_reg[i] + r * dpsi[i])
            .collect();
        let v: Vec<f64> = data
            .grid
            .coords()
            .zip(&data.pi0_reg)
            .map(|(r, p)| r * p)
            .collect();
        let iv = cumulative_trapezoid(&v, dr);
        Self { dr, w, dw, v, iv }
    }

    /// Odd extension, clamped to the (tiny) boundary value beyond the table.
    fn w_at(&self, s: f64) -> f64 {
        let a = s.abs();
        let val = sample_uniform(0.0, self.dr, &self.w, a);
        if s >= 0.0 {
            val
        } else {
            -val
        }
    }

    fn dw_at(&self, s: f64) -> f64 {
        sample_uniform(0.0, self.dr, &self.dw, s.abs())
    }

    fn v_at(&self, s: f64) -> f64 {
        let val = sample_uniform(0.0, self.dr, &self.v, s.abs());
        if s >= 0.0 {
            val
        } else {
            -val
        }
    }

    /// Even antiderivative of the odd `V`.
    fn iv_at(&self, s: f64) -> f64 {
        sample_uniform(0.0, self.dr, &self.iv, s.abs())
    }
}

/// Trace of the free-wave evolution of the initial data at the origin:
///
/// `lambda(t) = t pi0(t) + psi0(t) + t psi0'(t) + eta0 / 4 pi`,
///
/// the spherical means of the regular data collapsing to point values at the
/// origin, plus the constant limit of the singular part.
pub fn lambda_trace(data: &RadialInitialData, tgrid: &[f64]) -> Result<Vec<f64>> {
    let r_max = data.grid.r_max;
    if let Some(&bad) = tgrid.iter().find(|&&t| t < 0.0 || t >= r_max) {
        return Err(Error::OutOfRange {
            value: bad,
            lo: 0.0,
            hi: r_max,
        });
    }
    let tables = RadialTables::new(data);
    let dr = data.grid.dr();
    Ok(tgrid
        .iter()
        .map(|&t| {
            let pi0 = sample_uniform(0.0, dr, &data.pi0_reg, t);
            // psi0 + t psi0' = d/ds[s psi0]|_{s=t}
            t * pi0 + tables.dw_at(t) + data.eta0 / FOUR_PI
        })
        .collect())
}

/// Supremum of |zeta| allowed by the conserved energy: the largest |z| with
/// `U(z) <= energy`. Needs a confining potential.
pub fn zeta_apriori_bound(potential: &ScalarPotential, energy: f64) -> Result<f64> {
    if !potential.is_confining() {
        return Err(Error::InvalidModel(
            "a priori bound needs a confining potential".into(),
        ));
    }
    let mut hi = 1.0;
    while potential.potential(hi) <= energy || potential.potential(-hi) <= energy {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::InvalidInput("energy bound search diverged".into()));
        }
    }
    let side = |sign: f64| -> f64 {
        let f = |z: f64| potential.potential(sign * z) - energy;
        if f(0.0) > 0.0 {
            return 0.0;
        }
        bisect(f, 0.0, hi, 1e-12).unwrap_or(0.0)
    };
    Ok(side(1.0).max(side(-1.0)))
}

/// Integrate `zetadot = 4 pi (lambda(t) - F(zeta))` with classical RK4 on
/// the uniform `tgrid` (midpoint forcing by linear interpolation). The
/// a priori bound `zeta_bound` acts as a guard: the exact flow cannot cross
/// it, so exceeding twice its value signals a misconfigured integration.
pub fn solve_zeta(
    force: &ScalarPotential,
    tgrid: &[f64],
    lambda: &[f64],
    zeta0: f64,
    zeta_bound: f64,
) -> Result<ZetaTrajectory> {
    if tgrid.len() != lambda.len() || tgrid.len() < 2 {
        return Err(Error::InvalidInput(
            "time grid and forcing must match and hold at least two samples".into(),
        ));
    }
    let dt = tgrid[1] - tgrid[0];
    let mut zeta = Vec::with_capacity(tgrid.len());
    let mut z = zeta0;
    zeta.push(z);
    for k in 0..tgrid.len() - 1 {
        let (l0, l1) = (lambda[k], lambda[k + 1]);
        let lm = 0.5 * (l0 + l1);
        let f = |zv: f64, l: f64| FOUR_PI * (l - force.force(zv));
        let k1 = f(z, l0);
        let k2 = f(z + 0.5 * dt * k1, lm);
        let k3 = f(z + 0.5 * dt * k2, lm);
        let k4 = f(z + dt * k3, l1);
        z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !z.is_finite() || z.abs() > 2.0 * zeta_bound.max(1.0) {
            return Err(Error::BlowUp {
                t: tgrid[k + 1],
                max: z.abs(),
            });
        }
        zeta.push(z);
    }
    let targets = force.force_zeros(zeta_bound.max(1.0));
    Ok(ZetaTrajectory {
        times: tgrid.to_vec(),
        zeta,
        lambda: lambda.to_vec(),
        targets,
    })
}

/// Convenience pipeline: forcing trace, energy bound and point-amplitude
/// trajectory in one call.
pub fn solve_point3d(
    data: &RadialInitialData,
    potential: &ScalarPotential,
    dt: f64,
    t_final: f64,
) -> Result<ZetaTrajectory> {
    let n = (t_final / dt).round() as usize;
    let tgrid: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let lambda = lambda_trace(data, &tgrid)?;
    let h0 = initial_energy(data, potential);
    let bound = zeta_apriori_bound(potential, h0)?;
    solve_zeta(potential, &tgrid, &lambda, data.zeta0, bound)
}

struct Reconstruction<'a> {
    data: &'a RadialInitialData,
    traj: &'a ZetaTrajectory,
    tables: RadialTables,
}

impl<'a> Reconstruction<'a> {
    fn new(data: &'a RadialInitialData, traj: &'a ZetaTrajectory) -> Self {
        Self {
            data,
            traj,
            tables: RadialTables::new(data),
        }
    }

    /// Free-wave evolution of the regular radial data:
    /// `psi_f_reg(r, t) = [W(r+t) + W(r-t) + IV(r+t) - IV(r-t)] / (2 r)`.
    fn psi_f_reg(&self, r: f64, t: f64) -> f64 {
        let tb = &self.tables;
        (tb.w_at(r + t) + tb.w_at(r - t) + tb.iv_at(r + t) - tb.iv_at(r - t)) / (2.0 * r)
    }

    fn dpsi_f_reg_dt(&self, r: f64, t: f64) -> f64 {
        let tb = &self.tables;
        (tb.dw_at(r + t) - tb.dw_at(r - t) + tb.v_at(r + t) + tb.v_at(r - t)) / (2.0 * r)
    }

    /// Evolution of the singular pair `(zeta0 G, eta0 G)`: the constant
    /// `eta0/4pi` inside the light cone, `(zeta0 + eta0 t) G(r)` outside.
    fn g_part(&self, r: f64, t: f64) -> f64 {
        if r < t {
            self.data.eta0 / FOUR_PI
        } else {
            (self.data.zeta0 + self.data.eta0 * t) / (FOUR_PI * r)
        }
    }

    fn dg_dt(&self, r: f64, t: f64) -> f64 {
        if r < t {
            0.0
        } else {
            self.data.eta0 / (FOUR_PI * r)
        }
    }

    fn psi(&self, r: f64, t: f64) -> Result<f64> {
        let mut val = self.psi_f_reg(r, t) + self.g_part(r, t);
        if t > r {
            val += self.traj.zeta_at(t - r)? / (FOUR_PI * r);
        }
        Ok(val)
    }

    fn psi_dot(&self, r: f64, t: f64, force: &ScalarPotential) -> Result<f64> {
        let mut val = self.dpsi_f_reg_dt(r, t) + self.dg_dt(r, t);
        if t > r {
            val += self.traj.zeta_dot_at(force, t - r)? / (FOUR_PI * r);
        }
        Ok(val)
    }
}

/// Reconstruct the field at radii `r` (each at least one grid spacing away
/// from the origin) and time `t`, with `t + max(r)` inside the data horizon.
pub fn reconstruct_field(
    data: &RadialInitialData,
    traj: &ZetaTrajectory,
    r: &[f64],
    t: f64,
) -> Result<Vec<f64>> {
    let dr = data.grid.dr();
    let r_max = data.grid.r_max;
    for &ri in r {
        if ri < dr {
            return Err(Error::OutOfRange {
                value: ri,
                lo: dr,
                hi: r_max,
            });
        }
        if t + ri >= r_max {
            return Err(Error::TrajectoryCoverage(t + ri));
        }
    }
    if t > traj.t_final() + 1e-12 {
        return Err(Error::TrajectoryCoverage(t));
    }
    let rec = Reconstruction::new(data, traj);
    r.iter().map(|&ri| rec.psi(ri, t)).collect()
}

/// Conserved energy of the reconstructed state at time `t`:
///
/// `H = 1/2 (||psidot||^2 + ||grad psi_reg||^2) + U(zeta(t))`
///
/// by radial quadrature with weight `4 pi r^2` over the data grid, plus the
/// closed-form exterior contribution of the singular gradient tail. (With
/// `eta0 != 0` the exterior also carries an infinite, time-independent
/// kinetic term that is dropped consistently; conservation statements are
/// unaffected.) Valid while outgoing regular waves stay inside the grid,
/// i.e. for `t` plus the data support below `r_max`.
pub fn energy3d(
    data: &RadialInitialData,
    traj: &ZetaTrajectory,
    potential: &ScalarPotential,
    t: f64,
) -> Result<f64> {
    if t > traj.t_final() + 1e-12 {
        return Err(Error::TrajectoryCoverage(t));
    }
    let rec = Reconstruction::new(data, traj);
    let grid = data.grid;
    let dr = grid.dr();
    let n = grid.n_points;
    let zeta_t = traj.zeta_at(t)?;

    // psi_reg = psi - zeta(t) G on the nodes (r >= dr).
    let mut psi_reg = vec![0.0; n];
    let mut psidot = vec![0.0; n];
    for i in 1..n {
        let r = grid.node(i);
        psi_reg[i] = rec.psi(r, t)? - zeta_t / (FOUR_PI * r);
        psidot[i] = rec.psi_dot(r, t, potential)?;
    }
    // r -> 0 limits: psi_reg is finite (the boundary condition pins it to
    // F(zeta)); the kinetic integrand tends to zetadot^2 / 4pi.
    psi_reg[0] = 2.0 * psi_reg[1] - psi_reg[2];
    let zdot0 = traj.zeta_dot_at(potential, t)?;

    let dpsi_reg = gradient_real(&psi_reg, dr);
    let mut density = vec![0.0; n];
    for i in 1..n {
        let r = grid.node(i);
        density[i] = 0.5 * (psidot[i] * psidot[i] + dpsi_reg[i] * dpsi_reg[i]) * FOUR_PI * r * r;
    }
    density[0] = zdot0 * zdot0 / (2.0 * FOUR_PI);
    let mut energy = trapezoid(&density, dr) + potential.potential(zeta_t);

    // Exterior gradient tail of (zeta0 + eta0 t - zeta(t)) G beyond r_max.
    let coeff = data.zeta0 + data.eta0 * t - zeta_t;
    energy += coeff * coeff / (2.0 * FOUR_PI * grid.r_max);
    Ok(energy)
}

/// Energy of the initial state itself (same conventions as [`energy3d`]).
pub fn initial_energy(data: &RadialInitialData, potential: &ScalarPotential) -> f64 {
    let grid = data.grid;
    let dr = grid.dr();
    let n = grid.n_points;
    let dpsi = gradient_real(&data.psi0_reg, dr);
    let mut density = vec![0.0; n];
    for i in 1..n {
        let r = grid.node(i);
        let pidot = data.pi0_reg[i] + data.eta0 / (FOUR_PI * r);
        density[i] = 0.5 * (pidot * pidot + dpsi[i] * dpsi[i]) * FOUR_PI * r * r;
    }
    density[0] = data.eta0 * data.eta0 / (2.0 * FOUR_PI);
    trapezoid(&density, dr) + potential.potential(data.zeta0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid100() -> RadialGrid {
        RadialGrid::with_dr(100.0, 0.01).unwrap()
    }

    #[test]
    fn lambda_trace_closed_forms() {
        let grid = grid100();
        // Zero regular data: lambda = eta0 / 4pi for all t > 0.
        let d = RadialInitialData::from_fn(grid, |_| 0.0, |_| 0.0, 0.7, 2.0).unwrap();
        let ts: Vec<f64> = (1..50).map(|k| k as f64).collect();
        let lam = lambda_trace(&d, &ts).unwrap();
        for v in lam {
            assert_relative_eq!(v, 2.0 / FOUR_PI, epsilon = 1e-12);
        }

        // Gaussian psi0, zero pi0, eta0 = 0: lambda(t) = (1 - 2 t^2) e^{-t^2}.
        let d = RadialInitialData::from_fn(grid, |r| (-r * r).exp(), |_| 0.0, 0.0, 0.0).unwrap();
        let ts: Vec<f64> = (0..400).map(|k| k as f64 * 0.01).collect();
        let lam = lambda_trace(&d, &ts).unwrap();
        for (t, v) in ts.iter().zip(&lam) {
            let exact = (1.0 - 2.0 * t * t) * (-t * t).exp();
            assert!((v - exact).abs() < 2e-4, "t={t}: {v} vs {exact}");
        }

        // pi0 supported in [1, 2], psi0 = 0, eta0 = 0: lambda(t) = t pi0(t).
        let bump = |r: f64| {
            if r > 1.0 && r < 2.0 {
                let u: f64 = 2.0 * (r - 1.5);
                (1.0 - u * u).powi(2)
            } else {
                0.0
            }
        };
        let d = RadialInitialData::from_fn(grid, |_| 0.0, bump, 0.0, 0.0).unwrap();
        let ts = [0.5, 0.9, 1.3, 1.7, 2.4, 5.0];
        let lam = lambda_trace(&d, &ts).unwrap();
        for (t, v) in ts.iter().zip(&lam) {
            assert_relative_eq!(*v, t * bump(*t), epsilon = 1e-9);
        }

        // Out-of-horizon times are rejected.
        assert!(lambda_trace(&d, &[150.0]).is_err());
    }

    #[test]
    fn zeta_ode_closed_forms() {
        // F = 0, lambda = c: zeta = zeta0 + 4 pi c t.
        let free = ScalarPotential::new(vec![0.0]);
        let tgrid: Vec<f64> = (0..=1000).map(|k| k as f64 * 1e-3).collect();
        let lam = vec![0.25; tgrid.len()];
        let traj = solve_zeta(&free, &tgrid, &lam, 0.3, 1e9).unwrap();
        for (t, z) in traj.times.iter().zip(&traj.zeta) {
            assert_relative_eq!(*z, 0.3 + FOUR_PI * 0.25 * t, epsilon = 1e-9);
        }

        // F(z) = z, lambda = 0: zeta = zeta0 e^{-4 pi t}, RK4 to 1e-8 at t=1.
        let linear = ScalarPotential::new(vec![0.0, 0.0, 0.5]);
        let lam = vec![0.0; tgrid.len()];
        let traj = solve_zeta(&linear, &tgrid, &lam, 1.0, 1e9).unwrap();
        let z1 = *traj.zeta.last().unwrap();
        assert!(
            (z1 - (-FOUR_PI).exp()).abs() < 1e-8,
            "z(1) = {z1} vs {}",
            (-FOUR_PI).exp()
        );
    }

    fn compatible_data(grid: RadialGrid, pot: &ScalarPotential, zeta0: f64) -> RadialInitialData {
        // psi0_reg(0) = F(zeta0) makes the state a genuine point of the
        // constraint manifold, so the reconstructed field is C1 across the
        // light cone.
        let f0 = pot.force(zeta0);
        RadialInitialData::from_fn(
            grid,
            move |r| f0 * (-r * r / 2.0).exp(),
            |r| 0.4 * r * r * (-r * r / 3.0).exp(),
            zeta0,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn double_well_relaxes_to_stable_zero_with_a_priori_bound() {
        let grid = grid100();
        let pot = ScalarPotential::double_well();
        let d = compatible_data(grid, &pot, 0.4);
        let traj = solve_point3d(&d, &pot, 1e-3, 80.0).unwrap();
        let h0 = initial_energy(&d, &pot);
        let bound = zeta_apriori_bound(&pot, h0).unwrap();
        let max_abs = traj.zeta.iter().fold(0.0f64, |m, z| m.max(z.abs()));
        assert!(
            max_abs <= bound + 1e-6,
            "a priori bound violated: {max_abs} > {bound}"
        );
        let zf = *traj.zeta.last().unwrap();
        let q = traj
            .targets
            .iter()
            .cloned()
            .min_by(|a, b| (a - zf).abs().partial_cmp(&(b - zf).abs()).unwrap())
            .unwrap();
        assert!((zf - q).abs() <= 1e-3, "zeta(T) = {zf} not settled near {q}");
        assert!(
            traj.zeta_dot_at(&pot, 80.0).unwrap().abs() <= 1e-3,
            "zetadot not settled"
        );
        assert!(traj.targets.iter().any(|q| (q - 1.0).abs() < 1e-10));
        assert!(traj.targets.iter().any(|q| (q + 1.0).abs() < 1e-10));
        assert!((zf.abs() - 1.0).abs() < 1e-3, "settled at {zf}, want ±1");
    }

    #[test]
    fn stationary_state_is_reconstructed_exactly_and_energy_is_u_of_q() {
        let grid = grid100();
        let pot = ScalarPotential::double_well();
        let q = 1.0; // F(1) = 0
        let d = RadialInitialData::from_fn(grid, |_| 0.0, |_| 0.0, q, 0.0).unwrap();
        let traj = solve_point3d(&d, &pot, 1e-3, 40.0).unwrap();
        for z in &traj.zeta {
            assert_relative_eq!(*z, q, epsilon = 1e-12);
        }
        let rs = [0.5, 1.0, 7.3, 30.0];
        for t in [5.0, 20.0, 39.0] {
            let vals = reconstruct_field(&d, &traj, &rs, t).unwrap();
            for (r, v) in rs.iter().zip(&vals) {
                assert_relative_eq!(*v, q / (FOUR_PI * r), epsilon = 1e-12);
            }
            let e = energy3d(&d, &traj, &pot, t).unwrap();
            assert_relative_eq!(e, pot.potential(q), epsilon = 1e-10);
        }
    }

    #[test]
    fn causality_outside_the_light_cone_is_exact() {
        let grid = grid100();
        let pot = ScalarPotential::double_well();
        let d = RadialInitialData::from_fn(grid, |_| 0.0, |_| 0.0, 0.55, 0.0).unwrap();
        let traj = solve_point3d(&d, &pot, 1e-3, 30.0).unwrap();
        // Strictly outside the cone the field equals the untouched initial
        // tail zeta0 G(r), exactly.
        for t in [1.0, 10.0, 25.0] {
            for r in [t + 0.5, t + 3.0, t + 20.0] {
                let v = reconstruct_field(&d, &traj, &[r], t).unwrap()[0];
                assert_eq!(v, 0.55 / (FOUR_PI * r));
            }
        }
        // Zero data everywhere: identically zero field.
        let d0 = RadialInitialData::from_fn(grid, |_| 0.0, |_| 0.0, 0.0, 0.0).unwrap();
        let traj0 = solve_point3d(&d0, &pot, 1e-3, 30.0).unwrap();
        for t in [0.5, 12.0] {
            for r in [0.3, 5.0, 40.0] {
                assert_eq!(reconstruct_field(&d0, &traj0, &[r], t).unwrap()[0], 0.0);
            }
        }
    }

    #[test]
    fn energy_is_conserved_for_generic_compatible_data() {
        let grid = grid100();
        let pot = ScalarPotential::double_well();
        let d = compatible_data(grid, &pot, 0.5);
        let traj = solve_point3d(&d, &pot, 1e-3, 55.0).unwrap();
        let e0 = energy3d(&d, &traj, &pot, 0.0).unwrap();
        assert_relative_eq!(e0, initial_energy(&d, &pot), epsilon = 1e-9);
        let floor = pot.potential(-1.0); // inf U
        for t in [5.0, 15.0, 30.0, 50.0] {
            let e = energy3d(&d, &traj, &pot, t).unwrap();
            assert!(
                ((e - e0) / e0).abs() <= 1e-4,
                "t={t}: energy {e} drifted from {e0}"
            );
            assert!(e >= floor);
        }
    }

    #[test]
    fn boundary_condition_recovered_by_richardson_extrapolation() {
        let grid = grid100();
        let pot = ScalarPotential::double_well();
        let d = compatible_data(grid, &pot, 0.5);
        let traj = solve_point3d(&d, &pot, 1e-3, 30.0).unwrap();
        for t in [4.0, 11.0, 27.0] {
            let h = 0.05;
            let vals = reconstruct_field(&d, &traj, &[h, 2.0 * h], t).unwrap();
            let zt = traj.zeta_at(t).unwrap();
            let reg1 = vals[0] - zt / (FOUR_PI * h);
            let reg2 = vals[1] - zt / (FOUR_PI * 2.0 * h);
            let extrap = 2.0 * reg1 - reg2;
            let expect = pot.force(zt);
            assert!(
                (extrap - expect).abs() < 1e-3,
                "t={t}: boundary value {extrap} vs F(zeta) = {expect}"
            );
        }
    }

    #[test]
    fn tail_validation_rejects_non_decaying_data() {
        let grid = RadialGrid::with_dr(50.0, 0.05).unwrap();
        let res = RadialInitialData::from_fn(grid, |r| 1.0 / (1.0 + r), |_| 0.0, 0.0, 0.0);
        assert!(res.is_err());
    }

    #[test]
    fn radial_data_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = RadialGrid::with_dr(20.0, 0.1).unwrap();
        let d =
            RadialInitialData::from_fn(grid, |r| (-r * r).exp(), |r| r * (-r * r).exp(), 0.3, -0.1)
                .unwrap();
        let path = dir.path().join("data.csv");
        d.write_csv(&path).unwrap();
        let back = RadialInitialData::read_csv(&path).unwrap();
        assert_eq!(d.psi0_reg, back.psi0_reg);
        assert_eq!(d.pi0_reg, back.pi0_reg);
        assert_eq!(d.zeta0, back.zeta0);
        assert_eq!(d.eta0, back.eta0);
    }
}
