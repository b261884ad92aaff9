//! Uniform 1D grids, discrete field states, local energy seminorms and the
//! weighted metric built from them.
//!
//! A state is the pair (psi, pi) sampled on the grid nodes; pi is the time
//! derivative of psi. Complex storage is used throughout; real-field models
//! keep the imaginary parts identically zero.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{gradient, trapezoid};

/// Uniform grid on [x_min, x_max] with `n_points` nodes, `x_i = x_min + i dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "bad extent [{x_min}, {x_max}]"
            )));
        }
        if n_points < 3 {
            return Err(Error::InvalidGrid(format!(
                "n_points = {n_points}, need at least 3"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    /// Symmetric grid [-half_width, half_width] with spacing `dx`.
    pub fn symmetric(half_width: f64, dx: f64) -> Result<Self> {
        let n_half = (half_width / dx).round() as usize;
        if n_half == 0 {
            return Err(Error::InvalidGrid("empty symmetric grid".into()));
        }
        let hw = n_half as f64 * dx;
        Self::new(-hw, hw, 2 * n_half + 1)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        // Blend form: hits both ends exactly and keeps symmetric grids
        // bit-symmetric about zero.
        let n1 = (self.n_points - 1) as f64;
        (self.x_min * (n1 - i as f64) + self.x_max * i as f64) / n1
    }

    pub fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.node(i))
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.x_max - self.x_min)
    }

    /// Index of the node nearest to `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = ((x - self.x_min) / self.dx()).round();
        (i.max(0.0) as usize).min(self.n_points - 1)
    }

    /// Index of the node coinciding with `x`; errors if `x` falls between nodes.
    pub fn index_of(&self, x: f64) -> Result<usize> {
        let i = self.nearest_index(x);
        if (self.node(i) - x).abs() > 1e-9 * self.dx().max(1.0) {
            return Err(Error::SiteOffGrid(x));
        }
        Ok(i)
    }
}

/// Discrete field/momentum pair with a timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub grid: Grid1D,
    pub psi: Vec<Complex64>,
    pub pi: Vec<Complex64>,
    pub time: f64,
}

impl FieldState {
    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            grid,
            psi: vec![Complex64::default(); grid.n_points],
            pi: vec![Complex64::default(); grid.n_points],
            time: 0.0,
        }
    }

    /// Build from real-valued node functions of x.
    pub fn from_real_fn(
        grid: Grid1D,
        psi: impl Fn(f64) -> f64,
        pi: impl Fn(f64) -> f64,
    ) -> Self {
        Self {
            grid,
            psi: grid.coords().map(|x| Complex64::new(psi(x), 0.0)).collect(),
            pi: grid.coords().map(|x| Complex64::new(pi(x), 0.0)).collect(),
            time: 0.0,
        }
    }

    pub fn from_complex_fn(
        grid: Grid1D,
        psi: impl Fn(f64) -> Complex64,
        pi: impl Fn(f64) -> Complex64,
    ) -> Self {
        Self {
            grid,
            psi: grid.coords().map(&psi).collect(),
            pi: grid.coords().map(&pi).collect(),
            time: 0.0,
        }
    }

    pub fn validate_finite(&self) -> Result<()> {
        if self.psi.len() != self.grid.n_points || self.pi.len() != self.grid.n_points {
            return Err(Error::GridMismatch(format!(
                "state arrays have {} / {} entries for a {}-node grid",
                self.psi.len(),
                self.pi.len(),
                self.grid.n_points
            )));
        }
        let finite = |v: &[Complex64]| v.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite(&self.psi) || !finite(&self.pi) {
            return Err(Error::NonFinite("field state".into()));
        }
        Ok(())
    }

    pub fn same_grid(&self, other: &FieldState) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("states live on different grids".into()));
        }
        Ok(())
    }

    /// Global phase rotation `psi -> e^{i theta} psi` (and likewise pi).
    pub fn phase_rotated(&self, theta: f64) -> Self {
        let f = Complex64::from_polar(1.0, theta);
        Self {
            grid: self.grid,
            psi: self.psi.iter().map(|z| z * f).collect(),
            pi: self.pi.iter().map(|z| z * f).collect(),
            time: self.time,
        }
    }

    /// Cyclic shift by `k` nodes (positive shifts move content to larger x).
    pub fn shifted_nodes(&self, k: isize) -> Self {
        let n = self.grid.n_points as isize;
        let rot = |v: &[Complex64]| -> Vec<Complex64> {
            (0..n)
                .map(|i| v[(((i - k) % n + n) % n) as usize])
                .collect()
        };
        Self {
            grid: self.grid,
            psi: rot(&self.psi),
            pi: rot(&self.pi),
            time: self.time,
        }
    }

    pub fn max_abs_psi(&self) -> f64 {
        self.psi.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Write the snapshot as CSV (`x,re_psi,im_psi,re_pi,im_pi`) with a JSON
    /// sidecar `<path>.json` carrying the grid and timestamp.
    pub fn write_snapshot(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "re_psi", "im_psi", "re_pi", "im_pi"])?;
        for (i, x) in self.grid.coords().enumerate() {
            w.serialize((x, self.psi[i].re, self.psi[i].im, self.pi[i].re, self.pi[i].im))?;
        }
        w.flush()?;
        let sidecar = SnapshotMeta {
            grid: self.grid,
            time: self.time,
        };
        let mut f = std::fs::File::create(path.with_extension("json"))?;
        f.write_all(serde_json::to_string_pretty(&sidecar)?.as_bytes())?;
        Ok(())
    }

    pub fn read_snapshot(path: &Path) -> Result<Self> {
        let meta: SnapshotMeta =
            serde_json::from_reader(std::fs::File::open(path.with_extension("json"))?)?;
        let mut r = csv::Reader::from_path(path)?;
        let mut psi = Vec::with_capacity(meta.grid.n_points);
        let mut pi = Vec::with_capacity(meta.grid.n_points);
        for rec in r.deserialize() {
            let (_x, rp, ip, rq, iq): (f64, f64, f64, f64, f64) = rec?;
            psi.push(Complex64::new(rp, ip));
            pi.push(Complex64::new(rq, iq));
        }
        let state = Self {
            grid: meta.grid,
            psi,
            pi,
            time: meta.time,
        };
        state.validate_finite()?;
        Ok(state)
    }
}

#[derive(Serialize, Deserialize)]
struct SnapshotMeta {
    grid: Grid1D,
    time: f64,
}

/// Discrete Hamiltonian split into its contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub gradient: f64,
    pub mass_term: f64,
    pub potential: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(kinetic: f64, gradient: f64, mass_term: f64, potential: f64) -> Self {
        Self {
            kinetic,
            gradient,
            mass_term,
            potential,
            total: kinetic + gradient + mass_term + potential,
        }
    }
}

/// Which local seminorm a model family uses.
///
/// Wave-type families (no mass term) control the field through its
/// derivative and one point value; Klein-Gordon-type families use the full
/// H1 norm on the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeminormVariant {
    /// ||psi'||_{L2(-R,R)} + |psi(0)| + ||pi||_{L2(-R,R)}
    DAlembert,
    /// ||psi||_{H1(-R,R)} + ||pi||_{L2(-R,R)}
    KleinGordon,
}

fn window_l2(diff: &[Complex64], grid: &Grid1D, radius: f64) -> f64 {
    let dx = grid.dx();
    let lo = grid.nearest_index(-radius);
    let hi = grid.nearest_index(radius);
    let sq: Vec<f64> = diff[lo..=hi].iter().map(|z| z.norm_sqr()).collect();
    trapezoid(&sq, dx).sqrt()
}

/// Local energy seminorm of the difference of two states at window radius `radius`.
pub fn local_seminorm(
    a: &FieldState,
    b: &FieldState,
    radius: f64,
    variant: SeminormVariant,
) -> Result<f64> {
    a.same_grid(b)?;
    let half = a.grid.half_width();
    if radius > half + 1e-9 {
        return Err(Error::RadiusTooLarge {
            radius,
            half_width: half,
        });
    }
    let dpsi: Vec<Complex64> = a.psi.iter().zip(&b.psi).map(|(x, y)| x - y).collect();
    let dpi: Vec<Complex64> = a.pi.iter().zip(&b.pi).map(|(x, y)| x - y).collect();
    let dpsi_grad = gradient(&dpsi, a.grid.dx());
    Ok(match variant {
        SeminormVariant::DAlembert => {
            let at0 = dpsi[a.grid.nearest_index(0.0)].norm();
            window_l2(&dpsi_grad, &a.grid, radius) + at0 + window_l2(&dpi, &a.grid, radius)
        }
        SeminormVariant::KleinGordon => {
            let l2 = window_l2(&dpsi, &a.grid, radius);
            let h1 = (l2 * l2 + window_l2(&dpsi_grad, &a.grid, radius).powi(2)).sqrt();
            h1 + window_l2(&dpi, &a.grid, radius)
        }
    })
}

/// Weighted metric `sum_{R=1..R_max} 2^{-R} s_R / (1 + s_R)` over integer
/// window radii, truncated at the domain half-width.
pub fn weighted_metric_dist(
    a: &FieldState,
    b: &FieldState,
    variant: SeminormVariant,
) -> Result<f64> {
    a.same_grid(b)?;
    let r_max = a.grid.half_width().floor() as usize;
    let mut acc = 0.0;
    let mut weight = 1.0;
    for r in 1..=r_max {
        weight *= 0.5;
        let s = local_seminorm(a, b, r as f64, variant)?;
        acc += weight * s / (1.0 + s);
    }
    Ok(acc)
}

/// Conserved U(1) charge `Im ∫ conj(psi) pi dx` by trapezoid quadrature.
///
/// Callers must gate on the model's field kind; see `ModelSpec::charge`.
pub fn charge_quadrature(state: &FieldState) -> f64 {
    let vals: Vec<f64> = state
        .psi
        .iter()
        .zip(&state.pi)
        .map(|(p, q)| (p.conj() * q).im)
        .collect();
    trapezoid(&vals, state.grid.dx())
}
