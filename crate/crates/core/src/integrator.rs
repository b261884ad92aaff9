//! Time stepping for `psidd = psi'' - m^2 psi + N(x, psi) - V(x) psi`.
//!
//! The scheme is kick-drift-kick leapfrog (Stormer-Verlet), second order and
//! time reversible for every model family. Delta couplings are lumped onto
//! their grid node as `force / dx`; the Lamb point mass becomes an effective
//! nodal mass `1 + M / dx`.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{EnergyBreakdown, FieldState, Grid1D};
use crate::model::{ModelSpec, PolyPotential};

/// Maximum stable Courant ratio accepted by the stepper.
pub const CFL_LIMIT: f64 = 0.9;
/// Blow-up guard: confining potentials keep |psi| bounded, so crossing this
/// threshold signals numerical instability rather than physics.
pub const BLOWUP_GUARD: f64 = 1e6;
const SPONGE_SIGMA_MAX: f64 = 3.0;
const GUARD_STRIDE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Leapfrog,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    /// End nodes are clamped to their initial values (zero velocity there).
    FixedVacuum,
    /// Wrap-around stencil; node n-1 neighbors node 0.
    Periodic,
    /// Clamped ends plus a graded damping layer of the given width on both
    /// sides. Breaks exact energy conservation; flagged in the run record.
    Sponge { width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    pub dt: f64,
    pub scheme: Scheme,
    pub boundary: Boundary,
}

impl StepParams {
    pub fn leapfrog(dt: f64, boundary: Boundary) -> Self {
        Self {
            dt,
            scheme: Scheme::Leapfrog,
            boundary,
        }
    }

    pub fn validate(&self, grid: &Grid1D) -> Result<()> {
        if !(self.dt.abs() > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidInput(format!("bad dt {}", self.dt)));
        }
        let ratio = self.dt.abs() / grid.dx();
        if ratio > CFL_LIMIT {
            return Err(Error::Cfl { ratio });
        }
        if let Boundary::Sponge { width } = self.boundary {
            if width <= 0.0 || 2.0 * width >= grid.x_max - grid.x_min {
                return Err(Error::InvalidInput(format!(
                    "sponge width {width} does not fit the domain"
                )));
            }
        }
        Ok(())
    }
}

/// What to record during a run, with sampling cadences in time units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObserverSpec {
    Snapshots { every: f64 },
    PointTrace { x0: f64, every: f64 },
    Energy { every: f64 },
}

/// Time series of the field value at one grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub x0: f64,
    pub node: usize,
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySample {
    pub time: f64,
    pub breakdown: EnergyBreakdown,
}

/// Everything a run produced. Deterministic given identical inputs.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub grid: Grid1D,
    pub params: StepParams,
    pub t_final: f64,
    pub n_steps: usize,
    pub snapshots: Vec<FieldState>,
    pub traces: Vec<Trace>,
    pub energies: Vec<EnergySample>,
    pub sponge_used: bool,
}

impl RunRecord {
    pub fn snapshot_at(&self, t: f64) -> Result<&FieldState> {
        self.snapshots
            .iter()
            .find(|s| (s.time - t).abs() <= 0.5 * self.params.dt.abs())
            .ok_or(Error::TrajectoryCoverage(t))
    }

    pub fn trace_near(&self, x0: f64) -> Result<&Trace> {
        self.traces
            .iter()
            .min_by(|a, b| {
                (a.x0 - x0)
                    .abs()
                    .partial_cmp(&(b.x0 - x0).abs())
                    .unwrap()
            })
            .ok_or_else(|| Error::InvalidInput(format!("no trace near x0 = {x0}")))
    }

    /// Serialize into a directory: `record.json`, snapshots as CSV pairs,
    /// traces and energy series as CSV.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (k, snap) in self.snapshots.iter().enumerate() {
            snap.write_snapshot(&dir.join(format!("snapshot_{k:06}.csv")))?;
        }
        for (k, trace) in self.traces.iter().enumerate() {
            let mut w = csv::Writer::from_path(dir.join(format!("trace_{k:03}.csv")))?;
            w.write_record(["t", "re", "im"])?;
            for (t, v) in trace.times.iter().zip(&trace.values) {
                w.serialize((t, v.re, v.im))?;
            }
            w.flush()?;
        }
        if !self.energies.is_empty() {
            let mut w = csv::Writer::from_path(dir.join("energy.csv"))?;
            w.write_record(["t", "kinetic", "gradient", "mass_term", "potential", "total"])?;
            for e in &self.energies {
                w.serialize((
                    e.time,
                    e.breakdown.kinetic,
                    e.breakdown.gradient,
                    e.breakdown.mass_term,
                    e.breakdown.potential,
                    e.breakdown.total,
                ))?;
            }
            w.flush()?;
        }
        let meta = RecordMeta {
            grid: self.grid,
            params: self.params,
            t_final: self.t_final,
            n_steps: self.n_steps,
            n_snapshots: self.snapshots.len(),
            traces: self.traces.iter().map(|t| (t.x0, t.node)).collect(),
            sponge_used: self.sponge_used,
        };
        let mut f = std::fs::File::create(dir.join("record.json"))?;
        f.write_all(serde_json::to_string_pretty(&meta)?.as_bytes())?;
        Ok(())
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let meta: RecordMeta =
            serde_json::from_reader(std::fs::File::open(dir.join("record.json"))?)?;
        let mut snapshots = Vec::with_capacity(meta.n_snapshots);
        for k in 0..meta.n_snapshots {
            snapshots.push(FieldState::read_snapshot(
                &dir.join(format!("snapshot_{k:06}.csv")),
            )?);
        }
        let mut traces = Vec::new();
        for (k, (x0, node)) in meta.traces.iter().enumerate() {
            let mut r = csv::Reader::from_path(dir.join(format!("trace_{k:03}.csv")))?;
            let mut times = Vec::new();
            let mut values = Vec::new();
            for rec in r.deserialize() {
                let (t, re, im): (f64, f64, f64) = rec?;
                times.push(t);
                values.push(Complex64::new(re, im));
            }
            traces.push(Trace {
                x0: *x0,
                node: *node,
                times,
                values,
            });
        }
        let mut energies = Vec::new();
        let energy_path = dir.join("energy.csv");
        if energy_path.exists() {
            let mut r = csv::Reader::from_path(energy_path)?;
            for rec in r.deserialize() {
                let (t, k, g, m, p, tot): (f64, f64, f64, f64, f64, f64) = rec?;
                let _ = tot;
                energies.push(EnergySample {
                    time: t,
                    breakdown: EnergyBreakdown::new(k, g, m, p),
                });
            }
        }
        Ok(Self {
            grid: meta.grid,
            params: meta.params,
            t_final: meta.t_final,
            n_steps: meta.n_steps,
            snapshots,
            traces,
            energies,
            sponge_used: meta.sponge_used,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RecordMeta {
    grid: Grid1D,
    params: StepParams,
    t_final: f64,
    n_steps: usize,
    n_snapshots: usize,
    traces: Vec<(f64, usize)>,
    sponge_used: bool,
}

/// Precompiled right-hand side and boundary data for one model/params pair.
struct Stepper {
    grid: Grid1D,
    dt: f64,
    mass_sq: f64,
    distributed: Option<PolyPotential>,
    chi: Option<(Vec<f64>, PolyPotential)>,
    sites: Vec<usize>,
    site_potential: Option<PolyPotential>,
    external: Option<Vec<f64>>,
    inv_node_mass: Option<(usize, f64)>,
    periodic: bool,
    clamp_ends: bool,
    sponge: Option<Vec<f64>>,
    accel: Vec<Complex64>,
}

impl Stepper {
    fn new(model: &ModelSpec, params: &StepParams) -> Result<Self> {
        params.validate(&model.grid)?;
        let grid = model.grid;
        let dx = grid.dx();
        let (sites, site_potential) = match model.point_sites()? {
            Some((idx, pot)) => (idx, Some(pot)),
            None => (Vec::new(), None),
        };
        let inv_node_mass = model.lamb_point_mass().map(|m| {
            let i = grid.index_of(0.0).expect("validated");
            (i, 1.0 / (1.0 + m / dx))
        });
        let chi = model.chi_profile().map(|(profile, pot)| {
            let samples: Vec<f64> = grid.coords().map(|x| profile.eval(x)).collect();
            (samples, pot.clone())
        });
        let external = model
            .external_field()
            .map(|f| grid.coords().map(|x| f.eval(x)).collect());
        let sponge = match params.boundary {
            Boundary::Sponge { width } => {
                let factors: Vec<f64> = grid
                    .coords()
                    .map(|x| {
                        let edge = (x - grid.x_min).min(grid.x_max - x);
                        let depth = ((width - edge) / width).clamp(0.0, 1.0);
                        (-SPONGE_SIGMA_MAX * depth * depth * params.dt.abs()).exp()
                    })
                    .collect();
                Some(factors)
            }
            _ => None,
        };
        Ok(Self {
            grid,
            dt: params.dt,
            mass_sq: model.mass * model.mass,
            distributed: model.distributed_potential(),
            chi,
            sites,
            site_potential,
            external,
            inv_node_mass,
            periodic: matches!(params.boundary, Boundary::Periodic),
            clamp_ends: !matches!(params.boundary, Boundary::Periodic),
            sponge,
            accel: vec![Complex64::default(); grid.n_points],
        })
    }

    /// `accel[i] = [psi'' - m^2 psi + N(x, psi) - V psi]_i / rho_i`
    fn eval_accel(&mut self, psi: &[Complex64]) {
        let n = self.grid.n_points;
        let dx = self.grid.dx();
        let inv_dx2 = 1.0 / (dx * dx);
        let m2 = self.mass_sq;

        let lap = |l: Complex64, c: Complex64, r: Complex64| (l - 2.0 * c + r) * inv_dx2;
        for i in 1..n - 1 {
            self.accel[i] = lap(psi[i - 1], psi[i], psi[i + 1]) - m2 * psi[i];
        }
        if self.periodic {
            self.accel[0] = lap(psi[n - 1], psi[0], psi[1]) - m2 * psi[0];
            self.accel[n - 1] = lap(psi[n - 2], psi[n - 1], psi[0]) - m2 * psi[n - 1];
        } else {
            self.accel[0] = Complex64::default();
            self.accel[n - 1] = Complex64::default();
        }

        let (lo, hi) = if self.clamp_ends { (1, n - 1) } else { (0, n) };
        if let Some(pot) = &self.distributed {
            for i in lo..hi {
                self.accel[i] += pot.force(psi[i]);
            }
        }
        if let Some((chi, pot)) = &self.chi {
            for i in lo..hi {
                if chi[i] != 0.0 {
                    self.accel[i] += chi[i] * pot.force(psi[i]);
                }
            }
        }
        if let Some(pot) = &self.site_potential {
            let inv_dx = 1.0 / dx;
            for &i in &self.sites {
                self.accel[i] += pot.force(psi[i]) * inv_dx;
            }
        }
        if let Some(v) = &self.external {
            for i in lo..hi {
                self.accel[i] -= v[i] * psi[i];
            }
        }
        if let Some((i, inv_mass)) = self.inv_node_mass {
            self.accel[i] *= inv_mass;
        }
    }

    /// One kick-drift-kick update in place.
    fn step_in_place(&mut self, psi: &mut [Complex64], pi: &mut [Complex64]) {
        let half = 0.5 * self.dt;
        self.eval_accel(psi);
        for (p, a) in pi.iter_mut().zip(&self.accel) {
            *p += half * a;
        }
        for (q, p) in psi.iter_mut().zip(pi.iter()) {
            *q += self.dt * *p;
        }
        self.eval_accel(psi);
        for (p, a) in pi.iter_mut().zip(&self.accel) {
            *p += half * a;
        }
        if let Some(factors) = &self.sponge {
            for (p, f) in pi.iter_mut().zip(factors) {
                *p *= *f;
            }
        }
    }

    fn clamp_initial(&self, state: &mut FieldState) {
        if self.clamp_ends {
            let n = self.grid.n_points;
            state.pi[0] = Complex64::default();
            state.pi[n - 1] = Complex64::default();
        }
    }
}

fn guard(state: &FieldState, t: f64) -> Result<()> {
    let max = state.max_abs_psi();
    if !max.is_finite() || max > BLOWUP_GUARD {
        return Err(Error::BlowUp { t, max });
    }
    Ok(())
}

/// Advance `state` by `round(t_span / dt)` steps and return the final state
/// only (no observer bookkeeping).
pub fn evolve(
    model: &ModelSpec,
    state: &FieldState,
    t_span: f64,
    params: &StepParams,
) -> Result<FieldState> {
    model.check_state(state)?;
    let mut stepper = Stepper::new(model, params)?;
    // t_span is a duration; a negative dt steps backwards in time.
    let n = (t_span / params.dt.abs()).round() as usize;
    let mut out = state.clone();
    stepper.clamp_initial(&mut out);
    for k in 0..n {
        stepper.step_in_place(&mut out.psi, &mut out.pi);
        if k % GUARD_STRIDE == 0 {
            guard(&out, out.time)?;
        }
    }
    out.time += n as f64 * params.dt;
    guard(&out, out.time)?;
    Ok(out)
}

/// Advance `state` by one step of `params.dt`.
pub fn step(model: &ModelSpec, state: &FieldState, params: &StepParams) -> Result<FieldState> {
    model.check_state(state)?;
    let mut stepper = Stepper::new(model, params)?;
    let mut out = state.clone();
    stepper.clamp_initial(&mut out);
    stepper.step_in_place(&mut out.psi, &mut out.pi);
    out.time += params.dt;
    guard(&out, out.time)?;
    Ok(out)
}

struct TraceCollector {
    node: usize,
    x0: f64,
    every: usize,
    times: Vec<f64>,
    values: Vec<Complex64>,
}

/// Run for `t_final` time units (`round(t_final / dt)` steps), sampling the
/// requested observers. Observers fire at step 0, every `round(every / dt)`
/// steps, and at the final step.
pub fn run(
    model: &ModelSpec,
    initial: &FieldState,
    t_final: f64,
    params: &StepParams,
    observers: &[ObserverSpec],
) -> Result<RunRecord> {
    model.check_state(initial)?;
    if t_final < 0.0 || !t_final.is_finite() {
        return Err(Error::InvalidInput(format!("bad t_final {t_final}")));
    }
    let mut stepper = Stepper::new(model, params)?;
    let n_steps = (t_final / params.dt.abs()).round() as usize;

    let every_steps = |every: f64| -> usize {
        ((every / params.dt.abs()).round() as usize).max(1)
    };
    let mut snap_every = None;
    let mut energy_every = None;
    let mut traces: Vec<TraceCollector> = Vec::new();
    for obs in observers {
        match obs {
            ObserverSpec::Snapshots { every } => snap_every = Some(every_steps(*every)),
            ObserverSpec::Energy { every } => energy_every = Some(every_steps(*every)),
            ObserverSpec::PointTrace { x0, every } => {
                let node = model.grid.nearest_index(*x0);
                traces.push(TraceCollector {
                    node,
                    x0: model.grid.node(node),
                    every: every_steps(*every),
                    times: Vec::new(),
                    values: Vec::new(),
                });
            }
        }
    }

    let mut state = initial.clone();
    stepper.clamp_initial(&mut state);
    let t0 = state.time;
    let mut snapshots = Vec::new();
    let mut energies = Vec::new();

    for step_idx in 0..=n_steps {
        let t = t0 + step_idx as f64 * params.dt;
        state.time = t;
        let is_last = step_idx == n_steps;
        let due = |every: Option<usize>| {
            every.map_or(false, |k| step_idx % k == 0 || is_last)
        };
        if due(snap_every) {
            snapshots.push(state.clone());
        }
        if due(energy_every) {
            energies.push(EnergySample {
                time: t,
                breakdown: model.energy(&state)?,
            });
        }
        for tr in &mut traces {
            if step_idx % tr.every == 0 || is_last {
                tr.times.push(t);
                tr.values.push(state.psi[tr.node]);
            }
        }
        if is_last {
            break;
        }
        stepper.step_in_place(&mut state.psi, &mut state.pi);
        if step_idx % GUARD_STRIDE == 0 {
            guard(&state, t + params.dt)?;
        }
    }
    guard(&state, state.time)?;

    Ok(RunRecord {
        grid: model.grid,
        params: *params,
        t_final,
        n_steps,
        snapshots,
        traces: traces
            .into_iter()
            .map(|t| Trace {
                x0: t.x0,
                node: t.node,
                times: t.times,
                values: t.values,
            })
            .collect(),
        energies,
        sponge_used: matches!(params.boundary, Boundary::Sponge { .. }),
    })
}
