//! Measurement layer: kink detection and tracking, windowed spectra of
//! point traces, spectral-gap statistics, internal-mode frequencies,
//! outgoing wave-packet fronts, distances to stationary states, radiated
//! energy and the finite-difference Schrodinger spectrum.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{local_seminorm, FieldState, Grid1D};
use crate::integrator::{RunRecord, Trace};
use crate::model::ModelSpec;
use crate::numeric::{hann, lsq_line};

/// One detected kink: a monotone transit between the two vacua.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinkRecord {
    /// Zero crossing, by linear interpolation.
    pub position: f64,
    /// Filled by tracking; `None` for single-snapshot detections.
    pub velocity: Option<f64>,
    /// Half-amplitude width: spacing between the psi = -1/2 and +1/2 crossings.
    pub width: f64,
    /// +1 for a rising transit (-1 to +1), -1 for the reverse.
    pub polarity: i8,
}

/// Scan a (real, double-well) field for monotone transits between
/// `-1 + eps` and `1 - eps`. A transit aborts if the field returns to its
/// entry edge before reaching the far edge; ripples inside the band are
/// tolerated.
pub fn detect_kinks(state: &FieldState, eps: f64) -> Vec<KinkRecord> {
    assert!(eps > 0.0 && eps < 0.5, "eps must sit in (0, 0.5)");
    let grid = state.grid;
    let re: Vec<f64> = state.psi.iter().map(|z| z.re).collect();
    let dx = grid.dx();
    let hi = 1.0 - eps;
    let lo = -1.0 + eps;
    let mut records = Vec::new();

    // State machine over samples: outside the band near a vacuum, or inside
    // tracking a transit that entered from one edge.
    #[derive(Clone, Copy, PartialEq)]
    enum Side {
        Low,
        High,
    }
    let side_of = |v: f64| {
        if v <= lo {
            Some(Side::Low)
        } else if v >= hi {
            Some(Side::High)
        } else {
            None
        }
    };
    let mut last_side: Option<(Side, usize)> = side_of(re[0]).map(|s| (s, 0));
    for i in 1..re.len() {
        if let Some(side) = side_of(re[i]) {
            if let Some((entry_side, entry_idx)) = last_side {
                if side != entry_side {
                    // Completed transit on [entry_idx, i].
                    let polarity = if side == Side::High { 1 } else { -1 };
                    let seg = &re[entry_idx..=i];
                    let cross = |level: f64| -> Option<f64> {
                        for k in 1..seg.len() {
                            let (a, b) = (seg[k - 1], seg[k]);
                            if (a - level) * (b - level) <= 0.0 && a != b {
                                let f = (level - a) / (b - a);
                                return Some(grid.node(entry_idx + k - 1) + f * dx);
                            }
                        }
                        None
                    };
                    if let (Some(zero), Some(wm), Some(wp)) =
                        (cross(0.0), cross(-0.5), cross(0.5))
                    {
                        records.push(KinkRecord {
                            position: zero,
                            velocity: None,
                            width: (wp - wm).abs(),
                            polarity,
                        });
                    }
                }
            }
            last_side = Some((side, i));
        }
    }
    records
}

/// A kink followed through a sequence of detection frames.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KinkTrack {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub widths: Vec<f64>,
    pub polarity: i8,
    /// Least-squares slope of position vs time.
    pub velocity: f64,
    /// True when the track does not span all frames.
    pub fragmented: bool,
}

/// Greedy nearest-position matching of per-frame kink records into tracks.
/// The maximum jump between consecutive frames is the frame spacing times
/// the unit propagation speed.
pub fn track_kinks(frames: &[(f64, Vec<KinkRecord>)]) -> Result<Vec<KinkTrack>> {
    if frames.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "tracking needs at least 5 frames, got {}",
            frames.len()
        )));
    }
    struct Open {
        times: Vec<f64>,
        positions: Vec<f64>,
        widths: Vec<f64>,
        polarity: i8,
    }
    let mut open: Vec<Open> = Vec::new();
    let mut closed: Vec<Open> = Vec::new();
    let mut prev_t = frames[0].0;
    for (frame_idx, (t, records)) in frames.iter().enumerate() {
        let max_jump = if frame_idx == 0 {
            0.0
        } else {
            (t - prev_t).abs() + 1e-9
        };
        let mut taken = vec![false; records.len()];
        let mut still_open = Vec::new();
        for mut tr in open.drain(..) {
            let last = *tr.positions.last().unwrap();
            let mut best: Option<(usize, f64)> = None;
            for (k, r) in records.iter().enumerate() {
                if taken[k] || r.polarity != tr.polarity {
                    continue;
                }
                let d = (r.position - last).abs();
                if d <= max_jump && best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((k, d));
                }
            }
            match best {
                Some((k, _)) => {
                    taken[k] = true;
                    tr.times.push(*t);
                    tr.positions.push(records[k].position);
                    tr.widths.push(records[k].width);
                    still_open.push(tr);
                }
                None => closed.push(tr),
            }
        }
        open = still_open;
        for (k, r) in records.iter().enumerate() {
            if !taken[k] {
                open.push(Open {
                    times: vec![*t],
                    positions: vec![r.position],
                    widths: vec![r.width],
                    polarity: r.polarity,
                });
            }
        }
        prev_t = *t;
    }
    closed.extend(open);
    let n_frames = frames.len();
    Ok(closed
        .into_iter()
        .map(|tr| {
            let (velocity, _) = lsq_line(&tr.times, &tr.positions);
            KinkTrack {
                fragmented: tr.times.len() < n_frames,
                velocity,
                times: tr.times,
                positions: tr.positions,
                widths: tr.widths,
                polarity: tr.polarity,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumWindow {
    pub start: f64,
    pub end: f64,
    pub taper: Taper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Taper {
    Hann,
}

/// Normalized windowed power spectrum of a point trace.
///
/// The sign convention follows the forward transform
/// `X(w) = sum_n x_n e^{-i w t_n}`: a trace `e^{-i w0 t}` peaks at `-w0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Angular frequencies, ascending (negative half included).
    pub freqs: Vec<f64>,
    /// Power per bin, normalized to unit sum.
    pub power: Vec<f64>,
    pub window: SpectrumWindow,
    pub peak_freq: f64,
    /// Filled by [`gap_mass`].
    pub gap_mass_fraction: Option<f64>,
}

impl SpectrumReport {
    pub fn bin_width(&self) -> f64 {
        self.freqs[1] - self.freqs[0]
    }

    /// Sub-bin peak location by log-parabolic interpolation over the argmax
    /// bin and its neighbors (the Hann main lobe is close to parabolic in
    /// log power). Falls back to the binned peak at the spectrum edges.
    pub fn refined_peak(&self) -> f64 {
        let i = self
            .power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        if i == 0 || i + 1 >= self.power.len() {
            return self.peak_freq;
        }
        let (pm, p0, pp) = (self.power[i - 1], self.power[i], self.power[i + 1]);
        if pm <= 0.0 || pp <= 0.0 || p0 <= 0.0 {
            return self.peak_freq;
        }
        let (lm, l0, lp) = (pm.ln(), p0.ln(), pp.ln());
        let denom = lm - 2.0 * l0 + lp;
        if denom >= 0.0 {
            return self.peak_freq;
        }
        let delta = 0.5 * (lm - lp) / denom;
        self.freqs[i] + delta.clamp(-0.5, 0.5) * self.bin_width()
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["freq", "power"])?;
        for (f, p) in self.freqs.iter().zip(&self.power) {
            w.serialize((f, p))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub const MIN_SPECTRUM_SAMPLES: usize = 1024;

/// Hann-tapered discrete Fourier transform of the trace segment inside
/// `[start, end]`; at least 1024 samples required.
pub fn point_trace_spectrum(trace: &Trace, start: f64, end: f64) -> Result<SpectrumReport> {
    let idx: Vec<usize> = trace
        .times
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= start - 1e-12 && t <= end + 1e-12)
        .map(|(i, _)| i)
        .collect();
    spectrum_of_samples(
        &idx.iter().map(|&i| trace.times[i]).collect::<Vec<_>>(),
        &idx.iter().map(|&i| trace.values[i]).collect::<Vec<_>>(),
        MIN_SPECTRUM_SAMPLES,
        SpectrumWindow {
            start,
            end,
            taper: Taper::Hann,
        },
    )
}

/// Spectrum of an arbitrary uniformly sampled complex series.
pub fn spectrum_of_samples(
    times: &[f64],
    values: &[Complex64],
    min_samples: usize,
    window: SpectrumWindow,
) -> Result<SpectrumReport> {
    let n = values.len();
    if n < min_samples {
        return Err(Error::WindowTooShort(format!(
            "{n} samples inside the window, need {min_samples}"
        )));
    }
    let dt = times[1] - times[0];
    let taper = hann(n);
    let mut buf: Vec<Complex64> = values
        .iter()
        .zip(&taper)
        .map(|(v, w)| v * *w)
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    // Reorder to ascending signed angular frequency.
    let dw = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    let half = n / 2;
    let mut freqs = Vec::with_capacity(n);
    let mut power = Vec::with_capacity(n);
    for k in 0..n {
        // bins [half..n) carry the negative frequencies
        let j = (k + half) % n;
        let signed = if j >= half {
            j as isize - n as isize
        } else {
            j as isize
        };
        freqs.push(signed as f64 * dw);
        power.push(buf[j].norm_sqr());
    }
    let total: f64 = power.iter().sum();
    if total > 0.0 {
        for p in &mut power {
            *p /= total;
        }
    }
    let peak = power
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(SpectrumReport {
        peak_freq: freqs[peak],
        freqs,
        power,
        window,
        gap_mass_fraction: None,
    })
}

/// Fraction of normalized power outside the spectral gap, `|freq| > m + delta`.
/// The margin must be at least two frequency bins wide.
pub fn gap_mass(report: &SpectrumReport, mass: f64, delta: f64) -> Result<f64> {
    if delta < 2.0 * report.bin_width() {
        return Err(Error::InvalidInput(format!(
            "margin {delta} below two frequency bins ({})",
            2.0 * report.bin_width()
        )));
    }
    Ok(report
        .freqs
        .iter()
        .zip(&report.power)
        .filter(|(f, _)| f.abs() > mass + delta)
        .map(|(_, p)| p)
        .sum())
}

/// Power fraction in the contiguous cluster of bins around the peak that
/// stay above `floor_rel` times the peak power. Returns the fraction and the
/// cluster's frequency range.
pub fn dominant_cluster(report: &SpectrumReport, floor_rel: f64) -> (f64, (f64, f64)) {
    let peak_idx = report
        .power
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let floor = report.power[peak_idx] * floor_rel;
    let mut lo = peak_idx;
    while lo > 0 && report.power[lo - 1] >= floor {
        lo -= 1;
    }
    let mut hi = peak_idx;
    while hi + 1 < report.power.len() && report.power[hi + 1] >= floor {
        hi += 1;
    }
    let fraction = report.power[lo..=hi].iter().sum();
    (fraction, (report.freqs[lo], report.freqs[hi]))
}

/// Dominant positive frequency of a real oscillatory series, or `None` when
/// the series is flat or no peak clears ten times the median power (the
/// noise-floor proxy). The first few positive bins are excluded from the
/// search: they carry leakage of the removed mean, not modes.
pub fn internal_mode_frequency(times: &[f64], values: &[f64]) -> Result<Option<f64>> {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let rms = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / values.len() as f64)
        .sqrt();
    if rms <= 1e-12 * (mean.abs() + 1.0) {
        return Ok(None);
    }
    let complex: Vec<Complex64> = values.iter().map(|v| Complex64::new(v - mean, 0.0)).collect();
    let report = spectrum_of_samples(
        times,
        &complex,
        MIN_SPECTRUM_SAMPLES,
        SpectrumWindow {
            start: times[0],
            end: *times.last().unwrap(),
            taper: Taper::Hann,
        },
    )?;
    let dc_guard = 3.5 * report.bin_width();
    let positive: Vec<(usize, f64)> = report
        .freqs
        .iter()
        .enumerate()
        .filter(|(_, f)| **f > dc_guard)
        .map(|(i, _)| (i, report.power[i]))
        .collect();
    let mut powers: Vec<f64> = positive.iter().map(|(_, p)| *p).collect();
    powers.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = powers[powers.len() / 2];
    let (idx, peak) = positive
        .iter()
        .cloned()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    if peak >= 10.0 * median && peak > 0.0 {
        // Sub-bin refinement via the log-parabola through the peak bin.
        let (pm, p0, pp) = (
            report.power[idx - 1],
            report.power[idx],
            report.power[idx + 1],
        );
        let freq = if pm > 0.0 && pp > 0.0 {
            let denom = pm.ln() - 2.0 * p0.ln() + pp.ln();
            if denom < 0.0 {
                let delta = 0.5 * (pm.ln() - pp.ln()) / denom;
                report.freqs[idx] + delta.clamp(-0.5, 0.5) * report.bin_width()
            } else {
                report.freqs[idx]
            }
        } else {
            report.freqs[idx]
        };
        Ok(Some(freq))
    } else {
        Ok(None)
    }
}

/// One detected outgoing packet: direction, front speed from a linear fit of
/// the island front position, and the dominant carrier frequency seen by a
/// probe trace as the packet passes (None when the passage spectrum has no
/// dominant line, e.g. for broadband transients).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PacketRecord {
    pub direction: i8,
    pub speed: f64,
    pub frequency: Option<f64>,
    pub front_points: usize,
}

/// Detect outgoing wave packets in a run: scan each snapshot beyond
/// `|x| > scan_from` for excursion islands `|psi - vacuum| >= threshold`,
/// track the outermost island front per direction, split the front series at
/// backward jumps (separate packets), fit each segment's speed, and read the
/// carrier frequency from the run's point traces where the front crosses.
pub fn packet_group_velocities(
    run: &RunRecord,
    vacuum: f64,
    threshold: f64,
    scan_from: f64,
) -> Vec<PacketRecord> {
    let mut out = Vec::new();
    for dir in [1i8, -1] {
        // Skip a side whose far field never sits near the reference vacuum
        // (e.g. the other well of a double-well background).
        if let Some(first) = run.snapshots.first() {
            let n = first.grid.n_points;
            let tail = (n / 20).max(1);
            let edge: f64 = if dir > 0 {
                first.psi[n - tail..].iter().map(|z| (z.re - vacuum).abs()).sum::<f64>()
                    / tail as f64
            } else {
                first.psi[..tail].iter().map(|z| (z.re - vacuum).abs()).sum::<f64>()
                    / tail as f64
            };
            if edge > 10.0 * threshold {
                continue;
            }
        }
        // Front position per snapshot: outermost threshold crossing.
        let mut fronts: Vec<(f64, f64)> = Vec::new();
        for snap in &run.snapshots {
            let grid = snap.grid;
            let n = grid.n_points;
            let mut front = None;
            for k in 0..n {
                let i = if dir > 0 { n - 1 - k } else { k };
                let x = grid.node(i);
                if dir as f64 * x <= scan_from {
                    break;
                }
                if (snap.psi[i].re - vacuum).abs() >= threshold {
                    front = Some(x);
                    break;
                }
            }
            if let Some(x) = front {
                fronts.push((snap.time, x));
            }
        }
        if fronts.len() < 3 {
            continue;
        }
        // Split at backward jumps: a single front can only move outward.
        let mut segments: Vec<Vec<(f64, f64)>> = vec![vec![fronts[0]]];
        for w in fronts.windows(2) {
            let receded = dir as f64 * (w[1].1 - w[0].1) < -1.0;
            if receded {
                segments.push(Vec::new());
            }
            segments.last_mut().unwrap().push(w[1]);
        }
        for seg in segments.iter().filter(|s| s.len() >= 3) {
            let ts: Vec<f64> = seg.iter().map(|p| p.0).collect();
            let xs: Vec<f64> = seg.iter().map(|p| p.1).collect();
            let (slope, intercept) = lsq_line(&ts, &xs);
            let frequency = carrier_frequency(run, vacuum, threshold, slope, intercept, dir);
            out.push(PacketRecord {
                direction: dir,
                speed: slope.abs(),
                frequency,
                front_points: seg.len(),
            });
        }
    }
    out
}

/// Carrier frequency at the probe trace nearest the packet path: window the
/// trace from the fitted front-arrival time, spectrum it, and accept the
/// peak only when its cluster holds a dominant share of the power.
fn carrier_frequency(
    run: &RunRecord,
    vacuum: f64,
    threshold: f64,
    slope: f64,
    intercept: f64,
    dir: i8,
) -> Option<f64> {
    let trace = run
        .traces
        .iter()
        .filter(|tr| dir as f64 * tr.x0 > 0.0)
        .min_by(|a, b| a.x0.abs().partial_cmp(&b.x0.abs()).unwrap())?;
    if slope.abs() < 1e-12 {
        return None;
    }
    let t_arrive = (trace.x0 - intercept) / slope;
    let dt = trace.times.get(1)? - trace.times.first()?;
    let start_idx = ((t_arrive - trace.times[0]) / dt).floor().max(0.0) as usize;
    if start_idx + 64 >= trace.values.len() {
        return None;
    }
    let seg: Vec<Complex64> = trace.values[start_idx..]
        .iter()
        .map(|v| v - Complex64::new(vacuum, 0.0))
        .collect();
    // The passage must actually register at the probe.
    if !seg.iter().any(|v| v.norm() >= 0.5 * threshold) {
        return None;
    }
    let times: Vec<f64> = trace.times[start_idx..].to_vec();
    let report = spectrum_of_samples(
        &times,
        &seg,
        64,
        SpectrumWindow {
            start: times[0],
            end: *times.last().unwrap(),
            taper: Taper::Hann,
        },
    )
    .ok()?;
    let (fraction, range) = dominant_cluster(&report, 1e-2);
    if fraction < 0.3 {
        return None;
    }
    let _ = range;
    Some(report.peak_freq.abs())
}

/// Distance from `state` to the nearest of `targets` in the model's local
/// seminorm at window radius `radius`; ties break toward the first index.
pub fn dist_to_stationary(
    model: &ModelSpec,
    state: &FieldState,
    targets: &[FieldState],
    radius: f64,
) -> Result<(f64, usize)> {
    if targets.is_empty() {
        return Err(Error::InvalidInput("no target states".into()));
    }
    let variant = model.seminorm_variant();
    let mut best = (f64::INFINITY, 0);
    for (k, target) in targets.iter().enumerate() {
        let mut probe = target.clone();
        probe.time = state.time;
        let d = local_seminorm(state, &probe, radius, variant)?;
        if d < best.0 {
            best = (d, k);
        }
    }
    Ok(best)
}

/// Energy radiated from the window `|x| <= radius` between `t1` and `t2`:
/// the windowed Hamiltonian at `t1` minus at `t2` (point terms included when
/// their sites lie inside).
pub fn radiated_energy(
    model: &ModelSpec,
    run: &RunRecord,
    radius: f64,
    t1: f64,
    t2: f64,
) -> Result<f64> {
    let s1 = run.snapshot_at(t1)?;
    let s2 = run.snapshot_at(t2)?;
    let e1 = model.energy_in_ball(s1, radius)?;
    let e2 = model.energy_in_ball(s2, radius)?;
    Ok(e1.total - e2.total)
}

/// Lowest `k_eigs` eigenvalues of the Dirichlet finite-difference operator
/// `-d^2/dx^2 + shift + V(x)` on the grid, by bisection on Sturm counts of
/// the symmetric tridiagonal matrix.
pub fn schrodinger_spectrum(
    grid: Grid1D,
    potential: &[f64],
    shift: f64,
    k_eigs: usize,
) -> Result<Vec<f64>> {
    if potential.len() != grid.n_points {
        return Err(Error::GridMismatch(
            "potential samples do not match the grid".into(),
        ));
    }
    let n = grid.n_points - 2; // interior nodes
    if k_eigs == 0 || k_eigs > n {
        return Err(Error::InvalidInput(format!(
            "k_eigs = {k_eigs} outside 1..={n}"
        )));
    }
    let dx = grid.dx();
    let inv_dx2 = 1.0 / (dx * dx);
    let diag: Vec<f64> = (1..=n).map(|i| 2.0 * inv_dx2 + shift + potential[i]).collect();
    let off = -inv_dx2;

    // Sturm count: number of eigenvalues strictly below lambda.
    let count_below = |lambda: f64| -> usize {
        let mut count = 0;
        let mut q = diag[0] - lambda;
        let guard = 1e-300;
        for i in 1..n {
            let q_safe = if q.abs() < guard {
                if q >= 0.0 {
                    guard
                } else {
                    -guard
                }
            } else {
                q
            };
            q = (diag[i] - lambda) - off * off / q_safe;
            if q < 0.0 {
                count += 1;
            }
        }
        if diag[0] - lambda < 0.0 {
            count += 1;
        }
        count
    };

    // Gershgorin bounds.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, d) in diag.iter().enumerate() {
        let r = if i == 0 || i == n - 1 {
            off.abs() * if n > 1 { 1.0 } else { 0.0 }
        } else {
            2.0 * off.abs()
        } + if n > 1 && (i == 0 || i == n - 1) {
            off.abs()
        } else {
            0.0
        };
        lo = lo.min(d - r);
        hi = hi.max(d + r);
    }

    let mut eigs = Vec::with_capacity(k_eigs);
    for j in 0..k_eigs {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..120 {
            let mid = 0.5 * (a + b);
            if count_below(mid) <= j {
                a = mid;
            } else {
                b = mid;
            }
            if (b - a).abs() < 1e-12 * hi.abs().max(1.0) {
                break;
            }
        }
        eigs.push(0.5 * (a + b));
    }
    Ok(eigs)
}

/// Local maxima of |psi| above `threshold`, separated by at least
/// `min_separation`: the emergent localized objects of a run.
pub fn count_solitons(state: &FieldState, threshold: f64, min_separation: f64) -> Vec<(f64, f64)> {
    let grid = state.grid;
    let mag: Vec<f64> = state.psi.iter().map(|z| z.norm()).collect();
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for i in 1..mag.len() - 1 {
        if mag[i] >= threshold && mag[i] >= mag[i - 1] && mag[i] > mag[i + 1] {
            let x = grid.node(i);
            if let Some(last) = peaks.last_mut() {
                if x - last.0 < min_separation {
                    if mag[i] > last.1 {
                        *last = (x, mag[i]);
                    }
                    continue;
                }
            }
            peaks.push((x, mag[i]));
        }
    }
    peaks
}
