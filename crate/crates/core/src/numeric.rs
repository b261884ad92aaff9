//! Shared numerical kernels: quadrature, finite differences, root finding,
//! monotone interpolation, and small time-series helpers.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Trapezoid rule on a uniform grid with spacing `dx`.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let interior: f64 = values[1..n - 1].iter().sum();
    dx * (0.5 * (values[0] + values[n - 1]) + interior)
}

/// Cumulative trapezoid integral; `out[i] = ∫_{x0}^{x_i}`.
pub fn cumulative_trapezoid(values: &[f64], dx: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * dx * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Centered second-order difference, one-sided (second order) at the ends.
pub fn gradient(values: &[Complex64], dx: f64) -> Vec<Complex64> {
    let n = values.len();
    assert!(n >= 3, "gradient needs at least 3 samples");
    let mut out = vec![Complex64::default(); n];
    let inv2 = 1.0 / (2.0 * dx);
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) * inv2;
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) * inv2;
    }
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) * inv2;
    out
}

/// Real-valued variant of [`gradient`].
pub fn gradient_real(values: &[f64], dx: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 3, "gradient needs at least 3 samples");
    let mut out = vec![0.0; n];
    let inv2 = 1.0 / (2.0 * dx);
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) * inv2;
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) * inv2;
    }
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) * inv2;
    out
}

/// Bisection on a bracketing interval. `f(a)` and `f(b)` must have opposite signs.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidInput(format!(
            "bisection bracket [{a}, {b}] does not change sign"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 || (b - a).abs() <= tol {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Linear interpolation of uniformly spaced samples starting at `x0`.
/// Clamps to the end values outside the table.
pub fn sample_uniform(x0: f64, dx: f64, values: &[f64], x: f64) -> f64 {
    let n = values.len();
    debug_assert!(n >= 2);
    let s = (x - x0) / dx;
    if s <= 0.0 {
        return values[0];
    }
    if s >= (n - 1) as f64 {
        return values[n - 1];
    }
    let i = s.floor() as usize;
    let frac = s - i as f64;
    values[i] * (1.0 - frac) + values[i + 1] * frac
}

/// Least-squares line fit; returns (slope, intercept).
pub fn lsq_line(ts: &[f64], xs: &[f64]) -> (f64, f64) {
    assert_eq!(ts.len(), xs.len());
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let xm = xs.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, x) in ts.iter().zip(xs) {
        num += (t - tm) * (x - xm);
        den += (t - tm) * (t - tm);
    }
    let slope = if den > 0.0 { num / den } else { 0.0 };
    (slope, xm - slope * tm)
}

/// Hann taper of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| {
            let s = (std::f64::consts::PI * i as f64 / (n - 1) as f64).sin();
            s * s
        })
        .collect()
}

/// Mean period of a zero-mean oscillatory series from its upward zero
/// crossings (linear interpolation between samples). Needs at least three
/// crossings; returns `None` otherwise.
pub fn period_from_crossings(times: &[f64], values: &[f64]) -> Option<f64> {
    assert_eq!(times.len(), values.len());
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mut crossings = Vec::new();
    for i in 1..values.len() {
        let (a, b) = (values[i - 1] - mean, values[i] - mean);
        if a < 0.0 && b >= 0.0 {
            let frac = if b != a { -a / (b - a) } else { 0.0 };
            crossings.push(times[i - 1] + frac * (times[i] - times[i - 1]));
        }
    }
    if crossings.len() < 3 {
        return None;
    }
    let span = crossings.last().unwrap() - crossings.first().unwrap();
    Some(span / (crossings.len() - 1) as f64)
}

/// Monotone (PCHIP-style) cubic Hermite interpolant. The interpolant
/// preserves monotonicity of the data and never overshoots.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidInput(
                "monotone cubic needs at least two matching samples".into(),
            ));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "monotone cubic abscissae must be strictly increasing".into(),
            ));
        }
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let d: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut m = vec![0.0; n];
        if n == 2 {
            m[0] = d[0];
            m[1] = d[0];
        } else {
            for i in 1..n - 1 {
                if d[i - 1] * d[i] <= 0.0 {
                    m[i] = 0.0;
                } else {
                    // Weighted harmonic mean of adjacent secants.
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
                }
            }
            m[0] = Self::edge_slope(h[0], h[1], d[0], d[1]);
            m[n - 1] = Self::edge_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
        }
        Ok(Self { xs, ys, slopes: m })
    }

    fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
        let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if m * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            m
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    /// Evaluate at `x`; extrapolation is refused.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        let tol = 1e-12 * (hi - lo).abs().max(1.0);
        if x < lo - tol || x > hi + tol {
            return Err(Error::OutOfRange {
                value: x,
                lo,
                hi,
            });
        }
        let x = x.clamp(lo, hi);
        let i = match self
            .xs
            .binary_search_by(|p| p.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1)
    }

    /// Derivative of the interpolant at `x` (continuous across knots).
    pub fn eval_derivative(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        let tol = 1e-12 * (hi - lo).abs().max(1.0);
        if x < lo - tol || x > hi + tol {
            return Err(Error::OutOfRange { value: x, lo, hi });
        }
        let x = x.clamp(lo, hi);
        let i = match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        Ok(((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h)
    }
}
