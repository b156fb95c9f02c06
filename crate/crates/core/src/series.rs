//! Chebyshev representation of real-symmetric analytic functions on an interval.
//!
//! A series stores coefficients `a_k` of `sum_k a_k T_k(t)`, where `t` is the
//! affine coordinate taking `[a, b]` onto `[-1, 1]`. Analyticity on a complex
//! neighborhood is tracked through the Bernstein ellipse parameter `rho`: the
//! ellipse with foci at the interval endpoints and semi-axis sum `rho` (in the
//! normalized coordinate). The ellipse of minor semi-axis `r` lies inside the
//! round neighborhood `{z : dist(z, [a, b]) < r}`, so neighborhood norms
//! computed here are norms over the inscribed ellipse.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{RenormError, Result};

/// Default overshoot allowed outside `[a, b]`, as a fraction of the half-length.
pub const DEFAULT_EVAL_MARGIN: f64 = 0.05;

/// Ellipse parameter assigned to series whose coefficients vanish past the
/// first few terms (polynomials, entire functions at this resolution).
pub const RHO_CAP: f64 = 1.0e3;

/// Number of boundary samples used for the lower neighborhood estimate.
const ELLIPSE_SAMPLES: usize = 720;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSeries {
    interval: [f64; 2],
    coeffs: Vec<f64>,
    rho: f64,
}

/// Two-sided estimate of `sup |s|` over the ellipse neighborhood of radius `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborhoodNorm {
    /// `sum |a_k| rho(r)^k`, an upper bound for the ellipse sup.
    pub upper: f64,
    /// Largest modulus over sampled ellipse boundary points.
    pub sampled: f64,
    /// Ellipse parameter with minor semi-axis `r`.
    pub rho: f64,
}

/// Chebyshev extreme points of `[a, b]`, ordered from `b` down to `a`.
pub fn chebyshev_nodes(interval: [f64; 2], degree: usize) -> Vec<f64> {
    let [a, b] = interval;
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    if degree == 0 {
        return vec![mid];
    }
    (0..=degree)
        .map(|j| {
            // Endpoints are returned exactly.
            if j == 0 {
                b
            } else if j == degree {
                a
            } else {
                mid + half * (PI * j as f64 / degree as f64).cos()
            }
        })
        .collect()
}

/// Chebyshev points of the first kind, interleaving the extreme points.
pub fn chebyshev_midpoints(interval: [f64; 2], count: usize) -> Vec<f64> {
    let [a, b] = interval;
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    (0..count)
        .map(|j| mid + half * (PI * (j as f64 + 0.5) / count as f64).cos())
        .collect()
}

/// Ellipse parameter of the Bernstein ellipse with minor semi-axis `s` in
/// normalized coordinates.
pub fn rho_for_minor_axis(s: f64) -> f64 {
    s + (s * s + 1.0).sqrt()
}

/// Least-squares decay rate of `log |a_k|`, returned as an ellipse parameter.
///
/// Coefficients below the roundoff floor are ignored; when too few remain the
/// series is treated as entire and [`RHO_CAP`] is returned.
pub fn estimate_rho(coeffs: &[f64]) -> f64 {
    let scale = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return RHO_CAP;
    }
    let floor = 64.0 * f64::EPSILON * scale;
    let points: Vec<(f64, f64)> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, c)| c.abs() > floor)
        .map(|(k, c)| (k as f64, c.abs().ln()))
        .collect();
    if points.len() < 3 {
        return RHO_CAP;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    if !slope.is_finite() || slope >= 0.0 {
        // No measurable decay: the weakest admissible proxy.
        return 1.0 + 1e-3;
    }
    (-slope).exp().clamp(1.0 + 1e-3, RHO_CAP)
}

impl AnalyticSeries {
    pub fn new(interval: [f64; 2], coeffs: Vec<f64>, rho: f64) -> Result<Self> {
        let [a, b] = interval;
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(RenormError::Argument(format!(
                "series interval [{a}, {b}] must be finite with a < b"
            )));
        }
        if coeffs.is_empty() {
            return Err(RenormError::Argument("series needs at least one coefficient".into()));
        }
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(RenormError::Argument(format!("coefficient {k} is not finite")));
        }
        if !(rho > 1.0) {
            return Err(RenormError::Argument(format!("ellipse parameter rho = {rho} must exceed 1")));
        }
        Ok(Self { interval, coeffs, rho })
    }

    /// Series with the given coefficients and a rho estimated from their decay.
    pub fn from_coeffs(interval: [f64; 2], coeffs: Vec<f64>) -> Result<Self> {
        let rho = estimate_rho(&coeffs);
        Self::new(interval, coeffs, rho)
    }

    pub fn constant(interval: [f64; 2], value: f64) -> Result<Self> {
        Self::new(interval, vec![value], RHO_CAP)
    }

    /// Interpolates `sample` at the `degree + 1` Chebyshev extreme points.
    pub fn fit<F>(sample: F, interval: [f64; 2], degree: usize) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        if degree < 1 {
            return Err(RenormError::Argument("fit degree must be at least 1".into()));
        }
        let nodes = chebyshev_nodes(interval, degree);
        let mut values = Vec::with_capacity(nodes.len());
        for (index, &x) in nodes.iter().enumerate() {
            let v = sample(x);
            if !v.is_finite() {
                return Err(RenormError::NonFiniteSample { index, x });
            }
            values.push(v);
        }
        Self::from_node_values(interval, &values)
    }

    /// Coefficients from values at [`chebyshev_nodes`] (discrete cosine transform).
    pub fn from_node_values(interval: [f64; 2], values: &[f64]) -> Result<Self> {
        let coeffs = interpolation_coeffs(values);
        Self::from_coeffs(interval, coeffs)
    }

    pub fn interval(&self) -> [f64; 2] {
        self.interval
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn with_rho(mut self, rho: f64) -> Result<Self> {
        if !(rho > 1.0) {
            return Err(RenormError::Argument(format!("ellipse parameter rho = {rho} must exceed 1")));
        }
        self.rho = rho;
        Ok(self)
    }

    #[inline]
    fn to_unit(&self, x: f64) -> f64 {
        let [a, b] = self.interval;
        (2.0 * x - (a + b)) / (b - a)
    }

    fn half_length(&self) -> f64 {
        0.5 * (self.interval[1] - self.interval[0])
    }

    /// Clenshaw evaluation without a domain check.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, self.to_unit(x))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.eval_with_margin(x, DEFAULT_EVAL_MARGIN)
    }

    /// Evaluates at `x` provided it lies within `[a, b]` widened by
    /// `margin` half-lengths on each side.
    pub fn eval_with_margin(&self, x: f64, margin: f64) -> Result<f64> {
        let [a, b] = self.interval;
        let pad = margin * self.half_length();
        let (lo, hi) = (a - pad, b + pad);
        if !(x >= lo && x <= hi) {
            return Err(RenormError::Domain { x, lo, hi });
        }
        Ok(self.value(x))
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let [a, b] = self.interval;
        let t = (z * 2.0 - (a + b)) / (b - a);
        let mut b1 = Complex64::new(0.0, 0.0);
        let mut b2 = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = t * b1 * 2.0 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }

    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        if n == 1 {
            return Self { interval: self.interval, coeffs: vec![0.0], rho: self.rho };
        }
        let mut d = vec![0.0; n - 1];
        // c'_{k-1} = c'_{k+1} + 2 k c_k
        for k in (1..n).rev() {
            let above = d.get(k + 1).copied().unwrap_or(0.0);
            d[k - 1] = above + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] *= 0.5;
        let scale = 1.0 / self.half_length();
        for c in &mut d {
            *c *= scale;
        }
        Self { interval: self.interval, coeffs: d, rho: self.rho }
    }

    /// Mass of the trailing quarter of the coefficients (at least two terms).
    pub fn tail_norm(&self) -> f64 {
        let n = self.coeffs.len();
        let count = (n / 4).max(2).min(n);
        self.coeffs[n - count..].iter().map(|c| c.abs()).sum()
    }

    /// Re-expands the series at a different degree (truncation or zero padding).
    pub fn resized(&self, degree: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(degree + 1, 0.0);
        Self { interval: self.interval, coeffs, rho: self.rho }
    }

    /// Coefficientwise difference; both series must share the interval.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.interval != other.interval {
            return Err(RenormError::Argument(format!(
                "cannot subtract series on {:?} and {:?}",
                self.interval, other.interval
            )));
        }
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| self.coeffs.get(k).copied().unwrap_or(0.0) - other.coeffs.get(k).copied().unwrap_or(0.0))
            .collect();
        Ok(Self { interval: self.interval, coeffs, rho: self.rho.min(other.rho) })
    }

    /// Largest radius usable with [`Self::sup_norm_on_neighborhood`].
    pub fn max_radius(&self) -> f64 {
        self.half_length() * 0.5 * (self.rho - 1.0 / self.rho)
    }

    /// Upper and sampled estimates of `sup |s|` over the ellipse of minor
    /// semi-axis `r` around the interval.
    pub fn sup_norm_on_neighborhood(&self, r: f64) -> Result<NeighborhoodNorm> {
        if !(r > 0.0) {
            return Err(RenormError::Argument(format!("neighborhood radius must be positive, got {r}")));
        }
        let rho = rho_for_minor_axis(r / self.half_length());
        if rho >= self.rho {
            return Err(RenormError::RadiusTooLarge { r, max_r: self.max_radius() });
        }
        let mut power = 1.0;
        let mut upper = 0.0;
        for c in &self.coeffs {
            upper += c.abs() * power;
            power *= rho;
        }
        let [a, b] = self.interval;
        let (mid, half) = (0.5 * (a + b), self.half_length());
        let mut sampled = 0.0_f64;
        for j in 0..ELLIPSE_SAMPLES {
            let theta = 2.0 * PI * j as f64 / ELLIPSE_SAMPLES as f64;
            let w = Complex64::from_polar(rho, theta);
            let t = (w + w.inv()) * 0.5;
            let z = t * half + mid;
            sampled = sampled.max(self.eval_complex(z).norm());
        }
        Ok(NeighborhoodNorm { upper, sampled, rho })
    }
}

#[inline]
fn clenshaw(coeffs: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + coeffs[0]
}

/// Type-I DCT taking values at the extreme points to Chebyshev coefficients.
fn interpolation_coeffs(values: &[f64]) -> Vec<f64> {
    let n = values.len() - 1;
    if n == 0 {
        return vec![values[0]];
    }
    let nf = n as f64;
    (0..=n)
        .map(|k| {
            let mut sum = 0.0;
            for (j, &v) in values.iter().enumerate() {
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                // cos(pi j k / n) with the argument reduced modulo 2n for accuracy
                let idx = (j * k) % (2 * n);
                sum += w * v * (PI * idx as f64 / nf).cos();
            }
            let scale = if k == 0 || k == n { 1.0 / nf } else { 2.0 / nf };
            sum * scale
        })
        .collect()
}
