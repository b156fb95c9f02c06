//! Geometric-decay fits `v_m ≈ C λ^m` by least squares on `log v_m`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricFit {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "lambda")]
    pub rate: f64,
    /// Root-mean-square residual of the natural-log fit.
    pub log_residual: f64,
    /// Number of points used.
    pub points: usize,
}

/// Fits `values[m] ≈ C rate^m` over indices `m >= first`.
///
/// Zero entries carry no log information and are skipped. All-zero input gives
/// `C = 0, rate = 0`; fewer than two positive points gives `None`.
pub fn geometric_fit(values: &[f64], first: usize) -> Option<GeometricFit> {
    let tail = values.get(first..)?;
    if !tail.is_empty() && tail.iter().all(|&v| v == 0.0) {
        return Some(GeometricFit { c: 0.0, rate: 0.0, log_residual: 0.0, points: tail.len() });
    }
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite() && **v > 0.0)
        .map(|(i, v)| ((first + i) as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Some(GeometricFit { c: intercept.exp(), rate: slope.exp(), log_residual: (ss / n).sqrt(), points: pts.len() })
}
