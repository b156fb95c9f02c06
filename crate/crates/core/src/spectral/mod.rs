//! Fixed points and periodic orbits of renormalization with prescribed
//! combinatorics, the truncated derivative, and its spectrum.
//!
//! Maps are handled through the coefficients of `psi` at a fixed degree `D`.
//! The normalization `psi(-1) = -1` pins `a_0`, so the free coordinates are
//! `a_1..a_D` and every derivative is a `D x D` matrix.

pub mod eigen;
mod seeds;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{detect_renormalization_with, CombSequence, DetectionOptions};
use crate::error::{RenormError, Result};
use crate::fit::{geometric_fit, GeometricFit};
use crate::renorm::{renormalize_detected, RenormOptions};
use crate::series::{chebyshev_nodes, estimate_rho, AnalyticSeries};
use crate::unimodal::{dist_r, embed_j_alpha, UnimodalMap, PSI_INTERVAL};

pub use seeds::{accumulation_map, continue_in_alpha, doubling_seed, word_seed};

pub const DEFAULT_DEGREE: usize = 40;
pub const MIN_DEGREE: usize = 16;
pub const DEFAULT_FD_STEP: f64 = 1e-6;
/// Distance from the nearest even integer beyond which `alpha` is reported as
/// outside the perturbative regime.
pub const REGIME_RADIUS: f64 = 0.25;

pub fn outside_proven_regime(alpha: f64) -> bool {
    let nearest_even = 2.0 * (alpha / 2.0).round().max(1.0);
    (alpha - nearest_even).abs() > REGIME_RADIUS
}

/// The coefficients of `psi` at a fixed degree together with `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    pub alpha: f64,
    pub coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CoeffVectorRepr {
    alpha: f64,
    interval: [f64; 2],
    coeffs: Vec<f64>,
    rho: f64,
}

impl Serialize for CoeffVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CoeffVectorRepr { alpha: self.alpha, interval: PSI_INTERVAL, coeffs: self.coeffs.clone(), rho: estimate_rho(&self.coeffs) }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CoeffVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let r = CoeffVectorRepr::deserialize(deserializer)?;
        if r.interval != PSI_INTERVAL {
            return Err(serde::de::Error::custom(format!("psi interval must be [-1, 0], got {:?}", r.interval)));
        }
        Ok(Self { alpha: r.alpha, coeffs: r.coeffs })
    }
}

impl CoeffVector {
    pub fn from_map(f: &UnimodalMap, degree: usize) -> Self {
        Self { alpha: f.alpha(), coeffs: f.psi().resized(degree).coeffs().to_vec() }
    }

    /// Rebuilds `a_0` from the normalization.
    pub fn from_free(alpha: f64, free: &[f64]) -> Self {
        let tail: f64 = free.iter().enumerate().map(|(k, a)| if k % 2 == 0 { -a } else { *a }).sum();
        let mut coeffs = Vec::with_capacity(free.len() + 1);
        coeffs.push(-1.0 - tail);
        coeffs.extend_from_slice(free);
        Self { alpha, coeffs }
    }

    pub fn free(&self) -> &[f64] {
        &self.coeffs[1..]
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn psi(&self) -> Result<AnalyticSeries> {
        AnalyticSeries::from_coeffs(PSI_INTERVAL, self.coeffs.clone())
    }

    pub fn to_map(&self) -> Result<UnimodalMap> {
        embed_j_alpha(self.psi()?, self.alpha)
    }

    /// Same coefficients at another exponent (for continuation).
    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self { alpha, coeffs: self.coeffs.clone() }
    }

    /// Re-normalized copy at another degree.
    pub fn resized(&self, degree: usize) -> Self {
        let mut free = self.free().to_vec();
        free.resize(degree, 0.0);
        Self::from_free(self.alpha, &free)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|k| (self.coeffs.get(k).copied().unwrap_or(0.0) - other.coeffs.get(k).copied().unwrap_or(0.0)).abs())
            .fold(0.0, f64::max)
    }
}

/// `R_word = R_{theta_N} ∘ ... ∘ R_{theta_1}` at a fixed degree, checking the
/// combinatorics of every step.
#[derive(Debug, Clone)]
pub struct WordOperator {
    pub alpha: f64,
    pub word: CombSequence,
    pub degree: usize,
    pub detection: DetectionOptions,
}

impl WordOperator {
    pub fn new(alpha: f64, word: CombSequence, degree: usize) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(RenormError::Argument(format!("critical exponent must exceed 1, got {alpha}")));
        }
        if word.is_empty() {
            return Err(RenormError::Argument("combinatorial word must not be empty".into()));
        }
        if degree < MIN_DEGREE {
            return Err(RenormError::Argument(format!("degree must be at least {MIN_DEGREE}, got {degree}")));
        }
        Ok(Self { alpha, word, degree, detection: DetectionOptions::default() })
    }

    /// One renormalization with the expected permutation of word position `step`.
    pub fn step(&self, f: &UnimodalMap, step: usize) -> Result<UnimodalMap> {
        let expected = &self.word.word[step % self.word.len()];
        let m = expected.period();
        let violation = |found: String| RenormError::WordViolation { step, expected: expected.clone(), found };
        let data = detect_renormalization_with(f, m, &self.detection)?
            .ok_or_else(|| violation("no restrictive interval".into()))?;
        if data.m != m || &data.theta != expected {
            return Err(violation(data.theta.to_string()));
        }
        let opts = RenormOptions { detection: self.detection, ..RenormOptions::truncated(self.degree, m) };
        Ok(renormalize_detected(f, data, &opts)?.map)
    }

    /// All intermediate maps `g_1, ..., g_N`.
    pub fn orbit(&self, f: &UnimodalMap) -> Result<Vec<UnimodalMap>> {
        let mut out: Vec<UnimodalMap> = Vec::with_capacity(self.word.len());
        for step in 0..self.word.len() {
            let next = self.step(out.last().unwrap_or(f), step)?;
            out.push(next);
        }
        Ok(out)
    }

    pub fn apply_map(&self, f: &UnimodalMap) -> Result<UnimodalMap> {
        Ok(self.orbit(f)?.pop().expect("nonempty word"))
    }

    pub fn apply(&self, v: &CoeffVector) -> Result<CoeffVector> {
        let f = v.to_map()?;
        Ok(CoeffVector::from_map(&self.apply_map(&f)?, self.degree))
    }

    fn apply_free(&self, free: &[f64]) -> Result<Vec<f64>> {
        Ok(self.apply(&CoeffVector::from_free(self.alpha, free))?.free().to_vec())
    }

    /// `max |R_word(g) - g|` over the Chebyshev nodes of `[-1, 0]`.
    pub fn residual(&self, v: &CoeffVector) -> Result<f64> {
        let image = self.apply(v)?;
        node_distance(v, &image)
    }
}

/// `max |psi_1 - psi_2|` over the degree-`D` Chebyshev nodes.
pub fn node_distance(a: &CoeffVector, b: &CoeffVector) -> Result<f64> {
    let (pa, pb) = (a.psi()?, b.psi()?);
    let degree = a.degree().max(b.degree());
    Ok(chebyshev_nodes(PSI_INTERVAL, degree)
        .into_iter()
        .map(|y| (pa.value(y) - pb.value(y)).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub point: CoeffVector,
    pub residual: f64,
    pub word: CombSequence,
    pub iterations: usize,
    pub degree: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub outside_proven_regime: bool,
}

impl FixedPointResult {
    pub fn map(&self) -> Result<UnimodalMap> {
        self.point.to_map()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-11, max_iterations: 20, max_halvings: 8, fd_step: DEFAULT_FD_STEP }
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn newton_fixed_point(
    alpha: f64,
    word: &CombSequence,
    degree: usize,
    tol: f64,
    seed: &CoeffVector,
) -> Result<FixedPointResult> {
    newton_fixed_point_with(alpha, word, degree, seed, &NewtonOptions { tol, ..NewtonOptions::default() })
}

/// Damped Newton for `R_word(g) = g` in the free coordinates.
pub fn newton_fixed_point_with(
    alpha: f64,
    word: &CombSequence,
    degree: usize,
    seed: &CoeffVector,
    opts: &NewtonOptions,
) -> Result<FixedPointResult> {
    if !(opts.tol > 0.0) {
        return Err(RenormError::Argument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let op = WordOperator::new(alpha, word.clone(), degree)?;
    if outside_proven_regime(alpha) {
        log::warn!("alpha = {alpha} is outside the proven perturbative regime near an even integer");
    }
    let d = degree;
    let mut x = seed.with_alpha(alpha).resized(d).free().to_vec();
    let mut fx = difference(&op.apply_free(&x)?, &x);
    let mut iterations = 0;
    loop {
        let point = CoeffVector::from_free(alpha, &x);
        let residual = op.residual(&point)?;
        log::info!("newton iteration {iterations}: node residual {residual:.3e}");
        if residual <= opts.tol {
            break;
        }
        if iterations >= opts.max_iterations {
            return Err(RenormError::Divergence { iterations, residual, last: point.coeffs });
        }
        let jac = jacobian_free(&op, &x, opts.fd_step)?;
        let system = jac - DMatrix::<f64>::identity(d, d);
        let rhs = -DVector::from_column_slice(&fx);
        let delta = system
            .lu()
            .solve(&rhs)
            .ok_or_else(|| RenormError::Divergence { iterations, residual, last: point.coeffs.clone() })?;

        let current = sup(&fx);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + t * b).collect();
            if let Ok(image) = op.apply_free(&trial) {
                let ft = difference(&image, &trial);
                if sup(&ft) < current {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((nx, nf)) = accepted else {
            return Err(RenormError::Divergence { iterations, residual, last: point.coeffs });
        };
        x = nx;
        fx = nf;
        iterations += 1;
    }

    // independent re-check with a fresh operator
    let point = CoeffVector::from_free(alpha, &x);
    let check = WordOperator::new(alpha, word.clone(), degree)?;
    let residual = check.residual(&point)?;
    if residual > opts.tol {
        return Err(RenormError::Divergence { iterations, residual, last: point.coeffs });
    }
    Ok(FixedPointResult {
        point,
        residual,
        word: word.clone(),
        iterations,
        degree,
        outside_proven_regime: outside_proven_regime(alpha),
    })
}

fn difference(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn jacobian_free(op: &WordOperator, x: &[f64], step: f64) -> Result<DMatrix<f64>> {
    let d = x.len();
    let h = step * sup(x).max(1.0);
    let column = |j: usize, h: f64| -> Result<Vec<f64>> {
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let (fp, fm) = (op.apply_free(&plus)?, op.apply_free(&minus)?);
        Ok(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    };
    let columns: Vec<Vec<f64>> = (0..d)
        .into_par_iter()
        .map(|j| column(j, h).or_else(|_| column(j, 0.25 * h)))
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(d, d, |i, j| columns[j][i]))
}

/// Central-difference derivative of `R_word` at `point` in the free
/// coordinates `a_1..a_D`.
pub fn jacobian(alpha: f64, word: &CombSequence, point: &CoeffVector, step: f64) -> Result<DMatrix<f64>> {
    if !(step > 0.0) {
        return Err(RenormError::Argument(format!("finite-difference step must be positive, got {step}")));
    }
    let op = WordOperator::new(alpha, word.clone(), point.degree())?;
    jacobian_free(&op, point.with_alpha(alpha).resized(point.degree()).free(), step)
}

/// `(R_word(p + h v) - R_word(p - h v)) / 2h` in free coordinates.
pub fn directional_difference(
    alpha: f64,
    word: &CombSequence,
    point: &CoeffVector,
    direction: &[f64],
    step: f64,
) -> Result<Vec<f64>> {
    let op = WordOperator::new(alpha, word.clone(), point.degree())?;
    let x = point.free();
    let shift = |s: f64| -> Vec<f64> { x.iter().zip(direction).map(|(a, v)| a + s * v).collect() };
    let (fp, fm) = (op.apply_free(&shift(step))?, op.apply_free(&shift(-step))?);
    Ok(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * step)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Eigenvalue {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl Eigenvalue {
    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Sorted by decreasing modulus.
    pub eigenvalues: Vec<Complex64>,
    /// Leading modulus; the unstable multiplier when `unstable_count == 1`.
    pub delta: f64,
    /// Second-largest modulus.
    pub gap: f64,
    pub unstable_count: usize,
}

impl Spectrum {
    pub fn is_hyperbolic_with_one_unstable_direction(&self) -> bool {
        self.unstable_count == 1 && self.gap < 1.0
    }
}

pub fn spectrum(j: &DMatrix<f64>) -> Result<Spectrum> {
    let eigenvalues = eigen::eigenvalues(j)?;
    let moduli: Vec<f64> = eigenvalues.iter().map(|z| z.norm()).collect();
    Ok(Spectrum {
        delta: moduli.first().copied().unwrap_or(0.0),
        gap: moduli.get(1).copied().unwrap_or(0.0),
        unstable_count: moduli.iter().filter(|&&m| m > 1.0).count(),
        eigenvalues,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub alpha: f64,
    pub word: CombSequence,
    pub degree: usize,
    pub delta: f64,
    pub gap: f64,
    pub eigenvalues: Vec<Eigenvalue>,
    pub residual: f64,
}

pub fn spectral_report(fp: &FixedPointResult, step: f64) -> Result<(SpectralReport, DMatrix<f64>)> {
    let j = jacobian(fp.point.alpha, &fp.word, &fp.point, step)?;
    let s = spectrum(&j)?;
    let report = SpectralReport {
        alpha: fp.point.alpha,
        word: fp.word.clone(),
        degree: fp.degree,
        delta: s.delta,
        gap: s.gap,
        eigenvalues: s.eigenvalues.iter().map(|&z| z.into()).collect(),
        residual: fp.residual,
    };
    Ok((report, j))
}

/// A periodic orbit `g_0 -> g_1 -> ... -> g_{k-1} -> g_0` of single
/// renormalizations with `theta(g_i) = word_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub word: CombSequence,
    pub maps: Vec<CoeffVector>,
    /// `residuals[i] = max_nodes |R(g_i) - g_{i+1}|`.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

impl PeriodicOrbit {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// The orbit relabelled to start at `g_shift`.
    pub fn rotated(&self, shift: usize) -> Self {
        let k = self.maps.len();
        let s = shift % k;
        let mut maps = self.maps.clone();
        maps.rotate_left(s);
        let mut residuals = self.residuals.clone();
        residuals.rotate_left(s);
        Self { word: self.word.rotated(s), maps, residuals, iterations: self.iterations }
    }
}

pub fn periodic_orbit(alpha: f64, word: &CombSequence, degree: usize, tol: f64) -> Result<PeriodicOrbit> {
    let seed = word_seed(alpha, word, degree)?;
    periodic_orbit_from(alpha, word, degree, tol, &seed)
}

/// Solves for `g_0` with `R_word(g_0) = g_0`, then fills in the orbit and
/// checks every link and symbol.
pub fn periodic_orbit_from(
    alpha: f64,
    word: &CombSequence,
    degree: usize,
    tol: f64,
    seed: &CoeffVector,
) -> Result<PeriodicOrbit> {
    let fp = newton_fixed_point(alpha, word, degree, tol, seed)?;
    let op = WordOperator::new(alpha, word.clone(), degree)?;
    let g0 = fp.map()?;
    let images = op.orbit(&g0).map_err(|e| RenormError::OrbitSeed { position: 0, reason: e.to_string() })?;
    let mut maps = vec![fp.point.clone()];
    maps.extend(images[..images.len() - 1].iter().map(|g| CoeffVector::from_map(g, degree)));
    let k = maps.len();
    let mut residuals = Vec::with_capacity(k);
    for i in 0..k {
        let gi = maps[i].to_map()?;
        let next = op.step(&gi, i).map_err(|e| RenormError::OrbitSeed { position: i, reason: e.to_string() })?;
        residuals.push(node_distance(&CoeffVector::from_map(&next, degree), &maps[(i + 1) % k])?);
    }
    Ok(PeriodicOrbit { word: word.clone(), maps, residuals, iterations: fp.iterations })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableReport {
    pub r: f64,
    /// `dist_r(R^m f, R^m g)` for `m = 0..=steps`.
    pub distances: Vec<f64>,
    /// Fit over `m >= 1`.
    pub fit: Option<GeometricFit>,
    /// Set when the tail is not decreasing.
    pub non_monotone_tail: bool,
}

/// Renormalizes both maps `steps` times with the word's combinatorics (cycled)
/// at `degree` and fits the decay of their distance.
pub fn stable_convergence_rate(
    f: &UnimodalMap,
    g: &UnimodalMap,
    word: &CombSequence,
    steps: usize,
    r: f64,
    degree: usize,
) -> Result<StableReport> {
    let op = WordOperator::new(f.alpha(), word.clone(), degree)?;
    let mut fm = f.clone();
    let mut gm = g.clone();
    let mut distances = vec![dist_r(&fm, &gm, r)?];
    for m in 0..steps {
        let (nf, ng) = rayon::join(|| op.step(&fm, m), || op.step(&gm, m));
        let (nf, ng) = (
            nf.map_err(|e| RenormError::TowerBreak { step: m, reason: e.to_string() })?,
            ng.map_err(|e| RenormError::TowerBreak { step: m, reason: e.to_string() })?,
        );
        fm = nf;
        gm = ng;
        distances.push(dist_r(&fm, &gm, r)?);
    }
    let fit = geometric_fit(&distances, 1);
    let non_monotone_tail = distances.windows(2).skip(1).any(|w| w[1] > w[0]);
    if non_monotone_tail {
        log::warn!("stable-set distances are not monotone: {distances:?}");
    }
    Ok(StableReport { r, distances, fit, non_monotone_tail })
}
