//! Non-even unimodal maps `g = phi^{-1} ∘ f ∘ phi` and the skew-product
//! renormalization `(f, phi) -> (R(f), F_f(phi))` with
//! `F_f(phi) = A_{p,q} ∘ phi ∘ A_{phi^{-1}(p), phi^{-1}(q)}^{-1}`.

use serde::{Deserialize, Serialize};

use crate::affine::AffineMap;
use crate::combinatorics::RenormData;
use crate::error::{RenormError, Result};
use crate::fit::{geometric_fit, GeometricFit};
use crate::renorm::{renormalize_opts, RenormOptions};
use crate::series::{chebyshev_midpoints, AnalyticSeries};
use crate::unimodal::{EvenUnimodal, UnimodalMap};

pub const PHI_INTERVAL: [f64; 2] = [-1.0, 1.0];
pub const ENDPOINT_TOL: f64 = 1e-10;
pub const INVERSE_TOL: f64 = 1e-13;
const MONOTONE_SAMPLES: usize = 1024;

/// An increasing analytic diffeomorphism of `[-1, 1]` fixing both endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AnalyticSeries", into = "AnalyticSeries")]
pub struct CoordChange {
    phi: AnalyticSeries,
    dphi: AnalyticSeries,
}

impl TryFrom<AnalyticSeries> for CoordChange {
    type Error = RenormError;

    fn try_from(phi: AnalyticSeries) -> Result<Self> {
        Self::new(phi)
    }
}

impl From<CoordChange> for AnalyticSeries {
    fn from(c: CoordChange) -> Self {
        c.phi
    }
}

impl CoordChange {
    pub fn new(phi: AnalyticSeries) -> Result<Self> {
        if phi.interval() != PHI_INTERVAL {
            return Err(RenormError::InvalidCoordChange(format!("interval must be [-1, 1], got {:?}", phi.interval())));
        }
        for end in [-1.0, 1.0] {
            let v = phi.value(end);
            if (v - end).abs() > ENDPOINT_TOL {
                return Err(RenormError::InvalidCoordChange(format!("phi({end}) = {v}")));
            }
        }
        let dphi = phi.derivative();
        let mut grid = chebyshev_midpoints(PHI_INTERVAL, MONOTONE_SAMPLES);
        grid.extend([-1.0, 1.0]);
        if let Some(x) = grid.into_iter().find(|&x| !(dphi.value(x) > 0.0)) {
            return Err(RenormError::InvalidCoordChange(format!("not increasing: phi'({x}) = {}", dphi.value(x))));
        }
        Ok(Self { phi, dphi })
    }

    pub fn identity() -> Self {
        Self::new(AnalyticSeries::from_coeffs(PHI_INTERVAL, vec![0.0, 1.0]).expect("valid")).expect("identity is valid")
    }

    /// Chebyshev interpolant of `h` at the given degree.
    pub fn fit<F: Fn(f64) -> f64>(h: F, degree: usize) -> Result<Self> {
        Self::new(AnalyticSeries::fit(h, PHI_INTERVAL, degree)?)
    }

    pub fn series(&self) -> &AnalyticSeries {
        &self.phi
    }

    pub fn degree(&self) -> usize {
        self.phi.degree()
    }

    pub fn value(&self, x: f64) -> f64 {
        self.phi.value(x)
    }

    /// `phi^{-1}(y)` by bisection refined with Newton steps.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let (mut lo, mut hi) = (-1.0, 1.0);
        let (flo, fhi) = (self.value(lo) - y, self.value(hi) - y);
        if flo.abs() <= INVERSE_TOL {
            return Ok(lo);
        }
        if fhi.abs() <= INVERSE_TOL {
            return Ok(hi);
        }
        if flo > 0.0 || fhi < 0.0 {
            return Err(RenormError::Domain { x: y, lo: self.value(-1.0), hi: self.value(1.0) });
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let r = self.value(x) - y;
            if r.abs() <= INVERSE_TOL {
                return Ok(x);
            }
            if r < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let newton = x - r / self.dphi.value(x);
            x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= f64::EPSILON * 4.0 {
                return Ok(x);
            }
        }
        Err(RenormError::RootFinding { lo, hi, reason: format!("phi^-1({y}) did not converge") })
    }

    /// Estimates of `sup |phi - id|` on the ellipse neighborhood of radius `r`:
    /// the coefficient bound and the sampled maximum.
    pub fn deviation_from_identity(&self, r: f64) -> Result<(f64, f64)> {
        let d = self.phi.difference(&CoordChange::identity().phi)?;
        if d.coeffs().iter().all(|&c| c == 0.0) {
            return Ok((0.0, 0.0));
        }
        let n = d.sup_norm_on_neighborhood(r)?;
        Ok((n.upper, n.sampled))
    }

    /// Largest `|phi(x) - x|` over a real grid.
    pub fn real_deviation(&self) -> f64 {
        chebyshev_midpoints(PHI_INTERVAL, MONOTONE_SAMPLES).into_iter().map(|x| (self.value(x) - x).abs()).fold(0.0, f64::max)
    }

    /// Distance of `phi(±1)` from `±1`.
    pub fn endpoint_error(&self) -> f64 {
        (self.value(-1.0) + 1.0).abs().max((self.value(1.0) - 1.0).abs())
    }
}

/// `g = phi^{-1} ∘ f ∘ phi` represented by the pair `(f, phi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralUnimodalMap {
    pub base: UnimodalMap,
    pub change: CoordChange,
}

impl GeneralUnimodalMap {
    pub fn new(base: UnimodalMap, change: CoordChange) -> Self {
        Self { base, change }
    }

    pub fn critical_point(&self) -> Result<f64> {
        self.change.inverse(0.0)
    }

    pub fn iterate(&self, x: f64, n: usize) -> Result<f64> {
        (0..n).try_fold(x, |x, _| conjugate_eval(self, x))
    }
}

pub fn conjugate_eval(g: &GeneralUnimodalMap, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(RenormError::Domain { x, lo: -1.0, hi: 1.0 });
    }
    g.change.inverse(g.base.value(g.change.value(x)))
}

/// `A_{phi^{-1}(p), phi^{-1}(q)}`: the rescaling of the restrictive interval of `g`.
pub fn pulled_back_rescale(data: &RenormData, phi: &CoordChange) -> Result<AffineMap> {
    AffineMap::from_endpoints(phi.inverse(data.p)?, phi.inverse(data.q)?)
}

/// `F_f(phi)` for given renormalization data of `f`, refit at `phi`'s degree.
pub fn fiber_map(data: &RenormData, phi: &CoordChange) -> Result<CoordChange> {
    let b = pulled_back_rescale(data, phi)?;
    CoordChange::fit(|x| data.rescale.apply(phi.value(b.apply_inverse(x))), phi.degree())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewStep {
    pub map: UnimodalMap,
    pub change: CoordChange,
    pub data: RenormData,
}

pub fn skew_step(f: &UnimodalMap, phi: &CoordChange, m_max: usize) -> Result<SkewStep> {
    skew_step_opts(f, phi, &RenormOptions { m_max, ..RenormOptions::default() })
}

pub fn skew_step_opts(f: &UnimodalMap, phi: &CoordChange, opts: &RenormOptions) -> Result<SkewStep> {
    let r = renormalize_opts(f, opts)?;
    let change = fiber_map(&r.data, phi)?;
    Ok(SkewStep { map: r.map, change, data: r.data })
}

/// `R(g)` of `g = phi^{-1} ∘ f ∘ phi`, evaluated directly from `g`.
pub fn renormalized_general_value(g: &GeneralUnimodalMap, data: &RenormData, x: f64) -> Result<f64> {
    let b = pulled_back_rescale(data, &g.change)?;
    Ok(b.apply(g.iterate(b.apply_inverse(x), data.m)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewBreak {
    pub step: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewReport {
    pub r: f64,
    /// Deviation of the starting coordinate change.
    pub initial_norm: f64,
    /// `norms[j - 1]` bounds `sup |F^j(phi) - id|` near `[-1, 1]`.
    pub norms: Vec<f64>,
    /// `max |F^j(phi)(±1) ∓ 1|` for each step.
    pub endpoint_errors: Vec<f64>,
    /// Fit of `norms_j ≈ C lambda^j`.
    pub fit: Option<GeometricFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub broken: Option<SkewBreak>,
}

pub fn skew_convergence(f: &UnimodalMap, phi: &CoordChange, k: usize, r: f64) -> Result<SkewReport> {
    skew_convergence_opts(f, phi, k, r, &RenormOptions::default())
}

pub fn skew_convergence_opts(
    f: &UnimodalMap,
    phi: &CoordChange,
    k: usize,
    r: f64,
    opts: &RenormOptions,
) -> Result<SkewReport> {
    let initial_norm = phi.deviation_from_identity(r)?.0;
    let mut norms = Vec::with_capacity(k);
    let mut endpoint_errors = Vec::with_capacity(k);
    let mut broken = None;
    let (mut fj, mut phij) = (f.clone(), phi.clone());
    for step in 0..k {
        match skew_step_opts(&fj, &phij, opts) {
            Ok(s) => {
                norms.push(s.change.deviation_from_identity(r)?.0);
                endpoint_errors.push(s.change.endpoint_error());
                fj = s.map;
                phij = s.change;
            }
            Err(e) => {
                broken = Some(SkewBreak { step, reason: e.to_string() });
                break;
            }
        }
    }
    let mut series = vec![initial_norm];
    series.extend_from_slice(&norms);
    let fit = geometric_fit(&series, 1);
    Ok(SkewReport { r, initial_norm, norms, endpoint_errors, fit, broken })
}
