//! The renormalization operator `R(f) = A ∘ f^m ∘ A^{-1}` and its towers.
//!
//! For an even map with `J = [-x*, x*]` the rescaled return map is again of the
//! form `psi'(-|x|^alpha)` with
//!
//! ```text
//! psi'(y) = A( f^{m-1}( psi(x*^alpha * y) ) ),
//! ```
//!
//! which is analytic in `y`; `psi'` is recovered by Chebyshev interpolation.

use serde::{Deserialize, Serialize};

use crate::combinatorics::{detect_renormalization_with, CombSequence, DetectionOptions, RenormData};
use crate::error::{RenormError, Result};
use crate::series::{chebyshev_midpoints, AnalyticSeries};
use crate::unimodal::{embed_j_alpha, EvenUnimodal, UnimodalMap, PSI_INTERVAL};

pub const DEFAULT_DEGREE: usize = 48;
pub const MAX_DEGREE: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenormOptions {
    pub m_max: usize,
    pub degree: usize,
    /// Raise the degree (up to `max_degree`) while the tail exceeds `tail_tol`.
    pub auto_raise: bool,
    pub max_degree: usize,
    pub tail_tol: f64,
    /// Accepted interpolation defect of the refitted `psi'`.
    pub refit_tol: f64,
    /// Distance from `∂J` within which the boundary orbit is used directly.
    pub boundary_snap: f64,
    pub detection: DetectionOptions,
}

impl Default for RenormOptions {
    fn default() -> Self {
        Self {
            m_max: 8,
            degree: DEFAULT_DEGREE,
            auto_raise: true,
            max_degree: MAX_DEGREE,
            tail_tol: 1e-11,
            refit_tol: 1e-9,
            boundary_snap: 1e-12,
            detection: DetectionOptions::default(),
        }
    }
}

impl RenormOptions {
    /// Fixed degree, no tolerance enforcement: the truncated operator on a
    /// coefficient space of dimension `degree + 1`.
    pub fn truncated(degree: usize, m_max: usize) -> Self {
        Self { m_max, degree, auto_raise: false, refit_tol: f64::INFINITY, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenormResult {
    pub map: UnimodalMap,
    pub data: RenormData,
    pub refit_residual: f64,
    pub tail_norm: f64,
}

/// `x -> A(f^m(A^{-1}(x)))` evaluated directly.
pub fn rescaled_return_map<F: EvenUnimodal + ?Sized>(f: &F, data: &RenormData, x: f64) -> f64 {
    let z = data.rescale.apply_inverse(x);
    data.rescale.apply(f.iterate(z, data.m))
}

/// `psi'(y)` of the renormalization, evaluated without fitting.
pub fn renormalized_psi_value(f: &UnimodalMap, data: &RenormData, y: f64, boundary_snap: f64) -> f64 {
    if (y + 1.0).abs() <= boundary_snap {
        // f^m(∂J) is the fixed endpoint.
        return data.rescale.apply(data.fixed_endpoint());
    }
    let scale = data.half_width().powf(f.alpha());
    let first = f.psi().value(scale * y);
    data.rescale.apply(f.iterate(first, data.m - 1))
}

/// Refits the renormalization for already-detected data at a fixed degree.
pub fn renormalize_with_data(
    f: &UnimodalMap,
    data: &RenormData,
    degree: usize,
    boundary_snap: f64,
) -> Result<(AnalyticSeries, f64)> {
    let psi = AnalyticSeries::fit(|y| renormalized_psi_value(f, data, y, boundary_snap), PSI_INTERVAL, degree)?;
    let residual = chebyshev_midpoints(PSI_INTERVAL, degree.max(2))
        .into_iter()
        .map(|y| (psi.value(y) - renormalized_psi_value(f, data, y, boundary_snap)).abs())
        .fold(0.0, f64::max);
    Ok((psi, residual))
}

pub fn renormalize(f: &UnimodalMap, m_max: usize, degree: usize) -> Result<RenormResult> {
    renormalize_opts(f, &RenormOptions { m_max, degree, ..RenormOptions::default() })
}

pub fn renormalize_opts(f: &UnimodalMap, opts: &RenormOptions) -> Result<RenormResult> {
    let data = detect_renormalization_with(f, opts.m_max, &opts.detection)?
        .ok_or(RenormError::NotRenormalizable { m_max: opts.m_max })?;
    renormalize_detected(f, data, opts)
}

/// Renormalization for given data, honoring the degree policy of `opts`.
pub fn renormalize_detected(f: &UnimodalMap, data: RenormData, opts: &RenormOptions) -> Result<RenormResult> {
    let mut degree = opts.degree;
    let (psi, residual) = loop {
        let (psi, residual) = renormalize_with_data(f, &data, degree, opts.boundary_snap)?;
        if opts.auto_raise && psi.tail_norm() > opts.tail_tol && degree < opts.max_degree {
            degree = (degree + 16).min(opts.max_degree);
            continue;
        }
        break (psi, residual);
    };
    if residual > opts.refit_tol {
        return Err(RenormError::RefitPrecision { residual, tol: opts.refit_tol, degree });
    }
    let tail_norm = psi.tail_norm();
    let map = embed_j_alpha(psi, f.alpha())?;
    Ok(RenormResult { map, data, refit_residual: residual, tail_norm })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerBreak {
    /// Zero-based index of the renormalization that failed.
    pub step: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tower {
    pub steps: Vec<RenormResult>,
    pub word: CombSequence,
    pub broken: Option<TowerBreak>,
}

impl Tower {
    pub fn is_complete(&self) -> bool {
        self.broken.is_none()
    }

    /// `f, R(f), R^2(f), ...` up to the last successful step.
    pub fn maps<'a>(&'a self, f: &'a UnimodalMap) -> impl Iterator<Item = &'a UnimodalMap> + 'a {
        std::iter::once(f).chain(self.steps.iter().map(|s| &s.map))
    }
}

pub fn renorm_tower(f: &UnimodalMap, n: usize, m_max: usize) -> Tower {
    renorm_tower_opts(f, n, &RenormOptions { m_max, ..RenormOptions::default() })
}

pub fn renorm_tower_opts(f: &UnimodalMap, n: usize, opts: &RenormOptions) -> Tower {
    let mut steps: Vec<RenormResult> = Vec::with_capacity(n);
    let mut word = CombSequence::default();
    for step in 0..n {
        let current = steps.last().map(|s| &s.map).unwrap_or(f);
        match renormalize_opts(current, opts) {
            Ok(result) => {
                log::debug!(
                    "tower step {step}: m = {}, |J| = {:.6e}, refit residual {:.2e}",
                    result.data.m,
                    result.data.j[1] - result.data.j[0],
                    result.refit_residual
                );
                word.word.push(result.data.theta.clone());
                steps.push(result);
            }
            Err(e) => {
                return Tower { steps, word, broken: Some(TowerBreak { step, reason: e.to_string() }) };
            }
        }
    }
    Tower { steps, word, broken: None }
}
