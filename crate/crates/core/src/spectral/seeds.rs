//! Starting points for the Newton solver.
//!
//! Base fixed points come from accumulation maps of the standard family pushed
//! a few steps along their own renormalization tower; nearby exponents are
//! reached by continuation in `alpha`.

use crate::cascade::{accumulation_parameter, Family};
use crate::combinatorics::{CombSequence, UnimodalPermutation};
use crate::error::{RenormError, Result};
use crate::kneading::accumulation_parameter_for;
use crate::unimodal::UnimodalMap;

use super::{newton_fixed_point, CoeffVector, FixedPointResult, WordOperator};

const DOUBLING_LEVELS: usize = 12;
const DOUBLING_STEPS: usize = 5;
const WORD_LEVELS: usize = 4;
const WORD_MAX_PERIOD: usize = 4096;
/// Minimum number of renormalizations applied to a word seed.
const WORD_MIN_STEPS: usize = 3;
pub const MAX_ALPHA_STEP: f64 = 0.05;

fn push_along_tower(f: &UnimodalMap, word: &CombSequence, steps: usize, degree: usize) -> Result<CoeffVector> {
    let op = WordOperator::new(f.alpha(), word.clone(), degree)?;
    let mut g = f.clone();
    for step in 0..steps {
        g = op.step(&g, step).map_err(|e| RenormError::OrbitSeed { position: step % word.len(), reason: e.to_string() })?;
    }
    Ok(CoeffVector::from_map(&g, degree))
}

fn is_doubling(word: &CombSequence) -> bool {
    word.word.iter().all(|t| *t == UnimodalPermutation::doubling())
}

/// The standard-family map whose renormalization tower realizes `word`
/// periodically: the cascade accumulation point for doubling words, the
/// kneading limit of `word^r` otherwise.
pub fn accumulation_map(alpha: f64, word: &CombSequence) -> Result<UnimodalMap> {
    if word.is_empty() {
        return Err(RenormError::Argument("combinatorial word must not be empty".into()));
    }
    let fam = Family::standard(alpha)?;
    let c = if is_doubling(word) {
        accumulation_parameter(&fam, DOUBLING_LEVELS)?
    } else {
        accumulation_parameter_for(&fam, word, WORD_LEVELS, WORD_MAX_PERIOD)?
    };
    fam.map(c)
}

/// `R^5(f_{c_inf})` for the period-doubling cascade of the standard family.
pub fn doubling_seed(alpha: f64, degree: usize) -> Result<CoeffVector> {
    let word = CombSequence::repeated(UnimodalPermutation::doubling(), 1);
    push_along_tower(&accumulation_map(alpha, &word)?, &word, DOUBLING_STEPS, degree)
}

/// Seed for `R_word`: the family map whose kneading is `word^∞`, renormalized
/// a whole number of word periods (at least three steps).
pub fn word_seed(alpha: f64, word: &CombSequence, degree: usize) -> Result<CoeffVector> {
    if !word.is_empty() && is_doubling(word) {
        return doubling_seed(alpha, degree);
    }
    let f = accumulation_map(alpha, word)?;
    let steps = word.len() * WORD_MIN_STEPS.div_ceil(word.len());
    push_along_tower(&f, word, steps, degree)
}

/// Follows a fixed point from `start.point.alpha` to `target` in steps of at
/// most `MAX_ALPHA_STEP`, re-solving at every intermediate exponent.
pub fn continue_in_alpha(start: &FixedPointResult, target: f64, tol: f64) -> Result<Vec<FixedPointResult>> {
    let from = start.point.alpha;
    let n = ((target - from).abs() / MAX_ALPHA_STEP - 1e-9).ceil().max(0.0) as usize;
    let mut out = Vec::with_capacity(n);
    let mut current = start.clone();
    for i in 1..=n {
        let alpha = from + (target - from) * i as f64 / n as f64;
        current = newton_fixed_point(alpha, &start.word, start.degree, tol, &current.point)?;
        out.push(current.clone());
    }
    Ok(out)
}
