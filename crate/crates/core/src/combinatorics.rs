//! Renormalizability, restrictive intervals and unimodal permutations.
//!
//! For an even map the restrictive interval is symmetric, `J = [-x*, x*]`, and
//! one of its endpoints is a fixed point of `f^m`. Detection scans `f^m(x) - x`
//! and `f^m(x) + x` on a grid in `(0, 1]`, refines sign changes, and keeps the
//! largest candidate whose orbit of intervals is invariant with disjoint
//! interiors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::affine::AffineMap;
use crate::error::{RenormError, Result};
use crate::unimodal::EvenUnimodal;

pub type Interval = [f64; 2];

/// Permutation of the intervals `J, f(J), ..., f^{m-1}(J)` induced by `f`.
///
/// Intervals are numbered by position from left to right; `images[k]` is the
/// position of the image of the interval at position `k`. Period doubling is
/// `[1, 0]` and the period-tripling permutation is `[1, 2, 0]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct UnimodalPermutation {
    images: Vec<usize>,
}

impl UnimodalPermutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        if m < 2 {
            return Err(RenormError::Argument(format!("permutation period must be at least 2, got {m}")));
        }
        let mut seen = vec![false; m];
        for &i in &images {
            if i >= m || seen[i] {
                return Err(RenormError::Argument(format!("{images:?} is not a permutation of 0..{m}")));
            }
            seen[i] = true;
        }
        // the intervals form a single cycle under f
        let mut k = 0;
        for step in 1..=m {
            k = images[k];
            if k == 0 && step < m {
                return Err(RenormError::Argument(format!("{images:?} is not a single cycle")));
            }
        }
        Ok(Self { images })
    }

    pub fn doubling() -> Self {
        Self { images: vec![1, 0] }
    }

    pub fn tripling() -> Self {
        Self { images: vec![1, 2, 0] }
    }

    pub fn period(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Position of the interval containing the critical point.
    pub fn critical_position(&self) -> usize {
        let top = self.period() - 1;
        self.images.iter().position(|&i| i == top).expect("permutation")
    }

    pub fn name(&self) -> Option<&'static str> {
        match self.images.as_slice() {
            [1, 0] => Some("doubling"),
            [1, 2, 0] => Some("tripling"),
            _ => None,
        }
    }
}

impl TryFrom<Vec<usize>> for UnimodalPermutation {
    type Error = RenormError;

    fn try_from(images: Vec<usize>) -> Result<Self> {
        Self::new(images)
    }
}

impl From<UnimodalPermutation> for Vec<usize> {
    fn from(p: UnimodalPermutation) -> Self {
        p.images
    }
}

impl fmt::Display for UnimodalPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for UnimodalPermutation {
    type Err = RenormError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "doubling" => return Ok(Self::doubling()),
            "tripling" => return Ok(Self::tripling()),
            _ => {}
        }
        let images = s
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| RenormError::Argument(format!("cannot parse permutation {s:?}: {e}")))?;
        Self::new(images)
    }
}

/// A finite word of permutations, e.g. the combinatorics of a tower.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CombSequence {
    pub word: Vec<UnimodalPermutation>,
}

impl CombSequence {
    pub fn new(word: Vec<UnimodalPermutation>) -> Self {
        Self { word }
    }

    pub fn repeated(symbol: UnimodalPermutation, n: usize) -> Self {
        Self { word: vec![symbol; n] }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Product of the periods.
    pub fn total_period(&self) -> usize {
        self.word.iter().map(|p| p.period()).product()
    }

    pub fn rotated(&self, shift: usize) -> Self {
        let mut word = self.word.clone();
        if !word.is_empty() {
            let k = shift % word.len();
            word.rotate_left(k);
        }
        Self { word }
    }
}

impl fmt::Display for CombSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.word.iter().map(|p| p.to_string()).collect();
        write!(f, "{}", parts.join(";"))
    }
}

impl FromStr for CombSequence {
    type Err = RenormError;

    /// Symbols separated by `;`, each a name or a comma-separated permutation.
    fn from_str(s: &str) -> Result<Self> {
        let word = s
            .split(';')
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { word })
    }
}

/// Which endpoint of `J` is the fixed point of `f^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryType {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenormData {
    pub m: usize,
    pub j: Interval,
    pub p: f64,
    pub q: f64,
    pub rescale: AffineMap,
    pub theta: UnimodalPermutation,
    pub boundary: BoundaryType,
}

impl RenormData {
    /// The endpoint fixed by `f^m`.
    pub fn fixed_endpoint(&self) -> f64 {
        match self.boundary {
            BoundaryType::Left => self.j[0],
            BoundaryType::Right => self.j[1],
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.j[1] - self.j[0])
    }
}

#[derive(Serialize, Deserialize)]
struct RenormDataRepr {
    m: usize,
    #[serde(rename = "J")]
    j: Interval,
    p: f64,
    q: f64,
    theta: UnimodalPermutation,
    mu: f64,
}

impl Serialize for RenormData {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RenormDataRepr {
            m: self.m,
            j: self.j,
            p: self.p,
            q: self.q,
            theta: self.theta.clone(),
            mu: expansion_factor(self),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RenormData {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let r = RenormDataRepr::deserialize(deserializer)?;
        let rescale = AffineMap::from_endpoints(r.p, r.q).map_err(serde::de::Error::custom)?;
        // p is the endpoint where f^m preserves orientation, i.e. the fixed one
        let boundary = if r.p == r.j[1] { BoundaryType::Right } else { BoundaryType::Left };
        Ok(Self { m: r.m, j: r.j, p: r.p, q: r.q, rescale, theta: r.theta, boundary })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionOptions {
    /// Grid points used to bracket fixed points of `f^m`.
    pub grid: usize,
    /// Bisection stopping width.
    pub bisection_tol: f64,
    /// Allowed overlap of touching intervals and overshoot of `f^m(J)`.
    pub disjoint_tol: f64,
}

impl Default for DetectionOptions {
    fn default() -> Self {
        Self { grid: 4096, bisection_tol: 1e-13, disjoint_tol: 1e-12 }
    }
}

/// Exact image of an interval under an even unimodal map.
pub fn interval_image<F: EvenUnimodal + ?Sized>(f: &F, interval: Interval) -> Result<Interval> {
    let [lo, hi] = interval;
    let bound = 1.0 + 1e-12;
    if !(lo <= hi) || lo < -bound || hi > bound {
        return Err(RenormError::Domain { x: if lo < -bound { lo } else { hi }, lo: -1.0, hi: 1.0 });
    }
    Ok(image_unchecked(f, interval))
}

fn image_unchecked<F: EvenUnimodal + ?Sized>(f: &F, [lo, hi]: Interval) -> Interval {
    let (a, b) = (f.value(lo), f.value(hi));
    if lo < 0.0 && hi > 0.0 {
        [a.min(b), f.critical_value()]
    } else {
        [a.min(b), a.max(b)]
    }
}

/// `J, f(J), ..., f^m(J)`.
pub fn orbit_intervals<F: EvenUnimodal + ?Sized>(f: &F, j: Interval, m: usize) -> Vec<Interval> {
    let mut out = Vec::with_capacity(m + 1);
    out.push(j);
    for _ in 0..m {
        let next = image_unchecked(f, *out.last().unwrap());
        out.push(next);
    }
    out
}

/// Returns the smallest period `m <= m_max` with a restrictive interval, and
/// the maximal interval for it.
pub fn detect_renormalization<F: EvenUnimodal + ?Sized>(f: &F, m_max: usize) -> Result<Option<RenormData>> {
    detect_renormalization_with(f, m_max, &DetectionOptions::default())
}

pub fn detect_renormalization_with<F: EvenUnimodal + ?Sized>(
    f: &F,
    m_max: usize,
    opts: &DetectionOptions,
) -> Result<Option<RenormData>> {
    if m_max < 2 {
        return Err(RenormError::Argument(format!("m_max must be at least 2, got {m_max}")));
    }
    for m in 2..=m_max {
        if let Some(data) = restrictive_interval(f, m, 1.0, opts)? {
            return Ok(Some(data));
        }
    }
    Ok(None)
}

/// Maximal symmetric restrictive interval of period exactly `m` whose
/// half-width is at most `search_hi`, if any.
pub fn restrictive_interval<F: EvenUnimodal + ?Sized>(
    f: &F,
    m: usize,
    search_hi: f64,
    opts: &DetectionOptions,
) -> Result<Option<RenormData>> {
    if m < 2 {
        return Err(RenormError::Argument(format!("period must be at least 2, got {m}")));
    }
    let n = opts.grid.max(8);
    let xs: Vec<f64> = (0..=n).map(|i| search_hi * i as f64 / n as f64).collect();
    let values: Vec<f64> = xs.iter().map(|&x| f.iterate(x, m)).collect();

    // Candidate half-widths paired with the orientation of the fixed endpoint.
    let mut candidates: Vec<(f64, BoundaryType)> = Vec::new();
    for (sign, boundary) in [(-1.0, BoundaryType::Right), (1.0, BoundaryType::Left)] {
        let g = |x: f64, fx: f64| fx + sign * x;
        for i in 1..n {
            let (x0, x1) = (xs[i], xs[i + 1]);
            let (g0, g1) = (g(x0, values[i]), g(x1, values[i + 1]));
            if g0 == 0.0 {
                candidates.push((x0, boundary));
                continue;
            }
            if g0.signum() == g1.signum() || g1 == 0.0 {
                continue;
            }
            let root = refine_root(f, m, sign, x0, x1, opts.bisection_tol)?;
            candidates.push((root, boundary));
        }
    }

    // Expanding (or neutral) fixed endpoint only.
    candidates.retain(|&(x, boundary)| {
        let fixed = match boundary {
            BoundaryType::Right => x,
            BoundaryType::Left => -x,
        };
        f.iterate_with_derivative(fixed, m).1 >= 1.0
    });
    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    for (x, boundary) in candidates {
        let j = [-x, x];
        let orbit = orbit_intervals(f, j, m);
        if !is_invariant(&orbit[m], j, opts.disjoint_tol) {
            continue;
        }
        let Some(theta) = induced_permutation(&orbit[..m], opts.disjoint_tol) else {
            continue;
        };
        let deriv_left = f.iterate_with_derivative(-x, m).1;
        let (p, q) = if deriv_left > 0.0 { (-x, x) } else { (x, -x) };
        let rescale = AffineMap::from_endpoints(p, q)?;
        return Ok(Some(RenormData { m, j, p, q, rescale, theta, boundary }));
    }
    Ok(None)
}

fn is_invariant(image: &Interval, j: Interval, tol: f64) -> bool {
    image[0] >= j[0] - tol && image[1] <= j[1] + tol
}

/// Positions of the intervals and the permutation they induce, provided their
/// interiors are pairwise disjoint.
fn induced_permutation(intervals: &[Interval], tol: f64) -> Option<UnimodalPermutation> {
    let m = intervals.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| intervals[a][0].partial_cmp(&intervals[b][0]).unwrap());
    for w in order.windows(2) {
        if intervals[w[1]][0] < intervals[w[0]][1] - tol {
            return None;
        }
    }
    let mut position = vec![0; m];
    for (pos, &i) in order.iter().enumerate() {
        position[i] = pos;
    }
    let mut images = vec![0; m];
    for i in 0..m {
        images[position[i]] = position[(i + 1) % m];
    }
    UnimodalPermutation::new(images).ok()
}

/// Root of `f^m(x) + sign * x` in `[lo, hi]`: bisection followed by Newton polish.
fn refine_root<F: EvenUnimodal + ?Sized>(f: &F, m: usize, sign: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let g = |x: f64| f.iterate(x, m) + sign * x;
    let (mut a, mut b) = (lo, hi);
    let mut ga = g(a);
    if !ga.is_finite() || !g(b).is_finite() {
        return Err(RenormError::RootFinding { lo, hi, reason: "non-finite iterate".into() });
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    let mut x = 0.5 * (a + b);
    let mut gx = g(x);
    for _ in 0..4 {
        let (fx, dfx) = f.iterate_with_derivative(x, m);
        let slope = dfx + sign;
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let next = x - (fx + sign * x) / slope;
        if !(next >= a - tol && next <= b + tol) {
            break;
        }
        let gn = g(next);
        if gn.abs() >= gx.abs() {
            break;
        }
        x = next;
        gx = gn;
    }
    if !x.is_finite() {
        return Err(RenormError::RootFinding { lo, hi, reason: "refinement left the bracket".into() });
    }
    Ok(x)
}

/// Permutation of `J, f(J), ..., f^{m-1}(J)`, recomputed from the map.
pub fn permutation_of<F: EvenUnimodal + ?Sized>(f: &F, data: &RenormData) -> Result<UnimodalPermutation> {
    if data.m < 2 {
        return Err(RenormError::Argument(format!("period must be at least 2, got {}", data.m)));
    }
    let orbit = orbit_intervals(f, data.j, data.m);
    induced_permutation(&orbit[..data.m], DetectionOptions::default().disjoint_tol)
        .ok_or_else(|| RenormError::Inconsistent(format!("intervals of period {} overlap", data.m)))
}

/// `|A'| = 2 / |J|`, the real-bounds expansion of the rescaling.
pub fn expansion_factor(data: &RenormData) -> f64 {
    data.rescale.slope().abs()
}
