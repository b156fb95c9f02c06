//! The standard family `f_c(x) = c - (1 + c)|x|^alpha`, its period-doubling
//! cascade, and scaling-ratio comparisons along renormalization towers.
//!
//! `f_c` is `|x|^alpha + c'` after an affine change of coordinates; in the
//! normalized form `psi_c(y) = c + (1 + c) y`, so `f_c(±1) = -1` for every `c`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{restrictive_interval, DetectionOptions};
use crate::error::{RenormError, Result};
use crate::fit::{geometric_fit, GeometricFit};
use crate::renorm::{renorm_tower_opts, RenormOptions};
use crate::series::AnalyticSeries;
use crate::unimodal::{embed_j_alpha, EvenUnimodal, UnimodalMap, PSI_INTERVAL};

/// Absolute certificate on `|f_c^{2^n}(0)|` at a returned superstable parameter.
pub const SUPERSTABLE_TOL: f64 = 1e-13;
/// Earlier returns of the critical orbit closer than this are period collisions.
pub const EARLY_RETURN_TOL: f64 = 1e-10;
pub const MAX_LEVELS: usize = 14;
pub const CSV_HEADER: &str = "n,c,delta_n,lambda_n";

const DELTA_GUESS: f64 = 4.669;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub alpha: f64,
    pub c_range: [f64; 2],
}

impl Family {
    pub fn standard(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(RenormError::Argument(format!("critical exponent must exceed 1, got {alpha}")));
        }
        Ok(Self { alpha, c_range: [0.0, 1.0] })
    }

    pub fn contains(&self, c: f64) -> bool {
        c > self.c_range[0] && c <= self.c_range[1]
    }

    pub fn psi_of_c(&self, c: f64) -> Result<AnalyticSeries> {
        // Chebyshev coefficients of c + (1 + c) y on [-1, 0].
        AnalyticSeries::from_coeffs(PSI_INTERVAL, vec![(c - 1.0) / 2.0, (1.0 + c) / 2.0])
    }

    pub fn map(&self, c: f64) -> Result<UnimodalMap> {
        if !self.contains(c) {
            return Err(RenormError::Argument(format!(
                "parameter {c} outside ({}, {}]",
                self.c_range[0], self.c_range[1]
            )));
        }
        embed_j_alpha(self.psi_of_c(c)?, self.alpha)
    }

    /// Closed-form member, for fast iteration.
    pub fn member(&self, c: f64) -> FamilyMap {
        FamilyMap { alpha: self.alpha, c }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyMap {
    pub alpha: f64,
    pub c: f64,
}

impl EvenUnimodal for FamilyMap {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    fn value(&self, x: f64) -> f64 {
        self.c - (1.0 + self.c) * x.abs().powf(self.alpha)
    }

    #[inline]
    fn derivative(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        -(1.0 + self.c) * self.alpha * x.abs().powf(self.alpha - 1.0) * x.signum()
    }
}

fn critical_iterate(fam: &Family, c: f64, period: usize) -> f64 {
    fam.member(c).iterate(0.0, period)
}

type Big = dashu_float::FBig<dashu_float::round::mode::HalfEven, 2>;

const PRECISE_BITS: usize = 128;

fn big(x: f64) -> Big {
    Big::try_from(x).expect("finite").with_precision(PRECISE_BITS).value()
}

/// `f_c^period(0)` in 128-bit arithmetic; binary64 orbits carry roundoff
/// amplified by the orbit's expansion, which exceeds the certificate from
/// period 256 on.
pub fn precise_critical_return(alpha: f64, c: f64, period: usize) -> f64 {
    let integer_power = (alpha.fract() == 0.0 && alpha <= 16.0).then_some(alpha as u32);
    let (cb, ab) = (big(c), big(alpha));
    let scale = big(1.0) + cb.clone();
    let mut x = big(0.0);
    for _ in 0..period {
        let t = if x < Big::ZERO { -x } else { x };
        let power = if t == Big::ZERO {
            t
        } else if let Some(k) = integer_power {
            (1..k).fold(t.clone(), |acc, _| acc * t.clone())
        } else {
            (t.ln() * ab.clone()).exp()
        };
        x = cb.clone() - scale.clone() * power;
    }
    x.to_f64().value()
}

fn next_float(c: f64, up: bool) -> f64 {
    let bits = c.to_bits();
    f64::from_bits(if up == (c > 0.0) { bits + 1 } else { bits - 1 })
}

/// Secant polish of a bisection result against the precise critical return,
/// then the best of the neighbouring floats.
fn polish(fam: &Family, c: f64, period: usize, bracket: [f64; 2]) -> (f64, f64) {
    let g = |c: f64| precise_critical_return(fam.alpha, c, period);
    let mut best = (c, g(c));
    let mut current = best;
    for _ in 0..4 {
        let h = 16.0 * (next_float(current.0, true) - current.0);
        let slope = (g(current.0 + h) - current.1) / h;
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let next = current.0 - current.1 / slope;
        if next == current.0 || !(next >= bracket[0] && next <= bracket[1]) {
            break;
        }
        let gn = g(next);
        if gn.abs() >= current.1.abs() {
            break;
        }
        current = (next, gn);
        if gn.abs() < best.1.abs() {
            best = current;
        }
    }
    for up in [false, true] {
        let nb = next_float(best.0, up);
        let gn = g(nb);
        if gn.abs() < best.1.abs() {
            best = (nb, gn);
        }
    }
    best
}

/// Parameter in `bracket` where the critical point has period exactly `2^n`.
pub fn superstable_parameter(fam: &Family, n: u32, bracket: [f64; 2]) -> Result<f64> {
    if n == 0 {
        return Err(RenormError::Argument(
            "period 1 makes the critical point fixed, which lies outside the admissible parameters".into(),
        ));
    }
    if n as usize > MAX_LEVELS {
        return Err(RenormError::Argument(format!("level {n} exceeds the binary64 limit {MAX_LEVELS}")));
    }
    let period = 1usize << n;
    let [mut lo, mut hi] = bracket;
    if !(lo < hi) || !fam.contains(lo) || !fam.contains(hi) {
        return Err(RenormError::Argument(format!("bad bracket [{lo}, {hi}]")));
    }
    let mut g_lo = critical_iterate(fam, lo, period);
    let g_hi = critical_iterate(fam, hi, period);
    if g_lo.signum() == g_hi.signum() && g_lo != 0.0 && g_hi != 0.0 {
        return Err(RenormError::NoSignChange { lo, hi });
    }
    if g_lo != 0.0 && g_hi != 0.0 {
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let g = critical_iterate(fam, mid, period);
            if g == 0.0 {
                lo = mid;
                break;
            }
            if g.signum() == g_lo.signum() {
                lo = mid;
                g_lo = g;
            } else {
                hi = mid;
            }
        }
    } else if g_lo != 0.0 {
        lo = hi;
    }
    let (c, g) = polish(fam, lo, period, bracket);
    certify(fam, c, g, period)
}

fn certify(fam: &Family, c: f64, critical_return: f64, period: usize) -> Result<f64> {
    let f = fam.member(c);
    let mut x = 0.0;
    for j in 1..period {
        x = f.value(x);
        if x.abs() <= EARLY_RETURN_TOL {
            return Err(RenormError::WrongWindow { period, returned: j });
        }
    }
    if critical_return.abs() > SUPERSTABLE_TOL {
        return Err(RenormError::RootFinding {
            lo: c,
            hi: c,
            reason: format!("critical return {critical_return:e} exceeds the superstable certificate"),
        });
    }
    Ok(c)
}

/// Half-widths `x_1 > ... > x_n` of the nested period-`2^k` restrictive intervals.
pub fn nested_half_widths<F: EvenUnimodal + ?Sized>(f: &F, n: usize, opts: &DetectionOptions) -> Result<Vec<f64>> {
    let mut widths = Vec::with_capacity(n);
    let mut hi = 1.0;
    for k in 1..=n {
        let data = restrictive_interval(f, 1 << k, hi, opts)?
            .ok_or(RenormError::NotRenormalizable { m_max: 1 << k })?;
        hi = data.half_width();
        widths.push(hi);
    }
    Ok(widths)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeBreak {
    pub level: usize,
    pub reason: String,
}

/// Row `n` (1-based) holds `c_n`, `delta_n = (c_{n+1} - c_n)/(c_{n+2} - c_{n+1})`
/// and `lambda_n = |J_n(c_n)| / |J_{n-1}(c_{n-1})|`, where `J_k(c)` is the
/// period-`2^k` restrictive interval of `f_c` and `|J_0| = 2`.
///
/// Comparing deepest intervals at successive superstable parameters matters:
/// at a fixed `c_n` the last ratio tends to the rescaled superstable map's
/// interval, not the universal scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeTable {
    pub alpha: f64,
    pub c: Vec<f64>,
    pub delta_n: Vec<Option<f64>>,
    pub lambda_n: Vec<Option<f64>>,
    pub c_inf_extrapolated: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub broken: Option<CascadeBreak>,
}

/// Aitken Δ² on the last three entries.
pub fn aitken(c: &[f64]) -> Option<f64> {
    let [a, b, d] = c.get(c.len().checked_sub(3)?..)? else { return None };
    let denom = (d - b) - (b - a);
    if denom == 0.0 {
        return Some(*d);
    }
    Some(d - (d - b).powi(2) / denom)
}

fn ratios(c: &[f64]) -> Vec<Option<f64>> {
    (0..c.len())
        .map(|i| match (c.get(i + 1), c.get(i + 2)) {
            (Some(&c1), Some(&c2)) => Some((c1 - c[i]) / (c2 - c1)),
            _ => None,
        })
        .collect()
}

fn next_parameter(fam: &Family, c: &[f64]) -> Result<f64> {
    let n = c.len() as u32 + 1;
    match c {
        [] => superstable_parameter(fam, 1, [1e-6, fam.c_range[1]]),
        [c1] => first_sign_change(fam, n, *c1 + 1e-6, fam.c_range[1], 4096),
        [.., a, b] => {
            let delta_est = match c {
                [.., z, y, x] => (y - z) / (x - y),
                _ => DELTA_GUESS,
            };
            let step = (b - a) / delta_est;
            first_sign_change(fam, n, b + 0.5 * step, b + 1.5 * step, 64)
        }
    }
}

/// Superstable parameter at the first sign change of `f_c^{2^n}(0)` on a grid.
fn first_sign_change(fam: &Family, n: u32, lo: f64, hi: f64, grid: usize) -> Result<f64> {
    let period = 1usize << n;
    let hi = hi.min(fam.c_range[1]);
    let mut prev = (lo, critical_iterate(fam, lo, period));
    for i in 1..=grid {
        let c = lo + (hi - lo) * i as f64 / grid as f64;
        let g = critical_iterate(fam, c, period);
        if g == 0.0 || g.signum() != prev.1.signum() {
            return superstable_parameter(fam, n, [prev.0, c]);
        }
        prev = (c, g);
    }
    Err(RenormError::NoSignChange { lo, hi })
}

pub fn cascade_table(fam: &Family, k: usize) -> Result<CascadeTable> {
    if k > MAX_LEVELS {
        return Err(RenormError::Argument(format!("at most {MAX_LEVELS} levels are resolvable, got {k}")));
    }
    let mut c: Vec<f64> = Vec::with_capacity(k);
    let mut broken = None;
    for level in 1..=k {
        match next_parameter(fam, &c) {
            Ok(value) => {
                log::debug!("cascade level {level}: c = {value:.17e}");
                c.push(value);
            }
            Err(e) => {
                log::warn!("cascade broke at level {level}: {e}");
                broken = Some(CascadeBreak { level, reason: e.to_string() });
                break;
            }
        }
    }
    // Deep orbits carry ~1e-12 roundoff in the interval images.
    let opts = DetectionOptions { grid: 1024, disjoint_tol: 1e-10, ..DetectionOptions::default() };
    let deepest: Vec<Option<f64>> = c
        .iter()
        .enumerate()
        .map(|(i, &cn)| nested_half_widths(&fam.member(cn), i + 1, &opts).ok().map(|w| w[i]))
        .collect();
    let lambda_n = (0..c.len())
        .map(|i| {
            let prev = if i == 0 { Some(1.0) } else { deepest[i - 1] };
            Some(deepest[i]? / prev?)
        })
        .collect();
    Ok(CascadeTable {
        alpha: fam.alpha,
        delta_n: ratios(&c),
        lambda_n,
        c_inf_extrapolated: aitken(&c),
        c,
        broken,
    })
}

/// Aitken-extrapolated accumulation parameter from `k` cascade levels.
pub fn accumulation_parameter(fam: &Family, k: usize) -> Result<f64> {
    let table = cascade_table(fam, k)?;
    table.c_inf_extrapolated.ok_or_else(|| {
        RenormError::Inconsistent(format!("only {} cascade levels available for extrapolation", table.c.len()))
    })
}

/// 17 significant digits; parses back to the same `f64`.
pub fn format_sig17(x: f64) -> String {
    format!("{x:.16e}")
}

impl CascadeTable {
    pub fn levels(&self) -> usize {
        self.c.len()
    }

    pub fn last_delta(&self) -> Option<f64> {
        self.delta_n.iter().rev().flatten().next().copied()
    }

    pub fn last_lambda(&self) -> Option<f64> {
        self.lambda_n.iter().rev().flatten().next().copied()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        let opt = |v: Option<f64>| v.map(format_sig17).unwrap_or_default();
        for (i, &c) in self.c.iter().enumerate() {
            let delta = opt(self.delta_n.get(i).copied().flatten());
            let lambda = opt(self.lambda_n.get(i).copied().flatten());
            writeln!(out, "{},{},{},{}", i + 1, format_sig17(c), delta, lambda).unwrap();
        }
        out
    }

    /// Parses the CSV form; `alpha` is not part of the rows.
    pub fn from_csv(text: &str, alpha: f64) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(CSV_HEADER) {
            return Err(RenormError::Argument(format!("missing CSV header {CSV_HEADER:?}")));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|e| RenormError::Argument(format!("bad number {s:?}: {e}")))
        };
        let opt = |s: &str| -> Result<Option<f64>> { if s.is_empty() { Ok(None) } else { parse(s).map(Some) } };
        let (mut c, mut delta_n, mut lambda_n) = (Vec::new(), Vec::new(), Vec::new());
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            let [n, ci, d, l] = fields[..] else {
                return Err(RenormError::Argument(format!("expected 4 fields in {line:?}")));
            };
            if n != (i + 1).to_string() {
                return Err(RenormError::Argument(format!("row {} has index {n:?}", i + 1)));
            }
            c.push(parse(ci)?);
            delta_n.push(opt(d)?);
            lambda_n.push(opt(l)?);
        }
        Ok(Self { alpha, c_inf_extrapolated: aitken(&c), c, delta_n, lambda_n, broken: None })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorReport {
    pub depth: usize,
    /// `|J(R^n f)| / 2` for `n = 0..depth`.
    pub ratios_f: Vec<f64>,
    pub ratios_g: Vec<f64>,
    pub differences: Vec<f64>,
    pub fit: Option<GeometricFit>,
}

pub fn cantor_scaling_compare(f: &UnimodalMap, g: &UnimodalMap, depth: usize) -> Result<CantorReport> {
    cantor_scaling_compare_with(f, g, depth, &RenormOptions::default())
}

/// Level ratios of the two towers; fails at the first level where the
/// towers break or their permutations differ.
pub fn cantor_scaling_compare_with(
    f: &UnimodalMap,
    g: &UnimodalMap,
    depth: usize,
    opts: &RenormOptions,
) -> Result<CantorReport> {
    let (tf, tg) = rayon::join(|| renorm_tower_opts(f, depth, opts), || renorm_tower_opts(g, depth, opts));
    for level in 0..depth {
        match (tf.steps.get(level), tg.steps.get(level)) {
            (Some(a), Some(b)) if a.data.theta == b.data.theta => {}
            (Some(_), Some(_)) => return Err(RenormError::CombinatoricsMismatch { level }),
            _ => {
                let reason = tf.broken.as_ref().or(tg.broken.as_ref()).map(|b| b.reason.clone()).unwrap_or_default();
                return Err(RenormError::TowerBreak { step: level, reason });
            }
        }
    }
    let ratio = |t: &crate::renorm::Tower| -> Vec<f64> { t.steps.iter().map(|s| s.data.half_width()).collect() };
    let (ratios_f, ratios_g) = (ratio(&tf), ratio(&tg));
    let differences: Vec<f64> = ratios_f.iter().zip(&ratios_g).map(|(a, b)| (a - b).abs()).collect();
    let fit = geometric_fit(&differences, 0);
    Ok(CantorReport { depth, ratios_f, ratios_g, differences, fit })
}
