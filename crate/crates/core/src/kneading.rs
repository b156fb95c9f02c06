//! Kneading sequences of superstable combinatorics and the parameters of the
//! standard family that realize them.

use std::cmp::Ordering;
use std::fmt;

use crate::cascade::Family;
use crate::combinatorics::{CombSequence, UnimodalPermutation};
use crate::error::{RenormError, Result};
use crate::unimodal::EvenUnimodal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    L,
    C,
    R,
}

impl Symbol {
    fn rank(self) -> u8 {
        match self {
            Symbol::L => 0,
            Symbol::C => 1,
            Symbol::R => 2,
        }
    }

    fn flipped(self) -> Self {
        match self {
            Symbol::L => Symbol::R,
            Symbol::C => Symbol::C,
            Symbol::R => Symbol::L,
        }
    }

    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Symbol::L
        } else if x > 0.0 {
            Symbol::R
        } else {
            Symbol::C
        }
    }
}

/// Itinerary of the critical value of a superstable map: `s_1 ... s_{p-1} C`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Kneading(Vec<Symbol>);

impl fmt::Display for Kneading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s:?}")?;
        }
        Ok(())
    }
}

impl Kneading {
    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn period(&self) -> usize {
        self.0.len()
    }

    /// Kneading of the superstable map whose restrictive intervals are
    /// permuted by `theta`.
    pub fn of_permutation(theta: &UnimodalPermutation) -> Self {
        let crit = theta.critical_position();
        let mut pos = crit;
        let mut out = Vec::with_capacity(theta.period());
        for _ in 1..theta.period() {
            pos = theta.images()[pos];
            out.push(if pos < crit { Symbol::L } else { Symbol::R });
        }
        out.push(Symbol::C);
        Self(out)
    }

    pub fn of_word(word: &CombSequence) -> Result<Self> {
        let mut iter = word.word.iter();
        let first = iter.next().ok_or_else(|| RenormError::Argument("empty combinatorial word".into()))?;
        Ok(iter.fold(Self::of_permutation(first), |acc, theta| acc.star(&Self::of_permutation(theta))))
    }

    /// The renormalization product `self * other`.
    pub fn star(&self, other: &Self) -> Self {
        let head = &self.0[..self.0.len() - 1];
        let odd = head.iter().filter(|&&s| s == Symbol::R).count() % 2 == 1;
        let mut out = Vec::with_capacity(self.period() * other.period());
        for &b in &other.0[..other.0.len() - 1] {
            out.extend_from_slice(head);
            out.push(if odd { b.flipped() } else { b });
        }
        out.extend_from_slice(head);
        out.push(Symbol::C);
        Self(out)
    }
}

/// Compares itineraries in the order of the real line: `L < C < R`, reversed
/// after an odd number of `R`s.
pub fn compare_itineraries(a: &[Symbol], b: &[Symbol]) -> Ordering {
    let mut reversed = false;
    for (&x, &y) in a.iter().zip(b) {
        if x != y {
            let ord = x.rank().cmp(&y.rank());
            return if reversed { ord.reverse() } else { ord };
        }
        if x == Symbol::R {
            reversed = !reversed;
        }
    }
    Ordering::Equal
}

pub fn critical_itinerary<F: EvenUnimodal + ?Sized>(f: &F, len: usize) -> Vec<Symbol> {
    let mut x = 0.0;
    (0..len)
        .map(|_| {
            x = f.value(x);
            Symbol::of(x)
        })
        .collect()
}

/// Superstable parameter of the standard family with the given kneading,
/// by bisection on the kneading order (increasing in `c`).
pub fn kneading_parameter(fam: &Family, target: &Kneading) -> Result<f64> {
    let p = target.period();
    let cmp = |c: f64| compare_itineraries(&critical_itinerary(&fam.member(c), p), target.symbols());
    let (mut lo, mut hi) = (1e-9, fam.c_range[1]);
    if cmp(lo) != Ordering::Less || cmp(hi) != Ordering::Greater {
        return Err(RenormError::Argument(format!("kneading {target} is not realized in the family")));
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match cmp(mid) {
            Ordering::Less => lo = mid,
            Ordering::Greater => hi = mid,
            Ordering::Equal => return Ok(mid),
        }
    }
    let f = |c: f64| fam.member(c).iterate(0.0, p).abs();
    Ok(if f(lo) <= f(hi) { lo } else { hi })
}

/// Aitken-accelerated limit of the kneading parameters of `word^r`,
/// `r = 1..=levels`, stopping once the period would exceed `max_period`.
pub fn accumulation_parameter_for(fam: &Family, word: &CombSequence, levels: usize, max_period: usize) -> Result<f64> {
    let base = Kneading::of_word(word)?;
    let mut current = base.clone();
    let mut params = vec![kneading_parameter(fam, &current)?];
    while params.len() < levels && current.period() * base.period() <= max_period {
        current = current.star(&base);
        params.push(kneading_parameter(fam, &current)?);
    }
    Ok(crate::cascade::aitken(&params).unwrap_or(*params.last().expect("nonempty")))
}
