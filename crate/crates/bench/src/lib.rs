//! Fixtures shared by the benchmarks.

use renorm_core::cascade::{accumulation_parameter, Family};
use renorm_core::combinatorics::{CombSequence, UnimodalPermutation};
use renorm_core::spectral::{doubling_seed, newton_fixed_point, FixedPointResult};
use renorm_core::UnimodalMap;

pub fn doubling() -> CombSequence {
    CombSequence::repeated(UnimodalPermutation::doubling(), 1)
}

/// The standard-family map at the period-doubling accumulation point.
pub fn accumulation_map(alpha: f64) -> UnimodalMap {
    let fam = Family::standard(alpha).expect("alpha > 1");
    fam.map(accumulation_parameter(&fam, 10).expect("cascade")).expect("admissible parameter")
}

pub fn feigenbaum_point(degree: usize) -> FixedPointResult {
    let seed = doubling_seed(2.0, degree).expect("seed");
    newton_fixed_point(2.0, &doubling(), degree, 1e-12, &seed).expect("fixed point")
}
