//! Renormalization of analytic unimodal maps `f(x) = psi(-|x|^alpha)` with an
//! arbitrary critical exponent `alpha > 1`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod affine;
pub mod cascade;
pub mod combinatorics;
pub mod error;
pub mod fit;
pub mod kneading;
pub mod renorm;
pub mod series;
pub mod skew;
pub mod spectral;
pub mod unimodal;

pub use affine::{branch_power, AffineMap};
pub use combinatorics::{
    detect_renormalization, expansion_factor, interval_image, permutation_of, CombSequence, RenormData,
    UnimodalPermutation,
};
pub use error::{RenormError, Result};
pub use series::AnalyticSeries;
pub use unimodal::{dist_r, embed_j_alpha, eval_unimodal, validate_unimodal, EvenUnimodal, UnimodalMap, ValidationReport};
pub use renorm::{renorm_tower, renormalize, RenormOptions, RenormResult, Tower};
pub use cascade::{cantor_scaling_compare, cascade_table, superstable_parameter, CascadeTable, Family};
pub use fit::{geometric_fit, GeometricFit};
pub use kneading::{Kneading, Symbol};
pub use skew::{conjugate_eval, skew_convergence, skew_step, CoordChange, GeneralUnimodalMap, SkewReport};
pub use spectral::{
    jacobian, newton_fixed_point, periodic_orbit, spectral_report, spectrum, stable_convergence_rate, CoeffVector,
    FixedPointResult, PeriodicOrbit, SpectralReport, Spectrum, StableReport,
};
