//! Affine rescalings `A_{p,q}` and the real branch of `z -> -(-z)^alpha`.

use serde::{Deserialize, Serialize};

use crate::error::{RenormError, Result};

/// `z -> slope * z + offset` with `slope != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    slope: f64,
    offset: f64,
}

impl AffineMap {
    pub fn new(slope: f64, offset: f64) -> Result<Self> {
        if slope == 0.0 || !slope.is_finite() || !offset.is_finite() {
            return Err(RenormError::Argument(format!(
                "affine map needs a finite nonzero slope, got {slope} (offset {offset})"
            )));
        }
        Ok(Self { slope, offset })
    }

    pub fn identity() -> Self {
        Self { slope: 1.0, offset: 0.0 }
    }

    /// The map sending `p` to `-1` and `q` to `1`.
    pub fn from_endpoints(p: f64, q: f64) -> Result<Self> {
        if p == q {
            return Err(RenormError::DegenerateInterval(p));
        }
        let width = q - p;
        Ok(Self { slope: 2.0 / width, offset: -(p + q) / width })
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    #[inline]
    pub fn apply(&self, z: f64) -> f64 {
        self.slope * z + self.offset
    }

    #[inline]
    pub fn apply_inverse(&self, w: f64) -> f64 {
        (w - self.offset) / self.slope
    }

    pub fn inverse(&self) -> Self {
        Self { slope: 1.0 / self.slope, offset: -self.offset / self.slope }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { slope: self.slope * other.slope, offset: self.slope * other.offset + self.offset }
    }
}

/// `-(-y)^alpha` for `y <= 0`; maps `(-inf, 0]` into itself.
pub fn branch_power(alpha: f64, y: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(RenormError::Argument(format!("critical exponent must exceed 1, got {alpha}")));
    }
    if y > 0.0 || y.is_nan() {
        return Err(RenormError::BranchDomain(y));
    }
    Ok(-(-y).powf(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn symmetric_endpoints_give_identity() {
        let a = AffineMap::from_endpoints(-1.0, 1.0).unwrap();
        assert_eq!(a, AffineMap::identity());
    }

    #[test]
    fn reversed_endpoints_give_reflection() {
        let a = AffineMap::from_endpoints(1.0, -1.0).unwrap();
        assert_eq!(a.slope(), -1.0);
        assert_eq!(a.apply(0.3), -0.3);
    }

    #[test]
    fn half_interval_rescale() {
        let a = AffineMap::from_endpoints(0.0, 0.5).unwrap();
        assert_eq!((a.slope(), a.offset()), (4.0, -1.0));
        assert_eq!(a.apply(0.0), -1.0);
        assert_eq!(a.apply(0.5), 1.0);
    }

    #[test]
    fn coincident_endpoints_are_rejected() {
        assert!(matches!(AffineMap::from_endpoints(0.2, 0.2), Err(RenormError::DegenerateInterval(_))));
    }

    #[test]
    fn branch_power_values() {
        for alpha in [1.01, 1.5, 2.0, 3.7] {
            assert_eq!(branch_power(alpha, -1.0).unwrap(), -1.0);
        }
        assert_eq!(branch_power(2.0, -0.5).unwrap(), -0.25);
        assert!((branch_power(1.5, -0.25).unwrap() + 0.125).abs() < 1e-16);
        assert_eq!(branch_power(2.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn branch_power_errors() {
        assert!(matches!(branch_power(2.0, 0.1), Err(RenormError::BranchDomain(_))));
        assert!(matches!(branch_power(1.0, -0.5), Err(RenormError::Argument(_))));
    }

    proptest! {
        #[test]
        fn inverse_round_trip(p in -5.0f64..5.0, q in -5.0f64..5.0, zs in proptest::collection::vec(-3.0f64..3.0, 100)) {
            prop_assume!((p - q).abs() > 1e-3);
            let a = AffineMap::from_endpoints(p, q).unwrap();
            prop_assert!((a.apply(p) + 1.0).abs() < 1e-12);
            prop_assert!((a.apply(q) - 1.0).abs() < 1e-12);
            for z in zs {
                prop_assert!((a.apply_inverse(a.apply(z)) - z).abs() < 1e-13 * (1.0 + z.abs()) / (p - q).abs().min(1.0));
                prop_assert!((a.inverse().apply(a.apply(z)) - z).abs() < 1e-12 * (1.0 + z.abs()) / (p - q).abs().min(1.0));
            }
        }

        #[test]
        fn branch_power_is_increasing(alpha in 1.01f64..4.0, mut ys in proptest::collection::vec(-10.0f64..0.0, 2..50)) {
            ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ys.dedup();
            for w in ys.windows(2) {
                prop_assert!(branch_power(alpha, w[0]).unwrap() < branch_power(alpha, w[1]).unwrap());
            }
        }
    }
}
