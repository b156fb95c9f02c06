//! Even unimodal maps `f(x) = psi(-|x|^alpha)` with `psi` on `[-1, 0]`.

use serde::{Deserialize, Serialize};

use crate::error::{RenormError, Result};
use crate::series::{chebyshev_nodes, AnalyticSeries, DEFAULT_EVAL_MARGIN};

/// The interval on which `psi` lives.
pub const PSI_INTERVAL: [f64; 2] = [-1.0, 0.0];

/// Tolerance on `|psi(-1) + 1|`.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Default number of nodes used to certify monotonicity.
pub const DEFAULT_VALIDATION_NODES: usize = 1024;

/// Pointwise access to an even unimodal map with its critical point at 0.
///
/// Combinatorial routines only need values and derivatives, so the analytic
/// maps and closed-form family members share this interface.
pub trait EvenUnimodal: Sync {
    fn alpha(&self) -> f64;
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;

    fn critical_value(&self) -> f64 {
        self.value(0.0)
    }

    /// `f^n(x)`.
    fn iterate(&self, x: f64, n: usize) -> f64 {
        (0..n).fold(x, |acc, _| self.value(acc))
    }

    /// `(f^n(x), (f^n)'(x))` by the chain rule.
    fn iterate_with_derivative(&self, x: f64, n: usize) -> (f64, f64) {
        let mut value = x;
        let mut slope = 1.0;
        for _ in 0..n {
            slope *= self.derivative(value);
            value = self.value(value);
        }
        (value, slope)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub is_unimodal: bool,
    pub boundary_residual: f64,
    pub critical_value: f64,
    pub monotonicity_margin: f64,
    /// `psi(0) = 1`: the map is onto `[-1, 1]` (closure stratum of the space).
    pub boundary_stratum: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnimodalMap {
    alpha: f64,
    psi: AnalyticSeries,
    psi_prime: AnalyticSeries,
}

#[derive(Serialize, Deserialize)]
struct UnimodalMapRepr {
    alpha: f64,
    interval: [f64; 2],
    coeffs: Vec<f64>,
    rho: f64,
}

impl Serialize for UnimodalMap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        UnimodalMapRepr {
            alpha: self.alpha,
            interval: self.psi.interval(),
            coeffs: self.psi.coeffs().to_vec(),
            rho: self.psi.rho(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UnimodalMap {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = UnimodalMapRepr::deserialize(deserializer)?;
        let psi = AnalyticSeries::new(repr.interval, repr.coeffs, repr.rho).map_err(serde::de::Error::custom)?;
        embed_j_alpha(psi, repr.alpha).map_err(serde::de::Error::custom)
    }
}

/// `j_alpha(psi)`, validated.
pub fn embed_j_alpha(psi: AnalyticSeries, alpha: f64) -> Result<UnimodalMap> {
    let map = UnimodalMap::from_parts(psi, alpha)?;
    let report = validate_unimodal(&map);
    if report.is_unimodal {
        Ok(map)
    } else {
        Err(RenormError::NotUnimodal(Box::new(report)))
    }
}

impl UnimodalMap {
    /// Builds the map without the unimodality check.
    pub fn from_parts(psi: AnalyticSeries, alpha: f64) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(RenormError::Argument(format!("critical exponent must exceed 1, got {alpha}")));
        }
        if psi.interval() != PSI_INTERVAL {
            return Err(RenormError::Argument(format!(
                "psi must be defined on [-1, 0], got {:?}",
                psi.interval()
            )));
        }
        let psi_prime = psi.derivative();
        Ok(Self { alpha, psi, psi_prime })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn psi(&self) -> &AnalyticSeries {
        &self.psi
    }

    pub fn into_psi(self) -> AnalyticSeries {
        self.psi
    }

    /// Largest `|x|` accepted by [`Self::eval`].
    pub fn domain_limit(&self) -> f64 {
        (1.0 + 0.5 * DEFAULT_EVAL_MARGIN).powf(1.0 / self.alpha)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let lim = self.domain_limit();
        if !(x.abs() <= lim) {
            return Err(RenormError::Domain { x, lo: -lim, hi: lim });
        }
        Ok(EvenUnimodal::value(self, x))
    }

    /// Same exponent with `psi` replaced.
    pub fn with_psi(&self, psi: AnalyticSeries) -> Result<Self> {
        Self::from_parts(psi, self.alpha)
    }
}

impl EvenUnimodal for UnimodalMap {
    fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    fn value(&self, x: f64) -> f64 {
        self.psi.value(-x.abs().powf(self.alpha))
    }

    #[inline]
    fn derivative(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let ax = x.abs();
        let inner = -self.alpha * ax.powf(self.alpha - 1.0) * x.signum();
        self.psi_prime.value(-ax.powf(self.alpha)) * inner
    }
}

pub fn eval_unimodal(f: &UnimodalMap, x: f64) -> Result<f64> {
    f.eval(x)
}

pub fn validate_unimodal(f: &UnimodalMap) -> ValidationReport {
    validate_unimodal_with(f, DEFAULT_VALIDATION_NODES)
}

pub fn validate_unimodal_with(f: &UnimodalMap, nodes: usize) -> ValidationReport {
    let psi = f.psi();
    let boundary_residual = (psi.value(-1.0) + 1.0).abs();
    let critical_value = psi.value(0.0);
    let ys = chebyshev_nodes(PSI_INTERVAL, nodes.max(2) - 1);
    let monotonicity_margin = ys
        .iter()
        .map(|&y| f.psi_prime.value(y))
        .fold(f64::INFINITY, f64::min);
    // f' > 0 on [-1, 0) and f' < 0 on (0, 1]
    let signs_ok = chebyshev_nodes([-1.0, 1.0], nodes.max(2) - 1)
        .into_iter()
        .filter(|&x| x != 0.0)
        .all(|x| {
            let d = EvenUnimodal::derivative(f, x);
            if x < 0.0 {
                d > 0.0
            } else {
                d < 0.0
            }
        });
    let boundary_stratum = critical_value >= 1.0 - 1e-14;
    let is_unimodal = boundary_residual <= BOUNDARY_TOL
        && monotonicity_margin > 0.0
        && signs_ok
        && critical_value > -1.0
        && critical_value <= 1.0 + 1e-12;
    ValidationReport { is_unimodal, boundary_residual, critical_value, monotonicity_margin, boundary_stratum }
}

/// `|alpha_1 - alpha_2| + sup |psi_1 - psi_2|` over the radius-`r` neighborhood
/// of `[-1, 0]`, using the coefficient bound (an upper estimate).
pub fn dist_r(f1: &UnimodalMap, f2: &UnimodalMap, r: f64) -> Result<f64> {
    let diff = f1.psi().difference(f2.psi())?;
    let norm = diff.sup_norm_on_neighborhood(r)?;
    Ok((f1.alpha - f2.alpha).abs() + norm.upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_psi(c: f64) -> AnalyticSeries {
        AnalyticSeries::fit(|y| c + (1.0 + c) * y, PSI_INTERVAL, 1).unwrap()
    }

    #[test]
    fn full_map_embeds_on_boundary_stratum() {
        let f = embed_j_alpha(linear_psi(1.0), 2.0).unwrap();
        assert_eq!(f.eval(0.0).unwrap(), 1.0);
        assert_eq!(f.eval(1.0).unwrap(), -1.0);
        assert_eq!(f.eval(-1.0).unwrap(), -1.0);
        assert!((f.eval(0.3).unwrap() - (1.0 - 2.0 * 0.09)).abs() < 1e-15);
        let report = validate_unimodal(&f);
        assert!(report.is_unimodal);
        assert!(report.boundary_stratum);
        assert_eq!(report.critical_value, 1.0);
    }

    #[test]
    fn family_member_values() {
        let f = embed_j_alpha(linear_psi(0.5), 2.0).unwrap();
        assert!((f.eval(0.4).unwrap() - (0.5 - 1.5 * 0.16)).abs() < 1e-15);
        assert!((f.eval(1.0).unwrap() + 1.0).abs() < 1e-15);
        assert!(!validate_unimodal(&f).boundary_stratum);
    }

    #[test]
    fn non_even_exponent_values_and_evenness() {
        let f = embed_j_alpha(linear_psi(1.0), 1.5).unwrap();
        let expected = 1.0 - 2.0 * 0.5f64.powf(1.5);
        assert!((f.eval(0.5).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.29289).abs() < 1e-5);
        assert_eq!(f.eval(-0.5).unwrap(), f.eval(0.5).unwrap());
    }

    #[test]
    fn constant_minus_one_fails_monotonicity() {
        let psi = AnalyticSeries::new(PSI_INTERVAL, vec![-1.0, 0.0], 2.0).unwrap();
        let f = UnimodalMap::from_parts(psi.clone(), 2.0).unwrap();
        let report = validate_unimodal(&f);
        assert!(!report.is_unimodal);
        assert!(report.monotonicity_margin <= 0.0);
        assert!(matches!(embed_j_alpha(psi, 2.0), Err(RenormError::NotUnimodal(_))));
    }

    #[test]
    fn golden_family_member_validates() {
        let c = 0.618;
        let f = embed_j_alpha(linear_psi(c), 2.0).unwrap();
        let report = validate_unimodal(&f);
        assert!(report.is_unimodal);
        assert!(report.boundary_residual < 1e-14);
        // Oracle: derivative of c - (1+c) x^2 has the required sign on 1000 nodes.
        for j in 0..1000 {
            let x = -1.0 + 2.0 * (j as f64 + 0.5) / 1000.0;
            let d = -2.0 * (1.0 + c) * x;
            assert_eq!(d > 0.0, x < 0.0);
            assert_eq!(EvenUnimodal::derivative(&f, x) > 0.0, x < 0.0);
        }
    }

    #[test]
    fn exponent_must_exceed_one() {
        assert!(UnimodalMap::from_parts(linear_psi(0.5), 1.0).is_err());
    }

    #[test]
    fn out_of_domain_evaluation() {
        let f = embed_j_alpha(linear_psi(0.5), 2.0).unwrap();
        assert!(matches!(f.eval(1.5), Err(RenormError::Domain { .. })));
    }

    #[test]
    fn distance_to_self_is_zero() {
        let f = embed_j_alpha(linear_psi(0.7), 2.0).unwrap();
        assert_eq!(dist_r(&f, &f, 0.2).unwrap(), 0.0);
    }

    #[test]
    fn distance_of_linear_perturbation() {
        let eps = 1e-3;
        let psi = AnalyticSeries::fit(|y| 0.6 + 1.6 * y, PSI_INTERVAL, 6).unwrap().with_rho(50.0).unwrap();
        let psi2 = AnalyticSeries::fit(|y| 0.6 + 1.6 * y + eps * (y + 1.0), PSI_INTERVAL, 6)
            .unwrap()
            .with_rho(50.0)
            .unwrap();
        let f1 = UnimodalMap::from_parts(psi, 2.0).unwrap();
        let f2 = UnimodalMap::from_parts(psi2, 2.0).unwrap();
        let d = dist_r(&f1, &f2, 0.1).unwrap();
        // Round-neighborhood sup of |y + 1| is 1.1; the bound may not fall below it.
        assert!(d >= eps * 1.1);
        // Oracle: boundary sampling of |y + 1| on the inscribed ellipse.
        let sampled = f1.psi().difference(f2.psi()).unwrap().sup_norm_on_neighborhood(0.1).unwrap().sampled;
        assert!((sampled - eps * (0.5 + 0.5 * 1.04f64.sqrt())).abs() < 1e-15);
        assert!(d >= sampled);
    }

    #[test]
    fn exponent_term_enters_distance() {
        let f1 = embed_j_alpha(linear_psi(0.7), 2.0).unwrap();
        let f2 = embed_j_alpha(linear_psi(0.7), 2.1).unwrap();
        assert!((dist_r(&f1, &f2, 0.1).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let f = embed_j_alpha(AnalyticSeries::fit(|y| 0.6 + 1.6 * y + 0.01 * y * y * (1.0 + y), PSI_INTERVAL, 5).unwrap(), 2.3)
            .unwrap();
        let text = serde_json::to_string(&f).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["alpha", "coeffs", "interval", "rho"]);
        let back: UnimodalMap = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_map() -> impl Strategy<Value = UnimodalMap> {
            (0.1f64..0.95, 1.2f64..3.5, -0.05f64..0.05).prop_map(|(c, alpha, bump)| {
                let psi = AnalyticSeries::fit(
                    move |y| c + (1.0 + c) * y + bump * y * (1.0 + y),
                    PSI_INTERVAL,
                    4,
                )
                .unwrap()
                .with_rho(20.0)
                .unwrap();
                UnimodalMap::from_parts(psi, alpha).unwrap()
            })
        }

        proptest! {
            #[test]
            fn evaluation_is_even(f in arb_map(), x in -1.0f64..1.0) {
                prop_assert_eq!(f.eval(x).unwrap(), f.eval(-x).unwrap());
            }

            #[test]
            fn triangle_inequality(f in arb_map(), g in arb_map(), h in arb_map()) {
                let r = 0.1;
                let fg = dist_r(&f, &g, r).unwrap();
                let gh = dist_r(&g, &h, r).unwrap();
                let fh = dist_r(&f, &h, r).unwrap();
                prop_assert!(fh <= fg + gh + 1e-12);
                prop_assert!((fg - dist_r(&g, &f, r).unwrap()).abs() < 1e-15);
            }

            #[test]
            fn embedding_reads_back(f in arb_map()) {
                let back = UnimodalMap::from_parts(f.psi().clone(), f.alpha()).unwrap();
                prop_assert_eq!(back.alpha(), f.alpha());
                prop_assert_eq!(back.psi(), f.psi());
            }
        }
    }
}
