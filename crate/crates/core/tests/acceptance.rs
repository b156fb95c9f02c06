//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{rngs::StdRng, Rng, SeedableRng};
use renorm_core::cascade::{accumulation_parameter, cascade_table, superstable_parameter, Family};
use renorm_core::combinatorics::{detect_renormalization, CombSequence, UnimodalPermutation};
use renorm_core::renorm::{renormalize, rescaled_return_map};
use renorm_core::series::chebyshev_nodes;
use renorm_core::skew::{skew_convergence, CoordChange};
use renorm_core::spectral::{
    continue_in_alpha, directional_difference, doubling_seed, jacobian, newton_fixed_point, periodic_orbit,
    spectral_report, spectrum, stable_convergence_rate, FixedPointResult, DEFAULT_DEGREE, DEFAULT_FD_STEP,
};
use renorm_core::{cantor_scaling_compare, EvenUnimodal, Result, UnimodalMap};

const FEIGENBAUM_DELTA: f64 = 4.6692;
const CONTINUATION_GRID: [f64; 5] = [1.90, 1.95, 2.00, 2.05, 2.10];

fn doubling() -> CombSequence {
    CombSequence::repeated(UnimodalPermutation::doubling(), 1)
}

fn fixed_point(alpha: f64, degree: usize) -> Result<FixedPointResult> {
    newton_fixed_point(alpha, &doubling(), degree, 1e-12, &doubling_seed(alpha, degree)?)
}

fn base_point() -> &'static FixedPointResult {
    static FP: OnceLock<FixedPointResult> = OnceLock::new();
    FP.get_or_init(|| fixed_point(2.0, DEFAULT_DEGREE).expect("doubling fixed point at alpha = 2"))
}

fn accumulation_map() -> &'static UnimodalMap {
    static F: OnceLock<UnimodalMap> = OnceLock::new();
    F.get_or_init(|| {
        let fam = Family::standard(2.0).unwrap();
        fam.map(accumulation_parameter(&fam, 12).unwrap()).unwrap()
    })
}

/// Fixed points and their spectra on the continuation grid, ordered as the grid.
struct GridPoint {
    alpha: f64,
    residual: f64,
    delta: f64,
    gap: f64,
    unstable: usize,
}

fn grid() -> &'static Vec<GridPoint> {
    static G: OnceLock<Vec<GridPoint>> = OnceLock::new();
    G.get_or_init(|| {
        let start = base_point();
        let down = continue_in_alpha(start, 1.90, 1e-11).expect("continuation to 1.90");
        let up = continue_in_alpha(start, 2.10, 1e-11).expect("continuation to 2.10");
        let mut points: Vec<FixedPointResult> = down.into_iter().rev().collect();
        points.push(start.clone());
        points.extend(up);
        points
            .iter()
            .map(|fp| {
                let (report, j) = spectral_report(fp, DEFAULT_FD_STEP).expect("spectral report");
                GridPoint {
                    alpha: fp.point.alpha,
                    residual: fp.residual,
                    delta: report.delta,
                    gap: report.gap,
                    unstable: spectrum(&j).unwrap().unstable_count,
                }
            })
            .collect()
    })
}

type Check = fn() -> Result<(bool, String)>;

fn criterion_1() -> Result<(bool, String)> {
    let t0 = Instant::now();
    let fam = Family::standard(2.0)?;
    let (table, fp) = rayon::join(|| cascade_table(&fam, 10), || fixed_point(2.0, DEFAULT_DEGREE));
    let (table, fp) = (table?, fp?);
    let (report, _) = spectral_report(&fp, DEFAULT_FD_STEP)?;
    let elapsed = t0.elapsed();
    let cascade = table.last_delta().unwrap_or(f64::NAN);
    let pass = (report.delta - cascade).abs() < 1e-3
        && (report.delta - FEIGENBAUM_DELTA).abs() < 1e-3
        && (cascade - FEIGENBAUM_DELTA).abs() < 1e-3
        && elapsed < Duration::from_secs(120);
    Ok((pass, format!("spectral delta {:.10}, cascade delta {cascade:.10}, {:.1?}", report.delta, elapsed)))
}

fn criterion_2() -> Result<(bool, String)> {
    let mut pass = true;
    let mut detail = Vec::new();
    for p in grid().iter().filter(|p| [1.9, 2.0, 2.1].contains(&p.alpha)) {
        pass &= p.unstable == 1 && p.gap < 0.95;
        detail.push(format!("alpha {}: {} unstable, gap {:.4}", p.alpha, p.unstable, p.gap));
    }
    let (a, b) = rayon::join(|| fixed_point(2.0, 32), || fixed_point(2.0, 48));
    let d32 = spectral_report(&a?, DEFAULT_FD_STEP)?.0.delta;
    let d48 = spectral_report(&b?, DEFAULT_FD_STEP)?.0.delta;
    pass &= (d32 - d48).abs() < 1e-6;
    detail.push(format!("|delta_32 - delta_48| = {:.1e}", (d32 - d48).abs()));
    Ok((pass, detail.join("; ")))
}

fn criterion_3() -> Result<(bool, String)> {
    let g = grid();
    let alphas: Vec<f64> = g.iter().map(|p| p.alpha).collect();
    let mut pass = alphas.iter().zip(CONTINUATION_GRID).all(|(a, b)| (a - b).abs() < 1e-12);
    pass &= g.iter().all(|p| p.residual < 1e-10);
    pass &= g.windows(2).all(|w| w[1].delta > w[0].delta && (w[1].delta - w[0].delta) < 0.5);
    let deltas: Vec<String> = g.iter().map(|p| format!("{:.5}", p.delta)).collect();
    let worst = g.iter().map(|p| p.residual).fold(0.0, f64::max);
    Ok((pass, format!("delta(alpha) = [{}], max residual {worst:.1e}", deltas.join(", "))))
}

fn criterion_4() -> Result<(bool, String)> {
    let (d, t) = (UnimodalPermutation::doubling(), UnimodalPermutation::tripling());
    let words = [vec![d.clone()], vec![t.clone()], vec![d.clone(), t.clone()], vec![t, d]];
    let orbits: Vec<_> = words
        .iter()
        .map(|w| periodic_orbit(2.0, &CombSequence::new(w.clone()), DEFAULT_DEGREE, 1e-10))
        .collect::<Result<_>>()?;
    let mut pass = true;
    for orbit in &orbits {
        pass &= orbit.max_residual() < 1e-8;
        for (g, theta) in orbit.maps.iter().zip(&orbit.word.word) {
            let data = detect_renormalization(&g.to_map()?, 8)?;
            pass &= data.is_some_and(|data| &data.theta == theta);
        }
    }
    let shifted = orbits[2].rotated(1);
    let shift_err = shifted.maps.iter().zip(&orbits[3].maps).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max);
    pass &= shift_err < 1e-8;
    let residuals: Vec<String> = orbits.iter().map(|o| format!("{}: {:.1e}", o.word, o.max_residual())).collect();
    Ok((pass, format!("residuals [{}], shift mismatch {shift_err:.1e}", residuals.join(", "))))
}

fn criterion_5() -> Result<(bool, String)> {
    let g = base_point().map()?;
    let rep = stable_convergence_rate(accumulation_map(), &g, &doubling(), 8, 0.05, DEFAULT_DEGREE)?;
    let Some(fit) = rep.fit else {
        return Ok((false, "no fit".into()));
    };
    let pass = fit.rate < 1.0 && fit.log_residual < 0.2;
    Ok((pass, format!("lambda {:.4}, log residual {:.3}", fit.rate, fit.log_residual)))
}

fn criterion_6() -> Result<(bool, String)> {
    let phi = CoordChange::fit(|x| x + 0.05 * (1.0 - x * x), 8)?;
    let rep = skew_convergence(accumulation_map(), &phi, 6, 0.05)?;
    let endpoint = rep.endpoint_errors.iter().copied().fold(0.0, f64::max);
    let rate = rep.fit.map_or(f64::NAN, |f| f.rate);
    // Eventually decreasing after at most two transient steps.
    let decreasing = rep.norms.windows(2).skip(2).all(|w| w[1] < w[0]);
    let pass = rep.broken.is_none() && rep.norms.len() == 6 && rate < 1.0 && endpoint < 1e-10 && decreasing;
    Ok((pass, format!("lambda {rate:.4}, endpoint error {endpoint:.1e}, last norm {:.2e}", rep.norms.last().unwrap_or(&f64::NAN))))
}

fn criterion_7() -> Result<(bool, String)> {
    let g = base_point().map()?;
    let rep = cantor_scaling_compare(accumulation_map(), &g, 8)?;
    let mu = rep.fit.map_or(f64::NAN, |f| f.rate);
    Ok((rep.differences.len() == 8 && mu < 1.0, format!("mu {mu:.4}, d_8 {:.2e}", rep.differences.last().unwrap_or(&f64::NAN))))
}

fn criterion_8() -> Result<(bool, String)> {
    let mut pass = true;
    let mut detail = Vec::new();

    let mut parity = 0.0_f64;
    let mut refit = 0.0_f64;
    let mut normalization = 0.0_f64;
    for alpha in [1.9, 2.0, 2.1] {
        let fam = Family::standard(alpha)?;
        let f = fam.map(accumulation_parameter(&fam, 8)?)?;
        let r = renormalize(&f, 8, 48)?;
        for x in chebyshev_nodes([-1.0, 1.0], 64) {
            parity = parity.max((rescaled_return_map(&f, &r.data, x) - rescaled_return_map(&f, &r.data, -x)).abs());
            parity = parity.max((r.map.value(x) - r.map.value(-x)).abs());
        }
        refit = refit.max(r.refit_residual);
        normalization = normalization.max((r.map.psi().value(-1.0) + 1.0).abs());
    }
    pass &= parity < 1e-12 && refit < 1e-9 && normalization < 1e-10;
    detail.push(format!("parity {parity:.1e}, refit {refit:.1e}, normalization {normalization:.1e}"));

    let fp = base_point();
    let j: DMatrix<f64> = jacobian(2.0, &fp.word, &fp.point, DEFAULT_FD_STEP)?;
    let mut rng = StdRng::seed_from_u64(2024);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let v: Vec<f64> = (0..j.ncols()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let dd = DVector::from_vec(directional_difference(2.0, &fp.word, &fp.point, &v, DEFAULT_FD_STEP)?);
        let jv = &j * DVector::from_vec(v);
        worst = worst.max((jv - &dd).norm() / dd.norm());
    }
    pass &= worst < 1e-6;
    detail.push(format!("Jacobian mismatch {worst:.1e}"));

    let c = superstable_parameter(&Family::standard(2.0)?, 1, [1e-6, 1.0])?;
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    pass &= (c - golden).abs() < 1e-12;
    detail.push(format!("golden error {:.1e}", (c - golden).abs()));
    Ok((pass, detail.join("; ")))
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 8] = [
        ("1 cross-validated multiplier", criterion_1),
        ("2 one unstable direction", criterion_2),
        ("3 continuity in alpha", criterion_3),
        ("4 horseshoe witness", criterion_4),
        ("5 stable-set convergence", criterion_5),
        ("6 skew-product convergence", criterion_6),
        ("7 rigidity footprint", criterion_7),
        ("8 operator exactness", criterion_8),
    ];
    let mut failures = 0;
    for (name, check) in checks {
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!("criterion {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
