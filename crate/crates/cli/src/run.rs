use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;
use renorm_core::cascade::{cantor_scaling_compare, cascade_table, format_sig17, Family, MAX_LEVELS};
use renorm_core::combinatorics::CombSequence;
use renorm_core::renorm::renorm_tower;
use renorm_core::skew::{skew_convergence, CoordChange};
use renorm_core::spectral::{
    accumulation_map, continue_in_alpha, newton_fixed_point, periodic_orbit_from, spectral_report,
    stable_convergence_rate, word_seed, CoeffVector, FixedPointResult, DEFAULT_FD_STEP,
};
use renorm_core::UnimodalMap;
use serde::Serialize;
use serde_json::Value;

use crate::args::{Command, Common, Format};

/// Degree of the initial coordinate change `x + eps (1 - x^2)`.
const PHI_DEGREE: usize = 8;
const TOWER_MAX_PERIOD: usize = 8;

/// A result ready to be written in either format.
pub struct Report {
    pub json: Value,
    pub csv: String,
}

/// Errors that are the caller's fault (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn to_json<T: Serialize>(value: &T) -> Result<Value> {
    Ok(serde_json::to_value(value)?)
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = format!("{header}\n");
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig17).unwrap_or_default()
}

pub fn check(command: &Command) -> Result<()> {
    let c = command.common();
    c.validate().map_err(usage)?;
    if c.format == Format::Csv && c.alpha.len() > 1 {
        return Err(usage("--format csv takes a single --alpha value"));
    }
    if matches!(command, Command::Cascade(_)) && c.levels > MAX_LEVELS {
        return Err(usage(format!("--levels must be at most {MAX_LEVELS}, got {}", c.levels)));
    }
    if matches!(command, Command::Skew(_)) && !(c.eps.abs() < 0.5) {
        return Err(usage(format!("--eps must satisfy |eps| < 0.5 for an increasing coordinate change, got {}", c.eps)));
    }
    Ok(())
}

/// Runs the command for every exponent and combines the reports.
pub fn run(command: &Command) -> Result<Report> {
    let c = command.common();
    let one = |alpha: f64| run_one(command, alpha);
    let mut reports: Vec<Report> = if c.jobs > 1 && c.alpha.len() > 1 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(c.jobs).build()?;
        pool.install(|| c.alpha.par_iter().map(|&a| one(a)).collect::<Result<_>>())?
    } else {
        c.alpha.iter().map(|&a| one(a)).collect::<Result<_>>()?
    };
    if reports.len() == 1 {
        return Ok(reports.pop().expect("one report"));
    }
    Ok(Report {
        json: Value::Array(reports.into_iter().map(|r| r.json).collect()),
        csv: String::new(),
    })
}

fn run_one(command: &Command, alpha: f64) -> Result<Report> {
    let c = command.common();
    log::info!("{} at alpha = {alpha}", command.name());
    match command {
        Command::FixedPoint(_) => fixed_point_report(c, alpha),
        Command::Spectrum(_) => spectrum_report(c, alpha),
        Command::Cascade(_) => cascade_report(c, alpha),
        Command::Horseshoe(_) => horseshoe_report(c, alpha),
        Command::Stable(_) => stable_report(c, alpha),
        Command::Skew(_) => skew_report(c, alpha),
        Command::Tower(_) => tower_report(c, alpha),
    }
}

fn load_seed(path: &Path) -> Result<CoeffVector> {
    let text = fs::read_to_string(path).with_context(|| format!("reading seed file {}", path.display()))?;
    if let Ok(fp) = serde_json::from_str::<FixedPointResult>(&text) {
        return Ok(fp.point);
    }
    serde_json::from_str::<CoeffVector>(&text)
        .with_context(|| format!("{} is neither a fixed-point report nor a coefficient vector", path.display()))
}

fn word(c: &Common) -> Result<CombSequence> {
    c.word().map_err(usage)
}

fn fixed_point(c: &Common, alpha: f64) -> Result<FixedPointResult> {
    let word = word(c)?;
    let Some(path) = &c.seed_file else {
        let seed = word_seed(alpha, &word, c.degree)?;
        return Ok(newton_fixed_point(alpha, &word, c.degree, c.tol, &seed)?);
    };
    let seed = load_seed(path)?.resized(c.degree);
    let start = newton_fixed_point(seed.alpha, &word, c.degree, c.tol, &seed)?;
    if start.point.alpha == alpha {
        return Ok(start);
    }
    log::info!("continuing from alpha = {} to {alpha}", start.point.alpha);
    let path = continue_in_alpha(&start, alpha, c.tol)?;
    Ok(path.into_iter().last().unwrap_or(start))
}

fn family_map(c: &Common, alpha: f64, word: &CombSequence) -> Result<UnimodalMap> {
    Ok(match c.c {
        Some(param) => Family::standard(alpha)?.map(param)?,
        None => accumulation_map(alpha, word)?,
    })
}

fn fixed_point_report(c: &Common, alpha: f64) -> Result<Report> {
    let fp = fixed_point(c, alpha)?;
    log::info!("residual {:.3e} after {} iterations", fp.residual, fp.iterations);
    let rows = fp.point.coeffs.iter().enumerate().map(|(k, a)| vec![k.to_string(), format_sig17(*a)]);
    Ok(Report { json: to_json(&fp)?, csv: csv("k,coeff", rows) })
}

fn spectrum_report(c: &Common, alpha: f64) -> Result<Report> {
    let fp = fixed_point(c, alpha)?;
    let (report, _) = spectral_report(&fp, DEFAULT_FD_STEP)?;
    log::info!("delta {:.12}, gap {:.6}", report.delta, report.gap);
    let rows = report.eigenvalues.iter().enumerate().map(|(i, z)| {
        vec![i.to_string(), format_sig17(z.re), format_sig17(z.im), format_sig17(z.modulus())]
    });
    Ok(Report { json: to_json(&report)?, csv: csv("index,re,im,modulus", rows) })
}

fn cascade_report(c: &Common, alpha: f64) -> Result<Report> {
    let table = cascade_table(&Family::standard(alpha)?, c.levels)?;
    if let Some(b) = &table.broken {
        log::warn!("cascade stopped at level {}: {}", b.level, b.reason);
    }
    Ok(Report { json: to_json(&table)?, csv: table.to_csv() })
}

fn horseshoe_report(c: &Common, alpha: f64) -> Result<Report> {
    let word = c.word_or("doubling;tripling").map_err(usage)?;
    let seed = match &c.seed_file {
        Some(path) => load_seed(path)?.resized(c.degree),
        None => word_seed(alpha, &word, c.degree)?,
    };
    let orbit = periodic_orbit_from(alpha, &word, c.degree, c.tol, &seed)?;
    let rows = orbit
        .word
        .word
        .iter()
        .zip(&orbit.residuals)
        .enumerate()
        .map(|(i, (theta, r))| vec![i.to_string(), format!("\"{theta}\""), format_sig17(*r)]);
    Ok(Report { json: to_json(&orbit)?, csv: csv("position,symbol,residual", rows) })
}

fn stable_report(c: &Common, alpha: f64) -> Result<Report> {
    let word = word(c)?;
    let f = family_map(c, alpha, &word)?;
    let g = fixed_point(c, alpha)?.map()?;
    let stable = stable_convergence_rate(&f, &g, &word, c.steps, c.radius, c.degree)?;
    let cantor = cantor_scaling_compare(&f, &g, c.steps)?;
    let rows = (0..=c.steps).map(|m| {
        vec![m.to_string(), opt(stable.distances.get(m).copied()), opt(cantor.differences.get(m).copied())]
    });
    let json = serde_json::json!({ "stable": to_json(&stable)?, "cantor": to_json(&cantor)? });
    Ok(Report { json, csv: csv("m,distance,scaling_difference", rows) })
}

fn skew_report(c: &Common, alpha: f64) -> Result<Report> {
    let word = word(c)?;
    let f = family_map(c, alpha, &word)?;
    let eps = c.eps;
    let phi = CoordChange::fit(|x| x + eps * (1.0 - x * x), PHI_DEGREE)?;
    let report = skew_convergence(&f, &phi, c.steps, c.radius)?;
    if let Some(b) = &report.broken {
        log::warn!("skew tower stopped at step {}: {}", b.step, b.reason);
    }
    let first = vec!["0".to_string(), format_sig17(report.initial_norm), format_sig17(phi.endpoint_error())];
    let rows = std::iter::once(first).chain(
        report
            .norms
            .iter()
            .zip(&report.endpoint_errors)
            .enumerate()
            .map(|(j, (n, e))| vec![(j + 1).to_string(), format_sig17(*n), format_sig17(*e)]),
    );
    Ok(Report { json: to_json(&report)?, csv: csv("j,norm,endpoint_error", rows) })
}

fn tower_report(c: &Common, alpha: f64) -> Result<Report> {
    let word = word(c)?;
    let f = family_map(c, alpha, &word)?;
    let tower = renorm_tower(&f, c.steps, TOWER_MAX_PERIOD);
    if let Some(b) = &tower.broken {
        log::warn!("tower stopped at step {}: {}", b.step, b.reason);
    }
    let rows = tower.steps.iter().enumerate().map(|(i, s)| {
        vec![
            i.to_string(),
            s.data.m.to_string(),
            format!("\"{}\"", s.data.theta),
            format_sig17(s.data.half_width()),
            format_sig17(s.refit_residual),
            format_sig17(s.tail_norm),
        ]
    });
    Ok(Report { json: to_json(&tower)?, csv: csv("step,m,theta,half_width,refit_residual,tail_norm", rows) })
}
