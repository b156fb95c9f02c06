use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use renorm_core::combinatorics::{CombSequence, UnimodalPermutation};

#[derive(Debug, Parser)]
#[command(name = "renorm", version, about = "Renormalization of analytic unimodal maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve R_word(g) = g by Newton's method.
    FixedPoint(Common),
    /// Eigenvalues of the truncated derivative at a fixed point.
    Spectrum(Common),
    /// Superstable parameters, ratio estimates and scaling ratios.
    Cascade(Common),
    /// Periodic orbit of renormalization realizing a word.
    Horseshoe(Common),
    /// Distances along the stable set and the Cantor-set scaling comparison.
    Stable(Common),
    /// Skew-product renormalization of a coordinate change.
    Skew(Common),
    /// Renormalization tower of a family map.
    Tower(Common),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::FixedPoint(_) => "fixed-point",
            Command::Spectrum(_) => "spectrum",
            Command::Cascade(_) => "cascade",
            Command::Horseshoe(_) => "horseshoe",
            Command::Stable(_) => "stable",
            Command::Skew(_) => "skew",
            Command::Tower(_) => "tower",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::FixedPoint(c)
            | Command::Spectrum(c)
            | Command::Cascade(c)
            | Command::Horseshoe(c)
            | Command::Stable(c)
            | Command::Skew(c)
            | Command::Tower(c) => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Critical exponent(s); a comma-separated list runs independent exponents.
    #[arg(long, value_delimiter = ',', default_value = "2.0")]
    pub alpha: Vec<f64>,
    /// Named symbols: `doubling`, `tripling`, separated by `,` or `;`.
    #[arg(long, conflicts_with = "word_perm")]
    pub word: Option<String>,
    /// Explicit permutations, e.g. "1,0;1,2,0".
    #[arg(long)]
    pub word_perm: Option<String>,
    /// Truncation degree of the coefficient vectors.
    #[arg(long, default_value_t = 40)]
    pub degree: usize,
    /// Residual tolerance for fixed points and periodic orbits.
    #[arg(long, default_value_t = 1e-11)]
    pub tol: f64,
    /// Cascade depth.
    #[arg(long, default_value_t = 10)]
    pub levels: usize,
    /// Renormalization steps (stable, skew, tower).
    #[arg(long, default_value_t = 8)]
    pub steps: usize,
    /// Neighborhood radius for distances and norms.
    #[arg(long, default_value_t = 0.05)]
    pub radius: f64,
    /// Family parameter; defaults to the accumulation point of the word.
    #[arg(long)]
    pub c: Option<f64>,
    /// Amplitude of the coordinate change x + eps (1 - x^2).
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Prior fixed-point (or coefficient vector) JSON used as Newton seed.
    #[arg(long)]
    pub seed_file: Option<PathBuf>,
    /// Worker threads; only independent exponents run concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

impl Common {
    pub fn validate(&self) -> Result<(), String> {
        if self.alpha.is_empty() {
            return Err("at least one --alpha value is required".into());
        }
        if let Some(a) = self.alpha.iter().find(|a| !(**a > 1.0 && a.is_finite())) {
            return Err(format!("--alpha must satisfy alpha > 1, got {a}"));
        }
        if self.degree < 16 {
            return Err(format!("--degree must be at least 16, got {}", self.degree));
        }
        if !(self.tol > 0.0) {
            return Err(format!("--tol must be positive, got {}", self.tol));
        }
        if !(self.radius > 0.0) {
            return Err(format!("--radius must be positive, got {}", self.radius));
        }
        if self.jobs == 0 {
            return Err("--jobs must be at least 1".into());
        }
        if self.c.is_some_and(|c| !(c > 0.0 && c <= 1.0)) {
            return Err(format!("--c must lie in (0, 1], got {}", self.c.unwrap()));
        }
        self.word()?;
        Ok(())
    }

    /// The symbol word; `default` when neither flag is given.
    pub fn word_or(&self, default: &str) -> Result<CombSequence, String> {
        if let Some(w) = &self.word {
            let word = w
                .split([',', ';'])
                .filter(|t| !t.trim().is_empty())
                .map(|t| match t.trim() {
                    "doubling" => Ok(UnimodalPermutation::doubling()),
                    "tripling" => Ok(UnimodalPermutation::tripling()),
                    other => Err(format!("unknown symbol {other:?} in --word (use doubling, tripling or --word-perm)")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if word.is_empty() {
                return Err("--word is empty".into());
            }
            return Ok(CombSequence::new(word));
        }
        let text = self.word_perm.as_deref().unwrap_or(default);
        let word: CombSequence = text.parse().map_err(|e| format!("--word-perm: {e}"))?;
        if word.is_empty() {
            return Err("--word-perm is empty".into());
        }
        Ok(word)
    }

    pub fn word(&self) -> Result<CombSequence, String> {
        self.word_or("doubling")
    }
}
