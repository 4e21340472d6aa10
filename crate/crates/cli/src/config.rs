use std::path::{Path, PathBuf};

use extsource::equilibrium::{parse_decimal, Potential};
use extsource::kernel::Regime;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MIN_DIGITS: u32 = 32;

/// Local coordinates `(ξ, η)`; the run uses every pair of the product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub xi: Vec<String>,
    pub eta: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSpec {
    #[serde(default = "default_delta")]
    pub delta: String,
    #[serde(default = "default_delta_prime")]
    pub delta_prime: String,
    #[serde(default = "default_big_m")]
    pub big_m: usize,
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        DiagnosticsSpec {
            delta: default_delta(),
            delta_prime: default_delta_prime(),
            big_m: default_big_m(),
        }
    }
}

fn default_delta() -> String {
    "0.15".into()
}

fn default_delta_prime() -> String {
    "0.2".into()
}

fn default_big_m() -> usize {
    6
}

fn default_t_list() -> Vec<String> {
    vec!["1".into()]
}

fn default_regime() -> Regime {
    Regime::Bulk
}

fn default_digits() -> u32 {
    64
}

fn default_csv_digits() -> usize {
    20
}

fn default_true() -> bool {
    true
}

/// One JSON document; every real is a decimal string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Coefficients of `V`, ascending degree.
    pub potential: Vec<String>,
    pub n_list: Vec<u32>,
    #[serde(default = "default_t_list")]
    pub t_list: Vec<String>,
    #[serde(default = "default_regime")]
    pub regime: Regime,
    /// Defaults to `{−0.5, 0, 0.5}²` in the bulk, `{0, 0.5, 1}²` at an edge.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Bulk point; defaults to the midpoint of the support.
    #[serde(default)]
    pub x_star: Option<String>,
    /// Equilibrium precision. Systems for `n` use `max(digits, 12n)`.
    #[serde(default = "default_digits")]
    pub digits: u32,
    #[serde(default = "default_true")]
    pub conjugate: bool,
    #[serde(default)]
    pub diagnostics: DiagnosticsSpec,
    /// Significant digits of multiprecision CSV columns.
    #[serde(default = "default_csv_digits")]
    pub csv_digits: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
}

/// Parsed and checked form of a [`RunConfig`].
#[derive(Clone, Debug)]
pub struct Validated {
    pub raw: RunConfig,
    pub potential: Potential,
    pub t_list: Vec<Rational>,
    pub grid: Vec<(Rational, Rational)>,
    pub x_star: Option<Rational>,
    pub delta: f64,
    pub delta_prime: f64,
    pub hash: String,
}

fn decimal(what: &str, s: &str) -> Result<Rational, CliError> {
    parse_decimal(s).ok_or_else(|| CliError::Validation(format!("{what}: {s:?} is not a decimal number")))
}

pub fn to_float(r: &Rational, prec: u32) -> Float {
    Float::with_val(prec, r)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    /// Identifies everything that affects computed values; output and
    /// cache locations are excluded.
    pub fn hash(&self) -> String {
        let mut view = self.clone();
        view.output_dir = None;
        view.cache_dir = None;
        let text = serde_json::to_string(&view).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(self) -> Result<Validated, CliError> {
        if self.n_list.is_empty() {
            return Err(CliError::Validation("n_list must not be empty".into()));
        }
        if let Some(n) = self.n_list.iter().find(|&&n| n == 0) {
            return Err(CliError::Validation(format!("n_list entries must be positive, got {n}")));
        }
        if self.digits < MIN_DIGITS {
            return Err(CliError::Validation(format!("digits must be at least {MIN_DIGITS}, got {}", self.digits)));
        }
        if self.csv_digits == 0 {
            return Err(CliError::Validation("csv_digits must be positive".into()));
        }
        let potential = Potential::from_decimal_strs(&self.potential)
            .map_err(|e| CliError::Validation(format!("potential must be strongly convex (V'' bounded below by a positive constant): {e}")))?;
        if self.t_list.is_empty() {
            return Err(CliError::Validation("t_list must not be empty".into()));
        }
        let t_list = self
            .t_list
            .iter()
            .map(|s| {
                let t = decimal("t_list", s)?;
                if t <= 0 {
                    return Err(CliError::Validation(format!("t must be positive, got {s}")));
                }
                Ok(t)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let g = self.grid.clone().unwrap_or_else(|| default_grid(self.regime));
        if g.xi.is_empty() || g.eta.is_empty() {
            return Err(CliError::Validation("grid needs at least one xi and one eta".into()));
        }
        let xi = g.xi.iter().map(|s| decimal("grid.xi", s)).collect::<Result<Vec<_>, _>>()?;
        let eta = g.eta.iter().map(|s| decimal("grid.eta", s)).collect::<Result<Vec<_>, _>>()?;
        let grid = xi.iter().flat_map(|x| eta.iter().map(move |y| (x.clone(), y.clone()))).collect();
        let x_star = self.x_star.as_deref().map(|s| decimal("x_star", s)).transpose()?;
        let unit = |what: &str, s: &str| -> Result<f64, CliError> {
            let v = decimal(what, s)?.to_f64();
            if !(v > 0.0 && v < 1.0) {
                return Err(CliError::Validation(format!("{what} must lie in (0, 1), got {s}")));
            }
            Ok(v)
        };
        let delta = unit("diagnostics.delta", &self.diagnostics.delta)?;
        let delta_prime = unit("diagnostics.delta_prime", &self.diagnostics.delta_prime)?;
        if self.diagnostics.big_m == 0 {
            return Err(CliError::Validation("diagnostics.big_m must be positive".into()));
        }
        let hash = self.hash();
        Ok(Validated {
            raw: self,
            potential,
            t_list,
            grid,
            x_star,
            delta,
            delta_prime,
            hash,
        })
    }
}

fn default_grid(regime: Regime) -> GridSpec {
    let pts: &[&str] = match regime {
        Regime::EdgeRight | Regime::EdgeLeft => &["0", "0.5", "1"],
        _ => &["-0.5", "0", "0.5"],
    };
    let v: Vec<String> = pts.iter().map(|s| s.to_string()).collect();
    GridSpec { xi: v.clone(), eta: v }
}

impl Validated {
    /// Working digits for systems at `n`.
    pub fn system_digits(&self, n: u32) -> u32 {
        self.raw.digits.max(12 * n)
    }
}
