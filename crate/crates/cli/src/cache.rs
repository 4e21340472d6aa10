use std::path::{Path, PathBuf};

use extsource::biortho::{construct, load_system, save_system, BiorthoSystem};
use extsource::equilibrium::{load_equilibrium, rational_to_string, save_equilibrium, EquilibriumData, Potential};
use extsource::PrecisionContext;
use rug::Rational;
use sha2::{Digest, Sha256};

use crate::config::to_float;
use crate::error::CliError;

/// JSON files keyed by a digest of the problem parameters.
pub struct Cache {
    dir: PathBuf,
}

fn key(parts: &[String]) -> String {
    let digest = Sha256::digest(parts.join("|").as_bytes());
    digest.iter().take(10).map(|b| format!("{b:02x}")).collect()
}

impl Cache {
    pub fn open(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Cache { dir: dir.to_path_buf() })
    }

    fn equilibrium_path(&self, v: &Potential, t: &Rational, digits: u32) -> PathBuf {
        let mut parts = v.coeff_strings();
        parts.push(rational_to_string(t));
        parts.push(digits.to_string());
        self.dir.join(format!("equilibrium-{}.json", key(&parts)))
    }

    fn system_path(&self, v: &Potential, n: u32, m: usize, digits: u32) -> PathBuf {
        let mut parts = v.coeff_strings();
        parts.extend([n.to_string(), m.to_string(), digits.to_string()]);
        self.dir.join(format!("system-{}.json", key(&parts)))
    }

    /// Equilibrium data for `(v, t)` at `ctx`, solved through `solve` on a
    /// miss. Returns whether the cache was hit.
    pub fn equilibrium<F>(&self, v: &Potential, t: &Rational, ctx: &PrecisionContext, solve: F) -> Result<(EquilibriumData, bool), CliError>
    where
        F: FnOnce() -> Result<EquilibriumData, CliError>,
    {
        let path = self.equilibrium_path(v, t, ctx.digits);
        let tf = to_float(t, ctx.prec());
        if let Some(data) = load_equilibrium(&path, v, &tf, ctx.digits, ctx.prec())? {
            return Ok((data, true));
        }
        let data = solve()?;
        save_equilibrium(&path, v, &data, ctx.digits)?;
        Ok((data, false))
    }

    /// The system for `(v, n, m)` at `ctx`, built on a miss or when the
    /// stored file belongs to another problem.
    pub fn system(&self, v: &Potential, n: u32, m: usize, ctx: &PrecisionContext) -> Result<(BiorthoSystem, bool), CliError> {
        let path = self.system_path(v, n, m, ctx.digits);
        if path.exists() {
            let sys = load_system(&path)?;
            if sys.n() == n && sys.max_degree() == m && sys.context().digits == ctx.digits && sys.potential().coeff_strings() == v.coeff_strings() {
                return Ok((sys, true));
            }
        }
        let sys = construct(v, n, m, ctx)?;
        save_system(&path, &sys)?;
        Ok((sys, false))
    }
}
