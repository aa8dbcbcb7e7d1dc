//! Run configuration and the default tolerance set shared by the library,
//! the CLI and the self-test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sup-norm level treated as a blow-up by the reduced-flow integrator.
pub const BLOW_UP_THRESHOLD: f64 = 1e8;

/// Numerical tolerances. Every field must be strictly positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Target for `‖F̂‖_sup` in the real-equation solver.
    pub real_equation: f64,
    /// Largest accepted unitarity defect in temporal gauge fixing.
    pub unitarity: f64,
    /// Generic consistency tolerance for residual checks.
    pub residual: f64,
    /// Relative threshold for numerical ranks.
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { real_equation: 1e-8, unitarity: 1e-6, residual: 1e-6, rank: 1e-9 }
    }
}

impl Tolerances {
    /// Replace every tolerance by `tol` (the CLI `--tol` override).
    pub fn uniform(tol: f64) -> Self {
        Tolerances { real_equation: tol, unitarity: tol, residual: tol, rank: tol }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Grid size `N` (number of intervals).
    pub n: usize,
    pub tol: Tolerances,
    /// Pole truncation parameter ε.
    pub epsilon: f64,
    pub seed: u64,
    /// Iteration cap for the real-equation solver.
    pub max_iter: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { n: 1000, tol: Tolerances::default(), epsilon: 1e-2, seed: 0, max_iter: 10_000 }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 16 {
            return Err(Error::domain(format!("grid size must be >= 16 (got {})", self.n)));
        }
        let t = &self.tol;
        for (name, v) in [
            ("real_equation", t.real_equation),
            ("unitarity", t.unitarity),
            ("residual", t.residual),
            ("rank", t.rank),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("tolerance {name} must be positive (got {v})")));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.25) {
            return Err(Error::domain(format!("epsilon must lie in (0, 1/4) (got {})", self.epsilon)));
        }
        if self.max_iter == 0 {
            return Err(Error::domain("max_iter must be positive"));
        }
        Ok(())
    }
}

/// Thread cap from `OCTONAHM_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("OCTONAHM_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Configure the global rayon pool from `OCTONAHM_THREADS`. Later calls
/// and calls after the pool is in use are ignored.
pub fn init_threads() {
    if let Some(n) = thread_cap() {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = RunConfig::default();
        assert!(RunConfig { n: 15, ..base.clone() }.validate().is_err());
        assert!(RunConfig { epsilon: 0.25, ..base.clone() }.validate().is_err());
        assert!(RunConfig { epsilon: 0.0, ..base.clone() }.validate().is_err());
        assert!(RunConfig { tol: Tolerances::uniform(0.0), ..base.clone() }.validate().is_err());
        assert!(RunConfig { tol: Tolerances::uniform(f64::NAN), ..base }.validate().is_err());
    }
}
