//! Size limits applied before any enumeration that could blow up.
//!
//! Defaults can be overridden with `MINIONLAB_BUDGET`, a comma separated list
//! of `domain=N` and `tuples=N` entries, e.g. `MINIONLAB_BUDGET=domain=50000`.

use crate::error::{Error, Result};

pub const ENV_VAR: &str = "MINIONLAB_BUDGET";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of atoms in any constructed structure.
    pub max_domain: usize,
    /// Maximum number of tuples in one relation, and the cap for other
    /// tuple-like enumerations (partial maps, LP variables).
    pub max_tuples: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_domain: 10_000, max_tuples: 100_000 }
    }
}

impl Budget {
    /// Defaults, overridden by the environment when `MINIONLAB_BUDGET` is set.
    /// Unparseable entries are ignored.
    pub fn from_env() -> Self {
        let mut budget = Budget::default();
        if let Ok(spec) = std::env::var(ENV_VAR) {
            budget.apply(&spec);
        }
        budget
    }

    fn apply(&mut self, spec: &str) {
        for part in spec.split(',') {
            let Some((key, value)) = part.split_once('=') else { continue };
            let Ok(n) = value.trim().parse::<usize>() else { continue };
            match key.trim() {
                "domain" => self.max_domain = n,
                "tuples" => self.max_tuples = n,
                _ => {}
            }
        }
    }

    pub fn check_domain(&self, size: u128, what: &str) -> Result<()> {
        if size > self.max_domain as u128 {
            return Err(Error::BudgetExceeded(format!(
                "{what}: {size} atoms > {}",
                self.max_domain
            )));
        }
        Ok(())
    }

    pub fn check_tuples(&self, size: u128, what: &str) -> Result<()> {
        if size > self.max_tuples as u128 {
            return Err(Error::BudgetExceeded(format!(
                "{what}: {size} > {}",
                self.max_tuples
            )));
        }
        Ok(())
    }
}
