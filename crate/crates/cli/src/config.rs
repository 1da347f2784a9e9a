use std::fs;
use std::path::{Path, PathBuf};

use bvdual::TheorySpec;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Contents of the TOML file given with `--config`. Command-line flags win.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub theory: Option<TheorySpec>,
    pub lambda: Option<u32>,
    pub lattice_cutoff: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tolerance: Option<f64>,
    pub method: Option<String>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    /// All-forms observable whose restriction is the closed-theory input.
    pub lift: Option<PathBuf>,
}

pub const DEFAULT_LATTICE_CUTOFF: f64 = 40.0;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_SEED: u64 = 1;

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut c: RunConfig = toml::from_str(&text).map_err(|e| CliError::parse("config", e))?;
        // relative paths inside the config refer to its directory
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut c.lift, &mut c.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(c)
    }

    pub fn validate(&self) -> CliResult<()> {
        if let Some(t) = &self.theory {
            t.validate().map_err(CliError::invalid_input)?;
        }
        if let Some(c) = self.lattice_cutoff {
            if !(c.is_finite() && c > 0.0) {
                return Err(CliError::usage("lattice cutoff must be positive"));
            }
        }
        if let Some(s) = self.samples {
            if s < 1000 {
                return Err(CliError::usage("Monte-Carlo needs at least 1000 samples"));
            }
        }
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t >= 0.0) {
                return Err(CliError::usage("tolerance must be non-negative"));
            }
        }
        if self.threads == Some(0) {
            return Err(CliError::usage("thread count must be positive"));
        }
        Ok(())
    }

    pub fn lattice_cutoff(&self) -> f64 {
        self.lattice_cutoff.unwrap_or(DEFAULT_LATTICE_CUTOFF)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }
}
