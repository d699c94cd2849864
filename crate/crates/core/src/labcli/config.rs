//! Experiment configuration: `key = value` lines grouped in sections.
//!
//! ```text
//! [experiment]
//! phi = "0,1"
//! j = 2
//! epsilon = 0.05
//! n_grid = [10000, 100000]
//! h_exponent = 0.8
//!
//! [numerics]
//! truncation_tol = 1e-12
//! abs_tol = 1e-6
//!
//! [output]
//! out_dir = "out"
//! sieve_cache = "sieve.bin"
//! threads = 4
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyring::IntPolynomial;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(with = "phi_text")]
    pub phi: IntPolynomial,
    pub j: usize,
    pub epsilon: f64,
    #[serde(default)]
    pub n_grid: Vec<u64>,
    pub h_exponent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    pub truncation_tol: f64,
    pub abs_tol: f64,
    pub nodes_per_panel: usize,
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self {
            truncation_tol: 1e-12,
            abs_tol: 1e-6,
            nodes_per_panel: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// `τ = N^{−tau_exponent}` for the `F(τ)` sweep.
    pub tau_exponent: f64,
    pub kernel_mu: Vec<f64>,
    pub kernel_x: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            tau_exponent: 0.7,
            kernel_mu: vec![0.5, 1.0, 1.5, 2.0],
            kernel_x: vec![0.25, 0.5],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub out_dir: PathBuf,
    pub sieve_cache: Option<PathBuf>,
    /// 0 means one thread per core.
    pub threads: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("out"),
            sieve_cache: None,
            threads: 0,
        }
    }
}

mod phi_text {
    use super::IntPolynomial;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(phi: &IntPolynomial, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(phi)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<IntPolynomial, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

/// `(N^{1−13/(15k)+ε}, N^{1−ε})`.
pub fn admissible_h_window(base: u64, k: usize, epsilon: f64) -> Result<(f64, f64)> {
    let (lo, hi) = window_exponents(k, epsilon)?;
    if base < 16 {
        return Err(Error::Config(format!("N = {base} below 16")));
    }
    let nf = base as f64;
    Ok((nf.powf(lo), nf.powf(hi)))
}

fn window_exponents(k: usize, epsilon: f64) -> Result<(f64, f64)> {
    if k < 2 {
        return Err(Error::Config(format!("the H window needs k >= 2, got k = {k}")));
    }
    let cap = 13.0 / (30.0 * k as f64);
    if !(epsilon > 0.0 && epsilon < cap) {
        return Err(Error::Config(format!(
            "epsilon = {epsilon} must lie in (0, 13/(30k)) = (0, {cap}) for an admissible H window"
        )));
    }
    Ok((1.0 - 13.0 / (15.0 * k as f64) + epsilon, 1.0 - epsilon))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn k(&self) -> usize {
        self.experiment.phi.degree()
    }

    /// `B = N^{2ε}`.
    pub fn b_exponent(&self) -> f64 {
        2.0 * self.experiment.epsilon
    }

    /// `H = round(N^θ)`.
    pub fn h_for(&self, base: u64) -> u64 {
        ((base as f64).powf(self.experiment.h_exponent).round() as u64).max(1)
    }

    /// Checks every invariant before any computation runs.
    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.j == 0 {
            return Err(Error::Config("j must be >= 1".into()));
        }
        if !(e.epsilon > 0.0 && e.epsilon < 0.25) {
            return Err(Error::Config(format!("epsilon = {} outside (0, 1/4)", e.epsilon)));
        }
        let (lo, hi) = window_exponents(self.k(), e.epsilon)?;
        let theta = e.h_exponent;
        if !(theta > lo && theta < hi) {
            return Err(Error::Config(format!(
                "h_exponent = {theta} outside the admissible window ({lo:.6}, {hi:.6}) for k = {}, epsilon = {}",
                self.k(),
                e.epsilon
            )));
        }
        if let Some(&n) = e.n_grid.iter().find(|&&n| n < 16) {
            return Err(Error::Config(format!("N = {n} in n_grid is below 16")));
        }
        let n = &self.numerics;
        if !(n.truncation_tol > 0.0) || !(n.abs_tol > 0.0) {
            return Err(Error::Config("tolerances must be > 0".into()));
        }
        if n.nodes_per_panel < 6 {
            return Err(Error::Config("nodes_per_panel must be >= 6".into()));
        }
        let s = &self.sweep;
        if !(s.tau_exponent > 0.0) {
            return Err(Error::Config("tau_exponent must be > 0".into()));
        }
        if s.kernel_mu.iter().chain(&s.kernel_x).any(|&v| !(v > 0.0)) {
            return Err(Error::Config("kernel_mu and kernel_x entries must be > 0".into()));
        }
        Ok(())
    }
}
