//! Experiment configuration, read from a single JSON file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::families::{FamilyKind, SampleFamily};
use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Certify,
    Lemma,
    H2,
    Sawtooth,
    Derivative,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Certify,
        Suite::Lemma,
        Suite::H2,
        Suite::Sawtooth,
        Suite::Derivative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Certify => "certify",
            Suite::Lemma => "lemma",
            Suite::H2 => "h2",
            Suite::Sawtooth => "sawtooth",
            Suite::Derivative => "derivative",
        }
    }
}

/// Sample counts per experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleCounts {
    pub small_ball: usize,
    pub equivariance: usize,
    pub uniform_bound: usize,
    pub lipschitz: usize,
    pub h2_per_eps: usize,
    pub derivative_pairs: usize,
    pub operator_bases: usize,
}

impl Default for SampleCounts {
    fn default() -> Self {
        Self {
            small_ball: 50,
            equivariance: 20,
            uniform_bound: 100,
            lipschitz: 20,
            h2_per_eps: 200,
            derivative_pairs: 20,
            operator_bases: 12,
        }
    }
}

/// The roughness-scaling comparison between χ and g runs on its own fine
/// grid: envelope 10³ is not representable at the default spacing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoughnessConfig {
    pub envelopes: Vec<f64>,
    #[serde(rename = "L")]
    pub half_length: usize,
    pub h: f64,
    pub support: (f64, f64),
    pub amplitude: (f64, f64),
    /// Threshold of the pointwise cutoff; above every sampled `|u|`, so
    /// `g(u) = u²` on the samples.
    pub delta_g: f64,
}

impl Default for RoughnessConfig {
    fn default() -> Self {
        Self {
            envelopes: vec![10.0, 1000.0],
            half_length: 4,
            h: 1.0 / 8192.0,
            support: (-2.0, 2.0),
            amplitude: (0.25, 0.5),
            delta_g: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    #[serde(rename = "L")]
    pub half_length: usize,
    pub h: f64,
    pub eta: f64,
    pub zeta: f64,
    pub epsilon_list: Vec<f64>,
    /// Scales at which the lemma properties are checked.
    pub lemma_epsilon_list: Vec<f64>,
    pub eps_saw: Vec<f64>,
    pub delta: f64,
    pub delta_prime: f64,
    pub seed: u64,
    pub suites: Vec<Suite>,
    pub out_dir: PathBuf,
    /// Sample pool for the "for all u" experiments. Samples are rescaled
    /// per case, so a family fixes shape and the roughness/amplitude ratio.
    pub families: Vec<SampleFamily>,
    pub samples: SampleCounts,
    pub roughness: RoughnessConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            half_length: 16,
            h: 1.0 / 256.0,
            eta: 0.5,
            zeta: 0.2,
            epsilon_list: (2..=7).map(|k| 2f64.powi(-k)).collect(),
            lemma_epsilon_list: vec![1.0, 0.25, 0.0625],
            eps_saw: vec![1.0 / 16.0, 1.0 / 64.0, 1.0 / 256.0],
            delta: 0.1,
            delta_prime: 0.02,
            seed: 42,
            suites: Suite::ALL.to_vec(),
            out_dir: PathBuf::from("reports"),
            families: vec![
                SampleFamily::new(FamilyKind::SmoothRandom, 1.0, 4.0, 1),
                SampleFamily::new(FamilyKind::RoughRandom, 1.0, 40.0, 2),
            ],
            samples: SampleCounts::default(),
            roughness: RoughnessConfig::default(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Config = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::from_spacing(self.half_length as f64, self.h)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.grid()?;
        Grid::from_spacing(self.roughness.half_length as f64, self.roughness.h)?;
        if !(0.0 < self.zeta && self.zeta < self.eta) {
            return bad(format!("need 0 < zeta < eta, got zeta = {}, eta = {}", self.zeta, self.eta));
        }
        if self.half_length < 6 {
            return bad(format!("L = {} leaves no interior support; need L >= 6", self.half_length));
        }
        let positive = |name: &str, v: &[f64]| -> Result<()> {
            if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::Config(format!("{name} must be a non-empty list of positive numbers")));
            }
            Ok(())
        };
        positive("epsilon_list", &self.epsilon_list)?;
        positive("lemma_epsilon_list", &self.lemma_epsilon_list)?;
        positive("eps_saw", &self.eps_saw)?;
        positive("roughness.envelopes", &self.roughness.envelopes)?;
        if self.epsilon_list.len() < 5 {
            return bad("epsilon_list needs at least 5 values for the scaling fit".into());
        }
        let (lo, hi) = self
            .epsilon_list
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
        if hi / lo < 32.0 * (1.0 - 1e-12) {
            return bad("epsilon_list must span at least a factor of 32".into());
        }
        if self.families.is_empty() {
            return bad("families must not be empty".into());
        }
        if self.suites.is_empty() {
            return bad("suites must not be empty".into());
        }
        let (a0, a1) = self.roughness.amplitude;
        if !(0.0 < a0 && a0 <= a1 && a1 < self.roughness.delta_g) {
            return bad("roughness.amplitude must satisfy 0 < lo <= hi < delta_g".into());
        }
        Ok(())
    }
}

/// Parse `"0.25"` or `"1/16"`.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Config(format!("not a number: {s:?}"));
    let v = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| bad())?;
            let d: f64 = d.trim().parse().map_err(|_| bad())?;
            n / d
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// Comma-separated list of [`parse_number`] values.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_number).collect()
}
