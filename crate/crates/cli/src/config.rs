//! Experiment configuration files.

use serde::{Deserialize, Serialize};

use bandlab_core::band::BandSpec;

fn default_n() -> usize {
    30
}

fn default_radius_cap() -> f64 {
    10.0
}

fn default_pairs() -> usize {
    100
}

fn default_t_grid() -> usize {
    10
}

fn default_d1_list() -> Vec<f64> {
    vec![5.0, 10.0, 20.0]
}

fn default_tolerance() -> f64 {
    1e-8
}

fn default_thinness_step() -> f64 {
    0.25
}

pub fn probe_window_default() -> usize {
    10
}

pub fn probe_threshold_default() -> f64 {
    20.0
}

fn default_probe_length() -> usize {
    60
}

/// One experiment: a band, sampling parameters, and tolerances. The seed
/// is required; everything else has conventional defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: String,
    pub band: BandSpec,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_radius_cap")]
    pub radius_cap: f64,
    pub seed: u64,
    /// Number of point pairs for witness audits.
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    /// Grid values of `t` per pair (endpoints included).
    #[serde(default = "default_t_grid")]
    pub t_grid: usize,
    /// Sample pairs on the diagonal (same radius and direction in both
    /// factors); meaningful for identical factors.
    #[serde(default)]
    pub diagonal: bool,
    /// Run the audit again with the radius cap doubled and compare.
    /// Defaults to true when both factors are unbounded.
    #[serde(default)]
    pub scale_check: Option<bool>,
    /// Factor distances for the divergence family.
    #[serde(default = "default_d1_list")]
    pub d1_list: Vec<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_thinness_step")]
    pub thinness_step: f64,
    #[serde(default = "probe_window_default")]
    pub probe_window: usize,
    #[serde(default = "probe_threshold_default")]
    pub probe_threshold: f64,
    #[serde(default = "default_probe_length")]
    pub probe_length: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Experiments that compute hyperbolicity constants need at least a
    /// quadruple of sample points.
    pub fn validate_for_delta(&self) -> anyhow::Result<()> {
        anyhow::ensure!(
            self.n >= 4,
            "delta experiments need n >= 4 sample points, got {}",
            self.n
        );
        Ok(())
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
