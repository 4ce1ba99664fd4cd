//! Experiment configuration: one TOML-serializable record collecting every
//! tunable of the model, validated against the module invariants before a
//! run starts.
//!
//! The file layout mirrors the struct: top-level keys for the mode switches,
//! then `[kernels]`, `[stdp]`, `[thresholds]`, `[network]`, `[experiment]`
//! tables. Any field may be omitted and falls back to the committed default;
//! unknown keys are rejected. A SHA-256 hash of the canonical serialization
//! (with the output directory blanked) identifies the experiment in every
//! artifact, and re-analysis refuses inputs whose hashes disagree.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::kernels::{KernelParams, StdpWindowParams};
use crate::network::InitWeights;
use crate::neuron::NeuronThresholds;
use crate::plasticity::InhibitoryStdp;
use crate::{Error, Result};

/// The two experimental conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "topdown")]
    TopDown,
    #[serde(rename = "no-topdown")]
    NoTopDown,
}

impl Condition {
    pub fn label(&self) -> &'static str {
        match self {
            Condition::TopDown => "topdown",
            Condition::NoTopDown => "no-topdown",
        }
    }
}

/// How the no-top-down condition is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoTopdownMode {
    /// Keep the feedback synapses (they still adapt through STDP) but never
    /// emit calcium spikes; the distal site stays inert. The default.
    #[default]
    DisableCaap,
    /// Drop the feedback synapses entirely after the weight draw, so paired
    /// seeds still start from identical remaining weights.
    RemoveFeedback,
}

/// Run plan: which seeds and conditions to simulate and where artifacts go.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunPlan {
    pub seeds: Vec<u64>,
    pub conditions: Vec<Condition>,
    /// `"builtin"` or a path to a glyph file.
    pub patterns: String,
    pub out_dir: String,
    /// Write the per-seed presentation schedule next to the run artifacts.
    pub replay_log: bool,
}

impl Default for RunPlan {
    fn default() -> Self {
        Self {
            seeds: vec![1, 2, 3, 4, 5],
            conditions: vec![Condition::TopDown, Condition::NoTopDown],
            patterns: "builtin".into(),
            out_dir: "out".into(),
            replay_log: true,
        }
    }
}

/// Everything a run depends on.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub inhibitory_stdp: InhibitoryStdp,
    pub no_topdown_mode: NoTopdownMode,
    pub kernels: KernelParams,
    pub stdp: StdpWindowParams,
    pub thresholds: NeuronThresholds,
    pub network: InitWeights,
    pub experiment: RunPlan,
}

impl ExperimentConfig {
    /// Validates every module invariant; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        self.kernels.validate()?;
        self.stdp.validate()?;
        self.thresholds.validate()?;
        self.network.validate()?;
        let horizon = self.thresholds.bp_delay + self.thresholds.ca_window;
        if (horizon as f64) > self.kernels.support {
            return Err(Error::InvalidParameter {
                field: "thresholds.bp_delay/ca_window".into(),
                reason: format!(
                    "coincidence horizon {} ms exceeds the kernel support {} ms",
                    horizon, self.kernels.support
                ),
            });
        }
        if self.experiment.seeds.is_empty() {
            return Err(Error::InvalidParameter {
                field: "experiment.seeds".into(),
                reason: "at least one seed is required".into(),
            });
        }
        let mut seeds = self.experiment.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.experiment.seeds.len() {
            return Err(Error::InvalidParameter {
                field: "experiment.seeds".into(),
                reason: "duplicate seeds would overwrite each other's artifacts".into(),
            });
        }
        if self.experiment.conditions.is_empty() {
            return Err(Error::InvalidParameter {
                field: "experiment.conditions".into(),
                reason: "at least one condition is required".into(),
            });
        }
        let mut conds = self.experiment.conditions.clone();
        conds.dedup();
        if conds.len() != self.experiment.conditions.len()
            || (conds.len() == 2 && conds[0] == conds[1])
        {
            return Err(Error::InvalidParameter {
                field: "experiment.conditions".into(),
                reason: "conditions must be distinct".into(),
            });
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::InvalidParameter {
            field: "config".into(),
            reason: e.to_string(),
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            context: format!("reading config {}", path.display()),
            source: e,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Hash identifying the experiment; independent of where artifacts are
    /// written.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.experiment.out_dir = String::new();
        let text = canonical.to_toml();
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
    }

    #[test]
    fn toml_round_trip_preserves_the_config() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_toml();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_files_fall_back_to_defaults() {
        let cfg = ExperimentConfig::from_toml(
            "[experiment]\nseeds = [7]\nconditions = [\"topdown\"]\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment.seeds, vec![7]);
        assert_eq!(cfg.kernels, KernelParams::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_toml("[kernels]\ntau_sigma = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("tau_sigma"), "{err}");
    }

    #[test]
    fn validation_names_the_offending_field() {
        let mut cfg = ExperimentConfig::default();
        cfg.kernels.tau_s = 0.0;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("tau_s"), "{err}");

        let mut cfg = ExperimentConfig::default();
        cfg.experiment.seeds = vec![1, 1];
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.experiment.conditions = vec![];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn hash_ignores_the_output_directory_only() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.experiment.out_dir = "elsewhere".into();
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.kernels.tau_s = 6.0;
        assert_ne!(a.hash(), c.hash());
    }
}
