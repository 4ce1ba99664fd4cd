//! Three-layer network assembly.
//!
//! Two perceptive layers and one associative layer, 100 pyramidal and 100
//! inhibitory interneurons each. Wiring:
//!
//! * every perceptive pyramidal makes one synapse onto the basal site of
//!   every associative pyramidal (feedforward, plastic excitatory);
//! * every associative pyramidal makes one synapse onto the distal site of
//!   every pyramidal of both perceptive layers (feedback, plastic
//!   excitatory);
//! * every pyramidal drives its own interneuron through a fixed
//!   unit-weight relay, and every interneuron inhibits the 99 other
//!   pyramidals of its layer (plastic inhibitory, delivered basally).
//!
//! Initial plastic weights come from one seeded random stream consumed in a
//! fixed order: feedforward from layer 1, feedforward from layer 2,
//! feedback, then inhibitory. The generator is pinned (ChaCha8), so a seed
//! reproduces a topology bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::plasticity::{Synapse, SynapseKind, TargetSite};
use crate::{Error, Result};

/// Neurons per population in each layer.
pub const LAYER_SIZE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayerId {
    Perceptive1,
    Perceptive2,
    Associative,
}

impl LayerId {
    pub const ALL: [LayerId; 3] = [LayerId::Perceptive1, LayerId::Perceptive2, LayerId::Associative];

    pub fn label(&self) -> &'static str {
        match self {
            LayerId::Perceptive1 => "perceptive_1",
            LayerId::Perceptive2 => "perceptive_2",
            LayerId::Associative => "associative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeuronClass {
    Pyramidal,
    Interneuron,
}

/// Identity of one neuron in the global index space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeuronInfo {
    pub class: NeuronClass,
    pub layer: LayerId,
    /// Index within the layer population, 0..100 in the standard build.
    pub index: usize,
}

/// Global id of pyramidal `j` of `layer` in the standard build.
pub fn pyramidal_id(layer: LayerId, j: usize) -> u32 {
    debug_assert!(j < LAYER_SIZE);
    let base = match layer {
        LayerId::Perceptive1 => 0,
        LayerId::Perceptive2 => LAYER_SIZE,
        LayerId::Associative => 2 * LAYER_SIZE,
    };
    (base + j) as u32
}

/// Global id of the interneuron paired with pyramidal `j` of `layer`.
pub fn interneuron_id(layer: LayerId, j: usize) -> u32 {
    debug_assert!(j < LAYER_SIZE);
    let base = match layer {
        LayerId::Perceptive1 => 3 * LAYER_SIZE,
        LayerId::Perceptive2 => 4 * LAYER_SIZE,
        LayerId::Associative => 5 * LAYER_SIZE,
    };
    (base + j) as u32
}

/// Initial-weight ranges for the plastic populations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitWeights {
    pub w_lo: f64,
    pub w_hi: f64,
    pub inh_lo: f64,
    pub inh_hi: f64,
}

impl Default for InitWeights {
    fn default() -> Self {
        Self {
            w_lo: 0.002,
            w_hi: 0.050,
            inh_lo: -0.50,
            inh_hi: -0.20,
        }
    }
}

impl InitWeights {
    pub fn validate(&self) -> Result<()> {
        if !(self.w_lo <= self.w_hi) {
            return Err(Error::InvalidParameter {
                field: "network.w_lo/w_hi".into(),
                reason: format!("w_lo {} must not exceed w_hi {}", self.w_lo, self.w_hi),
            });
        }
        if !(0.0 <= self.w_lo && self.w_hi <= 1.0) {
            return Err(Error::InvalidParameter {
                field: "network.w_lo/w_hi".into(),
                reason: "excitatory range must lie within [0, 1]".into(),
            });
        }
        if !(self.inh_lo <= self.inh_hi) {
            return Err(Error::InvalidParameter {
                field: "network.inh_lo/inh_hi".into(),
                reason: format!("inh_lo {} must not exceed inh_hi {}", self.inh_lo, self.inh_hi),
            });
        }
        if !(-1.0 <= self.inh_lo && self.inh_hi <= 0.0) {
            return Err(Error::InvalidParameter {
                field: "network.inh_lo/inh_hi".into(),
                reason: "inhibitory range must lie within [-1, 0]".into(),
            });
        }
        Ok(())
    }
}

/// A wired network: neuron identities plus the synapse table.
///
/// [`build`] constructs the standard three-layer architecture;
/// [`Topology::custom`] assembles arbitrary microcircuits for verification
/// against the reference simulator.
#[derive(Debug, Clone)]
pub struct Topology {
    pub seed: u64,
    pub topdown_enabled: bool,
    pub neurons: Vec<NeuronInfo>,
    pub synapses: Vec<Synapse>,
}

impl Topology {
    pub fn custom(neurons: Vec<NeuronInfo>, synapses: Vec<Synapse>, topdown_enabled: bool) -> Self {
        Self {
            seed: 0,
            topdown_enabled,
            neurons,
            synapses,
        }
    }

    pub fn n_neurons(&self) -> usize {
        self.neurons.len()
    }

    /// Global ids of associative pyramidals, in output-row order.
    pub fn associative_pyramidals(&self) -> Vec<u32> {
        self.neurons
            .iter()
            .enumerate()
            .filter(|(_, n)| n.layer == LayerId::Associative && n.class == NeuronClass::Pyramidal)
            .map(|(id, _)| id as u32)
            .collect()
    }

    /// Removes the feedback (distal-site) synapses; used by the
    /// `remove_feedback` reading of the no-top-down condition. Weights were
    /// already drawn, so paired-seed runs keep identical remaining weights.
    pub fn remove_feedback_synapses(&mut self) {
        self.synapses.retain(|s| s.target_site != TargetSite::Distal);
    }
}

/// Builds the standard three-layer topology for one seed.
///
/// Deterministic in `(seed, weights)`; the `topdown_enabled` flag gates the
/// calcium-spike machinery in the engine but never the wiring or the random
/// stream, so both conditions of an experiment start from identical weights.
pub fn build(seed: u64, topdown_enabled: bool, weights: &InitWeights) -> Result<Topology> {
    weights.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut neurons = Vec::with_capacity(6 * LAYER_SIZE);
    for layer in LayerId::ALL {
        for index in 0..LAYER_SIZE {
            neurons.push(NeuronInfo {
                class: NeuronClass::Pyramidal,
                layer,
                index,
            });
        }
    }
    for layer in LayerId::ALL {
        for index in 0..LAYER_SIZE {
            neurons.push(NeuronInfo {
                class: NeuronClass::Interneuron,
                layer,
                index,
            });
        }
    }

    let mut synapses = Vec::with_capacity(70_000);
    let excit = |rng: &mut ChaCha8Rng| -> f64 { rng.gen_range(weights.w_lo..=weights.w_hi) };

    // feedforward: perceptive pyramidal -> associative basal site
    for layer in [LayerId::Perceptive1, LayerId::Perceptive2] {
        for pre in 0..LAYER_SIZE {
            for post in 0..LAYER_SIZE {
                synapses.push(Synapse::new(
                    pyramidal_id(layer, pre),
                    pyramidal_id(LayerId::Associative, post),
                    excit(&mut rng),
                    SynapseKind::Excitatory,
                    TargetSite::Basal,
                ));
            }
        }
    }

    // feedback: associative pyramidal -> perceptive distal sites, without
    // layer distinction
    for pre in 0..LAYER_SIZE {
        for layer in [LayerId::Perceptive1, LayerId::Perceptive2] {
            for post in 0..LAYER_SIZE {
                synapses.push(Synapse::new(
                    pyramidal_id(LayerId::Associative, pre),
                    pyramidal_id(layer, post),
                    excit(&mut rng),
                    SynapseKind::Excitatory,
                    TargetSite::Distal,
                ));
            }
        }
    }

    // fixed unit relay onto the paired interneuron
    for layer in LayerId::ALL {
        for j in 0..LAYER_SIZE {
            synapses.push(Synapse::new(
                pyramidal_id(layer, j),
                interneuron_id(layer, j),
                1.0,
                SynapseKind::Fixed,
                TargetSite::Interneuron,
            ));
        }
    }

    // lateral inhibition: each interneuron onto the 99 other pyramidals of
    // its layer
    for layer in LayerId::ALL {
        for i in 0..LAYER_SIZE {
            for j in 0..LAYER_SIZE {
                if i == j {
                    continue;
                }
                synapses.push(Synapse::new(
                    interneuron_id(layer, i),
                    pyramidal_id(layer, j),
                    rng.gen_range(weights.inh_lo..=weights.inh_hi),
                    SynapseKind::Inhibitory,
                    TargetSite::Basal,
                ));
            }
        }
    }

    Ok(Topology {
        seed,
        topdown_enabled,
        neurons,
        synapses,
    })
}

/// One row of a weight snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightEntry {
    pub pre_id: u32,
    pub post_id: u32,
    pub site: TargetSite,
    pub kind: SynapseKind,
    pub weight: f64,
}

/// Dense export of every synapse weight with its labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightMatrix {
    pub entries: Vec<WeightEntry>,
}

pub fn snapshot_weights(t: &Topology) -> WeightMatrix {
    WeightMatrix {
        entries: t
            .synapses
            .iter()
            .map(|s| WeightEntry {
                pre_id: s.pre_id,
                post_id: s.post_id,
                site: s.target_site,
                kind: s.kind,
                weight: s.weight,
            })
            .collect(),
    }
}

impl WeightMatrix {
    /// Plain-text table, one `pre_id post_id site kind weight` line each.
    pub fn to_table(&self) -> String {
        let mut out = String::with_capacity(self.entries.len() * 32);
        for e in &self.entries {
            out.push_str(&format!(
                "{} {} {} {} {}\n",
                e.pre_id,
                e.post_id,
                e.site.label(),
                e.kind.label(),
                e.weight
            ));
        }
        out
    }
}
