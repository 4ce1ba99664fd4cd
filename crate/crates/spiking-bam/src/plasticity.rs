//! Multiplicative spike-timing-dependent plasticity with nearest-spike
//! pairing.
//!
//! A synapse is updated at every pre- and postsynaptic emission, using the
//! time difference to the most recent opposite-side spike:
//!
//! ```text
//! dw = (1 - w) * omega_plus(dt)   if dt > 0   (pre before post)
//! dw =      w  * omega_minus(dt)  if dt < 0   (post before pre)
//! ```
//!
//! The multiplicative form is self-bounding for weights in `[0, 1]` when the
//! window peaks stay within `(0, 1]`; the clamp below only guards rounding.
//! Inhibitory synapses carry weights in `[-1, 0]`; by default the rule acts
//! on the weight magnitude so that potentiation strengthens inhibition (see
//! [`InhibitoryStdp`] for the alternative signed reading).

use serde::{Deserialize, Serialize};

use crate::kernels::{omega_minus, omega_plus, StdpWindowParams};

/// What a synapse does and whether it learns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SynapseKind {
    /// Plastic, weight in `[0, 1]`.
    Excitatory,
    /// Plastic, weight in `[-1, 0]`.
    Inhibitory,
    /// Never updated (the pyramidal-to-own-interneuron relay).
    Fixed,
}

/// Which input buffer of the target neuron the synapse feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetSite {
    Basal,
    Distal,
    Interneuron,
}

impl TargetSite {
    pub fn label(&self) -> &'static str {
        match self {
            TargetSite::Basal => "basal",
            TargetSite::Distal => "distal",
            TargetSite::Interneuron => "interneuron",
        }
    }
}

impl SynapseKind {
    pub fn label(&self) -> &'static str {
        match self {
            SynapseKind::Excitatory => "excitatory",
            SynapseKind::Inhibitory => "inhibitory",
            SynapseKind::Fixed => "fixed",
        }
    }
}

/// How the rule treats inhibitory weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InhibitoryStdp {
    /// Apply the rule to `|w|` and keep the sign: potentiation makes
    /// inhibition stronger. The default.
    #[default]
    Magnitude,
    /// Apply the rule to the signed weight directly: potentiation pushes
    /// inhibitory weights toward zero. Bounds are enforced by clamping.
    Signed,
}

/// One directed connection with its plasticity bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Synapse {
    pub pre_id: u32,
    pub post_id: u32,
    pub weight: f64,
    pub kind: SynapseKind,
    pub target_site: TargetSite,
    pub last_pre: Option<u32>,
    pub last_post: Option<u32>,
}

impl Synapse {
    pub fn new(pre_id: u32, post_id: u32, weight: f64, kind: SynapseKind, site: TargetSite) -> Self {
        Self {
            pre_id,
            post_id,
            weight,
            kind,
            target_site: site,
            last_pre: None,
            last_post: None,
        }
    }
}

fn apply_delta(s: &mut Synapse, delta_t: f64, w: &StdpWindowParams, mode: InhibitoryStdp) {
    if delta_t == 0.0 {
        // both branches of the rule are defined only for dt != 0
        return;
    }
    let signed = mode == InhibitoryStdp::Signed && s.kind == SynapseKind::Inhibitory;
    if signed {
        let dw = if delta_t > 0.0 {
            (1.0 - s.weight) * omega_plus(delta_t, w)
        } else {
            s.weight * omega_minus(delta_t, w)
        };
        s.weight = (s.weight + dw).clamp(-1.0, 0.0);
    } else {
        let sign = if s.kind == SynapseKind::Inhibitory { -1.0 } else { 1.0 };
        let m = s.weight.abs();
        let dm = if delta_t > 0.0 {
            (1.0 - m) * omega_plus(delta_t, w)
        } else {
            m * omega_minus(delta_t, w)
        };
        let m = (m + dm).clamp(0.0, 1.0);
        s.weight = sign * m;
    }
}

/// Presynaptic emission at `t_pre`: pairs with the last postsynaptic spike
/// (a depression pairing, `dt < 0`), then records `t_pre`.
///
/// Fixed synapses are left untouched entirely.
pub fn on_pre_spike(s: &mut Synapse, t_pre: u32, w: &StdpWindowParams, mode: InhibitoryStdp) {
    if s.kind == SynapseKind::Fixed {
        return;
    }
    if let Some(last_pre) = s.last_pre {
        debug_assert!(t_pre >= last_pre, "presynaptic spikes out of order");
    }
    if let Some(last_post) = s.last_post {
        let delta_t = last_post as f64 - t_pre as f64;
        apply_delta(s, delta_t, w, mode);
    }
    s.last_pre = Some(t_pre);
}

/// Postsynaptic emission at `t_post`: pairs with the last presynaptic spike
/// (a potentiation pairing, `dt > 0`), then records `t_post`.
pub fn on_post_spike(s: &mut Synapse, t_post: u32, w: &StdpWindowParams, mode: InhibitoryStdp) {
    if s.kind == SynapseKind::Fixed {
        return;
    }
    if let Some(last_post) = s.last_post {
        debug_assert!(t_post >= last_post, "postsynaptic spikes out of order");
    }
    if let Some(last_pre) = s.last_pre {
        let delta_t = t_post as f64 - last_pre as f64;
        apply_delta(s, delta_t, w, mode);
    }
    s.last_post = Some(t_post);
}
