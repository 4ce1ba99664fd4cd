//! A naive reference simulator and the microcircuits used to verify the
//! engine against it.
//!
//! The reference keeps the complete event and spike history of every neuron
//! and re-evaluates the closed-form kernels over all of it at every
//! millisecond; nothing is truncated, tabulated, or cached. It follows the
//! same step contract the engine documents (delivery order, class order,
//! plasticity phases, weight-at-delivery), so on any circuit the two must
//! produce bit-identical potentials, spike times, and weights. Any
//! divergence means one of them broke the contract.
//!
//! This is deliberately the slow path: quadratic in history length and only
//! suitable for the small hand-built circuits below.

use std::collections::HashMap;

use crate::config::Condition;
use crate::engine::{Engine, EngineParams, EventKind};
use crate::kernels::{self, KernelParams};
use crate::network::{LayerId, NeuronClass, NeuronInfo, Topology};
use crate::plasticity::{InhibitoryStdp, Synapse, SynapseKind, TargetSite};

#[derive(Debug, Clone)]
struct RefNeuron {
    topdown: bool,
    /// Somatic spikes and whether each one's backpropagated copy was used.
    spikes: Vec<(u32, bool)>,
    ca_spikes: Vec<u32>,
    basal: Vec<(u32, f64)>,
    distal: Vec<(u32, f64)>,
    inter_inputs: Vec<(u32, f64)>,
}

#[derive(Debug, Clone)]
struct RefSynapse {
    pre: u32,
    post: u32,
    weight: f64,
    kind: SynapseKind,
    site: TargetSite,
    last_pre: Option<u32>,
    last_post: Option<u32>,
}

/// The full-history reference simulator.
pub struct ReferenceSimulator {
    params: EngineParams,
    neurons: Vec<RefNeuron>,
    synapses: Vec<RefSynapse>,
    out_of: Vec<Vec<u32>>,
    in_of: Vec<Vec<u32>>,
    inter_ids: Vec<u32>,
    pyr_ids: Vec<u32>,
    forced: HashMap<u32, Vec<u32>>,
    pending: Vec<u32>,
    t: u32,
    somatic_now: Vec<f64>,
    distal_now: Vec<f64>,
    /// (t, id, kind) of every emission, in emission order.
    pub events: Vec<(u32, u32, EventKind)>,
}

impl ReferenceSimulator {
    pub fn new(topology: &Topology, forced_events: &[(u32, u32)], params: EngineParams) -> Self {
        let n = topology.n_neurons();
        let neurons = topology
            .neurons
            .iter()
            .map(|_info| RefNeuron {
                topdown: topology.topdown_enabled,
                spikes: Vec::new(),
                ca_spikes: Vec::new(),
                basal: Vec::new(),
                distal: Vec::new(),
                inter_inputs: Vec::new(),
            })
            .collect();
        let synapses = topology
            .synapses
            .iter()
            .map(|s| RefSynapse {
                pre: s.pre_id,
                post: s.post_id,
                weight: s.weight,
                kind: s.kind,
                site: s.target_site,
                last_pre: None,
                last_post: None,
            })
            .collect::<Vec<_>>();
        let mut out_of = vec![Vec::new(); n];
        let mut in_of = vec![Vec::new(); n];
        for (si, s) in synapses.iter().enumerate() {
            out_of[s.pre as usize].push(si as u32);
            in_of[s.post as usize].push(si as u32);
        }
        let mut inter_ids = Vec::new();
        let mut pyr_ids = Vec::new();
        for (id, info) in topology.neurons.iter().enumerate() {
            match info.class {
                NeuronClass::Interneuron => inter_ids.push(id as u32),
                NeuronClass::Pyramidal => pyr_ids.push(id as u32),
            }
        }
        let mut forced: HashMap<u32, Vec<u32>> = HashMap::new();
        for &(t, id) in forced_events {
            forced.entry(t).or_default().push(id);
        }
        for ids in forced.values_mut() {
            ids.sort_unstable();
            ids.dedup();
        }
        Self {
            params,
            neurons,
            synapses,
            out_of,
            in_of,
            inter_ids,
            pyr_ids,
            forced,
            pending: Vec::new(),
            t: 0,
            somatic_now: vec![0.0; n],
            distal_now: vec![0.0; n],
            events: Vec::new(),
        }
    }

    fn somatic(&self, id: u32, t: u32, kp: &KernelParams) -> f64 {
        let n = &self.neurons[id as usize];
        let mut u = 0.0;
        for &(ts, _) in &n.spikes {
            u += kernels::eta((t - ts) as f64, kp);
        }
        for &(te, w) in &n.basal {
            u += w * kernels::eps((t - te) as f64, kp);
        }
        if n.topdown {
            for &tc in &n.ca_spikes {
                u += kernels::rho((t - tc) as f64, kp);
            }
        }
        u
    }

    fn distal(&self, id: u32, t: u32, kp: &KernelParams) -> f64 {
        let n = &self.neurons[id as usize];
        let mut u = 0.0;
        for &(te, w) in &n.distal {
            u += w * kernels::eps((t - te) as f64, kp);
        }
        u
    }

    fn interneuron_potential(&self, id: u32, t: u32, kp: &KernelParams) -> f64 {
        let n = &self.neurons[id as usize];
        let mut u = 0.0;
        for &(te, w) in &n.inter_inputs {
            u += w * kernels::eps((t - te) as f64, kp);
        }
        for &(ts, _) in &n.spikes {
            u += kernels::eta((t - ts) as f64, kp);
        }
        u
    }

    fn stdp_update(&mut self, si: u32, delta_t: f64) {
        let mode = self.params.inhibitory_stdp;
        let w = &self.params.windows;
        let s = &mut self.synapses[si as usize];
        if delta_t == 0.0 {
            return;
        }
        if mode == InhibitoryStdp::Signed && s.kind == SynapseKind::Inhibitory {
            let dw = if delta_t > 0.0 {
                (1.0 - s.weight) * kernels::omega_plus(delta_t, w)
            } else {
                s.weight * kernels::omega_minus(delta_t, w)
            };
            s.weight = (s.weight + dw).clamp(-1.0, 0.0);
        } else {
            let sign = if s.kind == SynapseKind::Inhibitory { -1.0 } else { 1.0 };
            let m = s.weight.abs();
            let dm = if delta_t > 0.0 {
                (1.0 - m) * kernels::omega_plus(delta_t, w)
            } else {
                m * kernels::omega_minus(delta_t, w)
            };
            let m = (m + dm).clamp(0.0, 1.0);
            s.weight = sign * m;
        }
    }

    /// One millisecond, replayed from first principles.
    pub fn step(&mut self) {
        let t = self.t;
        let kp = self.params.kernels;
        let th = self.params.thresholds;

        // delivery of last step's emissions, weight read at delivery
        let pending = std::mem::take(&mut self.pending);
        for &pre in &pending {
            for &si in &self.out_of[pre as usize].clone() {
                let (post, site, weight) = {
                    let s = &self.synapses[si as usize];
                    (s.post, s.site, s.weight)
                };
                let target = &mut self.neurons[post as usize];
                match site {
                    TargetSite::Basal => target.basal.push((t, weight)),
                    TargetSite::Distal => target.distal.push((t, weight)),
                    TargetSite::Interneuron => target.inter_inputs.push((t, weight)),
                }
            }
        }

        let forced = self.forced.get(&t).cloned().unwrap_or_default();
        let mut emitted: Vec<u32> = Vec::new();

        for idx in 0..self.inter_ids.len() {
            let id = self.inter_ids[idx];
            let u = self.interneuron_potential(id, t, &kp);
            self.somatic_now[id as usize] = u;
            let n = &mut self.neurons[id as usize];
            let refractory_over = n
                .spikes
                .last()
                .is_none_or(|&(last, _)| t - last >= th.abs_refractory);
            if refractory_over && u >= th.theta {
                n.spikes.push((t, false));
                emitted.push(id);
                self.events.push((t, id, EventKind::Inh));
            }
        }

        for idx in 0..self.pyr_ids.len() {
            let id = self.pyr_ids[idx];
            let u = self.somatic(id, t, &kp);
            self.somatic_now[id as usize] = u;
            let is_forced = forced.binary_search(&id).is_ok();
            let refractory_over = self.neurons[id as usize]
                .spikes
                .last()
                .is_none_or(|&(last, _)| t - last >= th.abs_refractory);
            if refractory_over && (is_forced || u >= th.theta) {
                self.neurons[id as usize].spikes.push((t, false));
                emitted.push(id);
                self.events.push((t, id, EventKind::Na));
            }
            let mut ud = 0.0;
            if self.neurons[id as usize].topdown {
                ud = self.distal(id, t, &kp);
                if ud >= th.theta_ca {
                    let n = &mut self.neurons[id as usize];
                    for spike in n.spikes.iter_mut() {
                        if spike.1 {
                            continue;
                        }
                        let opens = spike.0 + th.bp_delay;
                        if t >= opens && t - opens < th.ca_window {
                            spike.1 = true;
                            n.ca_spikes.push(t);
                            self.events.push((t, id, EventKind::Ca));
                            break;
                        }
                    }
                }
            }
            self.distal_now[id as usize] = ud;
        }

        for &id in &emitted {
            for &si in &self.out_of[id as usize].clone() {
                if self.synapses[si as usize].kind == SynapseKind::Fixed {
                    continue;
                }
                if let Some(last_post) = self.synapses[si as usize].last_post {
                    let delta_t = last_post as f64 - t as f64;
                    self.stdp_update(si, delta_t);
                }
                self.synapses[si as usize].last_pre = Some(t);
            }
        }
        for &id in &emitted {
            for &si in &self.in_of[id as usize].clone() {
                if self.synapses[si as usize].kind == SynapseKind::Fixed {
                    continue;
                }
                if let Some(last_pre) = self.synapses[si as usize].last_pre {
                    let delta_t = t as f64 - last_pre as f64;
                    self.stdp_update(si, delta_t);
                }
                self.synapses[si as usize].last_post = Some(t);
            }
        }

        self.pending = emitted;
        self.t += 1;
    }

    pub fn somatic_now(&self, id: u32) -> f64 {
        self.somatic_now[id as usize]
    }

    pub fn distal_now(&self, id: u32) -> f64 {
        self.distal_now[id as usize]
    }

    pub fn weights(&self) -> Vec<f64> {
        self.synapses.iter().map(|s| s.weight).collect()
    }
}

/// A hand-built verification circuit.
pub struct Microcircuit {
    pub name: &'static str,
    pub topology: Topology,
    pub forced: Vec<(u32, u32)>,
    pub duration: u32,
}

fn pyr(layer: LayerId, index: usize) -> NeuronInfo {
    NeuronInfo {
        class: NeuronClass::Pyramidal,
        layer,
        index,
    }
}

fn inter(layer: LayerId, index: usize) -> NeuronInfo {
    NeuronInfo {
        class: NeuronClass::Interneuron,
        layer,
        index,
    }
}

/// The verification circuits: a lone neuron under a forced schedule, a
/// plastic feedforward pair, the calcium-spike triad with distal feedback,
/// and an inhibitory relay.
pub fn microcircuits() -> Vec<Microcircuit> {
    let mut circuits = Vec::new();

    // 1. single neuron: hyperpolarisation accumulation and refractoriness,
    // including forced spikes landing inside the refractory interval
    let mut forced = Vec::new();
    let mut t = 3;
    while t < 990 {
        forced.push((t, 0));
        forced.push((t + 1, 0)); // refractory-blocked
        forced.push((t + 4, 0));
        t += 13;
    }
    circuits.push(Microcircuit {
        name: "single_neuron",
        topology: Topology::custom(vec![pyr(LayerId::Perceptive1, 0)], vec![], false),
        forced,
        duration: 1000,
    });

    // 2. feedforward pair with active plasticity: paired pulses cross the
    // threshold at first only together; potentiation makes later singles
    // sufficient
    let mut forced = Vec::new();
    let mut t = 5;
    let mut k = 0u32;
    while t < 980 {
        forced.push((t, 0));
        if k % 3 != 2 {
            forced.push((t + 3, 0));
        }
        t += 17 + (k % 5);
        k += 1;
    }
    circuits.push(Microcircuit {
        name: "pair_stdp",
        topology: Topology::custom(
            vec![pyr(LayerId::Perceptive1, 0), pyr(LayerId::Associative, 0)],
            vec![Synapse::new(0, 1, 0.85, SynapseKind::Excitatory, TargetSite::Basal)],
            false,
        ),
        forced,
        duration: 1000,
    });

    // 3. the calcium-spike triad: bottom-up drive fires the associative
    // neuron, whose distal feedback coincides with the backpropagated
    // somatic spikes and emits calcium spikes that facilitate extra firing
    let mut forced = Vec::new();
    let mut t = 5;
    while t < 980 {
        forced.push((t, 0));
        forced.push((t + 2, 0));
        t += 10;
    }
    circuits.push(Microcircuit {
        name: "caap_triad",
        topology: Topology::custom(
            vec![pyr(LayerId::Perceptive1, 0), pyr(LayerId::Associative, 0)],
            vec![
                Synapse::new(0, 1, 0.9, SynapseKind::Excitatory, TargetSite::Basal),
                Synapse::new(0, 1, 0.9, SynapseKind::Excitatory, TargetSite::Basal),
                Synapse::new(1, 0, 0.8, SynapseKind::Excitatory, TargetSite::Distal),
                Synapse::new(1, 0, 0.8, SynapseKind::Excitatory, TargetSite::Distal),
                Synapse::new(1, 0, 0.8, SynapseKind::Excitatory, TargetSite::Distal),
            ],
            true,
        ),
        forced,
        duration: 1000,
    });

    // 4. inhibitory relay: a fixed unit relay drives the interneuron, whose
    // plastic inhibition shapes the second pyramidal's response
    let mut forced = Vec::new();
    let mut t = 4;
    let mut k = 0u32;
    while t < 980 {
        forced.push((t, 0));
        forced.push((t + 2, 0));
        t += 11 + (k % 7);
        k += 1;
    }
    circuits.push(Microcircuit {
        name: "inhibition_relay",
        topology: Topology::custom(
            vec![
                pyr(LayerId::Perceptive1, 0),
                pyr(LayerId::Perceptive1, 1),
                inter(LayerId::Perceptive1, 0),
            ],
            vec![
                Synapse::new(0, 1, 0.8, SynapseKind::Excitatory, TargetSite::Basal),
                Synapse::new(0, 2, 1.0, SynapseKind::Fixed, TargetSite::Interneuron),
                Synapse::new(2, 1, -0.6, SynapseKind::Inhibitory, TargetSite::Basal),
            ],
            false,
        ),
        forced,
        duration: 1000,
    });

    circuits
}

/// Result of running a circuit through both simulators.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub name: &'static str,
    pub steps: u32,
    pub potentials_compared: u64,
    pub engine_events: usize,
    pub mismatch: Option<String>,
}

impl OracleReport {
    pub fn ok(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// Steps the engine and the reference in lockstep over one circuit,
/// demanding exact equality of every potential at every millisecond, of the
/// full emission record, and of the final weights.
pub fn verify(circuit: &Microcircuit, params: EngineParams) -> OracleReport {
    let mut engine = Engine::new(circuit.topology.clone(), &circuit.forced, vec![], params);
    let mut reference = ReferenceSimulator::new(&circuit.topology, &circuit.forced, params);
    let n = circuit.topology.n_neurons();
    let topdown = circuit.topology.topdown_enabled;

    let mut potentials_compared = 0u64;
    let mut mismatch = None;

    'outer: for t in 0..circuit.duration {
        engine.step();
        reference.step();
        for id in 0..n as u32 {
            let e = engine.last_somatic_potential(id);
            let r = reference.somatic_now(id);
            potentials_compared += 1;
            if e != r {
                mismatch = Some(format!(
                    "somatic potential of neuron {id} at t={t}: engine {e:?} vs reference {r:?}"
                ));
                break 'outer;
            }
            if topdown {
                let e = engine.last_distal_potential(id);
                let r = reference.distal_now(id);
                potentials_compared += 1;
                if e != r {
                    mismatch = Some(format!(
                        "distal potential of neuron {id} at t={t}: engine {e:?} vs reference {r:?}"
                    ));
                    break 'outer;
                }
            }
        }
    }

    if mismatch.is_none() {
        let engine_events: Vec<(u32, u32, EventKind)> = engine
            .raster()
            .iter()
            .map(|ev| {
                let id = circuit
                    .topology
                    .neurons
                    .iter()
                    .position(|info| {
                        info.layer == ev.layer
                            && info.index == ev.neuron
                            && (info.class == NeuronClass::Interneuron)
                                == (ev.kind == EventKind::Inh)
                    })
                    .unwrap() as u32;
                (ev.t, id, ev.kind)
            })
            .collect();
        if engine_events != reference.events {
            mismatch = Some(format!(
                "emission records differ: engine {} events, reference {} events",
                engine_events.len(),
                reference.events.len()
            ));
        }
    }

    if mismatch.is_none() {
        let engine_weights: Vec<f64> = engine.synapses().iter().map(|s| s.weight).collect();
        let reference_weights = reference.weights();
        if engine_weights != reference_weights {
            mismatch = Some("final weights differ".into());
        }
    }

    OracleReport {
        name: circuit.name,
        steps: circuit.duration,
        potentials_compared,
        engine_events: engine.raster().len(),
        mismatch,
    }
}

/// Runs every microcircuit; the engine is correct only if all reports pass.
pub fn verify_all(params: EngineParams) -> Vec<OracleReport> {
    microcircuits()
        .iter()
        .map(|c| verify(c, params))
        .collect()
}

/// Convenience: verify with the committed default parameters.
pub fn verify_all_default() -> Vec<OracleReport> {
    let cfg = crate::config::ExperimentConfig::default();
    verify_all(EngineParams::from(&cfg))
}

// the no-top-down condition must behave as if distal inputs never existed
pub fn topdown_gate_is_inert(seed: u64) -> bool {
    let cfg = crate::config::ExperimentConfig::default();
    let set = crate::stimulus::StimulusSet::builtin();
    let with_feedback =
        crate::engine::run_one(&cfg, &set, seed, Condition::NoTopDown).expect("run");
    let mut removed_cfg = cfg.clone();
    removed_cfg.no_topdown_mode = crate::config::NoTopdownMode::RemoveFeedback;
    let without_feedback =
        crate::engine::run_one(&removed_cfg, &set, seed, Condition::NoTopDown).expect("run");
    with_feedback.raster == without_feedback.raster
}
