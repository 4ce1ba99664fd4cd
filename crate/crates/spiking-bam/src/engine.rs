//! The deterministic 1 ms simulation loop.
//!
//! Every step proceeds in a fixed order, and the whole run is a pure
//! function of `(topology, schedule, parameters)`:
//!
//! 1. events emitted at `t - 1` are delivered into the target buffers
//!    (emitters in emission order, each one's outgoing synapses in
//!    construction order, weight read at delivery);
//! 2. scheduled sensory emissions for `t` are looked up;
//! 3. all interneurons are stepped in id order, then all pyramidal neurons
//!    in id order — cross-neuron effects always wait for the next step, so
//!    within-class iteration order cannot leak into the results;
//! 4. plasticity handlers run for every emission at `t`: first every
//!    presynaptic (depression) pairing, then every postsynaptic
//!    (potentiation) pairing;
//! 5. emissions are recorded into the raster and, for associative
//!    pyramidal sodium spikes, into the output matrix of the presentation
//!    covering `t`.
//!
//! The reference simulator in [`crate::oracle`] reproduces exactly this
//! contract from first principles; the two must agree bit for bit.

use std::collections::HashMap;

use crate::config::{Condition, ExperimentConfig, NoTopdownMode};
use crate::kernels::{KernelParams, KernelTable, StdpWindowParams};
use crate::network::{self, LayerId, NeuronClass, Topology, WeightMatrix};
use crate::neuron::{
    step_interneuron, step_pyramidal, InputEvent, InterneuronState, NeuronThresholds,
    PyramidalState,
};
use crate::plasticity::{on_post_spike, on_pre_spike, InhibitoryStdp, TargetSite};
use crate::stimulus::{
    full_injection_schedule, protocol_schedule, InjectionSchedule, ProtocolEntry, StimulusSet,
    PRESENTATION_MS, PROTOCOL_MS,
};
use crate::Result;

/// The discrete clock; the step is fixed at 1 ms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimClock {
    pub t: u32,
}

impl SimClock {
    pub const DT_MS: u32 = 1;
}

/// Dense binary matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[row * self.cols + col] != 0
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.data[row * self.cols + col] = value as u8;
    }

    pub fn ones(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }
}

/// Associative spiking activity over one 100 ms presentation: rows are
/// associative pyramidal neurons, columns the 1 ms slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPattern {
    /// Stimulus index, 1-based.
    pub stimulus: usize,
    /// Presentation step of the set, 1..=20.
    pub presentation: u32,
    pub matrix: BinaryMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Somatic (sodium) spike of a pyramidal neuron.
    Na,
    /// Dendritic calcium spike.
    Ca,
    /// Interneuron spike.
    Inh,
}

impl EventKind {
    pub fn label(&self) -> &'static str {
        match self {
            EventKind::Na => "na",
            EventKind::Ca => "ca",
            EventKind::Inh => "inh",
        }
    }
}

/// One raster row: something fired somewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RasterEvent {
    pub t: u32,
    pub layer: LayerId,
    pub neuron: usize,
    pub kind: EventKind,
}

/// Everything one run produces.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub seed: u64,
    pub condition: Condition,
    pub schedule: Vec<ProtocolEntry>,
    /// One output pattern per presentation, in schedule order.
    pub outputs: Vec<OutputPattern>,
    pub raster: Vec<RasterEvent>,
    /// Weight snapshots at the phase boundaries: t = 0, 10000, 20000.
    pub snapshots: Vec<(u32, WeightMatrix)>,
}

impl RunRecord {
    /// `o_l(p)`, if it was recorded.
    pub fn output(&self, stimulus: usize, presentation: u32) -> Option<&OutputPattern> {
        self.outputs
            .iter()
            .find(|o| o.stimulus == stimulus && o.presentation == presentation)
    }

    /// The learned activity `k_l`: the output of the last learning-phase
    /// presentation.
    pub fn learned(&self, stimulus: usize) -> Option<&OutputPattern> {
        self.output(stimulus, 10)
    }

    /// Mean associative firing rate (Hz per neuron) over all presentations.
    pub fn mean_associative_rate_hz(&self) -> f64 {
        if self.outputs.is_empty() {
            return 0.0;
        }
        let spikes: usize = self.outputs.iter().map(|o| o.matrix.ones()).sum();
        let neurons = self.outputs[0].matrix.rows() as f64;
        let seconds = self.outputs.len() as f64 * PRESENTATION_MS as f64 / 1000.0;
        spikes as f64 / neurons / seconds
    }
}

/// Additive components of a somatic potential, for inspection.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SomaticBreakdown {
    pub eta: f64,
    pub excitatory: f64,
    pub inhibitory: f64,
    pub rho: f64,
}

impl SomaticBreakdown {
    pub fn total(&self) -> f64 {
        self.eta + self.excitatory + self.inhibitory + self.rho
    }
}

/// Simulation-level parameters extracted from the experiment config.
#[derive(Debug, Clone, Copy)]
pub struct EngineParams {
    pub kernels: KernelParams,
    pub windows: StdpWindowParams,
    pub thresholds: NeuronThresholds,
    pub inhibitory_stdp: InhibitoryStdp,
}

impl From<&ExperimentConfig> for EngineParams {
    fn from(cfg: &ExperimentConfig) -> Self {
        Self {
            kernels: cfg.kernels,
            windows: cfg.stdp,
            thresholds: cfg.thresholds,
            inhibitory_stdp: cfg.inhibitory_stdp,
        }
    }
}

enum NeuronState {
    Pyramidal(PyramidalState),
    Interneuron(InterneuronState),
}

/// The stepping simulator. [`run`] drives it through a full protocol; the
/// verification suite steps it manually and probes potentials.
pub struct Engine {
    params: EngineParams,
    table: KernelTable,
    topology: Topology,
    states: Vec<NeuronState>,
    out_synapses: Vec<Vec<u32>>,
    in_synapses: Vec<Vec<u32>>,
    interneuron_ids: Vec<u32>,
    pyramidal_ids: Vec<u32>,
    /// Forced sodium emissions by step, ids sorted.
    forced: HashMap<u32, Vec<u32>>,
    /// Emitters of the previous step, in emission order; delivered first.
    pending: Vec<u32>,
    clock: SimClock,
    last_somatic: Vec<f64>,
    last_distal: Vec<f64>,
    raster: Vec<RasterEvent>,
    /// Presentation windows (schedule order) and their output matrices.
    entries: Vec<ProtocolEntry>,
    matrices: Vec<BinaryMatrix>,
    cursor: usize,
    /// Output-matrix row for associative pyramidals, by neuron id.
    assoc_row: Vec<Option<usize>>,
}

/// Resolves modality-addressed injections to `(t, global id)` pairs against
/// the topology's own neuron table.
pub fn resolve_injections(topology: &Topology, injections: &InjectionSchedule) -> Vec<(u32, u32)> {
    let mut id_of: HashMap<(LayerId, usize), u32> = HashMap::new();
    for (id, info) in topology.neurons.iter().enumerate() {
        if info.class == NeuronClass::Pyramidal {
            id_of.insert((info.layer, info.index), id as u32);
        }
    }
    injections
        .events
        .iter()
        .map(|ev| {
            let id = id_of
                .get(&(ev.layer, ev.neuron))
                .unwrap_or_else(|| panic!("injection targets missing neuron {:?}/{}", ev.layer, ev.neuron));
            (ev.t, *id)
        })
        .collect()
}

impl Engine {
    pub fn new(
        topology: Topology,
        forced_events: &[(u32, u32)],
        entries: Vec<ProtocolEntry>,
        params: EngineParams,
    ) -> Self {
        let n = topology.n_neurons();
        let table = KernelTable::new(&params.kernels);

        let mut out_synapses = vec![Vec::new(); n];
        let mut in_synapses = vec![Vec::new(); n];
        for (si, s) in topology.synapses.iter().enumerate() {
            out_synapses[s.pre_id as usize].push(si as u32);
            in_synapses[s.post_id as usize].push(si as u32);
        }

        let mut interneuron_ids = Vec::new();
        let mut pyramidal_ids = Vec::new();
        let mut states = Vec::with_capacity(n);
        let mut assoc_row = vec![None; n];
        let mut next_row = 0;
        for (id, info) in topology.neurons.iter().enumerate() {
            match info.class {
                NeuronClass::Pyramidal => {
                    pyramidal_ids.push(id as u32);
                    states.push(NeuronState::Pyramidal(PyramidalState::new(
                        topology.topdown_enabled,
                    )));
                    if info.layer == LayerId::Associative {
                        assoc_row[id] = Some(next_row);
                        next_row += 1;
                    }
                }
                NeuronClass::Interneuron => {
                    interneuron_ids.push(id as u32);
                    states.push(NeuronState::Interneuron(InterneuronState::default()));
                }
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

        let matrices = entries
            .iter()
            .map(|_| BinaryMatrix::zeros(next_row, PRESENTATION_MS as usize))
            .collect();

        Self {
            params,
            table,
            topology,
            states,
            out_synapses,
            in_synapses,
            interneuron_ids,
            pyramidal_ids,
            forced,
            pending: Vec::new(),
            clock: SimClock::default(),
            last_somatic: vec![0.0; n],
            last_distal: vec![0.0; n],
            raster: Vec::new(),
            entries,
            matrices,
            cursor: 0,
            assoc_row,
        }
    }

    pub fn time(&self) -> u32 {
        self.clock.t
    }

    /// Somatic potential (or interneuron potential) computed at the last
    /// completed step.
    pub fn last_somatic_potential(&self, id: u32) -> f64 {
        self.last_somatic[id as usize]
    }

    pub fn last_distal_potential(&self, id: u32) -> f64 {
        self.last_distal[id as usize]
    }

    /// Decomposition of a pyramidal somatic potential at the last completed
    /// step: hyperpolarisation, excitatory and inhibitory basal drive, and
    /// the calcium-spike contribution.
    pub fn somatic_breakdown(&self, id: u32) -> SomaticBreakdown {
        let t = self.clock.t.saturating_sub(1);
        let horizon = self.table.support_ms as usize;
        let NeuronState::Pyramidal(state) = &self.states[id as usize] else {
            panic!("somatic_breakdown on an interneuron");
        };
        let mut b = SomaticBreakdown::default();
        for spike in &state.somatic_spikes {
            let s = (t - spike.t) as usize;
            if s <= horizon {
                b.eta += self.table.eta[s];
            }
        }
        for ev in &state.basal_inputs {
            let s = (t - ev.t) as usize;
            if s <= horizon {
                let v = ev.weight * self.table.eps[s];
                if ev.weight >= 0.0 {
                    b.excitatory += v;
                } else {
                    b.inhibitory += v;
                }
            }
        }
        if state.topdown_enabled {
            for &ca in &state.ca_spikes {
                let s = (t - ca) as usize;
                if s <= horizon {
                    b.rho += self.table.rho[s];
                }
            }
        }
        b
    }

    pub fn raster(&self) -> &[RasterEvent] {
        &self.raster
    }

    pub fn synapses(&self) -> &[crate::plasticity::Synapse] {
        &self.topology.synapses
    }

    pub fn snapshot(&self) -> WeightMatrix {
        network::snapshot_weights(&self.topology)
    }

    fn deliver(&mut self) {
        let t = self.clock.t;
        let pending = std::mem::take(&mut self.pending);
        for &pre in &pending {
            for &si in &self.out_synapses[pre as usize] {
                let syn = &self.topology.synapses[si as usize];
                let ev = InputEvent {
                    t,
                    weight: syn.weight,
                };
                match (&mut self.states[syn.post_id as usize], syn.target_site) {
                    (NeuronState::Pyramidal(p), TargetSite::Basal) => p.basal_inputs.push_back(ev),
                    (NeuronState::Pyramidal(p), TargetSite::Distal) => p.distal_inputs.push_back(ev),
                    (NeuronState::Interneuron(i), TargetSite::Interneuron) => {
                        i.inputs.push_back(ev)
                    }
                    _ => unreachable!("synapse site does not match its target's class"),
                }
            }
        }
    }

    /// Advances the simulation by one millisecond.
    pub fn step(&mut self) {
        let t = self.clock.t;
        self.deliver();

        let forced = self.forced.get(&t);
        let is_forced =
            |id: u32| forced.is_some_and(|ids| ids.binary_search(&id).is_ok());

        // presentation window covering t, if any
        while self.cursor < self.entries.len()
            && t >= self.entries[self.cursor].t0 + PRESENTATION_MS
        {
            self.cursor += 1;
        }
        let in_window = self.cursor < self.entries.len() && t >= self.entries[self.cursor].t0;

        let mut emitted: Vec<u32> = Vec::new();

        for &id in &self.interneuron_ids {
            let NeuronState::Interneuron(state) = &mut self.states[id as usize] else {
                unreachable!()
            };
            state.truncate(t, self.table.support_ms);
            let step = step_interneuron(state, t, &self.params.thresholds, &self.table);
            self.last_somatic[id as usize] = step.potential;
            if step.spiked {
                emitted.push(id);
                let info = self.topology.neurons[id as usize];
                self.raster.push(RasterEvent {
                    t,
                    layer: info.layer,
                    neuron: info.index,
                    kind: EventKind::Inh,
                });
            }
        }

        for &id in &self.pyramidal_ids {
            let NeuronState::Pyramidal(state) = &mut self.states[id as usize] else {
                unreachable!()
            };
            state.truncate(t, self.table.support_ms);
            let step = step_pyramidal(
                state,
                t,
                &self.params.thresholds,
                &self.table,
                is_forced(id),
            );
            self.last_somatic[id as usize] = step.somatic;
            self.last_distal[id as usize] = step.distal;
            let info = self.topology.neurons[id as usize];
            if step.outcome.na() {
                emitted.push(id);
                self.raster.push(RasterEvent {
                    t,
                    layer: info.layer,
                    neuron: info.index,
                    kind: EventKind::Na,
                });
                if in_window {
                    if let Some(row) = self.assoc_row[id as usize] {
                        let col = (t - self.entries[self.cursor].t0) as usize;
                        self.matrices[self.cursor].set(row, col, true);
                    }
                }
            }
            if step.outcome.ca() {
                self.raster.push(RasterEvent {
                    t,
                    layer: info.layer,
                    neuron: info.index,
                    kind: EventKind::Ca,
                });
            }
        }

        // plasticity: every depression pairing before every potentiation
        // pairing, so same-step pre/post updates are order-independent
        for &id in &emitted {
            for &si in &self.out_synapses[id as usize] {
                on_pre_spike(
                    &mut self.topology.synapses[si as usize],
                    t,
                    &self.params.windows,
                    self.params.inhibitory_stdp,
                );
            }
        }
        for &id in &emitted {
            for &si in &self.in_synapses[id as usize] {
                on_post_spike(
                    &mut self.topology.synapses[si as usize],
                    t,
                    &self.params.windows,
                    self.params.inhibitory_stdp,
                );
            }
        }

        self.pending = emitted;
        self.clock.t += 1;
    }

    pub fn run_to(&mut self, t_end: u32) {
        while self.clock.t < t_end {
            self.step();
        }
    }

    fn into_outputs(self) -> (Vec<OutputPattern>, Vec<RasterEvent>) {
        let outputs = self
            .entries
            .iter()
            .zip(self.matrices)
            .map(|(e, matrix)| OutputPattern {
                stimulus: e.stimulus,
                presentation: e.p,
                matrix,
            })
            .collect();
        (outputs, self.raster)
    }
}

/// Runs one full two-phase protocol on a prepared topology.
pub fn run(
    topology: Topology,
    set: &StimulusSet,
    seed: u64,
    condition: Condition,
    params: EngineParams,
) -> RunRecord {
    let entries = protocol_schedule(seed);
    let injections = full_injection_schedule(set, &entries);
    let forced = resolve_injections(&topology, &injections);
    let mut engine = Engine::new(topology, &forced, entries.clone(), params);

    let mut snapshots = Vec::with_capacity(3);
    snapshots.push((0, engine.snapshot()));
    engine.run_to(PROTOCOL_MS / 2);
    snapshots.push((PROTOCOL_MS / 2, engine.snapshot()));
    engine.run_to(PROTOCOL_MS);
    snapshots.push((PROTOCOL_MS, engine.snapshot()));

    let (outputs, raster) = engine.into_outputs();
    RunRecord {
        seed,
        condition,
        schedule: entries,
        outputs,
        raster,
        snapshots,
    }
}

/// Builds the topology for `(seed, condition)` under `cfg` and runs it.
pub fn run_one(cfg: &ExperimentConfig, set: &StimulusSet, seed: u64, condition: Condition) -> Result<RunRecord> {
    let topdown = condition == Condition::TopDown;
    let mut topology = network::build(seed, topdown, &cfg.network)?;
    if !topdown && cfg.no_topdown_mode == NoTopdownMode::RemoveFeedback {
        topology.remove_feedback_synapses();
    }
    Ok(run(topology, set, seed, condition, EngineParams::from(cfg)))
}

/// Runs the full experiment: every seed under every condition, conditions
/// sharing seeds so weight initializations match pairwise.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let set = load_patterns(cfg)?;
    let plan: Vec<(u64, Condition)> = cfg
        .experiment
        .seeds
        .iter()
        .flat_map(|&seed| {
            cfg.experiment
                .conditions
                .iter()
                .map(move |&condition| (seed, condition))
        })
        .collect();
    plan.into_iter()
        .map(|(seed, condition)| run_one(cfg, &set, seed, condition))
        .collect()
}

/// Resolves the configured pattern source.
pub fn load_patterns(cfg: &ExperimentConfig) -> Result<StimulusSet> {
    if cfg.experiment.patterns == "builtin" {
        Ok(StimulusSet::builtin())
    } else {
        StimulusSet::load(std::path::Path::new(&cfg.experiment.patterns))
    }
}

/// Checks the output-conservation invariant of a record: every matrix entry
/// corresponds to exactly one associative sodium spike in the raster.
pub fn output_conservation_holds(record: &RunRecord) -> bool {
    let mut from_raster: HashMap<u32, usize> = HashMap::new();
    for ev in &record.raster {
        if ev.kind == EventKind::Na && ev.layer == LayerId::Associative {
            *from_raster.entry(ev.t / PRESENTATION_MS).or_default() += 1;
        }
    }
    record.schedule.iter().zip(&record.outputs).all(|(e, o)| {
        o.matrix.ones() == from_raster.get(&(e.t0 / PRESENTATION_MS)).copied().unwrap_or(0)
    })
}
