//! Per-neuron dynamics.
//!
//! Pyramidal neurons integrate at two sites. The somatic potential is the
//! sum of hyperpolarisation terms for the neuron's own past spikes, weighted
//! PSP terms for buffered basal events (inhibitory events enter here with
//! negative weights), and, when top-down modulation is enabled, calcium-spike
//! response terms. The distal potential sums PSP terms over the distal
//! buffer only and is compared against a separate threshold to detect the
//! coincidence of a backpropagated somatic spike with distal excitation,
//! which emits a calcium spike (at most one per somatic spike).
//!
//! Interneurons are single-site units: weighted PSPs plus their own
//! hyperpolarisation history.
//!
//! Summation order is fixed and documented because the reference simulator
//! reproduces it term for term: somatic = eta terms (chronological), then
//! basal events (delivery order), then rho terms (chronological); distal and
//! interneuron potentials follow their buffer order, interneurons adding eta
//! terms last.

use std::collections::VecDeque;

use crate::kernels::KernelTable;
use crate::{Error, Result};

/// A buffered presynaptic event: arrival time and the weight the synapse
/// carried at delivery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputEvent {
    pub t: u32,
    pub weight: f64,
}

/// A somatic spike plus the flag marking whether its backpropagated copy has
/// already been consumed by a calcium spike.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SomaticSpike {
    pub t: u32,
    pub ca_used: bool,
}

/// Firing thresholds and timing constants shared by the coincidence logic.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeuronThresholds {
    /// Somatic firing threshold.
    pub theta: f64,
    /// Distal threshold for calcium-spike initiation.
    pub theta_ca: f64,
    /// Backpropagation delay soma -> distal site (ms).
    pub bp_delay: u32,
    /// Width of the coincidence window opened by a backpropagated spike (ms).
    pub ca_window: u32,
    /// Minimum inter-spike interval (ms).
    pub abs_refractory: u32,
}

impl Default for NeuronThresholds {
    fn default() -> Self {
        Self {
            theta: 1.0,
            theta_ca: 1.0,
            bp_delay: 2,
            ca_window: 4,
            abs_refractory: 3,
        }
    }
}

impl NeuronThresholds {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("thresholds.theta", self.theta > 0.0),
            ("thresholds.theta_ca", self.theta_ca > 0.0),
            ("thresholds.bp_delay", self.bp_delay >= 1),
            ("thresholds.ca_window", self.ca_window >= 1),
            ("thresholds.abs_refractory", self.abs_refractory >= 1),
        ];
        for (field, ok) in checks {
            if !ok {
                return Err(Error::InvalidParameter {
                    field: field.into(),
                    reason: "out of range".into(),
                });
            }
        }
        Ok(())
    }
}

/// What a pyramidal neuron emitted at a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpikeOutcome {
    None,
    NaSpike,
    CaSpike,
    NaAndCaSpike,
}

impl SpikeOutcome {
    pub fn na(&self) -> bool {
        matches!(self, SpikeOutcome::NaSpike | SpikeOutcome::NaAndCaSpike)
    }
    pub fn ca(&self) -> bool {
        matches!(self, SpikeOutcome::CaSpike | SpikeOutcome::NaAndCaSpike)
    }
}

/// Dynamic state of one pyramidal neuron.
#[derive(Debug, Clone, Default)]
pub struct PyramidalState {
    pub somatic_spikes: VecDeque<SomaticSpike>,
    pub ca_spikes: VecDeque<u32>,
    pub basal_inputs: VecDeque<InputEvent>,
    pub distal_inputs: VecDeque<InputEvent>,
    pub topdown_enabled: bool,
    /// Most recent somatic spike, kept outside the (truncated) history for
    /// the refractory check.
    pub last_spike: Option<u32>,
}

impl PyramidalState {
    pub fn new(topdown_enabled: bool) -> Self {
        Self {
            topdown_enabled,
            ..Self::default()
        }
    }

    /// Drops events and spikes older than the kernel horizon; they
    /// contribute exactly zero to every sum from now on.
    pub fn truncate(&mut self, t: u32, support_ms: u32) {
        let cutoff = t.saturating_sub(support_ms);
        while self.somatic_spikes.front().is_some_and(|s| s.t < cutoff) {
            self.somatic_spikes.pop_front();
        }
        while self.ca_spikes.front().is_some_and(|&s| s < cutoff) {
            self.ca_spikes.pop_front();
        }
        while self.basal_inputs.front().is_some_and(|e| e.t < cutoff) {
            self.basal_inputs.pop_front();
        }
        while self.distal_inputs.front().is_some_and(|e| e.t < cutoff) {
            self.distal_inputs.pop_front();
        }
    }
}

/// Dynamic state of one inhibitory interneuron.
#[derive(Debug, Clone, Default)]
pub struct InterneuronState {
    pub spikes: VecDeque<u32>,
    pub inputs: VecDeque<InputEvent>,
    pub last_spike: Option<u32>,
}

impl InterneuronState {
    pub fn truncate(&mut self, t: u32, support_ms: u32) {
        let cutoff = t.saturating_sub(support_ms);
        while self.spikes.front().is_some_and(|&s| s < cutoff) {
            self.spikes.pop_front();
        }
        while self.inputs.front().is_some_and(|e| e.t < cutoff) {
            self.inputs.pop_front();
        }
    }
}

#[inline]
fn age(t: u32, event_t: u32) -> usize {
    debug_assert!(event_t <= t, "buffered event in the future of the clock");
    (t - event_t) as usize
}

/// Somatic membrane potential at time `t`.
pub fn somatic_potential(state: &PyramidalState, t: u32, table: &KernelTable) -> f64 {
    let horizon = table.support_ms as usize;
    let mut u = 0.0;
    for spike in &state.somatic_spikes {
        let s = age(t, spike.t);
        if s <= horizon {
            u += table.eta[s];
        }
    }
    for ev in &state.basal_inputs {
        let s = age(t, ev.t);
        if s <= horizon {
            u += ev.weight * table.eps[s];
        }
    }
    if state.topdown_enabled {
        for &ca in &state.ca_spikes {
            let s = age(t, ca);
            if s <= horizon {
                u += table.rho[s];
            }
        }
    }
    u
}

/// Distal membrane potential at time `t`: PSP terms over the distal buffer
/// only, with no hyperpolarisation and no calcium-spike contribution.
pub fn distal_potential(state: &PyramidalState, t: u32, table: &KernelTable) -> f64 {
    let horizon = table.support_ms as usize;
    let mut u = 0.0;
    for ev in &state.distal_inputs {
        let s = age(t, ev.t);
        if s <= horizon {
            u += ev.weight * table.eps[s];
        }
    }
    u
}

/// Result of stepping a pyramidal neuron: the emission outcome plus the
/// potentials it was computed from (the engine caches these for probing and
/// reference comparison).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PyramidalStep {
    pub outcome: SpikeOutcome,
    pub somatic: f64,
    /// Zero when top-down modulation is disabled; the distal site is inert
    /// in that condition.
    pub distal: f64,
}

/// Result of stepping an interneuron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterneuronStep {
    pub spiked: bool,
    pub potential: f64,
}

/// Advances one pyramidal neuron to time `t`.
///
/// `forced` marks a scheduled sensory emission: it bypasses the threshold
/// but still honors the absolute refractory interval, so spike history stays
/// strictly increasing. A calcium spike requires the distal potential to
/// cross its threshold while the backpropagated copy of an earlier somatic
/// spike is present, i.e. `t - (t_f + bp_delay)` in `[0, ca_window)`; the
/// earliest unconsumed spike satisfying this is used.
pub fn step_pyramidal(
    state: &mut PyramidalState,
    t: u32,
    thresholds: &NeuronThresholds,
    table: &KernelTable,
    forced: bool,
) -> PyramidalStep {
    if let Some(last) = state.last_spike {
        debug_assert!(t > last, "pyramidal stepped out of order");
    }
    let refractory_over = state
        .last_spike
        .is_none_or(|last| t - last >= thresholds.abs_refractory);

    let somatic = somatic_potential(state, t, table);
    let mut na = false;
    if refractory_over && (forced || somatic >= thresholds.theta) {
        state.somatic_spikes.push_back(SomaticSpike { t, ca_used: false });
        state.last_spike = Some(t);
        na = true;
    }

    let mut distal = 0.0;
    let mut ca = false;
    if state.topdown_enabled {
        distal = distal_potential(state, t, table);
        if distal >= thresholds.theta_ca {
            for spike in state.somatic_spikes.iter_mut() {
                if spike.ca_used {
                    continue;
                }
                let opens = spike.t + thresholds.bp_delay;
                if t >= opens && t - opens < thresholds.ca_window {
                    spike.ca_used = true;
                    state.ca_spikes.push_back(t);
                    ca = true;
                    break;
                }
            }
        }
    }

    let outcome = match (na, ca) {
        (false, false) => SpikeOutcome::None,
        (true, false) => SpikeOutcome::NaSpike,
        (false, true) => SpikeOutcome::CaSpike,
        (true, true) => SpikeOutcome::NaAndCaSpike,
    };
    PyramidalStep {
        outcome,
        somatic,
        distal,
    }
}

/// Advances one interneuron to time `t`.
pub fn step_interneuron(
    state: &mut InterneuronState,
    t: u32,
    thresholds: &NeuronThresholds,
    table: &KernelTable,
) -> InterneuronStep {
    if let Some(last) = state.last_spike {
        debug_assert!(t > last, "interneuron stepped out of order");
    }
    let horizon = table.support_ms as usize;
    let mut u = 0.0;
    for ev in &state.inputs {
        let s = age(t, ev.t);
        if s <= horizon {
            u += ev.weight * table.eps[s];
        }
    }
    for &spike in &state.spikes {
        let s = age(t, spike);
        if s <= horizon {
            u += table.eta[s];
        }
    }
    let refractory_over = state
        .last_spike
        .is_none_or(|last| t - last >= thresholds.abs_refractory);
    let spiked = refractory_over && u >= thresholds.theta;
    if spiked {
        state.spikes.push_back(t);
        state.last_spike = Some(t);
    }
    InterneuronStep { spiked, potential: u }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{eps, eta, KernelParams, KernelTable};

    fn table() -> (KernelParams, KernelTable) {
        let p = KernelParams::default();
        let t = KernelTable::new(&p);
        (p, t)
    }

    #[test]
    fn resting_potential_is_zero() {
        let (_, table) = table();
        let state = PyramidalState::new(true);
        assert_eq!(somatic_potential(&state, 100, &table), 0.0);
        assert_eq!(distal_potential(&state, 100, &table), 0.0);
    }

    #[test]
    fn single_basal_event_peaks_at_tau_s() {
        let (p, table) = table();
        let mut state = PyramidalState::new(false);
        state.basal_inputs.push_back(InputEvent { t: 10, weight: 0.5 });
        let t = 10 + p.tau_s as u32;
        let u = somatic_potential(&state, t, &table);
        assert_eq!(u, 0.5 * p.eps_amp);
    }

    #[test]
    fn own_spike_hyperpolarises() {
        let (p, table) = table();
        let mut state = PyramidalState::new(false);
        state.somatic_spikes.push_back(SomaticSpike { t: 20, ca_used: false });
        let t = 20 + p.tau_r as u32;
        let u = somatic_potential(&state, t, &table);
        assert_eq!(u, eta(p.tau_r, &p));
        assert!(u < 0.0);
    }

    #[test]
    fn distal_events_sum_linearly_and_stay_out_of_the_soma() {
        let (p, table) = table();
        let mut state = PyramidalState::new(true);
        state.distal_inputs.push_back(InputEvent { t: 10, weight: 0.6 });
        state.distal_inputs.push_back(InputEvent { t: 10, weight: 0.6 });
        let t = 10 + p.tau_s as u32;
        assert_eq!(distal_potential(&state, t, &table), 0.6 * p.eps_amp + 0.6 * p.eps_amp);
        assert_eq!(somatic_potential(&state, t, &table), 0.0);
    }

    #[test]
    fn rho_contributes_only_when_topdown_is_enabled() {
        let (p, table) = table();
        let mut on = PyramidalState::new(true);
        let mut off = PyramidalState::new(false);
        on.ca_spikes.push_back(30);
        off.ca_spikes.push_back(30);
        let t = 30 + p.tau_ca as u32;
        assert_eq!(somatic_potential(&on, t, &table), p.rho_amp);
        assert_eq!(somatic_potential(&off, t, &table), 0.0);
    }

    #[test]
    fn subthreshold_everywhere_yields_no_spike() {
        let (_, table) = table();
        let th = NeuronThresholds::default();
        let mut state = PyramidalState::new(true);
        state.basal_inputs.push_back(InputEvent { t: 5, weight: 0.1 });
        for t in 5..40 {
            assert_eq!(step_pyramidal(&mut state, t, &th, &table, false).outcome, SpikeOutcome::None);
        }
    }

    #[test]
    fn threshold_crossing_fires_and_refractory_blocks() {
        let (p, table) = table();
        let th = NeuronThresholds {
            abs_refractory: 4,
            ..Default::default()
        };
        let mut state = PyramidalState::new(false);
        // two coincident unit events cross theta = 1 before the peak
        state.basal_inputs.push_back(InputEvent { t: 0, weight: 1.0 });
        state.basal_inputs.push_back(InputEvent { t: 0, weight: 1.0 });
        let mut spike_times = Vec::new();
        for t in 0..20 {
            if step_pyramidal(&mut state, t, &th, &table, false).outcome.na() {
                spike_times.push(t);
            }
        }
        assert!(!spike_times.is_empty());
        for pair in spike_times.windows(2) {
            assert!(pair[1] - pair[0] >= th.abs_refractory);
        }
        // first crossing: smallest integer s with 2 * eps(s) >= 1
        let expected = (1..).find(|&s| 2.0 * eps(s as f64, &p) >= th.theta).unwrap();
        assert_eq!(spike_times[0], expected);
    }

    #[test]
    fn forced_spike_bypasses_threshold_but_not_refractory() {
        let (_, table) = table();
        let th = NeuronThresholds::default();
        let mut state = PyramidalState::new(false);
        assert!(step_pyramidal(&mut state, 10, &th, &table, true).outcome.na());
        // inside the refractory interval a forced emission is suppressed
        for t in 11..10 + th.abs_refractory {
            assert!(!step_pyramidal(&mut state, t, &th, &table, true).outcome.na());
        }
        assert!(step_pyramidal(&mut state, 10 + th.abs_refractory, &th, &table, true)
            .outcome
            .na());
    }

    #[test]
    fn distal_crossing_without_backpropagated_spike_gives_no_ca() {
        let (_, table) = table();
        let th = NeuronThresholds::default();
        let mut state = PyramidalState::new(true);
        // strong distal drive, silent soma
        state.distal_inputs.push_back(InputEvent { t: 0, weight: 5.0 });
        state.distal_inputs.push_back(InputEvent { t: 0, weight: 5.0 });
        for t in 0..30 {
            let out = step_pyramidal(&mut state, t, &th, &table, false);
            assert!(!out.outcome.ca(), "unexpected calcium spike at {t}");
        }
        assert!(state.ca_spikes.is_empty());
    }

    #[test]
    fn coincidence_emits_one_ca_per_somatic_spike() {
        let (p, table) = table();
        let th = NeuronThresholds::default();
        let mut state = PyramidalState::new(true);
        // forced somatic spike at t = 10; sustained distal drive above
        // theta_ca across the whole window
        let mut ca_times = Vec::new();
        for t in 0..30 {
            if t < 12 {
                state.distal_inputs.push_back(InputEvent { t, weight: 2.0 });
            }
            let forced = t == 10;
            let out = step_pyramidal(&mut state, t, &th, &table, forced);
            if out.outcome.ca() {
                ca_times.push(t);
            }
        }
        // window opens at 10 + bp_delay; drive is already above threshold.
        // The calcium spike may facilitate further somatic spikes, each
        // eligible for at most one calcium spike of its own.
        assert_eq!(ca_times[0], 10 + th.bp_delay);
        assert!(state.ca_spikes.len() <= state.somatic_spikes.len());
        // and the emitted calcium spikes now feed the soma through rho
        let t_probe = ca_times.last().unwrap() + p.tau_ca as u32;
        let u = somatic_potential(&state, t_probe, &table);
        assert!(u > 0.0);
    }

    #[test]
    fn disabled_topdown_never_accumulates_ca_spikes() {
        let (_, table) = table();
        let th = NeuronThresholds::default();
        let mut state = PyramidalState::new(false);
        for t in 0..40 {
            if t < 20 {
                state.distal_inputs.push_back(InputEvent { t, weight: 3.0 });
            }
            step_pyramidal(&mut state, t, &th, &table, t % 10 == 0);
        }
        assert!(state.ca_spikes.is_empty());
    }

    #[test]
    fn interneuron_relay_fires_at_kernel_peak() {
        let (p, table) = table();
        let th = NeuronThresholds::default();
        // unit weight, eps_amp = 1, theta = 1: crossing exactly at tau_s
        let mut state = InterneuronState::default();
        state.inputs.push_back(InputEvent { t: 0, weight: 1.0 });
        let mut fired_at = None;
        for t in 0..20 {
            if step_interneuron(&mut state, t, &th, &table).spiked {
                fired_at = Some(t);
                break;
            }
        }
        assert_eq!(fired_at, Some(p.tau_s as u32));
    }

    #[test]
    fn weak_input_leaves_interneuron_silent() {
        let (_, table) = table();
        let th = NeuronThresholds::default();
        let mut state = InterneuronState::default();
        state.inputs.push_back(InputEvent { t: 0, weight: 0.3 });
        for t in 0..60 {
            assert!(!step_interneuron(&mut state, t, &th, &table).spiked);
        }
    }

    #[test]
    fn truncation_preserves_potentials() {
        let (_, table) = table();
        let mut a = PyramidalState::new(true);
        let mut b = PyramidalState::new(true);
        for k in 0..200 {
            let ev = InputEvent { t: k, weight: 0.01 };
            a.basal_inputs.push_back(ev);
            b.basal_inputs.push_back(ev);
        }
        let t = 220;
        b.truncate(t, table.support_ms);
        assert!(b.basal_inputs.len() < a.basal_inputs.len());
        assert_eq!(
            somatic_potential(&a, t, &table),
            somatic_potential(&b, t, &table)
        );
    }
}
