//! Traces somatic potentials of a few associative neurons through one
//! presentation, decomposed into their additive components. Handy for
//! seeing how excitation, inhibition, hyperpolarisation, and calcium-spike
//! facilitation interact under the current parameters.
//!
//!     cargo run --example membrane_trace [t_start_ms]

use spiking_bam::config::{Condition, ExperimentConfig};
use spiking_bam::engine::{self, Engine, EngineParams};
use spiking_bam::network::{self, pyramidal_id, LayerId};
use spiking_bam::stimulus::{full_injection_schedule, protocol_schedule, StimulusSet};

fn main() {
    let t_start: u32 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(8000);
    let cfg = ExperimentConfig::default();
    let condition = Condition::NoTopDown;
    let topology = network::build(1, condition == Condition::TopDown, &cfg.network).unwrap();
    let set = StimulusSet::builtin();
    let entries = protocol_schedule(1);
    let injections = full_injection_schedule(&set, &entries);
    let forced = engine::resolve_injections(&topology, &injections);
    let mut engine = Engine::new(topology, &forced, entries, EngineParams::from(&cfg));

    engine.run_to(t_start);
    let ids: Vec<u32> = (0..4).map(|j| pyramidal_id(LayerId::Associative, j)).collect();
    println!("t_ms, then per neuron: total (eta / exc / inh / rho) [*] marks a spike");
    for _ in 0..100 {
        engine.step();
        let t = engine.time() - 1;
        let mut line = format!("{t:5}");
        for &id in &ids {
            let b = engine.somatic_breakdown(id);
            let spiked = engine
                .raster()
                .iter()
                .rev()
                .take_while(|e| e.t == t)
                .any(|e| {
                    e.layer == LayerId::Associative
                        && e.neuron == (id as usize - 200)
                        && e.kind == engine::EventKind::Na
                });
            line.push_str(&format!(
                " | {:6.2} ({:5.2}/{:5.2}/{:6.2}/{:4.2}){}",
                b.total(),
                b.eta,
                b.excitatory,
                b.inhibitory,
                b.rho,
                if spiked { "*" } else { " " }
            ));
        }
        println!("{line}");
    }
}
