//! Weight trajectories under controlled spike pairings: pure potentiation,
//! pure depression, and a mixed train that settles at the multiplicative
//! equilibrium. Also contrasts the two inhibitory conventions.
//!
//!     cargo run --example stdp_pairing

use spiking_bam::kernels::StdpWindowParams;
use spiking_bam::plasticity::{
    on_post_spike, on_pre_spike, InhibitoryStdp, Synapse, SynapseKind, TargetSite,
};

fn main() {
    let w = StdpWindowParams::default();
    let mode = InhibitoryStdp::Magnitude;

    // pre 5 ms before post, pairs 40 ms apart: only potentiation pairings
    let mut s = Synapse::new(0, 1, 0.1, SynapseKind::Excitatory, TargetSite::Basal);
    print!("potentiation only: 0.100");
    for k in 0..8u32 {
        let t = 40 * k;
        on_pre_spike(&mut s, t, &w, mode);
        on_post_spike(&mut s, t + 5, &w, mode);
        print!(" -> {:.3}", s.weight);
    }
    println!();

    // post 5 ms before pre: only depression pairings
    let mut s = Synapse::new(0, 1, 0.9, SynapseKind::Excitatory, TargetSite::Basal);
    print!("depression only:   0.900");
    for k in 0..8u32 {
        let t = 40 * k;
        on_post_spike(&mut s, t, &w, mode);
        on_pre_spike(&mut s, t + 5, &w, mode);
        print!(" -> {:.3}", s.weight);
    }
    println!();

    // periodic pre with a post reply each cycle: both pairings occur and
    // the weight settles between the bounds
    let mut s = Synapse::new(0, 1, 0.5, SynapseKind::Excitatory, TargetSite::Basal);
    for k in 0..400u32 {
        let t = 10 * k;
        on_pre_spike(&mut s, t, &w, mode);
        on_post_spike(&mut s, t + 3, &w, mode);
    }
    println!("mixed train equilibrium after 400 cycles: {:.3}", s.weight);

    // inhibitory conventions: same pairing, opposite drift
    for mode in [InhibitoryStdp::Magnitude, InhibitoryStdp::Signed] {
        let mut s = Synapse::new(0, 1, -0.3, SynapseKind::Inhibitory, TargetSite::Basal);
        for k in 0..40u32 {
            let t = 40 * k;
            on_pre_spike(&mut s, t, &w, mode);
            on_post_spike(&mut s, t + 5, &w, mode);
        }
        println!(
            "inhibitory, potentiation pairings, {:?} convention: -0.300 -> {:.3}",
            mode, s.weight
        );
    }
}
