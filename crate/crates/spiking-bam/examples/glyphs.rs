//! Renders the built-in bimodal stimulus set and the injection schedule of
//! the first presentation.
//!
//!     cargo run --example glyphs

use spiking_bam::stimulus::{encode_presentation, StimulusSet};

fn main() {
    let set = StimulusSet::builtin();
    for (index, (a, b)) in set.pairs.iter().enumerate() {
        println!(
            "pair {}: ('{}', '{}')  {} + {} black pixels",
            index + 1,
            a.label,
            b.label,
            a.black_count(),
            b.black_count()
        );
        let left: Vec<String> = a.to_string().lines().skip(1).map(str::to_string).collect();
        let right: Vec<String> = b.to_string().lines().skip(1).map(str::to_string).collect();
        for (l, r) in left.iter().zip(&right) {
            println!("  {l}    {r}");
        }
        println!();
    }

    let schedule = encode_presentation(&set.pairs[0], 0);
    println!(
        "first presentation of ('{}', '{}'): {} forced spikes over 100 ms",
        set.pairs[0].0.label,
        set.pairs[0].1.label,
        schedule.events.len()
    );
    let first_slot: Vec<_> = schedule.events.iter().filter(|e| e.t == 0).collect();
    println!("slot 0 injects {} neurons at t = 0 ms", first_slot.len());
}
