//! Prints the membrane kernels and plasticity windows on the millisecond
//! grid as CSV, ready for plotting.
//!
//!     cargo run --example kernel_shapes > kernels.csv

use spiking_bam::kernels::{eps, eta, omega_minus, omega_plus, rho, KernelParams, StdpWindowParams};

fn main() {
    let p = KernelParams::default();
    let w = StdpWindowParams::default();

    println!("# default kernels: tau_s={} tau_r={} tau_ca={} support={}", p.tau_s, p.tau_r, p.tau_ca, p.support);
    println!("s_ms,eps,eta,rho");
    for s in 0..=p.support as u32 {
        let s = s as f64;
        println!("{s},{},{},{}", eps(s, &p), eta(s, &p), rho(s, &p));
    }

    println!();
    println!("# plasticity windows: a_plus={} tau_plus={} a_minus={} tau_minus={}", w.a_plus, w.tau_plus, w.a_minus, w.tau_minus);
    println!("dt_ms,omega");
    let horizon = w.tau_minus.max(w.tau_plus) as i64 + 5;
    for dt in -horizon..=horizon {
        let dt = dt as f64;
        let value = if dt > 0.0 {
            omega_plus(dt, &w)
        } else if dt < 0.0 {
            omega_minus(dt, &w)
        } else {
            0.0
        };
        println!("{dt},{value}");
    }
}
