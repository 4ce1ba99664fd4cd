//! Time-response functions of the model.
//!
//! Membrane dynamics are built from three response kernels: `eps` (the
//! postsynaptic potential), `eta` (after-spike hyperpolarisation) and `rho`
//! (the somatic response to a dendritic calcium spike). Plasticity uses a
//! pair of linear windows `omega_plus` / `omega_minus` over the pre/post
//! spike time difference.
//!
//! All kernels are causal (zero for `s <= 0`) and truncated to exactly zero
//! beyond `support` so that event buffers can be bounded without changing
//! any potential value.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Parameters of the three membrane kernels.
///
/// `eps` and `rho` are alpha kernels `amp * (s/tau) * exp(1 - s/tau)` that
/// peak at exactly `amp` when `s == tau`; `eta` is an exponential decay
/// `-amp * exp(-s/tau)` applied after each somatic spike.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelParams {
    /// PSP rise time constant (ms); `eps` peaks here.
    pub tau_s: f64,
    /// PSP peak amplitude.
    pub eps_amp: f64,
    /// Hyperpolarisation decay constant (ms).
    pub tau_r: f64,
    /// Hyperpolarisation magnitude, applied negatively.
    pub eta_amp: f64,
    /// Calcium-spike response time constant (ms); `rho` peaks here.
    pub tau_ca: f64,
    /// Calcium-spike response amplitude.
    pub rho_amp: f64,
    /// Truncation horizon (ms): every kernel is exactly zero past this.
    pub support: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            tau_s: 5.0,
            eps_amp: 1.0,
            tau_r: 5.0,
            eta_amp: 3.5,
            tau_ca: 10.0,
            rho_amp: 1.5,
            support: 80.0,
        }
    }
}

impl KernelParams {
    /// Checks the parameter invariants: positive time constants,
    /// nonnegative amplitudes, and `support >= 5 * tau` for every kernel.
    pub fn validate(&self) -> Result<()> {
        let taus = [
            ("kernels.tau_s", self.tau_s),
            ("kernels.tau_r", self.tau_r),
            ("kernels.tau_ca", self.tau_ca),
        ];
        for (name, tau) in taus {
            if !(tau > 0.0) {
                return Err(Error::InvalidParameter {
                    field: name.into(),
                    reason: format!("time constant must be > 0, got {tau}"),
                });
            }
            if self.support < 5.0 * tau {
                return Err(Error::InvalidParameter {
                    field: "kernels.support".into(),
                    reason: format!(
                        "support {} is below 5 * {name} = {}",
                        self.support,
                        5.0 * tau
                    ),
                });
            }
        }
        for (name, amp) in [
            ("kernels.eps_amp", self.eps_amp),
            ("kernels.eta_amp", self.eta_amp),
            ("kernels.rho_amp", self.rho_amp),
        ] {
            if !(amp >= 0.0) {
                return Err(Error::InvalidParameter {
                    field: name.into(),
                    reason: format!("amplitude must be >= 0, got {amp}"),
                });
            }
        }
        Ok(())
    }
}

/// Parameters of the linear plasticity windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StdpWindowParams {
    /// Potentiation peak, in (0, 1].
    pub a_plus: f64,
    /// Potentiation window width (ms).
    pub tau_plus: f64,
    /// Depression peak, in (0, 1].
    pub a_minus: f64,
    /// Depression window width (ms).
    pub tau_minus: f64,
}

impl Default for StdpWindowParams {
    fn default() -> Self {
        Self {
            a_plus: 0.06,
            tau_plus: 20.0,
            a_minus: 0.12,
            tau_minus: 20.0,
        }
    }
}

impl StdpWindowParams {
    pub fn validate(&self) -> Result<()> {
        for (name, tau) in [
            ("stdp.tau_plus", self.tau_plus),
            ("stdp.tau_minus", self.tau_minus),
        ] {
            if !(tau > 0.0) {
                return Err(Error::InvalidParameter {
                    field: name.into(),
                    reason: format!("window width must be > 0, got {tau}"),
                });
            }
        }
        for (name, a) in [("stdp.a_plus", self.a_plus), ("stdp.a_minus", self.a_minus)] {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::InvalidParameter {
                    field: name.into(),
                    reason: format!("peak must be in (0, 1], got {a}"),
                });
            }
        }
        Ok(())
    }
}

/// Postsynaptic response kernel: `eps_amp * (s/tau_s) * exp(1 - s/tau_s)`.
///
/// Zero for `s <= 0` and for `s > support`; peaks at `eps_amp` when
/// `s == tau_s`.
pub fn eps(s: f64, p: &KernelParams) -> f64 {
    if s <= 0.0 || s > p.support {
        return 0.0;
    }
    let x = s / p.tau_s;
    p.eps_amp * x * (1.0 - x).exp()
}

/// Hyperpolarisation kernel: `-eta_amp * exp(-s/tau_r)`.
///
/// Zero for `s <= 0` and `s > support`; strictly negative in between
/// (for `eta_amp > 0`).
pub fn eta(s: f64, p: &KernelParams) -> f64 {
    if s <= 0.0 || s > p.support {
        return 0.0;
    }
    -p.eta_amp * (-s / p.tau_r).exp()
}

/// Calcium-spike response kernel: `rho_amp * (s/tau_ca) * exp(1 - s/tau_ca)`.
///
/// Same alpha shape as `eps`; depolarizing, so spikes are facilitated but
/// never forced by it alone when `rho_amp` stays near threshold.
pub fn rho(s: f64, p: &KernelParams) -> f64 {
    if s <= 0.0 || s > p.support {
        return 0.0;
    }
    let x = s / p.tau_ca;
    p.rho_amp * x * (1.0 - x).exp()
}

/// Potentiation window: `a_plus * (1 - dt/tau_plus)` for `0 < dt <= tau_plus`,
/// zero outside. `dt` must be positive; the caller routes by sign.
pub fn omega_plus(dt: f64, w: &StdpWindowParams) -> f64 {
    debug_assert!(dt > 0.0, "omega_plus called with dt = {dt}");
    if dt <= 0.0 || dt > w.tau_plus {
        return 0.0;
    }
    w.a_plus * (1.0 - dt / w.tau_plus)
}

/// Depression window: `-a_minus * (1 + dt/tau_minus)` for
/// `-tau_minus <= dt < 0`, zero outside. `dt` must be negative.
pub fn omega_minus(dt: f64, w: &StdpWindowParams) -> f64 {
    debug_assert!(dt < 0.0, "omega_minus called with dt = {dt}");
    if dt >= 0.0 || dt < -w.tau_minus {
        return 0.0;
    }
    -w.a_minus * (1.0 + dt / w.tau_minus)
}

/// Kernel values precomputed on the 1 ms simulation grid.
///
/// Index is the elapsed time in whole milliseconds; entry `0` is zero by
/// causality. Values are produced by the closed forms above, so a lookup at
/// an integer age is bit-identical to evaluating the kernel directly.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub eps: Vec<f64>,
    pub eta: Vec<f64>,
    pub rho: Vec<f64>,
    /// Horizon in whole ms; ages past this are dropped from buffers.
    pub support_ms: u32,
}

impl KernelTable {
    pub fn new(p: &KernelParams) -> Self {
        let support_ms = p.support.ceil() as u32;
        let n = support_ms as usize + 1;
        let mut table = Self {
            eps: Vec::with_capacity(n),
            eta: Vec::with_capacity(n),
            rho: Vec::with_capacity(n),
            support_ms,
        };
        for s in 0..n {
            let s = s as f64;
            table.eps.push(eps(s, p));
            table.eta.push(eta(s, p));
            table.rho.push(rho(s, p));
        }
        table
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn defaults() -> KernelParams {
        KernelParams::default()
    }

    #[test]
    fn eps_is_causal_and_peaks_at_tau() {
        let p = KernelParams {
            eps_amp: 1.0,
            ..defaults()
        };
        assert_eq!(eps(0.0, &p), 0.0);
        assert_eq!(eps(-3.0, &p), 0.0);
        assert_eq!(eps(p.tau_s, &p), 1.0);
        // closed form at s = 2 tau: 2 * exp(-1)
        let expected = 2.0 * (-1.0f64).exp();
        assert!((eps(2.0 * p.tau_s, &p) - expected).abs() < 1e-15);
        assert!((expected - 0.7358).abs() < 1e-4);
    }

    #[test]
    fn eta_decays_from_negative_peak() {
        let p = KernelParams {
            eta_amp: 5.0,
            tau_r: 5.0,
            ..defaults()
        };
        assert_eq!(eta(0.0, &p), 0.0);
        assert_eq!(eta(p.support + 1.0, &p), 0.0);
        let expected = -5.0 * (-1.0f64).exp();
        assert!((eta(p.tau_r, &p) - expected).abs() < 1e-15);
        assert!((expected + 1.839).abs() < 1e-3);
    }

    #[test]
    fn rho_matches_closed_form() {
        let p = KernelParams {
            rho_amp: 0.6,
            tau_ca: 10.0,
            support: 80.0,
            ..defaults()
        };
        assert_eq!(rho(0.0, &p), 0.0);
        assert_eq!(rho(p.tau_ca, &p), 0.6);
        let expected = 0.6 * 3.0 * (-2.0f64).exp();
        assert!((rho(3.0 * p.tau_ca, &p) - expected).abs() < 1e-15);
        assert!((expected - 0.2436).abs() < 1e-4);
    }

    #[test]
    fn stdp_windows_are_linear_and_truncated() {
        let w = StdpWindowParams {
            a_plus: 0.1,
            tau_plus: 20.0,
            a_minus: 0.12,
            tau_minus: 20.0,
        };
        assert_eq!(omega_plus(w.tau_plus, &w), 0.0);
        assert_eq!(omega_plus(2.0 * w.tau_plus, &w), 0.0);
        assert!((omega_plus(w.tau_plus / 2.0, &w) - 0.05).abs() < 1e-15);
        assert_eq!(omega_minus(-w.tau_minus, &w), 0.0);
        assert_eq!(omega_minus(-2.0 * w.tau_minus, &w), 0.0);
        assert!((omega_minus(-w.tau_minus / 2.0, &w) + 0.06).abs() < 1e-15);
    }

    #[test]
    fn table_matches_closed_forms_on_the_grid() {
        let p = defaults();
        let t = KernelTable::new(&p);
        assert_eq!(t.eps.len(), t.support_ms as usize + 1);
        for s in 0..=t.support_ms {
            let sf = s as f64;
            // bit-identical, not just close: the engine relies on this
            assert_eq!(t.eps[s as usize], eps(sf, &p));
            assert_eq!(t.eta[s as usize], eta(sf, &p));
            assert_eq!(t.rho[s as usize], rho(sf, &p));
        }
    }

    #[test]
    fn truncation_is_small_at_support_for_defaults() {
        let p = defaults();
        assert!(eps(p.support, &p).abs() < 1e-2 * p.eps_amp);
        assert!(eta(p.support, &p).abs() < 1e-2 * p.eta_amp);
        assert!(rho(p.support, &p).abs() < 1e-2 * p.rho_amp);
    }

    #[test]
    fn validate_rejects_bad_params() {
        let mut p = defaults();
        p.tau_s = 0.0;
        assert!(p.validate().is_err());
        let mut p = defaults();
        p.support = 4.0 * p.tau_s;
        assert!(p.validate().is_err());
        let mut w = StdpWindowParams::default();
        w.a_plus = 0.0;
        assert!(w.validate().is_err());
        w = StdpWindowParams::default();
        w.a_minus = 1.5;
        assert!(w.validate().is_err());
        assert!(defaults().validate().is_ok());
        assert!(StdpWindowParams::default().validate().is_ok());
    }

    proptest! {
        #[test]
        fn kernels_are_causal_and_signed(
            s in -100.0f64..200.0,
            tau_s in 0.5f64..12.0,
            tau_r in 0.5f64..12.0,
            tau_ca in 0.5f64..12.0,
            eps_amp in 0.0f64..4.0,
            eta_amp in 0.0f64..8.0,
            rho_amp in 0.0f64..4.0,
        ) {
            let p = KernelParams {
                tau_s, eps_amp, tau_r, eta_amp, tau_ca, rho_amp,
                support: 60.0,
            };
            if s <= 0.0 {
                prop_assert_eq!(eps(s, &p), 0.0);
                prop_assert_eq!(eta(s, &p), 0.0);
                prop_assert_eq!(rho(s, &p), 0.0);
            }
            prop_assert!(eps(s, &p) >= 0.0);
            prop_assert!(rho(s, &p) >= 0.0);
            prop_assert!(eta(s, &p) <= 0.0);
        }

        #[test]
        fn windows_are_bounded(
            dt in -100.0f64..100.0,
            a_plus in 1e-6f64..1.0,
            a_minus in 1e-6f64..1.0,
            tau_plus in 1.0f64..50.0,
            tau_minus in 1.0f64..50.0,
        ) {
            let w = StdpWindowParams { a_plus, tau_plus, a_minus, tau_minus };
            let bound = a_plus.max(a_minus);
            if dt > 0.0 {
                let v = omega_plus(dt, &w);
                prop_assert!(v >= 0.0 && v <= bound);
            } else if dt < 0.0 {
                let v = omega_minus(dt, &w);
                prop_assert!(v <= 0.0 && -v <= bound);
            }
        }
    }
}
