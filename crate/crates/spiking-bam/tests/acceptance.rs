//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line with the measured values.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see every
//! line. The learning/discrimination criteria share one full experiment
//! (5 seeds x 2 conditions, 20 s simulated each) computed once.

use std::time::{Duration, Instant};

use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spiking_bam::analysis::{self, CorrelationReport};
use spiking_bam::config::{Condition, ExperimentConfig};
use spiking_bam::engine::{self, BinaryMatrix, RunRecord};
use spiking_bam::kernels::StdpWindowParams;
use spiking_bam::oracle;
use spiking_bam::plasticity::{on_post_spike, on_pre_spike, InhibitoryStdp, Synapse, SynapseKind, TargetSite};

struct Experiment {
    records: Vec<RunRecord>,
    report: CorrelationReport,
    elapsed: Duration,
}

static EXPERIMENT: Lazy<Experiment> = Lazy::new(|| {
    let cfg = ExperimentConfig::default();
    let started = Instant::now();
    let records = engine::run_experiment(&cfg).expect("experiment runs");
    let elapsed = started.elapsed();
    let report = analysis::analyze(&records).expect("analysis succeeds");
    Experiment {
        records,
        report,
        elapsed,
    }
});

fn curve_value(report: &CorrelationReport, condition: Condition, p: u32) -> f64 {
    report
        .curve
        .iter()
        .find(|point| point.condition == condition && point.p == p)
        .expect("curve point")
        .stats
        .mean
}

fn discrimination(report: &CorrelationReport, condition: Condition) -> (f64, f64, f64) {
    let row = report
        .discrimination
        .iter()
        .find(|r| r.condition == condition)
        .expect("discrimination row");
    (row.same.mean, row.different.mean, row.welch_t)
}

#[test]
fn criterion_1_stdp_bound_suite() {
    let started = Instant::now();
    let windows = StdpWindowParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0CD);
    for &(kind, lo, hi) in &[
        (SynapseKind::Excitatory, 0.0f64, 1.0f64),
        (SynapseKind::Inhibitory, -1.0, 0.0),
    ] {
        for mode in [InhibitoryStdp::Magnitude, InhibitoryStdp::Signed] {
            let w0 = rng.gen_range(lo..=hi);
            let mut synapse = Synapse::new(0, 1, w0, kind, TargetSite::Basal);
            let mut t = 0u32;
            for _ in 0..25_000 {
                t += rng.gen_range(1..25);
                if rng.gen_bool(0.5) {
                    on_pre_spike(&mut synapse, t, &windows, mode);
                } else {
                    on_post_spike(&mut synapse, t, &windows, mode);
                }
                assert!(
                    synapse.weight >= lo && synapse.weight <= hi,
                    "weight {} escaped [{lo}, {hi}]",
                    synapse.weight
                );
            }
        }
    }

    // saturation fixed points hold exactly, without clamping effects
    let mut saturated = Synapse::new(0, 1, 1.0, SynapseKind::Excitatory, TargetSite::Basal);
    saturated.last_pre = Some(10);
    on_post_spike(&mut saturated, 15, &windows, InhibitoryStdp::Magnitude);
    assert_eq!(saturated.weight, 1.0);
    let mut empty = Synapse::new(0, 1, 0.0, SynapseKind::Excitatory, TargetSite::Basal);
    empty.last_post = Some(10);
    on_pre_spike(&mut empty, 15, &windows, InhibitoryStdp::Magnitude);
    assert_eq!(empty.weight, 0.0);

    let elapsed = started.elapsed();
    println!(
        "[PASS] criterion 1 (STDP bounds): 100000 random events, zero violations, fixed points exact, {:.3}s",
        elapsed.as_secs_f64()
    );
    assert!(elapsed < Duration::from_secs(1), "bound suite too slow: {elapsed:?}");
}

#[test]
fn criterion_2_engine_matches_reference_simulator() {
    let started = Instant::now();
    let reports = oracle::verify_all_default();
    assert!(reports.len() >= 3);
    for report in &reports {
        assert!(
            report.ok(),
            "[FAIL] criterion 2: {} diverged: {}",
            report.name,
            report.mismatch.clone().unwrap_or_default()
        );
        assert!(report.engine_events > 0, "{} was silent", report.name);
    }
    let elapsed = started.elapsed();
    let compared: u64 = reports.iter().map(|r| r.potentials_compared).sum();
    println!(
        "[PASS] criterion 2 (engine oracle): {} microcircuits x 1000 ms, {} potentials bit-identical, {:.3}s",
        reports.len(),
        compared,
        elapsed.as_secs_f64()
    );
    assert!(elapsed < Duration::from_secs(1), "oracle suite too slow: {elapsed:?}");
}

/// The independent route: plain two-pass Pearson over f64 vectors.
fn naive_pearson(a: &BinaryMatrix, b: &BinaryMatrix) -> f64 {
    let n = (a.rows() * a.cols()) as f64;
    let xs: Vec<f64> = a.as_bytes().iter().map(|&v| v as f64).collect();
    let ys: Vec<f64> = b.as_bytes().iter().map(|&v| v as f64).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    cov / (vx.sqrt() * vy.sqrt())
}

#[test]
fn criterion_3_correlation_matches_naive_pearson() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DE);
    let random = |fill: f64, rng: &mut ChaCha8Rng| {
        let mut m = BinaryMatrix::zeros(100, 100);
        for row in 0..100 {
            for col in 0..100 {
                if rng.gen_bool(fill) {
                    m.set(row, col, true);
                }
            }
        }
        m
    };
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let fill_a = 0.02 + 0.96 * (k as f64 / 1000.0);
        let a = random(fill_a, &mut rng);
        let b = random(1.0 - fill_a, &mut rng);
        let fast = analysis::template_correlation(&a, &b).unwrap().value;
        let naive = naive_pearson(&a, &b);
        worst = worst.max((fast - naive).abs());
        assert!(
            (fast - naive).abs() < 1e-12,
            "pair {k}: fast {fast} vs naive {naive}"
        );

        // self pairs are exactly 1, complement pairs exactly -1
        assert_eq!(analysis::template_correlation(&a, &a).unwrap().value, 1.0);
        let mut complement = BinaryMatrix::zeros(100, 100);
        for row in 0..100 {
            for col in 0..100 {
                complement.set(row, col, !a.get(row, col));
            }
        }
        assert_eq!(
            analysis::template_correlation(&a, &complement).unwrap().value,
            -1.0
        );
    }
    println!(
        "[PASS] criterion 3 (correlation oracle): 1000 pairs within 1e-12 of naive Pearson (worst {worst:.2e}), self = 1.0, complement = -1.0 exactly"
    );
}

#[test]
fn criterion_4_learning_curve_shape() {
    let report = &EXPERIMENT.report;
    for condition in [Condition::TopDown, Condition::NoTopDown] {
        let c1 = curve_value(report, condition, 1);
        let c5 = curve_value(report, condition, 5);
        let c9 = curve_value(report, condition, 9);
        println!(
            "[{}] criterion 4 ({}): c(1)={c1:.3} c(5)={c5:.3} c(9)={c9:.3} (need c9 >= 0.6, c9-c1 >= 0.2, c5 >= 0.8*c9)",
            if c9 >= 0.6 && c9 - c1 >= 0.2 && c5 >= 0.8 * c9 { "PASS" } else { "FAIL" },
            condition.label()
        );
        assert!(c9 >= 0.6, "{}: c(9) = {c9:.3} < 0.6", condition.label());
        assert!(
            c9 - c1 >= 0.2,
            "{}: c(9) - c(1) = {:.3} < 0.2",
            condition.label(),
            c9 - c1
        );
        assert!(
            c5 >= 0.8 * c9,
            "{}: c(5) = {c5:.3} < 0.8 * c(9) = {:.3}",
            condition.label(),
            0.8 * c9
        );
    }
}

#[test]
fn criterion_5_discrimination_ordering() {
    let report = &EXPERIMENT.report;
    for condition in [Condition::TopDown, Condition::NoTopDown] {
        let (same, different, t) = discrimination(report, condition);
        println!(
            "[{}] criterion 5 ({}): same={same:.3} different={different:.3} gap={:.3} welch_t={t:.2} (need gap > 0, t >= 2)",
            if same > different && t >= 2.0 { "PASS" } else { "FAIL" },
            condition.label(),
            same - different
        );
        assert!(
            same - different > 0.0,
            "{}: same {same:.3} not above different {different:.3}",
            condition.label()
        );
        assert!(t >= 2.0, "{}: welch t = {t:.2} < 2.0", condition.label());
    }
}

#[test]
fn criterion_6_topdown_effects() {
    let report = &EXPERIMENT.report;
    let (same_td, diff_td, _) = discrimination(report, Condition::TopDown);
    let (same_ntd, diff_ntd, _) = discrimination(report, Condition::NoTopDown);
    let gap_td = same_td - diff_td;
    let gap_ntd = same_ntd - diff_ntd;
    let ok = same_td >= same_ntd && gap_td <= gap_ntd;
    println!(
        "[{}] criterion 6 (top-down): same {same_td:.3} vs {same_ntd:.3} (need >=), gap {gap_td:.3} vs {gap_ntd:.3} (need <=)",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(
        same_td >= same_ntd,
        "top-down same-correlation {same_td:.3} below no-top-down {same_ntd:.3}"
    );
    assert!(
        gap_td <= gap_ntd,
        "top-down gap {gap_td:.3} above no-top-down {gap_ntd:.3}"
    );
}

#[test]
fn criterion_7_run_determinism() {
    let mut cfg = ExperimentConfig::default();
    cfg.experiment.seeds = vec![1];

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();

    let mut files = Vec::new();
    for (dir, out) in [(&dir_a, "a"), (&dir_b, "b")] {
        let _ = out;
        let mut run_cfg = cfg.clone();
        run_cfg.experiment.out_dir = dir.path().display().to_string();
        spiking_bam::experiment::run_experiment_to_dir(&run_cfg).unwrap();
        let mut listing = Vec::new();
        for entry in walk(dir.path()) {
            listing.push(entry);
        }
        listing.sort();
        files.push(listing);
    }

    let rel = |paths: &[std::path::PathBuf], root: &std::path::Path| -> Vec<String> {
        paths
            .iter()
            .map(|p| p.strip_prefix(root).unwrap().display().to_string())
            .collect()
    };
    let names_a = rel(&files[0], dir_a.path());
    let names_b = rel(&files[1], dir_b.path());
    assert_eq!(names_a, names_b, "artifact sets differ");

    let mut compared = 0;
    for (a, b) in files[0].iter().zip(&files[1]) {
        if a.file_name().unwrap() == "config.toml" {
            // differs intentionally: it embeds the output directory
            continue;
        }
        let bytes_a = std::fs::read(a).unwrap();
        let bytes_b = std::fs::read(b).unwrap();
        assert_eq!(
            bytes_a,
            bytes_b,
            "file {} differs between identical runs",
            a.display()
        );
        compared += 1;
    }
    println!(
        "[PASS] criterion 7 (determinism): two executions produced {compared} byte-identical artifacts (rasters, weights, outputs, reports)"
    );
}

fn walk(root: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path);
            }
        }
    }
    out
}

#[test]
fn criterion_8_desk_scale_runtime() {
    let experiment = &EXPERIMENT;
    assert_eq!(experiment.records.len(), 10, "expected 5 seeds x 2 conditions");
    let elapsed = experiment.elapsed;
    println!(
        "[{}] criterion 8 (runtime): full experiment (10 runs x 20 s simulated) in {:.1}s (budget 300s)",
        if elapsed < Duration::from_secs(300) { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(
        elapsed < Duration::from_secs(300),
        "experiment took {elapsed:?}, budget is 5 minutes"
    );
}

#[test]
fn supporting_invariants_on_the_full_experiment() {
    let experiment = &EXPERIMENT;
    // every presentation recorded, and matrices agree with the rasters
    assert!(spiking_bam::experiment::presentations_complete(&experiment.records));
    for record in &experiment.records {
        assert!(
            engine::output_conservation_holds(record),
            "output matrices disagree with the raster for seed {} {}",
            record.seed,
            record.condition.label()
        );
    }
    // activity stays in the sanity band: neither silent nor saturated
    let rate = spiking_bam::experiment::mean_rate_hz(&experiment.records);
    assert!(
        (1.0..=200.0).contains(&rate),
        "mean associative rate {rate:.1} Hz outside [1, 200]"
    );
    // paired seeds start from identical weights in both conditions
    for record in &experiment.records {
        let initial = &record.snapshots[0].1;
        let partner = experiment
            .records
            .iter()
            .find(|r| r.seed == record.seed && r.condition != record.condition)
            .expect("paired run");
        assert_eq!(
            initial.entries.len(),
            partner.snapshots[0].1.entries.len()
        );
        for (a, b) in initial.entries.iter().zip(&partner.snapshots[0].1.entries) {
            assert_eq!(a.weight, b.weight, "paired seeds diverge at initialization");
        }
    }
    println!(
        "[PASS] invariants: 200 presentations/run, output conservation, mean rate {rate:.1} Hz in [1, 200], paired-seed initialization"
    );
}
