//! Template-correlation analysis of run outputs.
//!
//! Two output matrices are compared by the Pearson correlation of their
//! flattened binary entries, a coefficient in `[-1, 1]` measuring how much
//! the two activity patterns overlap. On binary data the coefficient
//! reduces to exact integer counts, which makes self-correlation exactly
//! `1.0` and complement pairs exactly `-1.0`; a naive two-pass Pearson kept
//! in the test suite guards the algebra.
//!
//! From per-run outputs the module derives the learning curve (mean
//! correlation of each learning-phase output against the learned template)
//! and the discrimination statistics of the recall phase (same-template
//! versus different-template correlations, with a Welch t statistic and a
//! one-way F statistic across stimuli as descriptive outputs; no p-values
//! are computed).

use crate::config::Condition;
use crate::engine::{BinaryMatrix, RunRecord};
use crate::stimulus::SET_SIZE;
use crate::{Error, Result};

/// A correlation coefficient plus the flag marking zero-variance inputs
/// (all-zero or all-one matrices), which are assigned coefficient 0 so that
/// aggregation stays total while pathological runs remain visible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemplateCorrelation {
    pub value: f64,
    pub degenerate: bool,
}

/// Pearson correlation of two equal-shape binary matrices.
pub fn template_correlation(a: &BinaryMatrix, b: &BinaryMatrix) -> Result<TemplateCorrelation> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let n = (a.rows() * a.cols()) as u64;
    let mut ones_a = 0u64;
    let mut ones_b = 0u64;
    let mut ones_both = 0u64;
    for (&x, &y) in a.as_bytes().iter().zip(b.as_bytes()) {
        ones_a += x as u64;
        ones_b += y as u64;
        ones_both += (x & y) as u64;
    }
    // var terms n*sum - sum^2 = ones*(n - ones); all products stay well
    // below 2^53, so the arithmetic below is exact
    let var_a = ones_a * (n - ones_a);
    let var_b = ones_b * (n - ones_b);
    if var_a == 0 || var_b == 0 {
        return Ok(TemplateCorrelation {
            value: 0.0,
            degenerate: true,
        });
    }
    let numerator = n as i128 * ones_both as i128 - ones_a as i128 * ones_b as i128;
    let value = numerator as f64 / ((var_a * var_b) as f64).sqrt();
    Ok(TemplateCorrelation {
        value,
        degenerate: false,
    })
}

/// Mean, sample standard deviation, and count of one sample set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

pub fn stats(samples: &[f64]) -> Stats {
    let n = samples.len();
    if n == 0 {
        return Stats {
            mean: 0.0,
            std: 0.0,
            n,
        };
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let std = if n < 2 {
        0.0
    } else {
        (samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Stats { mean, std, n }
}

/// Welch's t statistic for the difference of two sample means. When both
/// variances vanish the statistic is 0 for equal means and signed infinity
/// otherwise.
pub fn welch_t(a: &[f64], b: &[f64]) -> f64 {
    let sa = stats(a);
    let sb = stats(b);
    let se = (sa.std * sa.std / sa.n as f64 + sb.std * sb.std / sb.n as f64).sqrt();
    let diff = sa.mean - sb.mean;
    if se == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    } else {
        diff / se
    }
}

/// One-way ANOVA F statistic across groups (descriptive only).
pub fn anova_f(groups: &[Vec<f64>]) -> f64 {
    let k = groups.len();
    let total_n: usize = groups.iter().map(|g| g.len()).sum();
    if k < 2 || total_n <= k {
        return 0.0;
    }
    let grand_mean =
        groups.iter().flatten().sum::<f64>() / total_n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        if g.is_empty() {
            continue;
        }
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ss_between += g.len() as f64 * (m - grand_mean) * (m - grand_mean);
        ss_within += g.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    }
    let ms_between = ss_between / (k - 1) as f64;
    let ms_within = ss_within / (total_n - k) as f64;
    if ms_within == 0.0 {
        if ms_between == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        ms_between / ms_within
    }
}

/// One learning-curve point: correlation of the step-`p` outputs with the
/// learned templates, aggregated over stimuli and seeds of one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub condition: Condition,
    pub p: u32,
    pub stats: Stats,
    pub degenerate: usize,
}

/// Discrimination summary of one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminationRow {
    pub condition: Condition,
    pub same: Stats,
    pub different: Stats,
    pub welch_t: f64,
    /// F statistic of the same-case correlations grouped by stimulus.
    pub anova_f: f64,
    pub degenerate: usize,
}

/// The full analysis product.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub curve: Vec<CurvePoint>,
    pub discrimination: Vec<DiscriminationRow>,
}

fn conditions_in_order(records: &[RunRecord]) -> Vec<Condition> {
    let mut out = Vec::new();
    for r in records {
        if !out.contains(&r.condition) {
            out.push(r.condition);
        }
    }
    out
}

fn require_output<'a>(record: &'a RunRecord, stimulus: usize, p: u32) -> Result<&'a BinaryMatrix> {
    record
        .output(stimulus, p)
        .map(|o| &o.matrix)
        .ok_or_else(|| Error::MalformedArtifact {
            path: format!("run seed {} {}", record.seed, record.condition.label()),
            reason: format!("missing output for stimulus {stimulus} at presentation {p}"),
        })
}

/// Learning curve c(p), p = 1..9: the mean correlation of `o_l(p)` with the
/// learned activity `k_l = o_l(10)`, per condition.
pub fn learning_curve(records: &[RunRecord]) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::new();
    for condition in conditions_in_order(records) {
        for p in 1..=9u32 {
            let mut samples = Vec::new();
            let mut degenerate = 0;
            for record in records.iter().filter(|r| r.condition == condition) {
                for l in 1..=SET_SIZE {
                    let learned = require_output(record, l, 10)?;
                    let output = require_output(record, l, p)?;
                    let c = template_correlation(output, learned)?;
                    if c.degenerate {
                        degenerate += 1;
                    }
                    samples.push(c.value);
                }
            }
            out.push(CurvePoint {
                condition,
                p,
                stats: stats(&samples),
                degenerate,
            });
        }
    }
    Ok(out)
}

/// Recall-phase statistics: correlations of the phase-2 outputs with the
/// learned templates, split into the same-stimulus and different-stimulus
/// cases, per condition.
pub fn discrimination_stats(records: &[RunRecord]) -> Result<Vec<DiscriminationRow>> {
    let mut out = Vec::new();
    for condition in conditions_in_order(records) {
        let mut same = Vec::new();
        let mut same_by_stimulus: Vec<Vec<f64>> = vec![Vec::new(); SET_SIZE];
        let mut different = Vec::new();
        let mut degenerate = 0;
        for record in records.iter().filter(|r| r.condition == condition) {
            for l in 1..=SET_SIZE {
                for p in 11..=20u32 {
                    let output = require_output(record, l, p)?;
                    for m in 1..=SET_SIZE {
                        let template = require_output(record, m, 10)?;
                        let c = template_correlation(template, output)?;
                        if c.degenerate {
                            degenerate += 1;
                        }
                        if m == l {
                            same.push(c.value);
                            same_by_stimulus[l - 1].push(c.value);
                        } else {
                            different.push(c.value);
                        }
                    }
                }
            }
        }
        out.push(DiscriminationRow {
            condition,
            welch_t: welch_t(&same, &different),
            anova_f: anova_f(&same_by_stimulus),
            same: stats(&same),
            different: stats(&different),
            degenerate,
        });
    }
    Ok(out)
}

/// Runs both analyses.
pub fn analyze(records: &[RunRecord]) -> Result<CorrelationReport> {
    Ok(CorrelationReport {
        curve: learning_curve(records)?,
        discrimination: discrimination_stats(records)?,
    })
}

impl CorrelationReport {
    /// `curve.csv`: `condition,p,mean,std,n`.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("condition,p,mean,std,n\n");
        for point in &self.curve {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                point.condition.label(),
                point.p,
                point.stats.mean,
                point.stats.std,
                point.stats.n
            ));
        }
        out
    }

    /// `discrimination.csv`: `condition,case,mean,std,n,t_stat`.
    pub fn discrimination_csv(&self) -> String {
        let mut out = String::from("condition,case,mean,std,n,t_stat\n");
        for row in &self.discrimination {
            for (case, s) in [("same", &row.same), ("different", &row.different)] {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    row.condition.label(),
                    case,
                    s.mean,
                    s.std,
                    s.n,
                    row.welch_t
                ));
            }
        }
        out
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for condition in self.discrimination.iter().map(|r| r.condition) {
            out.push_str(&format!("condition: {}\n", condition.label()));
            out.push_str("  learning curve c(p) = corr(o_l(p), k_l), mean +- std\n");
            for point in self.curve.iter().filter(|p| p.condition == condition) {
                out.push_str(&format!(
                    "    p={}  {:.4} +- {:.4}  (n={}{})\n",
                    point.p,
                    point.stats.mean,
                    point.stats.std,
                    point.stats.n,
                    if point.degenerate > 0 {
                        format!(", degenerate={}", point.degenerate)
                    } else {
                        String::new()
                    }
                ));
            }
            if let Some(row) = self
                .discrimination
                .iter()
                .find(|r| r.condition == condition)
            {
                out.push_str(&format!(
                    "  discrimination: same {:.4} +- {:.4} (n={}), different {:.4} +- {:.4} (n={})\n",
                    row.same.mean, row.same.std, row.same.n,
                    row.different.mean, row.different.std, row.different.n
                ));
                out.push_str(&format!(
                    "  welch t = {:.3}, anova F across stimuli = {:.3}{}\n",
                    row.welch_t,
                    row.anova_f,
                    if row.degenerate > 0 {
                        format!(", degenerate={}", row.degenerate)
                    } else {
                        String::new()
                    }
                ));
            }
        }
        out
    }
}
