//! Experiment orchestration and file artifacts.
//!
//! A `run` materializes the full experiment under one output directory:
//!
//! ```text
//! out/
//!   config.toml                    resolved configuration echo
//!   runs/seed<N>_<condition>/
//!     outputs.txt                  all 200 output matrices, row-major 0/1 text
//!     raster.csv                   t_ms,layer,neuron,event  (event: na|ca|inh)
//!     weights_t<T>.txt             snapshots at t = 0, 10000, 20000
//!     schedule.csv                 presentation order (when replay logging is on)
//!   reports/
//!     curve.csv                    condition,p,mean,std,n
//!     discrimination.csv           condition,case,mean,std,n,t_stat
//!     summary.txt                  human-readable digest
//! ```
//!
//! Every artifact carries the configuration hash and the seed in `#` header
//! lines; `analyze` recomputes the reports from stored outputs and refuses
//! directories whose hashes disagree. Runs are independent and execute in
//! parallel; artifacts and reports are written in a fixed order, so two
//! executions with the same configuration produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analysis::{analyze, CorrelationReport};
use crate::config::{Condition, ExperimentConfig};
use crate::engine::{run_one, BinaryMatrix, OutputPattern, RunRecord};
use crate::network::WeightMatrix;
use crate::stimulus::{protocol_schedule, schedule_csv, PRESENTATION_MS};
use crate::{Error, Result};

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io {
        context: format!("writing {}", path.display()),
        source: e,
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        context: format!("reading {}", path.display()),
        source: e,
    })
}

fn header(hash: &str, seed: u64, condition: Condition) -> String {
    format!(
        "# config_hash: {hash}\n# seed: {seed}\n# condition: {}\n",
        condition.label()
    )
}

pub fn run_dir_name(seed: u64, condition: Condition) -> String {
    format!("seed{}_{}", seed, condition.label())
}

fn outputs_text(record: &RunRecord, hash: &str) -> String {
    let mut out = String::from("# spiking-bam outputs v1\n");
    out.push_str(&header(hash, record.seed, record.condition));
    out.push_str(&format!("# matrices: {}\n", record.outputs.len()));
    for (entry, output) in record.schedule.iter().zip(&record.outputs) {
        out.push_str(&format!(
            "# presentation p={} l={} t0={}\n",
            output.presentation, output.stimulus, entry.t0
        ));
        for row in 0..output.matrix.rows() {
            for col in 0..output.matrix.cols() {
                out.push(if output.matrix.get(row, col) { '1' } else { '0' });
            }
            out.push('\n');
        }
    }
    out
}

fn raster_csv(record: &RunRecord, hash: &str) -> String {
    let mut out = header(hash, record.seed, record.condition);
    out.push_str("t_ms,layer,neuron,event\n");
    for ev in &record.raster {
        out.push_str(&format!(
            "{},{},{},{}\n",
            ev.t,
            ev.layer.label(),
            ev.neuron,
            ev.kind.label()
        ));
    }
    out
}

fn weights_text(snapshot: &WeightMatrix, t: u32, record: &RunRecord, hash: &str) -> String {
    let mut out = header(hash, record.seed, record.condition);
    out.push_str(&format!("# t: {t}\n"));
    out.push_str("pre_id post_id site kind weight\n");
    out.push_str(&snapshot.to_table());
    out
}

/// Writes all artifacts of one run below `dir`.
pub fn write_run_artifacts(dir: &Path, record: &RunRecord, hash: &str, replay_log: bool) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        context: format!("creating {}", dir.display()),
        source: e,
    })?;
    write(&dir.join("outputs.txt"), &outputs_text(record, hash))?;
    write(&dir.join("raster.csv"), &raster_csv(record, hash))?;
    for (t, snapshot) in &record.snapshots {
        write(
            &dir.join(format!("weights_t{t}.txt")),
            &weights_text(snapshot, *t, record, hash),
        )?;
    }
    if replay_log {
        let mut text = header(hash, record.seed, record.condition);
        text.push_str(&schedule_csv(&record.schedule));
        write(&dir.join("schedule.csv"), &text)?;
    }
    Ok(())
}

fn write_reports(dir: &Path, report: &CorrelationReport, cfg: &ExperimentConfig, hash: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        context: format!("creating {}", dir.display()),
        source: e,
    })?;
    let seeds = cfg
        .experiment
        .seeds
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let stamp = format!("# config_hash: {hash}\n# seeds: {seeds}\n");
    write(&dir.join("curve.csv"), &format!("{stamp}{}", report.curve_csv()))?;
    write(
        &dir.join("discrimination.csv"),
        &format!("{stamp}{}", report.discrimination_csv()),
    )?;
    write(&dir.join("summary.txt"), &format!("{stamp}{}", report.summary()))?;
    Ok(())
}

/// Everything `run` produces, with the records still in memory.
pub struct ExperimentOutcome {
    pub records: Vec<RunRecord>,
    pub report: CorrelationReport,
    pub out_dir: PathBuf,
}

/// Runs the configured experiment, writes every artifact, and returns the
/// records and reports.
pub fn run_experiment_to_dir(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let out_dir = PathBuf::from(&cfg.experiment.out_dir);
    fs::create_dir_all(&out_dir).map_err(|e| Error::Io {
        context: format!("creating {}", out_dir.display()),
        source: e,
    })?;
    let hash = cfg.hash();
    write(&out_dir.join("config.toml"), &cfg.to_toml())?;

    let set = crate::engine::load_patterns(cfg)?;
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

    let records: Vec<RunRecord> = plan
        .par_iter()
        .map(|&(seed, condition)| -> Result<RunRecord> {
            let record = run_one(cfg, &set, seed, condition)?;
            let dir = out_dir.join("runs").join(run_dir_name(seed, condition));
            write_run_artifacts(&dir, &record, &hash, cfg.experiment.replay_log)?;
            Ok(record)
        })
        .collect::<Result<Vec<_>>>()?;

    let report = analyze(&records)?;
    write_reports(&out_dir.join("reports"), &report, cfg, &hash)?;

    Ok(ExperimentOutcome {
        records,
        report,
        out_dir,
    })
}

/// Runs a single `(seed, condition)` pair and writes its artifacts.
pub fn simulate_to_dir(cfg: &ExperimentConfig, seed: u64, condition: Condition) -> Result<PathBuf> {
    cfg.validate()?;
    let out_dir = PathBuf::from(&cfg.experiment.out_dir);
    let hash = cfg.hash();
    let set = crate::engine::load_patterns(cfg)?;
    let record = run_one(cfg, &set, seed, condition)?;
    let dir = out_dir.join("runs").join(run_dir_name(seed, condition));
    write_run_artifacts(&dir, &record, &hash, cfg.experiment.replay_log)?;
    Ok(dir)
}

fn parse_header_value(text: &str, key: &str, path: &Path) -> Result<String> {
    let prefix = format!("# {key}: ");
    text.lines()
        .take(8)
        .find_map(|l| l.strip_prefix(&prefix))
        .map(str::to_string)
        .ok_or_else(|| Error::MalformedArtifact {
            path: path.display().to_string(),
            reason: format!("missing '# {key}:' header"),
        })
}

/// Reads one `outputs.txt` back into a record carrying only what analysis
/// needs (outputs, seed, condition); raster and snapshots stay on disk.
pub fn read_outputs_file(path: &Path, expected_hash: &str) -> Result<RunRecord> {
    let text = read(path)?;
    let hash = parse_header_value(&text, "config_hash", path)?;
    if hash != expected_hash {
        return Err(Error::ConfigMismatch(format!(
            "{} was produced under config {}, expected {}",
            path.display(),
            &hash[..12.min(hash.len())],
            &expected_hash[..12]
        )));
    }
    let seed: u64 = parse_header_value(&text, "seed", path)?
        .parse()
        .map_err(|_| Error::MalformedArtifact {
            path: path.display().to_string(),
            reason: "unparsable seed".into(),
        })?;
    let condition = match parse_header_value(&text, "condition", path)?.as_str() {
        "topdown" => Condition::TopDown,
        "no-topdown" => Condition::NoTopDown,
        other => {
            return Err(Error::MalformedArtifact {
                path: path.display().to_string(),
                reason: format!("unknown condition '{other}'"),
            })
        }
    };

    let mut outputs = Vec::new();
    let mut lines = text.lines().peekable();
    while let Some(line) = lines.next() {
        let Some(rest) = line.strip_prefix("# presentation ") else {
            continue;
        };
        let mut p = None;
        let mut l = None;
        for field in rest.split_whitespace() {
            if let Some(v) = field.strip_prefix("p=") {
                p = v.parse::<u32>().ok();
            } else if let Some(v) = field.strip_prefix("l=") {
                l = v.parse::<usize>().ok();
            }
        }
        let (Some(p), Some(l)) = (p, l) else {
            return Err(Error::MalformedArtifact {
                path: path.display().to_string(),
                reason: format!("bad presentation header '{line}'"),
            });
        };
        let mut rows: Vec<&str> = Vec::new();
        while let Some(next) = lines.peek() {
            if next.starts_with('#') || next.is_empty() {
                break;
            }
            rows.push(lines.next().unwrap());
        }
        if rows.is_empty() {
            return Err(Error::MalformedArtifact {
                path: path.display().to_string(),
                reason: format!("presentation p={p} l={l} has no matrix rows"),
            });
        }
        let cols = rows[0].len();
        let mut matrix = BinaryMatrix::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::MalformedArtifact {
                    path: path.display().to_string(),
                    reason: format!("ragged matrix at presentation p={p} l={l}"),
                });
            }
            for (c, ch) in row.chars().enumerate() {
                match ch {
                    '1' => matrix.set(r, c, true),
                    '0' => {}
                    other => {
                        return Err(Error::MalformedArtifact {
                            path: path.display().to_string(),
                            reason: format!("invalid matrix character '{other}'"),
                        })
                    }
                }
            }
        }
        outputs.push(OutputPattern {
            stimulus: l,
            presentation: p,
            matrix,
        });
    }

    Ok(RunRecord {
        seed,
        condition,
        schedule: protocol_schedule(seed),
        outputs,
        raster: Vec::new(),
        snapshots: Vec::new(),
    })
}

/// Recomputes the reports from the stored outputs of a `run` directory and
/// rewrites them; returns the report. Inputs whose config hashes disagree
/// with the directory's `config.toml` are refused.
pub fn analyze_dir(out_dir: &Path) -> Result<CorrelationReport> {
    let cfg = ExperimentConfig::load(&out_dir.join("config.toml"))?;
    let hash = cfg.hash();
    let mut records = Vec::new();
    for &seed in &cfg.experiment.seeds {
        for &condition in &cfg.experiment.conditions {
            let path = out_dir
                .join("runs")
                .join(run_dir_name(seed, condition))
                .join("outputs.txt");
            records.push(read_outputs_file(&path, &hash)?);
        }
    }
    let report = analyze(&records)?;
    write_reports(&out_dir.join("reports"), &report, &cfg, &hash)?;
    Ok(report)
}

/// Mean associative rate over presentations (Hz per neuron), averaged over
/// the records; the sanity band for the committed defaults is `[1, 200]`.
pub fn mean_rate_hz(records: &[RunRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().map(|r| r.mean_associative_rate_hz()).sum::<f64>() / records.len() as f64
}

/// Presentation count sanity: every record should carry one output pattern
/// per 100 ms of protocol.
pub fn presentations_complete(records: &[RunRecord]) -> bool {
    records
        .iter()
        .all(|r| r.outputs.len() as u32 == crate::stimulus::PROTOCOL_MS / PRESENTATION_MS)
}
