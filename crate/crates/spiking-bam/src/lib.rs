//! A deterministic discrete-time simulator of a three-layer spiking
//! bidirectional associative memory.
//!
//! Two perceptive layers receive bimodal glyph stimuli as forced spikes and
//! feed an associative layer through dense plastic synapses; the associative
//! layer projects back onto the distal dendritic sites of the perceptive
//! pyramidal neurons, where coincidence with backpropagated somatic spikes
//! can trigger calcium spikes that facilitate further firing (top-down
//! modulation). All connections adapt online through a multiplicative
//! nearest-spike STDP rule. The analysis side condenses associative output
//! into 100x100 binary spike matrices and compares them by template
//! (Pearson) correlation, producing learning curves and same-versus-different
//! discrimination statistics.
//!
//! The crate is organized around the simulation pipeline:
//!
//! * [`kernels`] - membrane response kernels and STDP windows;
//! * [`neuron`] - two-site pyramidal dynamics and interneurons;
//! * [`plasticity`] - the multiplicative STDP rule on bounded weights;
//! * [`network`] - the seeded three-layer topology;
//! * [`stimulus`] - glyph patterns, injection schedules, and the two-phase
//!   protocol;
//! * [`engine`] - the 1 ms simulation loop and run records;
//! * [`oracle`] - a naive full-history reference simulator used to verify
//!   the engine on hand-built microcircuits;
//! * [`analysis`] - template correlation, learning curves, discrimination
//!   statistics;
//! * [`config`] / [`experiment`] - experiment configuration, orchestration,
//!   and file artifacts.
//!
//! Start with the runnable examples (`cargo run --example full_experiment`)
//! or the `spiking-bam` binary, which wraps the same library calls.

pub mod analysis;
pub mod config;
pub mod engine;
pub mod experiment;
pub mod kernels;
pub mod network;
pub mod neuron;
pub mod oracle;
pub mod plasticity;
pub mod stimulus;

use thiserror::Error as ThisError;

/// Crate-wide error type.
#[derive(Debug, ThisError)]
pub enum Error {
    #[error("invalid parameter {field}: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("pattern format error at line {line}: {reason}")]
    PatternFormat { line: usize, reason: String },

    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed artifact {path}: {reason}")]
    MalformedArtifact { path: String, reason: String },

    #[error("config hash mismatch: {0}")]
    ConfigMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
