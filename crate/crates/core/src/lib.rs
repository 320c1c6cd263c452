//! Sequence-only prediction of host-pathogen protein-protein interactions.
//!
//! The pipeline: parse and sanitize FASTA ([`seqio`]), build conjoint-triad
//! pair features ([`features`]), align viral proteins into a dissimilarity
//! matrix ([`alignment`]), draw random or dissimilarity-filtered negatives
//! with confidence weights ([`sampling`]), train an RBF SVM with per-example
//! box constraints ([`svm`]) and evaluate it with leave-one-group-out
//! cross-validation ([`eval`]).

pub mod alignment;
pub mod cli;
pub mod error;
pub mod eval;
pub mod features;
pub mod pipeline;
pub mod sampling;
pub mod seqio;
pub mod serve;
pub mod svm;
pub mod synth;

pub use error::{Error, Result};
