use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty FASTA input")]
    EmptyFasta,
    #[error("line {line}: data before header")]
    DataBeforeHeader { line: usize },
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("record {0}: no canonical residues")]
    NoCanonicalResidues(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unresolved {role} id {id}")]
    UnresolvedId { role: &'static str, id: String },
    #[error("inconsistent group for {0}")]
    InconsistentGroup(String),

    #[error("residue {0:?} outside the canonical alphabet")]
    NonCanonicalResidue(char),
    #[error("expected length {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("empty sequence passed to aligner")]
    EmptySequence,
    #[error("non-positive self-alignment score for {0}")]
    NonPositiveSelfScore(String),
    #[error("virus {0} missing from dissimilarity matrix")]
    MissingFromMatrix(String),

    #[error("requested {requested} negatives but only {available} candidates exist")]
    NotEnoughCandidates { requested: usize, available: usize },
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training data must contain both classes")]
    SingleClass,
    #[error("invalid training problem: {0}")]
    InvalidProblem(String),
    #[error("solver stopped after {0} iterations without converging")]
    NotConverged(usize),
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("model version {found} not supported (reader is version {supported})")]
    ModelVersion { found: String, supported: u32 },

    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),
    #[error("group {0} has no examples")]
    EmptyGroup(u32),
    #[error("could not build a stratified 2-fold split with both classes in each fold")]
    FoldMissingClass,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
