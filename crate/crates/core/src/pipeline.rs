//! Glue between the file formats and the numeric modules: loading inputs,
//! the cached dissimilarity matrix and pair-vector assembly.

use std::path::{Path, PathBuf};

use log::{info, warn};
use sha2::{Digest, Sha256};

use crate::alignment::{dissimilarity_matrix, DissimilarityMatrix, ScoringParams};
use crate::error::{Error, Result};
use crate::features::{pair_features, protein_features, FeatureTable};
use crate::sampling::{
    candidates_for, finish_dataset, negative_counts_by_group, sample_negatives, sample_negatives_per_group,
    PairExample, SamplingConfig,
};
use crate::seqio::{load_fasta, load_interactions, sanitize_sequence, write_fasta, FastaLoad, InteractionTable, Role};
use crate::svm::SvmModel;

/// Read a FASTA file and log every rejected record.
pub fn load_records(path: &Path, role: Role) -> Result<FastaLoad> {
    let load = load_fasta(path, role)?;
    for (id, reason) in &load.rejected {
        warn!("{}: skipping {id}: {reason}", path.display());
    }
    if load.dropped_residues > 0 {
        warn!(
            "{}: dropped {} non-canonical residues",
            path.display(),
            load.dropped_residues
        );
    }
    Ok(load)
}

pub fn load_table(interactions: &Path, hosts: &Path, viruses: &Path) -> Result<InteractionTable> {
    let hosts = load_records(hosts, Role::Host)?.records;
    let viruses = load_records(viruses, Role::Pathogen)?.records;
    let tsv = std::fs::read_to_string(interactions).map_err(|e| Error::io(interactions, e))?;
    load_interactions(&tsv, hosts, viruses)
}

/// Hex SHA-256 of the table's viruses in canonical FASTA form together with
/// the gap penalty, so that the key changes whenever the matrix would.
pub fn virus_digest(table: &InteractionTable, params: &ScoringParams) -> String {
    let fasta = write_fasta(table.viruses().map(|v| (v.id.as_str(), v.sequence.as_str())));
    let mut hasher = Sha256::new();
    hasher.update(fasta.as_bytes());
    hasher.update(format!("gap={}", params.gap_penalty).as_bytes());
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sidecar_path(dir: &Path, digest: &str) -> PathBuf {
    dir.join(format!("dissimilarity-{}.tsv", &digest[..16]))
}

/// Load the matrix from `cache_dir` when a sidecar for the same viruses
/// exists, otherwise compute it and try to write the sidecar.
pub fn cached_dissimilarity(
    table: &InteractionTable,
    params: &ScoringParams,
    cache_dir: Option<&Path>,
) -> Result<DissimilarityMatrix> {
    let sidecar = cache_dir.map(|dir| sidecar_path(dir, &virus_digest(table, params)));
    if let Some(path) = &sidecar {
        if path.exists() {
            match DissimilarityMatrix::read(path) {
                Ok(d) if table.viruses().all(|v| d.index_of(&v.id).is_some()) => {
                    info!("using cached dissimilarity matrix {}", path.display());
                    return Ok(d);
                }
                Ok(_) => warn!("{} does not cover every virus; recomputing", path.display()),
                Err(e) => warn!("ignoring unreadable cache {}: {e}", path.display()),
            }
        }
    }
    let viruses: Vec<_> = table.viruses().cloned().collect();
    info!("aligning {} viral proteins all-vs-all", viruses.len());
    let d = dissimilarity_matrix(&viruses, params)?;
    if let Some(path) = &sidecar {
        if let Err(e) = d.write(path) {
            warn!("could not write matrix cache: {e}");
        }
    }
    Ok(d)
}

/// Sample a dataset whose negatives match `reference` group by group in
/// number. Used to build a random-negative training set with the same fold
/// sizes as a DeNovo one.
pub fn build_matched_dataset(
    table: &InteractionTable,
    d: Option<&DissimilarityMatrix>,
    config: &SamplingConfig,
    reference: &[PairExample],
) -> Result<Vec<PairExample>> {
    let candidates = candidates_for(table, d, config)?;
    let counts = negative_counts_by_group(reference);
    let negatives = sample_negatives_per_group(&candidates, table, &counts, config.seed)?;
    finish_dataset(table, d, &negatives)
}

pub fn build_dataset_with(
    table: &InteractionTable,
    d: Option<&DissimilarityMatrix>,
    config: &SamplingConfig,
) -> Result<Vec<PairExample>> {
    let candidates = candidates_for(table, d, config)?;
    info!("{} candidate negatives", candidates.len());
    let negatives = sample_negatives(&candidates, config.count.resolve(table.n_positives()), config.seed)?;
    finish_dataset(table, d, &negatives)
}

/// Pair vectors for every example, in dataset order.
pub fn assemble_pairs(dataset: &[PairExample], hosts: &FeatureTable, viruses: &FeatureTable) -> Result<Vec<Vec<f64>>> {
    dataset
        .iter()
        .map(|ex| {
            let h = hosts.get(&ex.host_id).ok_or_else(|| Error::UnresolvedId {
                role: "host",
                id: ex.host_id.clone(),
            })?;
            let v = viruses.get(&ex.virus_id).ok_or_else(|| Error::UnresolvedId {
                role: "virus",
                id: ex.virus_id.clone(),
            })?;
            Ok(pair_features(h, v)?.0)
        })
        .collect()
}

/// Decision value for two raw sequences. Non-canonical characters are
/// dropped first, exactly as when loading FASTA.
pub fn score_sequences(model: &SvmModel, host: &str, virus: &str) -> Result<f64> {
    let (host, _) = sanitize_sequence(host)?;
    let (virus, _) = sanitize_sequence(virus)?;
    let x = pair_features(&protein_features(&host)?, &protein_features(&virus)?)?;
    model.decision_function(x.as_slice())
}
