//! Negative pair generation and per-example confidence weights.
//!
//! Random sampling draws from every host-virus pair that is not a known
//! positive. DeNovo sampling additionally forbids `(h, v)` whenever `h` has a
//! positive partner `v'` with `D[v][v'] < T`. A negative's weight is its
//! smallest dissimilarity to any positive partner of its host.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::alignment::DissimilarityMatrix;
use crate::error::{Error, Result};
use crate::seqio::InteractionTable;

/// Weights are floored here so no example ends up with an empty box.
pub const MIN_WEIGHT: f64 = 1e-6;

pub type Pair = (String, String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn from_sign(y: f64) -> Self {
        if y > 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Positive => "+1",
            Label::Negative => "-1",
        })
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+1" | "1" => Ok(Label::Positive),
            "-1" => Ok(Label::Negative),
            other => Err(Error::Config(format!("bad label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairExample {
    pub host_id: String,
    pub virus_id: String,
    pub label: Label,
    /// Confidence weight in `(0, 1]`; positives always carry 1.
    pub weight: f64,
    pub group: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    Random,
    DeNovo,
}

impl FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(SamplingMode::Random),
            "denovo" => Ok(SamplingMode::DeNovo),
            other => Err(Error::Config(format!("unknown sampling mode {other:?}"))),
        }
    }
}

/// How many negatives to draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountPolicy {
    All,
    Absolute(usize),
    /// Negatives per positive, e.g. `ratio:1` for P:N = 1:1.
    Ratio(f64),
}

impl CountPolicy {
    /// `None` means every candidate.
    pub fn resolve(self, n_positives: usize) -> Option<usize> {
        match self {
            CountPolicy::All => None,
            CountPolicy::Absolute(n) => Some(n),
            CountPolicy::Ratio(r) => Some((r * n_positives as f64).round() as usize),
        }
    }
}

impl FromStr for CountPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "bad count {s:?}; expected all, ratio:<k> or a positive integer"
            ))
        };
        if s == "all" {
            return Ok(CountPolicy::All);
        }
        if let Some(r) = s.strip_prefix("ratio:") {
            let r: f64 = r.parse().map_err(|_| bad())?;
            if !(r > 0.0 && r.is_finite()) {
                return Err(bad());
            }
            return Ok(CountPolicy::Ratio(r));
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(CountPolicy::Absolute(n)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingConfig {
    pub mode: SamplingMode,
    pub threshold: f64,
    pub count: CountPolicy,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            mode: SamplingMode::DeNovo,
            threshold: 0.7,
            count: CountPolicy::All,
            seed: 0,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config("threshold must lie in [0, 1]".into()));
        }
        if self.count == CountPolicy::Absolute(0) {
            return Err(Error::Config("count must be at least 1".into()));
        }
        Ok(())
    }
}

/// The full host x virus grid minus known positives, sorted.
pub fn candidate_negatives_random(table: &InteractionTable) -> BTreeSet<Pair> {
    let viruses: Vec<&str> = table.viruses().map(|v| v.id.as_str()).collect();
    table
        .hosts()
        .flat_map(|h| {
            viruses
                .iter()
                .filter(move |v| !table.is_positive(&h.id, v))
                .map(move |v| (h.id.clone(), v.to_string()))
        })
        .collect()
}

fn check_covered(table: &InteractionTable, d: &DissimilarityMatrix) -> Result<()> {
    match table.viruses().find(|v| d.index_of(&v.id).is_none()) {
        Some(v) => Err(Error::MissingFromMatrix(v.id.clone())),
        None => Ok(()),
    }
}

/// Non-positive pairs `(h, v)` such that no positive partner `v'` of `h` has
/// `D[v][v'] < threshold`.
pub fn candidate_negatives_denovo(
    table: &InteractionTable,
    d: &DissimilarityMatrix,
    threshold: f64,
) -> Result<BTreeSet<Pair>> {
    check_covered(table, d)?;
    let partners = table.partners_by_host();
    let viruses: Vec<(&str, usize)> = table
        .viruses()
        .map(|v| (v.id.as_str(), d.index_of(&v.id).unwrap()))
        .collect();
    let hosts: Vec<&str> = table.hosts().map(|h| h.id.as_str()).collect();

    let per_host: Vec<Vec<Pair>> = hosts
        .par_iter()
        .map(|&h| {
            let partner_idx: Vec<usize> = partners
                .get(h)
                .map(|ps| ps.iter().map(|p| d.index_of(p).unwrap()).collect())
                .unwrap_or_default();
            viruses
                .iter()
                .filter(|&&(v, vi)| !table.is_positive(h, v) && partner_idx.iter().all(|&pi| d.at(vi, pi) >= threshold))
                .map(|&(v, _)| (h.to_string(), v.to_string()))
                .collect()
        })
        .collect();
    Ok(per_host.into_iter().flatten().collect())
}

/// Draw `count` candidates uniformly without replacement, or all of them.
///
/// Selection shuffles the sorted candidate list with a ChaCha8 stream seeded
/// from `seed` and keeps the first `count`; the result is returned sorted.
pub fn sample_negatives(candidates: &BTreeSet<Pair>, count: Option<usize>, seed: u64) -> Result<Vec<Pair>> {
    sample_stream(candidates.iter().cloned().collect(), count, seed, 0)
}

fn sample_stream(mut sorted: Vec<Pair>, count: Option<usize>, seed: u64, stream: u64) -> Result<Vec<Pair>> {
    let Some(count) = count else {
        return Ok(sorted);
    };
    if count > sorted.len() {
        return Err(Error::NotEnoughCandidates {
            requested: count,
            available: sorted.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    sorted.shuffle(&mut rng);
    sorted.truncate(count);
    sorted.sort();
    Ok(sorted)
}

/// Sample a fixed number of negatives from each virus family group, e.g. to
/// give a random-negative training set the same per-group size as a DeNovo
/// one. Each group draws from its own RNG stream.
pub fn sample_negatives_per_group(
    candidates: &BTreeSet<Pair>,
    table: &InteractionTable,
    counts: &BTreeMap<u32, usize>,
    seed: u64,
) -> Result<Vec<Pair>> {
    let mut by_group: BTreeMap<u32, Vec<Pair>> = BTreeMap::new();
    for pair in candidates {
        let g = table.virus_group(&pair.1).ok_or_else(|| Error::UnresolvedId {
            role: "virus",
            id: pair.1.clone(),
        })?;
        by_group.entry(g).or_default().push(pair.clone());
    }
    let mut out = Vec::new();
    for (&g, &n) in counts {
        let pool = by_group.remove(&g).unwrap_or_default();
        out.extend(sample_stream(pool, Some(n), seed, g as u64)?);
    }
    out.sort();
    Ok(out)
}

/// Weight each negative by its smallest dissimilarity to a positive partner
/// of its host; hosts with no partners give weight 1.
pub fn assign_weights(
    negatives: &[Pair],
    table: &InteractionTable,
    d: &DissimilarityMatrix,
) -> Result<Vec<PairExample>> {
    let partners = table.partners_by_host();
    negatives
        .iter()
        .map(|(h, v)| {
            let vi = d.index_of(v).ok_or_else(|| Error::MissingFromMatrix(v.clone()))?;
            let group = table.virus_group(v).ok_or_else(|| Error::UnresolvedId {
                role: "virus",
                id: v.clone(),
            })?;
            let mut w = 1.0f64;
            for p in partners.get(h.as_str()).into_iter().flatten() {
                let pi = d.index_of(p).ok_or_else(|| Error::MissingFromMatrix(p.to_string()))?;
                w = w.min(d.at(vi, pi));
            }
            Ok(PairExample {
                host_id: h.clone(),
                virus_id: v.clone(),
                label: Label::Negative,
                weight: w.max(MIN_WEIGHT),
                group,
            })
        })
        .collect()
}

pub fn positive_examples(table: &InteractionTable) -> Vec<PairExample> {
    table
        .positives()
        .map(|p| PairExample {
            host_id: p.host_id.clone(),
            virus_id: p.virus_id.clone(),
            label: Label::Positive,
            weight: 1.0,
            group: p.group,
        })
        .collect()
}

/// Candidates for the configured mode. DeNovo requires the matrix.
pub fn candidates_for(
    table: &InteractionTable,
    d: Option<&DissimilarityMatrix>,
    config: &SamplingConfig,
) -> Result<BTreeSet<Pair>> {
    config.validate()?;
    match config.mode {
        SamplingMode::Random => Ok(candidate_negatives_random(table)),
        SamplingMode::DeNovo => {
            let d = d.ok_or_else(|| Error::Config("denovo sampling needs a dissimilarity matrix".into()))?;
            candidate_negatives_denovo(table, d, config.threshold)
        }
    }
}

/// Positives (weight 1) followed by sampled negatives. Negatives are
/// weighted from `d` when it is supplied and get weight 1 otherwise.
pub fn build_dataset(
    table: &InteractionTable,
    d: Option<&DissimilarityMatrix>,
    config: &SamplingConfig,
) -> Result<Vec<PairExample>> {
    let candidates = candidates_for(table, d, config)?;
    let negatives = sample_negatives(&candidates, config.count.resolve(table.n_positives()), config.seed)?;
    finish_dataset(table, d, &negatives)
}

pub fn finish_dataset(
    table: &InteractionTable,
    d: Option<&DissimilarityMatrix>,
    negatives: &[Pair],
) -> Result<Vec<PairExample>> {
    let mut out = positive_examples(table);
    match d {
        Some(d) => out.extend(assign_weights(negatives, table, d)?),
        None => {
            for (h, v) in negatives {
                out.push(PairExample {
                    host_id: h.clone(),
                    virus_id: v.clone(),
                    label: Label::Negative,
                    weight: 1.0,
                    group: table.virus_group(v).ok_or_else(|| Error::UnresolvedId {
                        role: "virus",
                        id: v.clone(),
                    })?,
                });
            }
        }
    }
    Ok(out)
}

/// Per-group negative counts of a dataset.
pub fn negative_counts_by_group(dataset: &[PairExample]) -> BTreeMap<u32, usize> {
    let mut counts = BTreeMap::new();
    for ex in dataset.iter().filter(|e| e.label == Label::Negative) {
        *counts.entry(ex.group).or_insert(0) += 1;
    }
    counts
}

/// `host_id<TAB>virus_id<TAB>label<TAB>weight<TAB>group`, weight to six
/// decimals.
pub fn write_dataset_tsv(dataset: &[PairExample]) -> String {
    let mut out = String::new();
    for ex in dataset {
        writeln!(
            out,
            "{}\t{}\t{}\t{:.6}\t{}",
            ex.host_id, ex.virus_id, ex.label, ex.weight, ex.group
        )
        .unwrap();
    }
    out
}

pub fn parse_dataset_tsv(text: &str) -> Result<Vec<PairExample>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 5 {
            return Err(Error::parse(idx + 1, format!("expected 5 fields, got {}", f.len())));
        }
        let label: Label = f[2].parse().map_err(|e: Error| Error::parse(idx + 1, e.to_string()))?;
        let weight: f64 = f[3]
            .parse()
            .map_err(|_| Error::parse(idx + 1, format!("bad weight {:?}", f[3])))?;
        if !(weight > 0.0 && weight <= 1.0) {
            return Err(Error::parse(idx + 1, format!("weight {weight} outside (0, 1]")));
        }
        let group: u32 = f[4]
            .parse()
            .map_err(|_| Error::parse(idx + 1, format!("bad group {:?}", f[4])))?;
        out.push(PairExample {
            host_id: f[0].to_string(),
            virus_id: f[1].to_string(),
            label,
            weight,
            group,
        });
    }
    Ok(out)
}

pub fn read_dataset(path: &Path) -> Result<Vec<PairExample>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset_tsv(&text)
}

/// Small hand-built instances with known sampling outcomes.
pub mod toys {
    use super::*;
    use crate::seqio::{ProteinRecord, Role};

    /// Interaction table over placeholder sequences.
    pub fn table(hosts: &[&str], viruses: &[(&str, u32)], positives: &[(&str, &str)]) -> InteractionTable {
        let rec = |id: &str, role, g| ProteinRecord {
            id: id.into(),
            role,
            family_group: g,
            sequence: "MK".into(),
        };
        InteractionTable::new(
            hosts.iter().map(|h| rec(h, Role::Host, None)),
            viruses.iter().map(|(v, g)| rec(v, Role::Pathogen, Some(*g))),
            positives.iter().map(|(h, v)| (h.to_string(), v.to_string())),
        )
        .expect("toy tables are well formed")
    }

    /// Hosts a, b, c and viruses v1, v2, v4 with positives (b, v1), (a, v2)
    /// and (c, v4). v1 and v2 are similar (D = 0.4); both are dissimilar to
    /// v4 (D = 0.9). At T = 0.7, (a, v1) is forbidden because a's partner v2
    /// resembles v1, while (c, v1) is allowed.
    pub fn filter_instance() -> (InteractionTable, DissimilarityMatrix) {
        let table = table(
            &["a", "b", "c"],
            &[("v1", 1), ("v2", 1), ("v4", 2)],
            &[("b", "v1"), ("a", "v2"), ("c", "v4")],
        );
        let d = DissimilarityMatrix::from_rows(
            vec!["v1".into(), "v2".into(), "v4".into()],
            vec![vec![0.0, 0.4, 0.9], vec![0.4, 0.0, 0.9], vec![0.9, 0.9, 0.0]],
        )
        .expect("toy matrix is valid");
        (table, d)
    }

    /// Host h with partners p1, p2, p3 at dissimilarity 0.3, 0.6, 0.8 from
    /// virus v, plus a host with no partners. The negative (h, v) gets
    /// weight 0.3 and (lonely, v) gets 1.
    pub fn weight_instance() -> (InteractionTable, DissimilarityMatrix) {
        let table = table(
            &["h", "lonely"],
            &[("v", 1), ("p1", 1), ("p2", 2), ("p3", 3)],
            &[("h", "p1"), ("h", "p2"), ("h", "p3")],
        );
        let ids = ["v", "p1", "p2", "p3"].map(String::from).to_vec();
        let dv = [0.0, 0.3, 0.6, 0.8];
        let mut rows = vec![vec![0.5; 4]; 4];
        for i in 0..4 {
            rows[i][i] = 0.0;
            rows[0][i] = dv[i];
            rows[i][0] = dv[i];
        }
        (
            table,
            DissimilarityMatrix::from_rows(ids, rows).expect("toy matrix is valid"),
        )
    }
}
