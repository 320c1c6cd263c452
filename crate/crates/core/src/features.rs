//! Conjoint-triad features.
//!
//! Residues are mapped onto a seven-letter alphabet, 3-mers of that alphabet
//! are counted with a stride-1 window, the 343 counts are min-max scaled per
//! protein, and a host vector and a virus vector are concatenated (host
//! first) into a 686-dimensional pair feature.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const N_CLUSTERS: usize = 7;
pub const TRIAD_DIM: usize = N_CLUSTERS * N_CLUSTERS * N_CLUSTERS;
pub const PAIR_DIM: usize = 2 * TRIAD_DIM;

/// Cluster index (1..=7) for a canonical residue.
pub fn cluster_of(residue: u8) -> Option<u8> {
    let c = match residue {
        b'A' | b'V' | b'G' => 1,
        b'I' | b'L' | b'F' | b'P' => 2,
        b'Y' | b'M' | b'T' | b'S' => 3,
        b'H' | b'N' | b'Q' | b'W' => 4,
        b'R' | b'K' => 5,
        b'D' | b'E' => 6,
        b'C' => 7,
        _ => return None,
    };
    Some(c)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterString(Vec<u8>);

impl ClusterString {
    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::fmt::Display for ClusterString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

pub fn map_to_clusters(sequence: &str) -> Result<ClusterString> {
    sequence
        .bytes()
        .map(|b| cluster_of(b).ok_or(Error::NonCanonicalResidue(b as char)))
        .collect::<Result<Vec<_>>>()
        .map(ClusterString)
}

/// 343 triad values; raw counts before [`normalize`], `[0, 1]` after.
#[derive(Debug, Clone, PartialEq)]
pub struct TriadVector(pub Vec<f64>);

impl TriadVector {
    pub fn zeros() -> Self {
        TriadVector(vec![0.0; TRIAD_DIM])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Index of the triad `(a, b, c)`, each in 1..=7.
pub fn triad_index(a: u8, b: u8, c: u8) -> usize {
    (a as usize - 1) * 49 + (b as usize - 1) * 7 + (c as usize - 1)
}

pub fn triad_counts(clusters: &ClusterString) -> TriadVector {
    let mut v = TriadVector::zeros();
    for w in clusters.symbols().windows(3) {
        v.0[triad_index(w[0], w[1], w[2])] += 1.0;
    }
    v
}

/// Min-max scale over the vector's own entries. A constant vector maps to
/// all zeros.
pub fn normalize(raw: &TriadVector) -> TriadVector {
    let (min, max) = raw.0.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    if max.is_nan() || max <= min {
        return TriadVector(vec![0.0; raw.0.len()]);
    }
    let span = max - min;
    TriadVector(raw.0.iter().map(|&x| (x - min) / span).collect())
}

/// Full per-protein pipeline: clusters, counts, normalization.
pub fn protein_features(sequence: &str) -> Result<TriadVector> {
    Ok(normalize(&triad_counts(&map_to_clusters(sequence)?)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairFeature(pub Vec<f64>);

impl PairFeature {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Host block occupies `[0, 343)`, virus block `[343, 686)`.
pub fn pair_features(host: &TriadVector, virus: &TriadVector) -> Result<PairFeature> {
    for v in [host, virus] {
        if v.0.len() != TRIAD_DIM {
            return Err(Error::Dimension {
                expected: TRIAD_DIM,
                actual: v.0.len(),
            });
        }
    }
    let mut out = Vec::with_capacity(PAIR_DIM);
    out.extend_from_slice(&host.0);
    out.extend_from_slice(&virus.0);
    Ok(PairFeature(out))
}

/// Per-protein feature table keyed by protein id.
pub type FeatureTable = BTreeMap<String, TriadVector>;

/// One row per protein: `id<TAB>v0,v1,...,v342`. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_feature_tsv<'a>(rows: impl IntoIterator<Item = (&'a str, &'a TriadVector)>) -> String {
    let mut out = String::new();
    for (id, v) in rows {
        out.push_str(id);
        out.push('\t');
        for (k, x) in v.0.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write!(out, "{x}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_feature_tsv(text: &str) -> Result<FeatureTable> {
    let mut table = FeatureTable::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, values) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(idx + 1, "expected id<TAB>values"))?;
        let v = values
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(idx + 1, e.to_string()))?;
        if v.len() != TRIAD_DIM {
            return Err(Error::parse(
                idx + 1,
                format!("expected {TRIAD_DIM} values, got {}", v.len()),
            ));
        }
        if table.insert(id.to_string(), TriadVector(v)).is_some() {
            return Err(Error::DuplicateId(id.to_string()));
        }
    }
    Ok(table)
}

pub fn read_feature_tsv(path: &Path) -> Result<FeatureTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_feature_tsv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqio::CANONICAL_RESIDUES;
    use proptest::prelude::*;

    #[test]
    fn worked_example_maps_to_1252514() {
        assert_eq!(map_to_clusters("APRIRGQ").unwrap().to_string(), "1252514");
        assert_eq!(map_to_clusters("CCCC").unwrap().symbols(), &[7, 7, 7, 7]);
        assert_eq!(map_to_clusters("RK").unwrap().symbols(), &[5, 5]);
    }

    #[test]
    fn non_canonical_residue_is_an_error() {
        assert!(matches!(map_to_clusters("AXA"), Err(Error::NonCanonicalResidue('X'))));
    }

    #[test]
    fn clusters_partition_the_alphabet() {
        let mut sizes = [0usize; N_CLUSTERS];
        for &r in CANONICAL_RESIDUES {
            sizes[cluster_of(r).unwrap() as usize - 1] += 1;
        }
        assert_eq!(sizes, [3, 4, 4, 4, 2, 2, 1]);
        for r in b'A'..=b'Z' {
            assert_eq!(cluster_of(r).is_some(), CANONICAL_RESIDUES.contains(&r));
        }
    }

    #[test]
    fn triad_counts_of_worked_example() {
        let v = triad_counts(&map_to_clusters("APRIRGQ").unwrap());
        // windows (1,2,5) (2,5,2) (5,2,5) (2,5,1) (5,1,4), enumerated by hand
        let mut expected = vec![0.0; TRIAD_DIM];
        // -> indices 0+7+4, 49+28+1, 196+7+4, 49+28+0, 196+0+3
        for idx in [11, 78, 207, 77, 199] {
            expected[idx] = 1.0;
        }
        assert_eq!(v.0, expected);
        assert_eq!(
            v.0.iter()
                .enumerate()
                .filter(|(_, &x)| x > 0.0)
                .map(|(i, _)| i)
                .collect::<Vec<_>>(),
            vec![11, 77, 78, 199, 207]
        );
    }

    #[test]
    fn triad_counts_edges() {
        let v = triad_counts(&map_to_clusters("AAA").unwrap());
        assert_eq!(v.0[0], 1.0);
        assert_eq!(v.0.iter().sum::<f64>(), 1.0);
        let short = triad_counts(&map_to_clusters("AP").unwrap());
        assert!(short.0.iter().all(|&x| x == 0.0));
        assert_eq!(triad_index(7, 7, 7), TRIAD_DIM - 1);
    }

    #[test]
    fn normalize_examples() {
        let mut raw = TriadVector::zeros();
        raw.0[1] = 1.0;
        raw.0[2] = 2.0;
        let n = normalize(&raw);
        assert_eq!(&n.0[..3], &[0.0, 0.5, 1.0]);
        assert!(n.0[3..].iter().all(|&x| x == 0.0));

        assert_eq!(normalize(&TriadVector::zeros()), TriadVector::zeros());
        assert_eq!(normalize(&TriadVector(vec![3.0; TRIAD_DIM])), TriadVector::zeros());
    }

    #[test]
    fn pair_feature_placement() {
        let zero = TriadVector::zeros();
        let mut one = TriadVector::zeros();
        one.0[11] = 1.0;
        let p = pair_features(&zero, &zero).unwrap();
        assert_eq!(p.0.len(), PAIR_DIM);
        assert!(p.0.iter().all(|&x| x == 0.0));

        let hv = pair_features(&one, &zero).unwrap();
        assert_eq!(hv.0.iter().position(|&x| x == 1.0), Some(11));
        let vh = pair_features(&zero, &one).unwrap();
        assert_eq!(vh.0.iter().position(|&x| x == 1.0), Some(354));
        assert_ne!(hv, vh);

        assert!(matches!(
            pair_features(&TriadVector(vec![0.0; 5]), &zero),
            Err(Error::Dimension {
                expected: 343,
                actual: 5
            })
        ));
    }

    #[test]
    fn feature_tsv_round_trip_is_exact() {
        let a = protein_features("MKVLAAGIVGLLLAVSCSRAAEQ").unwrap();
        let b = protein_features("APRIRGQ").unwrap();
        let text = write_feature_tsv([("a", &a), ("b", &b)]);
        let back = parse_feature_tsv(&text).unwrap();
        assert_eq!(back["a"], a);
        assert_eq!(back["b"], b);
        assert!(parse_feature_tsv("x\t1,2,3\n").is_err());
    }

    proptest! {
        #[test]
        fn counts_sum_to_len_minus_two(seq in "[ARNDCQEGHILKMFPSTWYV]{0,200}") {
            let v = triad_counts(&map_to_clusters(&seq).unwrap());
            let expected = seq.len().saturating_sub(2) as f64;
            prop_assert_eq!(v.0.iter().sum::<f64>(), expected);
        }

        #[test]
        fn normalized_range(seq in "[ARNDCQEGHILKMFPSTWYV]{3,200}") {
            let raw = triad_counts(&map_to_clusters(&seq).unwrap());
            let n = normalize(&raw);
            prop_assert!(n.0.iter().all(|&x| (0.0..=1.0).contains(&x)));
            let constant = raw.0.iter().all(|&x| x == raw.0[0]);
            if !constant {
                prop_assert_eq!(n.0.iter().cloned().fold(f64::MIN, f64::max), 1.0);
                prop_assert_eq!(n.0.iter().cloned().fold(f64::MAX, f64::min), 0.0);
            }
            // deterministic
            prop_assert_eq!(protein_features(&seq).unwrap(), protein_features(&seq).unwrap());
        }
    }
}
