//! Global alignment of viral proteins and the dissimilarity matrix built on it.
//!
//! Scores come from an exact Needleman-Wunsch recurrence with a 20x20
//! substitution matrix and a linear per-position gap penalty. A pair's
//! similarity is its raw score clamped at zero and divided by the smaller of
//! the two self-alignment scores; dissimilarity is one minus that.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seqio::{ProteinRecord, CANONICAL_RESIDUES};

/// BLOSUM62 over `ARNDCQEGHILKMFPSTWYV`.
#[rustfmt::skip]
pub const BLOSUM62: [[i32; 20]; 20] = [
//   A   R   N   D   C   Q   E   G   H   I   L   K   M   F   P   S   T   W   Y   V
    [4, -1, -2, -2,  0, -1, -1,  0, -2, -1, -1, -1, -1, -2, -1,  1,  0, -3, -2,  0], // A
    [-1, 5,  0, -2, -3,  1,  0, -2,  0, -3, -2,  2, -1, -3, -2, -1, -1, -3, -2, -3], // R
    [-2, 0,  6,  1, -3,  0,  0,  0,  1, -3, -3,  0, -2, -3, -2,  1,  0, -4, -2, -3], // N
    [-2, -2, 1,  6, -3,  0,  2, -1, -1, -3, -4, -1, -3, -3, -1,  0, -1, -4, -3, -3], // D
    [0, -3, -3, -3,  9, -3, -4, -3, -3, -1, -1, -3, -1, -2, -3, -1, -1, -2, -2, -1], // C
    [-1, 1,  0,  0, -3,  5,  2, -2,  0, -3, -2,  1,  0, -3, -1,  0, -1, -2, -1, -2], // Q
    [-1, 0,  0,  2, -4,  2,  5, -2,  0, -3, -3,  1, -2, -3, -1,  0, -1, -3, -2, -2], // E
    [0, -2,  0, -1, -3, -2, -2,  6, -2, -4, -4, -2, -3, -3, -2,  0, -2, -2, -3, -3], // G
    [-2, 0,  1, -1, -3,  0,  0, -2,  8, -3, -3, -1, -2, -1, -2, -1, -2, -2,  2, -3], // H
    [-1, -3, -3, -3, -1, -3, -3, -4, -3, 4,  2, -3,  1,  0, -3, -2, -1, -3, -1,  3], // I
    [-1, -2, -3, -4, -1, -2, -3, -4, -3, 2,  4, -2,  2,  0, -3, -2, -1, -2, -1,  1], // L
    [-1, 2,  0, -1, -3,  1,  1, -2, -1, -3, -2,  5, -1, -3, -1,  0, -1, -3, -2, -2], // K
    [-1, -1, -2, -3, -1,  0, -2, -3, -2, 1,  2, -1,  5,  0, -2, -1, -1, -1, -1,  1], // M
    [-2, -3, -3, -3, -2, -3, -3, -3, -1, 0,  0, -3,  0,  6, -4, -2, -2,  1,  3, -1], // F
    [-1, -2, -2, -1, -3, -1, -1, -2, -2, -3, -3, -1, -2, -4, 7, -1, -1, -4, -3, -2], // P
    [1, -1,  1,  0, -1,  0,  0,  0, -1, -2, -2,  0, -1, -2, -1,  4,  1, -3, -2, -2], // S
    [0, -1,  0, -1, -1, -1, -1, -2, -2, -1, -1, -1, -1, -2, -1,  1,  5, -2, -2,  0], // T
    [-3, -3, -4, -4, -2, -2, -3, -2, -2, -3, -2, -3, -1, 1, -4, -3, -2, 11,  2, -3], // W
    [-2, -2, -2, -3, -2, -1, -2, -3,  2, -1, -1, -2, -1, 3, -3, -2, -2,  2,  7, -1], // Y
    [0, -3, -3, -3, -1, -2, -2, -3, -3,  3,  1, -2,  1, -1, -2, -2,  0, -3, -1,  4], // V
];

/// Row/column of a canonical residue in [`BLOSUM62`] order.
pub fn residue_index(residue: u8) -> Option<usize> {
    CANONICAL_RESIDUES.iter().position(|&r| r == residue)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoringParams {
    pub substitution: [[i32; 20]; 20],
    /// Cost subtracted per gap position.
    pub gap_penalty: i32,
}

impl Default for ScoringParams {
    fn default() -> Self {
        ScoringParams {
            substitution: BLOSUM62,
            gap_penalty: 8,
        }
    }
}

impl ScoringParams {
    pub fn validate(&self) -> Result<()> {
        if self.gap_penalty <= 0 {
            return Err(Error::Config("gap penalty must be positive".into()));
        }
        for i in 0..20 {
            if self.substitution[i][i] <= 0 {
                return Err(Error::Config("substitution diagonal must be positive".into()));
            }
            for j in 0..i {
                if self.substitution[i][j] != self.substitution[j][i] {
                    return Err(Error::Config("substitution matrix must be symmetric".into()));
                }
            }
        }
        Ok(())
    }

    fn encode(seq: &str) -> Result<Vec<usize>> {
        if seq.is_empty() {
            return Err(Error::EmptySequence);
        }
        seq.bytes()
            .map(|b| residue_index(b).ok_or(Error::NonCanonicalResidue(b as char)))
            .collect()
    }
}

/// Optimal global alignment score with linear gaps.
pub fn global_align_score(a: &str, b: &str, params: &ScoringParams) -> Result<i64> {
    let a = ScoringParams::encode(a)?;
    let b = ScoringParams::encode(b)?;
    Ok(nw_score(&a, &b, params))
}

fn nw_score(a: &[usize], b: &[usize], params: &ScoringParams) -> i64 {
    let gap = params.gap_penalty as i64;
    let mut prev: Vec<i64> = (0..=b.len() as i64).map(|j| -gap * j).collect();
    let mut cur = vec![0i64; b.len() + 1];
    for (i, &ra) in a.iter().enumerate() {
        cur[0] = -gap * (i as i64 + 1);
        let row = &params.substitution[ra];
        for (j, &rb) in b.iter().enumerate() {
            let diag = prev[j] + row[rb] as i64;
            let up = prev[j + 1] - gap;
            let left = cur[j] - gap;
            cur[j + 1] = diag.max(up).max(left);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Similarity from raw scores: `max(raw_ab, 0) / min(self_a, self_b)`,
/// clamped to `[0, 1]`.
pub fn normalized_similarity(raw_ab: i64, self_a: i64, self_b: i64) -> Result<f64> {
    if self_a <= 0 || self_b <= 0 {
        return Err(Error::NonPositiveSelfScore(format!("{self_a}/{self_b}")));
    }
    let s = raw_ab.max(0) as f64 / self_a.min(self_b) as f64;
    Ok(s.clamp(0.0, 1.0))
}

/// Symmetric viral-protein dissimilarities in `[0, 1]` with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    values: Vec<f64>,
}

impl DissimilarityMatrix {
    /// Build from a full row-major matrix. Fails unless it is square,
    /// symmetric, zero on the diagonal and within `[0, 1]`.
    pub fn from_rows(ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = ids.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Config("dissimilarity matrix must be square".into()));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        for i in 0..n {
            if rows[i][i] != 0.0 {
                return Err(Error::Config(format!("nonzero diagonal for {}", ids[i])));
            }
            for j in 0..n {
                let x = rows[i][j];
                if !(0.0..=1.0).contains(&x) || x != rows[j][i] {
                    return Err(Error::Config(format!(
                        "entry ({}, {}) is outside [0,1] or asymmetric",
                        ids[i], ids[j]
                    )));
                }
            }
        }
        Ok(DissimilarityMatrix {
            ids,
            index,
            values: rows.into_iter().flatten().collect(),
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.at(self.index_of(a)?, self.index_of(b)?))
    }

    /// TSV: a header row of ids, then `id<TAB>v,v,...` with six decimals.
    pub fn to_tsv(&self) -> String {
        let mut out = self.ids.join("\t");
        out.push('\n');
        let n = self.ids.len();
        for (i, id) in self.ids.iter().enumerate() {
            out.push_str(id);
            out.push('\t');
            for j in 0..n {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{:.6}", self.at(i, j)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty matrix file"))?;
        let ids: Vec<String> = header.split('\t').map(str::to_string).collect();
        let mut rows = Vec::with_capacity(ids.len());
        for (k, (idx, line)) in lines.enumerate() {
            let (id, values) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(idx + 1, "expected id<TAB>values"))?;
            if ids.get(k).map(String::as_str) != Some(id) {
                return Err(Error::parse(idx + 1, format!("row id {id} out of order")));
            }
            let row = values
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(idx + 1, e.to_string()))?;
            rows.push(row);
        }
        Self::from_rows(ids, rows)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }
}

/// All-vs-all alignment. Each unordered pair is aligned once and mirrored;
/// pairs are distributed across the rayon pool.
pub fn dissimilarity_matrix(viruses: &[ProteinRecord], params: &ScoringParams) -> Result<DissimilarityMatrix> {
    params.validate()?;
    if viruses.is_empty() {
        return Err(Error::Config("no viruses to align".into()));
    }
    let encoded = viruses
        .iter()
        .map(|v| ScoringParams::encode(&v.sequence))
        .collect::<Result<Vec<_>>>()?;
    let self_scores: Vec<i64> = encoded.par_iter().map(|s| nw_score(s, s, params)).collect();
    for (v, &s) in viruses.iter().zip(&self_scores) {
        if s <= 0 {
            return Err(Error::NonPositiveSelfScore(v.id.clone()));
        }
    }

    let n = viruses.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let sims = pairs
        .par_iter()
        .map(|&(i, j)| {
            let raw = nw_score(&encoded[i], &encoded[j], params);
            normalized_similarity(raw, self_scores[i], self_scores[j])
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut rows = vec![vec![0.0; n]; n];
    for (&(i, j), s) in pairs.iter().zip(sims) {
        let d = 1.0 - s;
        rows[i][j] = d;
        rows[j][i] = d;
    }
    DissimilarityMatrix::from_rows(viruses.iter().map(|v| v.id.clone()).collect(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqio::Role;
    use proptest::prelude::*;

    /// Exhaustive enumeration of every global alignment.
    fn brute_force(a: &[u8], b: &[u8], p: &ScoringParams) -> i64 {
        if a.is_empty() {
            return -(p.gap_penalty as i64) * b.len() as i64;
        }
        if b.is_empty() {
            return -(p.gap_penalty as i64) * a.len() as i64;
        }
        let sub = p.substitution[residue_index(a[0]).unwrap()][residue_index(b[0]).unwrap()] as i64;
        let g = p.gap_penalty as i64;
        (sub + brute_force(&a[1..], &b[1..], p))
            .max(brute_force(&a[1..], b, p) - g)
            .max(brute_force(a, &b[1..], p) - g)
    }

    fn virus(id: &str, seq: &str) -> ProteinRecord {
        ProteinRecord {
            id: id.into(),
            role: Role::Pathogen,
            family_group: Some(1),
            sequence: seq.into(),
        }
    }

    #[test]
    fn blosum62_is_a_valid_scoring_matrix() {
        ScoringParams::default().validate().unwrap();
        assert_eq!(BLOSUM62[0][0], 4);
        assert_eq!(BLOSUM62[17][17], 11);
        for (i, row) in BLOSUM62.iter().enumerate() {
            assert!(row.iter().all(|&x| x <= row[i]), "diagonal not maximal in row {i}");
        }
    }

    #[test]
    fn align_examples() {
        let p = ScoringParams::default();
        assert_eq!(global_align_score("AA", "AA", &p).unwrap(), 8);
        assert!(matches!(global_align_score("A", "", &p), Err(Error::EmptySequence)));
        // one gap: W matched, A against a gap
        assert_eq!(global_align_score("WA", "W", &p).unwrap(), 11 - 8);
    }

    #[test]
    fn similarity_examples() {
        assert_eq!(normalized_similarity(8, 8, 8).unwrap(), 1.0);
        assert_eq!(normalized_similarity(-3, 8, 10).unwrap(), 0.0);
        assert_eq!(normalized_similarity(4, 8, 10).unwrap(), 0.5);
        assert!(normalized_similarity(4, 0, 10).is_err());
    }

    #[test]
    fn matrix_examples() {
        let p = ScoringParams::default();
        let one = dissimilarity_matrix(&[virus("a", "MKV")], &p).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.at(0, 0), 0.0);

        let same = dissimilarity_matrix(&[virus("a", "MKVL"), virus("b", "MKVL")], &p).unwrap();
        assert_eq!(same.get("a", "b"), Some(0.0));
        assert_eq!(same.get("b", "a"), Some(0.0));

        let rows = vec![vec![0.0, 0.7], vec![0.7, 0.0]];
        let m = DissimilarityMatrix::from_rows(vec!["a".into(), "b".into()], rows).unwrap();
        assert_eq!(m.get("a", "b"), Some(0.7));
    }

    #[test]
    fn matrix_rejects_bad_input() {
        let ids = vec!["a".to_string(), "b".to_string()];
        assert!(DissimilarityMatrix::from_rows(ids.clone(), vec![vec![0.0, 0.2], vec![0.3, 0.0]]).is_err());
        assert!(DissimilarityMatrix::from_rows(ids.clone(), vec![vec![0.1, 0.2], vec![0.2, 0.0]]).is_err());
        assert!(DissimilarityMatrix::from_rows(ids, vec![vec![0.0, 1.5], vec![1.5, 0.0]]).is_err());
    }

    #[test]
    fn matrix_tsv_round_trip() {
        let p = ScoringParams::default();
        let vs = [
            virus("v1", "MKVLAAGHRW"),
            virus("v2", "MKVLSAGHRW"),
            virus("v3", "PPPPCDEF"),
        ];
        let m = dissimilarity_matrix(&vs, &p).unwrap();
        let text = m.to_tsv();
        assert!(text.starts_with("v1\tv2\tv3\nv1\t0.000000,"));
        let back = DissimilarityMatrix::from_tsv(&text).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((back.at(i, j) - m.at(i, j)).abs() <= 1e-6);
            }
        }
    }

    proptest! {
        #[test]
        fn dp_matches_exhaustive_enumeration(a in "[ARNDCQEGHILKMFPSTWYV]{1,6}", b in "[ARNDCQEGHILKMFPSTWYV]{1,6}") {
            let p = ScoringParams::default();
            prop_assert_eq!(global_align_score(&a, &b, &p).unwrap(), brute_force(a.as_bytes(), b.as_bytes(), &p));
        }

        #[test]
        fn score_is_symmetric(a in "[ARNDCQEGHILKMFPSTWYV]{1,60}", b in "[ARNDCQEGHILKMFPSTWYV]{1,60}") {
            let p = ScoringParams::default();
            prop_assert_eq!(global_align_score(&a, &b, &p).unwrap(), global_align_score(&b, &a, &p).unwrap());
        }

        #[test]
        fn self_score_is_diagonal_sum(a in "[ARNDCQEGHILKMFPSTWYV]{1,40}", tail in "[ARNDCQEGHILKMFPSTWYV]{0,10}") {
            let p = ScoringParams::default();
            let diag: i64 = a.bytes().map(|r| { let i = residue_index(r).unwrap(); p.substitution[i][i] as i64 }).sum();
            prop_assert_eq!(global_align_score(&a, &a, &p).unwrap(), diag);
            let longer = format!("{a}{tail}");
            let s = global_align_score(&longer, &longer, &p).unwrap();
            prop_assert_eq!(normalized_similarity(s, s, s).unwrap(), 1.0);
        }

        #[test]
        fn matrix_invariants(seqs in proptest::collection::vec("[ARNDCQEGHILKMFPSTWYV]{1,30}", 1..7)) {
            let vs: Vec<_> = seqs.iter().enumerate().map(|(i, s)| virus(&format!("v{i}"), s)).collect();
            let m = dissimilarity_matrix(&vs, &ScoringParams::default()).unwrap();
            for i in 0..m.len() {
                prop_assert_eq!(m.at(i, i), 0.0);
                for j in 0..m.len() {
                    prop_assert_eq!(m.at(i, j), m.at(j, i));
                    prop_assert!((0.0..=1.0).contains(&m.at(i, j)));
                }
            }
        }
    }
}
