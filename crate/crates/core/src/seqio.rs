//! FASTA and interaction-table ingestion.
//!
//! Sequences are uppercased on parse and then stripped of everything outside
//! the 20 canonical residues. Featurization and alignment both consume the
//! sanitized sequence, so they always see the same residues.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};

/// The 20 canonical amino-acid letters.
pub const CANONICAL_RESIDUES: &[u8; 20] = b"ARNDCQEGHILKMFPSTWYV";

pub fn is_canonical(residue: u8) -> bool {
    CANONICAL_RESIDUES.contains(&residue)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Host,
    Pathogen,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Host => f.write_str("host"),
            Role::Pathogen => f.write_str("pathogen"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProteinRecord {
    pub id: String,
    pub role: Role,
    /// Viral family group; `None` for hosts.
    pub family_group: Option<u32>,
    pub sequence: String,
}

/// Parse FASTA text into `(id, raw_sequence)` pairs in file order.
///
/// The id is the first whitespace-delimited token after `>`. Sequence lines
/// are concatenated and uppercased; nothing else is filtered here.
pub fn parse_fasta(text: &str) -> Result<Vec<(String, String)>> {
    let mut records: Vec<(String, String)> = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if let Some(header) = line.strip_prefix('>') {
            let id = header
                .split_whitespace()
                .next()
                .ok_or_else(|| Error::parse(lineno + 1, "header without id"))?
                .to_string();
            if !seen.insert(id.clone()) {
                return Err(Error::DuplicateId(id));
            }
            records.push((id, String::new()));
        } else if line.trim().is_empty() {
            continue;
        } else {
            let (_, seq) = records.last_mut().ok_or(Error::DataBeforeHeader { line: lineno + 1 })?;
            seq.extend(
                line.chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| c.to_ascii_uppercase()),
            );
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyFasta);
    }
    Ok(records)
}

/// Delete every non-canonical character. Returns the cleaned sequence and
/// the number of characters removed.
pub fn sanitize_sequence(raw: &str) -> Result<(String, usize)> {
    let clean: String = raw.bytes().filter(|&b| is_canonical(b)).map(char::from).collect();
    let dropped = raw.chars().count() - clean.len();
    if clean.is_empty() {
        return Err(Error::NoCanonicalResidues(raw.chars().take(32).collect()));
    }
    Ok((clean, dropped))
}

/// Canonical FASTA: one `>id` line and one sequence line per record.
pub fn write_fasta<'a>(records: impl IntoIterator<Item = (&'a str, &'a str)>) -> String {
    let mut out = String::new();
    for (id, seq) in records {
        out.push('>');
        out.push_str(id);
        out.push('\n');
        out.push_str(seq);
        out.push('\n');
    }
    out
}

/// A parsed and sanitized FASTA file, plus the ids that were rejected.
#[derive(Debug, Default)]
pub struct FastaLoad {
    pub records: Vec<ProteinRecord>,
    /// `(id, reason)` for records that failed sanitization.
    pub rejected: Vec<(String, String)>,
    pub dropped_residues: usize,
}

/// Parse and sanitize FASTA text. Records with no canonical residues are
/// reported in `rejected` rather than failing the whole load.
pub fn load_fasta_str(text: &str, role: Role) -> Result<FastaLoad> {
    let mut load = FastaLoad::default();
    for (id, raw) in parse_fasta(text)? {
        if id.contains(char::is_whitespace) {
            return Err(Error::Parse {
                line: 0,
                msg: format!("id {id:?} contains whitespace"),
            });
        }
        match sanitize_sequence(&raw) {
            Ok((sequence, dropped)) => {
                load.dropped_residues += dropped;
                load.records.push(ProteinRecord {
                    id,
                    role,
                    family_group: None,
                    sequence,
                });
            }
            Err(e) => load.rejected.push((id, e.to_string())),
        }
    }
    Ok(load)
}

pub fn load_fasta(path: &Path, role: Role) -> Result<FastaLoad> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_fasta_str(&text, role)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interaction {
    pub host_id: String,
    pub virus_id: String,
    pub group: u32,
}

/// Known positive interactions plus the host and virus universes.
///
/// Every virus carries exactly one family group and every positive of that
/// virus shares it. Hosts without positives are allowed.
#[derive(Debug, Clone)]
pub struct InteractionTable {
    positives: BTreeSet<Interaction>,
    positive_pairs: HashSet<(String, String)>,
    hosts: BTreeMap<String, ProteinRecord>,
    viruses: BTreeMap<String, ProteinRecord>,
    pub duplicates_removed: usize,
}

impl InteractionTable {
    /// Build a table from already-resolved records. Each virus must have a
    /// `family_group`; each positive must reference known ids and agree with
    /// its virus's group.
    pub fn new(
        hosts: impl IntoIterator<Item = ProteinRecord>,
        viruses: impl IntoIterator<Item = ProteinRecord>,
        positives: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self> {
        let hosts: BTreeMap<_, _> = hosts.into_iter().map(|r| (r.id.clone(), r)).collect();
        let viruses: BTreeMap<_, _> = viruses.into_iter().map(|r| (r.id.clone(), r)).collect();
        for v in viruses.values() {
            if v.family_group.is_none() {
                return Err(Error::Config(format!("virus {} has no family group", v.id)));
            }
        }
        let mut table = InteractionTable {
            positives: BTreeSet::new(),
            positive_pairs: HashSet::new(),
            hosts,
            viruses,
            duplicates_removed: 0,
        };
        for (h, v) in positives {
            table.insert_positive(h, v, None)?;
        }
        Ok(table)
    }

    fn insert_positive(&mut self, host_id: String, virus_id: String, group: Option<u32>) -> Result<()> {
        if !self.hosts.contains_key(&host_id) {
            return Err(Error::UnresolvedId {
                role: "host",
                id: host_id,
            });
        }
        let virus = self.viruses.get(&virus_id).ok_or_else(|| Error::UnresolvedId {
            role: "virus",
            id: virus_id.clone(),
        })?;
        let vgroup = virus.family_group.expect("viruses in a table always carry a group");
        if group.is_some_and(|g| g != vgroup) {
            return Err(Error::InconsistentGroup(virus_id));
        }
        if !self.positive_pairs.insert((host_id.clone(), virus_id.clone())) {
            self.duplicates_removed += 1;
            return Ok(());
        }
        self.positives.insert(Interaction {
            host_id,
            virus_id,
            group: vgroup,
        });
        Ok(())
    }

    pub fn positives(&self) -> impl Iterator<Item = &Interaction> {
        self.positives.iter()
    }

    pub fn n_positives(&self) -> usize {
        self.positives.len()
    }

    pub fn is_positive(&self, host_id: &str, virus_id: &str) -> bool {
        self.positive_pairs
            .contains(&(host_id.to_string(), virus_id.to_string()))
    }

    /// Hosts in id order.
    pub fn hosts(&self) -> impl Iterator<Item = &ProteinRecord> {
        self.hosts.values()
    }

    /// Viruses in id order.
    pub fn viruses(&self) -> impl Iterator<Item = &ProteinRecord> {
        self.viruses.values()
    }

    pub fn host(&self, id: &str) -> Option<&ProteinRecord> {
        self.hosts.get(id)
    }

    pub fn virus(&self, id: &str) -> Option<&ProteinRecord> {
        self.viruses.get(id)
    }

    pub fn virus_group(&self, id: &str) -> Option<u32> {
        self.viruses.get(id).and_then(|v| v.family_group)
    }

    /// The positive partners of each host, keyed by host id.
    pub fn partners_by_host(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut map: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for p in &self.positives {
            map.entry(p.host_id.as_str()).or_default().push(p.virus_id.as_str());
        }
        map
    }

    /// Distinct group labels, ascending.
    pub fn groups(&self) -> BTreeSet<u32> {
        self.viruses.values().filter_map(|v| v.family_group).collect()
    }
}

/// Parse an interactions TSV (`host_id<TAB>virus_id<TAB>group`) and resolve
/// it against the supplied host and virus records.
///
/// Virus groups come from the TSV. Viruses that never appear in it cannot be
/// assigned to a family and are left out of the table, with a warning.
pub fn load_interactions(
    tsv: &str,
    hosts: Vec<ProteinRecord>,
    viruses: Vec<ProteinRecord>,
) -> Result<InteractionTable> {
    let mut rows = Vec::new();
    let mut virus_groups: BTreeMap<String, u32> = BTreeMap::new();
    for (idx, line) in tsv.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 {
            return Err(Error::parse(idx + 1, "expected host_id, virus_id, group"));
        }
        let group = match fields[2].trim().parse::<u32>() {
            Ok(g) => g,
            Err(_) if idx == 0 => continue,
            Err(_) => return Err(Error::parse(idx + 1, format!("bad group {:?}", fields[2]))),
        };
        let (host_id, virus_id) = (fields[0].trim().to_string(), fields[1].trim().to_string());
        match virus_groups.get(&virus_id) {
            Some(&g) if g != group => return Err(Error::InconsistentGroup(virus_id)),
            Some(_) => {}
            None => {
                virus_groups.insert(virus_id.clone(), group);
            }
        }
        rows.push((host_id, virus_id, group));
    }

    let mut kept_viruses = Vec::new();
    let mut ungrouped = 0usize;
    for mut v in viruses {
        match virus_groups.get(&v.id) {
            Some(&g) => {
                v.family_group = Some(g);
                kept_viruses.push(v);
            }
            None => ungrouped += 1,
        }
    }
    if ungrouped > 0 {
        warn!("{ungrouped} viruses have no interactions and no group; excluded");
    }

    let mut table = InteractionTable::new(hosts, kept_viruses, std::iter::empty())?;
    for (h, v, g) in rows {
        table.insert_positive(h, v, Some(g))?;
    }
    if table.duplicates_removed > 0 {
        warn!("collapsed {} duplicate interactions", table.duplicates_removed);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, role: Role) -> ProteinRecord {
        ProteinRecord {
            id: id.into(),
            role,
            family_group: None,
            sequence: "ACDE".into(),
        }
    }

    #[test]
    fn fasta_wrapped_lines_concatenate() {
        let recs = parse_fasta(">p1\nAPR\nIRGQ\n").unwrap();
        assert_eq!(recs, vec![("p1".to_string(), "APRIRGQ".to_string())]);
    }

    #[test]
    fn fasta_uppercases() {
        let recs = parse_fasta(">a\nAA\n>b\ncc\n").unwrap();
        assert_eq!(recs, vec![("a".into(), "AA".into()), ("b".into(), "CC".into())]);
    }

    #[test]
    fn fasta_header_id_is_first_token() {
        let recs = parse_fasta(">sp|P1 some description\r\nMK\r\n").unwrap();
        assert_eq!(recs[0], ("sp|P1".into(), "MK".into()));
    }

    #[test]
    fn fasta_errors() {
        assert!(matches!(
            parse_fasta("AA\n>a\nAA\n"),
            Err(Error::DataBeforeHeader { line: 1 })
        ));
        assert!(matches!(parse_fasta(""), Err(Error::EmptyFasta)));
        assert!(matches!(parse_fasta("\n\n"), Err(Error::EmptyFasta)));
        assert!(matches!(
            parse_fasta(">a\nA\n>a\nC\n"),
            Err(Error::DuplicateId(id)) if id == "a"
        ));
    }

    #[test]
    fn sanitize_examples() {
        assert_eq!(sanitize_sequence("APRXIRGQ").unwrap(), ("APRIRGQ".into(), 1));
        assert_eq!(sanitize_sequence("APRIRGQ").unwrap(), ("APRIRGQ".into(), 0));
        assert!(matches!(sanitize_sequence("XXX"), Err(Error::NoCanonicalResidues(_))));
        assert_eq!(sanitize_sequence("M-K*BZ").unwrap(), ("MK".into(), 4));
    }

    #[test]
    fn fasta_load_reports_rejects_and_continues() {
        let load = load_fasta_str(">a\nXXX\n>b\nMKX\n", Role::Host).unwrap();
        assert_eq!(load.records.len(), 1);
        assert_eq!(load.records[0].sequence, "MK");
        assert_eq!(load.rejected.len(), 1);
        assert_eq!(load.rejected[0].0, "a");
        assert_eq!(load.dropped_residues, 1);
    }

    #[test]
    fn interactions_dedup() {
        let t = load_interactions(
            "h1\tv1\t1\nh1\tv1\t1\n",
            vec![rec("h1", Role::Host)],
            vec![rec("v1", Role::Pathogen)],
        )
        .unwrap();
        assert_eq!(t.n_positives(), 1);
        assert_eq!(t.duplicates_removed, 1);
    }

    #[test]
    fn interactions_two_groups_with_header() {
        let t = load_interactions(
            "host_id\tvirus_id\tgroup\nh1\tv1\t1\nh1\tv2\t2\n",
            vec![rec("h1", Role::Host)],
            vec![rec("v1", Role::Pathogen), rec("v2", Role::Pathogen)],
        )
        .unwrap();
        assert_eq!(t.n_positives(), 2);
        assert_eq!(t.groups().into_iter().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(t.virus_group("v2"), Some(2));
    }

    #[test]
    fn interactions_inconsistent_group() {
        let err = load_interactions(
            "h1\tv1\t1\nh2\tv1\t2\n",
            vec![rec("h1", Role::Host), rec("h2", Role::Host)],
            vec![rec("v1", Role::Pathogen)],
        )
        .unwrap_err();
        assert_eq!(err.to_string(), "inconsistent group for v1");
    }

    #[test]
    fn interactions_unresolved_id() {
        let err = load_interactions(
            "h9\tv1\t1\n",
            vec![rec("h1", Role::Host)],
            vec![rec("v1", Role::Pathogen)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnresolvedId { role: "host", .. }));
    }

    #[test]
    fn ungrouped_viruses_are_excluded() {
        let t = load_interactions(
            "h1\tv1\t3\n",
            vec![rec("h1", Role::Host)],
            vec![rec("v1", Role::Pathogen), rec("v2", Role::Pathogen)],
        )
        .unwrap();
        assert_eq!(t.viruses().count(), 1);
    }

    proptest::proptest! {
        #[test]
        fn canonical_fasta_round_trips(
            seqs in proptest::collection::vec("[ARNDCQEGHILKMFPSTWYV]{1,80}", 1..6)
        ) {
            let ids: Vec<String> = (0..seqs.len()).map(|i| format!("p{i}")).collect();
            let text = write_fasta(ids.iter().map(String::as_str).zip(seqs.iter().map(String::as_str)));
            let parsed = parse_fasta(&text).unwrap();
            let cleaned: Vec<(String, String)> = parsed
                .into_iter()
                .map(|(id, raw)| (id, sanitize_sequence(&raw).unwrap().0))
                .collect();
            let again = write_fasta(cleaned.iter().map(|(a, b)| (a.as_str(), b.as_str())));
            proptest::prop_assert_eq!(again, text);
        }
    }
}
