//! Synthetic host-virus interaction data with known ground truth.
//!
//! Viral families descend from one of two class backbones, so families of
//! the same binding class align well to each other and poorly to the other
//! class. Each class also carries a binding motif, and each host one of two
//! receptor motifs; a host and a virus truly interact when their classes
//! agree. Only part of the true interactions is observed, at a rate that
//! differs between well-studied and poorly-studied families, so negatives
//! drawn uniformly from unobserved pairs contain hidden positives.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seqio::{write_fasta, Interaction, InteractionTable, ProteinRecord, Role, CANONICAL_RESIDUES};

// Each motif walks through eight clusters whose cyclic triads are all
// distinct, so repeats of one motif fill eight triad bins no other motif of
// the same role touches.
const VIRUS_MOTIFS: [&str; 2] = ["AITNKDCA", "CDKNTIAC"];
const HOST_MOTIFS: [&str; 2] = ["ATKCINDA", "ANCTDIKA"];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_families: u32,
    pub per_family: usize,
    pub n_hosts: usize,
    pub backbone_len: usize,
    /// Substitution probability from class backbone to family backbone.
    pub family_divergence: f64,
    /// Substitution probability from family backbone to each member.
    pub mutation_rate: f64,
    /// Copies of the binding motif inserted into each viral protein.
    pub motif_repeats: usize,
    /// Copies of the receptor motif inserted into each host protein.
    pub host_motif_repeats: usize,
    /// Observation probability of true interactions for the first half of
    /// the families.
    pub observe_high: f64,
    /// Same for the second half.
    pub observe_low: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_families: 4,
            per_family: 10,
            n_hosts: 75,
            backbone_len: 160,
            family_divergence: 0.15,
            mutation_rate: 0.15,
            motif_repeats: 8,
            host_motif_repeats: 8,
            observe_high: 0.35,
            observe_low: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub hosts: Vec<ProteinRecord>,
    pub viruses: Vec<ProteinRecord>,
    pub positives: Vec<Interaction>,
    /// Every truly interacting `(host, virus)` pair, observed or not.
    pub truth: Vec<(String, String)>,
}

fn random_seq(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| *CANONICAL_RESIDUES.choose(rng).unwrap()).collect()
}

fn mutate(rng: &mut ChaCha8Rng, seq: &[u8], rate: f64) -> Vec<u8> {
    seq.iter()
        .map(|&r| {
            if rng.gen::<f64>() < rate {
                *CANONICAL_RESIDUES.choose(rng).unwrap()
            } else {
                r
            }
        })
        .collect()
}

fn with_motif(mut backbone: Vec<u8>, at: usize, motif: &str, repeats: usize) -> String {
    let block = motif.as_bytes().repeat(repeats);
    backbone.splice(at..at, block);
    String::from_utf8(backbone).unwrap()
}

fn class_of_family(f: u32) -> usize {
    (f % 2) as usize
}

fn check_rate(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in [0, 1]")))
    }
}

pub fn generate(config: &SynthConfig) -> Result<SynthData> {
    if config.n_families == 0 || config.per_family == 0 || config.n_hosts == 0 || config.backbone_len == 0 {
        return Err(Error::Config("synthetic sizes must be positive".into()));
    }
    check_rate("family_divergence", config.family_divergence)?;
    check_rate("mutation_rate", config.mutation_rate)?;
    check_rate("observe_high", config.observe_high)?;
    check_rate("observe_low", config.observe_low)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let class_backbones = [
        random_seq(&mut rng, config.backbone_len),
        random_seq(&mut rng, config.backbone_len),
    ];
    // one motif site per class keeps same-class families alignable
    let class_sites = [
        rng.gen_range(0..=config.backbone_len),
        rng.gen_range(0..=config.backbone_len),
    ];
    let mut viruses = Vec::new();
    for f in 0..config.n_families {
        let class = class_of_family(f);
        let backbone = mutate(&mut rng, &class_backbones[class], config.family_divergence);
        for k in 0..config.per_family {
            let seq = mutate(&mut rng, &backbone, config.mutation_rate);
            viruses.push(ProteinRecord {
                id: format!("V{:02}_{:02}", f + 1, k + 1),
                role: Role::Pathogen,
                family_group: Some(f + 1),
                sequence: with_motif(seq, class_sites[class], VIRUS_MOTIFS[class], config.motif_repeats),
            });
        }
    }

    let mut hosts = Vec::new();
    for h in 0..config.n_hosts {
        let seq = random_seq(&mut rng, config.backbone_len);
        let site = rng.gen_range(0..=config.backbone_len);
        hosts.push(ProteinRecord {
            id: format!("H{:03}", h + 1),
            role: Role::Host,
            family_group: None,
            sequence: with_motif(seq, site, HOST_MOTIFS[h % 2], config.host_motif_repeats),
        });
    }

    let mut positives = Vec::new();
    let mut truth = Vec::new();
    for (h, host) in hosts.iter().enumerate() {
        for (v, virus) in viruses.iter().enumerate() {
            let family = (v / config.per_family) as u32;
            if class_of_family(family) != h % 2 {
                continue;
            }
            truth.push((host.id.clone(), virus.id.clone()));
            let rate = if family < config.n_families / 2 {
                config.observe_high
            } else {
                config.observe_low
            };
            if rng.gen::<f64>() < rate {
                positives.push(Interaction {
                    host_id: host.id.clone(),
                    virus_id: virus.id.clone(),
                    group: family + 1,
                });
            }
        }
    }
    Ok(SynthData {
        hosts,
        viruses,
        positives,
        truth,
    })
}

impl SynthData {
    /// The table a loader would build from [`SynthData::write_to`]'s files:
    /// viruses without an observed interaction carry no group and are left
    /// out.
    pub fn table(&self) -> Result<InteractionTable> {
        let observed: std::collections::BTreeSet<&str> = self.positives.iter().map(|p| p.virus_id.as_str()).collect();
        InteractionTable::new(
            self.hosts.clone(),
            self.viruses
                .iter()
                .filter(|v| observed.contains(v.id.as_str()))
                .cloned(),
            self.positives.iter().map(|p| (p.host_id.clone(), p.virus_id.clone())),
        )
    }

    pub fn interactions_tsv(&self) -> String {
        let mut out = String::from("host_id\tvirus_id\tgroup\n");
        for p in &self.positives {
            out.push_str(&format!("{}\t{}\t{}\n", p.host_id, p.virus_id, p.group));
        }
        out
    }

    /// Writes `hosts.fasta`, `viruses.fasta` and `interactions.tsv`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = [
            (
                "hosts.fasta",
                write_fasta(self.hosts.iter().map(|r| (r.id.as_str(), r.sequence.as_str()))),
            ),
            (
                "viruses.fasta",
                write_fasta(self.viruses.iter().map(|r| (r.id.as_str(), r.sequence.as_str()))),
            ),
            ("interactions.tsv", self.interactions_tsv()),
        ];
        for (name, text) in files {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}
