//! Command-line interface for the `hpi` binary.

use std::fmt::Write as _;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use crate::alignment::ScoringParams;
use crate::error::{Error, Result};
use crate::eval::{default_grid, run_logo_paired, CvConfig, Examples, Selection};
use crate::features::{protein_features, read_feature_tsv, write_feature_tsv, TriadVector};
use crate::pipeline::{
    assemble_pairs, build_dataset_with, build_matched_dataset, cached_dissimilarity, load_records, load_table,
    score_sequences,
};
use crate::sampling::{read_dataset, write_dataset_tsv, CountPolicy, SamplingConfig, SamplingMode};
use crate::seqio::Role;
use crate::svm::{fit, load_model, save_model, sign_label, PenaltyMode, SvmParams, DEFAULT_TOLERANCE};
use crate::synth::{generate, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "hpi", version, about = "Host-pathogen protein interaction prediction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write conjoint-triad feature tables for host and virus proteins.
    Featurize(FeaturizeArgs),
    /// Sample negatives and write a labelled, weighted dataset.
    BuildDataset(BuildDatasetArgs),
    /// Train an SVM on a dataset and save the model.
    Train(TrainArgs),
    /// Leave-one-group-out cross-validation.
    Crossval(CrossvalArgs),
    /// Score pairs or a single pair of sequences with a saved model.
    Predict(PredictArgs),
    /// Serve predictions over HTTP.
    Serve(ServeArgs),
    /// Write a synthetic dataset with known ground truth.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[arg(long)]
    pub hosts: PathBuf,
    #[arg(long)]
    pub viruses: PathBuf,
    /// Directory for `hosts.features.tsv` and `viruses.features.tsv`.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildDatasetArgs {
    #[arg(long)]
    pub interactions: PathBuf,
    #[arg(long)]
    pub hosts: PathBuf,
    #[arg(long)]
    pub viruses: PathBuf,
    #[arg(long, default_value = "denovo")]
    pub mode: SamplingMode,
    /// Dissimilarity threshold T for DeNovo sampling.
    #[arg(long, default_value_t = 0.7)]
    pub threshold: f64,
    /// `all`, `ratio:<k>` (k negatives per positive) or an absolute count.
    #[arg(long, default_value = "all")]
    pub count: CountPolicy,
    /// Draw as many negatives per virus group as this dataset has; overrides
    /// `--count`.
    #[arg(long)]
    pub match_counts: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Weight random negatives by dissimilarity too (needs the alignments).
    #[arg(long)]
    pub weights: bool,
    /// Where the dissimilarity matrix is cached; defaults to the output's
    /// directory.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeatureInputs {
    #[arg(long)]
    pub host_features: PathBuf,
    #[arg(long)]
    pub virus_features: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value = "weighted")]
    pub mode: PenaltyMode,
    /// KKT tolerance of the solver.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Iteration budget as a multiple of the training-set size.
    #[arg(long, default_value_t = crate::svm::DEFAULT_MAX_PASSES)]
    pub max_passes: usize,
}

impl SolverArgs {
    fn params(&self, c: f64, gamma: f64) -> SvmParams {
        SvmParams {
            tolerance: self.tolerance,
            max_passes: self.max_passes,
            ..SvmParams::new(c, gamma, self.mode)
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub features: FeatureInputs,
    #[arg(long = "C", default_value_t = 10.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Sampling threshold of the dataset, stored in the model header.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Exit with an error when the solver hits its iteration budget.
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CrossvalArgs {
    /// Training examples for every fold.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Take test folds from this dataset instead, so that models trained on
    /// different negative sets are scored on the same examples.
    #[arg(long)]
    pub test_dataset: Option<PathBuf>,
    #[command(flatten)]
    pub features: FeatureInputs,
    /// Fixed C; skips nested selection (requires `--gamma`).
    #[arg(long = "C", requires = "gamma")]
    pub c: Option<f64>,
    #[arg(long, requires = "c")]
    pub gamma: Option<f64>,
    /// Comma-separated C values for nested selection.
    #[arg(long, value_delimiter = ',', conflicts_with = "c")]
    pub grid_c: Option<Vec<f64>>,
    /// Comma-separated gamma values for nested selection.
    #[arg(long, value_delimiter = ',', conflicts_with = "c")]
    pub grid_gamma: Option<Vec<f64>>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report TSV; a JSON copy is written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// TSV whose first two columns are host and virus ids.
    #[arg(long, requires_all = ["hosts", "viruses"], conflicts_with = "host_sequence")]
    pub pairs: Option<PathBuf>,
    #[arg(long)]
    pub hosts: Option<PathBuf>,
    #[arg(long)]
    pub viruses: Option<PathBuf>,
    #[arg(long, requires = "virus_sequence")]
    pub host_sequence: Option<String>,
    #[arg(long, requires = "host_sequence")]
    pub virus_sequence: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: IpAddr,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub families: u32,
    #[arg(long, default_value_t = 10)]
    pub per_family: usize,
    #[arg(long, default_value_t = 75)]
    pub hosts: usize,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Featurize(a) => featurize(&a),
        Command::BuildDataset(a) => build_dataset(&a),
        Command::Train(a) => train(&a),
        Command::Crossval(a) => crossval(&a),
        Command::Predict(a) => predict(&a),
        Command::Serve(a) => serve(&a),
        Command::Synth(a) => synth(&a),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn featurize_file(input: &Path, role: Role, out: &Path) -> Result<()> {
    let load = load_records(input, role)?;
    let mut rows: Vec<(String, TriadVector)> = Vec::with_capacity(load.records.len());
    for r in &load.records {
        if r.sequence.len() < 3 {
            warn!(
                "{}: {} is shorter than a triad; features are all zero",
                input.display(),
                r.id
            );
        }
        rows.push((r.id.clone(), protein_features(&r.sequence)?));
    }
    write_file(out, &write_feature_tsv(rows.iter().map(|(id, v)| (id.as_str(), v))))?;
    info!("wrote {} feature rows to {}", rows.len(), out.display());
    Ok(())
}

fn featurize(a: &FeaturizeArgs) -> Result<()> {
    featurize_file(&a.hosts, Role::Host, &a.out_dir.join("hosts.features.tsv"))?;
    featurize_file(&a.viruses, Role::Pathogen, &a.out_dir.join("viruses.features.tsv"))
}

fn build_dataset(a: &BuildDatasetArgs) -> Result<()> {
    let table = load_table(&a.interactions, &a.hosts, &a.viruses)?;
    let config = SamplingConfig {
        mode: a.mode,
        threshold: a.threshold,
        count: a.count,
        seed: a.seed,
    };
    config.validate()?;
    let needs_matrix = a.mode == SamplingMode::DeNovo || a.weights;
    let d = if needs_matrix {
        let default_dir = a.out.parent().map(Path::to_path_buf).unwrap_or_default();
        let dir = a.cache_dir.clone().unwrap_or(default_dir);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Some(cached_dissimilarity(&table, &ScoringParams::default(), Some(&dir))?)
    } else {
        None
    };
    let dataset = match &a.match_counts {
        Some(reference) => build_matched_dataset(&table, d.as_ref(), &config, &read_dataset(reference)?)?,
        None => build_dataset_with(&table, d.as_ref(), &config)?,
    };
    write_file(&a.out, &write_dataset_tsv(&dataset))?;
    info!(
        "wrote {} examples ({} positives) to {}",
        dataset.len(),
        table.n_positives(),
        a.out.display()
    );
    Ok(())
}

fn load_examples(
    dataset: &Path,
    features: &FeatureInputs,
) -> Result<(Vec<crate::sampling::PairExample>, Vec<Vec<f64>>)> {
    let ds = read_dataset(dataset)?;
    let hosts = read_feature_tsv(&features.host_features)?;
    let viruses = read_feature_tsv(&features.virus_features)?;
    let x = assemble_pairs(&ds, &hosts, &viruses)?;
    Ok((ds, x))
}

fn train(a: &TrainArgs) -> Result<()> {
    let (ds, x) = load_examples(&a.dataset, &a.features)?;
    let y = ds.iter().map(|e| e.label.sign()).collect();
    let w: Vec<f64> = ds.iter().map(|e| e.weight).collect();
    let mut model = fit(x, y, &w, &a.solver.params(a.c, a.gamma))?;
    model.meta.threshold = a.threshold;
    let diag = &model.diagnostics;
    println!(
        "iterations {}\tconverged {}\tkkt_gap {:.3e}\tdual_objective {:.6}\tsupport_vectors {}",
        diag.iterations,
        diag.converged,
        diag.violation,
        model.dual_objective,
        model.support.len()
    );
    save_model(&model, &a.out)?;
    if a.strict && !model.diagnostics.converged {
        return Err(Error::NotConverged(model.diagnostics.iterations));
    }
    Ok(())
}

fn crossval(a: &CrossvalArgs) -> Result<()> {
    let (train_ds, train_x) = load_examples(&a.dataset, &a.features)?;
    let test = match &a.test_dataset {
        Some(p) => Some(load_examples(p, &a.features)?),
        None => None,
    };
    let selection = match (a.c, a.gamma) {
        (Some(c), Some(gamma)) => Selection::Fixed { c, gamma },
        _ => {
            let grid = match (&a.grid_c, &a.grid_gamma) {
                (None, None) => default_grid(),
                (cs, gs) => {
                    let full = default_grid();
                    let cs = cs.clone().unwrap_or_else(|| dedup(full.iter().map(|p| p.0)));
                    let gs = gs.clone().unwrap_or_else(|| dedup(full.iter().map(|p| p.1)));
                    cs.iter().flat_map(|&c| gs.iter().map(move |&g| (c, g))).collect()
                }
            };
            Selection::Grid(grid)
        }
    };
    let base = a.solver.params(1.0, 1.0);
    let config = CvConfig {
        selection,
        mode: a.solver.mode,
        seed: a.seed,
        base,
    };
    let train_set = Examples::new(&train_ds, &train_x)?;
    let report = match &test {
        Some((ds, x)) => run_logo_paired(train_set, Examples::new(ds, x)?, &config)?,
        None => run_logo_paired(train_set, train_set, &config)?,
    };
    let tsv = report.to_tsv();
    write_file(&a.out, &tsv)?;
    write_file(&a.out.with_extension("json"), &report.to_json())?;
    print!("{tsv}");
    Ok(())
}

fn dedup(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn predict(a: &PredictArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let mut out = String::from("host_id\tvirus_id\tscore\tlabel\n");
    match (&a.pairs, &a.host_sequence, &a.virus_sequence) {
        (Some(pairs), _, _) => {
            let (Some(hosts), Some(viruses)) = (&a.hosts, &a.viruses) else {
                return Err(Error::Config("--pairs needs --hosts and --viruses".into()));
            };
            let sequences = |path: &Path, role| -> Result<std::collections::HashMap<String, String>> {
                Ok(load_records(path, role)?
                    .records
                    .into_iter()
                    .map(|r| (r.id, r.sequence))
                    .collect())
            };
            let (hosts, viruses) = (sequences(hosts, Role::Host)?, sequences(viruses, Role::Pathogen)?);
            let text = std::fs::read_to_string(pairs).map_err(|e| Error::io(pairs, e))?;
            for (idx, line) in text.lines().enumerate() {
                let mut fields = line.split('\t');
                let (Some(h), Some(v)) = (fields.next(), fields.next()) else {
                    if line.trim().is_empty() {
                        continue;
                    }
                    return Err(Error::parse(idx + 1, "expected host_id<TAB>virus_id"));
                };
                let (Some(hs), Some(vs)) = (hosts.get(h), viruses.get(v)) else {
                    if idx == 0 {
                        continue; // header
                    }
                    let (role, id) = if hosts.contains_key(h) {
                        ("virus", v)
                    } else {
                        ("host", h)
                    };
                    return Err(Error::UnresolvedId {
                        role,
                        id: id.to_string(),
                    });
                };
                let score = score_sequences(&model, hs, vs)?;
                writeln!(out, "{h}\t{v}\t{score}\t{:+}", sign_label(score)).unwrap();
            }
        }
        (None, Some(hs), Some(vs)) => {
            let score = score_sequences(&model, hs, vs)?;
            writeln!(out, "-\t-\t{score}\t{:+}", sign_label(score)).unwrap();
        }
        _ => {
            return Err(Error::Config(
                "give --pairs with --hosts/--viruses, or --host-sequence with --virus-sequence".into(),
            ))
        }
    }
    match &a.out {
        Some(path) => write_file(path, &out),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

fn serve(a: &ServeArgs) -> Result<()> {
    if !a.model.exists() {
        return Err(Error::io(
            &a.model,
            std::io::Error::new(std::io::ErrorKind::NotFound, "model file not found"),
        ));
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::io("tokio runtime", e))?;
    let addr = SocketAddr::new(a.bind, a.port);
    runtime
        .block_on(crate::serve::run(a.model.clone(), addr))
        .map_err(|e| Error::io(addr.to_string(), e))
}

fn synth(a: &SynthArgs) -> Result<()> {
    let config = SynthConfig {
        n_families: a.families,
        per_family: a.per_family,
        n_hosts: a.hosts,
        seed: a.seed,
        ..SynthConfig::default()
    };
    let data = generate(&config)?;
    data.write_to(&a.out_dir)?;
    info!(
        "{} hosts, {} viruses, {} observed interactions in {}",
        data.hosts.len(),
        data.viruses.len(),
        data.positives.len(),
        a.out_dir.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn fixed_c_requires_gamma() {
        let parsed = Cli::try_parse_from([
            "hpi",
            "crossval",
            "--dataset",
            "d",
            "--host-features",
            "h",
            "--virus-features",
            "v",
            "--C",
            "10",
            "--out",
            "r",
        ]);
        assert!(parsed.is_err());
    }

    #[test]
    fn count_policy_flag() {
        let cli = Cli::try_parse_from([
            "hpi",
            "build-dataset",
            "--interactions",
            "i",
            "--hosts",
            "h",
            "--viruses",
            "v",
            "--count",
            "ratio:1",
            "--out",
            "o",
        ])
        .unwrap();
        match cli.command {
            Command::BuildDataset(a) => {
                assert_eq!(a.count, CountPolicy::Ratio(1.0));
                assert_eq!(a.seed, 0);
            }
            other => panic!("{other:?}"),
        }
    }
}
