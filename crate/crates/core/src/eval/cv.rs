//! Leave-one-group-out evaluation with nested 2-fold hyperparameter search.

use std::collections::BTreeSet;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::metrics::{auc_pr, auc_roc, ScoredLabels};
use crate::error::{Error, Result};
use crate::sampling::{Label, PairExample};
use crate::svm::{fit, PenaltyMode, SvmParams};

const SPLIT_ATTEMPTS: u64 = 10;

/// `(C, gamma)` grid used when none is given: brackets `C = 10, gamma = 0.1`.
pub fn default_grid() -> Vec<(f64, f64)> {
    let mut grid = Vec::new();
    for c in [0.1, 1.0, 10.0, 100.0] {
        for g in [0.01, 0.1, 1.0] {
            grid.push((c, g));
        }
    }
    grid
}

#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    /// Skip nested selection and train every fold with these values.
    Fixed {
        c: f64,
        gamma: f64,
    },
    Grid(Vec<(f64, f64)>),
}

/// Examples with their pair feature vectors, index-aligned.
#[derive(Debug, Clone, Copy)]
pub struct Examples<'a> {
    pub examples: &'a [PairExample],
    pub x: &'a [Vec<f64>],
}

impl<'a> Examples<'a> {
    pub fn new(examples: &'a [PairExample], x: &'a [Vec<f64>]) -> Result<Self> {
        if examples.len() != x.len() {
            return Err(Error::Dimension {
                expected: examples.len(),
                actual: x.len(),
            });
        }
        Ok(Examples { examples, x })
    }

    pub fn groups(&self) -> BTreeSet<u32> {
        self.examples.iter().map(|e| e.group).collect()
    }

    fn fit(&self, idx: &[usize], params: &SvmParams) -> Result<crate::svm::SvmModel> {
        let x = idx.iter().map(|&i| self.x[i].clone()).collect();
        let y = idx.iter().map(|&i| self.examples[i].label.sign()).collect();
        let w: Vec<f64> = idx.iter().map(|&i| self.examples[i].weight).collect();
        fit(x, y, &w, params)
    }

    fn score(&self, model: &crate::svm::SvmModel, idx: &[usize]) -> Result<ScoredLabels> {
        let scores = idx
            .iter()
            .map(|&i| model.decision_function(&self.x[i]))
            .collect::<Result<Vec<_>>>()?;
        let labels: Vec<Label> = idx.iter().map(|&i| self.examples[i].label).collect();
        ScoredLabels::new(&scores, &labels)
    }
}

/// Split into `(train, test)` where the test side is exactly group `g`.
pub fn logo_split(dataset: &[PairExample], g: u32) -> Result<(Vec<&PairExample>, Vec<&PairExample>)> {
    let (test, train): (Vec<_>, Vec<_>) = dataset.iter().partition(|e| e.group == g);
    if test.is_empty() {
        return Err(Error::EmptyGroup(g));
    }
    Ok((train, test))
}

fn logo_indices(examples: &[PairExample], g: u32) -> (Vec<usize>, Vec<usize>) {
    (0..examples.len()).partition(|&i| examples[i].group != g)
}

/// Stratified, seeded 2-fold split of `idx`. Retries with fresh permutations
/// until both folds contain both classes.
fn stratified_halves(data: &Examples, idx: &[usize], seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    for attempt in 0..SPLIT_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for label in [Label::Positive, Label::Negative] {
            let mut class: Vec<usize> = idx
                .iter()
                .copied()
                .filter(|&i| data.examples[i].label == label)
                .collect();
            class.shuffle(&mut rng);
            for (k, i) in class.into_iter().enumerate() {
                if k % 2 == 0 {
                    a.push(i);
                } else {
                    b.push(i);
                }
            }
        }
        let has_both = |f: &[usize]| {
            f.iter().any(|&i| data.examples[i].label == Label::Positive)
                && f.iter().any(|&i| data.examples[i].label == Label::Negative)
        };
        if has_both(&a) && has_both(&b) {
            a.sort_unstable();
            b.sort_unstable();
            return Ok((a, b));
        }
    }
    Err(Error::FoldMissingClass)
}

/// Mean 2-fold AUC-ROC for one grid point.
fn two_fold_auc(data: &Examples, folds: &(Vec<usize>, Vec<usize>), params: &SvmParams) -> Result<f64> {
    let (a, b) = folds;
    let ab = auc_roc(&data.score(&data.fit(a, params)?, b)?)?;
    let ba = auc_roc(&data.score(&data.fit(b, params)?, a)?)?;
    Ok((ab + ba) / 2.0)
}

/// Pick `(C, gamma)` by nested 2-fold cross-validation on `train`.
///
/// Highest mean AUC-ROC wins; ties go to the smaller `C`, then the smaller
/// `gamma`.
pub fn nested_select(
    data: &Examples,
    train: &[usize],
    grid: &[(f64, f64)],
    base: &SvmParams,
    seed: u64,
) -> Result<(f64, f64)> {
    if grid.is_empty() {
        return Err(Error::Config("empty hyperparameter grid".into()));
    }
    let folds = stratified_halves(data, train, seed)?;
    let mut ordered = grid.to_vec();
    ordered.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let scores = ordered
        .par_iter()
        .map(|&(c, gamma)| {
            let params = SvmParams {
                c,
                gamma,
                ..base.clone()
            };
            two_fold_auc(data, &folds, &params)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = k;
        }
    }
    Ok(ordered[best])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupResult {
    pub group: u32,
    pub n_pos: usize,
    pub n_neg: usize,
    pub c: f64,
    pub gamma: f64,
    /// `None` when the test fold holds a single class.
    pub auc_roc: Option<f64>,
    pub auc_pr: Option<f64>,
}

impl GroupResult {
    pub fn size(&self) -> usize {
        self.n_pos + self.n_neg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub rows: Vec<GroupResult>,
    pub weighted_avg_roc: Option<f64>,
    pub weighted_avg_pr: Option<f64>,
}

/// Test-size weighted mean over rows where the metric is defined.
pub fn weighted_average(rows: &[GroupResult], metric: impl Fn(&GroupResult) -> Option<f64>) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for r in rows {
        if let Some(v) = metric(r) {
            num += r.size() as f64 * v;
            den += r.size() as f64;
        }
    }
    (den > 0.0).then(|| num / den)
}

impl CvReport {
    pub fn from_rows(rows: Vec<GroupResult>) -> Self {
        let weighted_avg_roc = weighted_average(&rows, |r| r.auc_roc);
        let weighted_avg_pr = weighted_average(&rows, |r| r.auc_pr);
        CvReport {
            rows,
            weighted_avg_roc,
            weighted_avg_pr,
        }
    }

    pub fn to_tsv(&self) -> String {
        fn fmt(v: Option<f64>) -> String {
            v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
        }
        let mut out = String::from("group\tP\tN\tC\tgamma\tauc_roc\tauc_pr\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                r.group,
                r.n_pos,
                r.n_neg,
                r.c,
                r.gamma,
                fmt(r.auc_roc),
                fmt(r.auc_pr)
            ));
        }
        let (p, n) = self.rows.iter().fold((0, 0), |(p, n), r| (p + r.n_pos, n + r.n_neg));
        out.push_str(&format!(
            "weighted_average\t{p}\t{n}\t-\t-\t{}\t{}\n",
            fmt(self.weighted_avg_roc),
            fmt(self.weighted_avg_pr)
        ));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct CvConfig {
    pub selection: Selection,
    pub mode: PenaltyMode,
    pub seed: u64,
    /// Solver settings; `c` and `gamma` are overridden per fold.
    pub base: SvmParams,
}

impl CvConfig {
    pub fn fixed(c: f64, gamma: f64, mode: PenaltyMode) -> Self {
        CvConfig {
            selection: Selection::Fixed { c, gamma },
            mode,
            seed: 0,
            base: SvmParams::new(c, gamma, mode),
        }
    }
}

/// Leave-one-group-out over `dataset`.
pub fn run_logo(dataset: Examples, config: &CvConfig) -> Result<CvReport> {
    run_logo_paired(dataset, dataset, config)
}

/// Leave-one-group-out where training folds come from `train_set` and test
/// folds from `test_set`: for each group `g` of `test_set`, train on every
/// example of `train_set` outside `g` and evaluate on the examples of
/// `test_set` in `g`. Comparing models trained on different negative sets
/// against the same test folds uses this form.
pub fn run_logo_paired(train_set: Examples, test_set: Examples, config: &CvConfig) -> Result<CvReport> {
    let groups: Vec<u32> = test_set.groups().into_iter().collect();
    let mut base = SvmParams {
        mode: config.mode,
        ..config.base.clone()
    };
    base.cache_bytes /= rayon::current_num_threads().clamp(1, groups.len().max(1));

    let rows = groups
        .par_iter()
        .map(|&g| {
            let (train_idx, _) = logo_indices(train_set.examples, g);
            let (_, test_idx) = logo_indices(test_set.examples, g);
            let (c, gamma) = match &config.selection {
                Selection::Fixed { c, gamma } => (*c, *gamma),
                Selection::Grid(grid) => nested_select(&train_set, &train_idx, grid, &base, config.seed ^ g as u64)?,
            };
            let params = SvmParams {
                c,
                gamma,
                ..base.clone()
            };
            let model = train_set.fit(&train_idx, &params)?;
            let scored = test_set.score(&model, &test_idx)?;
            let (n_pos, n_neg) = (scored.n_pos(), scored.n_neg());
            let (roc, pr) = if n_pos > 0 && n_neg > 0 {
                (Some(auc_roc(&scored)?), Some(auc_pr(&scored)?))
            } else {
                warn!("group {g}: test fold has a single class; AUCs undefined");
                (None, None)
            };
            Ok(GroupResult {
                group: g,
                n_pos,
                n_neg,
                c,
                gamma,
                auc_roc: roc,
                auc_pr: pr,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CvReport::from_rows(rows))
}
