//! Threshold counts, ROC and precision-recall areas.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::sampling::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    /// Recall, `TP / (TP + FN)`.
    pub fn tpr(&self) -> f64 {
        self.tp as f64 / (self.tp + self.fn_) as f64
    }

    /// `FP / (FP + TN)`.
    pub fn fpr(&self) -> f64 {
        self.fp as f64 / (self.fp + self.tn) as f64
    }

    pub fn precision(&self) -> f64 {
        self.tp as f64 / (self.tp + self.fp) as f64
    }
}

/// `(score, label)` pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoredLabels(pub Vec<(f64, Label)>);

impl ScoredLabels {
    pub fn new(scores: &[f64], labels: &[Label]) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::Dimension {
                expected: scores.len(),
                actual: labels.len(),
            });
        }
        if scores.iter().any(|s| s.is_nan()) {
            return Err(Error::UndefinedMetric("NaN score"));
        }
        Ok(ScoredLabels(
            scores.iter().copied().zip(labels.iter().copied()).collect(),
        ))
    }

    pub fn n_pos(&self) -> usize {
        self.0.iter().filter(|(_, l)| *l == Label::Positive).count()
    }

    pub fn n_neg(&self) -> usize {
        self.0.len() - self.n_pos()
    }

    /// Sorted by descending score.
    fn descending(&self) -> Vec<(f64, Label)> {
        let mut v = self.0.clone();
        v.sort_by(|a, b| b.0.total_cmp(&a.0));
        v
    }
}

/// Predict positive iff `score >= t`.
pub fn confusion_at_threshold(scored: &ScoredLabels, t: f64) -> Confusion {
    let mut c = Confusion::default();
    for &(s, l) in &scored.0 {
        match (s >= t, l) {
            (true, Label::Positive) => c.tp += 1,
            (true, Label::Negative) => c.fp += 1,
            (false, Label::Negative) => c.tn += 1,
            (false, Label::Positive) => c.fn_ += 1,
        }
    }
    c
}

/// Area under the ROC curve as the Mann-Whitney statistic: the probability
/// that a random positive outscores a random negative, ties counting half.
pub fn auc_roc(scored: &ScoredLabels) -> Result<f64> {
    let (p, n) = (scored.n_pos(), scored.n_neg());
    if p == 0 || n == 0 {
        return Err(Error::UndefinedMetric("AUC-ROC needs both classes"));
    }
    let mut v = scored.0.clone();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    // sum of mid-ranks (1-based) of positives
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j].0.total_cmp(&v[i].0) == Ordering::Equal {
            j += 1;
        }
        let mid_rank = (i + 1 + j) as f64 / 2.0;
        let pos_in_block = v[i..j].iter().filter(|(_, l)| *l == Label::Positive).count();
        rank_sum += mid_rank * pos_in_block as f64;
        i = j;
    }
    let (p, n) = (p as f64, n as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// ROC points `(FPR, TPR)` from `(0, 0)` to `(1, 1)`, one per distinct score.
pub fn roc_curve(scored: &ScoredLabels) -> Result<Vec<(f64, f64)>> {
    let (p, n) = (scored.n_pos() as f64, scored.n_neg() as f64);
    if p == 0.0 || n == 0.0 {
        return Err(Error::UndefinedMetric("ROC needs both classes"));
    }
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    for block in tie_blocks(&scored.descending()) {
        for (_, l) in block {
            match l {
                Label::Positive => tp += 1,
                Label::Negative => fp += 1,
            }
        }
        points.push((fp as f64 / n, tp as f64 / p));
    }
    Ok(points)
}

/// Area under the precision-recall curve as average precision: each
/// positive contributes the precision at the end of its tie block, divided
/// by the number of positives.
pub fn auc_pr(scored: &ScoredLabels) -> Result<f64> {
    let p = scored.n_pos();
    if p == 0 {
        return Err(Error::UndefinedMetric("AUC-PR needs at least one positive"));
    }
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut ap = 0.0;
    for block in tie_blocks(&scored.descending()) {
        let pos = block.iter().filter(|(_, l)| *l == Label::Positive).count();
        tp += pos;
        fp += block.len() - pos;
        if pos > 0 {
            ap += pos as f64 * tp as f64 / (tp + fp) as f64;
        }
    }
    Ok(ap / p as f64)
}

fn tie_blocks(sorted: &[(f64, Label)]) -> impl Iterator<Item = &[(f64, Label)]> {
    sorted.chunk_by(|a, b| a.0.total_cmp(&b.0) == Ordering::Equal)
}
