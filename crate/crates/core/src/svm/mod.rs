//! Soft-margin RBF support vector machine with per-example box constraints.
//!
//! The dual is `max sum(a) - 1/2 sum_ij y_i y_j a_i a_j K(x_i, x_j)` subject
//! to `sum(y_i a_i) = 0` and `0 <= a_i <= B_i`. In the unweighted penalty mode
//! `B_i` is `C/P` for positives and `C/N` for negatives; the weighted mode
//! further multiplies each bound by the example's confidence weight.

mod io;
mod kernel;
mod solver;

use std::fmt;
use std::str::FromStr;

pub use io::{load_model, parse_model, save_model, write_model, MODEL_VERSION};
pub use kernel::rbf_kernel;

use crate::error::{Error, Result};
use kernel::rbf_unchecked;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PenaltyMode {
    #[default]
    Unweighted,
    Weighted,
}

impl fmt::Display for PenaltyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PenaltyMode::Unweighted => "unweighted",
            PenaltyMode::Weighted => "weighted",
        })
    }
}

impl FromStr for PenaltyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unweighted" => Ok(PenaltyMode::Unweighted),
            "weighted" => Ok(PenaltyMode::Weighted),
            other => Err(Error::Config(format!("unknown penalty mode {other:?}"))),
        }
    }
}

/// Per-example upper bounds on the dual variables.
///
/// `labels` are `+1`/`-1`. Weights are ignored in unweighted mode but must
/// still be positive.
pub fn effective_boxes(labels: &[f64], weights: &[f64], c: f64, mode: PenaltyMode) -> Result<Vec<f64>> {
    if labels.len() != weights.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            actual: weights.len(),
        });
    }
    if let Some(w) = weights.iter().find(|&&w| w.is_nan() || w <= 0.0) {
        return Err(Error::InvalidProblem(format!("weight {w} is not positive")));
    }
    if c.is_nan() || c <= 0.0 {
        return Err(Error::InvalidProblem("C must be positive".into()));
    }
    let p = labels.iter().filter(|&&y| y > 0.0).count();
    let n = labels.len() - p;
    if p == 0 || n == 0 {
        return Err(Error::SingleClass);
    }
    let (cp, cn) = (c / p as f64, c / n as f64);
    Ok(labels
        .iter()
        .zip(weights)
        .map(|(&y, &w)| {
            let base = if y > 0.0 { cp } else { cn };
            match mode {
                PenaltyMode::Unweighted => base,
                PenaltyMode::Weighted => base * w,
            }
        })
        .collect())
}

pub const DEFAULT_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_MAX_PASSES: usize = 1000;
pub const DEFAULT_CACHE_BYTES: usize = 512 << 20;

#[derive(Debug, Clone)]
pub struct TrainingProblem {
    pub x: Vec<Vec<f64>>,
    /// `+1.0` or `-1.0`.
    pub y: Vec<f64>,
    pub boxes: Vec<f64>,
    pub gamma: f64,
    pub tolerance: f64,
    /// Iteration cap is `max_passes * n`.
    pub max_passes: usize,
    pub cache_bytes: usize,
}

impl TrainingProblem {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>, boxes: Vec<f64>, gamma: f64) -> Self {
        TrainingProblem {
            x,
            y,
            boxes,
            gamma,
            tolerance: DEFAULT_TOLERANCE,
            max_passes: DEFAULT_MAX_PASSES,
            cache_bytes: DEFAULT_CACHE_BYTES,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x.len();
        if self.y.len() != n || self.boxes.len() != n {
            return Err(Error::InvalidProblem("x, y and boxes differ in length".into()));
        }
        if n < 2 {
            return Err(Error::InvalidProblem("need at least two examples".into()));
        }
        if self.y.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidProblem("labels must be +1 or -1".into()));
        }
        if !self.y.iter().any(|&y| y > 0.0) || !self.y.iter().any(|&y| y < 0.0) {
            return Err(Error::SingleClass);
        }
        if self.boxes.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
            return Err(Error::InvalidProblem("every box bound must be positive".into()));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidProblem("gamma must be positive".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidProblem("tolerance must be positive".into()));
        }
        let dim = self.x[0].len();
        if let Some(bad) = self.x.iter().find(|v| v.len() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                actual: bad.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportVector {
    /// `alpha_i * y_i`.
    pub coef: f64,
    pub x: Vec<f64>,
}

/// Training provenance stored with the model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMeta {
    pub mode: PenaltyMode,
    pub c: f64,
    /// Negative-sampling threshold of the training data, when known.
    pub threshold: Option<f64>,
    pub n_pos: usize,
    pub n_neg: usize,
}

impl Default for ModelMeta {
    fn default() -> Self {
        ModelMeta {
            mode: PenaltyMode::Unweighted,
            c: 1.0,
            threshold: None,
            n_pos: 0,
            n_neg: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub gamma: f64,
    pub bias: f64,
    pub dim: usize,
    pub support: Vec<SupportVector>,
    pub dual_objective: f64,
    pub meta: ModelMeta,
    pub diagnostics: TrainDiagnostics,
}

/// Result of [`train_full`]: the model plus the full dual solution.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: SvmModel,
    pub alpha: Vec<f64>,
    /// Dual objective after each SMO update, when tracing was requested.
    pub trace: Vec<f64>,
}

pub fn train(problem: &TrainingProblem) -> Result<SvmModel> {
    Ok(train_full(problem, false)?.model)
}

/// Train and keep every dual variable; with `trace` set, the dual objective
/// is also recorded after each update.
pub fn train_full(problem: &TrainingProblem, trace: bool) -> Result<TrainOutcome> {
    problem.validate()?;
    let n = problem.len();
    let mut objective_trace = Vec::new();
    let sol = solver::Smo::new(problem).solve(
        problem.tolerance,
        problem.max_passes.saturating_mul(n),
        trace.then_some(&mut objective_trace),
    );
    if !sol.converged {
        log::warn!(
            "SMO stopped after {} iterations with KKT gap {:.3e} > {:.1e}",
            sol.iterations,
            sol.violation,
            problem.tolerance
        );
    }
    let support = sol
        .alpha
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0.0)
        .map(|(i, &a)| SupportVector {
            coef: a * problem.y[i],
            x: problem.x[i].clone(),
        })
        .collect();
    let n_pos = problem.y.iter().filter(|&&y| y > 0.0).count();
    let model = SvmModel {
        gamma: problem.gamma,
        bias: sol.bias,
        dim: problem.x[0].len(),
        support,
        dual_objective: sol.dual_objective,
        meta: ModelMeta {
            n_pos,
            n_neg: n - n_pos,
            ..ModelMeta::default()
        },
        diagnostics: TrainDiagnostics {
            iterations: sol.iterations,
            converged: sol.converged,
            violation: sol.violation,
        },
    };
    Ok(TrainOutcome {
        model,
        alpha: sol.alpha,
        trace: objective_trace,
    })
}

/// Hyperparameters for [`fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    pub mode: PenaltyMode,
    pub tolerance: f64,
    pub max_passes: usize,
    pub cache_bytes: usize,
}

impl SvmParams {
    pub fn new(c: f64, gamma: f64, mode: PenaltyMode) -> Self {
        SvmParams {
            c,
            gamma,
            mode,
            tolerance: DEFAULT_TOLERANCE,
            max_passes: DEFAULT_MAX_PASSES,
            cache_bytes: DEFAULT_CACHE_BYTES,
        }
    }
}

/// Compute boxes from labels, weights and `C`, then train.
pub fn fit(x: Vec<Vec<f64>>, y: Vec<f64>, weights: &[f64], params: &SvmParams) -> Result<SvmModel> {
    let boxes = effective_boxes(&y, weights, params.c, params.mode)?;
    let problem = TrainingProblem {
        x,
        y,
        boxes,
        gamma: params.gamma,
        tolerance: params.tolerance,
        max_passes: params.max_passes,
        cache_bytes: params.cache_bytes,
    };
    let mut model = train(&problem)?;
    model.meta.mode = params.mode;
    model.meta.c = params.c;
    Ok(model)
}

impl SvmModel {
    /// `f(x) = sum_k coef_k K(sv_k, x) + b`.
    pub fn decision_function(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: x.len(),
            });
        }
        Ok(self
            .support
            .iter()
            .map(|sv| sv.coef * rbf_unchecked(&sv.x, x, self.gamma))
            .sum::<f64>()
            + self.bias)
    }

    /// `+1` when the score is strictly positive, else `-1`.
    pub fn predict(&self, x: &[f64]) -> Result<i8> {
        Ok(sign_label(self.decision_function(x)?))
    }
}

pub fn sign_label(score: f64) -> i8 {
    if score > 0.0 {
        1
    } else {
        -1
    }
}
