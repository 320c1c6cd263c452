//! ROC/PR metrics and the leave-one-group-out protocol.

mod cv;
mod metrics;

pub use cv::{
    default_grid, logo_split, nested_select, run_logo, run_logo_paired, weighted_average, CvConfig, CvReport, Examples,
    GroupResult, Selection,
};
pub use metrics::{auc_pr, auc_roc, confusion_at_threshold, roc_curve, Confusion, ScoredLabels};
