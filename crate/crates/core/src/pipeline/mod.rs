//! Experiment harness: balanced dataset generation, the inductive baseline,
//! the incremental split protocol around S4VM, per-class error accounting and
//! the Werner sweep, plus their CSV and manifest outputs.

mod experiments;
mod generate;
mod report;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::LabelVector;
use crate::s4vm::S4vmParams;
use crate::steering::SdpSettings;
use crate::svm::{GridSpec, SvmParams};

pub use experiments::{
    compare_runs, compare_with_unlabeled, labeled_sets, msplit_runs, run_incremental_s4vm,
    run_inductive_baseline, unlabeled_set, werner_sweep, ComparisonReport, ComparisonRun,
    MsplitRow, WernerPoint, WernerSweepReport,
};
pub use generate::{generate_balanced_dataset, GeneratedDataset, GENERATION_DRAW_FACTOR};
pub use report::{
    content_hash, write_comparison_csv, write_msplit_csv, write_werner_csv, InputDigest, Manifest,
    NOT_APPLICABLE,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Measurements per SDP trial.
    pub m: usize,
    /// Labeled set size.
    pub l: usize,
    /// Unlabeled set size.
    pub u: usize,
    /// Number of unlabeled chunks `M`.
    pub splits: usize,
    pub trials: usize,
    /// Labeled-set draws per seed.
    pub n_runs: usize,
    pub seeds: Vec<u64>,
    pub grid: GridSpec,
    pub s4vm: S4vmParams,
    pub sdp: SdpSettings,
    /// `C₂ / C₁` handed to S4VM.
    pub c2_ratio: f64,
    /// Folds of the per-chunk grid search.
    pub incremental_folds: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            m: 2,
            l: 30,
            u: 500,
            splits: 2,
            trials: 100,
            n_runs: 10,
            seeds: vec![1],
            grid: GridSpec::default(),
            s4vm: S4vmParams::default(),
            sdp: SdpSettings::default(),
            c2_ratio: 0.1,
            incremental_folds: 5,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.m == 0 {
            return bad("measurement count m must be at least 1".into());
        }
        if self.l < 2 || self.l % 2 != 0 {
            return bad(format!(
                "labeled count l = {} must be even and at least 2",
                self.l
            ));
        }
        self.validate_splits(self.u)?;
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n_runs == 0 {
            return bad("n_runs must be at least 1".into());
        }
        if self.seeds.is_empty() {
            return bad("seed list is empty".into());
        }
        if !(self.c2_ratio > 0.0 && self.c2_ratio.is_finite()) {
            return bad("c2_ratio must be positive".into());
        }
        if self.incremental_folds < 2 {
            return bad("incremental_folds must be at least 2".into());
        }
        self.grid.validate()?;
        self.s4vm.validate()?;
        self.sdp.validate()
    }

    /// `M` divides `u` and every chunk holds at least two points.
    pub fn validate_splits(&self, u: usize) -> Result<()> {
        if self.splits == 0 || u % self.splits != 0 {
            return Err(Error::Config(format!(
                "split count M = {} must divide u = {u}",
                self.splits
            )));
        }
        if u / self.splits < 2 {
            return Err(Error::Config(format!(
                "chunks of size {} are too small; need u/M ≥ 2",
                u / self.splits
            )));
        }
        Ok(())
    }
}

/// Misclassification rates against ground truth. Class errors are `None`
/// when the class is absent from the truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub overall_error: f64,
    pub positive_error: Option<f64>,
    pub negative_error: Option<f64>,
    /// One entry per unlabeled chunk; a single entry for one-shot predictors.
    pub per_split_errors: Vec<f64>,
    pub fallback_used: bool,
    /// Every S4VM call kept `min J(output) ≥ min J(ysvm)`.
    pub safety_held: bool,
    pub misclassified: usize,
    pub total: usize,
    /// Folds of the grid search that fixed the first model.
    pub cv_folds: usize,
    /// Hyperparameters of the final model of each chunk.
    pub params: Vec<SvmParams>,
    pub predictions: LabelVector,
}

/// Overall and per-class error of `predicted` against `truth`.
pub fn class_errors(predicted: &LabelVector, truth: &LabelVector) -> Result<ErrorReport> {
    if predicted.len() != truth.len() {
        return Err(Error::domain(format!(
            "{} predictions for {} truth labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::domain("cannot score an empty prediction"));
    }
    let mut wrong = [0usize; 2];
    let mut count = [0usize; 2];
    for (p, t) in predicted.iter().zip(truth.iter()) {
        let k = usize::from(t < 0);
        count[k] += 1;
        if p != t {
            wrong[k] += 1;
        }
    }
    let rate = |k: usize| (count[k] > 0).then(|| wrong[k] as f64 / count[k] as f64);
    let misclassified = wrong[0] + wrong[1];
    let overall = misclassified as f64 / truth.len() as f64;
    Ok(ErrorReport {
        overall_error: overall,
        positive_error: rate(0),
        negative_error: rate(1),
        per_split_errors: vec![overall],
        fallback_used: false,
        safety_held: true,
        misclassified,
        total: truth.len(),
        cv_folds: 0,
        params: Vec::new(),
        predictions: predicted.clone(),
    })
}
