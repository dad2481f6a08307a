use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::generate_balanced_dataset;
use super::{class_errors, ErrorReport, ExperimentConfig};
use crate::error::{Error, Result};
use crate::labels::LabelVector;
use crate::qstate::{werner_state, werner_unsteerable_analytic, WernerParams};
use crate::rng::derive_seed;
use crate::s4vm::s4vm_predict;
use crate::svm::{grid_search, train, Dataset, GridSpec};

fn labels_of(data: &Dataset) -> LabelVector {
    LabelVector::new(data.labels().to_vec()).expect("dataset labels are ±1")
}

/// Grid search with `folds` capped at `l`, train on `labeled`, predict
/// `unlabeled` and score against its labels.
pub fn run_inductive_baseline(
    labeled: &Dataset,
    unlabeled: &Dataset,
    grid: &GridSpec,
    seed: u64,
) -> Result<ErrorReport> {
    if !labeled.has_both_classes() {
        return Err(Error::DegenerateData(
            "labeled set needs both classes".into(),
        ));
    }
    let folds = grid.folds.min(labeled.len());
    let best = grid_search(
        labeled,
        &grid.with_folds(folds),
        derive_seed(seed, "grid", 0),
    )?;
    let model = train(labeled, best.best)?;
    let pred = model.predict(unlabeled.features());
    let mut report = class_errors(&pred, &labels_of(unlabeled))?;
    report.cv_folds = folds;
    report.params = vec![best.best];
    Ok(report)
}

/// Splits `unlabeled` into `M` equal chunks in order. For chunk `k`, S4VM
/// labels it from every point known so far, a grid search over the known
/// points plus that pseudo-labeled chunk picks the hyperparameters, and the
/// retrained model's predictions become the chunk's labels for the following
/// chunks. The labels of `unlabeled` are used only for scoring.
pub fn run_incremental_s4vm(
    labeled: &Dataset,
    unlabeled: &Dataset,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<ErrorReport> {
    config.validate_splits(unlabeled.len())?;
    if !labeled.has_both_classes() {
        return Err(Error::DegenerateData(
            "labeled set needs both classes".into(),
        ));
    }
    let first_folds = config.grid.folds.min(labeled.len());
    let mut params = grid_search(
        labeled,
        &config.grid.with_folds(first_folds),
        derive_seed(seed, "grid", 0),
    )?
    .best;
    let size = unlabeled.len() / config.splits;
    let mut known = labeled.clone();
    let mut predictions = Vec::with_capacity(unlabeled.len());
    let mut per_split = Vec::with_capacity(config.splits);
    let mut chosen = Vec::with_capacity(config.splits);
    let mut fallback = false;
    let mut safe = true;
    for k in 0..config.splits {
        let idx: Vec<usize> = (k * size..(k + 1) * size).collect();
        let chunk = unlabeled.subset(&idx);
        let s4 = s4vm_predict(
            &known,
            chunk.features(),
            &config.s4vm.with_svm(params, config.c2_ratio),
            derive_seed(seed, "s4vm", k as u64),
        )?;
        fallback |= s4.fallback_used;
        safe &= s4.min_j_output >= s4.min_j_ysvm;
        let combined = known.concat(&chunk.with_labels(s4.final_labels.into_vec())?);
        let folds = config.incremental_folds.min(combined.len());
        params = grid_search(
            &combined,
            &config.grid.with_folds(folds),
            derive_seed(seed, "cv", k as u64),
        )?
        .best;
        let adopted = train(&combined, params)?.predict(chunk.features());
        per_split.push(class_errors(&adopted, &labels_of(&chunk))?.overall_error);
        chosen.push(params);
        known = known.concat(&chunk.with_labels(adopted.as_slice().to_vec())?);
        predictions.extend(adopted.iter());
    }
    let mut report = class_errors(&LabelVector::new(predictions)?, &labels_of(unlabeled))?;
    report.per_split_errors = per_split;
    report.fallback_used = fallback;
    report.safety_held = safe;
    report.cv_folds = first_folds;
    report.params = chosen;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRun {
    pub seed: u64,
    pub run_id: usize,
    pub svm: ErrorReport,
    pub s4vm: ErrorReport,
    /// SVM error minus S4VM error.
    pub difference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub config: ExperimentConfig,
    pub runs: Vec<ComparisonRun>,
    pub max_difference: f64,
    pub mean_difference: f64,
}

impl ComparisonReport {
    fn from_runs(config: &ExperimentConfig, runs: Vec<ComparisonRun>) -> Self {
        let max = runs
            .iter()
            .map(|r| r.difference)
            .fold(f64::NEG_INFINITY, f64::max);
        let mean = runs.iter().map(|r| r.difference).sum::<f64>() / runs.len() as f64;
        ComparisonReport {
            config: config.clone(),
            runs,
            max_difference: max,
            mean_difference: mean,
        }
    }

    pub fn mean_svm_error(&self) -> f64 {
        self.runs.iter().map(|r| r.svm.overall_error).sum::<f64>() / self.runs.len() as f64
    }

    pub fn mean_s4vm_error(&self) -> f64 {
        self.runs.iter().map(|r| r.s4vm.overall_error).sum::<f64>() / self.runs.len() as f64
    }
}

/// `n_runs` disjoint labeled sets for `seed`, cut from one balanced stream
/// of `n_runs·l` states: set `r` holds the `r`-th block of `l/2` states of
/// each label, in draw order.
pub fn labeled_sets(config: &ExperimentConfig, seed: u64) -> Result<Vec<Dataset>> {
    let half = config.l / 2;
    let pool = generate_balanced_dataset(
        config.l * config.n_runs,
        config.m,
        config.trials,
        &config.sdp,
        derive_seed(seed, "labeled", 0),
    )?
    .data;
    let pos: Vec<usize> = (0..pool.len()).filter(|&i| pool.labels()[i] == 1).collect();
    let neg: Vec<usize> = (0..pool.len())
        .filter(|&i| pool.labels()[i] == -1)
        .collect();
    Ok((0..config.n_runs)
        .map(|r| {
            let mut idx: Vec<usize> = pos[r * half..(r + 1) * half]
                .iter()
                .chain(&neg[r * half..(r + 1) * half])
                .copied()
                .collect();
            idx.sort_unstable();
            pool.subset(&idx)
        })
        .collect())
}

/// The unlabeled set for `seed`: `u` balanced SDP-labeled states.
pub fn unlabeled_set(config: &ExperimentConfig, seed: u64) -> Result<Dataset> {
    Ok(generate_balanced_dataset(
        config.u,
        config.m,
        config.trials,
        &config.sdp,
        derive_seed(seed, "unlabeled", 0),
    )?
    .data)
}

/// Baseline and incremental S4VM on `n_runs` labeled draws against one
/// fixed unlabeled set.
pub fn compare_with_unlabeled(
    config: &ExperimentConfig,
    unlabeled: &Dataset,
    seed: u64,
) -> Result<Vec<ComparisonRun>> {
    config.validate()?;
    config.validate_splits(unlabeled.len())?;
    let sets = labeled_sets(config, seed)?;
    sets.into_par_iter()
        .enumerate()
        .map(|(r, labeled)| {
            let run_seed = derive_seed(seed, "run", r as u64);
            let svm = run_inductive_baseline(&labeled, unlabeled, &config.grid, run_seed)?;
            let s4vm = run_incremental_s4vm(&labeled, unlabeled, config, run_seed)?;
            Ok(ComparisonRun {
                seed,
                run_id: r,
                difference: svm.overall_error - s4vm.overall_error,
                svm,
                s4vm,
            })
        })
        .collect()
}

/// For each seed, one unlabeled set of size `u` and `n_runs` labeled sets.
pub fn compare_runs(config: &ExperimentConfig) -> Result<ComparisonReport> {
    config.validate()?;
    let mut runs = Vec::new();
    for &seed in &config.seeds {
        let unlabeled = unlabeled_set(config, seed)?;
        runs.extend(compare_with_unlabeled(config, &unlabeled, seed)?);
    }
    Ok(ComparisonReport::from_runs(config, runs))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MsplitRow {
    pub seed: u64,
    pub run_id: usize,
    pub splits: usize,
    pub report: ErrorReport,
    /// Wall-clock of the incremental run; the only non-reproducible field.
    pub seconds: f64,
}

/// Incremental S4VM error and wall-clock for each split count. Cells run
/// one after another so the timings are comparable.
pub fn msplit_runs(config: &ExperimentConfig, split_counts: &[usize]) -> Result<Vec<MsplitRow>> {
    config.validate()?;
    for &splits in split_counts {
        ExperimentConfig {
            splits,
            ..config.clone()
        }
        .validate_splits(config.u)?;
    }
    let mut rows = Vec::new();
    for &seed in &config.seeds {
        let unlabeled = unlabeled_set(config, seed)?;
        for (r, labeled) in labeled_sets(config, seed)?.into_iter().enumerate() {
            for &splits in split_counts {
                let cfg = ExperimentConfig {
                    splits,
                    ..config.clone()
                };
                let start = Instant::now();
                let report = run_incremental_s4vm(
                    &labeled,
                    &unlabeled,
                    &cfg,
                    derive_seed(seed, "run", r as u64),
                )?;
                rows.push(MsplitRow {
                    seed,
                    run_id: r,
                    splits,
                    report,
                    seconds: start.elapsed().as_secs_f64(),
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WernerPoint {
    pub p: f64,
    pub truth: i8,
    pub svm_pred: i8,
    pub s4vm_pred: i8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WernerSweepReport {
    pub seed: u64,
    pub xi: f64,
    pub points: Vec<WernerPoint>,
    pub svm_accuracy: f64,
    pub s4vm_accuracy: f64,
    pub svm: ErrorReport,
    pub s4vm: ErrorReport,
}

/// Werner states on the grid `p_k = k/(n_points − 1)` with analytic truth,
/// classified from `l` SDP-labeled random states by the baseline and by
/// incremental S4VM with `config.splits` chunks.
pub fn werner_sweep(
    l: usize,
    xi: f64,
    n_points: usize,
    m: usize,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<WernerSweepReport> {
    if n_points < 2 {
        return Err(Error::domain("the sweep needs at least two points"));
    }
    let cfg = ExperimentConfig {
        l,
        m,
        u: n_points,
        ..config.clone()
    };
    cfg.validate()?;
    let mut features = Vec::with_capacity(n_points);
    let mut truth = Vec::with_capacity(n_points);
    let mut ps = Vec::with_capacity(n_points);
    for k in 0..n_points {
        let p = k as f64 / (n_points - 1) as f64;
        let w = WernerParams::new(p, xi)?;
        features.push(werner_state(w)?.feature_vector().0);
        truth.push(if werner_unsteerable_analytic(w) {
            1
        } else {
            -1
        });
        ps.push(p);
    }
    let unlabeled = Dataset::new(features, truth.clone())?;
    let labeled = labeled_sets(
        &ExperimentConfig {
            n_runs: 1,
            ..cfg.clone()
        },
        seed,
    )?
    .pop()
    .expect("one labeled set");
    let run_seed = derive_seed(seed, "run", 0);
    let svm = run_inductive_baseline(&labeled, &unlabeled, &cfg.grid, run_seed)?;
    let s4vm = run_incremental_s4vm(&labeled, &unlabeled, &cfg, run_seed)?;
    let points = (0..n_points)
        .map(|k| WernerPoint {
            p: ps[k],
            truth: truth[k],
            svm_pred: svm.predictions.get(k),
            s4vm_pred: s4vm.predictions.get(k),
        })
        .collect();
    Ok(WernerSweepReport {
        seed,
        xi,
        points,
        svm_accuracy: 1.0 - svm.overall_error,
        s4vm_accuracy: 1.0 - s4vm.overall_error,
        svm,
        s4vm,
    })
}
