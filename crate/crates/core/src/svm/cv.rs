use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::kernel::Gram;
use super::model::train_on_gram;
use super::smo::SmoSettings;
use super::{GridSpec, SvmParams};
use crate::error::{Error, Result};
use crate::labels::sign_label;
use crate::rng::rng_from_seed;

/// Fold index of every row. Each class is shuffled and dealt round-robin,
/// continuing the deal across classes, so fold sizes differ by at most one
/// and class counts per fold by at most one.
pub fn stratified_folds(labels: &[i8], folds: usize, seed: u64) -> Result<Vec<usize>> {
    let n = labels.len();
    if folds < 2 || folds > n {
        return Err(Error::domain(format!(
            "{folds} folds infeasible for {n} rows"
        )));
    }
    if !labels.contains(&1) || !labels.contains(&-1) {
        return Err(Error::domain("cross-validation needs both classes"));
    }
    let mut rng = rng_from_seed(seed);
    let mut assignment = vec![0; n];
    let mut next = 0;
    for class in [1i8, -1] {
        let mut idx: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

/// Held-out correct count over all folds for one `C` on a shared kernel.
fn cv_correct(
    gram: &Gram,
    data: &Dataset,
    c: f64,
    gamma: f64,
    assignment: &[usize],
    folds: usize,
    settings: &SmoSettings,
) -> Result<usize> {
    let mut correct = 0;
    for k in 0..folds {
        let train_idx: Vec<usize> = (0..data.len()).filter(|&i| assignment[i] != k).collect();
        let test_idx: Vec<usize> = (0..data.len()).filter(|&i| assignment[i] == k).collect();
        let train = data.subset(&train_idx);
        let predictions: Vec<i8> = if train.has_both_classes() {
            let sub = gram.restrict(&train_idx);
            let params = SvmParams { c, gamma };
            let (model, _) = train_on_gram(&sub, &train, params, &vec![c; train.len()], settings)?;
            test_idx
                .iter()
                .map(|&i| sign_label(model.decision_value(&data.features()[i])))
                .collect()
        } else {
            vec![train.labels()[0]; test_idx.len()]
        };
        correct += test_idx
            .iter()
            .zip(&predictions)
            .filter(|(&i, &p)| data.labels()[i] == p)
            .count();
    }
    Ok(correct)
}

/// Stratified k-fold accuracy: held-out correct predictions over `n`.
/// A fold whose training part holds one class predicts that class.
pub fn k_fold_cv(data: &Dataset, params: SvmParams, folds: usize, seed: u64) -> Result<f64> {
    params.validate()?;
    let assignment = stratified_folds(data.labels(), folds, seed)?;
    let gram = Gram::new(data.features(), params.gamma);
    let correct = cv_correct(
        &gram,
        data,
        params.c,
        params.gamma,
        &assignment,
        folds,
        &SmoSettings::default(),
    )?;
    Ok(correct as f64 / data.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridOutcome {
    pub best: SvmParams,
    pub accuracy: f64,
    pub folds: usize,
    /// Every evaluated point with its accuracy, ordered by `C` then `γ`.
    pub table: Vec<(SvmParams, f64)>,
}

/// Exhaustive CV over the grid on one shared fold assignment. Ties go to the
/// smallest `C`, then the smallest `γ`.
pub fn grid_search(data: &Dataset, grid: &GridSpec, seed: u64) -> Result<GridOutcome> {
    grid.validate()?;
    let assignment = stratified_folds(data.labels(), grid.folds, seed)?;
    let mut gammas = grid.gamma_values.clone();
    gammas.sort_by(f64::total_cmp);
    gammas.dedup();
    let mut cs = grid.c_values.clone();
    cs.sort_by(f64::total_cmp);
    cs.dedup();
    let grams: Vec<Gram> = gammas
        .par_iter()
        .map(|&g| Gram::new(data.features(), g))
        .collect();
    let points: Vec<(usize, usize)> = (0..cs.len())
        .flat_map(|ci| (0..gammas.len()).map(move |gi| (ci, gi)))
        .collect();
    let settings = SmoSettings::default();
    let counts = points
        .par_iter()
        .map(|&(ci, gi)| {
            cv_correct(
                &grams[gi],
                data,
                cs[ci],
                gammas[gi],
                &assignment,
                grid.folds,
                &settings,
            )
        })
        .collect::<Result<Vec<usize>>>()?;
    let n = data.len() as f64;
    let mut best = 0;
    for (k, &cnt) in counts.iter().enumerate() {
        if cnt > counts[best] {
            best = k;
        }
    }
    let table = points
        .iter()
        .zip(&counts)
        .map(|(&(ci, gi), &cnt)| {
            (
                SvmParams {
                    c: cs[ci],
                    gamma: gammas[gi],
                },
                cnt as f64 / n,
            )
        })
        .collect();
    let (ci, gi) = points[best];
    Ok(GridOutcome {
        best: SvmParams {
            c: cs[ci],
            gamma: gammas[gi],
        },
        accuracy: counts[best] as f64 / n,
        folds: grid.folds,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svm::dataset::Features;
    use crate::svm::model::train;
    use rand::Rng;

    fn blobs(n_per: usize, sep: f64, seed: u64) -> Dataset {
        let mut rng = rng_from_seed(seed);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for class in [1i8, -1] {
            for _ in 0..n_per {
                let mut x: Features = std::array::from_fn(|_| rng.random_range(-0.1..0.1));
                x[0] += sep * f64::from(class);
                xs.push(x);
                ys.push(class);
            }
        }
        Dataset::new(xs, ys).unwrap()
    }

    #[test]
    fn folds_are_stratified() {
        let labels: Vec<i8> = (0..23).map(|i| if i % 3 == 0 { -1 } else { 1 }).collect();
        let a = stratified_folds(&labels, 5, 3).unwrap();
        assert_eq!(a, stratified_folds(&labels, 5, 3).unwrap());
        for k in 0..5 {
            let size = a.iter().filter(|&&f| f == k).count();
            assert!((4..=5).contains(&size));
            let neg = (0..23).filter(|&i| a[i] == k && labels[i] == -1).count();
            assert!((1..=2).contains(&neg));
        }
        assert!(stratified_folds(&labels, 24, 0).is_err());
        assert!(stratified_folds(&labels, 1, 0).is_err());
        assert!(stratified_folds(&[1, 1, 1], 2, 0).is_err());
    }

    #[test]
    fn separable_data_scores_one() {
        let d = blobs(15, 1.0, 2);
        assert_eq!(
            k_fold_cv(&d, SvmParams::new(1.0, 1.0).unwrap(), 5, 9).unwrap(),
            1.0
        );
    }

    #[test]
    fn leave_one_out_matches_direct_loop() {
        let d = blobs(5, 0.08, 7);
        let params = SvmParams::new(2.0, 3.0).unwrap();
        let mut correct = 0;
        for i in 0..d.len() {
            let rest: Vec<usize> = (0..d.len()).filter(|&j| j != i).collect();
            let m = train(&d.subset(&rest), params).unwrap();
            if m.predict_one(&d.features()[i]) == d.labels()[i] {
                correct += 1;
            }
        }
        let cv = k_fold_cv(&d, params, d.len(), 1).unwrap();
        assert_eq!(cv, correct as f64 / d.len() as f64);
    }

    #[test]
    fn grid_of_one_point() {
        let d = blobs(6, 0.5, 1);
        let p = SvmParams::new(3.0, 0.25).unwrap();
        let grid = GridSpec::new(vec![p.c], vec![p.gamma], 3).unwrap();
        let out = grid_search(&d, &grid, 0).unwrap();
        assert_eq!(out.best, p);
        assert_eq!(out.table.len(), 1);
    }

    #[test]
    fn grid_prefers_higher_accuracy_then_smaller_parameters() {
        let d = blobs(10, 0.05, 11);
        let grid = GridSpec::new(vec![1e-3, 1.0, 100.0], vec![1e-4, 10.0], 4).unwrap();
        let out = grid_search(&d, &grid, 5).unwrap();
        for (p, acc) in &out.table {
            assert!(*acc <= out.accuracy);
            if *acc == out.accuracy {
                assert!(p.c > out.best.c || (p.c == out.best.c && p.gamma >= out.best.gamma));
            }
            assert_eq!(*acc, k_fold_cv(&d, *p, 4, 5).unwrap());
        }
    }
}
