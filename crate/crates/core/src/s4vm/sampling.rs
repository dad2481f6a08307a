use rand::Rng;

use super::S4vmParams;
use crate::error::{Error, Result};
use crate::labels::LabelVector;
use crate::rng::{derive_seed, rng_from_seed};

/// `|Σŷ/u − Σy/l| ≤ β`, evaluated as `|l·Σŷ − u·Σy| ≤ β·u·l` so that
/// integer label sums compare exactly up to the rounding of `β`.
pub fn balance_ok(yhat: &LabelVector, labeled_labels: &[i8], beta: f64) -> bool {
    let (u, l) = (yhat.len() as f64, labeled_labels.len() as f64);
    if yhat.is_empty() || labeled_labels.is_empty() {
        return false;
    }
    let gap = balance_gap(yhat, labeled_labels) as f64;
    gap.abs() <= beta * u * l * (1.0 + 1e-12)
}

/// `l·Σŷ − u·Σy`.
fn balance_gap(yhat: &LabelVector, labeled_labels: &[i8]) -> i64 {
    let ly: i64 = labeled_labels.iter().map(|&y| i64::from(y)).sum();
    labeled_labels.len() as i64 * yhat.sum() - yhat.len() as i64 * ly
}

/// Makes `labels` balanced by flipping majority-class entries in order of
/// increasing `|score|`. Fails when no flip count lands inside the window.
pub fn balance_project(
    labels: &LabelVector,
    scores: &[f64],
    labeled_labels: &[i8],
    beta: f64,
) -> Result<LabelVector> {
    let mut out = labels.clone();
    if balance_ok(&out, labeled_labels, beta) {
        return Ok(out);
    }
    let majority: i8 = if balance_gap(&out, labeled_labels) > 0 {
        1
    } else {
        -1
    };
    let mut order: Vec<usize> = (0..out.len()).filter(|&j| out.get(j) == majority).collect();
    order.sort_by(|&a, &b| scores[a].abs().total_cmp(&scores[b].abs()).then(a.cmp(&b)));
    for j in order {
        out.flip(j);
        if balance_ok(&out, labeled_labels, beta) {
            return Ok(out);
        }
        if balance_gap(&out, labeled_labels).signum() != i64::from(majority) {
            break;
        }
    }
    Err(Error::Sampling(format!(
        "no labeling of {} points meets balance β = {beta}",
        labels.len()
    )))
}

/// Candidate labelings of the unlabeled set.
///
/// Candidate 0 is the base labeling: `ysvm` when balanced, else its balanced
/// projection. Every other candidate draws `p` from the flip schedule and
/// flips each base entry `j` with probability `p / (1 + |f_j|)`, redrawing
/// until balanced.
pub fn sample_candidates(
    ysvm: &LabelVector,
    decision_values: &[f64],
    labeled_labels: &[i8],
    params: &S4vmParams,
    seed: u64,
) -> Result<Vec<LabelVector>> {
    params.validate()?;
    let u = ysvm.len();
    if u < 2 {
        return Err(Error::domain(
            "candidate sampling needs at least two unlabeled points",
        ));
    }
    if decision_values.len() != u {
        return Err(Error::domain("decision values and labels differ in length"));
    }
    let base = balance_project(ysvm, decision_values, labeled_labels, params.beta)?;
    let weights: Vec<f64> = decision_values
        .iter()
        .map(|f| 1.0 / (1.0 + f.abs()))
        .collect();
    let mut out = Vec::with_capacity(params.n_samples);
    out.push(base.clone());
    for j in 1..params.n_samples {
        let mut rng = rng_from_seed(derive_seed(seed, "candidate", j as u64));
        let p = params.flip_schedule[rng.random_range(0..params.flip_schedule.len())];
        let mut accepted = None;
        for _ in 0..=params.max_retries {
            let mut cand = base.clone();
            for (k, w) in weights.iter().enumerate() {
                if rng.random::<f64>() < p * w {
                    cand.flip(k);
                }
            }
            if balance_ok(&cand, labeled_labels, params.beta) {
                accepted = Some(cand);
                break;
            }
        }
        out.push(accepted.ok_or_else(|| {
            Error::Sampling(format!(
                "candidate {j} unbalanced after {} retries",
                params.max_retries
            ))
        })?);
    }
    Ok(out)
}
