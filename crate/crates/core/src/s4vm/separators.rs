use serde::{Deserialize, Serialize};

use super::sampling::balance_project;
use super::S4vmParams;
use crate::error::Result;
use crate::labels::LabelVector;
use crate::svm::{train_on_gram, Dataset, Features, Gram, SmoSettings, SvmParams};

/// Labeled and unlabeled points on one shared kernel, with per-point bounds
/// `C₁` (labeled) and `C₂` (unlabeled).
pub struct SeparatorProblem<'a> {
    labeled: &'a Dataset,
    features: Vec<Features>,
    gram: Gram,
    bounds: Vec<f64>,
    params: SvmParams,
}

/// A trained separator for one labeling of the unlabeled set.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparatorFit {
    /// `½‖ω‖² + C₁Σξ_i + C₂Σξ̂_j`, or `+∞` for a single-class labeling.
    pub objective: f64,
    /// Decision values on the unlabeled points.
    pub decision_values: Vec<f64>,
}

impl<'a> SeparatorProblem<'a> {
    pub fn new(labeled: &'a Dataset, unlabeled: &[Features], params: &S4vmParams) -> Self {
        let mut features = labeled.features().to_vec();
        features.extend_from_slice(unlabeled);
        let gram = Gram::new(&features, params.gamma);
        let mut bounds = vec![params.c1; labeled.len()];
        bounds.extend(std::iter::repeat(params.c2).take(unlabeled.len()));
        SeparatorProblem {
            labeled,
            features,
            gram,
            bounds,
            params: SvmParams {
                c: params.c1,
                gamma: params.gamma,
            },
        }
    }

    pub fn unlabeled_len(&self) -> usize {
        self.features.len() - self.labeled.len()
    }

    pub fn fit(&self, labeling: &LabelVector) -> Result<SeparatorFit> {
        let l = self.labeled.len();
        let mut labels = self.labeled.labels().to_vec();
        labels.extend(labeling.iter());
        if !labels.contains(&1) || !labels.contains(&-1) {
            return Ok(SeparatorFit {
                objective: f64::INFINITY,
                decision_values: vec![0.0; labeling.len()],
            });
        }
        let data = Dataset::new(self.features.clone(), labels)?;
        let (_, sol) = train_on_gram(
            &self.gram,
            &data,
            self.params,
            &self.bounds,
            &SmoSettings::default(),
        )?;
        // Strong duality: the primal optimum equals minus the dual optimum,
        // which SMO resolves far more tightly than the hinge sum.
        let objective = -sol.objective();
        // f(x_j) = y_j (G_j + 1) − rho for training points.
        let decision_values = (l..data.len())
            .map(|j| f64::from(data.labels()[j]) * (sol.gradient[j] + 1.0) - sol.rho)
            .collect();
        Ok(SeparatorFit {
            objective,
            decision_values,
        })
    }

    /// Alternates training and balanced sign relabeling of the unlabeled
    /// points for at most `rounds` relabelings; returns the final labeling
    /// and the fit trained on it.
    pub fn refine(
        &self,
        start: LabelVector,
        rounds: usize,
        beta: f64,
    ) -> Result<(LabelVector, SeparatorFit)> {
        let mut labeling = start;
        let mut fit = self.fit(&labeling)?;
        for _ in 0..rounds {
            if !fit.objective.is_finite() {
                break;
            }
            let next = match balance_project(
                &LabelVector::from_signs(&fit.decision_values),
                &fit.decision_values,
                self.labeled.labels(),
                beta,
            ) {
                Ok(next) => next,
                Err(_) => break,
            };
            if next == labeling {
                break;
            }
            let next_fit = self.fit(&next)?;
            if next_fit.objective >= fit.objective {
                break;
            }
            labeling = next;
            fit = next_fit;
        }
        Ok((labeling, fit))
    }
}

/// Objective of the separator trained on `labeled ∪ (unlabeled, labeling)`.
pub fn separator_objective(
    labeling: &LabelVector,
    labeled: &Dataset,
    unlabeled: &[Features],
    params: &S4vmParams,
) -> Result<f64> {
    Ok(SeparatorProblem::new(labeled, unlabeled, params)
        .fit(labeling)?
        .objective)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatorPool {
    pub members: Vec<LabelVector>,
    pub objectives: Vec<f64>,
    /// Candidate indices per cluster; `members[k]` is drawn from `clusters[k]`.
    pub clusters: Vec<Vec<usize>>,
    /// Set when fewer than `T` distinct finite-objective candidates exist.
    pub shrunk: bool,
}

const KMEDOIDS_ITERATIONS: usize = 100;

/// Clusters candidates by Hamming distance into at most `t` groups and keeps
/// the minimum-objective member of each. Candidates with infinite objective
/// are dropped; duplicates join their labeling's cluster.
pub fn select_separators(
    candidates: &[LabelVector],
    objectives: &[f64],
    t: usize,
) -> SeparatorPool {
    assert_eq!(candidates.len(), objectives.len());
    assert!(t >= 1);
    // Distinct finite candidates, keyed by first occurrence.
    let mut distinct: Vec<usize> = Vec::new();
    let mut owner = vec![usize::MAX; candidates.len()];
    for i in 0..candidates.len() {
        if !objectives[i].is_finite() {
            continue;
        }
        match distinct
            .iter()
            .position(|&d| candidates[d] == candidates[i])
        {
            Some(k) => owner[i] = k,
            None => {
                owner[i] = distinct.len();
                distinct.push(i);
            }
        }
    }
    let shrunk = distinct.len() < t;
    let k = t.min(distinct.len());
    let dist = |a: usize, b: usize| candidates[distinct[a]].hamming(&candidates[distinct[b]]);
    let assignment: Vec<usize> = if k == distinct.len() {
        (0..k).collect()
    } else {
        kmedoids(distinct.len(), k, &dist, |a| objectives[distinct[a]])
    };
    let mut clusters = vec![Vec::new(); k];
    for i in 0..candidates.len() {
        if owner[i] != usize::MAX {
            clusters[assignment[owner[i]]].push(i);
        }
    }
    let mut members = Vec::with_capacity(k);
    let mut objs = Vec::with_capacity(k);
    for cluster in &clusters {
        let best = *cluster
            .iter()
            .min_by(|&&a, &&b| objectives[a].total_cmp(&objectives[b]).then(a.cmp(&b)))
            .expect("clusters are non-empty");
        members.push(candidates[best].clone());
        objs.push(objectives[best]);
    }
    SeparatorPool {
        members,
        objectives: objs,
        clusters,
        shrunk,
    }
}

/// Cluster index per point. Seeds with the minimum-objective point, then
/// farthest-point insertion; alternates assignment and medoid update.
fn kmedoids(
    n: usize,
    k: usize,
    dist: &dyn Fn(usize, usize) -> usize,
    objective: impl Fn(usize) -> f64,
) -> Vec<usize> {
    let first = (0..n)
        .min_by(|&a, &b| objective(a).total_cmp(&objective(b)).then(a.cmp(&b)))
        .expect("n ≥ 1");
    let mut medoids = vec![first];
    let mut nearest: Vec<usize> = (0..n).map(|i| dist(i, first)).collect();
    while medoids.len() < k {
        let far = (0..n)
            .max_by(|&a, &b| nearest[a].cmp(&nearest[b]).then(b.cmp(&a)))
            .expect("n ≥ 1");
        medoids.push(far);
        for i in 0..n {
            nearest[i] = nearest[i].min(dist(i, far));
        }
    }
    let assign = |medoids: &[usize]| -> Vec<usize> {
        (0..n)
            .map(|i| {
                (0..medoids.len())
                    .min_by_key(|&c| (dist(i, medoids[c]), c))
                    .expect("k ≥ 1")
            })
            .collect()
    };
    let mut assignment = assign(&medoids);
    for _ in 0..KMEDOIDS_ITERATIONS {
        let mut changed = false;
        for (c, medoid) in medoids.iter_mut().enumerate() {
            let members: Vec<usize> = (0..n).filter(|&i| assignment[i] == c).collect();
            let best = *members
                .iter()
                .min_by_key(|&&m| (members.iter().map(|&o| dist(m, o)).sum::<usize>(), m))
                .expect("medoids belong to their own cluster");
            if best != *medoid {
                *medoid = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        assignment = assign(&medoids);
    }
    assignment
}
