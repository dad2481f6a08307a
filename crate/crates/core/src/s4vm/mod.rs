//! Safe semi-supervised SVM.
//!
//! Candidate labelings of the unlabeled set are sampled around the inductive
//! SVM's predictions, refined into low-density separators, clustered, and
//! combined by maximizing the worst-case gain over the inductive labels.

mod maxmin;
mod sampling;
mod separators;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::svm::{train, Dataset, Features, SvmParams};

pub use crate::labels::LabelVector;
pub use maxmin::{
    gain_loss, j_value, linear_form, min_j, solve_maxmin, MaxminOutcome, SUPERGRADIENT_ITERATIONS,
};
pub use sampling::{balance_ok, balance_project, sample_candidates};
pub use separators::{
    select_separators, separator_objective, SeparatorFit, SeparatorPool, SeparatorProblem,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct S4vmParams {
    /// Balance slack `β`.
    pub beta: f64,
    /// Loss weight `λ > 1`.
    pub lambda: f64,
    /// Separator count `T`.
    pub separators: usize,
    pub n_samples: usize,
    /// Bound on labeled slacks.
    pub c1: f64,
    /// Bound on unlabeled slacks.
    pub c2: f64,
    pub gamma: f64,
    /// Diversity constants of the annealing formulation; carried, never read.
    pub varsigma: Option<f64>,
    pub g: Option<f64>,
    /// Per-candidate flip rates, one drawn uniformly per candidate.
    pub flip_schedule: Vec<f64>,
    /// Redraws per candidate before sampling fails.
    pub max_retries: usize,
    /// Train-and-relabel rounds applied to each sampled candidate.
    pub refine_rounds: usize,
}

impl Default for S4vmParams {
    fn default() -> Self {
        S4vmParams {
            beta: 0.1,
            lambda: 3.0,
            separators: 10,
            n_samples: 100,
            c1: 1.0,
            c2: 0.1,
            gamma: 1.0,
            varsigma: None,
            g: None,
            flip_schedule: vec![0.05, 0.1, 0.2, 0.3],
            max_retries: 100,
            refine_rounds: 3,
        }
    }
}

impl S4vmParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad("β must be non-negative");
        }
        if !(self.lambda > 1.0 && self.lambda.is_finite()) {
            return bad("λ must exceed 1");
        }
        if self.separators == 0 {
            return bad("separator count T must be at least 1");
        }
        if self.n_samples < self.separators {
            return bad("sample count must be at least T");
        }
        for (v, name) in [(self.c1, "C1"), (self.c2, "C2"), (self.gamma, "γ")] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if let Some(s) = self.varsigma {
            if !(0.0..=1.0).contains(&s) {
                return bad("ς must lie in [0, 1]");
            }
        }
        if self.flip_schedule.is_empty()
            || self.flip_schedule.iter().any(|p| !(0.0..=1.0).contains(p))
        {
            return bad("flip schedule must be non-empty with rates in [0, 1]");
        }
        Ok(())
    }

    /// Sets `C₁ = C`, `C₂ = ratio·C` and `γ` from inductive parameters.
    pub fn with_svm(&self, svm: SvmParams, c2_ratio: f64) -> S4vmParams {
        S4vmParams {
            c1: svm.c,
            c2: c2_ratio * svm.c,
            gamma: svm.gamma,
            ..self.clone()
        }
    }
}

/// Everything needed to audit one S4VM run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct S4vmReport {
    pub seed: u64,
    pub params: S4vmParams,
    pub ysvm_labels: LabelVector,
    pub pool_objectives: Vec<f64>,
    pub final_labels: LabelVector,
    pub fallback_used: bool,
    /// Why the run fell back to `ysvm`, when it did before the max-min step.
    pub fallback_reason: Option<String>,
    pub pool_shrunk: bool,
    #[serde(rename = "min_J_output")]
    pub min_j_output: f64,
    #[serde(rename = "min_J_ysvm")]
    pub min_j_ysvm: f64,
}

impl S4vmReport {
    fn fallback(seed: u64, params: &S4vmParams, ysvm: LabelVector, reason: String) -> Self {
        S4vmReport {
            seed,
            params: params.clone(),
            final_labels: ysvm.clone(),
            ysvm_labels: ysvm,
            pool_objectives: Vec::new(),
            fallback_used: true,
            fallback_reason: Some(reason),
            pool_shrunk: false,
            min_j_output: 0.0,
            min_j_ysvm: 0.0,
        }
    }
}

/// Labels `unlabeled` from `labeled`.
///
/// Trains the inductive SVM (`C₁`, `γ`) for `ysvm`, samples and refines
/// candidates, evaluates their separator objectives, clusters them into `T`
/// separators and solves the max-min assignment. Sampling failure returns
/// `ysvm` with the fallback flag set.
pub fn s4vm_predict(
    labeled: &Dataset,
    unlabeled: &[Features],
    params: &S4vmParams,
    seed: u64,
) -> Result<S4vmReport> {
    params.validate()?;
    if !labeled.has_both_classes() {
        return Err(Error::DegenerateData(
            "labeled set needs both classes".into(),
        ));
    }
    let inductive = train(labeled, SvmParams::new(params.c1, params.gamma)?)?;
    let f = inductive.decision_values(unlabeled);
    let ysvm = LabelVector::from_signs(&f);
    if unlabeled.len() < 2 {
        return Ok(S4vmReport::fallback(
            seed,
            params,
            ysvm,
            "fewer than two unlabeled points".into(),
        ));
    }
    let candidates = match sample_candidates(&ysvm, &f, labeled.labels(), params, seed) {
        Ok(c) => c,
        Err(Error::Sampling(msg)) => {
            log::warn!("S4VM sampling failed, keeping inductive labels: {msg}");
            return Ok(S4vmReport::fallback(seed, params, ysvm, msg));
        }
        Err(e) => return Err(e),
    };
    let problem = SeparatorProblem::new(labeled, unlabeled, params);
    let fitted = candidates
        .into_par_iter()
        .enumerate()
        .map(|(j, cand)| {
            if j == 0 {
                let fit = problem.fit(&cand)?;
                Ok((cand, fit.objective))
            } else {
                let (lab, fit) = problem.refine(cand, params.refine_rounds, params.beta)?;
                Ok((lab, fit.objective))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let (cands, objectives): (Vec<_>, Vec<_>) = fitted.into_iter().unzip();
    let pool = select_separators(&cands, &objectives, params.separators);
    if pool.members.is_empty() {
        return Ok(S4vmReport::fallback(
            seed,
            params,
            ysvm,
            "no finite-objective separator".into(),
        ));
    }
    if pool.shrunk {
        log::warn!(
            "only {} distinct separators for T = {}",
            pool.members.len(),
            params.separators
        );
    }
    let out = solve_maxmin(&pool.members, &ysvm, params.lambda)?;
    Ok(S4vmReport {
        seed,
        params: params.clone(),
        ysvm_labels: ysvm,
        pool_objectives: pool.objectives,
        final_labels: out.labels,
        fallback_used: out.fallback_used,
        fallback_reason: out
            .fallback_used
            .then(|| "rounded assignment scored below ysvm".to_string()),
        pool_shrunk: pool.shrunk,
        min_j_output: out.min_j_output,
        min_j_ysvm: out.min_j_ysvm,
    })
}
