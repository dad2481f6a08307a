use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Features};
use super::kernel::{rbf_kernel, Gram};
use super::smo::{self, DualSolution, SmoSettings};
use super::SvmParams;
use crate::error::{Error, Result};
use crate::labels::{sign_label, LabelVector};

/// Kernel expansion `f(x) = Σ_i alphas_i K(sv_i, x) + bias` with
/// `alphas_i = α_i y_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub params: SvmParams,
    pub bias: f64,
    pub support_vectors: Vec<Features>,
    pub alphas: Vec<f64>,
}

impl SvmModel {
    pub fn decision_value(&self, x: &Features) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.alphas)
            .map(|(sv, a)| a * rbf_kernel(sv, x, self.params.gamma))
            .sum::<f64>()
            + self.bias
    }

    pub fn decision_values(&self, xs: &[Features]) -> Vec<f64> {
        xs.iter().map(|x| self.decision_value(x)).collect()
    }

    pub fn predict(&self, xs: &[Features]) -> LabelVector {
        LabelVector::from_signs(&self.decision_values(xs))
    }

    pub fn predict_one(&self, x: &Features) -> i8 {
        sign_label(self.decision_value(x))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: SvmModel = serde_json::from_str(text)?;
        m.params.validate()?;
        if m.support_vectors.len() != m.alphas.len() {
            return Err(Error::Parse(
                "support vector and coefficient counts differ".into(),
            ));
        }
        Ok(m)
    }
}

/// Trains with a uniform bound `C` at the default SMO tolerance.
pub fn train(data: &Dataset, params: SvmParams) -> Result<SvmModel> {
    let c = vec![params.c; data.len()];
    Ok(train_weighted(data, params, &c, &SmoSettings::default())?.0)
}

/// Trains with per-sample bounds `c`; `params.c` is recorded in the model
/// but the solver uses `c`.
pub fn train_weighted(
    data: &Dataset,
    params: SvmParams,
    c: &[f64],
    settings: &SmoSettings,
) -> Result<(SvmModel, DualSolution)> {
    params.validate()?;
    if data.len() < 2 || !data.has_both_classes() {
        return Err(Error::DegenerateData(format!(
            "need both classes, got {} positive and {} negative",
            data.count(1),
            data.count(-1)
        )));
    }
    let gram = Gram::new(data.features(), params.gamma);
    train_on_gram(&gram, data, params, c, settings)
}

/// As [`train_weighted`] with a precomputed kernel matrix for `data`.
pub fn train_on_gram(
    gram: &Gram,
    data: &Dataset,
    params: SvmParams,
    c: &[f64],
    settings: &SmoSettings,
) -> Result<(SvmModel, DualSolution)> {
    let sol = smo::solve(gram, data.labels(), c, settings)?;
    if !sol.converged {
        log::warn!(
            "SMO stopped after {} iterations with violation {:e}",
            sol.iterations,
            sol.max_violation
        );
    }
    let mut support_vectors = Vec::new();
    let mut alphas = Vec::new();
    for (i, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(data.features()[i]);
            alphas.push(a * f64::from(data.labels()[i]));
        }
    }
    let model = SvmModel {
        params,
        bias: -sol.rho,
        support_vectors,
        alphas,
    };
    Ok((model, sol))
}

/// `½‖w‖² + Σ_i C_i max(0, 1 − y_i f(x_i))` at a dual solution.
pub fn primal_objective(sol: &DualSolution, y: &[i8], c: &[f64]) -> f64 {
    let mut w2 = 0.0;
    let mut hinge = 0.0;
    for t in 0..y.len() {
        w2 += sol.alpha[t] * (sol.gradient[t] + 1.0);
        let margin = sol.gradient[t] + 1.0 - f64::from(y[t]) * sol.rho;
        hinge += c[t] * (1.0 - margin).max(0.0);
    }
    0.5 * w2 + hinge
}

#[cfg(test)]
mod tests {
    use super::*;

    fn embed(p: [f64; 2]) -> Features {
        let mut x = [0.0; 9];
        x[0] = p[0];
        x[1] = p[1];
        x
    }

    #[test]
    fn two_point_midpoint_is_zero() {
        let (a, b) = ([0.2, 0.1], [0.8, -0.3]);
        let d = Dataset::new(vec![embed(a), embed(b)], vec![1, -1]).unwrap();
        let m = train(&d, SvmParams::new(1000.0, 0.5).unwrap()).unwrap();
        assert_eq!(m.support_vectors.len(), 2);
        let mid = embed([0.5, -0.1]);
        assert!(m.decision_value(&mid).abs() < 1e-10);
        assert_eq!(m.predict_one(&embed(a)), 1);
        assert_eq!(m.predict_one(&embed(b)), -1);
    }

    #[test]
    fn free_support_vectors_sit_on_the_margin() {
        let xs: Vec<Features> = [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0], [0.3, 0.4]]
            .iter()
            .map(|p| embed(*p))
            .collect();
        let d = Dataset::new(xs, vec![1, 1, -1, -1, 1]).unwrap();
        let params = SvmParams::new(50.0, 1.0).unwrap();
        let (m, sol) = train_weighted(&d, params, &[50.0; 5], &SmoSettings::default()).unwrap();
        for (i, &a) in sol.alpha.iter().enumerate() {
            if a > 0.0 && a < 50.0 {
                assert!((m.decision_value(&d.features()[i]).abs() - 1.0).abs() <= 1e-3);
            }
        }
    }

    #[test]
    fn decision_value_matches_expansion() {
        let d = Dataset::new(
            vec![embed([0.0, 0.1]), embed([0.9, 0.2]), embed([0.4, 0.8])],
            vec![1, -1, -1],
        )
        .unwrap();
        let m = train(&d, SvmParams::new(4.0, 2.0).unwrap()).unwrap();
        let x = embed([0.33, 0.71]);
        let direct: f64 = m
            .support_vectors
            .iter()
            .zip(&m.alphas)
            .map(|(sv, a)| a * rbf_kernel(sv, &x, 2.0))
            .sum::<f64>()
            + m.bias;
        assert!((m.decision_value(&x) - direct).abs() < 1e-12);
        assert!(m.predict(&[]).is_empty());
    }

    #[test]
    fn json_round_trip() {
        let d = Dataset::new(vec![embed([0.0, 0.0]), embed([1.0, 0.0])], vec![-1, 1]).unwrap();
        let m = train(&d, SvmParams::new(1.0, 1.0).unwrap()).unwrap();
        let text = m.to_json().unwrap();
        assert_eq!(SvmModel::from_json(&text).unwrap(), m);
        for key in ["params", "bias", "support_vectors", "alphas"] {
            assert!(text.contains(key));
        }
    }

    #[test]
    fn single_class_is_degenerate() {
        let d = Dataset::new(vec![embed([0.0, 0.0]), embed([1.0, 0.0])], vec![1, 1]).unwrap();
        assert!(matches!(
            train(&d, SvmParams::new(1.0, 1.0).unwrap()),
            Err(Error::DegenerateData(_))
        ));
    }
}
