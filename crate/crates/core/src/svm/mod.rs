//! RBF-kernel soft-margin SVM trained by SMO, with stratified
//! cross-validation and grid search.

mod cv;
mod dataset;
mod kernel;
mod model;
pub mod smo;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cv::{grid_search, k_fold_cv, stratified_folds, GridOutcome};
pub use dataset::{Dataset, Features, CSV_HEADER};
pub use kernel::{rbf_kernel, Gram};
pub use model::{primal_objective, train, train_on_gram, train_weighted, SvmModel};
pub use smo::{DualSolution, SmoSettings};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// Box bound `C`.
    pub c: f64,
    /// RBF width `γ`.
    pub gamma: f64,
}

impl SvmParams {
    pub fn new(c: f64, gamma: f64) -> Result<Self> {
        let p = SvmParams { c, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::domain(format!("C = {} must be positive", self.c)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::domain(format!(
                "γ = {} must be positive",
                self.gamma
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub c_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub folds: usize,
}

impl Default for GridSpec {
    /// `C ∈ {2⁻⁵, 2⁻³, …, 2¹⁵}`, `γ ∈ {2⁻¹⁵, 2⁻¹³, …, 2³}`, 10 folds.
    fn default() -> Self {
        GridSpec {
            c_values: (-5..=15).step_by(2).map(|e| 2f64.powi(e)).collect(),
            gamma_values: (-15..=3).step_by(2).map(|e| 2f64.powi(e)).collect(),
            folds: 10,
        }
    }
}

impl GridSpec {
    pub fn new(c_values: Vec<f64>, gamma_values: Vec<f64>, folds: usize) -> Result<Self> {
        let g = GridSpec {
            c_values,
            gamma_values,
            folds,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.c_values.is_empty() || self.gamma_values.is_empty() {
            return Err(Error::domain("grid axes must be non-empty"));
        }
        let positive = |v: &f64| *v > 0.0 && v.is_finite();
        if !self.c_values.iter().all(positive) || !self.gamma_values.iter().all(positive) {
            return Err(Error::domain("grid values must be positive and finite"));
        }
        if self.folds < 2 {
            return Err(Error::domain("grid search needs at least 2 folds"));
        }
        Ok(())
    }

    pub fn with_folds(&self, folds: usize) -> GridSpec {
        GridSpec {
            folds,
            ..self.clone()
        }
    }
}
