use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::{kron, TwoQubitState};
use crate::error::{Error, Result};
use crate::herm::Herm2;

/// Generalized Werner family `p|ψ⟩⟨ψ| + (1−p) ρ_A ⊗ I/2`,
/// `|ψ⟩ = cos ξ|00⟩ + sin ξ|11⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WernerParams {
    pub p: f64,
    pub xi: f64,
}

impl WernerParams {
    pub fn new(p: f64, xi: f64) -> Result<Self> {
        let w = WernerParams { p, xi };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::domain(format!(
                "mixing weight p = {} outside [0, 1]",
                self.p
            )));
        }
        if !self.xi.is_finite() {
            return Err(Error::domain("angle ξ must be finite"));
        }
        Ok(())
    }
}

pub fn werner_state(params: WernerParams) -> Result<TwoQubitState> {
    params.validate()?;
    let (s, c) = params.xi.sin_cos();
    let z = Complex64::new(0.0, 0.0);
    let psi = nalgebra::Vector4::new(Complex64::new(c, 0.0), z, z, Complex64::new(s, 0.0));
    let pure = psi * psi.adjoint();
    let rho_a = Herm2::new(0.5, 0.0, 0.0, 0.5 * (c * c - s * s));
    let noise = kron(&rho_a.to_matrix(), &(Herm2::IDENTITY * 0.5).to_matrix());
    let p = Complex64::new(params.p, 0.0);
    TwoQubitState::new(pure * p + noise * (Complex64::new(1.0, 0.0) - p))
}

/// Closed-form criterion: unsteerable from Alice to Bob under all projective
/// measurements iff `cos²2ξ ≥ (2p−1) / ((2−p) p³)`; `p = 0` is a product state.
pub fn werner_unsteerable_analytic(params: WernerParams) -> bool {
    let p = params.p;
    if p <= 0.0 {
        return true;
    }
    let lhs = (2.0 * params.xi).cos().powi(2);
    lhs >= (2.0 * p - 1.0) / ((2.0 - p) * p.powi(3))
}
