use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herm::{pauli_matrices, Herm2, Mat2};
use crate::rng::rng_from_seed;

pub type Mat4 = Matrix4<Complex64>;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// Kronecker product of two 2×2 matrices; index `(a, b) ↦ 2a + b`, Alice first.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// A two-qubit density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitState {
    rho: Mat4,
}

impl TwoQubitState {
    /// Validates Hermiticity, unit trace and positivity, then stores the
    /// exactly Hermitian part.
    pub fn new(rho: Mat4) -> Result<Self> {
        let herm_err = (rho - rho.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm_err > HERMITIAN_TOL {
            return Err(Error::domain(format!(
                "matrix is not Hermitian (max deviation {herm_err:e})"
            )));
        }
        let rho = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::domain(format!("trace is {tr}, expected 1")));
        }
        let state = TwoQubitState { rho };
        let min_eig = state.min_eigenvalue();
        if min_eig < -PSD_TOL {
            return Err(Error::domain(format!(
                "matrix is not positive semidefinite (min eigenvalue {min_eig:e})"
            )));
        }
        Ok(state)
    }

    /// Rescales a PSD matrix to unit trace.
    pub fn from_unnormalized(m: Mat4) -> Result<Self> {
        let tr = m.trace().re;
        if tr <= 0.0 || !tr.is_finite() {
            return Err(Error::domain(
                "cannot normalize a matrix with non-positive trace",
            ));
        }
        Self::new(m.unscale(tr))
    }

    pub fn pure(psi: [Complex64; 4]) -> Result<Self> {
        let v = nalgebra::Vector4::from(psi);
        Self::from_unnormalized(v * v.adjoint())
    }

    pub fn maximally_mixed() -> Self {
        TwoQubitState {
            rho: Mat4::identity().unscale(4.0),
        }
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn bell() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        Self::pure([Complex64::new(h, 0.0), z, z, Complex64::new(h, 0.0)])
            .expect("valid Bell state")
    }

    pub fn product(alice: &Herm2, bob: &Herm2) -> Result<Self> {
        for (who, h) in [("Alice", alice), ("Bob", bob)] {
            if (h.trace() - 1.0).abs() > TRACE_TOL || h.min_eigenvalue() < -PSD_TOL {
                return Err(Error::domain(format!(
                    "{who}'s marginal is not a density matrix"
                )));
            }
        }
        Self::new(kron(&alice.to_matrix(), &bob.to_matrix()))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.rho
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(self.rho)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    /// `ρ_B = tr_A ρ`.
    pub fn partial_trace_alice(&self) -> Herm2 {
        let m = Mat2::from_fn(|b, bp| self.rho[(b, bp)] + self.rho[(2 + b, 2 + bp)]);
        Herm2::from_matrix(&m)
    }

    /// `ρ_A = tr_B ρ`.
    pub fn partial_trace_bob(&self) -> Herm2 {
        let m =
            Mat2::from_fn(|a, ap| self.rho[(2 * a, 2 * ap)] + self.rho[(2 * a + 1, 2 * ap + 1)]);
        Herm2::from_matrix(&m)
    }

    pub fn pauli_decompose(&self) -> PauliDecomposition {
        let p = pauli_matrices();
        let id = p[0];
        let ev = |m: Mat4| (self.rho * m).trace().re;
        let mut r = [0.0; 3];
        let mut s = [0.0; 3];
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            r[i] = ev(kron(&p[i + 1], &id));
            s[i] = ev(kron(&id, &p[i + 1]));
            for j in 0..3 {
                t[i][j] = ev(kron(&p[i + 1], &p[j + 1]));
            }
        }
        PauliDecomposition { r, s, t }
    }

    /// Nine correlation coefficients of `ρ₀ = (I ⊗ √ρ_B) ρ (I ⊗ √ρ_B)`,
    /// in the order `τ11, τ12, …, τ33`.
    pub fn feature_vector(&self) -> FeatureVector9 {
        let (rho0, _) = self.filtered();
        let p = pauli_matrices();
        let mut tau = [0.0; 9];
        for k in 0..3 {
            for l in 0..3 {
                tau[3 * k + l] = (rho0 * kron(&p[k + 1], &p[l + 1])).trace().re;
            }
        }
        FeatureVector9(tau)
    }

    /// `ρ₀` and `ρ_B` used by [`feature_vector`](Self::feature_vector).
    pub fn filtered(&self) -> (Mat4, Herm2) {
        let rho_b = self.partial_trace_alice();
        let root = kron(&pauli_matrices()[0], &rho_b.sqrt_psd().to_matrix());
        (root * self.rho * root, rho_b)
    }

    pub fn to_file(&self) -> StateFile {
        let f = |part: fn(&Complex64) -> f64| {
            let mut out = [[0.0; 4]; 4];
            for (r, row) in out.iter_mut().enumerate() {
                for (c, v) in row.iter_mut().enumerate() {
                    *v = part(&self.rho[(r, c)]);
                }
            }
            out
        };
        StateFile {
            rho_re: f(|z| z.re),
            rho_im: f(|z| z.im),
        }
    }

    pub fn from_file(file: &StateFile) -> Result<Self> {
        let m = Mat4::from_fn(|r, c| Complex64::new(file.rho_re[r][c], file.rho_im[r][c]));
        Self::new(m)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }
}

/// On-disk state format: real and imaginary parts as 4×4 row-major arrays.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub rho_re: [[f64; 4]; 4],
    pub rho_im: [[f64; 4]; 4],
}

/// Bloch vectors `r`, `s` and correlation matrix `t` of a two-qubit state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliDecomposition {
    pub r: [f64; 3],
    pub s: [f64; 3],
    pub t: [[f64; 3]; 3],
}

impl PauliDecomposition {
    /// `¼(I + Σ rᵢ σᵢ⊗I + Σ sᵢ I⊗σᵢ + Σ tᵢⱼ σᵢ⊗σⱼ)`.
    pub fn reconstruct(&self) -> Mat4 {
        let p = pauli_matrices();
        let re = |x: f64| Complex64::new(x, 0.0);
        let mut m = Mat4::identity();
        for i in 0..3 {
            m += kron(&p[i + 1], &p[0]) * re(self.r[i]);
            m += kron(&p[0], &p[i + 1]) * re(self.s[i]);
            for j in 0..3 {
                m += kron(&p[i + 1], &p[j + 1]) * re(self.t[i][j]);
            }
        }
        m.unscale(4.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector9(pub [f64; 9]);

impl FeatureVector9 {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn to_csv_row(&self) -> String {
        self.0
            .iter()
            .map(|v| format!("{v:.17e}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Hilbert–Schmidt random state: `G G† / tr(G G†)` with `G` a 4×4 matrix of
/// i.i.d. standard complex Gaussians. Deterministic per seed.
pub fn random_density_matrix(seed: u64) -> TwoQubitState {
    let mut rng = rng_from_seed(seed);
    let g = Mat4::from_fn(|_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    });
    TwoQubitState::from_unnormalized(g * g.adjoint())
        .expect("Ginibre product is PSD with positive trace")
}
