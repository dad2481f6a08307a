//! 2×2 Hermitian matrices in Pauli coordinates.
//!
//! `H = c0·I + c1·σx + c2·σy + c3·σz` with real `c`. Every qubit-sized object in
//! the crate (Bob's conditional states, measurement effects, witness blocks)
//! lives in this representation; spectra, inverses and square roots have
//! closed forms.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type Mat2 = Matrix2<Complex64>;

/// Dense 2×2 Pauli matrices `[I, σx, σy, σz]`.
pub fn pauli_matrices() -> [Mat2; 4] {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [
        Mat2::new(o, z, z, o),
        Mat2::new(z, o, o, z),
        Mat2::new(z, -i, i, z),
        Mat2::new(o, z, z, -o),
    ]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Herm2(pub [f64; 4]);

impl Herm2 {
    pub const ZERO: Herm2 = Herm2([0.0; 4]);
    pub const IDENTITY: Herm2 = Herm2([1.0, 0.0, 0.0, 0.0]);

    pub fn new(c0: f64, c1: f64, c2: f64, c3: f64) -> Self {
        Herm2([c0, c1, c2, c3])
    }

    /// The `k`-th element of `[I, σx, σy, σz]`.
    pub fn basis(k: usize) -> Self {
        let mut c = [0.0; 4];
        c[k] = 1.0;
        Herm2(c)
    }

    /// `c0·I + v·σ`.
    pub fn from_bloch(c0: f64, v: [f64; 3]) -> Self {
        Herm2([c0, v[0], v[1], v[2]])
    }

    pub fn coeffs(&self) -> [f64; 4] {
        self.0
    }

    pub fn vector(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    pub fn vector_norm(&self) -> f64 {
        let [_, a, b, c] = self.0;
        (a * a + b * b + c * c).sqrt()
    }

    pub fn to_matrix(&self) -> Mat2 {
        let [c0, c1, c2, c3] = self.0;
        Mat2::new(
            Complex64::new(c0 + c3, 0.0),
            Complex64::new(c1, -c2),
            Complex64::new(c1, c2),
            Complex64::new(c0 - c3, 0.0),
        )
    }

    /// Pauli coordinates of the Hermitian part of `m`.
    pub fn from_matrix(m: &Mat2) -> Self {
        let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        Herm2([
            0.5 * (m00.re + m11.re),
            0.5 * (m01.re + m10.re),
            0.5 * (m10.im - m01.im),
            0.5 * (m00.re - m11.re),
        ])
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.0[0]
    }

    pub fn det(&self) -> f64 {
        let n = self.vector_norm();
        (self.0[0] - n) * (self.0[0] + n)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let n = self.vector_norm();
        (self.0[0] - n, self.0[0] + n)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().0
    }

    /// `tr(self · other)`.
    pub fn trace_product(&self, other: &Herm2) -> f64 {
        let (a, b) = (self.0, other.0);
        2.0 * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3])
    }

    pub fn inverse(&self) -> Option<Herm2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let [c0, c1, c2, c3] = self.0;
        Some(Herm2([c0 / d, -c1 / d, -c2 / d, -c3 / d]))
    }

    /// Square root of the PSD part: eigenvalues are clamped at zero first.
    pub fn sqrt_psd(&self) -> Herm2 {
        let n = self.vector_norm();
        let (lo, hi) = (self.0[0] - n, self.0[0] + n);
        let (sl, sh) = (lo.max(0.0).sqrt(), hi.max(0.0).sqrt());
        if n <= f64::EPSILON * self.0[0].abs().max(1e-300) {
            return Herm2([self.0[0].max(0.0).sqrt(), 0.0, 0.0, 0.0]);
        }
        let k = 0.5 * (sh - sl) / n;
        Herm2([0.5 * (sh + sl), k * self.0[1], k * self.0[2], k * self.0[3]])
    }

    pub fn max_abs_diff(&self, other: &Herm2) -> f64 {
        (self.to_matrix() - other.to_matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest `α ≥ 0` with `self + α·dir ⪰ 0`, for `self ≻ 0`.
    /// Returns `f64::INFINITY` when the ray never leaves the cone.
    pub fn max_step(&self, dir: &Herm2) -> f64 {
        // Roots of det(dir − t·self) = A t² − 2 B t + C.
        let (p, d) = (self.0, dir.0);
        let a = self.det();
        let b = d[0] * p[0] - (d[1] * p[1] + d[2] * p[2] + d[3] * p[3]);
        let c = dir.det();
        if a <= 0.0 {
            return 0.0;
        }
        let disc = (b * b - a * c).max(0.0).sqrt();
        let t_min = if b >= 0.0 {
            let s = b + disc;
            if s == 0.0 {
                0.0
            } else {
                c / s
            }
        } else {
            (b - disc) / a
        };
        if t_min < 0.0 {
            -1.0 / t_min
        } else {
            f64::INFINITY
        }
    }
}

impl Add for Herm2 {
    type Output = Herm2;
    fn add(self, o: Herm2) -> Herm2 {
        let (a, b) = (self.0, o.0);
        Herm2([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
    }
}

impl AddAssign for Herm2 {
    fn add_assign(&mut self, o: Herm2) {
        *self = *self + o;
    }
}

impl Sub for Herm2 {
    type Output = Herm2;
    fn sub(self, o: Herm2) -> Herm2 {
        self + (-o)
    }
}

impl Neg for Herm2 {
    type Output = Herm2;
    fn neg(self) -> Herm2 {
        self * -1.0
    }
}

impl Mul<f64> for Herm2 {
    type Output = Herm2;
    fn mul(self, s: f64) -> Herm2 {
        let a = self.0;
        Herm2([a[0] * s, a[1] * s, a[2] * s, a[3] * s])
    }
}

/// `Re tr(P_p · m)` for the four Pauli matrices, without forming products.
pub(crate) fn pauli_traces(m: &Mat2) -> [f64; 4] {
    let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    [
        m00.re + m11.re,
        m01.re + m10.re,
        // tr(σy m) = i (m01 − m10)
        -(m01.im - m10.im),
        m00.re - m11.re,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::ComplexField;
    use proptest::prelude::*;

    fn herm() -> impl Strategy<Value = Herm2> {
        prop::array::uniform4(-2.0f64..2.0).prop_map(Herm2)
    }

    fn dense_eigs(h: &Herm2) -> (f64, f64) {
        let e = h.to_matrix().symmetric_eigenvalues();
        let (a, b) = (e[0].real(), e[1].real());
        (a.min(b), a.max(b))
    }

    #[test]
    fn pauli_basis_round_trips_through_dense() {
        let p = pauli_matrices();
        for k in 0..4 {
            assert_eq!(Herm2::basis(k).to_matrix(), p[k]);
            assert_eq!(Herm2::from_matrix(&p[k]), Herm2::basis(k));
        }
    }

    #[test]
    fn sqrt_of_rank_one_projector() {
        let proj = Herm2::from_bloch(0.5, [0.0, 0.0, 0.5]);
        let s = proj.sqrt_psd();
        assert!(s.max_abs_diff(&proj) < 1e-15);
    }

    #[test]
    fn inverse_of_singular_is_none() {
        assert!(Herm2::from_bloch(0.5, [0.5, 0.0, 0.0]).inverse().is_none());
    }

    proptest! {
        #[test]
        fn closed_form_spectrum_matches_dense(h in herm()) {
            let (lo, hi) = h.eigenvalues();
            let (dlo, dhi) = dense_eigs(&h);
            prop_assert!((lo - dlo).abs() < 1e-12 && (hi - dhi).abs() < 1e-12);
        }

        #[test]
        fn trace_product_matches_dense(a in herm(), b in herm()) {
            let dense = (a.to_matrix() * b.to_matrix()).trace().re;
            prop_assert!((a.trace_product(&b) - dense).abs() < 1e-12);
            let tr = pauli_traces(&(a.to_matrix() * b.to_matrix()));
            for k in 0..4 {
                let want = (pauli_matrices()[k] * a.to_matrix() * b.to_matrix()).trace().re;
                prop_assert!((tr[k] - want).abs() < 1e-12);
            }
        }

        #[test]
        fn sqrt_squares_back(h in herm()) {
            let psd = Herm2::from_bloch(h.0[0].abs() + h.vector_norm(), h.vector());
            let s = psd.sqrt_psd();
            let sq = Herm2::from_matrix(&(s.to_matrix() * s.to_matrix()));
            prop_assert!(sq.max_abs_diff(&psd) < 1e-12);
        }

        #[test]
        fn max_step_lands_on_boundary(p in herm(), d in herm()) {
            let p = Herm2::from_bloch(p.vector_norm() + 0.1 + p.0[0].abs(), p.vector());
            let a = p.max_step(&d);
            if a.is_finite() {
                let edge = p + d * a;
                prop_assert!(edge.min_eigenvalue().abs() < 1e-9 * (1.0 + a));
                prop_assert!((p + d * (0.999 * a)).min_eigenvalue() > -1e-12);
            } else {
                prop_assert!((p + d * 1e6).min_eigenvalue() >= -1e-6);
            }
        }
    }
}
