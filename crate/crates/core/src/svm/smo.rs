//! Sequential minimal optimization for the soft-margin dual
//!
//! ```text
//! minimize ½ αᵀQα − Σα   s.t.  yᵀα = 0,  0 ≤ α_i ≤ C_i,   Q_ij = y_i y_j K_ij
//! ```
//!
//! with the maximal-violating-pair working set. Per-sample bounds `C_i`
//! support weighted objectives.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::kernel::Gram;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoSettings {
    /// Stop once the maximal KKT violation is at most this value.
    pub eps: f64,
    pub max_iterations: usize,
}

impl Default for SmoSettings {
    fn default() -> Self {
        SmoSettings {
            eps: 1e-4,
            max_iterations: 10_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// `Qα − 1`.
    pub gradient: Vec<f64>,
    /// Decision function is `Σ α_j y_j K(x_j, x) − rho`.
    pub rho: f64,
    pub iterations: usize,
    pub max_violation: f64,
    pub converged: bool,
}

impl DualSolution {
    /// `½ αᵀQα − Σα`.
    pub fn objective(&self) -> f64 {
        0.5 * self
            .alpha
            .iter()
            .zip(&self.gradient)
            .map(|(a, g)| a * (g - 1.0))
            .sum::<f64>()
    }
}

/// Minimal positive curvature substituted for non-positive pair curvature.
const TAU: f64 = 1e-12;

pub fn solve(gram: &Gram, y: &[i8], c: &[f64], settings: &SmoSettings) -> Result<DualSolution> {
    let n = y.len();
    if gram.len() != n || c.len() != n {
        return Err(Error::domain("kernel, label and bound sizes differ"));
    }
    if !y.contains(&1) || !y.contains(&-1) {
        return Err(Error::DegenerateData(
            "training labels contain a single class".into(),
        ));
    }
    if c.iter().any(|&ci| !(ci > 0.0 && ci.is_finite())) {
        return Err(Error::domain("box bounds must be positive and finite"));
    }
    let yf: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut violation;

    loop {
        let (i, j, gap) = select_pair(&yf, &alpha, &grad, c);
        violation = gap;
        if gap <= settings.eps || iterations >= settings.max_iterations {
            break;
        }
        iterations += 1;
        let (ki, kj) = (gram.row(i), gram.row(j));
        let (ci, cj) = (c[i], c[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qij = yf[i] * yf[j] * ki[j];
        let (mut ai, mut aj) = (old_i, old_j);
        if yf[i] != yf[j] {
            let quad = (ki[i] + kj[j] + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > ci - cj {
                if ai > ci {
                    ai = ci;
                    aj = ci - diff;
                }
            } else if aj > cj {
                aj = cj;
                ai = cj + diff;
            }
        } else {
            let quad = (ki[i] + kj[j] - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > ci {
                if ai > ci {
                    ai = ci;
                    aj = sum - ci;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > cj {
                if aj > cj {
                    aj = cj;
                    ai = sum - cj;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = ((ai - old_i) * yf[i], (aj - old_j) * yf[j]);
        for k in 0..n {
            grad[k] += yf[k] * (ki[k] * di + kj[k] * dj);
        }
    }

    if violation <= settings.eps {
        if let Some((a, g, v)) = polish(gram, &yf, &alpha, c) {
            if v <= violation {
                alpha = a;
                grad = g;
                violation = v;
            }
        }
    }
    let rho = compute_rho(&yf, &alpha, &grad, c);
    Ok(DualSolution {
        alpha,
        gradient: grad,
        rho,
        iterations,
        max_violation: violation,
        converged: violation <= settings.eps,
    })
}

/// Exact solve of the stationarity system on the free set with bounded
/// variables held fixed. Returns `None` when the system is singular or the
/// solution leaves the box, so the active set was not yet final.
fn polish(gram: &Gram, y: &[f64], alpha: &[f64], c: &[f64]) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    let n = y.len();
    let free: Vec<usize> = (0..n)
        .filter(|&t| alpha[t] > 0.0 && alpha[t] < c[t])
        .collect();
    let f = free.len();
    if f == 0 {
        return None;
    }
    // Q_FF α_F − y_F ρ = 1 − Q_FB α_B and y_Fᵀ α_F = −y_Bᵀ α_B.
    let mut kkt = DMatrix::zeros(f + 1, f + 1);
    let mut rhs = DVector::zeros(f + 1);
    let mut bounded_sum = 0.0;
    for t in 0..n {
        if !(alpha[t] > 0.0 && alpha[t] < c[t]) {
            bounded_sum += y[t] * alpha[t];
        }
    }
    for (r, &i) in free.iter().enumerate() {
        let row = gram.row(i);
        let mut b = 1.0;
        for t in 0..n {
            if !(alpha[t] > 0.0 && alpha[t] < c[t]) && alpha[t] != 0.0 {
                b -= y[i] * y[t] * row[t] * alpha[t];
            }
        }
        for (s, &j) in free.iter().enumerate() {
            kkt[(r, s)] = y[i] * y[j] * row[j];
        }
        kkt[(r, f)] = -y[i];
        kkt[(f, r)] = y[i];
        rhs[r] = b;
    }
    rhs[f] = -bounded_sum;
    let sol = kkt.lu().solve(&rhs)?;
    let mut out = alpha.to_vec();
    for (r, &i) in free.iter().enumerate() {
        let a = sol[r];
        if !a.is_finite() || a < 0.0 || a > c[i] {
            return None;
        }
        out[i] = a;
    }
    let mut grad = vec![-1.0; n];
    for (t, g) in grad.iter_mut().enumerate() {
        let row = gram.row(t);
        for k in 0..n {
            if out[k] != 0.0 {
                *g += y[t] * y[k] * row[k] * out[k];
            }
        }
    }
    let (_, _, v) = select_pair(y, &out, &grad, c);
    Some((out, grad, v))
}

/// Maximal violating pair `(i, j)` and its violation
/// `max_{I_up} −y_t G_t − min_{I_low} −y_t G_t`.
fn select_pair(y: &[f64], alpha: &[f64], grad: &[f64], c: &[f64]) -> (usize, usize, f64) {
    let (mut gmax, mut gmin) = (f64::NEG_INFINITY, f64::INFINITY);
    let (mut i, mut j) = (0, 0);
    for t in 0..y.len() {
        let v = -y[t] * grad[t];
        let up = if y[t] > 0.0 {
            alpha[t] < c[t]
        } else {
            alpha[t] > 0.0
        };
        let low = if y[t] > 0.0 {
            alpha[t] > 0.0
        } else {
            alpha[t] < c[t]
        };
        if up && v > gmax {
            gmax = v;
            i = t;
        }
        if low && v < gmin {
            gmin = v;
            j = t;
        }
    }
    (i, j, gmax - gmin)
}

fn compute_rho(y: &[f64], alpha: &[f64], grad: &[f64], c: &[f64]) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut free) = (0.0, 0usize);
    for t in 0..y.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c[t] {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            sum += yg;
            free += 1;
        }
    }
    if free > 0 {
        sum / free as f64
    } else {
        0.5 * (ub + lb)
    }
}

/// Largest KKT residual of `α` in margin form: with `m_i = y_i f(x_i)`,
/// points at `α = 0` need `m_i ≥ 1`, free points `m_i = 1`, and points at
/// `α = C_i` need `m_i ≤ 1`.
pub fn kkt_violation(sol: &DualSolution, y: &[i8], c: &[f64]) -> f64 {
    (0..y.len())
        .map(|t| {
            let margin = sol.gradient[t] + 1.0 - f64::from(y[t]) * sol.rho;
            let a = sol.alpha[t];
            if a <= 0.0 {
                (1.0 - margin).max(0.0)
            } else if a >= c[t] {
                (margin - 1.0).max(0.0)
            } else {
                (margin - 1.0).abs()
            }
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svm::dataset::Features;

    fn pts(v: &[[f64; 2]]) -> Vec<Features> {
        v.iter()
            .map(|p| {
                let mut x = [0.0; 9];
                x[0] = p[0];
                x[1] = p[1];
                x
            })
            .collect()
    }

    #[test]
    fn two_points_symmetric() {
        let xs = pts(&[[0.0, 0.0], [1.0, 0.0]]);
        let g = Gram::new(&xs, 1.0);
        let sol = solve(&g, &[1, -1], &[100.0, 100.0], &SmoSettings::default()).unwrap();
        // Both points are support vectors with equal weight; the bias vanishes.
        assert!(sol.alpha[0] > 0.0 && (sol.alpha[0] - sol.alpha[1]).abs() < 1e-12);
        assert!(sol.rho.abs() < 1e-12);
        // α solves 2α(1 − K) = 2 when unbounded.
        let k = (-1.0f64).exp();
        assert!((sol.alpha[0] - 1.0 / (1.0 - k)).abs() < 1e-9);
    }

    #[test]
    fn feasibility_and_kkt() {
        let xs = pts(&[
            [0.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [1.0, 0.0],
            [0.5, 0.4],
            [0.2, 0.9],
        ]);
        let y = [1, 1, -1, -1, 1, -1];
        let g = Gram::new(&xs, 1.0);
        let c = [0.5, 2.0, 1.0, 3.0, 0.7, 1.1];
        let sol = solve(&g, &y, &c, &SmoSettings::default()).unwrap();
        assert!(sol.converged);
        let balance: f64 = sol
            .alpha
            .iter()
            .zip(&y)
            .map(|(a, &yy)| a * f64::from(yy))
            .sum();
        assert!(balance.abs() <= 1e-8);
        assert!(sol
            .alpha
            .iter()
            .zip(&c)
            .all(|(a, ci)| (0.0..=*ci).contains(a)));
        assert!(kkt_violation(&sol, &y, &c) <= 1e-3);
    }

    #[test]
    fn rejects_single_class() {
        let g = Gram::new(&pts(&[[0.0, 0.0], [1.0, 0.0]]), 1.0);
        assert!(matches!(
            solve(&g, &[1, 1], &[1.0, 1.0], &SmoSettings::default()),
            Err(Error::DegenerateData(_))
        ));
    }
}
