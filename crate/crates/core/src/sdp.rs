//! Small dense SDP solver for linear matrix inequalities over 2×2 Hermitian
//! blocks.
//!
//! The decision variables are Hermitian 2×2 matrices `F_g`. The problem is
//!
//! ```text
//! minimize    Σ_g tr(G_g F_g)
//! subject to  S_k = Σ_g a_{k,g} F_g − C_k ⪰ 0      for every block k
//!             Σ_g tr(E_{r,g} F_g) = e_r            for every equality r
//! ```
//!
//! and its conic dual is `maximize Σ_k tr(C_k X_k) + e·w` over `X_k ⪰ 0`.
//! The solver is an infeasible-start primal-dual path-following method using
//! the HKM search direction with a Mehrotra predictor-corrector step. Every
//! matrix is carried in Pauli coordinates, so the Schur complement has
//! dimension `4 × num_vars` regardless of the number of blocks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herm::{pauli_matrices, pauli_traces, Herm2, Mat2};

/// One LMI block `Σ coef·F_var − offset ⪰ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LmiBlock {
    pub offset: Herm2,
    pub terms: Vec<(usize, f64)>,
}

/// `Σ_g tr(E_g F_g) = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermEquality {
    pub terms: Vec<(usize, Herm2)>,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianLmi {
    pub num_vars: usize,
    /// `G_g`, one per variable.
    pub objective: Vec<Herm2>,
    pub blocks: Vec<LmiBlock>,
    pub equalities: Vec<HermEquality>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IpmSettings {
    /// Threshold on relative gap and scaled primal/dual residuals.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for IpmSettings {
    fn default() -> Self {
        IpmSettings {
            tolerance: 1e-8,
            max_iterations: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

#[derive(Clone, Debug)]
pub struct IpmSolution {
    pub vars: Vec<Herm2>,
    /// Primal slacks `S_k`.
    pub slacks: Vec<Herm2>,
    /// Dual block variables `X_k`.
    pub duals: Vec<Herm2>,
    /// Equality multipliers `w`.
    pub multipliers: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `Σ_k tr(X_k S_k)`.
    pub complementarity: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

const DIVERGENCE: f64 = 1e12;

impl HermitianLmi {
    fn validate(&self) -> Result<()> {
        if self.objective.len() != self.num_vars {
            return Err(Error::domain("objective must have one matrix per variable"));
        }
        let bad_block = self
            .blocks
            .iter()
            .flat_map(|b| b.terms.iter().map(|t| t.0))
            .chain(
                self.equalities
                    .iter()
                    .flat_map(|e| e.terms.iter().map(|t| t.0)),
            )
            .any(|g| g >= self.num_vars);
        if bad_block {
            return Err(Error::domain("term references a variable out of range"));
        }
        if self.blocks.is_empty() {
            return Err(Error::domain("at least one LMI block is required"));
        }
        Ok(())
    }

    fn n(&self) -> usize {
        4 * self.num_vars
    }

    fn apply_block(&self, k: usize, x: &[f64]) -> Herm2 {
        self.blocks[k]
            .terms
            .iter()
            .fold(Herm2::ZERO, |acc, &(g, a)| acc + var(x, g) * a)
    }

    fn cost(&self) -> Vec<f64> {
        self.objective
            .iter()
            .flat_map(|g| g.0.map(|c| 2.0 * c))
            .collect()
    }

    /// Dense equality matrix in real coordinates.
    fn equality_matrix(&self) -> DMatrix<f64> {
        let mut e = DMatrix::zeros(self.equalities.len(), self.n());
        for (r, eq) in self.equalities.iter().enumerate() {
            for &(g, coef) in &eq.terms {
                for p in 0..4 {
                    e[(r, 4 * g + p)] += 2.0 * coef.0[p];
                }
            }
        }
        e
    }

    /// `Σ_k 𝒜_k*(X_k)` in real coordinates.
    fn adjoint(&self, xs: &[Herm2]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for (blk, x) in self.blocks.iter().zip(xs) {
            for &(g, a) in &blk.terms {
                for p in 0..4 {
                    out[4 * g + p] += 2.0 * a * x.0[p];
                }
            }
        }
        out
    }
}

fn var(x: &[f64], g: usize) -> Herm2 {
    Herm2([x[4 * g], x[4 * g + 1], x[4 * g + 2], x[4 * g + 3]])
}

fn frob(h: &Herm2) -> f64 {
    (2.0 * h.0.iter().map(|c| c * c).sum::<f64>()).sqrt()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

struct Direction {
    dx: Vec<f64>,
    dw: Vec<f64>,
    ds: Vec<Herm2>,
    dxx: Vec<Herm2>,
}

struct Workspace<'a> {
    problem: &'a HermitianLmi,
    eq: DMatrix<f64>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    /// Factor of `𝒜*𝒜`, used to restore the dual equations on `ΔX`.
    correction: Option<&'a nalgebra::Cholesky<f64, nalgebra::Dyn>>,
    s_inv: Vec<Mat2>,
    x_mat: Vec<Mat2>,
    /// `X r_p S⁻¹` per block.
    infeas_term: Vec<Mat2>,
}

impl Workspace<'_> {
    fn direction(
        &self,
        sigma_mu: f64,
        corr: Option<&[Mat2]>,
        r_p: &[Herm2],
        r_e: &[f64],
        r_d: &[f64],
        s: &[Herm2],
    ) -> Option<Direction> {
        let p = self.problem;
        let n = p.n();
        let mut h = DVector::from_iterator(n, r_d.iter().map(|v| -v));
        let id = Mat2::identity();
        let smu = Complex64::new(sigma_mu, 0.0);
        for k in 0..p.blocks.len() {
            let mut r = self.s_inv[k] * smu - self.x_mat[k] + self.infeas_term[k];
            if let Some(c) = corr {
                r -= c[k] * self.s_inv[k];
            }
            let tr = pauli_traces(&r);
            for &(g, a) in &p.blocks[k].terms {
                for q in 0..4 {
                    h[4 * g + q] += a * tr[q];
                }
            }
        }

        let m_inv_h = self.chol.solve(&h);
        let (dx, dw) = if self.eq.nrows() == 0 {
            (m_inv_h, DVector::zeros(0))
        } else {
            let m_inv_et = self.chol.solve(&self.eq.transpose());
            let schur = &self.eq * &m_inv_et;
            let rhs = DVector::from_column_slice(r_e) - &self.eq * &m_inv_h;
            let dw = schur.lu().solve(&rhs)?;
            let dx = m_inv_h + m_inv_et * &dw;
            (dx, dw)
        };
        if dx.iter().chain(dw.iter()).any(|v| !v.is_finite()) {
            return None;
        }
        let dx: Vec<f64> = dx.iter().copied().collect();

        let mut ds = Vec::with_capacity(p.blocks.len());
        let mut dxx = Vec::with_capacity(p.blocks.len());
        for k in 0..p.blocks.len() {
            let dsk = p.apply_block(k, &dx) - r_p[k];
            // ΔX = Herm((σμ I − X S − X ΔS − corr) S⁻¹)
            let xm = self.x_mat[k];
            let mut num = id * smu - xm * s[k].to_matrix() - xm * dsk.to_matrix();
            if let Some(c) = corr {
                num -= c[k];
            }
            ds.push(dsk);
            dxx.push(Herm2::from_matrix(&(num * self.s_inv[k])));
        }
        // Round-off in the Schur solve leaks into 𝒜*(ΔX) + Eᵀ Δw = r_d as the
        // system grows ill-conditioned; add the least-norm 𝒜(y) fixing it.
        if let Some(fac) = self.correction {
            let adj = p.adjoint(&dxx);
            let etw = self.eq.transpose() * &dw;
            let rho = DVector::from_iterator(n, (0..n).map(|i| r_d[i] - adj[i] - etw[i]));
            let y = fac.solve(&rho);
            for (k, d) in dxx.iter_mut().enumerate() {
                *d += p.apply_block(k, y.as_slice());
            }
        }
        Some(Direction {
            dx,
            dw: dw.iter().copied().collect(),
            ds,
            dxx,
        })
    }
}

/// Cholesky factor of `m`, retried with a growing diagonal shift relative to
/// its largest diagonal entry when `m` is numerically semidefinite. Exact
/// residuals drive every step, so a shifted direction only slows progress.
fn factor(m: DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if let Some(c) = m.clone().cholesky() {
        return Some(c);
    }
    let scale = m.diagonal().amax();
    if !(scale > 0.0 && scale.is_finite()) {
        return None;
    }
    let mut shift = 1e-14;
    while shift <= 1e-6 {
        let mut shifted = m.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += shift * scale;
        }
        if let Some(c) = shifted.cholesky() {
            return Some(c);
        }
        shift *= 100.0;
    }
    None
}

fn max_step(base: &[Herm2], dir: &[Herm2]) -> f64 {
    base.iter()
        .zip(dir)
        .map(|(b, d)| b.max_step(d))
        .fold(f64::INFINITY, f64::min)
}

/// Solves a Hermitian LMI problem. Structural errors (bad indices, no
/// blocks) are reported as `Err`; numerical trouble ends with
/// [`SolveStatus::MaxIterations`].
pub fn ip_solve(problem: &HermitianLmi, settings: &IpmSettings) -> Result<IpmSolution> {
    problem.validate()?;
    if !(settings.tolerance > 0.0) {
        return Err(Error::domain("solver tolerance must be positive"));
    }
    let n = problem.n();
    let nb = problem.blocks.len();
    let c = problem.cost();
    let eq = problem.equality_matrix();
    let e_rhs: Vec<f64> = problem.equalities.iter().map(|e| e.rhs).collect();
    let dim = 2.0 * nb as f64;
    let paulis = pauli_matrices();

    let mut x = vec![0.0; n];
    let mut w = vec![0.0; problem.equalities.len()];
    let mut s = vec![Herm2::IDENTITY; nb];
    let mut xx = vec![Herm2::IDENTITY; nb];

    let norm_c = norm(&c);
    let norm_e = norm(&e_rhs);
    let norm_off = problem
        .blocks
        .iter()
        .map(|b| frob(&b.offset).powi(2))
        .sum::<f64>()
        .sqrt();

    // 𝒜*𝒜 in real coordinates; singular when some variable is unconstrained.
    let correction = {
        let mut a = DMatrix::<f64>::zeros(n, n);
        for blk in &problem.blocks {
            for &(g, ag) in &blk.terms {
                for &(h, ah) in &blk.terms {
                    for p in 0..4 {
                        a[(4 * g + p, 4 * h + p)] += 2.0 * ag * ah;
                    }
                }
            }
        }
        a.cholesky()
    };

    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    let mut residuals = (f64::INFINITY, f64::INFINITY);

    for iter in 0..=settings.max_iterations {
        iterations = iter;
        // Residuals.
        let r_p: Vec<Herm2> = (0..nb)
            .map(|k| s[k] - problem.apply_block(k, &x) + problem.blocks[k].offset)
            .collect();
        let ex = &eq * DVector::from_column_slice(&x);
        let r_e: Vec<f64> = e_rhs.iter().zip(ex.iter()).map(|(e, v)| e - v).collect();
        let adj = problem.adjoint(&xx);
        let etw = eq.transpose() * DVector::from_column_slice(&w);
        let r_d: Vec<f64> = (0..n).map(|i| c[i] - adj[i] - etw[i]).collect();

        let gap: f64 = xx.iter().zip(&s).map(|(a, b)| a.trace_product(b)).sum();
        let pobj: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
        let dobj: f64 = problem
            .blocks
            .iter()
            .zip(&xx)
            .map(|(b, xk)| b.offset.trace_product(xk))
            .sum::<f64>()
            + e_rhs.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        let pinf = (r_p.iter().map(|r| frob(r).powi(2)).sum::<f64>() + norm(&r_e).powi(2)).sqrt()
            / (1.0 + norm_e + norm_off);
        let dinf = norm(&r_d) / (1.0 + norm_c);
        let rel_gap = gap / (1.0 + pobj.abs() + dobj.abs());
        residuals = (pinf, dinf);
        log::trace!(
            "ipm {iter}: gap {rel_gap:.3e} pinf {pinf:.3e} dinf {dinf:.3e} pobj {pobj:.9e}"
        );

        if rel_gap <= settings.tolerance && pinf <= settings.tolerance && dinf <= settings.tolerance
        {
            status = SolveStatus::Optimal;
            break;
        }
        if norm(&x) > DIVERGENCE || xx.iter().any(|b| frob(b) > DIVERGENCE) {
            status = SolveStatus::Infeasible;
            break;
        }
        if iter == settings.max_iterations {
            break;
        }

        let mu = gap / dim;

        // Schur complement M_{(g,p),(h,q)} = Σ_k a_g a_h Re tr(P_p X P_q S⁻¹).
        let mut m = DMatrix::<f64>::zeros(n, n);
        let mut s_inv = Vec::with_capacity(nb);
        let mut x_mat = Vec::with_capacity(nb);
        let mut infeas_term = Vec::with_capacity(nb);
        for k in 0..nb {
            let Some(si) = s[k].inverse() else {
                return Ok(finish(
                    problem,
                    x,
                    s,
                    xx,
                    w,
                    &c,
                    &e_rhs,
                    iterations,
                    SolveStatus::MaxIterations,
                    residuals,
                ));
            };
            let si = si.to_matrix();
            let xm = xx[k].to_matrix();
            let mut wk = [[0.0; 4]; 4];
            for q in 0..4 {
                let b = xm * paulis[q] * si;
                let tr = pauli_traces(&b);
                for p in 0..4 {
                    wk[p][q] = tr[p];
                }
            }
            let terms = &problem.blocks[k].terms;
            for &(g, ag) in terms {
                for &(hh, ah) in terms {
                    let f = ag * ah;
                    for p in 0..4 {
                        for q in 0..4 {
                            m[(4 * g + p, 4 * hh + q)] += f * wk[p][q];
                        }
                    }
                }
            }
            infeas_term.push(xm * r_p[k].to_matrix() * si);
            s_inv.push(si);
            x_mat.push(xm);
        }
        // Symmetrize against round-off before factoring.
        let m = (&m + m.transpose()) * 0.5;
        let Some(chol) = factor(m) else {
            status = SolveStatus::MaxIterations;
            break;
        };
        let ws = Workspace {
            problem,
            eq: eq.clone(),
            chol,
            correction: correction.as_ref(),
            s_inv,
            x_mat,
            infeas_term,
        };

        // Predictor.
        let Some(aff) = ws.direction(0.0, None, &r_p, &r_e, &r_d, &s) else {
            status = SolveStatus::MaxIterations;
            break;
        };
        let ap = max_step(&s, &aff.ds).min(1.0);
        let ad = max_step(&xx, &aff.dxx).min(1.0);
        let gap_aff: f64 = (0..nb)
            .map(|k| (xx[k] + aff.dxx[k] * ad).trace_product(&(s[k] + aff.ds[k] * ap)))
            .sum();
        let sigma = (gap_aff / gap).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let corr: Vec<Mat2> = (0..nb)
            .map(|k| aff.dxx[k].to_matrix() * aff.ds[k].to_matrix())
            .collect();
        let Some(dir) = ws.direction(sigma * mu, Some(&corr), &r_p, &r_e, &r_d, &s) else {
            status = SolveStatus::MaxIterations;
            break;
        };
        let ap = max_step(&s, &dir.ds);
        let ad = max_step(&xx, &dir.dxx);
        // A common step keeps residuals shrinking at least as fast as the gap.
        let alpha = ap.min(ad);
        let gamma = 0.9 + 0.09 * alpha.min(1.0);
        let ap = (gamma * alpha).min(1.0);
        let ad = ap;

        for i in 0..n {
            x[i] += ap * dir.dx[i];
        }
        for k in 0..nb {
            s[k] += dir.ds[k] * ap;
            xx[k] += dir.dxx[k] * ad;
        }
        for (wi, d) in w.iter_mut().zip(&dir.dw) {
            *wi += ad * d;
        }
    }

    Ok(finish(
        problem, x, s, xx, w, &c, &e_rhs, iterations, status, residuals,
    ))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    problem: &HermitianLmi,
    x: Vec<f64>,
    s: Vec<Herm2>,
    xx: Vec<Herm2>,
    w: Vec<f64>,
    c: &[f64],
    e_rhs: &[f64],
    iterations: usize,
    status: SolveStatus,
    residuals: (f64, f64),
) -> IpmSolution {
    let primal_objective = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    let dual_objective = problem
        .blocks
        .iter()
        .zip(&xx)
        .map(|(b, xk)| b.offset.trace_product(xk))
        .sum::<f64>()
        + e_rhs.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
    let complementarity = xx.iter().zip(&s).map(|(a, b)| a.trace_product(b)).sum();
    IpmSolution {
        vars: (0..problem.num_vars).map(|g| var(&x, g)).collect(),
        slacks: s,
        duals: xx,
        multipliers: w,
        primal_objective,
        dual_objective,
        complementarity,
        primal_residual: residuals.0,
        dual_residual: residuals.1,
        iterations,
        status,
    }
}
