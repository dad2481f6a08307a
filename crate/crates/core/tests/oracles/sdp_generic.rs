//! Log-barrier solver for the steering witness program over all `F_{a|A}`,
//! with no gauge fixing. Variables are the Pauli coordinates of every
//! `F_{a|A}`; the kernel of the map to the strategy blocks is projected out
//! with an SVD, and each centering step is an equality-constrained Newton
//! step solved by LU.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use steerlearn::Assemblage;

type C2 = Matrix2<Complex64>;

fn basis() -> [C2; 4] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    [
        C2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)),
        C2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        C2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
        C2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)),
    ]
}

fn tr(m: &C2) -> f64 {
    (m[(0, 0)] + m[(1, 1)]).re
}

fn positive_definite(m: &C2) -> bool {
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    tr(m) > 0.0 && det > 0.0
}

pub struct GenericSolution {
    pub objective: f64,
    /// `F[A][a]` as 2×2 matrices.
    pub f: Vec<Vec<C2>>,
}

struct Problem {
    m: usize,
    q: usize,
    strategies: Vec<Vec<usize>>,
    cost: DVector<f64>,
    norm: DVector<f64>,
}

impl Problem {
    fn var(&self, a_meas: usize, outcome: usize, k: usize) -> usize {
        (a_meas * self.q + outcome) * 4 + k
    }

    fn n(&self) -> usize {
        4 * self.m * self.q
    }

    fn blocks(&self, x: &DVector<f64>) -> Vec<C2> {
        let b = basis();
        self.strategies
            .iter()
            .map(|s| {
                let mut acc = C2::zeros();
                for (am, &out) in s.iter().enumerate() {
                    for (k, bk) in b.iter().enumerate() {
                        acc += bk * Complex64::new(x[self.var(am, out, k)], 0.0);
                    }
                }
                acc
            })
            .collect()
    }

    fn barrier(&self, x: &DVector<f64>, t: f64) -> Option<f64> {
        let mut phi = t * self.cost.dot(x);
        for m in self.blocks(x) {
            if !positive_definite(&m) {
                return None;
            }
            phi -= (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re.ln();
        }
        Some(phi)
    }

    /// Gradient and Hessian of the barrier objective at `x`.
    fn derivatives(&self, x: &DVector<f64>, t: f64) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.n();
        let b = basis();
        let mut g = &self.cost * t;
        let mut h = DMatrix::zeros(n, n);
        for (s, m) in self.strategies.iter().zip(self.blocks(x)) {
            let inv = m.try_inverse().expect("interior point");
            let vars: Vec<(usize, C2)> = s
                .iter()
                .enumerate()
                .flat_map(|(am, &out)| (0..4).map(move |k| (am, out, k)))
                .map(|(am, out, k)| (self.var(am, out, k), inv * b[k]))
                .collect();
            for (i, ib) in &vars {
                g[*i] -= tr(ib);
                for (j, jb) in &vars {
                    h[(*i, *j)] += tr(&(ib * jb));
                }
            }
        }
        (g, h)
    }
}

/// Minimizes `Σ tr(F_{a|A} σ_{a|A})` subject to `Σ_A F_{λ(A)|A} ⪰ 0` for every
/// deterministic strategy `λ` and `Σ_λ tr(Σ_A F_{λ(A)|A}) = 1`.
pub fn solve(asm: &Assemblage) -> GenericSolution {
    let m = asm.measurements();
    let q = asm.outcomes();
    let count = q.pow(m as u32);
    let strategies: Vec<Vec<usize>> = (0..count)
        .map(|l| (0..m).map(|am| (l / q.pow(am as u32)) % q).collect())
        .collect();
    let b = basis();
    let n = 4 * m * q;
    let mut cost = DVector::zeros(n);
    let mut norm = DVector::zeros(n);
    for am in 0..m {
        for out in 0..q {
            let sigma = asm.member(am, out).to_matrix();
            for (k, bk) in b.iter().enumerate() {
                cost[(am * q + out) * 4 + k] = tr(&(bk * sigma));
            }
            // Each (A, a) appears in q^(m−1) strategies, each contributing tr(B_k).
            norm[(am * q + out) * 4] = 2.0 * (count / q) as f64;
        }
    }
    let p = Problem {
        m,
        q,
        strategies,
        cost,
        norm,
    };

    // Row space of x ↦ (M_λ): directions that change some block.
    let mut lin = DMatrix::zeros(4 * count, n);
    for (li, s) in p.strategies.iter().enumerate() {
        for (am, &out) in s.iter().enumerate() {
            for k in 0..4 {
                lin[(4 * li + k, p.var(am, out, k))] = 1.0;
            }
        }
    }
    let svd = lin.svd(false, true);
    let vt = svd.v_t.unwrap();
    let rows: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-9)
        .collect();
    let basis_r = DMatrix::from_fn(n, rows.len(), |i, j| vt[(rows[j], i)]);
    let r = rows.len();

    let mut x = DVector::zeros(n);
    let s0 = 1.0 / (2.0 * m as f64 * count as f64);
    for am in 0..m {
        for out in 0..q {
            x[p.var(am, out, 0)] = s0;
        }
    }
    let a_r = basis_r.transpose() * &p.norm;
    let mut t = 1.0;
    let dim = 2.0 * count as f64;
    loop {
        for _ in 0..200 {
            let (g, h) = p.derivatives(&x, t);
            let gr = basis_r.transpose() * &g;
            let hr = basis_r.transpose() * &h * &basis_r;
            let mut kkt = DMatrix::zeros(r + 1, r + 1);
            kkt.view_mut((0, 0), (r, r)).copy_from(&hr);
            for i in 0..r {
                kkt[(i, r)] = a_r[i];
                kkt[(r, i)] = a_r[i];
            }
            let mut rhs = DVector::zeros(r + 1);
            rhs.rows_mut(0, r).copy_from(&(-&gr));
            let sol = kkt
                .full_piv_lu()
                .solve(&rhs)
                .expect("nonsingular KKT system");
            let dz = sol.rows(0, r).into_owned();
            let decrement = -gr.dot(&dz);
            if decrement < 1e-14 {
                break;
            }
            let dx = &basis_r * &dz;
            let phi0 = p.barrier(&x, t).unwrap();
            let mut step = 1.0;
            loop {
                let trial = &x + &dx * step;
                if let Some(phi) = p.barrier(&trial, t) {
                    if phi <= phi0 - 0.25 * step * decrement {
                        x = trial;
                        break;
                    }
                }
                step *= 0.5;
                if step < 1e-20 {
                    break;
                }
            }
            if step < 1e-20 {
                break;
            }
        }
        if dim / t < 1e-10 {
            break;
        }
        t *= 8.0;
    }
    let f = (0..m)
        .map(|am| {
            (0..q)
                .map(|out| {
                    let mut acc = C2::zeros();
                    for (k, bk) in b.iter().enumerate() {
                        acc += bk * Complex64::new(x[p.var(am, out, k)], 0.0);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    GenericSolution {
        objective: p.cost.dot(&x),
        f,
    }
}
