//! Box-and-hyperplane constrained convex QP oracle for the SVM dual
//! `min ½αᵀQα − Σα, 0 ≤ α ≤ C, yᵀα = 0`: accelerated projected gradient
//! followed by active-set polishing with an exact KKT solve on the free set.

use nalgebra::{DMatrix, DVector};

pub struct QpResult {
    pub alpha: Vec<f64>,
    pub objective: f64,
}

fn objective(q: &DMatrix<f64>, a: &DVector<f64>) -> f64 {
    0.5 * a.dot(&(q * a)) - a.sum()
}

/// Projection onto `{0 ≤ α ≤ C, yᵀα = 0}` by bisection on the multiplier.
fn project(v: &DVector<f64>, y: &[f64], c: &[f64]) -> DVector<f64> {
    let clip = |nu: f64| DVector::from_fn(v.len(), |i, _| (v[i] - nu * y[i]).clamp(0.0, c[i]));
    let h = |nu: f64| {
        (0..v.len())
            .map(|i| (v[i] - nu * y[i]).clamp(0.0, c[i]) * y[i])
            .sum::<f64>()
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    while h(lo) < 0.0 {
        lo *= 2.0;
    }
    while h(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    clip(0.5 * (lo + hi))
}

/// Equality-constrained minimization over the free set with the rest fixed.
fn polish(q: &DMatrix<f64>, y: &[f64], c: &[f64], guess: &DVector<f64>) -> Option<DVector<f64>> {
    let n = y.len();
    let scale = c.iter().cloned().fold(0.0, f64::max);
    let tol = 1e-7 * scale;
    let free: Vec<usize> = (0..n)
        .filter(|&i| guess[i] > tol && guess[i] < c[i] - tol)
        .collect();
    let mut a = DVector::from_fn(n, |i, _| if guess[i] >= c[i] - tol { c[i] } else { 0.0 });
    for &i in &free {
        a[i] = 0.0;
    }
    let k = free.len();
    // [Q_FF y_F; y_Fᵀ 0] [α_F; ν] = [1 − Q_FB α_B; −y_Bᵀ α_B]
    let mut kkt = DMatrix::zeros(k + 1, k + 1);
    let mut rhs = DVector::zeros(k + 1);
    let qa = q * &a;
    for (r, &i) in free.iter().enumerate() {
        for (s, &j) in free.iter().enumerate() {
            kkt[(r, s)] = q[(i, j)];
        }
        kkt[(r, k)] = y[i];
        kkt[(k, r)] = y[i];
        rhs[r] = 1.0 - qa[i];
    }
    rhs[k] = -(0..n).map(|i| y[i] * a[i]).sum::<f64>();
    let sol = kkt.clone().lu().solve(&rhs)?;
    for (r, &i) in free.iter().enumerate() {
        a[i] = sol[r];
    }
    // Clip and re-balance tiny drifts back into the feasible set.
    Some(project(&a, y, c))
}

pub fn solve_svm_dual(q: &DMatrix<f64>, y: &[f64], c: &[f64]) -> QpResult {
    let n = y.len();
    let lip = q.clone().symmetric_eigenvalues().max().max(1e-12);
    let step = 1.0 / lip;
    let mut x = project(&DVector::zeros(n), y, c);
    let mut z = x.clone();
    let mut t = 1.0f64;
    let mut fx = objective(q, &x);
    for _ in 0..20_000 {
        let g = q * &z - DVector::from_element(n, 1.0);
        let xn = project(&(&z - g * step), y, c);
        let fn_ = objective(q, &xn);
        if fn_ > fx {
            // Adaptive restart.
            t = 1.0;
            z = x.clone();
            continue;
        }
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = &xn + (&xn - &x) * ((t - 1.0) / tn);
        let done = (fx - fn_).abs() < 1e-15 * (1.0 + fx.abs());
        x = xn;
        fx = fn_;
        t = tn;
        if done {
            break;
        }
    }
    let mut best = (x.clone(), fx);
    let mut cur = x;
    for _ in 0..5 {
        match polish(q, y, c, &cur) {
            Some(p) => {
                let fp = objective(q, &p);
                if fp < best.1 {
                    best = (p.clone(), fp);
                }
                cur = p;
            }
            _ => break,
        }
    }
    QpResult {
        alpha: best.0.iter().copied().collect(),
        objective: best.1,
    }
}
