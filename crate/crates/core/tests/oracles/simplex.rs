//! Dense two-phase tableau simplex with Bland's rule, for small LPs with
//! free variables: minimize `c·x` subject to `eq` rows `a·x = b` and `ge`
//! rows `a·x ≥ b`.

pub struct Lp {
    pub c: Vec<f64>,
    pub eq: Vec<(Vec<f64>, f64)>,
    pub ge: Vec<(Vec<f64>, f64)>,
}

#[derive(Debug)]
pub enum LpResult {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

const EPS: f64 = 1e-11;

struct Tableau {
    /// Rows of `[A | b]`.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && row[c] != 0.0 {
                let f = row[c];
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost·z` over columns `< allowed`. `false` means unbounded.
    fn run(&mut self, cost: &[f64], allowed: usize) -> bool {
        loop {
            let reduced = |j: usize| -> f64 {
                cost[j]
                    - self
                        .rows
                        .iter()
                        .zip(&self.basis)
                        .map(|(row, &b)| cost[b] * row[j])
                        .sum::<f64>()
            };
            let Some(enter) = (0..allowed).find(|&j| !self.basis.contains(&j) && reduced(j) < -EPS)
            else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[enter] > EPS {
                    let ratio = row[self.cols] / row[enter];
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - EPS
                                || (ratio <= lr + EPS && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }
}

pub fn solve(lp: &Lp) -> LpResult {
    let n = lp.c.len();
    let n_ge = lp.ge.len();
    let m = lp.eq.len() + n_ge;
    // Columns: x⁺ (n), x⁻ (n), surplus (n_ge), artificial (m), rhs.
    let art0 = 2 * n + n_ge;
    let cols = art0 + m;
    let mut rows = Vec::with_capacity(m);
    for (k, (a, b)) in lp
        .eq
        .iter()
        .map(|r| (r, None))
        .chain(lp.ge.iter().enumerate().map(|(i, r)| (r, Some(i))))
        .enumerate()
    {
        let (coef, rhs) = a;
        let mut row = vec![0.0; cols + 1];
        for j in 0..n {
            row[j] = coef[j];
            row[n + j] = -coef[j];
        }
        if let Some(i) = b {
            row[2 * n + i] = -1.0;
        }
        row[cols] = *rhs;
        if *rhs < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        row[art0 + k] = 1.0;
        rows.push(row);
    }
    let mut tab = Tableau {
        rows,
        basis: (art0..cols).collect(),
        cols,
    };
    let mut phase1 = vec![0.0; cols];
    for v in &mut phase1[art0..cols] {
        *v = 1.0;
    }
    tab.run(&phase1, cols);
    let infeas: f64 = tab
        .rows
        .iter()
        .zip(&tab.basis)
        .filter(|(_, &b)| b >= art0)
        .map(|(r, _)| r[cols])
        .sum();
    if infeas > 1e-9 {
        return LpResult::Infeasible;
    }
    // Drive zero-level artificials out of the basis where possible.
    for r in 0..m {
        if tab.basis[r] >= art0 {
            if let Some(c) = (0..art0).find(|&c| tab.rows[r][c].abs() > 1e-9) {
                tab.pivot(r, c);
            }
        }
    }
    let mut cost = vec![0.0; cols];
    for j in 0..n {
        cost[j] = lp.c[j];
        cost[n + j] = -lp.c[j];
    }
    // Redundant rows keep their artificial basic at zero; forbid re-entry.
    if !tab.run(&cost, art0) {
        return LpResult::Unbounded;
    }
    let mut z = vec![0.0; cols];
    for (row, &b) in tab.rows.iter().zip(&tab.basis) {
        z[b] = row[cols];
    }
    let x: Vec<f64> = (0..n).map(|j| z[j] - z[n + j]).collect();
    let value = lp.c.iter().zip(&x).map(|(c, x)| c * x).sum();
    LpResult::Optimal { value, x }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_instance() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18, x, y ≥ 0 → 36 at (2, 6).
        let lp = Lp {
            c: vec![-3.0, -5.0],
            eq: vec![],
            ge: vec![
                (vec![-1.0, 0.0], -4.0),
                (vec![0.0, -2.0], -12.0),
                (vec![-3.0, -2.0], -18.0),
                (vec![1.0, 0.0], 0.0),
                (vec![0.0, 1.0], 0.0),
            ],
        };
        match solve(&lp) {
            LpResult::Optimal { value, x } => {
                assert!((value + 36.0).abs() < 1e-12);
                assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 6.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }
}
