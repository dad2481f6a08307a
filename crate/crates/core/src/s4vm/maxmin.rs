use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{sign_label, LabelVector};

/// Supergradient iterations of the relaxed max-min solve.
pub const SUPERGRADIENT_ITERATIONS: usize = 500;

/// `(gain, loss)` with `gain = #{j : y_j = ŷ_j ≠ ysvm_j}` and
/// `loss = #{j : y_j ≠ ŷ_j = ysvm_j}`.
pub fn gain_loss(
    y: &LabelVector,
    yhat: &LabelVector,
    ysvm: &LabelVector,
) -> Result<(usize, usize)> {
    if y.len() != yhat.len() || y.len() != ysvm.len() {
        return Err(Error::domain("label vectors differ in length"));
    }
    let mut gain = 0;
    let mut loss = 0;
    for j in 0..y.len() {
        let (a, b, s) = (y.get(j), yhat.get(j), ysvm.get(j));
        if a == b && b != s {
            gain += 1;
        } else if a != b && b == s {
            loss += 1;
        }
    }
    Ok((gain, loss))
}

/// `J = gain − λ·loss`.
pub fn j_value(
    y: &LabelVector,
    yhat: &LabelVector,
    ysvm: &LabelVector,
    lambda: f64,
) -> Result<f64> {
    let (g, l) = gain_loss(y, yhat, ysvm)?;
    Ok(g as f64 - lambda * l as f64)
}

/// `(c_t, d_t)` with `J(y) = c_tᵀy + d_t`:
/// `c_t = ¼[(1+λ)ŷ + (λ−1)ysvm]`, `d_t = ¼[−(1+λ)ŷᵀysvm + (1−λ)u]`.
pub fn linear_form(yhat: &LabelVector, ysvm: &LabelVector, lambda: f64) -> (Vec<f64>, f64) {
    let c = yhat
        .iter()
        .zip(ysvm.iter())
        .map(|(h, s)| 0.25 * ((1.0 + lambda) * f64::from(h) + (lambda - 1.0) * f64::from(s)))
        .collect();
    let d = 0.25 * (-(1.0 + lambda) * yhat.dot(ysvm) as f64 + (1.0 - lambda) * yhat.len() as f64);
    (c, d)
}

/// `min_t J(y, ŷ_t, ysvm)`.
pub fn min_j(
    y: &LabelVector,
    pool: &[LabelVector],
    ysvm: &LabelVector,
    lambda: f64,
) -> Result<f64> {
    pool.iter()
        .map(|h| j_value(y, h, ysvm, lambda))
        .try_fold(f64::INFINITY, |acc, v| Ok(acc.min(v?)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxminOutcome {
    pub labels: LabelVector,
    pub fallback_used: bool,
    pub min_j_output: f64,
    pub min_j_ysvm: f64,
    /// Best `min_t(c_tᵀy + d_t)` reached on the box.
    pub relaxed_value: f64,
    /// `min_t J` at the sign-rounded relaxed point.
    pub rounded_value: f64,
}

struct Forms {
    c: Vec<Vec<f64>>,
    d: Vec<f64>,
}

impl Forms {
    fn values(&self, y: &[f64]) -> Vec<f64> {
        self.c
            .iter()
            .zip(&self.d)
            .map(|(c, d)| c.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() + d)
            .collect()
    }
}

fn argmin(v: &[f64]) -> (usize, f64) {
    v.iter().enumerate().fold(
        (0, f64::INFINITY),
        |acc, (i, &x)| if x < acc.1 { (i, x) } else { acc },
    )
}

/// Maximizes `min_t J(y, ŷ_t, ysvm)` over `y ∈ {±1}ᵘ`.
///
/// Projected supergradient ascent on the box `[−1, 1]ᵘ` from `ysvm` with step
/// `1/√k`, sign rounding of the best iterate, then single-flip ascent on the
/// integer objective. The result is replaced by `ysvm` if it scores below
/// `min_t J(ysvm) = 0`.
pub fn solve_maxmin(
    pool: &[LabelVector],
    ysvm: &LabelVector,
    lambda: f64,
) -> Result<MaxminOutcome> {
    if pool.is_empty() {
        return Err(Error::domain("separator pool is empty"));
    }
    let u = ysvm.len();
    if pool.iter().any(|h| h.len() != u) {
        return Err(Error::domain("pool members and ysvm differ in length"));
    }
    let (c, d): (Vec<_>, Vec<_>) = pool.iter().map(|h| linear_form(h, ysvm, lambda)).unzip();
    let forms = Forms { c, d };

    let mut y: Vec<f64> = ysvm.iter().map(f64::from).collect();
    let (_, mut best_val) = argmin(&forms.values(&y));
    let mut best = y.clone();
    for k in 1..=SUPERGRADIENT_ITERATIONS {
        let (t, _) = argmin(&forms.values(&y));
        let step = 1.0 / (k as f64).sqrt();
        for (yj, cj) in y.iter_mut().zip(&forms.c[t]) {
            *yj = (*yj + step * cj).clamp(-1.0, 1.0);
        }
        let (_, val) = argmin(&forms.values(&y));
        if val > best_val {
            best_val = val;
            best = y.clone();
        }
    }

    let mut z: Vec<f64> = best.iter().map(|&v| f64::from(sign_label(v))).collect();
    let mut vals = forms.values(&z);
    let rounded_value = argmin(&vals).1;
    // Single-flip ascent; flipping j moves form t by −2·c_tj·z_j.
    loop {
        let current = argmin(&vals).1;
        let mut pick = None;
        let mut pick_val = current;
        for j in 0..u {
            let v = (0..vals.len())
                .map(|t| vals[t] - 2.0 * forms.c[t][j] * z[j])
                .fold(f64::INFINITY, f64::min);
            if v > pick_val {
                pick_val = v;
                pick = Some(j);
            }
        }
        match pick {
            Some(j) => {
                for t in 0..vals.len() {
                    vals[t] -= 2.0 * forms.c[t][j] * z[j];
                }
                z[j] = -z[j];
            }
            None => break,
        }
    }

    let candidate = LabelVector::from_signs(&z);
    let min_j_ysvm = min_j(ysvm, pool, ysvm, lambda)?;
    let min_j_candidate = min_j(&candidate, pool, ysvm, lambda)?;
    let (labels, fallback_used, min_j_output) = if min_j_candidate < min_j_ysvm {
        (ysvm.clone(), true, min_j_ysvm)
    } else {
        (candidate, false, min_j_candidate)
    };
    Ok(MaxminOutcome {
        labels,
        fallback_used,
        min_j_output,
        min_j_ysvm,
        relaxed_value: best_val,
        rounded_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(v: &[i8]) -> LabelVector {
        LabelVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn gain_loss_extremes() {
        let s = lv(&[1, -1, 1, 1]);
        assert_eq!(gain_loss(&s, &s, &s).unwrap(), (0, 0));
        let n = s.negated();
        assert_eq!(gain_loss(&n, &n, &s).unwrap(), (4, 0));
        assert!(gain_loss(&s, &lv(&[1]), &s).is_err());
    }

    #[test]
    fn linear_form_identity_small() {
        let y = lv(&[1, -1, -1, 1, 1]);
        let h = lv(&[-1, -1, 1, 1, -1]);
        let s = lv(&[1, 1, -1, 1, -1]);
        let (c, d) = linear_form(&h, &s, 3.0);
        let lin: f64 = c
            .iter()
            .zip(y.iter())
            .map(|(a, b)| a * f64::from(b))
            .sum::<f64>()
            + d;
        assert_eq!(lin, j_value(&y, &h, &s, 3.0).unwrap());
    }

    #[test]
    fn pool_of_ysvm_returns_ysvm() {
        let s = lv(&[1, -1, 1, -1, -1, 1]);
        let out = solve_maxmin(&[s.clone()], &s, 3.0).unwrap();
        assert_eq!(out.labels, s);
        assert_eq!(out.min_j_output, 0.0);
        assert!(!out.fallback_used);
    }

    #[test]
    fn pool_of_negated_ysvm_flips_everything() {
        let s = lv(&[1, -1, 1, -1, -1, 1, 1]);
        let out = solve_maxmin(&[s.negated()], &s, 3.0).unwrap();
        assert_eq!(out.labels, s.negated());
        assert_eq!(out.min_j_output, 7.0);
    }

    #[test]
    fn output_never_below_ysvm() {
        let s = lv(&[1, 1, -1, -1, 1, -1, 1, -1]);
        let pool = [
            lv(&[-1, 1, -1, -1, 1, -1, 1, -1]),
            lv(&[1, -1, -1, -1, 1, -1, 1, -1]),
            lv(&[1, 1, 1, 1, 1, 1, 1, 1]),
        ];
        let out = solve_maxmin(&pool, &s, 3.0).unwrap();
        assert!(out.min_j_output >= out.min_j_ysvm);
        assert_eq!(out.min_j_ysvm, 0.0);
        assert!(solve_maxmin(&[], &s, 3.0).is_err());
    }
}
