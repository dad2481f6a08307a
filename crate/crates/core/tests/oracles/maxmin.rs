//! Exhaustive max-min over all label vectors, with gain and loss evaluated
//! from their product form.

/// `(1+y ŷ)/2 · (1−s ŷ)/2` summed, and `(1−y ŷ)/2 · (1+s ŷ)/2` summed.
pub fn gain_loss(y: &[i8], yhat: &[i8], ysvm: &[i8]) -> (f64, f64) {
    let mut g = 0.0;
    let mut l = 0.0;
    for j in 0..y.len() {
        let (a, b, s) = (f64::from(y[j]), f64::from(yhat[j]), f64::from(ysvm[j]));
        g += (1.0 + a * b) / 2.0 * (1.0 - s * b) / 2.0;
        l += (1.0 - a * b) / 2.0 * (1.0 + s * b) / 2.0;
    }
    (g, l)
}

pub fn min_j(y: &[i8], pool: &[Vec<i8>], ysvm: &[i8], lambda: f64) -> f64 {
    pool.iter()
        .map(|h| {
            let (g, l) = gain_loss(y, h, ysvm);
            g - lambda * l
        })
        .fold(f64::INFINITY, f64::min)
}

/// Maximum of `min_t J` over `{±1}^u`.
pub fn best(pool: &[Vec<i8>], ysvm: &[i8], lambda: f64) -> f64 {
    let u = ysvm.len();
    assert!(u <= 20);
    (0u32..1 << u)
        .map(|mask| {
            let y: Vec<i8> = (0..u)
                .map(|j| if mask >> j & 1 == 1 { -1 } else { 1 })
                .collect();
            min_j(&y, pool, ysvm, lambda)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
