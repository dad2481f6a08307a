//! Second Hilbert–Schmidt sampler: `G G† / tr(G G†)` with `G` a 4×4 matrix of
//! standard complex Gaussians from a Box–Muller transform over a different
//! generator, in plain arrays.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn gaussian_pair(rng: &mut StdRng) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    (r * th.cos(), r * th.sin())
}

/// `tr(ρ²)` of one draw.
pub fn purity(rng: &mut StdRng) -> f64 {
    let mut g = [[(0.0, 0.0); 4]; 4];
    for row in g.iter_mut() {
        for v in row.iter_mut() {
            *v = gaussian_pair(rng);
        }
    }
    // ρ_ij ∝ Σ_k g_ik conj(g_jk)
    let mut re = [[0.0; 4]; 4];
    let mut im = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let (a, b) = g[i][k];
                let (c, d) = g[j][k];
                re[i][j] += a * c + b * d;
                im[i][j] += b * c - a * d;
            }
        }
    }
    let trace: f64 = (0..4).map(|i| re[i][i]).sum();
    let mut p = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            p += re[i][j] * re[i][j] + im[i][j] * im[i][j];
        }
    }
    p / (trace * trace)
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
