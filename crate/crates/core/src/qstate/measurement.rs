use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::state::TwoQubitState;
use crate::error::{Error, Result};
use crate::herm::Herm2;
use crate::rng::rng_from_seed;

/// Two-outcome projective qubit measurement along a Bloch direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    bloch: [f64; 3],
}

impl Measurement {
    pub fn new(direction: [f64; 3]) -> Result<Self> {
        let n = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::domain(
                "measurement direction must be a non-zero finite vector",
            ));
        }
        Ok(Measurement {
            bloch: direction.map(|x| x / n),
        })
    }

    pub fn x() -> Self {
        Measurement {
            bloch: [1.0, 0.0, 0.0],
        }
    }

    pub fn y() -> Self {
        Measurement {
            bloch: [0.0, 1.0, 0.0],
        }
    }

    pub fn z() -> Self {
        Measurement {
            bloch: [0.0, 0.0, 1.0],
        }
    }

    pub fn bloch(&self) -> [f64; 3] {
        self.bloch
    }

    /// `M⁰ = (I + n·σ)/2`, `M¹ = (I − n·σ)/2`.
    pub fn effect(&self, outcome: usize) -> Herm2 {
        let sign = if outcome == 0 { 0.5 } else { -0.5 };
        Herm2::from_bloch(0.5, self.bloch.map(|x| sign * x))
    }

    pub fn effects(&self) -> [Herm2; 2] {
        [self.effect(0), self.effect(1)]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    measurements: Vec<Measurement>,
}

impl MeasurementSet {
    pub fn new(measurements: Vec<Measurement>) -> Result<Self> {
        if measurements.is_empty() {
            return Err(Error::domain(
                "a measurement set needs at least one measurement",
            ));
        }
        Ok(MeasurementSet { measurements })
    }

    pub fn len(&self) -> usize {
        self.measurements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measurements.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Measurement> {
        self.measurements.iter()
    }

    pub fn as_slice(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn bloch_vectors(&self) -> Vec<[f64; 3]> {
        self.measurements.iter().map(|m| m.bloch()).collect()
    }
}

/// `m` projective measurements with directions uniform on the sphere
/// (normalized Gaussian triples). Deterministic per seed.
pub fn random_measurement_set(m: usize, seed: u64) -> Result<MeasurementSet> {
    if m == 0 {
        return Err(Error::domain("measurement count must be at least 1"));
    }
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let v: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        // Probability-zero event, but keep the draw well defined.
        if let Ok(meas) = Measurement::new(v) {
            out.push(meas);
        }
    }
    MeasurementSet::new(out)
}

/// Bob's conditional states `σ_{a|A}`, indexed `[A][a]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assemblage {
    sigma: Vec<Vec<Herm2>>,
}

impl Assemblage {
    /// `σ_{a|A} = tr_A((M^a_A ⊗ I) ρ)`.
    pub fn from_state(state: &TwoQubitState, ms: &MeasurementSet) -> Self {
        let rho = state.matrix();
        let sigma = ms
            .iter()
            .map(|meas| {
                meas.effects()
                    .iter()
                    .map(|effect| {
                        let e = effect.to_matrix();
                        let m = crate::herm::Mat2::from_fn(|b, bp| {
                            let mut acc = num_complex::Complex64::new(0.0, 0.0);
                            for a in 0..2 {
                                for ap in 0..2 {
                                    acc += e[(a, ap)] * rho[(2 * ap + b, 2 * a + bp)];
                                }
                            }
                            acc
                        });
                        Herm2::from_matrix(&m)
                    })
                    .collect()
            })
            .collect();
        Assemblage { sigma }
    }

    /// Builds an assemblage from raw members, checking shape, positivity and
    /// no-signaling. The total trace is not constrained, so scaled
    /// assemblages are representable.
    pub fn from_parts(sigma: Vec<Vec<Herm2>>) -> Result<Self> {
        let a = Assemblage { sigma };
        a.check_shape()?;
        a.check_positive(1e-10)?;
        let ns = a.no_signaling_error();
        if ns > 1e-10 {
            return Err(Error::domain(format!(
                "assemblage violates no-signaling by {ns:e}"
            )));
        }
        Ok(a)
    }

    fn check_shape(&self) -> Result<()> {
        let q = self.sigma.first().map_or(0, Vec::len);
        if self.sigma.is_empty() || q < 2 || self.sigma.iter().any(|row| row.len() != q) {
            return Err(Error::domain(
                "assemblage must be a non-empty m×q table with q ≥ 2",
            ));
        }
        Ok(())
    }

    fn check_positive(&self, tol: f64) -> Result<()> {
        for (mi, row) in self.sigma.iter().enumerate() {
            for (a, s) in row.iter().enumerate() {
                if s.min_eigenvalue() < -tol {
                    return Err(Error::domain(format!("σ_{{{a}|{mi}}} is not PSD")));
                }
            }
        }
        Ok(())
    }

    pub fn measurements(&self) -> usize {
        self.sigma.len()
    }

    pub fn outcomes(&self) -> usize {
        self.sigma[0].len()
    }

    pub fn member(&self, measurement: usize, outcome: usize) -> Herm2 {
        self.sigma[measurement][outcome]
    }

    pub fn rows(&self) -> &[Vec<Herm2>] {
        &self.sigma
    }

    /// `Σ_a σ_{a|A}` for measurement `A`.
    pub fn marginal(&self, measurement: usize) -> Herm2 {
        self.sigma[measurement]
            .iter()
            .fold(Herm2::ZERO, |acc, s| acc + *s)
    }

    /// Largest entrywise deviation between the per-measurement marginals.
    pub fn no_signaling_error(&self) -> f64 {
        let first = self.marginal(0);
        (1..self.measurements())
            .map(|a| self.marginal(a).max_abs_diff(&first))
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Assemblage {
        Assemblage {
            sigma: self
                .sigma
                .iter()
                .map(|row| row.iter().map(|s| *s * c).collect())
                .collect(),
        }
    }

    /// Restricts to the given measurement indices, in that order.
    pub fn select(&self, measurements: &[usize]) -> Assemblage {
        Assemblage {
            sigma: measurements
                .iter()
                .map(|&i| self.sigma[i].clone())
                .collect(),
        }
    }
}
