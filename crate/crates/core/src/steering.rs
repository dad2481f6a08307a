//! Steering detection through the dual witness SDP.
//!
//! For an assemblage `σ_{a|A}` the witness problem is
//!
//! ```text
//! minimize    Σ_{a,A} tr(F_{a|A} σ_{a|A})
//! subject to  Σ_{a,A} D(a|A,λ) F_{a|A} ⪰ 0         for every strategy λ
//!             tr Σ_λ Σ_{a,A} D(a|A,λ) F_{a|A} = 1
//! ```
//!
//! A negative optimum certifies that no local-hidden-state model reproduces
//! the assemblage.
//!
//! The map `F ↦ (Σ_A F_{λ(A)|A})_λ` is not injective: shifting `F_{·|A}` by
//! `G_A` with `Σ_A G_A = 0` leaves every block unchanged, and by no-signaling
//! it leaves the objective unchanged too. The solver therefore works in the
//! gauge `F_{q−1|A} = 0` for `A ≥ 1`, which keeps the Schur complement
//! nonsingular without changing the optimum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herm::Herm2;
use crate::qstate::{random_measurement_set, Assemblage, MeasurementSet, TwoQubitState};
use crate::rng::derive_seed;
use crate::sdp::{ip_solve, HermEquality, HermitianLmi, IpmSettings, LmiBlock, SolveStatus};

/// Largest number of deterministic strategies the enumeration will build.
pub const MAX_STRATEGIES: usize = 1 << 16;

/// All `q^m` deterministic response functions; row `λ` holds `λ(A)` for each
/// measurement `A`. Rows are in lexicographic order with measurement 0 as
/// the most significant digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyTable {
    measurements: usize,
    outcomes: usize,
    table: Vec<Vec<u8>>,
}

impl StrategyTable {
    pub fn rows(&self) -> &[Vec<u8>] {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn measurements(&self) -> usize {
        self.measurements
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    /// `D(a|A,λ)`.
    pub fn response(&self, lambda: usize, measurement: usize, outcome: usize) -> bool {
        usize::from(self.table[lambda][measurement]) == outcome
    }
}

pub fn enumerate_strategies(m: usize, q: usize) -> Result<StrategyTable> {
    if m == 0 || q < 2 {
        return Err(Error::domain(
            "need at least one measurement and two outcomes",
        ));
    }
    if q > usize::from(u8::MAX) + 1 {
        return Err(Error::Size(format!("{q} outcomes")));
    }
    let count = (0..m)
        .try_fold(1usize, |acc, _| {
            acc.checked_mul(q).filter(|&c| c <= MAX_STRATEGIES)
        })
        .ok_or_else(|| Error::Size(format!("{q}^{m} strategies exceed {MAX_STRATEGIES}")))?;
    let table = (0..count)
        .map(|mut idx| {
            let mut row = vec![0u8; m];
            for slot in row.iter_mut().rev() {
                *slot = (idx % q) as u8;
                idx /= q;
            }
            row
        })
        .collect();
    Ok(StrategyTable {
        measurements: m,
        outcomes: q,
        table,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpSettings {
    /// Duality-gap threshold handed to the interior-point solver.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Objectives strictly below this value count as steerable.
    pub steerable_threshold: f64,
}

impl Default for SdpSettings {
    fn default() -> Self {
        SdpSettings {
            tolerance: 1e-8,
            max_iterations: 200,
            steerable_threshold: -1e-6,
        }
    }
}

impl SdpSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::domain("SDP tolerance must be positive"));
        }
        if !(self.steerable_threshold < 0.0) {
            return Err(Error::domain("steerable threshold must be negative"));
        }
        if self.max_iterations == 0 {
            return Err(Error::domain("SDP iteration budget must be positive"));
        }
        Ok(())
    }
}

/// Dual witness for one assemblage; `f[A][a]` is `F_{a|A}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteeringWitness {
    pub f: Vec<Vec<Herm2>>,
    /// `Σ tr(F_{a|A} σ_{a|A})`, recomputed from `f`.
    pub objective: f64,
    pub status: SolveStatus,
    pub iterations: usize,
}

impl SteeringWitness {
    /// `Σ_{a,A} D(a|A,λ) F_{a|A}` for strategy row `λ`.
    pub fn block(&self, strategy: &[u8]) -> Herm2 {
        strategy
            .iter()
            .enumerate()
            .fold(Herm2::ZERO, |acc, (a_idx, &out)| {
                acc + self.f[a_idx][usize::from(out)]
            })
    }

    /// Smallest eigenvalue over all strategy blocks.
    pub fn min_block_eigenvalue(&self, strategies: &StrategyTable) -> f64 {
        strategies
            .rows()
            .iter()
            .map(|row| self.block(row).min_eigenvalue())
            .fold(f64::INFINITY, f64::min)
    }

    /// `tr Σ_λ Σ_{a,A} D(a|A,λ) F_{a|A}`.
    pub fn normalization(&self, strategies: &StrategyTable) -> f64 {
        strategies
            .rows()
            .iter()
            .map(|row| self.block(row).trace())
            .sum()
    }

    pub fn pairing(&self, assemblage: &Assemblage) -> f64 {
        self.f
            .iter()
            .enumerate()
            .flat_map(|(mi, row)| {
                row.iter()
                    .enumerate()
                    .map(move |(a, fm)| fm.trace_product(&assemblage.member(mi, a)))
            })
            .sum()
    }

    pub fn is_steerable(&self, settings: &SdpSettings) -> bool {
        self.status == SolveStatus::Optimal && self.objective < settings.steerable_threshold
    }
}

/// Variable index of `F_{a|A}` in the gauge-fixed parametrization, or
/// `None` for members pinned to zero.
fn gauge_index(measurement: usize, outcome: usize, q: usize) -> Option<usize> {
    if measurement == 0 {
        Some(outcome)
    } else if outcome + 1 < q {
        Some(q + (measurement - 1) * (q - 1) + outcome)
    } else {
        None
    }
}

/// Builds the gauge-fixed witness LMI for an assemblage.
pub fn witness_problem(assemblage: &Assemblage) -> Result<(HermitianLmi, StrategyTable)> {
    let m = assemblage.measurements();
    let q = assemblage.outcomes();
    let strategies = enumerate_strategies(m, q)?;
    let num_vars = q + (m - 1) * (q - 1);

    let mut objective = vec![Herm2::ZERO; num_vars];
    for mi in 0..m {
        for a in 0..q {
            if let Some(g) = gauge_index(mi, a, q) {
                objective[g] = assemblage.member(mi, a);
            }
        }
    }
    let blocks = strategies
        .rows()
        .iter()
        .map(|row| LmiBlock {
            offset: Herm2::ZERO,
            terms: row
                .iter()
                .enumerate()
                .filter_map(|(mi, &a)| gauge_index(mi, usize::from(a), q).map(|g| (g, 1.0)))
                .collect(),
        })
        .collect();
    // Each F_{a|A} appears in q^{m−1} strategy blocks.
    let mult = (strategies.len() / q) as f64;
    let equality = HermEquality {
        terms: (0..num_vars).map(|g| (g, Herm2::IDENTITY * mult)).collect(),
        rhs: 1.0,
    };
    Ok((
        HermitianLmi {
            num_vars,
            objective,
            blocks,
            equalities: vec![equality],
        },
        strategies,
    ))
}

/// Solves the witness SDP. A [`SolveStatus::MaxIterations`] result is
/// inconclusive and never counts as steerable.
pub fn solve_steering_sdp(
    assemblage: &Assemblage,
    settings: &SdpSettings,
) -> Result<SteeringWitness> {
    settings.validate()?;
    let (problem, _) = witness_problem(assemblage)?;
    let m = assemblage.measurements();
    let q = assemblage.outcomes();
    let sol = ip_solve(
        &problem,
        &IpmSettings {
            tolerance: settings.tolerance,
            max_iterations: settings.max_iterations,
        },
    )?;
    let f: Vec<Vec<Herm2>> = (0..m)
        .map(|mi| {
            (0..q)
                .map(|a| gauge_index(mi, a, q).map_or(Herm2::ZERO, |g| sol.vars[g]))
                .collect()
        })
        .collect();
    let mut witness = SteeringWitness {
        f,
        objective: 0.0,
        status: sol.status,
        iterations: sol.iterations,
    };
    witness.objective = witness.pairing(assemblage);
    Ok(witness)
}

/// Outcome of the repeated-measurement labeling rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelOutcome {
    /// `-1` steerable, `+1` otherwise.
    pub label: i8,
    /// Solves actually run (early exit on the first certificate).
    pub trials_run: usize,
    /// Trial index, measurement set and witness of the certificate, if any.
    pub certificate: Option<Certificate>,
    /// Solves that ended without a conclusive status.
    pub inconclusive: usize,
    pub min_objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub trial: usize,
    pub seed: u64,
    pub measurements: MeasurementSet,
    pub witness: SteeringWitness,
}

/// Seed of trial `t`'s measurement set.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    derive_seed(seed, "measurements", trial as u64)
}

/// Labels a state `-1` if any of `trials` random `m`-measurement sets yields
/// a witness objective below the steerable threshold, `+1` otherwise.
pub fn label_state(
    state: &TwoQubitState,
    m: usize,
    trials: usize,
    settings: &SdpSettings,
    seed: u64,
) -> Result<LabelOutcome> {
    if m == 0 {
        return Err(Error::domain("measurement count must be at least 1"));
    }
    settings.validate()?;
    // Surface the size guard before any work.
    enumerate_strategies(m, 2)?;
    let mut outcome = LabelOutcome {
        label: 1,
        trials_run: 0,
        certificate: None,
        inconclusive: 0,
        min_objective: f64::INFINITY,
    };
    for trial in 0..trials {
        let tseed = trial_seed(seed, trial);
        let ms = random_measurement_set(m, tseed)?;
        let asm = Assemblage::from_state(state, &ms);
        let witness = solve_steering_sdp(&asm, settings)?;
        outcome.trials_run += 1;
        if witness.status != SolveStatus::Optimal {
            outcome.inconclusive += 1;
            continue;
        }
        outcome.min_objective = outcome.min_objective.min(witness.objective);
        if witness.is_steerable(settings) {
            outcome.label = -1;
            outcome.certificate = Some(Certificate {
                trial,
                seed: tseed,
                measurements: ms,
                witness,
            });
            break;
        }
    }
    Ok(outcome)
}

/// JSON dump of a witness: per-(a, A) real and imaginary 2×2 parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessDump {
    pub members: Vec<WitnessMember>,
    pub objective: f64,
    pub status: SolveStatus,
    pub measurements: Vec<[f64; 3]>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessMember {
    pub measurement: usize,
    pub outcome: usize,
    pub re: [[f64; 2]; 2],
    pub im: [[f64; 2]; 2],
}

impl WitnessDump {
    pub fn new(witness: &SteeringWitness, measurements: &MeasurementSet, seed: u64) -> Self {
        let members = witness
            .f
            .iter()
            .enumerate()
            .flat_map(|(mi, row)| {
                row.iter().enumerate().map(move |(a, h)| {
                    let m = h.to_matrix();
                    WitnessMember {
                        measurement: mi,
                        outcome: a,
                        re: [[m[(0, 0)].re, m[(0, 1)].re], [m[(1, 0)].re, m[(1, 1)].re]],
                        im: [[m[(0, 0)].im, m[(0, 1)].im], [m[(1, 0)].im, m[(1, 1)].im]],
                    }
                })
            })
            .collect();
        WitnessDump {
            members,
            objective: witness.objective,
            status: witness.status,
            measurements: measurements.bloch_vectors(),
            seed,
        }
    }
}
