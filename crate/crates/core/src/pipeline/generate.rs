use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qstate::random_density_matrix;
use crate::rng::derive_seed;
use crate::steering::{label_state, SdpSettings};
use crate::svm::{Dataset, Features};

/// Draw budget per requested point.
pub const GENERATION_DRAW_FACTOR: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedDataset {
    /// Accepted rows in draw order.
    pub data: Dataset,
    /// Random states examined before both quotas filled.
    pub draws: usize,
    /// Of those, how many the SDP labeled `-1`.
    pub raw_negative: usize,
}

impl GeneratedDataset {
    /// Fraction of examined random states labeled `-1`.
    pub fn raw_negative_rate(&self) -> f64 {
        self.raw_negative as f64 / self.draws as f64
    }
}

/// `n/2` states of each label, by rejection over Hilbert–Schmidt random
/// states. Draw `i` uses state seed `derive(seed, "state", i)` and labeling
/// seed `derive(seed, "label", i)`; draws are accepted in index order, so the
/// result does not depend on the thread count.
pub fn generate_balanced_dataset(
    n: usize,
    m: usize,
    trials: usize,
    sdp: &SdpSettings,
    seed: u64,
) -> Result<GeneratedDataset> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::domain(format!(
            "dataset size n = {n} must be even and positive"
        )));
    }
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    let budget = GENERATION_DRAW_FACTOR.saturating_mul(n);
    let quota = n / 2;
    let batch = (8 * rayon::current_num_threads()).max(8);
    let mut rows: Vec<Features> = Vec::with_capacity(n);
    let mut labels: Vec<i8> = Vec::with_capacity(n);
    let (mut pos, mut neg) = (0, 0);
    let mut draws = 0;
    let mut raw_negative = 0;
    while pos < quota || neg < quota {
        if draws >= budget {
            return Err(Error::Generation(format!(
                "after {draws} draws only {} of {quota} unsteerable and {} of {quota} steerable states",
                pos, neg
            )));
        }
        let end = (draws + batch).min(budget);
        let labeled = (draws..end)
            .into_par_iter()
            .map(|i| {
                let state = random_density_matrix(derive_seed(seed, "state", i as u64));
                let out =
                    label_state(&state, m, trials, sdp, derive_seed(seed, "label", i as u64))?;
                Ok((state.feature_vector().0, out.label))
            })
            .collect::<Result<Vec<_>>>()?;
        for (x, y) in labeled {
            draws += 1;
            let taken = if y < 0 {
                raw_negative += 1;
                &mut neg
            } else {
                &mut pos
            };
            if *taken < quota {
                *taken += 1;
                rows.push(x);
                labels.push(y);
            }
            if pos == quota && neg == quota {
                break;
            }
        }
    }
    Ok(GeneratedDataset {
        data: Dataset::new(rows, labels)?,
        draws,
        raw_negative,
    })
}
