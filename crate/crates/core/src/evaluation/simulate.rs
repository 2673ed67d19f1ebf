use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Evaluator;
use crate::error::{Error, Result};
use crate::model::DecPomdp;
use crate::policy::{HistorySpace, JointPolicy};
use crate::rational::Rational;

/// Monte Carlo estimate of the expected total reward.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleEstimate {
    pub mean: f64,
    /// Unbiased sample variance of the per-episode totals.
    pub variance: f64,
    pub episodes: u64,
}

impl SampleEstimate {
    pub fn std_error(&self) -> f64 {
        if self.episodes == 0 {
            return 0.0;
        }
        (self.variance / self.episodes as f64).sqrt()
    }
}

fn sample<'a, T>(rng: &mut ChaCha8Rng, row: &'a [(T, Rational)]) -> Option<&'a T> {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (item, p) in row {
        acc += p.to_f64();
        if u < acc {
            return Some(item);
        }
    }
    // rounding slack lands on the last entry
    row.last().map(|(item, _)| item)
}

/// Runs `episodes` independent episodes with a generator seeded by `seed`.
pub fn simulate(
    model: &DecPomdp,
    policy: &JointPolicy,
    horizon: usize,
    episodes: u64,
    seed: u64,
) -> Result<SampleEstimate> {
    let evaluator = Evaluator::new(model, horizon)?;
    let tables = evaluator.tables_for(policy)?;
    let spaces = evaluator.spaces();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut joint = vec![0; spaces.len()];

    let mut mean = 0.0;
    let mut m2 = 0.0;
    for k in 0..episodes {
        let mut state = model.start();
        let mut hist = vec![HistorySpace::ROOT; spaces.len()];
        let mut total = 0.0;
        for epoch in 0..horizon {
            let ja = evaluator.joint_action(&tables, &hist, &mut joint)?;
            if let Some(r) = model.reward(state, ja) {
                total += r.to_f64();
            }
            if epoch + 1 == horizon {
                break;
            }
            let next = *sample(&mut rng, model.transition_row(state, ja))
                .ok_or_else(|| Error::Internal("empty transition row".into()))?;
            let obs = sample(&mut rng, model.observation_row(ja, next))
                .ok_or_else(|| Error::Internal("empty observation row".into()))?;
            for (i, h) in hist.iter_mut().enumerate() {
                *h = spaces[i]
                    .child(*h, obs[i])
                    .ok_or_else(|| Error::Internal("history missing from reachable closure".into()))?;
            }
            state = next;
        }
        // Welford
        let delta = total - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (total - mean);
    }
    let variance = if episodes > 1 { m2 / (episodes - 1) as f64 } else { 0.0 };
    Ok(SampleEstimate { mean, variance, episodes })
}
