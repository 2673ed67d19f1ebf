#![allow(dead_code)]

use decpomdp::model::{AgentSpec, DecPomdp, Mdp, Pomdp};
use decpomdp::tiling::TilingInstance;
use decpomdp::Rational;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|k| format!("{prefix}{k}")).collect()
}

/// A random distribution over `support` with small denominators.
pub fn distribution(rng: &mut ChaCha8Rng, support: &[usize]) -> Vec<(usize, Rational)> {
    let weights: Vec<i64> = loop {
        let w: Vec<i64> = support.iter().map(|_| rng.gen_range(0..4)).collect();
        if w.iter().sum::<i64>() > 0 {
            break w;
        }
    };
    let total: i64 = weights.iter().sum();
    support
        .iter()
        .zip(weights)
        .filter(|(_, w)| *w > 0)
        .map(|(&x, w)| (x, Rational::new(w, total).unwrap()))
        .collect()
}

fn subset(rng: &mut ChaCha8Rng, n: usize, max: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    let k = rng.gen_range(1..=max.min(n));
    let mut s = all[..k].to_vec();
    s.sort();
    s
}

pub fn reward(rng: &mut ChaCha8Rng) -> Rational {
    Rational::new(rng.gen_range(-4..=4), rng.gen_range(1..=3)).unwrap()
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub agents: usize,
    pub max_states: usize,
    pub max_actions: usize,
    pub max_observations: usize,
    /// Largest transition support per row.
    pub max_support: usize,
    pub horizon: usize,
}

/// A random well-formed model, sometimes with observation-dependent action sets.
pub fn random_decpomdp(rng: &mut ChaCha8Rng, shape: Shape) -> DecPomdp {
    let n = rng.gen_range(1..=shape.max_states);
    let mut agents = Vec::new();
    for _ in 0..shape.agents {
        let actions = rng.gen_range(1..=shape.max_actions);
        let observations = rng.gen_range(1..=shape.max_observations);
        let restrict = rng.gen_bool(0.3);
        let pick = |rng: &mut ChaCha8Rng| {
            if restrict { subset(rng, actions, actions) } else { (0..actions).collect() }
        };
        let initial_actions = pick(rng);
        let actions_by_observation = (0..observations).map(|_| pick(rng)).collect();
        agents.push(AgentSpec {
            observations: names("o", observations),
            actions: names("a", actions),
            initial_actions,
            actions_by_observation,
        });
    }
    let mut b = DecPomdp::builder(names("s", n), rng.gen_range(0..n));
    for a in &agents {
        b = b.agent(a.clone());
    }
    let mut b = b.horizon(shape.horizon);
    let joint: Vec<Vec<usize>> = product(&agents.iter().map(|a| a.actions.len()).collect::<Vec<_>>());
    let joint_obs: Vec<Vec<usize>> = product(&agents.iter().map(|a| a.observations.len()).collect::<Vec<_>>());
    for s in 0..n {
        for ja in &joint {
            let support = subset(rng, n, shape.max_support);
            for (s2, p) in distribution(rng, &support) {
                b.transition(s, ja, s2, p);
            }
            if rng.gen_bool(0.7) {
                b.reward(s, ja, reward(rng));
            }
        }
    }
    for ja in &joint {
        for s2 in 0..n {
            let support = subset(rng, joint_obs.len(), joint_obs.len());
            for (o, p) in distribution(rng, &support) {
                b.observation(ja, s2, &joint_obs[o], p);
            }
        }
    }
    b.build().expect("generated model is well formed")
}

/// All tuples with `tuple[k] < sizes[k]`, first coordinate slowest.
pub fn product(sizes: &[usize]) -> Vec<Vec<usize>> {
    sizes.iter().fold(vec![vec![]], |acc, &n| {
        acc.into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |x| {
                    let mut t = prefix.clone();
                    t.push(x);
                    t
                })
            })
            .collect()
    })
}

pub fn random_pomdp(rng: &mut ChaCha8Rng, max_states: usize, horizon: usize) -> Pomdp {
    let shape = Shape { agents: 1, max_states, max_actions: 2, max_observations: 2, max_support: max_states, horizon };
    Pomdp::new(random_decpomdp(rng, shape)).unwrap()
}

/// A fully observable model; row supports are kept small enough that the
/// history-indexed policy space stays enumerable.
pub fn random_mdp(rng: &mut ChaCha8Rng, max_states: usize, max_actions: usize, horizon: usize) -> Mdp {
    let n = rng.gen_range(1..=max_states);
    let actions = rng.gen_range(1..=max_actions);
    let max_support = if horizon >= 3 { 2 } else { n };
    let available: Vec<Vec<usize>> = (0..n).map(|_| subset(rng, actions, actions)).collect();
    let mut transitions = Vec::new();
    let mut rewards = Vec::new();
    for s in 0..n {
        for a in 0..actions {
            let support = subset(rng, n, max_support);
            for (s2, p) in distribution(rng, &support) {
                transitions.push((s, a, s2, p));
            }
            rewards.push((s, a, reward(rng)));
        }
    }
    Mdp::new(names("s", n), rng.gen_range(0..n), names("a", actions), available, &transitions, &rewards, horizon)
        .expect("generated mdp is well formed")
}

pub fn tile_names(k: usize) -> Vec<String> {
    (0..k).map(|t| format!("t{t}")).collect()
}

pub fn all_pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k).flat_map(|a| (0..k).map(move |b| (a, b))).collect()
}

/// Relations keep each pair independently with probability `density`.
pub fn random_tiling(rng: &mut ChaCha8Rng, tiles: usize, n: u64, density: f64) -> TilingInstance {
    let pairs = all_pairs(tiles);
    let h: Vec<_> = pairs.iter().copied().filter(|_| rng.gen_bool(density)).collect();
    let v: Vec<_> = pairs.iter().copied().filter(|_| rng.gen_bool(density)).collect();
    TilingInstance::new(tile_names(tiles), h, v, n).unwrap()
}

/// Subset of `pairs` selected by the bits of `mask`.
pub fn masked(pairs: &[(usize, usize)], mask: u32) -> Vec<(usize, usize)> {
    pairs
        .iter()
        .enumerate()
        .filter(|(b, _)| mask >> b & 1 == 1)
        .map(|(_, p)| *p)
        .collect()
}
