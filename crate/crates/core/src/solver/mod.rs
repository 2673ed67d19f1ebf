//! Exact optimization over the finite joint policy space and the yes/no
//! decision problem, plus the single-agent special cases.

use std::fmt;
use std::ops::Range;

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evaluation::Evaluator;
use crate::model::{DecPomdp, DecisionInstance};
use crate::policy::{JointPolicy, PolicyEnumerator};
use crate::rational::Rational;

mod mdp;
mod pomdp;

pub use mdp::{solve_mdp_dp, MdpSolution, NonstationaryPolicy};
pub use pomdp::solve_pomdp_exact;

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Largest policy space the solver will enumerate.
    pub budget: u64,
    /// Split the enumeration across the rayon pool.
    pub parallel: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { budget: DEFAULT_BUDGET, parallel: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub optimal_value: Rational,
    /// Lexicographically first maximizer.
    pub argmax_policy: JointPolicy,
    /// Size of the policy space that was searched.
    pub policies_examined: BigUint,
}

/// Contiguous index slices for the workers.
fn slices(len: u64, parallel: bool) -> Vec<Range<u64>> {
    let pieces = if parallel { (rayon::current_num_threads() as u64 * 8).max(1) } else { 1 };
    let step = len.div_ceil(pieces).max(1);
    (0..len).step_by(step as usize).map(|s| s..(s + step).min(len)).collect()
}

/// Best `(value, index)` in a slice; ties keep the smaller index.
fn best_in(evaluator: &Evaluator<'_>, enumerator: &PolicyEnumerator, range: Range<u64>) -> Result<Option<(Rational, u64)>> {
    let mut cursor = enumerator.cursor(range);
    let mut best: Option<(Rational, u64)> = None;
    while let Some((index, tables)) = cursor.advance() {
        let value = evaluator.evaluate_tables(tables)?.expected_total_reward;
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, index));
        }
    }
    Ok(best)
}

fn run_slices<T: Send>(
    ranges: Vec<Range<u64>>,
    parallel: bool,
    work: impl Fn(Range<u64>) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    if parallel {
        ranges.into_par_iter().map(work).collect()
    } else {
        ranges.into_iter().map(work).collect()
    }
}

/// Exhaustively maximizes the exact value over all joint policies.
pub fn solve_decpomdp_exact(model: &DecPomdp, horizon: usize, options: &SolveOptions) -> Result<SolveResult> {
    let evaluator = Evaluator::new(model, horizon)?;
    let enumerator = PolicyEnumerator::new(model, evaluator.spaces().to_vec(), options.budget)?;
    if enumerator.is_empty() {
        return Err(Error::InvalidModel("the joint policy space is empty".into()));
    }
    let partial = run_slices(slices(enumerator.len(), options.parallel), options.parallel, |r| {
        best_in(&evaluator, &enumerator, r)
    })?;
    // slices are in index order, so strict improvement keeps the first maximizer
    let mut best: Option<(Rational, u64)> = None;
    for (value, index) in partial.into_iter().flatten() {
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, index));
        }
    }
    let (optimal_value, index) = best.expect("nonempty policy space");
    Ok(SolveResult {
        optimal_value,
        argmax_policy: enumerator.policy_at(index),
        policies_examined: BigUint::from(enumerator.len()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Yes,
    No,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Yes => "YES",
            Answer::No => "NO",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DecideOptions {
    pub solve: SolveOptions,
    /// Stop at the first policy (in lexicographic order) reaching the threshold.
    pub early_exit: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub answer: Answer,
    /// The optimum; absent when the search stopped early.
    pub optimal_value: Option<Rational>,
    /// A policy reaching the threshold (the argmax when fully optimized).
    pub witness: Option<JointPolicy>,
    pub policies_examined: BigUint,
}

/// Is there a joint policy with expected total reward at least the threshold?
pub fn decide(instance: &DecisionInstance, options: &DecideOptions) -> Result<Decision> {
    let DecisionInstance { model, horizon, threshold } = instance;
    if !options.early_exit {
        let result = solve_decpomdp_exact(model, *horizon, &options.solve)?;
        let yes = result.optimal_value >= *threshold;
        return Ok(Decision {
            answer: if yes { Answer::Yes } else { Answer::No },
            optimal_value: Some(result.optimal_value),
            witness: yes.then_some(result.argmax_policy),
            policies_examined: result.policies_examined,
        });
    }
    let evaluator = Evaluator::new(model, *horizon)?;
    let enumerator = PolicyEnumerator::new(model, evaluator.spaces().to_vec(), options.solve.budget)?;
    let first_in = |range: Range<u64>| -> Result<Option<u64>> {
        let mut cursor = enumerator.cursor(range);
        while let Some((index, tables)) = cursor.advance() {
            if evaluator.evaluate_tables(tables)?.expected_total_reward >= *threshold {
                return Ok(Some(index));
            }
        }
        Ok(None)
    };
    let ranges = slices(enumerator.len(), options.solve.parallel);
    let found = if options.solve.parallel {
        ranges
            .into_par_iter()
            .map(first_in)
            .find_map_first(|r| match r {
                Ok(None) => None,
                other => Some(other),
            })
            .transpose()?
            .flatten()
    } else {
        let mut found = None;
        for r in ranges {
            if let Some(i) = first_in(r)? {
                found = Some(i);
                break;
            }
        }
        found
    };
    Ok(match found {
        Some(index) => Decision {
            answer: Answer::Yes,
            optimal_value: None,
            witness: Some(enumerator.policy_at(index)),
            policies_examined: BigUint::from(index + 1),
        },
        None => Decision {
            answer: Answer::No,
            optimal_value: None,
            witness: None,
            policies_examined: BigUint::from(enumerator.len()),
        },
    })
}
