//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use decpomdp::evaluation::{exact_value, simulate};
use decpomdp::model::{check_joint_observability, AgentId, Pomdp};
use decpomdp::policy::{count_local_policies, enumerate_joint_policies, JointPolicy};
use decpomdp::reduction::{
    build_component_dfas, compile_tiling_to_decpomdp, dfa_run, lift_pomdp_to_two_agent_decmdp,
    lift_to_three_agent_decmdp, tiling_to_local_policy,
};
use decpomdp::solver::{solve_decpomdp_exact, solve_mdp_dp, solve_pomdp_exact, SolveOptions};
use decpomdp::tiling::{check_tiling, solve_tiling_bruteforce, TilingInstance};
use decpomdp::Rational;
use rand::Rng;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn opts() -> SolveOptions {
    SolveOptions::default()
}

/// Oracle and compiled optimum agree on one instance; returns whether it tiles.
fn equivalence_holds(inst: &TilingInstance) -> Result<bool, String> {
    let tiled = solve_tiling_bruteforce(inst, 1_000_000).map_err(|e| e.to_string())?;
    if let Some(f) = &tiled {
        ensure(check_tiling(inst, f).unwrap().is_consistent(), || format!("oracle witness inconsistent: {inst:?}"))?;
    }
    let art = compile_tiling_to_decpomdp(inst).map_err(|e| e.to_string())?;
    let r = solve_decpomdp_exact(&art.model, art.horizon, &opts()).map_err(|e| e.to_string())?;
    ensure(tiled.is_some() == r.optimal_value.is_zero(), || {
        format!("oracle says {} but optimum is {} for {inst:?}", tiled.is_some(), r.optimal_value)
    })?;
    if tiled.is_none() {
        let bound = -Rational::dyadic(4 * art.product.bits() as u32);
        ensure(r.optimal_value <= bound, || format!("unsatisfiable optimum {} above {bound}", r.optimal_value))?;
    }
    Ok(tiled.is_some())
}

fn criterion_1() -> Outcome {
    let mut count = 0;
    let mut tiled = 0;
    for k in [1usize, 2] {
        let pairs = all_pairs(k);
        let masks = 1u32 << pairs.len();
        for h in 0..masks {
            for v in 0..masks {
                let inst = TilingInstance::new(tile_names(k), masked(&pairs, h), masked(&pairs, v), 2).unwrap();
                tiled += equivalence_holds(&inst)? as usize;
                count += 1;
            }
        }
    }
    let mut rng = rng(1);
    for _ in 0..200 {
        let density = rng.gen_range(0.3..0.9);
        let inst = random_tiling(&mut rng, 3, 2, density);
        tiled += equivalence_holds(&inst)? as usize;
        count += 1;
    }
    Ok(format!("{count} instances at n=2 ({tiled} tileable), oracle and optimum agree on all"))
}

fn criterion_2() -> Outcome {
    let mut rng = rng(2);
    let (mut sat, mut unsat) = (0, 0);
    let mut sampled = 0;
    let mut tries = 0;
    while sat < 20 || unsat < 20 {
        tries += 1;
        ensure(tries < 5000, || "could not find enough instances".into())?;
        let k = rng.gen_range(2..=3);
        let density = rng.gen_range(0.3..0.8);
        let inst = random_tiling(&mut rng, k, 4, density);
        let oracle = solve_tiling_bruteforce(&inst, 10_000_000).map_err(|e| e.to_string())?;
        let art = compile_tiling_to_decpomdp(&inst).map_err(|e| e.to_string())?;
        match oracle {
            Some(f) if sat < 20 => {
                let p = JointPolicy::new(
                    (0..2).map(|a| tiling_to_local_policy(&inst, &f, &art, AgentId(a)).unwrap()).collect(),
                );
                let v = exact_value(&art.model, &p, art.horizon).unwrap().expected_total_reward;
                ensure(v.is_zero(), || format!("tiling policy earns {v} on {inst:?}"))?;
                sat += 1;
            }
            None if unsat < 20 => {
                let policies = enumerate_joint_policies(&art.model, art.horizon, u64::MAX).map_err(|e| e.to_string())?;
                let bound = -Rational::dyadic(8);
                for _ in 0..1000 {
                    let p = policies.policy_at(rng.gen_range(0..policies.len()));
                    let v = exact_value(&art.model, &p, art.horizon).unwrap().expected_total_reward;
                    ensure(v <= bound, || format!("sampled policy earns {v} on unsatisfiable {inst:?}"))?;
                    sampled += 1;
                }
                unsat += 1;
            }
            _ => {}
        }
    }
    Ok(format!(
        "n=4: {sat} tilings earn exactly 0; {sampled} sampled policies on {unsat} unsatisfiable instances all <= -1/256"
    ))
}

fn criterion_3() -> Outcome {
    let mut words = 0;
    let mut mismatches = 0;
    for n in [2u64, 4, 8] {
        let bits = n.trailing_zeros() as usize;
        let [_, _, equal, ul, hz, vt] = build_component_dfas(n).unwrap();
        for code in 0u32..1 << (4 * bits) {
            let w: Vec<u8> = (0..4 * bits).map(|k| (code >> k & 1) as u8).collect();
            // symbol 2p is bit p of the first position's coordinate, 2p+1 the second's
            let coord = |offset: usize, which: usize| -> u64 {
                (0..bits).map(|p| (w[2 * (offset + p) + which] as u64) << p).sum()
            };
            let (i1, i2, j1, j2) = (coord(0, 0), coord(0, 1), coord(bits, 0), coord(bits, 1));
            let expected = [(i1, j1) == (i2, j2), i1 == 0 && j1 == 0, i1 + 1 == i2 && j1 == j2, i1 == i2 && j1 + 1 == j2];
            let got = [dfa_run(&equal, &w).0, dfa_run(&ul, &w).0, dfa_run(&hz, &w).0, dfa_run(&vt, &w).0];
            mismatches += expected.iter().zip(got).filter(|(e, g)| **e != *g).count();
            words += 1;
        }
    }
    ensure(mismatches == 0, || format!("{mismatches} mismatches"))?;
    Ok(format!("{words} words, 4 checkers each, 0 mismatches"))
}

fn criterion_4() -> Outcome {
    let mut rng = rng(4);
    for k in 0..60 {
        let horizon = 1 + k % 3;
        let mdp = random_mdp(&mut rng, 4, 2, horizon);
        let generic = solve_decpomdp_exact(mdp.model(), horizon, &opts()).map_err(|e| e.to_string())?;
        let tree = solve_pomdp_exact(&Pomdp::new(mdp.model().clone()).unwrap(), horizon, &opts()).map_err(|e| e.to_string())?;
        let dp = solve_mdp_dp(&mdp, horizon).map_err(|e| e.to_string())?;
        ensure(generic.optimal_value == tree.optimal_value && tree.optimal_value == dp.optimal_value, || {
            format!("model {k}: generic {}, tree {}, dp {}", generic.optimal_value, tree.optimal_value, dp.optimal_value)
        })?;
    }
    Ok("60 fully observable models: exhaustive, belief-tree and backward induction agree exactly".into())
}

fn criterion_5() -> Outcome {
    let mut rng = rng(5);
    let shape = Shape { agents: 2, max_states: 3, max_actions: 2, max_observations: 2, max_support: 3, horizon: 2 };
    for k in 0..25 {
        let horizon = 1 + k % 2;
        let model = random_decpomdp(&mut rng, shape);
        let lifted = lift_to_three_agent_decmdp(&model).map_err(|e| e.to_string())?;
        ensure(check_joint_observability(lifted.model()).is_observable(), || format!("lifted model {k} not observable"))?;
        let a = solve_decpomdp_exact(&model, horizon, &opts()).map_err(|e| e.to_string())?;
        let b = solve_decpomdp_exact(lifted.model(), horizon, &opts()).map_err(|e| e.to_string())?;
        ensure(a.optimal_value == b.optimal_value, || format!("two-agent model {k}: {} vs {}", a.optimal_value, b.optimal_value))?;
    }
    for k in 0..25 {
        let horizon = 1 + k % 3;
        let pomdp = random_pomdp(&mut rng, 3, horizon);
        let lifted = lift_pomdp_to_two_agent_decmdp(&pomdp).map_err(|e| e.to_string())?;
        ensure(check_joint_observability(lifted.model()).is_observable(), || format!("lifted pomdp {k} not observable"))?;
        let a = solve_pomdp_exact(&pomdp, horizon, &opts()).map_err(|e| e.to_string())?;
        let b = solve_decpomdp_exact(lifted.model(), horizon, &opts()).map_err(|e| e.to_string())?;
        ensure(a.optimal_value == b.optimal_value, || format!("pomdp {k}: {} vs {}", a.optimal_value, b.optimal_value))?;
    }
    let inst = TilingInstance::new(tile_names(2), all_pairs(2), all_pairs(2), 2).unwrap();
    let art = compile_tiling_to_decpomdp(&inst).unwrap();
    ensure(!check_joint_observability(&art.model).is_observable(), || "compiled tiling model is jointly observable".into())?;
    Ok("25 two-agent and 25 one-agent models keep their optimum when lifted; compiled tiling model is not jointly observable".into())
}

fn criterion_6() -> Outcome {
    let mut rng = rng(6);
    let shape = Shape { agents: 2, max_states: 3, max_actions: 2, max_observations: 2, max_support: 3, horizon: 3 };
    let mut inside = 0;
    let pairs = 25;
    for _ in 0..pairs {
        let model = random_decpomdp(&mut rng, shape);
        let policies = enumerate_joint_policies(&model, 3, u64::MAX).unwrap();
        let p = policies.policy_at(rng.gen_range(0..policies.len()));
        let exact = exact_value(&model, &p, 3).unwrap().expected_total_reward.to_f64();
        let seed = rng.gen();
        let est = simulate(&model, &p, 3, 10_000, seed).unwrap();
        let again = simulate(&model, &p, 3, 10_000, seed).unwrap();
        ensure(est.mean.to_bits() == again.mean.to_bits() && est.variance.to_bits() == again.variance.to_bits(), || {
            "same seed gave different estimates".into()
        })?;
        // float summation of exact rationals can differ in the last bits
        if (est.mean - exact).abs() <= 3.0 * est.std_error() + 1e-9 {
            inside += 1;
        }
    }
    ensure(inside >= pairs - 1, || format!("only {inside} of {pairs} within 3 standard errors"))?;
    Ok(format!("{inside} of {pairs} estimates within 3 standard errors; seeds reproduce bit for bit"))
}

/// Compiled states for an `n = 2^L` grid: `6L² + 47L − 26` reachable product
/// tuples plus the final state.
fn closed_form(bits: usize) -> usize {
    6 * bits * bits + 47 * bits - 25
}

fn criterion_7() -> Outcome {
    let mut counts = Vec::new();
    for bits in 1..=5usize {
        let n = 1u64 << bits;
        let inst = TilingInstance::new(tile_names(2), all_pairs(2), all_pairs(2), n).unwrap();
        let art = compile_tiling_to_decpomdp(&inst).unwrap();
        let states = art.model.num_states();
        ensure(states == closed_form(bits), || format!("n={n}: {states} states, closed form {}", closed_form(bits)))?;
        ensure(art.horizon < states, || format!("n={n}: T={} not below {states}", art.horizon))?;
        counts.push(states as i64);
    }
    // quadratic in log n: third differences vanish
    let d1: Vec<i64> = counts.windows(2).map(|w| w[1] - w[0]).collect();
    let d2: Vec<i64> = d1.windows(2).map(|w| w[1] - w[0]).collect();
    ensure(d2.windows(2).all(|w| w[0] == w[1]), || format!("counts {counts:?} are not quadratic in log n"))?;
    Ok(format!("state counts {counts:?} for n = 2..32 match 6L^2 + 47L - 25; T < |S| throughout"))
}

fn criterion_8() -> Outcome {
    let inst = TilingInstance::new(tile_names(3), all_pairs(3), all_pairs(3), 2).unwrap();
    let art = compile_tiling_to_decpomdp(&inst).unwrap();
    let local: Vec<_> = (0..2).map(|a| count_local_policies(&art.model, AgentId(a), art.horizon)).collect();
    ensure(local.iter().all(|c| *c == 81u32.into()), || format!("local counts {local:?}"))?;
    let joint = enumerate_joint_policies(&art.model, art.horizon, 10_000).unwrap();
    let listed = joint.iter().count();
    ensure(joint.len() == 6561 && listed == 6561, || format!("joint count {} (iterated {listed})", joint.len()))?;
    Ok("81 local policies per agent, 6561 joint policies enumerated".into())
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("tiling equivalence at n=2", criterion_1),
        ("tiling witnesses at n=4", criterion_2),
        ("automaton faithfulness", criterion_3),
        ("single-agent special cases", criterion_4),
        ("lift invariance", criterion_5),
        ("simulation consistency", criterion_6),
        ("construction size", criterion_7),
        ("policy-space counting", criterion_8),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.1}s] {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.1}s] {detail}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
