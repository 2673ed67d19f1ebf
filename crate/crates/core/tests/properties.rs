mod common;

use common::*;
use decpomdp::evaluation::{belief_states, exact_value, reach_layers};
use decpomdp::model::json::{model_to_json, parse_model};
use decpomdp::model::{AgentId, DecPomdp, DecisionInstance, ObsId, Pomdp, StateId};
use decpomdp::policy::json::{parse_policy, policy_to_json};
use decpomdp::policy::{count_local_policies, enumerate_joint_policies, JointPolicy};
use decpomdp::reduction::{compile_tiling_to_decpomdp, lift_pomdp_to_two_agent_decmdp, lift_to_three_agent_decmdp};
use decpomdp::solver::{decide, solve_decpomdp_exact, solve_pomdp_exact, Answer, DecideOptions, SolveOptions};
use decpomdp::tiling::{check_tiling, solve_tiling_bruteforce};
use decpomdp::{Error, Rational};
use proptest::prelude::*;
use rand::Rng;

const SMALL: Shape = Shape { agents: 2, max_states: 3, max_actions: 2, max_observations: 2, max_support: 3, horizon: 3 };

/// Expected reward by walking every state and observation path, reading
/// actions straight from the decision maps.
fn path_value(model: &DecPomdp, policy: &JointPolicy, horizon: usize) -> Rational {
    fn walk(
        model: &DecPomdp,
        policy: &JointPolicy,
        state: StateId,
        hist: &mut Vec<Vec<ObsId>>,
        left: usize,
    ) -> Rational {
        if left == 0 {
            return Rational::zero();
        }
        let actions: Vec<_> = policy.locals.iter().zip(hist.iter()).map(|(l, h)| l.action(h).unwrap()).collect();
        let ja = model.joint_action_index(&actions);
        let mut total = model.reward(state, ja).cloned().unwrap_or_default();
        if left == 1 {
            return total;
        }
        for (s2, p) in model.transition_row(state, ja) {
            for (obs, q) in model.observation_row(ja, *s2) {
                for (h, &o) in hist.iter_mut().zip(obs.iter()) {
                    h.push(o);
                }
                total += &(p * q) * &walk(model, policy, *s2, hist, left - 1);
                for h in hist.iter_mut() {
                    h.pop();
                }
            }
        }
        total
    }
    let mut hist = vec![Vec::new(); model.num_agents()];
    walk(model, policy, model.start(), &mut hist, horizon)
}

#[test]
fn exact_value_matches_path_enumeration() {
    let mut rng = rng(10);
    for _ in 0..30 {
        let model = random_decpomdp(&mut rng, SMALL);
        let policies = enumerate_joint_policies(&model, 3, u64::MAX).unwrap();
        for _ in 0..10 {
            let p = policies.policy_at(rng.gen_range(0..policies.len()));
            let v = exact_value(&model, &p, 3).unwrap();
            assert_eq!(v.expected_total_reward, path_value(&model, &p, 3));
            let sum = v.per_epoch_rewards.iter().fold(Rational::zero(), |a, b| &a + b);
            assert_eq!(sum, v.expected_total_reward);
        }
    }
}

#[test]
fn reach_layers_are_distributions_and_price_the_policy() {
    let mut rng = rng(11);
    for _ in 0..30 {
        let model = random_decpomdp(&mut rng, SMALL);
        let policies = enumerate_joint_policies(&model, 3, u64::MAX).unwrap();
        let p = policies.policy_at(rng.gen_range(0..policies.len()));
        let layers = reach_layers(&model, &p, 3).unwrap();
        let mut value = Rational::zero();
        for layer in &layers {
            let mass = layer.iter().fold(Rational::zero(), |a, n| &a + &n.probability);
            assert_eq!(mass, Rational::one());
            for node in layer {
                let actions: Vec<_> = p.locals.iter().zip(&node.histories).map(|(l, h)| l.action(&h.sequence).unwrap()).collect();
                if let Some(r) = model.reward(node.state, model.joint_action_index(&actions)) {
                    value += &node.probability * r;
                }
            }
        }
        assert_eq!(value, exact_value(&model, &p, 3).unwrap().expected_total_reward);
    }
}

#[test]
fn beliefs_match_layer_conditionals() {
    let mut rng = rng(12);
    for _ in 0..30 {
        let model = random_decpomdp(&mut rng, SMALL);
        let policies = enumerate_joint_policies(&model, 3, u64::MAX).unwrap();
        let p = policies.policy_at(rng.gen_range(0..policies.len()));
        let layers = reach_layers(&model, &p, 3).unwrap();
        let last = layers.last().unwrap();
        let node = &last[rng.gen_range(0..last.len())];
        let joint_obs: Vec<Vec<ObsId>> = (0..node.histories[0].sequence.len())
            .map(|t| node.histories.iter().map(|h| h.sequence[t]).collect())
            .collect();
        let belief = belief_states(&model, &p, &joint_obs).unwrap();
        let matching: Vec<_> = last.iter().filter(|n| n.histories == node.histories).collect();
        let total = matching.iter().fold(Rational::zero(), |a, n| &a + &n.probability);
        for (s, b) in belief.iter().enumerate() {
            let here = matching.iter().filter(|n| n.state == s).fold(Rational::zero(), |a, n| &a + &n.probability);
            assert_eq!(*b, &here / &total);
        }
    }
}

#[test]
fn optimum_bounds_every_policy_and_is_attained() {
    let mut rng = rng(13);
    for _ in 0..15 {
        let model = random_decpomdp(&mut rng, Shape { horizon: 2, ..SMALL });
        let r = solve_decpomdp_exact(&model, 2, &SolveOptions::default()).unwrap();
        let mut first_max = None;
        for (k, p) in enumerate_joint_policies(&model, 2, u64::MAX).unwrap().iter().enumerate() {
            let v = exact_value(&model, &p, 2).unwrap().expected_total_reward;
            assert!(v <= r.optimal_value);
            if v == r.optimal_value && first_max.is_none() {
                first_max = Some((k, p));
            }
        }
        assert_eq!(first_max.unwrap().1, r.argmax_policy);
    }
}

#[test]
fn parallel_and_serial_agree() {
    let mut rng = rng(14);
    for _ in 0..15 {
        let model = random_decpomdp(&mut rng, SMALL);
        let par = solve_decpomdp_exact(&model, 3, &SolveOptions::default()).unwrap();
        let ser = solve_decpomdp_exact(&model, 3, &SolveOptions { parallel: false, ..Default::default() }).unwrap();
        assert_eq!(par, ser);
        assert_eq!(par, solve_decpomdp_exact(&model, 3, &SolveOptions::default()).unwrap());
    }
}

#[test]
fn belief_tree_solver_matches_exhaustive_argmax() {
    let mut rng = rng(15);
    for k in 0..40 {
        let horizon = 1 + k % 3;
        let pomdp = random_pomdp(&mut rng, 4, horizon);
        let tree = solve_pomdp_exact(&pomdp, horizon, &SolveOptions::default()).unwrap();
        let generic = solve_decpomdp_exact(pomdp.model(), horizon, &SolveOptions::default()).unwrap();
        assert_eq!(tree, generic);
    }
}

#[test]
fn lifts_preserve_every_policy_value() {
    let mut rng = rng(16);
    for _ in 0..10 {
        let model = random_decpomdp(&mut rng, Shape { horizon: 2, ..SMALL });
        let lifted = lift_to_three_agent_decmdp(&model).unwrap();
        assert_eq!(count_local_policies(lifted.model(), AgentId(2), 2), 1u32.into());
        let observer = enumerate_joint_policies(lifted.model(), 2, u64::MAX).unwrap().policy_at(0).locals.pop().unwrap();
        for p in enumerate_joint_policies(&model, 2, u64::MAX).unwrap().iter() {
            let mut locals = p.locals.clone();
            locals.push(observer.clone());
            assert_eq!(exact_value(&model, &p, 2).unwrap(), exact_value(lifted.model(), &JointPolicy::new(locals), 2).unwrap());
        }
    }
    for _ in 0..10 {
        let pomdp = random_pomdp(&mut rng, 3, 3);
        let lifted = lift_pomdp_to_two_agent_decmdp(&pomdp).unwrap();
        let observer = enumerate_joint_policies(lifted.model(), 3, u64::MAX).unwrap().policy_at(0).locals.pop().unwrap();
        for p in enumerate_joint_policies(pomdp.model(), 3, u64::MAX).unwrap().iter() {
            let mut locals = p.locals.clone();
            locals.push(observer.clone());
            assert_eq!(
                exact_value(pomdp.model(), &p, 3).unwrap(),
                exact_value(lifted.model(), &JointPolicy::new(locals), 3).unwrap()
            );
        }
    }
}

#[test]
fn identity_observation_pomdp_lift_matches_dp() {
    let mut rng = rng(17);
    for k in 0..20 {
        let horizon = 1 + k % 3;
        let mdp = random_mdp(&mut rng, 3, 2, horizon);
        let dp = decpomdp::solver::solve_mdp_dp(&mdp, horizon).unwrap();
        let lifted = lift_pomdp_to_two_agent_decmdp(&Pomdp::new(mdp.model().clone()).unwrap()).unwrap();
        let r = solve_decpomdp_exact(lifted.model(), horizon, &SolveOptions::default()).unwrap();
        assert_eq!(r.optimal_value, dp.optimal_value);
        let as_policy = dp.policy.to_joint_policy(&mdp);
        assert_eq!(exact_value(mdp.model(), &as_policy, horizon).unwrap().expected_total_reward, dp.optimal_value);
    }
}

#[test]
fn decision_semantics() {
    let mut rng = rng(18);
    for _ in 0..15 {
        let model = random_decpomdp(&mut rng, Shape { horizon: 2, ..SMALL });
        let horizon = 1;
        let opt = solve_decpomdp_exact(&model, horizon, &SolveOptions::default()).unwrap().optimal_value;
        for (k, expected) in [(opt.clone(), Answer::Yes), (&opt + &Rational::one(), Answer::No), (&opt - &Rational::dyadic(3), Answer::Yes)] {
            // one-state models need the override even at horizon 1
            let inst = DecisionInstance::new(model.clone(), horizon, k, true).unwrap();
            for early_exit in [false, true] {
                let d = decide(&inst, &DecideOptions { early_exit, ..Default::default() }).unwrap();
                assert_eq!(d.answer, expected);
                if let Some(w) = d.witness {
                    assert!(exact_value(&model, &w, horizon).unwrap().expected_total_reward >= inst.threshold);
                }
            }
        }
        let t = model.num_states();
        assert!(matches!(
            DecisionInstance::new(model.clone(), t, Rational::zero(), false),
            Err(Error::HorizonPrecondition { .. })
        ));
        assert!(DecisionInstance::new(model, t, Rational::zero(), true).is_ok());
    }
}

#[test]
fn budget_refusal_reports_the_exact_count() {
    let inst = decpomdp::tiling::TilingInstance::new(tile_names(3), all_pairs(3), all_pairs(3), 2).unwrap();
    let art = compile_tiling_to_decpomdp(&inst).unwrap();
    match solve_decpomdp_exact(&art.model, art.horizon, &SolveOptions { budget: 6560, parallel: true }) {
        Err(Error::BudgetExceeded { count, budget }) => {
            assert_eq!(count, 6561u32.into());
            assert_eq!(budget, 6560);
        }
        other => panic!("expected a refusal, got {other:?}"),
    }
}

#[test]
fn compiled_models_round_trip_through_json() {
    let mut rng = rng(19);
    for n in [2u64, 4, 8] {
        let inst = random_tiling(&mut rng, 3, n, 0.5);
        let art = compile_tiling_to_decpomdp(&inst).unwrap();
        let text = model_to_json(&art.model);
        assert_eq!(parse_model(&text).unwrap(), art.model);
    }
}

#[test]
fn tiling_witnesses_are_consistent_and_first() {
    let mut rng = rng(20);
    for _ in 0..40 {
        let k = rng.gen_range(1..=3);
        let inst = random_tiling(&mut rng, k, 4, 0.6);
        if let Some(f) = solve_tiling_bruteforce(&inst, 10_000_000).unwrap() {
            assert!(check_tiling(&inst, &f).unwrap().is_consistent());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_models_round_trip(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let model = random_decpomdp(&mut rng, SMALL);
        let text = model_to_json(&model);
        prop_assert_eq!(parse_model(&text).unwrap(), model.clone());
        let policies = enumerate_joint_policies(&model, 3, u64::MAX).unwrap();
        let p = policies.policy_at(rng.gen_range(0..policies.len()));
        prop_assert_eq!(parse_policy(&model, &policy_to_json(&model, &p)).unwrap(), p);
    }

    #[test]
    fn enumeration_index_round_trips(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let model = random_decpomdp(&mut rng, SMALL);
        let policies = enumerate_joint_policies(&model, 3, u64::MAX).unwrap();
        let count: num_bigint::BigUint = (0..2).map(|a| count_local_policies(&model, AgentId(a), 3)).product();
        prop_assert_eq!(count, policies.len().into());
        let k = rng.gen_range(0..policies.len());
        let tables = policies.tables_at(k);
        prop_assert_eq!(policies.policy_from_tables(&tables), policies.policy_at(k));
    }
}
