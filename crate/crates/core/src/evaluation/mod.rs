//! Exact and sampled evaluation of joint policies.
//!
//! [`exact_value`] propagates probability mass forward from the start state
//! over `(state, history tuple)` nodes, reading actions from the policy,
//! accruing `P(node) · R(s, a)` at each epoch and splitting nodes by
//! successor state and joint observation. Everything stays in exact
//! rationals. [`reach_layers`] exposes the merged node distribution of each
//! epoch and [`belief_states`] the posterior over states given a joint
//! observation sequence.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_model, ActionId, AgentId, DecPomdp, ObsId, StateId};
use crate::policy::{history_space, HistorySpace, JointPolicy, ObservationHistory};
use crate::rational::Rational;

mod simulate;

pub use simulate::{simulate, SampleEstimate};

pub(crate) use crate::policy::NO_ACTION;

/// Expected total reward with its per-epoch breakdown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueResult {
    #[serde(rename = "value")]
    pub expected_total_reward: Rational,
    #[serde(rename = "per_epoch")]
    pub per_epoch_rewards: Vec<Rational>,
}

/// Probability mass on one state/history-tuple pair at some epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachNode {
    pub state: StateId,
    pub histories: Vec<ObservationHistory>,
    pub probability: Rational,
}

/// Policy evaluation against a fixed model and horizon.
///
/// Holds each agent's reachable history trie so that policies can be given
/// as flat decision tables indexed by history node.
#[derive(Debug, Clone)]
pub struct Evaluator<'m> {
    model: &'m DecPomdp,
    horizon: usize,
    spaces: Vec<HistorySpace>,
    rewards: Vec<Option<Rational>>,
}

impl<'m> Evaluator<'m> {
    /// Fails if the model does not pass [`validate_model`].
    pub fn new(model: &'m DecPomdp, horizon: usize) -> Result<Self> {
        let report = validate_model(model);
        if !report.is_well_formed() {
            return Err(Error::InvalidModel(report.to_string().trim_end().to_string()));
        }
        let spaces = (0..model.num_agents())
            .map(|i| history_space(model, AgentId(i), horizon))
            .collect();
        let n_ja = model.num_joint_actions();
        let mut rewards = vec![None; model.num_states() * n_ja];
        for (s, ja, r) in model.reward_entries() {
            rewards[s * n_ja + ja] = Some(r.clone());
        }
        Ok(Evaluator { model, horizon, spaces, rewards })
    }

    pub fn model(&self) -> &'m DecPomdp {
        self.model
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn spaces(&self) -> &[HistorySpace] {
        &self.spaces
    }

    /// Flattens a joint policy into decision tables. Decisions on
    /// unreachable histories are ignored; reachable histories without a
    /// decision get [`NO_ACTION`] and fail only if evaluation visits them.
    pub fn tables_for(&self, policy: &JointPolicy) -> Result<Vec<Vec<ActionId>>> {
        if policy.locals.len() != self.model.num_agents() {
            return Err(Error::Arity {
                expected: self.model.num_agents(),
                found: policy.locals.len(),
            });
        }
        let mut tables = Vec::with_capacity(self.spaces.len());
        for (i, (space, local)) in self.spaces.iter().zip(&policy.locals).enumerate() {
            let spec = self.model.agent(AgentId(i));
            for (history, &action) in &local.decisions {
                let last = history.last().copied();
                if last.is_some_and(|o| o >= spec.observations.len()) || action >= spec.actions.len() {
                    return Err(Error::InvalidInstance(format!(
                        "agent {i}: decision refers to undeclared observation or action"
                    )));
                }
                if spec.available(last).binary_search(&action).is_err() {
                    return Err(Error::UnavailableAction {
                        agent: AgentId(i),
                        history: self.model.history_names(AgentId(i), history),
                        action: spec.actions[action].clone(),
                    });
                }
            }
            tables.push(
                space
                    .nodes()
                    .map(|n| local.action(&space.sequence(n)).unwrap_or(NO_ACTION))
                    .collect(),
            );
        }
        Ok(tables)
    }

    /// Exact value of the policy given by decision tables.
    pub fn evaluate_tables(&self, tables: &[Vec<ActionId>]) -> Result<ValueResult> {
        let mut per_epoch = vec![Rational::zero(); self.horizon];
        let mut hist = vec![HistorySpace::ROOT; self.spaces.len()];
        let mut joint = vec![0; self.spaces.len()];
        self.visit(tables, 0, self.model.start(), &mut hist, &mut joint, &Rational::one(), &mut per_epoch)?;
        Ok(ValueResult {
            expected_total_reward: per_epoch.iter().sum(),
            per_epoch_rewards: per_epoch,
        })
    }

    pub fn evaluate(&self, policy: &JointPolicy) -> Result<ValueResult> {
        self.evaluate_tables(&self.tables_for(policy)?)
    }

    fn undefined(&self, agent: usize, node: u32) -> Error {
        let space = &self.spaces[agent];
        Error::UndefinedDecision {
            agent: AgentId(agent),
            history: self.model.history_names(AgentId(agent), &space.sequence(node)),
        }
    }

    fn joint_action(&self, tables: &[Vec<ActionId>], hist: &[u32], joint: &mut [ActionId]) -> Result<usize> {
        for (i, slot) in joint.iter_mut().enumerate() {
            let a = tables[i][hist[i] as usize];
            if a == NO_ACTION {
                return Err(self.undefined(i, hist[i]));
            }
            *slot = a;
        }
        Ok(self.model.joint_action_index(joint))
    }

    // Depth-first form of the forward propagation; mass on the same node
    // reached along different paths is summed implicitly.
    #[allow(clippy::too_many_arguments)]
    fn visit(
        &self,
        tables: &[Vec<ActionId>],
        epoch: usize,
        state: StateId,
        hist: &mut [u32],
        joint: &mut [ActionId],
        prob: &Rational,
        per_epoch: &mut [Rational],
    ) -> Result<()> {
        let ja = self.joint_action(tables, hist, joint)?;
        if let Some(r) = &self.rewards[state * self.model.num_joint_actions() + ja] {
            per_epoch[epoch] += prob * r;
        }
        if epoch + 1 >= self.horizon {
            return Ok(());
        }
        let parent: Vec<u32> = hist.to_vec();
        for (next, p) in self.model.transition_row(state, ja) {
            let p_next = prob * p;
            for (obs, q) in self.model.observation_row(ja, *next) {
                for (i, h) in hist.iter_mut().enumerate() {
                    *h = self.spaces[i].child(parent[i], obs[i]).ok_or_else(|| {
                        Error::Internal("history missing from reachable closure".into())
                    })?;
                }
                self.visit(tables, epoch + 1, *next, hist, joint, &(&p_next * q), per_epoch)?;
            }
        }
        hist.copy_from_slice(&parent);
        Ok(())
    }

    /// Merged node distribution of every epoch `0..horizon`.
    pub fn reach_layers_tables(&self, tables: &[Vec<ActionId>]) -> Result<Vec<Vec<ReachNode>>> {
        let mut layer: BTreeMap<(StateId, Vec<u32>), Rational> = BTreeMap::new();
        layer.insert((self.model.start(), vec![HistorySpace::ROOT; self.spaces.len()]), Rational::one());
        let mut joint = vec![0; self.spaces.len()];
        let mut layers = Vec::with_capacity(self.horizon);
        for epoch in 0..self.horizon {
            let mut next_layer: BTreeMap<(StateId, Vec<u32>), Rational> = BTreeMap::new();
            if epoch + 1 < self.horizon {
                for ((state, hist), prob) in &layer {
                    let ja = self.joint_action(tables, hist, &mut joint)?;
                    for (next, p) in self.model.transition_row(*state, ja) {
                        for (obs, q) in self.model.observation_row(ja, *next) {
                            let child = hist
                                .iter()
                                .enumerate()
                                .map(|(i, &h)| {
                                    self.spaces[i].child(h, obs[i]).ok_or_else(|| {
                                        Error::Internal("history missing from reachable closure".into())
                                    })
                                })
                                .collect::<Result<Vec<u32>>>()?;
                            *next_layer.entry((*next, child)).or_default() += &(prob * &(p * q));
                        }
                    }
                }
            }
            layers.push(
                layer
                    .into_iter()
                    .map(|((state, hist), probability)| ReachNode {
                        state,
                        histories: hist
                            .iter()
                            .enumerate()
                            .map(|(i, &h)| ObservationHistory {
                                agent: AgentId(i),
                                sequence: self.spaces[i].sequence(h),
                            })
                            .collect(),
                        probability,
                    })
                    .collect(),
            );
            layer = next_layer;
        }
        Ok(layers)
    }
}

/// Exact expected total reward of `policy` over `horizon` epochs.
pub fn exact_value(model: &DecPomdp, policy: &JointPolicy, horizon: usize) -> Result<ValueResult> {
    Evaluator::new(model, horizon)?.evaluate(policy)
}

/// Node distributions per epoch under `policy`.
pub fn reach_layers(model: &DecPomdp, policy: &JointPolicy, horizon: usize) -> Result<Vec<Vec<ReachNode>>> {
    let evaluator = Evaluator::new(model, horizon)?;
    evaluator.reach_layers_tables(&evaluator.tables_for(policy)?)
}

/// Posterior distribution over states after the given joint observations.
///
/// Actions are read straight from the policy's decision maps, so this does
/// not share code with [`exact_value`].
pub fn belief_states(
    model: &DecPomdp,
    policy: &JointPolicy,
    observations: &[Vec<ObsId>],
) -> Result<Vec<Rational>> {
    if policy.locals.len() != model.num_agents() {
        return Err(Error::Arity { expected: model.num_agents(), found: policy.locals.len() });
    }
    let mut mass = vec![Rational::zero(); model.num_states()];
    mass[model.start()] = Rational::one();
    let mut histories: Vec<Vec<ObsId>> = vec![Vec::new(); model.num_agents()];
    for joint_obs in observations {
        if joint_obs.len() != model.num_agents() {
            return Err(Error::Arity { expected: model.num_agents(), found: joint_obs.len() });
        }
        let actions = policy
            .locals
            .iter()
            .zip(&histories)
            .enumerate()
            .map(|(i, (local, h))| {
                local.action(h).ok_or_else(|| Error::UndefinedDecision {
                    agent: AgentId(i),
                    history: model.history_names(AgentId(i), h),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let ja = model.joint_action_index(&actions);
        let mut next = vec![Rational::zero(); model.num_states()];
        for (s, p) in mass.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for (s2, q) in model.transition_row(s, ja) {
                let emit = model
                    .observation_row(ja, *s2)
                    .iter()
                    .find(|(o, _)| o[..] == joint_obs[..])
                    .map(|(_, r)| r);
                if let Some(r) = emit {
                    next[*s2] += &(p * &(q * r));
                }
            }
        }
        mass = next;
        for (h, &o) in histories.iter_mut().zip(joint_obs) {
            h.push(o);
        }
    }
    let total: Rational = mass.iter().sum();
    if total.is_zero() {
        return Err(Error::ZeroProbability);
    }
    Ok(mass.iter().map(|m| m / &total).collect())
}
