//! Decentralized partially observable Markov decision models.
//!
//! A [`DecPomdp`] is the general `m`-agent model. MDPs, POMDPs and DEC-MDPs
//! are thin wrappers around it that carry their extra invariant (see
//! [`special`]). States, observations and actions are referred to by their
//! index in declaration order; names are kept for file I/O and diagnostics.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub mod json;
mod observability;
pub mod special;
mod validate;

pub use observability::{check_joint_observability, JointObservability, ObservabilityConflict};
pub use special::{as_single_agent, DecMdp, DecisionInstance, Mdp, Pomdp};
pub use validate::{validate_model, Advisory, ValidationReport, Violation};
pub(crate) use validate::for_each_product;

pub type StateId = usize;
pub type ActionId = usize;
pub type ObsId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentId(pub usize);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One agent's alphabets and action availability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentSpec {
    pub observations: Vec<String>,
    pub actions: Vec<String>,
    /// Actions available at the first epoch, before anything is observed.
    pub initial_actions: Vec<ActionId>,
    /// `actions_by_observation[o]` is the set available right after observing `o`.
    pub actions_by_observation: Vec<Vec<ActionId>>,
}

impl AgentSpec {
    /// Actions available after the given last observation (`None` = first epoch).
    pub fn available(&self, last: Option<ObsId>) -> &[ActionId] {
        match last {
            None => &self.initial_actions,
            Some(o) => &self.actions_by_observation[o],
        }
    }
}

/// Mixed-radix encoding of action/observation tuples, first agent most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Radix {
    sizes: Vec<usize>,
    total: usize,
}

impl Radix {
    fn new(sizes: Vec<usize>) -> Self {
        let total = sizes.iter().product();
        Radix { sizes, total }
    }

    pub(crate) fn total(&self) -> usize {
        self.total
    }

    pub(crate) fn encode(&self, parts: &[usize]) -> usize {
        parts
            .iter()
            .zip(&self.sizes)
            .fold(0, |acc, (&p, &size)| acc * size + p)
    }

    pub(crate) fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut parts = vec![0; self.sizes.len()];
        for (slot, &size) in parts.iter_mut().zip(&self.sizes).rev() {
            *slot = index % size;
            index /= size;
        }
        parts
    }
}

/// An `m`-agent DEC-POMDP with exact rational tables.
///
/// Tables are sparse: a missing transition or observation entry has
/// probability zero and a missing reward is zero. Exact-zero entries are
/// dropped on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecPomdp {
    states: Vec<String>,
    start: StateId,
    agents: Vec<AgentSpec>,
    horizon: usize,
    joint_actions: Radix,
    /// Indexed by `state * |joint actions| + joint action`.
    transitions: Vec<Vec<(StateId, Rational)>>,
    /// Indexed by `joint action * |S| + next state`.
    observations: Vec<Vec<(Box<[ObsId]>, Rational)>>,
    rewards: BTreeMap<(StateId, usize), Rational>,
}

impl DecPomdp {
    pub fn builder(states: Vec<String>, start: StateId) -> DecPomdpBuilder {
        DecPomdpBuilder {
            states,
            start,
            agents: Vec::new(),
            horizon: 1,
            transitions: BTreeMap::new(),
            observations: BTreeMap::new(),
            rewards: BTreeMap::new(),
            duplicate: None,
        }
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[AgentSpec] {
        &self.agents
    }

    pub fn agent(&self, agent: AgentId) -> &AgentSpec {
        &self.agents[agent.0]
    }

    /// Horizon declared by the model file; solvers take the horizon explicitly.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn num_joint_actions(&self) -> usize {
        self.joint_actions.total()
    }

    pub fn joint_action_index(&self, actions: &[ActionId]) -> usize {
        self.joint_actions.encode(actions)
    }

    pub fn joint_action(&self, index: usize) -> Vec<ActionId> {
        self.joint_actions.decode(index)
    }

    /// Successor distribution `P(· | s, a)` as sparse `(s', p)` pairs with `p > 0`.
    pub fn transition_row(&self, state: StateId, joint_action: usize) -> &[(StateId, Rational)] {
        &self.transitions[state * self.joint_actions.total() + joint_action]
    }

    /// Observation distribution `O(· | a, s')` as sparse `(joint observation, p)` pairs.
    pub fn observation_row(&self, joint_action: usize, next: StateId) -> &[(Box<[ObsId]>, Rational)] {
        &self.observations[joint_action * self.states.len() + next]
    }

    pub fn reward(&self, state: StateId, joint_action: usize) -> Option<&Rational> {
        self.rewards.get(&(state, joint_action))
    }

    pub fn transition_prob(&self, state: StateId, joint_action: usize, next: StateId) -> Rational {
        self.transition_row(state, joint_action)
            .iter()
            .find(|(s2, _)| *s2 == next)
            .map(|(_, p)| p.clone())
            .unwrap_or_default()
    }

    /// Nonzero reward entries as `(state, joint action index, reward)`.
    pub fn reward_entries(&self) -> impl Iterator<Item = (StateId, usize, &Rational)> {
        self.rewards.iter().map(|(&(s, ja), r)| (s, ja, r))
    }

    /// All stored transition entries as `(state, joint action index, next, p)`.
    pub fn transition_entries(&self) -> impl Iterator<Item = (StateId, usize, StateId, &Rational)> {
        let n_ja = self.joint_actions.total();
        self.transitions.iter().enumerate().flat_map(move |(idx, row)| {
            row.iter()
                .map(move |(s2, p)| (idx / n_ja, idx % n_ja, *s2, p))
        })
    }

    /// All stored observation entries as `(joint action index, next, joint observation, p)`.
    pub fn observation_entries(&self) -> impl Iterator<Item = (usize, StateId, &[ObsId], &Rational)> {
        let n_s = self.states.len();
        self.observations.iter().enumerate().flat_map(move |(idx, row)| {
            row.iter()
                .map(move |(o, p)| (idx / n_s, idx % n_s, &o[..], p))
        })
    }

    pub fn state_index(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub(crate) fn joint_observation_names(&self, obs: &[ObsId]) -> Vec<String> {
        obs.iter()
            .zip(&self.agents)
            .map(|(&o, agent)| agent.observations[o].clone())
            .collect()
    }

    pub(crate) fn history_names(&self, agent: AgentId, history: &[ObsId]) -> Vec<String> {
        history
            .iter()
            .map(|&o| self.agents[agent.0].observations[o].clone())
            .collect()
    }
}

/// Incremental construction of a [`DecPomdp`] from indices.
#[derive(Debug, Clone)]
pub struct DecPomdpBuilder {
    states: Vec<String>,
    start: StateId,
    agents: Vec<AgentSpec>,
    horizon: usize,
    transitions: BTreeMap<(StateId, Vec<ActionId>, StateId), Rational>,
    observations: BTreeMap<(Vec<ActionId>, StateId, Vec<ObsId>), Rational>,
    rewards: BTreeMap<(StateId, Vec<ActionId>), Rational>,
    duplicate: Option<String>,
}

impl DecPomdpBuilder {
    pub fn agent(mut self, spec: AgentSpec) -> Self {
        self.agents.push(spec);
        self
    }

    pub fn horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn transition(&mut self, state: StateId, joint: &[ActionId], next: StateId, p: Rational) -> &mut Self {
        if self.transitions.insert((state, joint.to_vec(), next), p).is_some() {
            self.duplicate
                .get_or_insert_with(|| format!("transition ({state}, {joint:?}, {next})"));
        }
        self
    }

    pub fn observation(&mut self, joint: &[ActionId], next: StateId, obs: &[ObsId], p: Rational) -> &mut Self {
        if self
            .observations
            .insert((joint.to_vec(), next, obs.to_vec()), p)
            .is_some()
        {
            self.duplicate
                .get_or_insert_with(|| format!("observation ({joint:?}, {next}, {obs:?})"));
        }
        self
    }

    pub fn reward(&mut self, state: StateId, joint: &[ActionId], r: Rational) -> &mut Self {
        if self.rewards.insert((state, joint.to_vec()), r).is_some() {
            self.duplicate
                .get_or_insert_with(|| format!("reward ({state}, {joint:?})"));
        }
        self
    }

    /// Checks indices and arities; probabilistic constraints are left to
    /// [`validate_model`].
    pub fn build(self) -> Result<DecPomdp> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if let Some(dup) = self.duplicate {
            return bad(format!("duplicate entry {dup}"));
        }
        let n_states = self.states.len();
        if n_states == 0 {
            return bad("model has no states".into());
        }
        if self.start >= n_states {
            return bad(format!("start state {} out of range", self.start));
        }
        if self.agents.is_empty() {
            return bad("model has no agents".into());
        }
        if self.horizon == 0 {
            return bad("horizon must be positive".into());
        }
        for (i, agent) in self.agents.iter().enumerate() {
            if agent.actions.is_empty() {
                return bad(format!("agent {i} declares no actions"));
            }
            if agent.actions_by_observation.len() != agent.observations.len() {
                return bad(format!(
                    "agent {i}: action sets given for {} of {} observations",
                    agent.actions_by_observation.len(),
                    agent.observations.len()
                ));
            }
            let sets = std::iter::once(&agent.initial_actions).chain(&agent.actions_by_observation);
            for set in sets {
                if set.iter().any(|&a| a >= agent.actions.len()) {
                    return bad(format!("agent {i}: action index out of range"));
                }
                if set.windows(2).any(|w| w[0] >= w[1]) {
                    return bad(format!("agent {i}: action sets must be strictly increasing"));
                }
            }
        }
        let joint_actions = Radix::new(self.agents.iter().map(|a| a.actions.len()).collect());
        let check_joint = |joint: &[ActionId]| -> bool {
            joint.len() == self.agents.len()
                && joint.iter().zip(&self.agents).all(|(&a, ag)| a < ag.actions.len())
        };
        let n_ja = joint_actions.total();
        let mut transitions = vec![Vec::new(); n_states * n_ja];
        for ((s, joint, s2), p) in self.transitions {
            if s >= n_states || s2 >= n_states || !check_joint(&joint) {
                return bad(format!("transition ({s}, {joint:?}, {s2}) out of range"));
            }
            if !p.is_zero() {
                transitions[s * n_ja + joint_actions.encode(&joint)].push((s2, p));
            }
        }
        let mut observations = vec![Vec::new(); n_ja * n_states];
        for ((joint, s2, obs), p) in self.observations {
            let obs_ok = obs.len() == self.agents.len()
                && obs.iter().zip(&self.agents).all(|(&o, ag)| o < ag.observations.len());
            if s2 >= n_states || !check_joint(&joint) || !obs_ok {
                return bad(format!("observation ({joint:?}, {s2}, {obs:?}) out of range"));
            }
            if !p.is_zero() {
                observations[joint_actions.encode(&joint) * n_states + s2].push((obs.into_boxed_slice(), p));
            }
        }
        let mut rewards = BTreeMap::new();
        for ((s, joint), r) in self.rewards {
            if s >= n_states || !check_joint(&joint) {
                return bad(format!("reward ({s}, {joint:?}) out of range"));
            }
            if !r.is_zero() {
                rewards.insert((s, joint_actions.encode(&joint)), r);
            }
        }
        Ok(DecPomdp {
            states: self.states,
            start: self.start,
            agents: self.agents,
            horizon: self.horizon,
            joint_actions,
            transitions,
            observations,
            rewards,
        })
    }
}
