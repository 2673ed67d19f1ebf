//! Special cases of the general model: MDPs, POMDPs, DEC-MDPs, and the
//! decision-problem instance.

use std::collections::BTreeMap;

use super::{
    check_joint_observability, ActionId, AgentSpec, DecPomdp, JointObservability, ObsId, StateId,
};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// A single-agent model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pomdp(DecPomdp);

impl Pomdp {
    pub fn new(model: DecPomdp) -> Result<Self> {
        as_single_agent(model)
    }

    pub fn model(&self) -> &DecPomdp {
        &self.0
    }

    pub fn into_model(self) -> DecPomdp {
        self.0
    }
}

/// Repackages a one-agent DEC-POMDP as a POMDP.
pub fn as_single_agent(model: DecPomdp) -> Result<Pomdp> {
    if model.num_agents() != 1 {
        return Err(Error::Arity { expected: 1, found: model.num_agents() });
    }
    Ok(Pomdp(model))
}

/// A single-agent model whose observation identifies the successor state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mdp {
    model: DecPomdp,
    /// Observation emitted on entering each state; `None` if never entered.
    observation_of_state: Vec<Option<ObsId>>,
}

impl Mdp {
    /// Builds a fully observable model. `available[s]` are the actions in
    /// state `s`; observations are named after states.
    pub fn new(
        states: Vec<String>,
        start: StateId,
        actions: Vec<String>,
        available: Vec<Vec<ActionId>>,
        transitions: &[(StateId, ActionId, StateId, Rational)],
        rewards: &[(StateId, ActionId, Rational)],
        horizon: usize,
    ) -> Result<Self> {
        if available.len() != states.len() {
            return Err(Error::InvalidModel(format!(
                "action sets given for {} of {} states",
                available.len(),
                states.len()
            )));
        }
        let n_actions = actions.len();
        let n_states = states.len();
        let agent = AgentSpec {
            observations: states.clone(),
            actions,
            initial_actions: available.get(start).cloned().unwrap_or_default(),
            actions_by_observation: available,
        };
        let mut b = DecPomdp::builder(states, start).agent(agent).horizon(horizon);
        for (s, a, s2, p) in transitions {
            b.transition(*s, &[*a], *s2, p.clone());
        }
        for a in 0..n_actions {
            for s2 in 0..n_states {
                b.observation(&[a], s2, &[s2], Rational::one());
            }
        }
        for (s, a, r) in rewards {
            b.reward(*s, &[*a], r.clone());
        }
        Mdp::from_model(b.build()?)
    }

    /// Accepts a one-agent model whose observations are deterministic and
    /// injective per successor state.
    pub fn from_model(model: DecPomdp) -> Result<Self> {
        if model.num_agents() != 1 {
            return Err(Error::Arity { expected: 1, found: model.num_agents() });
        }
        let mut observation_of_state: Vec<Option<ObsId>> = vec![None; model.num_states()];
        for (_, s2, obs, p) in model.observation_entries() {
            if *p != Rational::one() {
                return Err(Error::InvalidModel(format!(
                    "observation of state {s2} is not deterministic"
                )));
            }
            match observation_of_state[s2] {
                Some(o) if o != obs[0] => {
                    return Err(Error::InvalidModel(format!(
                        "state {s2} emits more than one observation"
                    )))
                }
                _ => observation_of_state[s2] = Some(obs[0]),
            }
        }
        let mut owner: BTreeMap<ObsId, StateId> = BTreeMap::new();
        for (s, o) in observation_of_state.iter().enumerate() {
            if let Some(o) = o {
                if let Some(prev) = owner.insert(*o, s) {
                    return Err(Error::InvalidModel(format!(
                        "states {prev} and {s} share observation {o}"
                    )));
                }
            }
        }
        Ok(Mdp { model, observation_of_state })
    }

    pub fn model(&self) -> &DecPomdp {
        &self.model
    }

    pub fn observation_of_state(&self, state: StateId) -> Option<ObsId> {
        self.observation_of_state[state]
    }

    /// Actions in `state` at epoch `epoch` (the start state uses the
    /// initial set at epoch 0).
    pub fn available(&self, state: StateId, epoch: usize) -> &[ActionId] {
        let agent = &self.model.agents()[0];
        if epoch == 0 && state == self.model.start() {
            return &agent.initial_actions;
        }
        match self.observation_of_state[state] {
            Some(o) => &agent.actions_by_observation[o],
            None => &[],
        }
    }
}

/// A DEC-POMDP together with the map from joint observations to states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecMdp {
    inner: DecPomdp,
    witness: BTreeMap<Vec<ObsId>, StateId>,
}

impl DecMdp {
    pub fn new(model: DecPomdp) -> Result<Self> {
        match check_joint_observability(&model) {
            JointObservability::Witness(witness) => Ok(DecMdp { inner: model, witness }),
            JointObservability::Counterexample(c) => Err(Error::NotJointlyObservable(format!(
                "joint observation {:?} is emitted by states {} and {}",
                c.observation, c.first.1, c.second.1
            ))),
        }
    }

    pub fn model(&self) -> &DecPomdp {
        &self.inner
    }

    pub fn into_model(self) -> DecPomdp {
        self.inner
    }

    pub fn witness(&self) -> &BTreeMap<Vec<ObsId>, StateId> {
        &self.witness
    }
}

/// "Is there a joint policy with expected total reward at least `threshold`?"
#[derive(Debug, Clone)]
pub struct DecisionInstance {
    pub model: DecPomdp,
    pub horizon: usize,
    pub threshold: Rational,
}

impl DecisionInstance {
    /// Rejects `horizon >= |S|` unless `allow_long_horizon` is set.
    pub fn new(
        model: DecPomdp,
        horizon: usize,
        threshold: Rational,
        allow_long_horizon: bool,
    ) -> Result<Self> {
        if horizon >= model.num_states() && !allow_long_horizon {
            return Err(Error::HorizonPrecondition { horizon, states: model.num_states() });
        }
        Ok(DecisionInstance { model, horizon, threshold })
    }
}
