//! JSON model files.
//!
//! ```json
//! {
//!   "states": ["s0", "s1"],
//!   "start": "s0",
//!   "agents": [{
//!     "observations": ["o"],
//!     "actions": ["a", "b"],
//!     "initial_actions": ["a"],
//!     "actions_by_observation": {"o": ["a", "b"]}
//!   }],
//!   "transitions": [{"s": "s0", "a": ["a"], "s2": "s1", "p": "1/2"}],
//!   "observation_probs": [{"a": ["a"], "s2": "s1", "o": ["o"], "p": "1/1"}],
//!   "rewards": [{"s": "s0", "a": ["b"], "r": "-1/1"}],
//!   "horizon": 2
//! }
//! ```
//!
//! Probabilities and rewards are written as `"num/den"` strings. On input
//! they may also be integers or decimals (string or JSON number), read exactly.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{ActionId, AgentSpec, DecPomdp};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Text(String),
    Number(serde_json::Number),
}

impl Scalar {
    pub fn exact(value: &Rational) -> Self {
        Scalar::Text(value.to_string())
    }

    pub fn to_rational(&self, field: &str) -> Result<Rational> {
        let text = match self {
            Scalar::Text(t) => t.clone(),
            Scalar::Number(n) => n.to_string(),
        };
        text.parse().map_err(|e| Error::parse(field, e))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentFile {
    pub observations: Vec<String>,
    /// Declaration order of actions; defaults to first appearance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<String>>,
    pub initial_actions: Vec<String>,
    #[serde(default)]
    pub actions_by_observation: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionRecord {
    pub s: String,
    pub a: Vec<String>,
    pub s2: String,
    pub p: Scalar,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationRecord {
    pub a: Vec<String>,
    pub s2: String,
    pub o: Vec<String>,
    pub p: Scalar,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardRecord {
    pub s: String,
    pub a: Vec<String>,
    pub r: Scalar,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub states: Vec<String>,
    pub start: String,
    pub agents: Vec<AgentFile>,
    #[serde(default)]
    pub transitions: Vec<TransitionRecord>,
    #[serde(default)]
    pub observation_probs: Vec<ObservationRecord>,
    #[serde(default)]
    pub rewards: Vec<RewardRecord>,
    pub horizon: usize,
}

fn index_of(names: &[String], field: &str) -> Result<HashMap<String, usize>> {
    let mut map = HashMap::new();
    for (i, n) in names.iter().enumerate() {
        if map.insert(n.clone(), i).is_some() {
            return Err(Error::parse(field, format!("duplicate id `{n}`")));
        }
    }
    Ok(map)
}

fn lookup(map: &HashMap<String, usize>, name: &str, field: &str) -> Result<usize> {
    map.get(name)
        .copied()
        .ok_or_else(|| Error::parse(field, format!("unknown id `{name}`")))
}

struct AgentIndex {
    observations: HashMap<String, usize>,
    actions: HashMap<String, usize>,
}

impl ModelFile {
    pub fn into_model(self) -> Result<DecPomdp> {
        let states = index_of(&self.states, "states")?;
        let start = lookup(&states, &self.start, "start")?;
        let mut specs = Vec::new();
        let mut indices = Vec::new();
        for (i, agent) in self.agents.iter().enumerate() {
            let field = format!("agents[{i}]");
            let observations = index_of(&agent.observations, &format!("{field}.observations"))?;
            let action_names = match &agent.actions {
                Some(list) => list.clone(),
                None => {
                    let mut seen = Vec::new();
                    let by_obs = agent
                        .observations
                        .iter()
                        .filter_map(|o| agent.actions_by_observation.get(o));
                    for a in agent.initial_actions.iter().chain(by_obs.flatten()) {
                        if !seen.contains(a) {
                            seen.push(a.clone());
                        }
                    }
                    seen
                }
            };
            let actions = index_of(&action_names, &format!("{field}.actions"))?;
            let action_set = |names: &[String], f: &str| -> Result<Vec<ActionId>> {
                let mut set = names
                    .iter()
                    .map(|n| lookup(&actions, n, f))
                    .collect::<Result<Vec<_>>>()?;
                set.sort_unstable();
                if set.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::parse(f, "repeated action"));
                }
                Ok(set)
            };
            let initial_actions = action_set(&agent.initial_actions, &format!("{field}.initial_actions"))?;
            for key in agent.actions_by_observation.keys() {
                lookup(&observations, key, &format!("{field}.actions_by_observation"))?;
            }
            let actions_by_observation = agent
                .observations
                .iter()
                .map(|o| {
                    let f = format!("{field}.actions_by_observation.{o}");
                    match agent.actions_by_observation.get(o) {
                        Some(list) => action_set(list, &f),
                        None => Ok(Vec::new()),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            specs.push(AgentSpec {
                observations: agent.observations.clone(),
                actions: action_names,
                initial_actions,
                actions_by_observation,
            });
            indices.push(AgentIndex { observations, actions });
        }
        let joint = |names: &[String], field: &str| -> Result<Vec<usize>> {
            if names.len() != indices.len() {
                return Err(Error::parse(
                    field,
                    format!("expected {} entries, found {}", indices.len(), names.len()),
                ));
            }
            names
                .iter()
                .zip(&indices)
                .map(|(n, idx)| lookup(&idx.actions, n, field))
                .collect()
        };

        let mut b = DecPomdp::builder(self.states.clone(), start).horizon(self.horizon);
        for spec in specs {
            b = b.agent(spec);
        }
        for (k, t) in self.transitions.iter().enumerate() {
            let f = format!("transitions[{k}]");
            let s = lookup(&states, &t.s, &format!("{f}.s"))?;
            let a = joint(&t.a, &format!("{f}.a"))?;
            let s2 = lookup(&states, &t.s2, &format!("{f}.s2"))?;
            b.transition(s, &a, s2, t.p.to_rational(&format!("{f}.p"))?);
        }
        for (k, o) in self.observation_probs.iter().enumerate() {
            let f = format!("observation_probs[{k}]");
            let a = joint(&o.a, &format!("{f}.a"))?;
            let s2 = lookup(&states, &o.s2, &format!("{f}.s2"))?;
            if o.o.len() != indices.len() {
                return Err(Error::parse(format!("{f}.o"), "wrong number of observations"));
            }
            let obs = o
                .o
                .iter()
                .zip(&indices)
                .map(|(n, idx)| lookup(&idx.observations, n, &format!("{f}.o")))
                .collect::<Result<Vec<_>>>()?;
            b.observation(&a, s2, &obs, o.p.to_rational(&format!("{f}.p"))?);
        }
        for (k, r) in self.rewards.iter().enumerate() {
            let f = format!("rewards[{k}]");
            let s = lookup(&states, &r.s, &format!("{f}.s"))?;
            let a = joint(&r.a, &format!("{f}.a"))?;
            b.reward(s, &a, r.r.to_rational(&format!("{f}.r"))?);
        }
        b.build()
    }

    pub fn from_model(model: &DecPomdp) -> Self {
        let agents = model.agents();
        let joint_names = |ja: usize| -> Vec<String> {
            model
                .joint_action(ja)
                .iter()
                .zip(agents)
                .map(|(&a, ag)| ag.actions[a].clone())
                .collect()
        };
        let state = |s: usize| model.states()[s].clone();
        ModelFile {
            states: model.states().to_vec(),
            start: state(model.start()),
            agents: agents
                .iter()
                .map(|ag| AgentFile {
                    observations: ag.observations.clone(),
                    actions: Some(ag.actions.clone()),
                    initial_actions: ag.initial_actions.iter().map(|&a| ag.actions[a].clone()).collect(),
                    actions_by_observation: ag
                        .observations
                        .iter()
                        .zip(&ag.actions_by_observation)
                        .map(|(o, set)| (o.clone(), set.iter().map(|&a| ag.actions[a].clone()).collect()))
                        .collect(),
                })
                .collect(),
            transitions: model
                .transition_entries()
                .map(|(s, ja, s2, p)| TransitionRecord {
                    s: state(s),
                    a: joint_names(ja),
                    s2: state(s2),
                    p: Scalar::exact(p),
                })
                .collect(),
            observation_probs: model
                .observation_entries()
                .map(|(ja, s2, obs, p)| ObservationRecord {
                    a: joint_names(ja),
                    s2: state(s2),
                    o: model.joint_observation_names(obs),
                    p: Scalar::exact(p),
                })
                .collect(),
            rewards: model
                .reward_entries()
                .map(|(s, ja, r)| RewardRecord { s: state(s), a: joint_names(ja), r: Scalar::exact(r) })
                .collect(),
            horizon: model.horizon(),
        }
    }
}

pub fn parse_model(text: &str) -> Result<DecPomdp> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::parse("model", e))?;
    file.into_model()
}

pub fn model_to_json(model: &DecPomdp) -> String {
    serde_json::to_string_pretty(&ModelFile::from_model(model)).expect("model serializes")
}
