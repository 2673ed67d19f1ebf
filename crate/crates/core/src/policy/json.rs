//! Policy files: `{"agents": [[{"history": ["o1", "o2"], "action": "a"}, ...], ...]}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{JointPolicy, LocalPolicy};
use crate::error::{Error, Result};
use crate::model::{AgentId, DecPomdp};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionRecord {
    pub history: Vec<String>,
    pub action: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyFile {
    pub agents: Vec<Vec<DecisionRecord>>,
}

impl PolicyFile {
    pub fn from_policy(model: &DecPomdp, policy: &JointPolicy) -> Self {
        PolicyFile {
            agents: policy
                .locals
                .iter()
                .map(|local| {
                    let spec = model.agent(local.agent);
                    local
                        .decisions
                        .iter()
                        .map(|(h, &a)| DecisionRecord {
                            history: model.history_names(local.agent, h),
                            action: spec.actions[a].clone(),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn into_policy(self, model: &DecPomdp) -> Result<JointPolicy> {
        if self.agents.len() != model.num_agents() {
            return Err(Error::parse(
                "agents",
                format!("expected {} agents, found {}", model.num_agents(), self.agents.len()),
            ));
        }
        let locals = self
            .agents
            .into_iter()
            .enumerate()
            .map(|(i, records)| {
                let spec = &model.agents()[i];
                let mut decisions = BTreeMap::new();
                for (k, rec) in records.into_iter().enumerate() {
                    let field = format!("agents[{i}][{k}]");
                    let history = rec
                        .history
                        .iter()
                        .map(|o| {
                            spec.observations.iter().position(|x| x == o).ok_or_else(|| {
                                Error::parse(format!("{field}.history"), format!("unknown observation `{o}`"))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let action = spec.actions.iter().position(|x| *x == rec.action).ok_or_else(|| {
                        Error::parse(format!("{field}.action"), format!("unknown action `{}`", rec.action))
                    })?;
                    if decisions.insert(history, action).is_some() {
                        return Err(Error::parse(field, "history listed twice"));
                    }
                }
                Ok(LocalPolicy { agent: AgentId(i), decisions })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(JointPolicy::new(locals))
    }
}

pub fn parse_policy(model: &DecPomdp, text: &str) -> Result<JointPolicy> {
    let file: PolicyFile = serde_json::from_str(text).map_err(|e| Error::parse("policy", e))?;
    file.into_policy(model)
}

pub fn policy_to_json(model: &DecPomdp, policy: &JointPolicy) -> String {
    serde_json::to_string_pretty(&PolicyFile::from_policy(model, policy)).expect("policy serializes")
}
