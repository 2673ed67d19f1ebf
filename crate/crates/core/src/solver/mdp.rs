use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{validate_model, ActionId, AgentId, Mdp, StateId};
use crate::policy::{history_space, JointPolicy, LocalPolicy};
use crate::rational::Rational;

/// `δ(s, t)`: an action per state and epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonstationaryPolicy {
    /// `decisions[t][s]`, `None` where no action is available.
    decisions: Vec<Vec<Option<ActionId>>>,
}

impl NonstationaryPolicy {
    pub fn action(&self, state: StateId, epoch: usize) -> Option<ActionId> {
        self.decisions.get(epoch).and_then(|row| row[state])
    }

    pub fn horizon(&self) -> usize {
        self.decisions.len()
    }

    /// The equivalent history-indexed policy: after a history of length `t`
    /// the agent is in the state named by its last observation.
    pub fn to_joint_policy(&self, mdp: &Mdp) -> JointPolicy {
        let model = mdp.model();
        let state_of: BTreeMap<_, _> = (0..model.num_states())
            .filter_map(|s| mdp.observation_of_state(s).map(|o| (o, s)))
            .collect();
        let space = history_space(model, AgentId(0), self.horizon());
        let decisions = space
            .nodes()
            .filter_map(|n| {
                let state = match space.last(n) {
                    None => model.start(),
                    Some(o) => state_of[&o],
                };
                self.action(state, space.depth(n)).map(|a| (space.sequence(n), a))
            })
            .collect();
        JointPolicy::new(vec![LocalPolicy { agent: AgentId(0), decisions }])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdpSolution {
    pub optimal_value: Rational,
    /// `values[t][s]` for `t` in `0..=T`; `values[T]` is all zero.
    pub values: Vec<Vec<Rational>>,
    pub policy: NonstationaryPolicy,
}

/// Finite-horizon backward induction:
/// `V_T = 0`, `V_t(s) = max_a R(s, a) + Σ_{s'} P(s' | s, a) V_{t+1}(s')`.
/// Ties go to the first action in declaration order.
pub fn solve_mdp_dp(mdp: &Mdp, horizon: usize) -> Result<MdpSolution> {
    let model = mdp.model();
    let report = validate_model(model);
    if !report.is_well_formed() {
        return Err(Error::InvalidModel(report.to_string().trim_end().to_string()));
    }
    let n = model.num_states();
    let mut values = vec![vec![Rational::zero(); n]; horizon + 1];
    let mut decisions = vec![vec![None; n]; horizon];
    for t in (0..horizon).rev() {
        for s in 0..n {
            let mut best: Option<(Rational, ActionId)> = None;
            for &a in mdp.available(s, t) {
                let ja = model.joint_action_index(&[a]);
                let mut q = model.reward(s, ja).cloned().unwrap_or_default();
                for (s2, p) in model.transition_row(s, ja) {
                    q += p * &values[t + 1][*s2];
                }
                if best.as_ref().is_none_or(|(b, _)| q > *b) {
                    best = Some((q, a));
                }
            }
            if let Some((v, a)) = best {
                values[t][s] = v;
                decisions[t][s] = Some(a);
            }
        }
    }
    let optimal_value = if horizon == 0 { Rational::zero() } else { values[0][model.start()].clone() };
    Ok(MdpSolution { optimal_value, values, policy: NonstationaryPolicy { decisions } })
}
