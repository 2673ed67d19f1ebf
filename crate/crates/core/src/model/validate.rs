use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{ActionId, AgentId, DecPomdp, ObsId, StateId};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `Σ_{s'} P(s' | s, a) != 1` for a state/joint action the agents can reach.
    TransitionSum {
        state: StateId,
        joint_action: Vec<ActionId>,
        sum: Rational,
    },
    /// `Σ_o O(o | a, s') != 1` for a joint action/successor that can occur.
    ObservationSum {
        joint_action: Vec<ActionId>,
        next_state: StateId,
        sum: Rational,
    },
    /// A stored probability outside `[0, 1]`.
    ProbabilityRange { entry: String, value: Rational },
    /// An agent with nothing to do after some observation it can receive.
    EmptyActionSet { agent: AgentId, after: Option<ObsId> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TransitionSum { state, joint_action, sum } => write!(
                f,
                "transition row (s={state}, a={joint_action:?}) sums to {sum}"
            ),
            Violation::ObservationSum { joint_action, next_state, sum } => write!(
                f,
                "observation row (a={joint_action:?}, s'={next_state}) sums to {sum}"
            ),
            Violation::ProbabilityRange { entry, value } => {
                write!(f, "probability {value} out of range at {entry}")
            }
            Violation::EmptyActionSet { agent, after } => match after {
                None => write!(f, "agent {agent} has no initial actions"),
                Some(o) => write!(f, "agent {agent} has no actions after observation {o}"),
            },
        }
    }
}

/// Findings that do not make the model ill-formed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Advisory {
    /// Every joint action alone pins down the successor from the joint
    /// observation, but across joint actions the same tuple names different
    /// states. Such a model is jointly observable only under the weaker
    /// per-action reading.
    ObservabilityReadingsDiffer {
        observation: Vec<ObsId>,
        states: (StateId, StateId),
    },
}

impl fmt::Display for Advisory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Advisory::ObservabilityReadingsDiffer { observation, states } => write!(
                f,
                "joint observation {observation:?} identifies state {} or {} depending on the joint action",
                states.0, states.1
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub advisories: Vec<Advisory>,
}

impl ValidationReport {
    /// No violations; advisories do not count.
    pub fn is_well_formed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "violation: {v}")?;
        }
        for a in &self.advisories {
            writeln!(f, "advisory: {a}")?;
        }
        Ok(())
    }
}

/// Joint actions that can be chosen in each state.
///
/// A state is entered with some joint observation (or is the start state,
/// where the initial action sets apply); the joint actions available there
/// are the products of the agents' sets for every such entry context.
pub(crate) fn relevant_joint_actions(model: &DecPomdp) -> Vec<BTreeSet<usize>> {
    let mut contexts: Vec<BTreeSet<Option<Vec<ObsId>>>> = vec![BTreeSet::new(); model.num_states()];
    contexts[model.start()].insert(None);
    for (_, s2, obs, p) in model.observation_entries() {
        if p.is_positive() {
            contexts[s2].insert(Some(obs.to_vec()));
        }
    }
    contexts
        .iter()
        .map(|ctxs| {
            let mut set = BTreeSet::new();
            for ctx in ctxs {
                let per_agent: Vec<&[ActionId]> = model
                    .agents()
                    .iter()
                    .enumerate()
                    .map(|(i, agent)| agent.available(ctx.as_ref().map(|o| o[i])))
                    .collect();
                for_each_product(&per_agent, |joint| {
                    set.insert(model.joint_action_index(joint));
                });
            }
            set
        })
        .collect()
}

/// Calls `f` on every element of the cartesian product, first factor slowest.
pub(crate) fn for_each_product(factors: &[&[usize]], mut f: impl FnMut(&[usize])) {
    if factors.iter().any(|s| s.is_empty()) {
        return;
    }
    let mut pos = vec![0usize; factors.len()];
    let mut current: Vec<usize> = factors.iter().map(|s| s[0]).collect();
    loop {
        f(&current);
        let mut k = factors.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            pos[k] += 1;
            if pos[k] < factors[k].len() {
                current[k] = factors[k][pos[k]];
                break;
            }
            pos[k] = 0;
            current[k] = factors[k][0];
        }
    }
}

/// Lists every violated stochasticity, range and availability constraint.
pub fn validate_model(model: &DecPomdp) -> ValidationReport {
    let mut report = ValidationReport::default();
    let one = Rational::one();

    for (i, agent) in model.agents().iter().enumerate() {
        if agent.initial_actions.is_empty() {
            report.violations.push(Violation::EmptyActionSet { agent: AgentId(i), after: None });
        }
    }
    let received: BTreeSet<(usize, ObsId)> = model
        .observation_entries()
        .filter(|(.., p)| p.is_positive())
        .flat_map(|(_, _, obs, _)| obs.iter().copied().enumerate().collect::<Vec<_>>())
        .collect();
    for &(i, o) in &received {
        if model.agents()[i].actions_by_observation[o].is_empty() {
            report
                .violations
                .push(Violation::EmptyActionSet { agent: AgentId(i), after: Some(o) });
        }
    }

    for (s, ja, s2, p) in model.transition_entries() {
        if !p.is_probability() {
            report.violations.push(Violation::ProbabilityRange {
                entry: format!("P(s'={s2} | s={s}, a={:?})", model.joint_action(ja)),
                value: p.clone(),
            });
        }
    }
    for (ja, s2, obs, p) in model.observation_entries() {
        if !p.is_probability() {
            report.violations.push(Violation::ProbabilityRange {
                entry: format!("O(o={obs:?} | a={:?}, s'={s2})", model.joint_action(ja)),
                value: p.clone(),
            });
        }
    }

    // Rows that must be distributions: every stored row, plus every row the
    // agents can reach.
    let relevant = relevant_joint_actions(model);
    let mut transition_rows: BTreeSet<(StateId, usize)> = model
        .transition_entries()
        .map(|(s, ja, ..)| (s, ja))
        .collect();
    for (s, set) in relevant.iter().enumerate() {
        transition_rows.extend(set.iter().map(|&ja| (s, ja)));
    }
    let mut observation_rows: BTreeSet<(usize, StateId)> = model
        .observation_entries()
        .map(|(ja, s2, ..)| (ja, s2))
        .collect();
    for &(s, ja) in &transition_rows {
        if relevant[s].contains(&ja) {
            for (s2, p) in model.transition_row(s, ja) {
                if p.is_positive() {
                    observation_rows.insert((ja, *s2));
                }
            }
        }
    }
    for (s, ja) in transition_rows {
        let sum: Rational = model.transition_row(s, ja).iter().map(|(_, p)| p).sum();
        if sum != one {
            report.violations.push(Violation::TransitionSum {
                state: s,
                joint_action: model.joint_action(ja),
                sum,
            });
        }
    }
    for (ja, s2) in observation_rows {
        let sum: Rational = model.observation_row(ja, s2).iter().map(|(_, p)| p).sum();
        if sum != one {
            report.violations.push(Violation::ObservationSum {
                joint_action: model.joint_action(ja),
                next_state: s2,
                sum,
            });
        }
    }

    // Global vs per-joint-action joint observability.
    let mut global: BTreeMap<&[ObsId], StateId> = BTreeMap::new();
    let mut per_action: BTreeMap<(usize, &[ObsId]), StateId> = BTreeMap::new();
    let mut per_action_ok = true;
    let mut global_conflict = None;
    for (ja, s2, obs, p) in model.observation_entries() {
        if !p.is_positive() {
            continue;
        }
        if let Some(&prev) = per_action.get(&(ja, obs)) {
            if prev != s2 {
                per_action_ok = false;
            }
        } else {
            per_action.insert((ja, obs), s2);
        }
        match global.get(obs) {
            Some(&prev) if prev != s2 => {
                global_conflict.get_or_insert((obs.to_vec(), (prev.min(s2), prev.max(s2))));
            }
            Some(_) => {}
            None => {
                global.insert(obs, s2);
            }
        }
    }
    if per_action_ok {
        if let Some((observation, states)) = global_conflict {
            report
                .advisories
                .push(Advisory::ObservabilityReadingsDiffer { observation, states });
        }
    }
    report
}
