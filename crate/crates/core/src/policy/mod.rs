//! Deterministic history-indexed policies.
//!
//! A local policy assigns an action to every observation history of its
//! agent that can actually occur. [`HistorySpace`] interns those histories as
//! a trie whose node ids follow the canonical decision-point order: shorter
//! histories first, then lexicographic in observation declaration order.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigUint;
use num_traits::One;

use crate::model::{ActionId, AgentId, DecPomdp, ObsId, StateId};

mod enumerate;
pub mod json;

pub use enumerate::{count_local_policies, enumerate_joint_policies, PolicyEnumerator, TableCursor};
pub(crate) use enumerate::NO_ACTION;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObservationHistory {
    pub agent: AgentId,
    pub sequence: Vec<ObsId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalPolicy {
    pub agent: AgentId,
    pub decisions: BTreeMap<Vec<ObsId>, ActionId>,
}

impl LocalPolicy {
    pub fn action(&self, history: &[ObsId]) -> Option<ActionId> {
        self.decisions.get(history).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointPolicy {
    pub locals: Vec<LocalPolicy>,
}

impl JointPolicy {
    pub fn new(locals: Vec<LocalPolicy>) -> Self {
        JointPolicy { locals }
    }
}

#[derive(Debug, Clone)]
struct Node {
    parent: Option<u32>,
    last: Option<ObsId>,
    depth: usize,
}

/// The reachable observation histories of one agent, up to a length bound.
#[derive(Debug, Clone)]
pub struct HistorySpace {
    agent: AgentId,
    nodes: Vec<Node>,
    num_obs: usize,
    /// `children[node * num_obs + o]`, `u32::MAX` when absent.
    children: Vec<u32>,
}

impl HistorySpace {
    pub fn agent(&self) -> AgentId {
        self.agent
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub const ROOT: u32 = 0;

    pub fn child(&self, node: u32, obs: ObsId) -> Option<u32> {
        match self.children[node as usize * self.num_obs + obs] {
            u32::MAX => None,
            id => Some(id),
        }
    }

    /// `(observation, child)` pairs in observation order.
    pub fn children(&self, node: u32) -> impl Iterator<Item = (ObsId, u32)> + '_ {
        (0..self.num_obs).filter_map(move |o| self.child(node, o).map(|c| (o, c)))
    }

    pub fn depth(&self, node: u32) -> usize {
        self.nodes[node as usize].depth
    }

    pub fn last(&self, node: u32) -> Option<ObsId> {
        self.nodes[node as usize].last
    }

    pub fn sequence(&self, node: u32) -> Vec<ObsId> {
        let mut seq = Vec::with_capacity(self.depth(node));
        let mut cur = node;
        while let Some(parent) = self.nodes[cur as usize].parent {
            seq.push(self.nodes[cur as usize].last.expect("non-root node has an observation"));
            cur = parent;
        }
        seq.reverse();
        seq
    }

    pub fn find(&self, sequence: &[ObsId]) -> Option<u32> {
        sequence
            .iter()
            .try_fold(Self::ROOT, |node, &o| self.child(node, o))
    }

    /// Node ids in canonical order.
    pub fn nodes(&self) -> impl Iterator<Item = u32> {
        0..self.nodes.len() as u32
    }

    pub fn histories(&self) -> Vec<ObservationHistory> {
        self.nodes()
            .map(|n| ObservationHistory { agent: self.agent, sequence: self.sequence(n) })
            .collect()
    }

    /// Actions the agent may take after this history.
    pub fn available<'m>(&self, model: &'m DecPomdp, node: u32) -> &'m [ActionId] {
        model.agent(self.agent).available(self.last(node))
    }
}

/// Builds the history trie of `agent` for histories of length `< horizon`.
///
/// Forward closure over `(state, joint observation on entry, own history)`:
/// the other agents' available actions depend only on their last
/// observation, and any finite path of available joint actions is realized
/// by some deterministic joint policy, so this is exactly the set of
/// histories with nonzero probability under at least one joint policy.
pub fn history_space(model: &DecPomdp, agent: AgentId, horizon: usize) -> HistorySpace {
    let mut nodes = vec![Node { parent: None, last: None, depth: 0 }];
    let mut children: HashMap<(u32, ObsId), u32> = HashMap::new();
    type Frontier = Vec<(StateId, Option<Box<[ObsId]>>, u32)>;
    let mut frontier: Frontier = vec![(model.start(), None, HistorySpace::ROOT)];
    for _depth in 1..horizon {
        // successors keyed by (state, entry observation, parent, own obs)
        let mut next: HashSet<(StateId, Box<[ObsId]>, u32)> = HashSet::new();
        for (s, ctx, h) in &frontier {
            let per_agent: Vec<&[ActionId]> = model
                .agents()
                .iter()
                .enumerate()
                .map(|(i, a)| a.available(ctx.as_ref().map(|o| o[i])))
                .collect();
            crate::model::for_each_product(&per_agent, |joint| {
                let ja = model.joint_action_index(joint);
                for (s2, _) in model.transition_row(*s, ja) {
                    for (obs, _) in model.observation_row(ja, *s2) {
                        next.insert((*s2, obs.clone(), *h));
                    }
                }
            });
        }
        if next.is_empty() {
            break;
        }
        // canonical order: parents in id order, then own observation
        let mut ordered: Vec<_> = next.into_iter().collect();
        ordered.sort_by(|a, b| (a.2, a.1[agent.0], a.0, &a.1).cmp(&(b.2, b.1[agent.0], b.0, &b.1)));
        let mut new_frontier: Frontier = Vec::with_capacity(ordered.len());
        for (s2, obs, parent) in ordered {
            let o = obs[agent.0];
            let id = *children.entry((parent, o)).or_insert_with(|| {
                let depth = nodes[parent as usize].depth + 1;
                nodes.push(Node { parent: Some(parent), last: Some(o), depth });
                (nodes.len() - 1) as u32
            });
            new_frontier.push((s2, Some(obs), id));
        }
        frontier = new_frontier;
    }
    let num_obs = model.agent(agent).observations.len();
    let mut dense = vec![u32::MAX; nodes.len() * num_obs];
    for ((parent, o), id) in children {
        dense[parent as usize * num_obs + o] = id;
    }
    HistorySpace { agent, nodes, num_obs, children: dense }
}

/// Reachable histories of length `< horizon`, in canonical order.
pub fn reachable_histories(model: &DecPomdp, agent: AgentId, horizon: usize) -> Vec<ObservationHistory> {
    history_space(model, agent, horizon).histories()
}

/// Policy mapping every reachable history to its first available action.
pub fn first_action_policy(model: &DecPomdp, horizon: usize) -> JointPolicy {
    JointPolicy::new(
        (0..model.num_agents())
            .map(|i| {
                let space = history_space(model, AgentId(i), horizon);
                let decisions = space
                    .nodes()
                    .filter_map(|n| space.available(model, n).first().map(|&a| (space.sequence(n), a)))
                    .collect();
                LocalPolicy { agent: AgentId(i), decisions }
            })
            .collect(),
    )
}

/// `Π |available actions|` over all decision points.
pub(crate) fn space_policy_count(model: &DecPomdp, space: &HistorySpace) -> BigUint {
    space
        .nodes()
        .fold(BigUint::one(), |acc, n| acc * space.available(model, n).len())
}
