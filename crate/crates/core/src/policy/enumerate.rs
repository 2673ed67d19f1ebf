use std::ops::Range;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::{history_space, space_policy_count, HistorySpace, JointPolicy, LocalPolicy};
use crate::error::{Error, Result};
use crate::model::{ActionId, AgentId, DecPomdp};

/// Number of local policies of `agent`: the product of the action counts
/// over its reachable decision points.
pub fn count_local_policies(model: &DecPomdp, agent: AgentId, horizon: usize) -> BigUint {
    space_policy_count(model, &history_space(model, agent, horizon))
}

/// A branching decision point: agent, history node, and its action choices.
#[derive(Debug, Clone)]
struct FreePoint {
    agent: usize,
    node: u32,
    actions: Vec<ActionId>,
}

/// The joint policy space in lexicographic order.
///
/// Policies are ordered by their decisions, agent 0 first, each agent's
/// decision points in canonical history order, actions in declaration
/// order. Index 0 is the policy that always picks the first available
/// action. Decision points with a single action do not branch.
#[derive(Debug, Clone)]
pub struct PolicyEnumerator {
    spaces: Vec<HistorySpace>,
    free: Vec<FreePoint>,
    /// Decision tables with every free point at its first action.
    base: Vec<Vec<ActionId>>,
    len: u64,
}

/// Marks a decision point that has no available action.
pub(crate) const NO_ACTION: ActionId = usize::MAX;

/// Builds the enumeration of all joint policies, refusing when the space is
/// larger than `budget`.
pub fn enumerate_joint_policies(model: &DecPomdp, horizon: usize, budget: u64) -> Result<PolicyEnumerator> {
    let spaces: Vec<HistorySpace> = (0..model.num_agents())
        .map(|i| history_space(model, AgentId(i), horizon))
        .collect();
    PolicyEnumerator::new(model, spaces, budget)
}

impl PolicyEnumerator {
    pub(crate) fn new(model: &DecPomdp, spaces: Vec<HistorySpace>, budget: u64) -> Result<Self> {
        let count: BigUint = spaces
            .iter()
            .map(|s| space_policy_count(model, s))
            .product();
        match count.to_u64() {
            Some(len) if len <= budget => {}
            _ => return Err(Error::BudgetExceeded { count, budget }),
        }
        let mut free = Vec::new();
        let mut base = Vec::with_capacity(spaces.len());
        for (i, space) in spaces.iter().enumerate() {
            let mut table = Vec::with_capacity(space.len());
            for node in space.nodes() {
                let actions = space.available(model, node);
                table.push(actions.first().copied().unwrap_or(NO_ACTION));
                if actions.len() > 1 {
                    free.push(FreePoint { agent: i, node, actions: actions.to_vec() });
                }
            }
            base.push(table);
        }
        let len = count.to_u64().expect("checked above");
        Ok(PolicyEnumerator { spaces, free, base, len })
    }

    /// Number of joint policies.
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spaces(&self) -> &[HistorySpace] {
        &self.spaces
    }

    /// Decision tables (per agent, indexed by history node) of the policy at `index`.
    pub fn tables_at(&self, index: u64) -> Vec<Vec<ActionId>> {
        let mut tables = self.base.clone();
        let mut rest = index;
        for point in self.free.iter().rev() {
            let radix = point.actions.len() as u64;
            tables[point.agent][point.node as usize] = point.actions[(rest % radix) as usize];
            rest /= radix;
        }
        tables
    }

    pub fn policy_at(&self, index: u64) -> JointPolicy {
        self.policy_from_tables(&self.tables_at(index))
    }

    pub fn policy_from_tables(&self, tables: &[Vec<ActionId>]) -> JointPolicy {
        JointPolicy::new(
            self.spaces
                .iter()
                .zip(tables)
                .map(|(space, table)| LocalPolicy {
                    agent: space.agent(),
                    decisions: space
                        .nodes()
                        .filter(|&n| table[n as usize] != NO_ACTION)
                        .map(|n| (space.sequence(n), table[n as usize]))
                        .collect(),
                })
                .collect(),
        )
    }

    /// Walks the decision tables of the policies in `range`, in order.
    pub fn cursor(&self, range: Range<u64>) -> TableCursor<'_> {
        let end = range.end.min(self.len);
        let start = range.start.min(end);
        let mut digits = vec![0usize; self.free.len()];
        let mut rest = start;
        for (d, point) in digits.iter_mut().zip(&self.free).rev() {
            let radix = point.actions.len() as u64;
            *d = (rest % radix) as usize;
            rest /= radix;
        }
        TableCursor {
            enumerator: self,
            tables: self.tables_at(start),
            digits,
            next: start,
            end,
            started: false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = JointPolicy> + '_ {
        let mut cursor = self.cursor(0..self.len);
        std::iter::from_fn(move || cursor.advance().map(|(_, t)| t.to_vec()))
            .map(|tables| self.policy_from_tables(&tables))
    }
}

/// Odometer over a contiguous index range; the last decision point turns fastest.
pub struct TableCursor<'e> {
    enumerator: &'e PolicyEnumerator,
    tables: Vec<Vec<ActionId>>,
    digits: Vec<usize>,
    next: u64,
    end: u64,
    started: bool,
}

impl TableCursor<'_> {
    /// Moves to the next policy and returns its index and decision tables.
    pub fn advance(&mut self) -> Option<(u64, &[Vec<ActionId>])> {
        if self.next >= self.end {
            return None;
        }
        if self.started {
            for k in (0..self.digits.len()).rev() {
                let point = &self.enumerator.free[k];
                self.digits[k] += 1;
                if self.digits[k] < point.actions.len() {
                    self.tables[point.agent][point.node as usize] = point.actions[self.digits[k]];
                    break;
                }
                self.digits[k] = 0;
                self.tables[point.agent][point.node as usize] = point.actions[0];
            }
        }
        self.started = true;
        let index = self.next;
        self.next += 1;
        Some((index, &self.tables))
    }
}
