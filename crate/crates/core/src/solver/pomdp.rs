use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use super::{SolveOptions, SolveResult};
use crate::error::{Error, Result};
use crate::model::{validate_model, ActionId, AgentId, DecPomdp, Pomdp};
use crate::policy::{history_space, space_policy_count, HistorySpace, JointPolicy, LocalPolicy};
use crate::rational::Rational;

/// Value, action, and the subtree decisions that go with it.
type Choice = (Rational, ActionId, Vec<(u32, ActionId)>);

struct Search<'a> {
    model: &'a DecPomdp,
    space: &'a HistorySpace,
    /// Chosen action per history node.
    table: Vec<ActionId>,
}

impl Search<'_> {
    /// Best value of the subtree at `node` given the unnormalized belief
    /// `belief[s] = P(s, history)`. Writes the first maximizing action of
    /// every node in the subtree into `table`.
    fn best(&mut self, node: u32, belief: &[Rational]) -> Rational {
        let actions = self.space.available(self.model, node);
        if belief.iter().all(Rational::is_zero) {
            self.fill_first(node);
            return Rational::zero();
        }
        let n = self.model.num_states();
        let mut best: Option<Choice> = None;
        for &a in actions {
            let ja = self.model.joint_action_index(&[a]);
            let mut value = Rational::zero();
            let mut next: BTreeMap<usize, Vec<Rational>> = BTreeMap::new();
            for (s, b) in belief.iter().enumerate().filter(|(_, b)| !b.is_zero()) {
                if let Some(r) = self.model.reward(s, ja) {
                    value += b * r;
                }
                for (s2, p) in self.model.transition_row(s, ja) {
                    let mass = b * p;
                    for (obs, q) in self.model.observation_row(ja, *s2) {
                        let row = next.entry(obs[0]).or_insert_with(|| vec![Rational::zero(); n]);
                        row[*s2] += &mass * q;
                    }
                }
            }
            let zero = vec![Rational::zero(); n];
            let kids: Vec<(usize, u32)> = self.space.children(node).collect();
            for (o, child) in kids {
                value += self.best(child, next.get(&o).unwrap_or(&zero));
            }
            if best.as_ref().is_none_or(|(v, _, _)| value > *v) {
                best = Some((value, a, self.snapshot(node)));
            }
        }
        let (value, a, subtree) = best.expect("available actions are nonempty");
        self.table[node as usize] = a;
        for (k, act) in subtree {
            self.table[k as usize] = act;
        }
        value
    }

    fn descendants(&self, node: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack: Vec<u32> = self.space.children(node).map(|(_, c)| c).collect();
        while let Some(k) = stack.pop() {
            out.push(k);
            stack.extend(self.space.children(k).map(|(_, c)| c));
        }
        out
    }

    fn snapshot(&self, node: u32) -> Vec<(u32, ActionId)> {
        self.descendants(node)
            .into_iter()
            .map(|k| (k, self.table[k as usize]))
            .collect()
    }

    fn fill_first(&mut self, node: u32) {
        for k in std::iter::once(node).chain(self.descendants(node)) {
            self.table[k as usize] = self.space.available(self.model, k)[0];
        }
    }
}

/// Exact optimum of a single-agent model by search over the belief tree.
///
/// Same answer and the same lexicographically first maximizer as the
/// exhaustive solver, without enumerating policies. `policies_examined`
/// reports the size of the policy space the search covers.
pub fn solve_pomdp_exact(pomdp: &Pomdp, horizon: usize, options: &SolveOptions) -> Result<SolveResult> {
    let model = pomdp.model();
    let report = validate_model(model);
    if !report.is_well_formed() {
        return Err(Error::InvalidModel(report.to_string().trim_end().to_string()));
    }
    let space = history_space(model, AgentId(0), horizon);
    let count = space_policy_count(model, &space);
    match count.to_u64() {
        Some(len) if len <= options.budget => {}
        _ => return Err(Error::BudgetExceeded { count, budget: options.budget }),
    }
    if horizon == 0 {
        return Ok(SolveResult {
            optimal_value: Rational::zero(),
            argmax_policy: JointPolicy::new(vec![LocalPolicy { agent: AgentId(0), decisions: BTreeMap::new() }]),
            policies_examined: count,
        });
    }
    let mut belief = vec![Rational::zero(); model.num_states()];
    belief[model.start()] = Rational::one();
    let mut search = Search { model, space: &space, table: vec![0; space.len()] };
    let optimal_value = search.best(HistorySpace::ROOT, &belief);
    let decisions = space
        .nodes()
        .map(|n| (space.sequence(n), search.table[n as usize]))
        .collect();
    Ok(SolveResult {
        optimal_value,
        argmax_policy: JointPolicy::new(vec![LocalPolicy { agent: AgentId(0), decisions }]),
        policies_examined: count,
    })
}
