use serde::Serialize;

use super::product::{build_product_machine, ComponentFlags, ProductMachine};
use crate::error::{Error, Result};
use crate::model::{ActionId, AgentId, AgentSpec, DecPomdp, ObsId, StateId};
use crate::policy::{history_space, LocalPolicy};
use crate::rational::Rational;
use crate::tiling::{Tiling, TilingInstance};

/// Observation alphabet shared by both agents.
pub const OBSERVATIONS: [&str; 6] = ["0", "1", "dummy", "choose-0", "choose-1", "choose-dummy"];
const DUMMY: ObsId = 2;
const CHOOSE_DUMMY: ObsId = 5;
pub const NOOP: ActionId = 0;

/// A compiled TILING instance.
#[derive(Debug, Clone)]
pub struct ReductionArtifact {
    pub model: DecPomdp,
    pub horizon: usize,
    pub threshold: Rational,
    /// Model states `0..product.len()` are product states; the last one is final.
    pub product: ProductMachine,
}

#[derive(Debug, Clone, Serialize)]
pub struct StateFlags {
    pub state: String,
    pub flags: ComponentFlags,
}

/// Sidecar describing a compiled model.
#[derive(Debug, Clone, Serialize)]
pub struct ReductionMetadata {
    pub n: u64,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(rename = "K")]
    pub threshold: Rational,
    pub state_count: usize,
    pub final_state: String,
    pub flags: Vec<StateFlags>,
}

impl ReductionArtifact {
    pub fn final_state(&self) -> StateId {
        self.product.len()
    }

    /// Component flags of a model state; `None` for the final state.
    pub fn decode(&self, state: StateId) -> Option<ComponentFlags> {
        (state < self.product.len()).then(|| self.product.flags(state))
    }

    pub fn metadata(&self) -> ReductionMetadata {
        ReductionMetadata {
            n: 1 << self.product.bits(),
            horizon: self.horizon,
            threshold: self.threshold.clone(),
            state_count: self.model.num_states(),
            final_state: self.model.states()[self.final_state()].clone(),
            flags: (0..self.product.len())
                .map(|s| StateFlags { state: self.model.states()[s].clone(), flags: self.product.flags(s) })
                .collect(),
        }
    }
}

/// Which agent owns the bit read as symbol number `count` (1-based):
/// odd symbols are agent one's, even ones agent two's.
fn owner(count: usize) -> usize {
    (count - 1) % 2
}

/// Does the pair `(t1, t2)` break any condition armed at this state?
fn violates(instance: &TilingInstance, flags: &ComponentFlags, t1: usize, t2: usize) -> bool {
    (flags.equal && t1 != t2)
        || (flags.upper_left && t1 != 0)
        || (flags.horizontal && !instance.h_allows(t1, t2))
        || (flags.vertical && !instance.v_allows(t1, t2))
}

/// Builds the two-agent model whose optimum is zero exactly when the
/// instance has a consistent tiling, and negative otherwise.
pub fn compile_tiling_to_decpomdp(instance: &TilingInstance) -> Result<ReductionArtifact> {
    let product = build_product_machine(instance.n())?;
    let bits = product.bits();
    let top = 4 * bits;
    let horizon = top + 1;
    let k = instance.num_tiles();
    let tile_actions: Vec<ActionId> = (1..=k).collect();

    let mut actions = vec!["noop".to_string()];
    actions.extend(instance.tiles().iter().map(|t| format!("place-{t}")));
    let agent = AgentSpec {
        observations: OBSERVATIONS.iter().map(|s| s.to_string()).collect(),
        actions,
        initial_actions: vec![NOOP],
        actions_by_observation: (0..OBSERVATIONS.len())
            .map(|o| if o >= 3 { tile_actions.clone() } else { vec![NOOP] })
            .collect(),
    };

    let final_state = product.len();
    let mut names: Vec<String> = (0..product.len())
        .map(|s| product.components(s).map(|c| c.to_string()).join("."))
        .collect();
    names.push("final".into());

    let mut b = DecPomdp::builder(names, ProductMachine::START)
        .agent(agent.clone())
        .agent(agent)
        .horizon(horizon);
    let half = Rational::dyadic(1);
    let noop = [NOOP, NOOP];
    for s in 0..product.len() {
        match product.step(s, 0).zip(product.step(s, 1)) {
            Some((zero, one)) => {
                b.transition(s, &noop, zero, half.clone());
                b.transition(s, &noop, one, half.clone());
            }
            None => {
                let flags = product.flags(s);
                for &a1 in &tile_actions {
                    for &a2 in &tile_actions {
                        b.transition(s, &[a1, a2], final_state, Rational::one());
                        if violates(instance, &flags, a1 - 1, a2 - 1) {
                            b.reward(s, &[a1, a2], Rational::from_integer(-1));
                        }
                    }
                }
            }
        }
        let count = product.count(s);
        if count > 0 {
            let bit = product.last_bit(s) as ObsId;
            let mut obs = [0; 2];
            if count == top {
                obs[owner(count)] = 3 + bit;
                obs[1 - owner(count)] = CHOOSE_DUMMY;
            } else {
                obs[owner(count)] = bit;
                obs[1 - owner(count)] = DUMMY;
            }
            b.observation(&noop, s, &obs, Rational::one());
        }
    }
    b.transition(final_state, &noop, final_state, Rational::one());
    b.observation(&noop, final_state, &[DUMMY, DUMMY], Rational::one());
    for &a1 in &tile_actions {
        for &a2 in &tile_actions {
            b.observation(&[a1, a2], final_state, &[DUMMY, DUMMY], Rational::one());
        }
    }

    let model = b.build()?;
    if horizon >= model.num_states() {
        return Err(Error::Internal(format!("horizon {horizon} is not below {} states", model.num_states())));
    }
    Ok(ReductionArtifact { model, horizon, threshold: Rational::zero(), product })
}

/// The grid position an agent has seen, from its own bits in arrival order:
/// `L` bits of the column then `L` of the row, least significant first.
pub fn observed_position(history: &[ObsId], bits: usize) -> Option<(usize, usize)> {
    let own: Vec<usize> = history
        .iter()
        .filter_map(|&o| match o {
            0 | 1 => Some(o),
            3 | 4 => Some(o - 3),
            _ => None,
        })
        .collect();
    if own.len() != 2 * bits {
        return None;
    }
    let value = |part: &[usize]| part.iter().enumerate().map(|(k, b)| b << k).sum();
    Some((value(&own[..bits]), value(&own[bits..])))
}

/// The local policy that waits through the position phase and then places
/// `f(i, j)` for the position `(i, j)` it observed.
pub fn tiling_to_local_policy(
    instance: &TilingInstance,
    f: &Tiling,
    artifact: &ReductionArtifact,
    agent: AgentId,
) -> Result<LocalPolicy> {
    if f.n() as u64 != instance.n() {
        return Err(Error::InvalidInstance(format!("tiling side {} does not match n = {}", f.n(), instance.n())));
    }
    let bits = artifact.product.bits();
    let space = history_space(&artifact.model, agent, artifact.horizon);
    let mut decisions = std::collections::BTreeMap::new();
    for node in space.nodes() {
        let seq = space.sequence(node);
        let action = if seq.len() < 4 * bits {
            NOOP
        } else {
            let (i, j) = observed_position(&seq, bits)
                .ok_or_else(|| Error::Internal(format!("cannot decode a position from history {seq:?}")))?;
            1 + f.get(i, j)
        };
        decisions.insert(seq, action);
    }
    Ok(LocalPolicy { agent, decisions })
}
