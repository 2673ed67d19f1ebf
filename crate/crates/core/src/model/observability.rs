use std::collections::BTreeMap;

use super::{ActionId, DecPomdp, ObsId, StateId};

/// Two successor states that can emit the same joint observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservabilityConflict {
    pub observation: Vec<ObsId>,
    /// `(joint action, successor)` of the first emission seen.
    pub first: (Vec<ActionId>, StateId),
    pub second: (Vec<ActionId>, StateId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JointObservability {
    /// Every joint observation with nonzero probability names a unique state.
    Witness(BTreeMap<Vec<ObsId>, StateId>),
    Counterexample(ObservabilityConflict),
}

impl JointObservability {
    pub fn is_observable(&self) -> bool {
        matches!(self, JointObservability::Witness(_))
    }
}

/// Checks that the joint observation determines the state, across all joint
/// actions and successors.
pub fn check_joint_observability(model: &DecPomdp) -> JointObservability {
    let mut witness: BTreeMap<Vec<ObsId>, (usize, StateId)> = BTreeMap::new();
    for (ja, s2, obs, p) in model.observation_entries() {
        if !p.is_positive() {
            continue;
        }
        match witness.get(obs) {
            Some(&(prev_ja, prev)) if prev != s2 => {
                return JointObservability::Counterexample(ObservabilityConflict {
                    observation: obs.to_vec(),
                    first: (model.joint_action(prev_ja), prev),
                    second: (model.joint_action(ja), s2),
                });
            }
            Some(_) => {}
            None => {
                witness.insert(obs.to_vec(), (ja, s2));
            }
        }
    }
    JointObservability::Witness(witness.into_iter().map(|(o, (_, s))| (o, s)).collect())
}
