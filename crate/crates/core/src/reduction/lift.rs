use crate::error::{Error, Result};
use crate::model::{AgentSpec, DecMdp, DecPomdp, Pomdp};

/// Appends an agent with a single `noop` action that observes the
/// successor state exactly. Transitions and rewards ignore it.
fn add_state_observer(model: &DecPomdp) -> Result<DecPomdp> {
    let n = model.num_states();
    let observer = AgentSpec {
        observations: model.states().to_vec(),
        actions: vec!["noop".into()],
        initial_actions: vec![0],
        actions_by_observation: vec![vec![0]; n],
    };
    let mut b = DecPomdp::builder(model.states().to_vec(), model.start());
    for spec in model.agents() {
        b = b.agent(spec.clone());
    }
    let mut b = b.agent(observer).horizon(model.horizon());
    let padded = |ja: usize| {
        let mut joint = model.joint_action(ja);
        joint.push(0);
        joint
    };
    for (s, ja, s2, p) in model.transition_entries() {
        b.transition(s, &padded(ja), s2, p.clone());
    }
    for (ja, s2, obs, p) in model.observation_entries() {
        let mut joint_obs = obs.to_vec();
        joint_obs.push(s2);
        b.observation(&padded(ja), s2, &joint_obs, p.clone());
    }
    for (s, ja, r) in model.reward_entries() {
        b.reward(s, &padded(ja), r.clone());
    }
    b.build()
}

/// Two agents become three; the third makes the model jointly observable
/// without changing the value of any policy of the first two.
pub fn lift_to_three_agent_decmdp(model: &DecPomdp) -> Result<DecMdp> {
    if model.num_agents() != 2 {
        return Err(Error::Arity { expected: 2, found: model.num_agents() });
    }
    DecMdp::new(add_state_observer(model)?)
}

/// A POMDP becomes a two-agent DEC-MDP by adding the state observer.
pub fn lift_pomdp_to_two_agent_decmdp(model: &Pomdp) -> Result<DecMdp> {
    DecMdp::new(add_state_observer(model.model())?)
}

/// Any arity: one more agent that sees the state.
pub fn lift_with_observer(model: &DecPomdp) -> Result<DecMdp> {
    DecMdp::new(add_state_observer(model)?)
}
