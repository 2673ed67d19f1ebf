use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use super::dfa::{build_component_dfas, grid_bits, ComponentDfa, DfaKind};
use crate::error::Result;

/// Accept flags of the six components at one product state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ComponentFlags {
    pub last_bit: bool,
    pub counter_done: bool,
    pub equal: bool,
    pub upper_left: bool,
    pub horizontal: bool,
    pub vertical: bool,
}

/// Reachable part of the synchronous product of the six component DFAs.
///
/// States whose counter has reached `4L` are terminal and not expanded.
#[derive(Debug, Clone)]
pub struct ProductMachine {
    dfas: [ComponentDfa; 6],
    bits: usize,
    /// Component states in [`DfaKind::ALL`] order; index 0 is the start.
    states: Vec<[usize; 6]>,
    /// `None` for terminal states.
    transition: Vec<Option<[usize; 2]>>,
}

impl ProductMachine {
    pub const START: usize = 0;

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn dfas(&self) -> &[ComponentDfa; 6] {
        &self.dfas
    }

    pub fn components(&self, state: usize) -> [usize; 6] {
        self.states[state]
    }

    pub fn step(&self, state: usize, bit: u8) -> Option<usize> {
        self.transition[state].map(|t| t[bit as usize])
    }

    /// Symbols read so far.
    pub fn count(&self, state: usize) -> usize {
        self.states[state][1]
    }

    pub fn last_bit(&self, state: usize) -> u8 {
        self.states[state][0] as u8
    }

    pub fn is_terminal(&self, state: usize) -> bool {
        self.transition[state].is_none()
    }

    pub fn flags(&self, state: usize) -> ComponentFlags {
        let f = |k: usize| self.dfas[k].accepting[self.states[state][k]];
        ComponentFlags {
            last_bit: f(0),
            counter_done: f(1),
            equal: f(2),
            upper_left: f(3),
            horizontal: f(4),
            vertical: f(5),
        }
    }

    pub fn flag(&self, state: usize, kind: DfaKind) -> bool {
        let k = DfaKind::ALL.iter().position(|&d| d == kind).expect("listed kind");
        self.dfas[k].accepting[self.states[state][k]]
    }

    /// Runs a word from the start; `None` if it runs past a terminal state.
    pub fn run(&self, word: &[u8]) -> Option<usize> {
        word.iter().try_fold(Self::START, |s, &b| self.step(s, b))
    }
}

/// Breadth-first construction from the tuple of component start states.
pub fn build_product_machine(n: u64) -> Result<ProductMachine> {
    let bits = grid_bits(n)?;
    let dfas = build_component_dfas(n)?;
    let top = 4 * bits;
    let start: [usize; 6] = std::array::from_fn(|k| dfas[k].start);
    let mut states = vec![start];
    let mut index = HashMap::from([(start, 0usize)]);
    let mut transition = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let tuple = states[s];
        if tuple[1] == top {
            transition.push((s, None));
            continue;
        }
        let mut succ = [0; 2];
        for bit in 0..2u8 {
            let next: [usize; 6] = std::array::from_fn(|k| dfas[k].step(tuple[k], bit));
            succ[bit as usize] = *index.entry(next).or_insert_with(|| {
                states.push(next);
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
        }
        transition.push((s, Some(succ)));
    }
    // BFS pops states in creation order
    debug_assert!(transition.iter().enumerate().all(|(k, (s, _))| k == *s));
    let transition = transition.into_iter().map(|(_, t)| t).collect();
    Ok(ProductMachine { dfas, bits, states, transition })
}
