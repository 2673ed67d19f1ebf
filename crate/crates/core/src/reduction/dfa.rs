//! The six component automata that track two grid positions chosen bit by bit.
//!
//! Input words have length `4L` for an `n = 2^L` grid. The first `2L`
//! symbols interleave the bits of `i1` and `i2`, least significant first;
//! the next `2L` interleave `j1` and `j2` the same way.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DfaKind {
    /// Remembers the most recent bit.
    LastBit,
    /// Counts symbols up to `4L`.
    Counter,
    /// `(00 + 11)*`: the two positions coincide.
    Equal,
    /// `(0(0 + 1))*`: the first position is the origin.
    UpperLeft,
    /// `(10)*(01)(11 + 00)*` then `L` blocks of `(11 + 00)`: the second
    /// position is right of the first.
    Horizontal,
    /// `L` blocks of `(11 + 00)` then `(10)*(01)(11 + 00)*`: the second
    /// position is below the first.
    Vertical,
}

impl DfaKind {
    pub const ALL: [DfaKind; 6] = [
        DfaKind::LastBit,
        DfaKind::Counter,
        DfaKind::Equal,
        DfaKind::UpperLeft,
        DfaKind::Horizontal,
        DfaKind::Vertical,
    ];
}

impl fmt::Display for DfaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DfaKind::LastBit => "last-bit",
            DfaKind::Counter => "counter",
            DfaKind::Equal => "equal",
            DfaKind::UpperLeft => "upper-left",
            DfaKind::Horizontal => "horizontal",
            DfaKind::Vertical => "vertical",
        })
    }
}

/// A complete DFA over `{0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentDfa {
    pub kind: DfaKind,
    pub start: usize,
    /// `transition[q][bit]`.
    pub transition: Vec<[usize; 2]>,
    pub accepting: Vec<bool>,
}

impl ComponentDfa {
    pub fn num_states(&self) -> usize {
        self.transition.len()
    }

    pub fn step(&self, state: usize, bit: u8) -> usize {
        self.transition[state][bit as usize]
    }
}

/// Runs the automaton from its start state.
pub fn dfa_run(dfa: &ComponentDfa, word: &[u8]) -> (bool, usize) {
    let end = word.iter().fold(dfa.start, |q, &b| dfa.step(q, b));
    (dfa.accepting[end], end)
}

/// `log2 n`, rejecting anything but powers of two of at least 2.
pub fn grid_bits(n: u64) -> Result<usize> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidInstance(format!("n = {n} is not a power of two of at least 2")));
    }
    Ok(n.trailing_zeros() as usize)
}

/// Builder for machines with numbered states and a shared dead state.
struct Table {
    transition: Vec<[usize; 2]>,
    accepting: Vec<bool>,
}

impl Table {
    fn new(states: usize) -> Self {
        // the last state is the dead state
        let dead = states - 1;
        Table { transition: vec![[dead, dead]; states], accepting: vec![false; states] }
    }

    fn finish(self, kind: DfaKind, start: usize) -> ComponentDfa {
        ComponentDfa { kind, start, transition: self.transition, accepting: self.accepting }
    }
}

fn last_bit() -> ComponentDfa {
    ComponentDfa {
        kind: DfaKind::LastBit,
        start: 0,
        transition: vec![[0, 1], [0, 1]],
        accepting: vec![false, true],
    }
}

fn counter(bits: usize) -> ComponentDfa {
    let top = 4 * bits;
    let transition = (0..=top).map(|c| [(c + 1).min(top); 2]).collect();
    let mut accepting = vec![false; top + 1];
    accepting[top] = true;
    ComponentDfa { kind: DfaKind::Counter, start: 0, transition, accepting }
}

fn equal() -> ComponentDfa {
    // 0: between pairs, 1: read 0, 2: read 1, 3: dead
    let mut t = Table::new(4);
    t.transition[0] = [1, 2];
    t.transition[1] = [0, 3];
    t.transition[2] = [3, 0];
    t.accepting[0] = true;
    t.finish(DfaKind::Equal, 0)
}

fn upper_left() -> ComponentDfa {
    // 0: expects a 0, 1: expects anything, 2: dead
    let mut t = Table::new(3);
    t.transition[0] = [1, 2];
    t.transition[1] = [0, 0];
    t.accepting[0] = true;
    t.finish(DfaKind::UpperLeft, 0)
}

/// `(10)*(01)` prefix states, returning the state reached after the `01`.
fn carry_prefix(t: &mut Table, at: usize, after: usize) {
    let (pair, saw1, saw0) = (at, at + 1, at + 2);
    t.transition[pair] = [saw0, saw1];
    t.transition[saw1][0] = pair;
    t.transition[saw0][1] = after;
}

fn horizontal(bits: usize) -> ComponentDfa {
    // 0..3: (10)*(01); then E_k for k = 0..=L equal pairs (saturating),
    // each with two half-pair states; then dead.
    let states = 3 + 3 * (bits + 1) + 1;
    let mut t = Table::new(states);
    let pair = |k: usize| 3 + 3 * k;
    carry_prefix(&mut t, 0, pair(0));
    for k in 0..=bits {
        let next = pair((k + 1).min(bits));
        t.transition[pair(k)] = [pair(k) + 1, pair(k) + 2];
        t.transition[pair(k) + 1][0] = next;
        t.transition[pair(k) + 2][1] = next;
    }
    t.accepting[pair(bits)] = true;
    t.finish(DfaKind::Horizontal, 0)
}

fn vertical(bits: usize) -> ComponentDfa {
    // P_k for k < L equal pairs with half-pair states; then (10)*(01);
    // then an accepting (11 + 00)* loop; then dead.
    let states = 3 * bits + 3 + 3 + 1;
    let mut t = Table::new(states);
    let prefix = |k: usize| 3 * k;
    let carry = 3 * bits;
    let tail = carry + 3;
    for k in 0..bits {
        let next = if k + 1 == bits { carry } else { prefix(k + 1) };
        t.transition[prefix(k)] = [prefix(k) + 1, prefix(k) + 2];
        t.transition[prefix(k) + 1][0] = next;
        t.transition[prefix(k) + 2][1] = next;
    }
    carry_prefix(&mut t, carry, tail);
    t.transition[tail] = [tail + 1, tail + 2];
    t.transition[tail + 1][0] = tail;
    t.transition[tail + 2][1] = tail;
    t.accepting[tail] = true;
    t.finish(DfaKind::Vertical, 0)
}

/// The six automata for an `n × n` grid, in [`DfaKind::ALL`] order.
pub fn build_component_dfas(n: u64) -> Result<[ComponentDfa; 6]> {
    let bits = grid_bits(n)?;
    Ok([last_bit(), counter(bits), equal(), upper_left(), horizontal(bits), vertical(bits)])
}
