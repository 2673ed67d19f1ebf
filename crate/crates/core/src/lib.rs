//! Exact finite-horizon planning for decentralized partially observable
//! Markov decision processes.
//!
//! Models use exact rational probabilities and rewards. Joint policies map
//! each agent's own observation history to an action; the solver enumerates
//! them exhaustively and evaluates each one exactly. A compiler turns square
//! tiling instances into two-agent models whose optimal value is zero
//! exactly when the instance has a consistent tiling.

pub mod cli;
pub mod error;
pub mod evaluation;
pub mod model;
pub mod policy;
pub mod rational;
pub mod reduction;
pub mod solver;
pub mod tiling;

pub use error::{Error, Result};
pub use rational::Rational;
