//! Resource graph games: players choose 0/1 vectors over `m` resources and
//! each resource's cost may depend on the loads of other resources.
//!
//! The crate covers exact potentials for the consistent cost classes,
//! equilibrium search and verification, executable consistency tests with
//! counterexample construction, matroid strategy spaces (including bilevel
//! load balancing), and generators for the hardness reductions.

pub mod bilevel;
pub mod characterize;
pub mod costs;
pub mod dynamics;
pub mod error;
pub mod gadgets;
pub mod game;
pub mod matroid;
pub mod potential;
pub mod random;
pub mod rational;
pub mod reductions;

pub use costs::{CostModel, Matrix, Tabulated};
pub use dynamics::Certificate;
pub use error::{Error, Result};
pub use game::{deviate, load_of, private_cost, Game, LoadVector, Player, Profile, Strategy, StrategySpace};
pub use matroid::MatroidDesc;
pub use rational::{Rational, Value};
