//! Non-cooperative coalition-structure formation games.
//!
//! Every player announces a *desired partition* of the player set together
//! with a local action. A formation rule resolves the announcements into one
//! realized partition, and payoffs are looked up per realized partition and
//! action profile. Games are parametrized by a maximum coalition size `K`;
//! growing `K` yields a nested family of games.
//!
//! The crate is `no_std` (it needs `alloc`). Enable the `parallel` feature to
//! evaluate profile checks and support combinations on a rayon pool.
//!
//! Module map:
//! - [`partition`]: coalitions, canonical partitions, size-capped enumeration.
//! - [`game`]: strategy sets, formation rules, payoff tables, mechanism axioms.
//! - [`solver`]: expected utilities, pure and mixed equilibrium search.
//! - [`family`]: the nested family of games over a range of `K`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod family;
pub mod game;
mod linalg;
pub mod partition;
pub mod solver;

pub use error::{Error, Result};
pub use family::{
    build_family, check_nesting, equilibria_across_k, CheckOutcome, FamilyReport, GameFamily,
    KDiff, KEquilibria, NestingPair, NestingReport,
};
pub use game::{
    coalition_values, Action, ActionSets, AxiomOutcome, AxiomReport, Bonus, FormationMechanism,
    FormationRule, Game, GameDefinition, PartitionStrategy, PayoffKey, PayoffTable,
    StrategyProfile,
};
pub use partition::{
    count_partitions, enumerate_partitions, enumerate_partitions_with_limit, is_nested, Coalition,
    Partition, PartitionFamily, PlayerId, DEFAULT_PLAYER_LIMIT, MAX_PLAYERS,
};
pub use solver::{
    EquilibriumCheck, EquilibriumResult, MixedProfile, MixedSearch, MixedStrategy, Mode,
    Refinement, Solution, Solver, SolverConfig, SupportEnumeration,
};
