//! The nested family `Γ(K₁) ⊂ … ⊂ Γ(K₂)`.
//!
//! A family stores one [`GameDefinition`] and derives each `Γ(K)` by
//! restriction, so nesting holds by construction; [`check_nesting`] verifies
//! it anyway, pair by pair, and reports a counterexample for any failure.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::game::{Game, GameDefinition, ProfileIter};
use crate::partition::{Partition, PlayerId};
use crate::solver::{Mode, Solution, Solver, SolverConfig};

#[derive(Clone, Debug)]
pub struct GameFamily {
    definition: GameDefinition,
    games: BTreeMap<usize, Game>,
}

impl GameFamily {
    pub fn definition(&self) -> &GameDefinition {
        &self.definition
    }

    pub fn ks(&self) -> impl Iterator<Item = usize> + '_ {
        self.games.keys().copied()
    }

    pub fn game(&self, k: usize) -> Option<&Game> {
        self.games.get(&k)
    }

    /// Mutable access to one member; edits are not propagated to the others.
    pub fn game_mut(&mut self, k: usize) -> Option<&mut Game> {
        self.games.get_mut(&k)
    }

    pub fn games(&self) -> impl Iterator<Item = (usize, &Game)> {
        self.games.iter().map(|(k, g)| (*k, g))
    }
}

pub fn build_family(def: &GameDefinition, ks: RangeInclusive<usize>) -> Result<GameFamily> {
    if ks.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "empty range of K: {}..={}",
            ks.start(),
            ks.end()
        )));
    }
    let mut games = BTreeMap::new();
    for k in ks {
        games.insert(k, def.game(k)?);
    }
    Ok(GameFamily {
        definition: def.clone(),
        games,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub passed: bool,
    pub counterexample: Option<String>,
}

impl CheckOutcome {
    fn pass() -> Self {
        CheckOutcome {
            passed: true,
            counterexample: None,
        }
    }

    fn fail(why: String) -> Self {
        CheckOutcome {
            passed: false,
            counterexample: Some(why),
        }
    }

    fn from_first(found: Option<String>) -> Self {
        found.map_or_else(Self::pass, Self::fail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestingPair {
    pub k_small: usize,
    pub k_large: usize,
    pub partitions: CheckOutcome,
    pub strategies: CheckOutcome,
    pub payoffs: CheckOutcome,
    pub rule: CheckOutcome,
}

impl NestingPair {
    pub fn all_passed(&self) -> bool {
        self.partitions.passed && self.strategies.passed && self.payoffs.passed && self.rule.passed
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestingReport {
    pub pairs: Vec<NestingPair>,
}

impl NestingReport {
    pub fn all_passed(&self) -> bool {
        self.pairs.iter().all(NestingPair::all_passed)
    }
}

/// Checks consecutive members for nested partitions and strategy sets,
/// identical payoffs on the smaller family, and agreeing formation rules on
/// the smaller profile space. A rule check that would exceed `budget`
/// profiles is reported as failed rather than silently skipped.
pub fn check_nesting(family: &GameFamily, budget: u128) -> NestingReport {
    let members: Vec<(usize, &Game)> = family.games().collect();
    let pairs = members
        .windows(2)
        .map(|w| {
            let (ks, small) = w[0];
            let (kl, large) = w[1];
            NestingPair {
                k_small: ks,
                k_large: kl,
                partitions: check_partitions(small, large),
                strategies: check_strategies(small, large),
                payoffs: check_payoffs(small, large),
                rule: check_rule(small, large, budget),
            }
        })
        .collect();
    NestingReport { pairs }
}

fn check_partitions(small: &Game, large: &Game) -> CheckOutcome {
    CheckOutcome::from_first(
        small
            .family()
            .iter()
            .find(|p| !large.family().contains(p))
            .map(|p| format!("partition {p} missing from P({})", large.k())),
    )
}

fn check_strategies(small: &Game, large: &Game) -> CheckOutcome {
    for i in 0..small.n() {
        let mut rest = large.strategies(PlayerId(i)).iter();
        for s in small.strategies(PlayerId(i)) {
            if !rest.any(|t| t == s) {
                return CheckOutcome::fail(format!(
                    "player {i}: strategy {s} of K={} is not in order in K={}",
                    small.k(),
                    large.k()
                ));
            }
        }
    }
    CheckOutcome::pass()
}

fn check_payoffs(small: &Game, large: &Game) -> CheckOutcome {
    // every label a player can ever choose in the smaller game
    let labels: Vec<Vec<&str>> = (0..small.n())
        .map(|i| {
            let mut l: Vec<&str> = small
                .strategies(PlayerId(i))
                .iter()
                .map(|s| s.action.label.as_str())
                .collect();
            l.sort_unstable();
            l.dedup();
            l
        })
        .collect();
    let radices: Vec<usize> = labels.iter().map(Vec::len).collect();
    for p in small.family().iter() {
        for pick in ProfileIter::new(radices.clone()) {
            let chosen: Vec<&str> = pick
                .iter()
                .enumerate()
                .map(|(i, &a)| labels[i][a])
                .collect();
            let a = small.payoff_lookup(p, &chosen);
            let b = large.payoff_lookup(p, &chosen);
            if a != b {
                return CheckOutcome::fail(format!(
                    "partition {p}, actions {chosen:?}: K={} pays {a:?}, K={} pays {b:?}",
                    small.k(),
                    large.k()
                ));
            }
        }
    }
    CheckOutcome::pass()
}

fn check_rule(small: &Game, large: &Game, budget: u128) -> CheckOutcome {
    let required = small.profile_count();
    if required > budget {
        return CheckOutcome::fail(format!(
            "not checked: {required} profiles exceed the budget of {budget}"
        ));
    }
    let maps: Vec<Vec<Option<usize>>> = (0..small.n())
        .map(|i| {
            let big = large.strategies(PlayerId(i));
            small
                .strategies(PlayerId(i))
                .iter()
                .map(|s| big.iter().position(|t| t == s))
                .collect()
        })
        .collect();
    for s in small.profiles() {
        let Some(lifted) = s
            .iter()
            .enumerate()
            .map(|(i, &x)| maps[i][x])
            .collect::<Option<Vec<_>>>()
        else {
            return CheckOutcome::fail(format!(
                "profile {s:?} has no counterpart in K={}",
                large.k()
            ));
        };
        let a = small.apply_formation_rule(&crate::game::StrategyProfile(s.clone()));
        let b = large.apply_formation_rule(&crate::game::StrategyProfile(lifted));
        if a != b {
            let names: Vec<String> = s
                .iter()
                .enumerate()
                .map(|(i, &x)| small.strategies(PlayerId(i))[x].to_string())
                .collect();
            return CheckOutcome::fail(format!(
                "profile {names:?} realizes {a} in K={} but {b} in K={}",
                small.k(),
                large.k()
            ));
        }
    }
    CheckOutcome::pass()
}

#[derive(Clone, Debug, PartialEq)]
pub struct KEquilibria {
    pub k: usize,
    pub family_size: usize,
    pub outcome: Result<Solution>,
    /// Partitions with positive probability in some equilibrium, family order.
    pub equilibrium_partitions: Vec<Partition>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KDiff {
    pub from_k: usize,
    pub to_k: usize,
    pub equilibria_before: usize,
    pub equilibria_after: usize,
    pub partitions_gained: Vec<Partition>,
    pub partitions_lost: Vec<Partition>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyReport {
    pub per_k: Vec<KEquilibria>,
    /// Between consecutive members that both solved.
    pub diffs: Vec<KDiff>,
}

/// Runs [`Solver::solve`] on every member. A budget error for one `K` is
/// kept in its entry and does not stop the others.
pub fn equilibria_across_k(family: &GameFamily, config: &SolverConfig, mode: Mode) -> FamilyReport {
    let per_k: Vec<KEquilibria> = family
        .games()
        .map(|(k, game)| {
            let outcome = Solver::new(game, config.clone()).and_then(|solver| solver.solve(mode));
            let equilibrium_partitions = match &outcome {
                Ok(sol) => game
                    .family()
                    .iter()
                    .filter(|p| {
                        sol.equilibria
                            .iter()
                            .any(|e| e.partitions().any(|q| q == *p))
                    })
                    .cloned()
                    .collect(),
                Err(_) => Vec::new(),
            };
            KEquilibria {
                k,
                family_size: game.family().len(),
                outcome,
                equilibrium_partitions,
            }
        })
        .collect();

    let diffs = per_k
        .windows(2)
        .filter_map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let (Ok(ea), Ok(eb)) = (&a.outcome, &b.outcome) else {
                return None;
            };
            Some(KDiff {
                from_k: a.k,
                to_k: b.k,
                equilibria_before: ea.equilibria.len(),
                equilibria_after: eb.equilibria.len(),
                partitions_gained: b
                    .equilibrium_partitions
                    .iter()
                    .filter(|p| !a.equilibrium_partitions.contains(p))
                    .cloned()
                    .collect(),
                partitions_lost: a
                    .equilibrium_partitions
                    .iter()
                    .filter(|p| !b.equilibrium_partitions.contains(p))
                    .cloned()
                    .collect(),
            })
        })
        .collect();

    FamilyReport { per_k, diffs }
}

impl KEquilibria {
    pub fn error_message(&self) -> Option<String> {
        self.outcome.as_ref().err().map(ToString::to_string)
    }
}
