//! Solver and validation reports, as JSON and as text.
//!
//! The JSON form is the schema of record: it round-trips through serde, and
//! every reported profile can be rebuilt with [`profile_of`] and checked
//! again. The text form groups equilibria by outcome so that games with
//! thousands of equilibria stay readable.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use coalform_core::{
    check_nesting, equilibria_across_k, AxiomOutcome, AxiomReport, CheckOutcome, EquilibriumResult,
    Game, GameDefinition, GameFamily, MixedProfile, MixedSearch, MixedStrategy, Mode, Partition,
    PlayerId, Solution, SolverConfig, StrategyProfile,
};
use serde::{Deserialize, Serialize};

use crate::spec::GameSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub command: String,
    pub game: GameSummary,
    pub tolerance: f64,
    pub mode: String,
    pub members: Vec<Member>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nesting: Vec<NestingEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diffs: Vec<DiffEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSummary {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub players: Vec<PlayerEntry>,
    pub rule: String,
    pub k_range: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<EpsilonEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerEntry {
    pub index: usize,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonEntry {
    pub partition: String,
    pub bonus: Vec<f64>,
}

/// One `Γ(K)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Member {
    pub k: usize,
    pub partitions: usize,
    pub strategies: Vec<usize>,
    pub profiles: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axioms: Option<AxiomEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchEntry>,
    #[serde(default)]
    pub equilibria: Vec<EquilibriumEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxiomEntry {
    pub domains: Vec<PartitionCount>,
    pub in_family: Check,
    pub disjoint: Check,
    pub covering: Check,
}

impl AxiomEntry {
    pub fn passed(&self) -> bool {
        self.in_family.passed && self.disjoint.passed && self.covering.passed
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionCount {
    pub partition: String,
    pub profiles: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchEntry {
    pub max_support: usize,
    pub mixed: MixedStatus,
    pub refined: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MixedStatus {
    NotRequested,
    Ran {
        examined: u64,
        skipped_multilinear: u64,
        inconsistent: u64,
        degenerate: u64,
    },
    Skipped {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumEntry {
    pub mode: String,
    pub profile: Vec<PlayerMix>,
    pub payoffs: Vec<f64>,
    pub partitions: Vec<PartitionWeight>,
    pub max_regret: f64,
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerMix {
    pub player: String,
    /// Support only, in strategy order.
    pub mix: Vec<StrategyWeight>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyWeight {
    pub strategy: String,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionWeight {
    pub partition: String,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NestingEntry {
    pub k_small: usize,
    pub k_large: usize,
    pub partitions: Check,
    pub strategies: Check,
    pub payoffs: Check,
    pub rule: Check,
}

impl NestingEntry {
    pub fn passed(&self) -> bool {
        self.partitions.passed && self.strategies.passed && self.payoffs.passed && self.rule.passed
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffEntry {
    pub from_k: usize,
    pub to_k: usize,
    pub equilibria_before: usize,
    pub equilibria_after: usize,
    pub partitions_gained: Vec<String>,
    pub partitions_lost: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Whether every axiom and nesting check in the report passed.
    pub fn checks_passed(&self) -> bool {
        self.members
            .iter()
            .all(|m| m.axioms.as_ref().is_none_or(AxiomEntry::passed))
            && self.nesting.iter().all(NestingEntry::passed)
    }

    /// Equilibria of every listed `K`.
    pub fn solve(
        spec: &GameSpec,
        def: &GameDefinition,
        ks: &[usize],
        config: &SolverConfig,
        mode: Mode,
    ) -> Self {
        let mut report = Report::empty("solve", spec, def, ks, config.tol, mode);
        for &k in ks {
            let member = match def.game(k) {
                Ok(game) => {
                    let outcome = coalform_core::Solver::new(&game, config.clone())
                        .and_then(|s| s.solve(mode));
                    solved_member(&game, spec, config, outcome.map_err(|e| e.to_string()))
                }
                Err(e) => failed_member(k, e.to_string()),
            };
            report.members.push(member);
        }
        report.add_notes();
        report
    }

    /// Nesting checks plus equilibria of every member and the changes
    /// between consecutive members.
    pub fn family(spec: &GameSpec, family: &GameFamily, config: &SolverConfig, mode: Mode) -> Self {
        let ks: Vec<usize> = family.ks().collect();
        let mut report = Report::empty("family", spec, family.definition(), &ks, config.tol, mode);
        report.nesting = nesting_entries(family, config.budget);
        let across = equilibria_across_k(family, config, mode);
        for entry in across.per_k {
            let game = family.game(entry.k).expect("member exists");
            report.members.push(solved_member(
                game,
                spec,
                config,
                entry.outcome.map_err(|e| e.to_string()),
            ));
        }
        report.diffs = across
            .diffs
            .into_iter()
            .map(|d| DiffEntry {
                from_k: d.from_k,
                to_k: d.to_k,
                equilibria_before: d.equilibria_before,
                equilibria_after: d.equilibria_after,
                partitions_gained: d
                    .partitions_gained
                    .iter()
                    .map(Partition::to_string)
                    .collect(),
                partitions_lost: d.partitions_lost.iter().map(Partition::to_string).collect(),
            })
            .collect();
        report.add_notes();
        report
    }

    /// Formation-rule axioms for every member and nesting between them.
    pub fn validate(spec: &GameSpec, family: &GameFamily, budget: u128, tol: f64) -> Self {
        let ks: Vec<usize> = family.ks().collect();
        let mut report = Report::empty("validate", spec, family.definition(), &ks, tol, Mode::Weak);
        for (k, game) in family.games() {
            let mut member = bare_member(game);
            match game.check_mechanism_axioms(budget) {
                Ok(a) => member.axioms = Some(axiom_entry(game, &a)),
                Err(e) => member.error = Some(e.to_string()),
            }
            debug_assert_eq!(member.k, k);
            report.members.push(member);
        }
        report.nesting = nesting_entries(family, budget);
        report
    }

    fn empty(
        command: &str,
        spec: &GameSpec,
        def: &GameDefinition,
        ks: &[usize],
        tol: f64,
        mode: Mode,
    ) -> Self {
        let game = GameSummary {
            name: spec.name.clone(),
            players: spec
                .players
                .iter()
                .enumerate()
                .map(|(index, name)| PlayerEntry {
                    index,
                    name: name.clone(),
                })
                .collect(),
            rule: def.rule.name().to_string(),
            k_range: [
                ks.first().copied().unwrap_or(0),
                ks.last().copied().unwrap_or(0),
            ],
            epsilon: def.bonus.as_ref().map(|b| EpsilonEntry {
                partition: b.partition.to_string(),
                bonus: b.amounts.clone(),
            }),
        };
        Report {
            command: command.to_string(),
            game,
            tolerance: tol,
            mode: mode.name().to_string(),
            members: Vec::new(),
            nesting: Vec::new(),
            diffs: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn add_notes(&mut self) {
        for m in &self.members {
            let strict = m.equilibria.iter().filter(|e| e.mode == "strict").count();
            let weak_only = m.equilibria.len() - strict;
            if strict > 0 && weak_only > 0 {
                self.notes.push(format!(
                    "K={}: {strict} strict and {weak_only} weak-only equilibria; \
                     uniqueness is open under the weak definition and holds, if at all, \
                     only among strict equilibria",
                    m.k
                ));
            }
            if m.equilibria.iter().any(|e| e.degenerate) {
                self.notes.push(format!(
                    "K={}: equilibria marked degenerate are sample points of a continuum",
                    m.k
                ));
            }
        }
    }
}

fn to_u64(x: u128) -> u64 {
    u64::try_from(x).unwrap_or(u64::MAX)
}

fn bare_member(game: &Game) -> Member {
    Member {
        k: game.k(),
        partitions: game.family().len(),
        strategies: game.strategy_counts(),
        profiles: to_u64(game.profile_count()),
        axioms: None,
        search: None,
        equilibria: Vec::new(),
        error: None,
    }
}

fn failed_member(k: usize, error: String) -> Member {
    Member {
        k,
        partitions: 0,
        strategies: Vec::new(),
        profiles: 0,
        axioms: None,
        search: None,
        equilibria: Vec::new(),
        error: Some(error),
    }
}

fn solved_member(
    game: &Game,
    spec: &GameSpec,
    config: &SolverConfig,
    outcome: Result<Solution, String>,
) -> Member {
    let mut member = bare_member(game);
    match outcome {
        Ok(sol) => {
            member.search = Some(SearchEntry {
                max_support: config.max_support,
                mixed: match sol.mixed {
                    MixedSearch::NotRequested => MixedStatus::NotRequested,
                    MixedSearch::Ran {
                        examined,
                        skipped_multilinear,
                        inconsistent,
                        degenerate,
                    } => MixedStatus::Ran {
                        examined: to_u64(examined),
                        skipped_multilinear: to_u64(skipped_multilinear),
                        inconsistent: to_u64(inconsistent),
                        degenerate: to_u64(degenerate),
                    },
                    MixedSearch::Skipped(e) => MixedStatus::Skipped {
                        reason: e.to_string(),
                    },
                },
                refined: sol.refined,
            });
            member.equilibria = sol
                .equilibria
                .iter()
                .map(|e| equilibrium_entry(game, &spec.players, e))
                .collect();
        }
        Err(e) => member.error = Some(e),
    }
    member
}

pub fn equilibrium_entry(
    game: &Game,
    players: &[String],
    e: &EquilibriumResult,
) -> EquilibriumEntry {
    let profile = e
        .profile
        .strategies()
        .iter()
        .enumerate()
        .map(|(i, m)| PlayerMix {
            player: players[i].clone(),
            mix: m
                .support()
                .into_iter()
                .map(|s| StrategyWeight {
                    strategy: game.strategies(PlayerId(i))[s].to_string(),
                    probability: m.probabilities()[s],
                })
                .collect(),
        })
        .collect();
    EquilibriumEntry {
        mode: e.mode.name().to_string(),
        profile,
        payoffs: e.payoffs.clone(),
        partitions: e
            .partition_distribution
            .iter()
            .map(|(p, w)| PartitionWeight {
                partition: p.to_string(),
                probability: *w,
            })
            .collect(),
        max_regret: e.max_regret,
        degenerate: e.degenerate,
    }
}

/// Rebuilds the mixed profile of a reported equilibrium in `game`.
pub fn profile_of(game: &Game, entry: &EquilibriumEntry) -> Result<MixedProfile, String> {
    if entry.profile.len() != game.n() {
        return Err(format!(
            "{} players reported, game has {}",
            entry.profile.len(),
            game.n()
        ));
    }
    entry
        .profile
        .iter()
        .enumerate()
        .map(|(i, pm)| {
            let list = game.strategies(PlayerId(i));
            let mut w = vec![0.0; list.len()];
            for sw in &pm.mix {
                let pos = list
                    .iter()
                    .position(|s| s.to_string() == sw.strategy)
                    .ok_or_else(|| format!("player {}: no strategy {}", pm.player, sw.strategy))?;
                w[pos] = sw.probability;
            }
            MixedStrategy::new(w).map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, _>>()
        .map(MixedProfile::new)
}

fn check(c: &CheckOutcome) -> Check {
    Check {
        passed: c.passed,
        counterexample: c.counterexample.clone(),
    }
}

fn nesting_entries(family: &GameFamily, budget: u128) -> Vec<NestingEntry> {
    check_nesting(family, budget)
        .pairs
        .iter()
        .map(|p| NestingEntry {
            k_small: p.k_small,
            k_large: p.k_large,
            partitions: check(&p.partitions),
            strategies: check(&p.strategies),
            payoffs: check(&p.payoffs),
            rule: check(&p.rule),
        })
        .collect()
}

fn axiom_entry(game: &Game, a: &AxiomReport) -> AxiomEntry {
    let named = |o: &AxiomOutcome| Check {
        passed: o.passed,
        counterexample: o.counterexample.as_ref().map(|s| profile_names(game, s)),
    };
    AxiomEntry {
        domains: a
            .domain_sizes
            .iter()
            .map(|(p, s)| PartitionCount {
                partition: p.to_string(),
                profiles: *s as u64,
            })
            .collect(),
        in_family: named(&a.in_family),
        disjoint: named(&a.disjoint),
        covering: named(&a.covering),
    }
}

fn profile_names(game: &Game, s: &StrategyProfile) -> String {
    s.choices(game)
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Decimal places matching `tol`, so printed values are exact up to it.
fn places(tol: f64) -> usize {
    if tol >= 1.0 {
        0
    } else {
        ((-tol.log10()).ceil() as usize).min(15)
    }
}

pub fn format_number(x: f64, tol: f64) -> String {
    let s = format!("{:.*}", places(tol), x);
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

fn vector(v: &[f64], tol: f64) -> String {
    let parts: Vec<String> = v.iter().map(|x| format_number(*x, tol)).collect();
    format!("({})", parts.join(", "))
}

/// A partition both by index and by player name.
fn named_partition(p: &str, players: &[PlayerEntry]) -> String {
    let blocks: Vec<String> = p
        .split('|')
        .map(|b| {
            let names: Vec<&str> = b
                .split(',')
                .map(|i| {
                    i.parse::<usize>()
                        .ok()
                        .and_then(|i| players.get(i))
                        .map_or(i, |pl| pl.name.as_str())
                })
                .collect();
            format!("{{{}}}", names.join(","))
        })
        .collect();
    format!("{p} {{{}}}", blocks.join(","))
}

fn distribution(e: &EquilibriumEntry, players: &[PlayerEntry], tol: f64) -> String {
    e.partitions
        .iter()
        .map(|w| {
            let p = named_partition(&w.partition, players);
            if (w.probability - 1.0).abs() <= tol {
                p
            } else {
                format!("{p} @ {}", format_number(w.probability, tol))
            }
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

fn profile_text(e: &EquilibriumEntry, tol: f64) -> String {
    e.profile
        .iter()
        .map(|pm| {
            let mix = match pm.mix.as_slice() {
                [one] => one.strategy.clone(),
                many => {
                    let parts: Vec<String> = many
                        .iter()
                        .map(|w| format!("{} {}", format_number(w.probability, tol), w.strategy))
                        .collect();
                    format!("{{{}}}", parts.join(", "))
                }
            };
            format!("{}={mix}", pm.player)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

const EXAMPLES_PER_GROUP: usize = 3;

/// Human-readable report. Equilibria with the same mode, payoffs and
/// partition distribution are grouped; a few profiles of each are shown.
pub fn render_text(r: &Report) -> String {
    let tol = r.tolerance;
    let mut out = String::new();
    let players: Vec<String> = r
        .game
        .players
        .iter()
        .map(|p| format!("{}={}", p.index, p.name))
        .collect();
    let _ = writeln!(
        out,
        "{}: {} ({}), rule {}",
        r.command,
        r.game.name.as_deref().unwrap_or("unnamed game"),
        players.join(" "),
        r.game.rule
    );
    if let Some(eps) = &r.game.epsilon {
        let _ = writeln!(
            out,
            "bonus on {}: {}",
            named_partition(&eps.partition, &r.game.players),
            vector(&eps.bonus, tol)
        );
    }
    if r.command != "validate" {
        let _ = writeln!(
            out,
            "mode {}, tolerance {:e}, values shown to {} decimals",
            r.mode,
            tol,
            places(tol)
        );
    }

    for m in &r.members {
        let counts: Vec<String> = m.strategies.iter().map(ToString::to_string).collect();
        let _ = writeln!(
            out,
            "\nK={}: partitions {}, strategies {}, profiles {}",
            m.k,
            m.partitions,
            counts.join("/"),
            m.profiles
        );
        if let Some(e) = &m.error {
            let _ = writeln!(out, "  error: {e}");
        }
        if let Some(a) = &m.axioms {
            let sizes: Vec<String> = a
                .domains
                .iter()
                .map(|d| format!("{}:{}", d.partition, d.profiles))
                .collect();
            let _ = writeln!(out, "  domains {}", sizes.join(" "));
            for (name, c) in [
                ("in family", &a.in_family),
                ("disjoint", &a.disjoint),
                ("covering", &a.covering),
            ] {
                write_check(&mut out, name, c);
            }
        }
        if let Some(s) = &m.search {
            match &s.mixed {
                MixedStatus::NotRequested => {
                    let _ = writeln!(out, "  pure profiles only");
                }
                MixedStatus::Ran {
                    examined,
                    skipped_multilinear,
                    inconsistent,
                    degenerate,
                } => {
                    let _ = writeln!(
                        out,
                        "  supports up to {}: {examined} solved, {inconsistent} without solution, \
                         {degenerate} degenerate, {skipped_multilinear} with three or more mixers skipped",
                        s.max_support
                    );
                }
                MixedStatus::Skipped { reason } => {
                    let _ = writeln!(out, "  mixed search skipped ({reason}); pure profiles only");
                }
            }
            if s.refined {
                let _ = writeln!(out, "  found by replicator dynamics");
            }
            write_equilibria(&mut out, m, &r.game.players, tol);
        }
    }

    if !r.nesting.is_empty() {
        let _ = writeln!(out, "\nnesting");
        for n in &r.nesting {
            let _ = writeln!(out, "  K={} in K={}", n.k_small, n.k_large);
            for (name, c) in [
                ("partitions", &n.partitions),
                ("strategies", &n.strategies),
                ("payoffs", &n.payoffs),
                ("rule", &n.rule),
            ] {
                write_check(&mut out, name, c);
            }
        }
    }
    if !r.diffs.is_empty() {
        let _ = writeln!(out, "\nchanges across K");
        for d in &r.diffs {
            let _ = writeln!(
                out,
                "  K={} -> K={}: {} -> {} equilibria, partitions gained [{}], lost [{}]",
                d.from_k,
                d.to_k,
                d.equilibria_before,
                d.equilibria_after,
                d.partitions_gained.join(" "),
                d.partitions_lost.join(" ")
            );
        }
    }
    if !r.notes.is_empty() {
        let _ = writeln!(out, "\nnotes");
        for n in &r.notes {
            let _ = writeln!(out, "  {n}");
        }
    }
    out
}

fn write_check(out: &mut String, name: &str, c: &Check) {
    let status = if c.passed { "pass" } else { "FAIL" };
    match &c.counterexample {
        Some(why) => {
            let _ = writeln!(out, "    {name}: {status} ({why})");
        }
        None => {
            let _ = writeln!(out, "    {name}: {status}");
        }
    }
}

fn write_equilibria(out: &mut String, m: &Member, players: &[PlayerEntry], tol: f64) {
    let strict = m.equilibria.iter().filter(|e| e.mode == "strict").count();
    let mut groups: BTreeMap<(String, String, String), Vec<&EquilibriumEntry>> = BTreeMap::new();
    let mut order = Vec::new();
    for e in &m.equilibria {
        let key = (
            distribution(e, players, tol),
            vector(&e.payoffs, tol),
            e.mode.clone(),
        );
        let slot = groups.entry(key.clone()).or_default();
        if slot.is_empty() {
            order.push(key);
        }
        slot.push(e);
    }
    let _ = writeln!(
        out,
        "  equilibria {} (strict {strict}), outcome groups {}",
        m.equilibria.len(),
        order.len()
    );
    for key in order {
        let members = &groups[&key];
        let (dist, payoffs, mode) = &key;
        let _ = writeln!(
            out,
            "  {dist}  payoffs {payoffs}  {mode} x{}",
            members.len()
        );
        for e in members.iter().take(EXAMPLES_PER_GROUP) {
            let regret = if e.max_regret > 0.0 {
                format!("  regret {:.1e}", e.max_regret)
            } else {
                String::new()
            };
            let _ = writeln!(out, "      {}{regret}", profile_text(e, tol));
        }
        if members.len() > EXAMPLES_PER_GROUP {
            let _ = writeln!(out, "      ... {} more", members.len() - EXAMPLES_PER_GROUP);
        }
    }
}
