//! Equilibrium computation for `Γ(K)`.
//!
//! Expected utilities are computed two ways, directly over `S(K)` and as a
//! sum over the induced domains `S(P)`, and the two must agree. Best responses
//! are checked against pure deviations only, which suffices in finite games.
//!
//! Mixed equilibria are found by support enumeration. For a support
//! combination in which at most two players mix, the indifference conditions
//! are linear in the other mixer's probabilities and are solved directly.
//! Combinations with three or more mixing players lead to multilinear systems;
//! they are counted and skipped, and [`Solver::replicator_refine`] is the
//! numeric fallback. When an indifference system is underdetermined (a
//! continuum of equilibria) a few sample points of the solution set are
//! validated and flagged as `degenerate`.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::game::{Game, StrategyProfile};
use crate::linalg::{project, solve_affine, Affine};
use crate::partition::{Partition, PlayerId};

/// Maximum gap between the two expected-utility formulas.
pub const EU_AGREEMENT_TOL: f64 = 1e-10;
/// Per-coordinate distance under which two equilibria are the same point.
pub const DEDUP_TOL: f64 = 1e-6;
/// In-support probabilities must exceed this, otherwise the point belongs to
/// a smaller support.
const SUPPORT_FLOOR: f64 = 1e-9;
const SIMPLEX_TOL: f64 = 1e-12;
const REFINE_STEPS: usize = 5_000;
const REFINE_STEP_SIZE: f64 = 0.5;

/// Probabilities over one player's strategy list.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedStrategy(Vec<f64>);

#[allow(clippy::len_without_is_empty)] // never empty
impl MixedStrategy {
    /// Normalizes nonnegative finite weights with a positive sum.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMixedStrategy("no strategies".to_string()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidMixedStrategy(format!(
                "weights must be finite and nonnegative: {weights:?}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidMixedStrategy(
                "weights sum to zero".to_string(),
            ));
        }
        let mut p: Vec<f64> = weights.into_iter().map(|w| w / total).collect();
        debug_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        // absorb rounding so the vector sums to one within SIMPLEX_TOL
        let drift = 1.0 - p.iter().sum::<f64>();
        if drift.abs() > SIMPLEX_TOL {
            if let Some(m) = p.iter_mut().max_by(|a, b| a.total_cmp(b)) {
                *m += drift;
            }
        }
        Ok(MixedStrategy(p))
    }

    pub fn pure(count: usize, index: usize) -> Self {
        assert!(index < count);
        let mut p = vec![0.0; count];
        p[index] = 1.0;
        MixedStrategy(p)
    }

    pub fn uniform(count: usize) -> Self {
        assert!(count > 0);
        MixedStrategy(vec![1.0 / count as f64; count])
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&s| self.0[s] > 0.0).collect()
    }
}

/// One mixed strategy per player.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedProfile(Vec<MixedStrategy>);

impl MixedProfile {
    pub fn new(strategies: Vec<MixedStrategy>) -> Self {
        MixedProfile(strategies)
    }

    pub fn pure(game: &Game, profile: &StrategyProfile) -> Result<Self> {
        game.check_profile(profile)?;
        Ok(MixedProfile(
            game.strategy_counts()
                .into_iter()
                .zip(&profile.0)
                .map(|(c, &s)| MixedStrategy::pure(c, s))
                .collect(),
        ))
    }

    pub fn uniform(game: &Game) -> Self {
        MixedProfile(
            game.strategy_counts()
                .into_iter()
                .map(MixedStrategy::uniform)
                .collect(),
        )
    }

    pub fn strategies(&self) -> &[MixedStrategy] {
        &self.0
    }

    pub fn player(&self, i: PlayerId) -> &MixedStrategy {
        &self.0[i.0]
    }

    /// The pure profile if every player is degenerate.
    pub fn as_pure(&self) -> Option<StrategyProfile> {
        self.0
            .iter()
            .map(|m| match m.support().as_slice() {
                [s] => Some(*s),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(StrategyProfile)
    }

    /// Largest per-coordinate distance; `None` if shapes differ.
    pub fn distance(&self, other: &MixedProfile) -> Option<f64> {
        if self.0.len() != other.0.len() {
            return None;
        }
        let mut d = 0.0f64;
        for (a, b) in self.0.iter().zip(&other.0) {
            if a.len() != b.len() {
                return None;
            }
            for (x, y) in a.0.iter().zip(&b.0) {
                d = d.max((x - y).abs());
            }
        }
        Some(d)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Mode {
    /// No pure deviation improves by more than the tolerance.
    #[default]
    Weak,
    /// Weak, and every pure strategy outside the support loses by more than
    /// the tolerance.
    Strict,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Weak => "weak",
            Mode::Strict => "strict",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquilibriumCheck {
    pub weak: bool,
    pub strict: bool,
    /// Largest gain any player gets from a pure deviation.
    pub max_regret: f64,
}

impl EquilibriumCheck {
    pub fn holds(&self, mode: Mode) -> bool {
        match mode {
            Mode::Weak => self.weak,
            Mode::Strict => self.strict,
        }
    }

    pub fn strongest(&self) -> Option<Mode> {
        if self.strict {
            Some(Mode::Strict)
        } else if self.weak {
            Some(Mode::Weak)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumResult {
    pub profile: MixedProfile,
    /// The strongest mode the profile satisfies.
    pub mode: Mode,
    pub payoffs: Vec<f64>,
    /// Pushforward of the profile through the formation rule, in family order.
    pub partition_distribution: Vec<(Partition, f64)>,
    pub max_regret: f64,
    /// Sample point of a continuum of equilibria on the same support.
    pub degenerate: bool,
}

impl EquilibriumResult {
    pub fn partitions(&self) -> impl Iterator<Item = &Partition> {
        self.partition_distribution.iter().map(|(p, _)| p)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    /// Cap on profiles (pure enumeration, payoff tabulation) and on support
    /// combinations (support enumeration).
    pub budget: u128,
    pub max_support: usize,
    /// Use the rayon pool when the `parallel` feature is enabled.
    pub parallel: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-9,
            budget: 1_000_000,
            max_support: 2,
            parallel: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupportEnumeration {
    pub equilibria: Vec<EquilibriumResult>,
    /// Support combinations solved.
    pub examined: u128,
    /// Combinations with three or more mixing players.
    pub skipped_multilinear: u128,
    /// Combinations whose indifference system had no solution.
    pub inconsistent: u128,
    /// Combinations whose indifference system had a continuum of solutions.
    pub degenerate: u128,
}

/// What happened to the mixed search inside [`Solver::solve`].
#[derive(Clone, Debug, PartialEq)]
pub enum MixedSearch {
    /// `max_support` was 1.
    NotRequested,
    Ran {
        examined: u128,
        skipped_multilinear: u128,
        inconsistent: u128,
        degenerate: u128,
    },
    /// Support enumeration did not fit; the pure results stand alone.
    Skipped(Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub equilibria: Vec<EquilibriumResult>,
    pub mixed: MixedSearch,
    /// Set when nothing was found by enumeration and replicator dynamics
    /// produced a validated profile.
    pub refined: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Refinement {
    pub profile: MixedProfile,
    pub max_regret: f64,
}

struct Table {
    strides: Vec<usize>,
    realized: Vec<u32>,
    payoffs: Vec<f64>,
}

/// Equilibrium computations over one game. Payoffs are tabulated up front
/// when the profile count fits in the budget.
pub struct Solver<'g> {
    game: &'g Game,
    config: SolverConfig,
    counts: Vec<usize>,
    table: Option<Table>,
}

impl<'g> Solver<'g> {
    pub fn new(game: &'g Game, config: SolverConfig) -> Result<Self> {
        if config.tol.is_nan() || config.tol <= 0.0 || config.tol.is_infinite() {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                config.tol
            )));
        }
        let counts = game.strategy_counts();
        let total = game.profile_count();
        let table = (total <= config.budget).then(|| tabulate(game, &counts));
        Ok(Solver {
            game,
            config,
            counts,
            table,
        })
    }

    pub fn game(&self) -> &'g Game {
        self.game
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn cell<R>(&self, profile: &[usize], f: impl FnOnce(usize, &[f64]) -> R) -> R {
        let n = self.game.n();
        match &self.table {
            Some(t) => {
                let idx: usize = profile.iter().zip(&t.strides).map(|(s, w)| s * w).sum();
                f(t.realized[idx] as usize, &t.payoffs[idx * n..(idx + 1) * n])
            }
            None => {
                let realized = self
                    .game
                    .apply_formation_rule(&StrategyProfile(profile.to_vec()));
                let pidx = self.game.family().index_of(&realized).unwrap_or(usize::MAX);
                f(pidx, &self.game.payoff_in(&realized, profile))
            }
        }
    }

    fn payoff_of(&self, profile: &[usize], i: usize) -> f64 {
        self.cell(profile, |_, u| u[i])
    }

    fn check_shape(&self, sigma: &MixedProfile) -> Result<()> {
        if sigma.0.len() != self.counts.len()
            || sigma.0.iter().zip(&self.counts).any(|(m, &c)| m.len() != c)
        {
            return Err(Error::InvalidMixedStrategy(format!(
                "profile shape does not match strategy counts {:?}",
                self.counts
            )));
        }
        Ok(())
    }

    /// `EU_i` directly over `S(K)`: `Σ_s U_i(s) Π_j σ_j(s_j)`.
    pub fn expected_utility_direct(&self, sigma: &MixedProfile, i: PlayerId) -> Result<f64> {
        self.check_shape(sigma)?;
        let supports: Vec<Vec<usize>> = sigma.0.iter().map(MixedStrategy::support).collect();
        let mut total = 0.0;
        for_each_product(&supports, |s| {
            let w = weight(sigma, s, usize::MAX);
            total += w * self.payoff_of(s, i.0);
        });
        Ok(total)
    }

    /// `EU_i` as a sum over partitions of the integrals restricted to `S(P)`.
    pub fn expected_utility_by_partition(&self, sigma: &MixedProfile, i: PlayerId) -> Result<f64> {
        self.check_shape(sigma)?;
        let supports: Vec<Vec<usize>> = sigma.0.iter().map(MixedStrategy::support).collect();
        let mut by_partition = vec![0.0; self.game.family().len()];
        let mut outside = false;
        for_each_product(&supports, |s| {
            let w = weight(sigma, s, usize::MAX);
            self.cell(s, |p, u| match by_partition.get_mut(p) {
                Some(acc) => *acc += w * u[i.0],
                None => outside = true,
            });
        });
        if outside {
            // mass outside P(K) is lost from the decomposition
            return Ok(f64::NAN);
        }
        Ok(by_partition.iter().sum())
    }

    /// Expected utility of player `i`; both formulas must agree within
    /// [`EU_AGREEMENT_TOL`].
    pub fn expected_utility(&self, sigma: &MixedProfile, i: PlayerId) -> Result<f64> {
        let direct = self.expected_utility_direct(sigma, i)?;
        let by_partition = self.expected_utility_by_partition(sigma, i)?;
        // false for NaN, which counts as disagreement
        let agree = (direct - by_partition).abs() <= EU_AGREEMENT_TOL;
        if !agree {
            return Err(Error::Inconsistent {
                player: i.0,
                direct,
                by_partition,
            });
        }
        Ok(direct)
    }

    pub fn expected_payoffs(&self, sigma: &MixedProfile) -> Result<Vec<f64>> {
        self.check_shape(sigma)?;
        let supports: Vec<Vec<usize>> = sigma.0.iter().map(MixedStrategy::support).collect();
        let mut total = vec![0.0; self.game.n()];
        for_each_product(&supports, |s| {
            let w = weight(sigma, s, usize::MAX);
            self.cell(s, |_, u| {
                for (t, x) in total.iter_mut().zip(u) {
                    *t += w * x;
                }
            });
        });
        Ok(total)
    }

    /// Expected payoff of each pure strategy of `i` against `σ_{-i}`.
    fn deviation_values(&self, sigma: &MixedProfile, i: usize) -> Vec<f64> {
        let mut lists: Vec<Vec<usize>> = sigma.0.iter().map(MixedStrategy::support).collect();
        lists[i] = (0..self.counts[i]).collect();
        let mut vals = vec![0.0; self.counts[i]];
        for_each_product(&lists, |s| {
            let w = weight(sigma, s, i);
            vals[s[i]] += w * self.payoff_of(s, i);
        });
        vals
    }

    fn check_inner(
        &self,
        sigma: &MixedProfile,
        tol: f64,
        stop_on_failure: bool,
    ) -> EquilibriumCheck {
        let mut weak = true;
        let mut strict = true;
        let mut max_regret = 0.0f64;
        for i in 0..self.counts.len() {
            let vals = self.deviation_values(sigma, i);
            let probs = &sigma.0[i].0;
            let current: f64 = probs.iter().zip(&vals).map(|(p, v)| p * v).sum();
            let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let regret = (best - current).max(0.0);
            max_regret = max_regret.max(regret);
            if regret > tol {
                weak = false;
                strict = false;
                if stop_on_failure {
                    break;
                }
            }
            if vals
                .iter()
                .zip(probs)
                .any(|(v, p)| *p == 0.0 && *v >= current - tol)
            {
                strict = false;
            }
        }
        EquilibriumCheck {
            weak,
            strict,
            max_regret,
        }
    }

    /// Checks `σ` against every pure deviation of every player, reporting
    /// both modes.
    pub fn check(&self, sigma: &MixedProfile, tol: f64) -> Result<EquilibriumCheck> {
        self.check_shape(sigma)?;
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        Ok(self.check_inner(sigma, tol, false))
    }

    /// Whether `σ` is an equilibrium in `mode`, with the largest gain any
    /// pure deviation achieves.
    pub fn is_equilibrium(
        &self,
        sigma: &MixedProfile,
        mode: Mode,
        tol: f64,
    ) -> Result<(bool, f64)> {
        let c = self.check(sigma, tol)?;
        Ok((c.holds(mode), c.max_regret))
    }

    /// Distribution of realized partitions under the product measure of `σ`,
    /// in family order, positive entries only.
    pub fn equilibrium_partitions(&self, sigma: &MixedProfile) -> Result<Vec<(Partition, f64)>> {
        self.check_shape(sigma)?;
        let supports: Vec<Vec<usize>> = sigma.0.iter().map(MixedStrategy::support).collect();
        let family = self.game.family();
        let mut mass = vec![0.0; family.len()];
        for_each_product(&supports, |s| {
            let w = weight(sigma, s, usize::MAX);
            self.cell(s, |p, _| {
                if let Some(m) = mass.get_mut(p) {
                    *m += w;
                }
            });
        });
        Ok(family
            .iter()
            .zip(mass)
            .filter(|(_, m)| *m > 0.0)
            .map(|(p, m)| (p.clone(), m))
            .collect())
    }

    fn result(
        &self,
        sigma: MixedProfile,
        check: EquilibriumCheck,
        degenerate: bool,
    ) -> Result<EquilibriumResult> {
        let payoffs = self.expected_payoffs(&sigma)?;
        let partition_distribution = self.equilibrium_partitions(&sigma)?;
        Ok(EquilibriumResult {
            profile: sigma,
            mode: check.strongest().unwrap_or(Mode::Weak),
            payoffs,
            partition_distribution,
            max_regret: check.max_regret,
            degenerate,
        })
    }

    /// Wraps an already validated profile into a result; `None` if it fails
    /// the weak check at the configured tolerance.
    pub fn evaluate(&self, sigma: MixedProfile) -> Result<Option<EquilibriumResult>> {
        let check = self.check(&sigma, self.config.tol)?;
        if !check.weak {
            return Ok(None);
        }
        self.result(sigma, check, false).map(Some)
    }

    fn pure_check(&self, profile: &mut [usize]) -> EquilibriumCheck {
        let tol = self.config.tol;
        let mut max_regret = 0.0f64;
        let mut strict = true;
        for i in 0..profile.len() {
            let own = profile[i];
            let base = self.payoff_of(profile, i);
            let mut best_alt = f64::NEG_INFINITY;
            for s in 0..self.counts[i] {
                if s != own {
                    profile[i] = s;
                    best_alt = best_alt.max(self.payoff_of(profile, i));
                }
            }
            profile[i] = own;
            max_regret = max_regret.max(best_alt - base);
            if best_alt >= base - tol {
                strict = false;
            }
        }
        let weak = max_regret <= tol;
        EquilibriumCheck {
            weak,
            strict: weak && strict,
            max_regret,
        }
    }

    /// Every pure profile satisfying `mode`, in profile order.
    pub fn enumerate_pure_equilibria(&self, mode: Mode) -> Result<Vec<EquilibriumResult>> {
        let required = self.game.profile_count();
        if required > self.config.budget {
            return Err(Error::TooLarge {
                what: "pure equilibrium enumeration",
                required,
                budget: self.config.budget,
            });
        }
        let hits = self.map_indices(required as usize, |idx| {
            let mut profile = decode(idx, &self.counts);
            let check = self.pure_check(&mut profile);
            check.holds(mode).then_some((profile, check))
        });
        hits.into_iter()
            .map(|(profile, check)| {
                let sigma = MixedProfile(
                    profile
                        .iter()
                        .zip(&self.counts)
                        .map(|(&s, &c)| MixedStrategy::pure(c, s))
                        .collect(),
                );
                self.result(sigma, check, false)
            })
            .collect()
    }

    /// Support enumeration over supports of size `1..=max_support`.
    pub fn support_enumeration(&self, max_support: usize) -> Result<SupportEnumeration> {
        if max_support == 0 {
            return Err(Error::InvalidParameter(
                "max_support must be at least 1".to_string(),
            ));
        }
        let n = self.counts.len();
        let supports: Vec<Vec<Vec<usize>>> = self
            .counts
            .iter()
            .map(|&c| subsets_up_to(c, max_support))
            .collect();
        let pure_len: Vec<u128> = self.counts.iter().map(|&c| c as u128).collect();
        let mixed_len: Vec<u128> = supports
            .iter()
            .zip(&pure_len)
            .map(|(s, p)| s.len() as u128 - p)
            .collect();

        // classes by the set of mixing players, at most two of them
        let mut classes: Vec<(Vec<usize>, u128)> = Vec::new();
        let class_size = |mixers: &[usize]| -> u128 {
            (0..n)
                .map(|i| {
                    if mixers.contains(&i) {
                        mixed_len[i]
                    } else {
                        pure_len[i]
                    }
                })
                .fold(1u128, |a, b| a.saturating_mul(b))
        };
        classes.push((Vec::new(), class_size(&[])));
        for a in 0..n {
            classes.push((vec![a], class_size(&[a])));
        }
        for a in 0..n {
            for b in a + 1..n {
                classes.push((vec![a, b], class_size(&[a, b])));
            }
        }
        classes.retain(|(_, size)| *size > 0);
        let examined: u128 = classes.iter().map(|c| c.1).fold(0, u128::saturating_add);
        let total: u128 = supports
            .iter()
            .map(|s| s.len() as u128)
            .fold(1u128, |a, b| a.saturating_mul(b));
        if examined > self.config.budget {
            return Err(Error::TooLarge {
                what: "support enumeration",
                required: examined,
                budget: self.config.budget,
            });
        }

        let mut offsets = Vec::with_capacity(classes.len());
        let mut acc = 0usize;
        for (_, size) in &classes {
            offsets.push(acc);
            acc += *size as usize;
        }

        let per_combo = self.map_indices(examined as usize, |idx| {
            let c = offsets.partition_point(|&o| o <= idx) - 1;
            let (mixers, _) = &classes[c];
            let radices: Vec<usize> = (0..n)
                .map(|i| {
                    if mixers.contains(&i) {
                        mixed_len[i] as usize
                    } else {
                        pure_len[i] as usize
                    }
                })
                .collect();
            let local = decode(idx - offsets[c], &radices);
            let key: Vec<usize> = (0..n)
                .map(|i| {
                    if mixers.contains(&i) {
                        local[i] + self.counts[i]
                    } else {
                        local[i]
                    }
                })
                .collect();
            let chosen: Vec<&[usize]> = (0..n).map(|i| supports[i][key[i]].as_slice()).collect();
            Some((key, self.solve_combo(&chosen, mixers)))
        });

        let mut out = SupportEnumeration {
            equilibria: Vec::new(),
            examined,
            skipped_multilinear: total - examined,
            inconsistent: 0,
            degenerate: 0,
        };
        let mut keyed = Vec::new();
        for (key, outcome) in per_combo {
            match outcome {
                ComboOutcome::Inconsistent => out.inconsistent += 1,
                ComboOutcome::Solved { found, degenerate } => {
                    if degenerate {
                        out.degenerate += 1;
                    }
                    for (sigma, check) in found {
                        keyed.push((key.clone(), sigma, check, degenerate));
                    }
                }
            }
        }
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        for (_, sigma, check, degenerate) in keyed {
            out.equilibria.push(self.result(sigma, check, degenerate)?);
        }
        Ok(out)
    }

    /// Pure enumeration, then support enumeration up to
    /// `config.max_support` when it fits in the budget, then replicator
    /// dynamics from the uniform profile if nothing has been found. Only
    /// results holding in `mode` are kept.
    pub fn solve(&self, mode: Mode) -> Result<Solution> {
        let pure = self.enumerate_pure_equilibria(mode)?;
        let (mut equilibria, mixed) = if self.config.max_support <= 1 {
            (pure, MixedSearch::NotRequested)
        } else {
            match self.support_enumeration(self.config.max_support) {
                Ok(found) => {
                    let mixed = MixedSearch::Ran {
                        examined: found.examined,
                        skipped_multilinear: found.skipped_multilinear,
                        inconsistent: found.inconsistent,
                        degenerate: found.degenerate,
                    };
                    let kept = found
                        .equilibria
                        .into_iter()
                        .filter(|e| mode == Mode::Weak || e.mode == Mode::Strict)
                        .collect();
                    (kept, mixed)
                }
                Err(e @ Error::TooLarge { .. }) => (pure, MixedSearch::Skipped(e)),
                Err(e) => return Err(e),
            }
        };
        let mut refined = false;
        if equilibria.is_empty() {
            let start = MixedProfile::uniform(self.game);
            let out = self.replicator_refine(&start, REFINE_STEPS, REFINE_STEP_SIZE)?;
            if let Some(e) = self.evaluate(out.profile)? {
                if e.mode == Mode::Strict || mode == Mode::Weak {
                    equilibria.push(e);
                    refined = true;
                }
            }
        }
        Ok(Solution {
            equilibria,
            mixed,
            refined,
        })
    }

    /// Solves a single support combination, given as strategy indices per
    /// player. At most two players may mix.
    pub fn solve_support(&self, supports: &[Vec<usize>]) -> Result<Vec<EquilibriumResult>> {
        if supports.len() != self.counts.len() {
            return Err(Error::InvalidParameter(format!(
                "{} supports for {} players",
                supports.len(),
                self.counts.len()
            )));
        }
        for (i, s) in supports.iter().enumerate() {
            if s.is_empty()
                || s.windows(2).any(|w| w[0] >= w[1])
                || s.iter().any(|&x| x >= self.counts[i])
            {
                return Err(Error::InvalidParameter(format!(
                    "support {s:?} of player {i} must be nonempty, increasing, and below {}",
                    self.counts[i]
                )));
            }
        }
        let mixers: Vec<usize> = (0..supports.len())
            .filter(|&i| supports[i].len() > 1)
            .collect();
        if mixers.len() > 2 {
            return Err(Error::InvalidParameter(
                "supports with more than two mixing players are not solved".to_string(),
            ));
        }
        let chosen: Vec<&[usize]> = supports.iter().map(Vec::as_slice).collect();
        match self.solve_combo(&chosen, &mixers) {
            ComboOutcome::Inconsistent => Ok(Vec::new()),
            ComboOutcome::Solved { found, degenerate } => found
                .into_iter()
                .map(|(sigma, check)| self.result(sigma, check, degenerate))
                .collect(),
        }
    }

    fn solve_combo(&self, chosen: &[&[usize]], mixers: &[usize]) -> ComboOutcome {
        let n = chosen.len();
        let mut degenerate = false;
        let mut candidates: Vec<Vec<Vec<f64>>> = chosen.iter().map(|_| vec![vec![1.0]]).collect();
        for &j in mixers {
            let supp_j = chosen[j];
            let mut rows = Vec::new();
            let mut rhs = Vec::new();
            if let Some(&a) = mixers.iter().find(|&&a| a != j) {
                let supp_a = chosen[a];
                let mut base: Vec<usize> = chosen.iter().map(|s| s[0]).collect();
                let mut value = |s: usize, t: usize| {
                    base[a] = s;
                    base[j] = t;
                    self.payoff_of(&base, a)
                };
                for &s in &supp_a[1..] {
                    let row: Vec<f64> = supp_j
                        .iter()
                        .map(|&t| value(s, t) - value(supp_a[0], t))
                        .collect();
                    rows.push(row);
                    rhs.push(0.0);
                }
            }
            rows.push(vec![1.0; supp_j.len()]);
            rhs.push(1.0);
            let points = match solve_affine(rows, rhs, supp_j.len()) {
                Affine::Inconsistent => return ComboOutcome::Inconsistent,
                Affine::Unique(x) => vec![x],
                Affine::Family { rows, rhs } => {
                    degenerate = true;
                    sample_family(&rows, &rhs, supp_j.len())
                }
            };
            let points: Vec<Vec<f64>> = points
                .into_iter()
                .filter(|x| x.iter().all(|&v| v > SUPPORT_FLOOR))
                .collect();
            if points.is_empty() {
                return ComboOutcome::Solved {
                    found: Vec::new(),
                    degenerate,
                };
            }
            candidates[j] = points;
        }

        let radices: Vec<usize> = candidates.iter().map(Vec::len).collect();
        let mut found: Vec<(MixedProfile, EquilibriumCheck)> = Vec::new();
        for pick in crate::game::ProfileIter::new(radices) {
            let sigma = MixedProfile(
                (0..n)
                    .map(|i| {
                        let mut full = vec![0.0; self.counts[i]];
                        for (&s, &p) in chosen[i].iter().zip(&candidates[i][pick[i]]) {
                            full[s] = p;
                        }
                        MixedStrategy::new(full).expect("candidate lies on the simplex")
                    })
                    .collect(),
            );
            let check = self.check_inner(&sigma, self.config.tol, true);
            if !check.weak {
                continue;
            }
            if found
                .iter()
                .any(|(f, _)| f.distance(&sigma).is_some_and(|d| d <= DEDUP_TOL))
            {
                continue;
            }
            found.push((sigma, check));
        }
        ComboOutcome::Solved { found, degenerate }
    }

    /// Multi-population discrete replicator dynamics from `start`. Payoffs
    /// are shifted per player to be positive; no convergence is promised.
    pub fn replicator_refine(
        &self,
        start: &MixedProfile,
        steps: usize,
        step_size: f64,
    ) -> Result<Refinement> {
        self.check_shape(start)?;
        if steps == 0 {
            return Err(Error::InvalidParameter(
                "steps must be at least 1".to_string(),
            ));
        }
        if !(step_size > 0.0 && step_size <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "step size must be in (0, 1], got {step_size}"
            )));
        }
        let mut sigma = start.clone();
        for _ in 0..steps {
            let values: Vec<Vec<f64>> = (0..self.counts.len())
                .map(|i| self.deviation_values(&sigma, i))
                .collect();
            let next = sigma
                .0
                .iter()
                .zip(&values)
                .map(|(m, vals)| {
                    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                    let shift = 1.0 - lo;
                    let mean: f64 = m.0.iter().zip(vals).map(|(p, v)| p * v).sum();
                    let w: Vec<f64> =
                        m.0.iter()
                            .zip(vals)
                            .map(|(p, v)| {
                                p * ((1.0 - step_size) + step_size * (v + shift) / (mean + shift))
                            })
                            .collect();
                    MixedStrategy::new(w)
                })
                .collect::<Result<Vec<_>>>()?;
            sigma = MixedProfile(next);
        }
        let max_regret = self.check_inner(&sigma, self.config.tol, false).max_regret;
        Ok(Refinement {
            profile: sigma,
            max_regret,
        })
    }

    #[cfg(feature = "parallel")]
    fn map_indices<T: Send>(
        &self,
        count: usize,
        f: impl Fn(usize) -> Option<T> + Sync + Send,
    ) -> Vec<T> {
        if self.config.parallel {
            use rayon::prelude::*;
            (0..count).into_par_iter().filter_map(f).collect()
        } else {
            (0..count).filter_map(f).collect()
        }
    }

    #[cfg(not(feature = "parallel"))]
    fn map_indices<T>(&self, count: usize, f: impl Fn(usize) -> Option<T>) -> Vec<T> {
        (0..count).filter_map(f).collect()
    }
}

enum ComboOutcome {
    Inconsistent,
    Solved {
        found: Vec<(MixedProfile, EquilibriumCheck)>,
        degenerate: bool,
    },
}

fn tabulate(game: &Game, counts: &[usize]) -> Table {
    let n = counts.len();
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * counts[i + 1];
    }
    let total = game.profile_count() as usize;
    let mut realized = Vec::with_capacity(total);
    let mut payoffs = Vec::with_capacity(total * n);
    for s in game.profiles() {
        let profile = StrategyProfile(s);
        let p = game.apply_formation_rule(&profile);
        realized.push(game.family().index_of(&p).map_or(u32::MAX, |x| x as u32));
        payoffs.extend(game.payoff_in(&p, &profile.0));
    }
    Table {
        strides,
        realized,
        payoffs,
    }
}

fn decode(mut idx: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for pos in (0..radices.len()).rev() {
        out[pos] = idx % radices[pos];
        idx /= radices[pos];
    }
    out
}

fn weight(sigma: &MixedProfile, s: &[usize], skip: usize) -> f64 {
    s.iter()
        .enumerate()
        .filter(|(j, _)| *j != skip)
        .map(|(j, &x)| sigma.0[j].0[x])
        .product()
}

fn for_each_product(lists: &[Vec<usize>], mut f: impl FnMut(&[usize])) {
    if lists.iter().any(Vec::is_empty) {
        return;
    }
    let mut pos = vec![0usize; lists.len()];
    let mut current: Vec<usize> = lists.iter().map(|l| l[0]).collect();
    loop {
        f(&current);
        let mut k = lists.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            pos[k] += 1;
            if pos[k] < lists[k].len() {
                current[k] = lists[k][pos[k]];
                break;
            }
            pos[k] = 0;
            current[k] = lists[k][0];
        }
    }
}

/// Subsets of `0..count` with sizes `1..=max`, by size then lexicographically.
fn subsets_up_to(count: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 1..=max.min(count) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.clone());
            let mut k = size;
            let advanced = loop {
                if k == 0 {
                    break false;
                }
                k -= 1;
                if idx[k] < count - size + k {
                    idx[k] += 1;
                    for t in k + 1..size {
                        idx[t] = idx[t - 1] + 1;
                    }
                    break true;
                }
            };
            if !advanced {
                break;
            }
        }
    }
    out
}

/// Points of an affine solution set: projections of the simplex barycenter
/// and of the midpoints between it and each vertex.
fn sample_family(rows: &[Vec<f64>], rhs: &[f64], dim: usize) -> Vec<Vec<f64>> {
    let bary = vec![1.0 / dim as f64; dim];
    let mut seeds = vec![bary.clone()];
    for v in 0..dim {
        let mut mid: Vec<f64> = bary.iter().map(|b| b / 2.0).collect();
        mid[v] += 0.5;
        seeds.push(mid);
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    for seed in seeds {
        if let Some(x) = project(rows, rhs, &seed) {
            if !out
                .iter()
                .any(|y| y.iter().zip(&x).all(|(a, b)| (a - b).abs() <= DEDUP_TOL))
            {
                out.push(x);
            }
        }
    }
    out
}
