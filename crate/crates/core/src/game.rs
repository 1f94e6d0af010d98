//! The game `Γ(K)`: strategy sets over `P(K)`, the formation rule, and
//! partition-specific payoffs.
//!
//! A strategy is a `(desired partition, action)` pair. The formation rule
//! maps the announced partitions of all players to one realized partition,
//! and the payoff of a profile is looked up by the realized partition and the
//! labels of the chosen actions.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::partition::{
    enumerate_partitions_with_limit, Coalition, Partition, PartitionFamily, PlayerId,
    DEFAULT_PLAYER_LIMIT,
};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    /// Position within the player's action set for the announced partition.
    pub id: usize,
    pub label: String,
}

/// One element of `S_i(K)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartitionStrategy {
    pub desired: Partition,
    pub action: Action,
}

impl fmt::Display for PartitionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.action.label.is_empty() {
            write!(f, "[{}]", self.desired)
        } else {
            write!(f, "{}[{}]", self.action.label, self.desired)
        }
    }
}

/// Per-player indices into the players' strategy lists.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StrategyProfile(pub Vec<usize>);

impl StrategyProfile {
    pub fn choices<'g>(&self, game: &'g Game) -> Vec<&'g PartitionStrategy> {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &s)| &game.strategies[i][s])
            .collect()
    }
}

/// Action labels available to each player, either shared across partitions
/// or overridden for specific `(player, partition)` pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ActionSets {
    shared: Option<Vec<Vec<String>>>,
    per_partition: BTreeMap<(usize, Partition), Vec<String>>,
}

impl ActionSets {
    /// Every player has the same labels in every partition.
    pub fn shared<S: AsRef<str>>(n: usize, labels: &[S]) -> Self {
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        ActionSets {
            shared: Some(vec![labels; n]),
            per_partition: BTreeMap::new(),
        }
    }

    /// One unnamed action per player; the game is purely about partitions.
    pub fn trivial(n: usize) -> Self {
        Self::shared(n, &[""])
    }

    pub fn per_player(labels: Vec<Vec<String>>) -> Self {
        ActionSets {
            shared: Some(labels),
            per_partition: BTreeMap::new(),
        }
    }

    /// No shared sets; every `(player, partition)` must be given explicitly.
    pub fn explicit() -> Self {
        Self::default()
    }

    pub fn set(&mut self, player: usize, partition: Partition, labels: Vec<String>) {
        self.per_partition.insert((player, partition), labels);
    }

    pub fn labels_for(&self, player: usize, partition: &Partition) -> Option<&[String]> {
        self.per_partition
            .get(&(player, partition.clone()))
            .map(Vec::as_slice)
            .or_else(|| {
                self.shared
                    .as_ref()
                    .and_then(|s| s.get(player))
                    .map(Vec::as_slice)
            })
    }

    pub fn shared_labels(&self) -> Option<&[Vec<String>]> {
        self.shared.as_deref()
    }

    pub fn overrides(&self) -> impl Iterator<Item = (usize, &Partition, &[String])> {
        self.per_partition
            .iter()
            .map(|((i, p), l)| (*i, p, l.as_slice()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PayoffKey {
    pub partition: Partition,
    pub actions: Vec<String>,
}

/// Payoff vectors keyed by realized partition and action labels, with a
/// default vector for every key not listed.
#[derive(Clone, Debug, PartialEq)]
pub struct PayoffTable {
    n: usize,
    entries: BTreeMap<PayoffKey, Vec<f64>>,
    default: Vec<f64>,
}

impl PayoffTable {
    /// An empty table with an all-zero default.
    pub fn new(n: usize) -> Self {
        PayoffTable {
            n,
            entries: BTreeMap::new(),
            default: vec![0.0; n],
        }
    }

    pub fn with_default(n: usize, default: Vec<f64>) -> Result<Self> {
        check_vector(n, &default, "default payoff")?;
        Ok(PayoffTable {
            n,
            entries: BTreeMap::new(),
            default,
        })
    }

    pub fn insert(
        &mut self,
        partition: Partition,
        actions: Vec<String>,
        values: Vec<f64>,
    ) -> Result<()> {
        if partition.n() != self.n {
            return Err(Error::InvalidPayoff(format!(
                "partition {partition} is over {} players, table has {}",
                partition.n(),
                self.n
            )));
        }
        if actions.len() != self.n {
            return Err(Error::InvalidPayoff(format!(
                "entry for {partition} lists {} actions for {} players",
                actions.len(),
                self.n
            )));
        }
        check_vector(self.n, &values, &format!("payoff for {partition}"))?;
        self.entries
            .insert(PayoffKey { partition, actions }, values);
        Ok(())
    }

    pub fn get<S: AsRef<str>>(&self, partition: &Partition, actions: &[S]) -> &[f64] {
        let key = PayoffKey {
            partition: partition.clone(),
            actions: actions.iter().map(|a| a.as_ref().to_string()).collect(),
        };
        self.entries.get(&key).unwrap_or(&self.default)
    }

    pub fn default_payoff(&self) -> &[f64] {
        &self.default
    }

    pub fn entries(&self) -> impl Iterator<Item = (&PayoffKey, &[f64])> {
        self.entries.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The entries whose partition is accepted by `keep`.
    pub fn restricted(&self, mut keep: impl FnMut(&Partition) -> bool) -> Self {
        PayoffTable {
            n: self.n,
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| keep(&k.partition))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            default: self.default.clone(),
        }
    }
}

fn check_vector(n: usize, values: &[f64], context: &str) -> Result<()> {
    if values.len() != n {
        return Err(Error::InvalidPayoff(format!(
            "{context} has {} values for {n} players",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinitePayoff {
            context: context.to_string(),
        });
    }
    Ok(())
}

/// Additive per-player payoff applied whenever `partition` is realized.
#[derive(Clone, Debug, PartialEq)]
pub struct Bonus {
    pub partition: Partition,
    pub amounts: Vec<f64>,
}

/// Maps the partitions announced by all players to a realized partition.
pub trait FormationMechanism {
    fn realize(&self, n: usize, announced: &[&Partition]) -> Partition;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum FormationRule {
    /// A coalition with two or more members forms iff every member announced
    /// exactly that coalition as their own; everyone else stays alone.
    #[default]
    CoalitionUnanimity,
    /// A partition other than all-singletons forms iff every player announced
    /// it; otherwise all singletons.
    PartitionUnanimity,
}

impl FormationRule {
    pub fn name(self) -> &'static str {
        match self {
            FormationRule::CoalitionUnanimity => "coalition-unanimity",
            FormationRule::PartitionUnanimity => "partition-unanimity",
        }
    }
}

impl FormationMechanism for FormationRule {
    fn realize(&self, n: usize, announced: &[&Partition]) -> Partition {
        debug_assert_eq!(announced.len(), n);
        match self {
            FormationRule::CoalitionUnanimity => {
                let own: Vec<Coalition> = announced
                    .iter()
                    .enumerate()
                    .map(|(i, p)| p.coalition_of(PlayerId(i)))
                    .collect();
                let mut blocks = Vec::with_capacity(n);
                for i in 0..n {
                    let g = own[i];
                    if g.len() >= 2 && g.members().all(|j| own[j] == g) {
                        // members agree, so record the block once
                        if g.smallest() == i {
                            blocks.push(g);
                        }
                    } else {
                        blocks.push(Coalition::singleton(i));
                    }
                }
                Partition::from_blocks(n, blocks).expect("agreed coalitions are disjoint")
            }
            FormationRule::PartitionUnanimity => match announced.split_first() {
                Some((first, rest)) if rest.iter().all(|p| p == first) => (*first).clone(),
                _ => Partition::singletons(n),
            },
        }
    }
}

/// Everything needed to build `Γ(K)` for any `K`: payoffs may mention
/// partitions of any size, and each game keeps the ones inside its `P(K)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GameDefinition {
    pub n: usize,
    pub rule: FormationRule,
    pub actions: ActionSets,
    pub payoffs: PayoffTable,
    pub bonus: Option<Bonus>,
    pub player_limit: usize,
}

impl GameDefinition {
    pub fn new(n: usize, rule: FormationRule, actions: ActionSets, payoffs: PayoffTable) -> Self {
        GameDefinition {
            n,
            rule,
            actions,
            payoffs,
            bonus: None,
            player_limit: DEFAULT_PLAYER_LIMIT,
        }
    }

    pub fn with_bonus(mut self, bonus: Bonus) -> Self {
        self.bonus = Some(bonus);
        self
    }

    pub fn game(&self, k: usize) -> Result<Game> {
        Game::new(self, k)
    }
}

#[derive(Clone, Debug)]
pub struct Game {
    n: usize,
    k: usize,
    family: PartitionFamily,
    rule: FormationRule,
    actions: ActionSets,
    payoffs: PayoffTable,
    bonus: Option<Bonus>,
    strategies: Vec<Vec<PartitionStrategy>>,
}

impl Game {
    pub fn new(def: &GameDefinition, k: usize) -> Result<Self> {
        let n = def.n;
        if def.payoffs.n() != n {
            return Err(Error::InvalidParameter(format!(
                "payoff table is for {} players, game has {n}",
                def.payoffs.n()
            )));
        }
        if let Some(b) = &def.bonus {
            check_vector(n, &b.amounts, "bonus")?;
            if b.partition.n() != n {
                return Err(Error::InvalidParameter(format!(
                    "bonus partition {} is not over {n} players",
                    b.partition
                )));
            }
        }
        let family = enumerate_partitions_with_limit(n, k, def.player_limit)?;
        let mut strategies = Vec::with_capacity(n);
        for i in 0..n {
            let mut list = Vec::new();
            for p in family.iter() {
                let labels = def
                    .actions
                    .labels_for(i, p)
                    .filter(|l| !l.is_empty())
                    .ok_or_else(|| Error::MissingActions {
                        player: i,
                        partition: p.to_string(),
                    })?;
                for (id, label) in labels.iter().enumerate() {
                    if labels[..id].contains(label) {
                        return Err(Error::InvalidParameter(format!(
                            "player {i} lists action `{label}` twice for {p}"
                        )));
                    }
                    list.push(PartitionStrategy {
                        desired: p.clone(),
                        action: Action {
                            id,
                            label: label.clone(),
                        },
                    });
                }
            }
            strategies.push(list);
        }
        let payoffs = def.payoffs.restricted(|p| family.contains(p));
        Ok(Game {
            n,
            k,
            rule: def.rule,
            actions: def.actions.clone(),
            payoffs,
            bonus: def.bonus.clone(),
            family,
            strategies,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The maximum coalition size `K`.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn family(&self) -> &PartitionFamily {
        &self.family
    }

    pub fn rule(&self) -> FormationRule {
        self.rule
    }

    pub fn actions(&self) -> &ActionSets {
        &self.actions
    }

    pub fn payoffs(&self) -> &PayoffTable {
        &self.payoffs
    }

    pub fn payoffs_mut(&mut self) -> &mut PayoffTable {
        &mut self.payoffs
    }

    pub fn bonus(&self) -> Option<&Bonus> {
        self.bonus.as_ref()
    }

    pub fn strategies(&self, i: PlayerId) -> &[PartitionStrategy] {
        &self.strategies[i.0]
    }

    /// `S_i(K)` in partition order, then action id.
    pub fn build_strategy_set(&self, i: PlayerId) -> Vec<PartitionStrategy> {
        self.strategies[i.0].clone()
    }

    pub fn strategy_counts(&self) -> Vec<usize> {
        self.strategies.iter().map(Vec::len).collect()
    }

    /// `|S(K)|`, saturating at `u128::MAX`.
    pub fn profile_count(&self) -> u128 {
        self.strategies
            .iter()
            .fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128))
    }

    pub fn check_profile(&self, profile: &StrategyProfile) -> Result<()> {
        if profile.0.len() != self.n {
            return Err(Error::InvalidProfile(format!(
                "{} choices for {} players",
                profile.0.len(),
                self.n
            )));
        }
        for (i, &s) in profile.0.iter().enumerate() {
            if s >= self.strategies[i].len() {
                return Err(Error::InvalidProfile(format!(
                    "player {i} has no strategy {s}"
                )));
            }
        }
        Ok(())
    }

    /// Looks up a profile by the strategies' display forms, e.g. `H[0,1]`.
    pub fn profile_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<StrategyProfile> {
        if labels.len() != self.n {
            return Err(Error::InvalidProfile(format!(
                "{} choices for {} players",
                labels.len(),
                self.n
            )));
        }
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                self.strategies[i]
                    .iter()
                    .position(|s| s.to_string() == l.as_ref())
                    .ok_or_else(|| {
                        Error::InvalidProfile(format!(
                            "player {i} has no strategy `{}`",
                            l.as_ref()
                        ))
                    })
            })
            .collect::<Result<Vec<_>>>()
            .map(StrategyProfile)
    }

    pub fn profile_of(&self, choices: &[PartitionStrategy]) -> Result<StrategyProfile> {
        if choices.len() != self.n {
            return Err(Error::InvalidProfile(format!(
                "{} choices for {} players",
                choices.len(),
                self.n
            )));
        }
        choices
            .iter()
            .enumerate()
            .map(|(i, c)| {
                self.strategies[i]
                    .iter()
                    .position(|s| s == c)
                    .ok_or_else(|| Error::InvalidProfile(format!("player {i} cannot play {c}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(StrategyProfile)
    }

    /// `R(K)` applied to a profile.
    pub fn apply_formation_rule(&self, profile: &StrategyProfile) -> Partition {
        self.realize_with(&self.rule, &profile.0)
    }

    pub(crate) fn realize_with(
        &self,
        rule: &dyn FormationMechanism,
        profile: &[usize],
    ) -> Partition {
        let announced: Vec<&Partition> = profile
            .iter()
            .enumerate()
            .map(|(i, &s)| &self.strategies[i][s].desired)
            .collect();
        rule.realize(self.n, &announced)
    }

    /// Payoff vector for a profile whose realized partition is already known.
    pub fn payoff_in(&self, realized: &Partition, profile: &[usize]) -> Vec<f64> {
        let labels: Vec<&str> = profile
            .iter()
            .enumerate()
            .map(|(i, &s)| self.strategies[i][s].action.label.as_str())
            .collect();
        self.payoff_lookup(realized, &labels)
    }

    /// Table value plus bonus for a realized partition and action labels.
    pub fn payoff_lookup<S: AsRef<str>>(&self, realized: &Partition, labels: &[S]) -> Vec<f64> {
        let mut values = self.payoffs.get(realized, labels).to_vec();
        if let Some(b) = &self.bonus {
            if &b.partition == realized {
                for (v, e) in values.iter_mut().zip(&b.amounts) {
                    *v += e;
                }
            }
        }
        values
    }

    pub fn payoff(&self, profile: &StrategyProfile) -> Vec<f64> {
        let realized = self.apply_formation_rule(profile);
        self.payoff_in(&realized, &profile.0)
    }

    /// Iterates every pure profile in mixed-radix order, last player fastest.
    pub fn profiles(&self) -> ProfileIter {
        ProfileIter::new(self.strategy_counts())
    }

    fn check_budget(&self, what: &'static str, budget: u128) -> Result<()> {
        let required = self.profile_count();
        if required > budget {
            return Err(Error::TooLarge {
                what,
                required,
                budget,
            });
        }
        Ok(())
    }

    /// `S(P)`: every profile the rule maps to `partition`.
    pub fn induced_domain(
        &self,
        partition: &Partition,
        budget: u128,
    ) -> Result<Vec<StrategyProfile>> {
        if !self.family.contains(partition) {
            return Err(Error::InvalidParameter(format!(
                "partition {partition} is not in P({})",
                self.k
            )));
        }
        self.check_budget("induced domain", budget)?;
        Ok(self
            .profiles()
            .filter(|s| &self.realize_with(&self.rule, s) == partition)
            .map(StrategyProfile)
            .collect())
    }

    pub fn check_mechanism_axioms(&self, budget: u128) -> Result<AxiomReport> {
        self.check_axioms_with(&self.rule, budget)
    }

    /// Checks by enumeration that `rule` maps every profile into `P(K)` and
    /// that the induced domains are pairwise disjoint and cover `S(K)`.
    pub fn check_axioms_with(
        &self,
        rule: &dyn FormationMechanism,
        budget: u128,
    ) -> Result<AxiomReport> {
        let required = self
            .profile_count()
            .saturating_mul(self.family.len() as u128 + 1);
        if required > budget {
            return Err(Error::TooLarge {
                what: "mechanism axiom check",
                required,
                budget,
            });
        }

        let mut in_family = AxiomOutcome::pass();
        for s in self.profiles() {
            if !self.family.contains(&self.realize_with(rule, &s)) {
                in_family = AxiomOutcome::fail(StrategyProfile(s));
                break;
            }
        }

        // Domains are built independently, one pass per partition.
        let total = self.profile_count() as usize;
        let mut hits = vec![0u32; total];
        let mut domain_sizes = Vec::with_capacity(self.family.len());
        for p in self.family.iter() {
            let mut size = 0usize;
            for (idx, s) in self.profiles().enumerate() {
                if &self.realize_with(rule, &s) == p {
                    hits[idx] += 1;
                    size += 1;
                }
            }
            domain_sizes.push((p.clone(), size));
        }
        let first = |pred: &dyn Fn(u32) -> bool| {
            hits.iter()
                .position(|&h| pred(h))
                .map(|idx| StrategyProfile(self.profiles().nth(idx).expect("index in range")))
        };
        let disjoint = match first(&|h| h > 1) {
            Some(s) => AxiomOutcome::fail(s),
            None => AxiomOutcome::pass(),
        };
        let covering = match first(&|h| h == 0) {
            Some(s) => AxiomOutcome::fail(s),
            None => AxiomOutcome::pass(),
        };
        Ok(AxiomReport {
            profiles: self.profile_count(),
            domain_sizes,
            in_family,
            disjoint,
            covering,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomOutcome {
    pub passed: bool,
    pub counterexample: Option<StrategyProfile>,
}

impl AxiomOutcome {
    fn pass() -> Self {
        AxiomOutcome {
            passed: true,
            counterexample: None,
        }
    }

    fn fail(s: StrategyProfile) -> Self {
        AxiomOutcome {
            passed: false,
            counterexample: Some(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    pub profiles: u128,
    /// `|S(P)|` for each partition in family order.
    pub domain_sizes: Vec<(Partition, usize)>,
    /// Every profile is mapped into `P(K)`.
    pub in_family: AxiomOutcome,
    /// No profile belongs to two domains.
    pub disjoint: AxiomOutcome,
    /// Every profile belongs to some domain.
    pub covering: AxiomOutcome,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.in_family.passed && self.disjoint.passed && self.covering.passed
    }
}

/// Odometer over a mixed-radix space.
#[derive(Clone, Debug)]
pub struct ProfileIter {
    radices: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl ProfileIter {
    pub fn new(radices: Vec<usize>) -> Self {
        let next = (!radices.contains(&0)).then(|| vec![0; radices.len()]);
        ProfileIter { radices, next }
    }
}

impl Iterator for ProfileIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for pos in (0..succ.len()).rev() {
            succ[pos] += 1;
            if succ[pos] < self.radices[pos] {
                self.next = Some(succ);
                return Some(current);
            }
            succ[pos] = 0;
        }
        Some(current)
    }
}

/// Cooperative-style values: each block maps to the sum of its members'
/// payoffs.
pub fn coalition_values(partition: &Partition, payoffs: &[f64]) -> Vec<(Coalition, f64)> {
    assert_eq!(payoffs.len(), partition.n(), "one payoff per player");
    partition
        .blocks()
        .iter()
        .map(|b| (*b, b.members().map(|m| payoffs[m]).sum()))
        .collect()
}
