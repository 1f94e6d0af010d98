//! The JSON game-spec format.
//!
//! A spec names the players, the range of `K`, the formation rule, the
//! action labels, and a payoff table keyed by canonical partition strings.
//! [`parse_spec`] validates everything and rewrites partition keys into
//! canonical form, so serializing a parsed spec and parsing it again gives
//! the same value.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::RangeInclusive;

use coalform_core::{ActionSets, Bonus, FormationRule, GameDefinition, Partition, PayoffTable};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A validation or syntax error with the place it was found: either
/// `line L, column C` or a key path such as `payoffs[3].values[1]`.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{location}: {message}")]
pub struct SpecError {
    pub location: String,
    pub message: String,
}

impl SpecError {
    fn at(location: impl Into<String>, message: impl fmt::Display) -> Self {
        SpecError {
            location: location.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub players: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_range: Option<[usize; 2]>,
    #[serde(default)]
    pub rule: RuleName,
    /// Omitted means one unnamed action per player.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Actions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_payoff: Option<Vec<Value>>,
    #[serde(default)]
    pub payoffs: Vec<PayoffEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Epsilon>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleName {
    #[default]
    CoalitionUnanimity,
    PartitionUnanimity,
}

impl From<RuleName> for FormationRule {
    fn from(r: RuleName) -> Self {
        match r {
            RuleName::CoalitionUnanimity => FormationRule::CoalitionUnanimity,
            RuleName::PartitionUnanimity => FormationRule::PartitionUnanimity,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Actions {
    /// The same labels for every player in every partition.
    Shared(Vec<String>),
    Detailed(DetailedActions),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetailedActions {
    /// Fallback for partitions not listed below.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shared: Option<Vec<String>>,
    #[serde(default)]
    pub per_partition: Vec<PartitionActions>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionActions {
    pub partition: String,
    /// Player name; omitted means every player.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub player: Option<String>,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffEntry {
    pub partition: String,
    /// One label per player; omitted means every player's unnamed action.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<String>>,
    pub values: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Epsilon {
    pub partition: String,
    pub bonus: BonusAmount,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BonusAmount {
    Uniform(Value),
    PerPlayer(Vec<Value>),
}

/// A payoff number. Accepts JSON numbers and numeric strings so that values
/// JSON cannot express (`"inf"`, `"NaN"`) reach validation and get a located
/// error instead of a syntax error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Value(pub f64);

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Value;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a numeric string")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Value, E> {
                Ok(Value(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Value, E> {
                Ok(Value(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Value, E> {
                Ok(Value(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Value, E> {
                v.trim()
                    .parse()
                    .map(Value)
                    .map_err(|_| E::custom(format!("`{v}` is not a number")))
            }
        }
        d.deserialize_any(V)
    }
}

/// Parses and validates a spec, canonicalizing every partition string.
pub fn parse_spec(text: &str) -> Result<GameSpec, SpecError> {
    let mut spec: GameSpec = serde_json::from_str(text).map_err(|e| {
        SpecError::at(
            format!("line {}, column {}", e.line(), e.column()),
            strip_position(&e),
        )
    })?;
    spec.canonicalize()?;
    spec.definition()?;
    Ok(spec)
}

// serde_json appends " at line L column C"; the location is reported separately.
fn strip_position(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    match msg.rfind(" at line ") {
        Some(pos) => msg[..pos].to_string(),
        None => msg,
    }
}

impl GameSpec {
    pub fn n(&self) -> usize {
        self.players.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("specs always serialize")
    }

    /// The members to solve: `k_range` if given, otherwise just `k`.
    pub fn solve_range(&self) -> Result<RangeInclusive<usize>, SpecError> {
        match (self.k, self.k_range) {
            (Some(k), None) => Ok(k..=k),
            (None, Some([a, b])) => Ok(a..=b),
            _ => Err(SpecError::at("k", "give exactly one of `k` and `k_range`")),
        }
    }

    /// The family to build: `k_range` if given, otherwise `k` up to the
    /// number of players.
    pub fn family_range(&self) -> Result<RangeInclusive<usize>, SpecError> {
        match (self.k, self.k_range) {
            (Some(k), None) => Ok(k..=self.n().max(k)),
            _ => self.solve_range(),
        }
    }

    /// Replaces the bonus amount with `eps` for every player; a spec without
    /// an `epsilon` stanza gets one on the grand coalition.
    pub fn set_epsilon(&mut self, eps: f64) {
        let partition = self
            .epsilon
            .as_ref()
            .map(|e| e.partition.clone())
            .unwrap_or_else(|| Partition::grand(self.n()).to_string());
        self.epsilon = Some(Epsilon {
            partition,
            bonus: BonusAmount::Uniform(Value(eps)),
        });
    }

    fn canonicalize(&mut self) -> Result<(), SpecError> {
        let n = self.n();
        if let Some(Actions::Detailed(d)) = &mut self.actions {
            for (i, pa) in d.per_partition.iter_mut().enumerate() {
                pa.partition = canonical(
                    &pa.partition,
                    n,
                    &format!("actions.per_partition[{i}].partition"),
                )?;
            }
        }
        for (i, e) in self.payoffs.iter_mut().enumerate() {
            e.partition = canonical(&e.partition, n, &format!("payoffs[{i}].partition"))?;
        }
        if let Some(eps) = &mut self.epsilon {
            eps.partition = canonical(&eps.partition, n, "epsilon.partition")?;
        }
        Ok(())
    }

    fn player_index(&self, name: &str, location: &str) -> Result<usize, SpecError> {
        self.players
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| SpecError::at(location, format!("unknown player `{name}`")))
    }

    /// Builds the game definition, validating every field.
    pub fn definition(&self) -> Result<GameDefinition, SpecError> {
        let n = self.n();
        if n < 2 {
            return Err(SpecError::at(
                "players",
                "at least two players are required",
            ));
        }
        let mut seen = BTreeSet::new();
        for (i, p) in self.players.iter().enumerate() {
            if p.trim().is_empty() {
                return Err(SpecError::at(
                    format!("players[{i}]"),
                    "player names must not be empty",
                ));
            }
            if !seen.insert(p) {
                return Err(SpecError::at(
                    format!("players[{i}]"),
                    format!("duplicate player `{p}`"),
                ));
            }
        }
        let range = self.solve_range()?;
        let loc = if self.k.is_some() { "k" } else { "k_range" };
        if range.is_empty() || *range.start() == 0 || *range.end() > n {
            return Err(SpecError::at(
                loc,
                format!(
                    "K must satisfy 1 <= K <= {n}, got {}..={}",
                    range.start(),
                    range.end()
                ),
            ));
        }

        let actions = self.action_sets()?;
        let known: Vec<BTreeSet<&str>> = (0..n).map(|i| self.known_labels(i)).collect();

        let default = match &self.default_payoff {
            Some(v) => values(v, n, "default_payoff")?,
            None => vec![0.0; n],
        };
        let mut payoffs = PayoffTable::with_default(n, default)
            .map_err(|e| SpecError::at("default_payoff", e))?;
        let mut keys = BTreeSet::new();
        for (i, e) in self.payoffs.iter().enumerate() {
            let at = format!("payoffs[{i}]");
            let partition = parse_partition(&e.partition, n, &format!("{at}.partition"))?;
            let labels = match &e.actions {
                Some(a) => a.clone(),
                None => vec![String::new(); n],
            };
            if labels.len() != n {
                return Err(SpecError::at(
                    format!("{at}.actions"),
                    format!("expected {n} action labels, got {}", labels.len()),
                ));
            }
            for (j, l) in labels.iter().enumerate() {
                if !known[j].contains(l.as_str()) {
                    return Err(SpecError::at(
                        format!("{at}.actions[{j}]"),
                        format!("player `{}` has no action `{l}`", self.players[j]),
                    ));
                }
            }
            if !keys.insert((partition.clone(), labels.clone())) {
                return Err(SpecError::at(
                    &at,
                    format!("duplicate entry for {partition} {labels:?}"),
                ));
            }
            let v = values(&e.values, n, &format!("{at}.values"))?;
            payoffs
                .insert(partition, labels, v)
                .map_err(|err| SpecError::at(&at, err))?;
        }

        let mut def = GameDefinition::new(n, self.rule.into(), actions, payoffs);
        if let Some(eps) = &self.epsilon {
            let partition = parse_partition(&eps.partition, n, "epsilon.partition")?;
            let amounts = match &eps.bonus {
                BonusAmount::Uniform(v) => values(&[*v], 1, "epsilon.bonus")?.repeat(n),
                BonusAmount::PerPlayer(v) => values(v, n, "epsilon.bonus")?,
            };
            def = def.with_bonus(Bonus { partition, amounts });
        }
        for k in range {
            def.game(k).map_err(|e| SpecError::at("actions", e))?;
        }
        Ok(def)
    }

    fn action_sets(&self) -> Result<ActionSets, SpecError> {
        let n = self.n();
        let check = |labels: &[String], at: &str| -> Result<(), SpecError> {
            if labels.is_empty() {
                return Err(SpecError::at(at, "an action list must not be empty"));
            }
            let mut seen = BTreeSet::new();
            for l in labels {
                if !seen.insert(l) {
                    return Err(SpecError::at(at, format!("duplicate action `{l}`")));
                }
            }
            Ok(())
        };
        match &self.actions {
            None => Ok(ActionSets::trivial(n)),
            Some(Actions::Shared(labels)) => {
                check(labels, "actions")?;
                Ok(ActionSets::shared(n, labels))
            }
            Some(Actions::Detailed(d)) => {
                let mut sets = match &d.shared {
                    Some(labels) => {
                        check(labels, "actions.shared")?;
                        ActionSets::shared(n, labels)
                    }
                    None => ActionSets::explicit(),
                };
                for (i, pa) in d.per_partition.iter().enumerate() {
                    let at = format!("actions.per_partition[{i}]");
                    let partition = parse_partition(&pa.partition, n, &format!("{at}.partition"))?;
                    check(&pa.labels, &format!("{at}.labels"))?;
                    let players = match &pa.player {
                        Some(name) => vec![self.player_index(name, &format!("{at}.player"))?],
                        None => (0..n).collect(),
                    };
                    for p in players {
                        sets.set(p, partition.clone(), pa.labels.clone());
                    }
                }
                Ok(sets)
            }
        }
    }

    fn known_labels(&self, player: usize) -> BTreeSet<&str> {
        match &self.actions {
            None => BTreeSet::from([""]),
            Some(Actions::Shared(l)) => l.iter().map(String::as_str).collect(),
            Some(Actions::Detailed(d)) => d
                .shared
                .iter()
                .flatten()
                .chain(
                    d.per_partition
                        .iter()
                        .filter(|pa| {
                            pa.player
                                .as_ref()
                                .is_none_or(|name| self.players.get(player) == Some(name))
                        })
                        .flat_map(|pa| pa.labels.iter()),
                )
                .map(String::as_str)
                .collect(),
        }
    }
}

fn parse_partition(s: &str, n: usize, at: &str) -> Result<Partition, SpecError> {
    Partition::parse(s, n).map_err(|e| SpecError::at(at, e))
}

fn canonical(s: &str, n: usize, at: &str) -> Result<String, SpecError> {
    parse_partition(s, n, at).map(|p| p.to_string())
}

fn values(v: &[Value], n: usize, at: &str) -> Result<Vec<f64>, SpecError> {
    if v.len() != n {
        return Err(SpecError::at(
            at,
            format!("expected {n} values, got {}", v.len()),
        ));
    }
    v.iter()
        .enumerate()
        .map(|(i, x)| {
            if x.0.is_finite() {
                Ok(x.0)
            } else {
                Err(SpecError::at(
                    format!("{at}[{i}]"),
                    format!("payoff must be finite, got {}", x.0),
                ))
            }
        })
        .collect()
}
