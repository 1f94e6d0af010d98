#![allow(dead_code)]

use coalform_core::{
    ActionSets, Bonus, FormationRule, Game, GameDefinition, Partition, PayoffTable,
};

pub fn part(s: &str) -> Partition {
    s.parse().unwrap()
}

/// Corporate dinner: A=0, B=1, C1=2, C2=3; six listed partitions, zero elsewhere.
pub fn dinner() -> GameDefinition {
    let mut payoffs = PayoffTable::new(4);
    for (p, v) in [
        ("0,1|2|3", [10.0, 10.0, 3.0, 3.0]),
        ("0,1|2,3", [8.0, 8.0, 5.0, 5.0]),
        ("0,2|1,3", [3.0, 5.0, 10.0, 5.0]),
        ("0,2|1|3", [3.0, 3.0, 10.0, 3.0]),
        ("0,3|1,2", [3.0, 5.0, 5.0, 10.0]),
        ("0,3|1|2", [3.0, 3.0, 3.0, 10.0]),
    ] {
        payoffs
            .insert(part(p), vec![String::new(); 4], v.to_vec())
            .unwrap();
    }
    GameDefinition::new(
        4,
        FormationRule::CoalitionUnanimity,
        ActionSets::trivial(4),
        payoffs,
    )
}

/// Two-player dilemma with identical payoffs in both partitions.
pub fn pd() -> GameDefinition {
    let mut payoffs = PayoffTable::new(2);
    for p in ["0|1", "0,1"] {
        for (a, b, v) in [
            ("L", "L", [0.0, 0.0]),
            ("L", "H", [-5.0, 3.0]),
            ("H", "L", [3.0, -5.0]),
            ("H", "H", [-2.0, -2.0]),
        ] {
            payoffs
                .insert(part(p), vec![a.into(), b.into()], v.to_vec())
                .unwrap();
        }
    }
    GameDefinition::new(
        2,
        FormationRule::CoalitionUnanimity,
        ActionSets::shared(2, &["L", "H"]),
        payoffs,
    )
}

pub fn pd_extrovert(eps: f64) -> GameDefinition {
    pd().with_bonus(Bonus {
        partition: part("0,1"),
        amounts: vec![eps, eps],
    })
}

pub fn matching_pennies() -> GameDefinition {
    let mut payoffs = PayoffTable::new(2);
    for (a, b, v) in [
        ("H", "H", [1.0, -1.0]),
        ("H", "T", [-1.0, 1.0]),
        ("T", "H", [-1.0, 1.0]),
        ("T", "T", [1.0, -1.0]),
    ] {
        payoffs
            .insert(part("0|1"), vec![a.into(), b.into()], v.to_vec())
            .unwrap();
    }
    GameDefinition::new(
        2,
        FormationRule::CoalitionUnanimity,
        ActionSets::shared(2, &["H", "T"]),
        payoffs,
    )
}

pub fn game(def: &GameDefinition, k: usize) -> Game {
    def.game(k).unwrap()
}

/// Index of the strategy displayed as `name` in player `i`'s list.
pub fn strategy(g: &Game, i: usize, name: &str) -> usize {
    g.strategies(coalform_core::PlayerId(i))
        .iter()
        .position(|s| s.to_string() == name)
        .unwrap_or_else(|| panic!("player {i} has no strategy {name}"))
}

/// A profile where each player mixes over the named strategies.
pub fn mixed(g: &Game, spec: &[&[(&str, f64)]]) -> coalform_core::MixedProfile {
    use coalform_core::{MixedProfile, MixedStrategy, PlayerId};
    let strategies = spec
        .iter()
        .enumerate()
        .map(|(i, weights)| {
            let mut v = vec![0.0; g.strategies(PlayerId(i)).len()];
            for (name, w) in weights.iter() {
                v[strategy(g, i, name)] = *w;
            }
            MixedStrategy::new(v).unwrap()
        })
        .collect();
    MixedProfile::new(strategies)
}
