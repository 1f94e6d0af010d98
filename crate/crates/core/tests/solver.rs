mod common;

use coalform_core::{
    ActionSets, FormationRule, Game, GameDefinition, MixedProfile, MixedStrategy, Mode,
    PayoffTable, PlayerId, Solver, SolverConfig,
};
use common::{dinner, game, matching_pennies, mixed, part, pd, pd_extrovert, strategy};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn solver(g: &Game) -> Solver<'_> {
    Solver::new(g, SolverConfig::default()).unwrap()
}

fn random_profile(g: &Game, rng: &mut StdRng) -> MixedProfile {
    MixedProfile::new(
        g.strategy_counts()
            .into_iter()
            .map(|c| {
                // some zeros so that restricted supports are exercised too
                let w: Vec<f64> = (0..c)
                    .map(|_| {
                        if rng.gen_bool(0.3) {
                            0.0
                        } else {
                            rng.gen::<f64>()
                        }
                    })
                    .collect();
                if w.iter().all(|&x| x == 0.0) {
                    MixedStrategy::pure(c, rng.gen_range(0..c))
                } else {
                    MixedStrategy::new(w).unwrap()
                }
            })
            .collect(),
    )
}

fn pure_names(g: &Game, eqs: &[coalform_core::EquilibriumResult]) -> Vec<Vec<String>> {
    eqs.iter()
        .map(|e| {
            e.profile
                .as_pure()
                .unwrap()
                .choices(g)
                .iter()
                .map(|s| s.to_string())
                .collect()
        })
        .collect()
}

#[test]
fn pd_classic_block() {
    let g = game(&pd(), 1);
    let s = solver(&g);
    let eqs = s.enumerate_pure_equilibria(Mode::Weak).unwrap();
    assert_eq!(pure_names(&g, &eqs), [["H[0|1]", "H[0|1]"]]);
    assert_eq!(eqs[0].payoffs, [-2.0, -2.0]);
    assert_eq!(eqs[0].mode, Mode::Strict);

    let ll = mixed(&g, &[&[("L[0|1]", 1.0)], &[("L[0|1]", 1.0)]]);
    let (ok, regret) = s.is_equilibrium(&ll, Mode::Weak, 1e-9).unwrap();
    assert!(!ok);
    assert_eq!(regret, 3.0);

    let u = MixedProfile::uniform(&g);
    assert_eq!(s.expected_utility(&u, PlayerId(0)).unwrap(), -1.0);
}

#[test]
fn pd_with_joint_partition() {
    let g = game(&pd(), 2);
    let s = solver(&g);
    let eqs = s.enumerate_pure_equilibria(Mode::Weak).unwrap();
    assert_eq!(eqs.len(), 4);
    assert!(eqs.iter().all(|e| e.payoffs == [-2.0, -2.0]));
    let joint = eqs
        .iter()
        .filter(|e| e.partition_distribution == [(part("0,1"), 1.0)])
        .count();
    let separate = eqs
        .iter()
        .filter(|e| e.partition_distribution == [(part("0|1"), 1.0)])
        .count();
    assert_eq!((joint, separate), (1, 3));
    assert!(pure_names(&g, &eqs).contains(&vec!["H[0,1]".into(), "H[0,1]".into()]));
    // nobody gains or loses strictly, so none is strict
    assert!(s
        .enumerate_pure_equilibria(Mode::Strict)
        .unwrap()
        .is_empty());
}

#[test]
fn extrovert_bonus_singles_out_joint() {
    let g = game(&pd_extrovert(1.0), 2);
    let s = solver(&g);
    let weak = pure_names(&g, &s.enumerate_pure_equilibria(Mode::Weak).unwrap());
    let strict = pure_names(&g, &s.enumerate_pure_equilibria(Mode::Strict).unwrap());
    let hj = vec!["H[0,1]".to_string(), "H[0,1]".to_string()];
    let hs = vec!["H[0|1]".to_string(), "H[0|1]".to_string()];
    assert_eq!(strict.len(), 1);
    assert_eq!(strict[0], hj);
    assert_eq!(weak, [hj, hs]);

    for names in [["H[0|1]", "H[0,1]"], ["H[0,1]", "H[0|1]"]] {
        let p = g.profile_from_labels(&names).unwrap();
        let sigma = MixedProfile::pure(&g, &p).unwrap();
        assert!(
            !s.is_equilibrium(&sigma, Mode::Weak, 1e-9).unwrap().0,
            "{names:?}"
        );
    }
}

#[test]
fn matching_pennies_has_only_mixed() {
    let g = game(&matching_pennies(), 1);
    let s = solver(&g);
    assert!(s.enumerate_pure_equilibria(Mode::Weak).unwrap().is_empty());
    let found = s.support_enumeration(2).unwrap();
    assert_eq!(found.equilibria.len(), 1);
    for st in found.equilibria[0].profile.strategies() {
        for &p in st.probabilities() {
            assert!((p - 0.5).abs() <= 1e-9);
        }
    }
    assert!(found.equilibria[0].payoffs.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn pd_indifferent_mixtures() {
    let g = game(&pd(), 2);
    let s = solver(&g);
    let hs = strategy(&g, 0, "H[0|1]");
    let hj = strategy(&g, 0, "H[0,1]");
    let mut support = vec![hj, hs];
    support.sort();
    let found = s.solve_support(&[support.clone(), support]).unwrap();
    assert!(!found.is_empty());
    assert!(found.iter().all(|e| e.degenerate));
    for p in [0.0, 0.1, 0.37, 0.5, 0.9] {
        for q in [0.2, 0.6, 1.0] {
            let sigma = mixed(
                &g,
                &[
                    &[("H[0|1]", p), ("H[0,1]", 1.0 - p)],
                    &[("H[0|1]", q), ("H[0,1]", 1.0 - q)],
                ],
            );
            let (ok, regret) = s.is_equilibrium(&sigma, Mode::Weak, 1e-9).unwrap();
            assert!(ok && regret <= 1e-9, "p={p} q={q} regret={regret}");
        }
    }
    for e in s.support_enumeration(2).unwrap().equilibria {
        assert!(s.is_equilibrium(&e.profile, Mode::Weak, 1e-9).unwrap().0);
    }
}

#[test]
fn dinner_pair_mixing() {
    let g = game(&dinner(), 2);
    let s = solver(&g);
    let ab = &[("[0,1|2|3]", 0.5), ("[0,1|2,3]", 0.5)][..];
    let c = &[("[0,1|2,3]", 1.0)][..];
    let sigma = mixed(&g, &[ab, ab, c, c]);
    assert_eq!(s.expected_utility(&sigma, PlayerId(0)).unwrap(), 8.0);
    assert_eq!(
        s.equilibrium_partitions(&sigma).unwrap(),
        [(part("0,1|2,3"), 1.0)]
    );

    let mut support: Vec<usize> = ["[0,1|2|3]", "[0,1|2,3]"]
        .iter()
        .map(|n| strategy(&g, 0, n))
        .collect();
    support.sort();
    let two = strategy(&g, 2, "[0,1|2,3]");
    let found = s
        .solve_support(&[support.clone(), support, vec![two], vec![two]])
        .unwrap();
    assert!(!found.is_empty());
    for e in &found {
        assert_eq!(e.payoffs, [8.0, 8.0, 5.0, 5.0]);
        assert!(e.max_regret <= 1e-9);
    }
}

#[test]
fn dinner_full_support_search_exceeds_default_budget() {
    let g = game(&dinner(), 2);
    assert!(matches!(
        solver(&g).support_enumeration(2),
        Err(coalform_core::Error::TooLarge { .. })
    ));
}

#[test]
fn expected_utility_formulas_agree() {
    let mut rng = StdRng::seed_from_u64(7);
    let defs = [
        (pd(), 1),
        (pd(), 2),
        (pd_extrovert(1.0), 2),
        (matching_pennies(), 1),
        (dinner(), 2),
    ];
    for (def, k) in defs {
        let g = game(&def, k);
        let s = solver(&g);
        for _ in 0..1000 {
            let sigma = random_profile(&g, &mut rng);
            for i in 0..g.n() {
                let a = s.expected_utility_direct(&sigma, PlayerId(i)).unwrap();
                let b = s
                    .expected_utility_by_partition(&sigma, PlayerId(i))
                    .unwrap();
                assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
            }
            let total: f64 = s
                .equilibrium_partitions(&sigma)
                .unwrap()
                .iter()
                .map(|x| x.1)
                .sum();
            assert!((total - 1.0).abs() <= 1e-9);
        }
    }
}

#[test]
fn pure_profile_utility_is_its_payoff() {
    let g = game(&dinner(), 3);
    let s = solver(&g);
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..200 {
        let p: Vec<usize> = g
            .strategy_counts()
            .iter()
            .map(|&c| rng.gen_range(0..c))
            .collect();
        let p = coalform_core::StrategyProfile(p);
        let sigma = MixedProfile::pure(&g, &p).unwrap();
        assert_eq!(s.expected_payoffs(&sigma).unwrap(), g.payoff(&p));
    }
}

fn shifted(def: &GameDefinition, player: usize, c: f64) -> GameDefinition {
    let mut default = def.payoffs.default_payoff().to_vec();
    default[player] += c;
    let mut table = PayoffTable::with_default(def.n, default).unwrap();
    for (key, v) in def.payoffs.entries() {
        let mut v = v.to_vec();
        v[player] += c;
        table
            .insert(key.partition.clone(), key.actions.clone(), v)
            .unwrap();
    }
    GameDefinition {
        payoffs: table,
        ..def.clone()
    }
}

#[test]
fn constant_shift_moves_utility_only() {
    let mut rng = StdRng::seed_from_u64(11);
    for (def, k) in [(pd_extrovert(1.0), 2), (dinner(), 2)] {
        let g = game(&def, k);
        let base = solver(&g);
        let g2 = game(&shifted(&def, 1, 7.25), k);
        let moved = solver(&g2);
        let before = pure_names(&g, &base.enumerate_pure_equilibria(Mode::Weak).unwrap());
        let after = pure_names(&g2, &moved.enumerate_pure_equilibria(Mode::Weak).unwrap());
        assert_eq!(before, after);
        for _ in 0..100 {
            let sigma = random_profile(&g, &mut rng);
            let a = base.expected_utility(&sigma, PlayerId(1)).unwrap();
            let b = moved.expected_utility(&sigma, PlayerId(1)).unwrap();
            assert!((b - a - 7.25).abs() <= 1e-9);
            let ca = base.check(&sigma, 1e-9).unwrap();
            let cb = moved.check(&sigma, 1e-9).unwrap();
            assert_eq!((ca.weak, ca.strict), (cb.weak, cb.strict));
        }
    }
}

#[test]
fn pure_enumeration_agrees_with_singleton_supports() {
    for (def, k) in [(pd(), 1), (pd(), 2), (pd_extrovert(1.0), 2), (dinner(), 2)] {
        let g = game(&def, k);
        let s = solver(&g);
        let pure = s.enumerate_pure_equilibria(Mode::Weak).unwrap();
        let supp = s.support_enumeration(1).unwrap();
        let a: Vec<_> = pure.iter().map(|e| e.profile.as_pure().unwrap()).collect();
        let b: Vec<_> = supp
            .equilibria
            .iter()
            .map(|e| e.profile.as_pure().unwrap())
            .collect();
        assert_eq!(a, b);
    }
}

#[test]
fn replicator_dynamics() {
    let g = game(&pd(), 1);
    let s = solver(&g);
    let out = s
        .replicator_refine(&MixedProfile::uniform(&g), 2000, 0.5)
        .unwrap();
    let h = strategy(&g, 0, "H[0|1]");
    for st in out.profile.strategies() {
        assert!(st.probabilities()[h] > 0.999);
    }
    assert!(out.max_regret < 1e-2);

    let g = game(&pd(), 2);
    let s = solver(&g);
    let eq = s.enumerate_pure_equilibria(Mode::Weak).unwrap().remove(0);
    let out = s.replicator_refine(&eq.profile, 500, 1.0).unwrap();
    assert!(out.max_regret <= 1e-9);

    assert!(s.replicator_refine(&eq.profile, 0, 0.5).is_err());
    assert!(s.replicator_refine(&eq.profile, 5, 1.5).is_err());
}

#[test]
fn one_strategy_game_is_fixed() {
    let mut payoffs = PayoffTable::new(2);
    payoffs
        .insert(part("0|1"), vec![String::new(); 2], vec![1.0, 2.0])
        .unwrap();
    let def = GameDefinition::new(
        2,
        FormationRule::CoalitionUnanimity,
        ActionSets::trivial(2),
        payoffs,
    );
    let g = game(&def, 1);
    let s = solver(&g);
    let start = MixedProfile::uniform(&g);
    let out = s.replicator_refine(&start, 10, 0.3).unwrap();
    assert_eq!(out.profile, start);
    assert_eq!(s.enumerate_pure_equilibria(Mode::Weak).unwrap().len(), 1);
}

#[test]
fn existence_for_built_ins() {
    for (def, ks) in [
        (pd(), 1..=2),
        (pd_extrovert(1.0), 1..=2),
        (matching_pennies(), 1..=1),
        (dinner(), 2..=4),
    ] {
        for k in ks {
            let g = game(&def, k);
            let s = solver(&g);
            let mut eqs = s.enumerate_pure_equilibria(Mode::Weak).unwrap();
            if eqs.is_empty() {
                eqs = s.support_enumeration(2).unwrap().equilibria;
            }
            assert!(!eqs.is_empty(), "k={k}");
            for e in &eqs {
                assert!(s.is_equilibrium(&e.profile, Mode::Weak, 1e-9).unwrap().0);
                let total: f64 = e.partition_distribution.iter().map(|x| x.1).sum();
                assert!((total - 1.0).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn rejects_bad_inputs() {
    let g = game(&pd(), 2);
    let s = solver(&g);
    let u = MixedProfile::uniform(&g);
    assert!(s.check(&u, 0.0).is_err());
    assert!(s.check(&u, f64::NAN).is_err());
    let short = MixedProfile::new(vec![MixedStrategy::uniform(4)]);
    assert!(s.expected_utility(&short, PlayerId(0)).is_err());
    assert!(MixedStrategy::new(vec![0.5, -0.1]).is_err());
    assert!(MixedStrategy::new(vec![0.0, 0.0]).is_err());
    assert!(s.solve_support(&[vec![0, 1, 2], vec![3, 2]]).is_err());
}

#[test]
fn solve_falls_back_when_mixed_search_is_too_large() {
    use coalform_core::MixedSearch;
    let g = game(&dinner(), 2);
    let sol = solver(&g).solve(Mode::Weak).unwrap();
    assert!(matches!(sol.mixed, MixedSearch::Skipped(_)));
    assert!(sol
        .equilibria
        .iter()
        .any(|e| e.payoffs == [8.0, 8.0, 5.0, 5.0]));

    let g = game(&matching_pennies(), 1);
    let sol = solver(&g).solve(Mode::Weak).unwrap();
    assert!(matches!(sol.mixed, MixedSearch::Ran { .. }));
    assert_eq!(sol.equilibria.len(), 1);
    assert!(!sol.refined);
    // full support leaves nothing off-support, so the strict test holds
    let sol = solver(&g).solve(Mode::Strict).unwrap();
    assert_eq!(sol.equilibria.len(), 1);

    let g = game(&pd(), 2);
    let sol = solver(&g).solve(Mode::Strict).unwrap();
    assert!(sol.equilibria.iter().all(|e| e.mode == Mode::Strict));
}
