use coalform_core::{count_partitions, enumerate_partitions, is_nested, Partition, PlayerId};
use proptest::prelude::*;

/// Naive oracle: brute force over all label vectors, keep canonical ones.
fn brute_count(n: usize, k: usize) -> usize {
    let mut seen = std::collections::BTreeSet::new();
    let total = n.pow(n as u32);
    for mut code in 0..total {
        let mut labels = vec![0; n];
        for l in labels.iter_mut() {
            *l = code % n;
            code /= n;
        }
        let p = Partition::from_labels(&labels).unwrap();
        if p.max_block_size() <= k {
            seen.insert(p.to_string());
        }
    }
    seen.len()
}

#[test]
fn matches_brute_force_for_small_n() {
    for n in 2..=6 {
        for k in 1..=n {
            let fam = enumerate_partitions(n, k).unwrap();
            assert_eq!(fam.len(), brute_count(n, k), "n={n} k={k}");
        }
    }
}

#[test]
fn bell_numbers_at_full_cap() {
    let bell = [1u128, 1, 2, 5, 15, 52, 203, 877, 4140];
    for (n, &b) in bell.iter().enumerate().skip(2) {
        assert_eq!(count_partitions(n, n).unwrap(), b);
    }
}

#[test]
fn strictly_growing_until_n() {
    for n in 2..=7 {
        let counts: Vec<_> = (1..=n)
            .map(|k| enumerate_partitions(n, k).unwrap().len())
            .collect();
        assert!(counts.windows(2).all(|w| w[0] < w[1]), "{counts:?}");
    }
}

#[test]
fn families_nest_and_preserve_order() {
    for n in 2..=6 {
        for k in 1..n {
            let small = enumerate_partitions(n, k).unwrap();
            let large = enumerate_partitions(n, k + 1).unwrap();
            assert!(is_nested(&small, &large).unwrap());
            let positions: Vec<_> = small.iter().map(|p| large.index_of(p).unwrap()).collect();
            assert!(positions.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

#[test]
fn parse_rejects_malformed() {
    for bad in ["", "0,0|1", "0|2", "0,1|", "a|b", "1,0|2,3,4,x"] {
        assert!(bad.parse::<Partition>().is_err(), "{bad:?}");
    }
    assert!(Partition::parse("0,1", 3).is_err());
}

#[test]
fn canonicalizes_on_parse() {
    let p: Partition = "3,2|1,0".parse().unwrap();
    assert_eq!(p.to_string(), "0,1|2,3");
    assert_eq!(
        p.coalition_of(PlayerId(3)).members().collect::<Vec<_>>(),
        [2, 3]
    );
}

proptest! {
    #[test]
    fn enumeration_matches_recurrence(n in 2usize..=8, k_off in 0usize..8) {
        let k = 1 + k_off % n;
        let fam = enumerate_partitions(n, k).unwrap();
        prop_assert_eq!(fam.len() as u128, count_partitions(n, k).unwrap());
        for p in fam.iter() {
            prop_assert!(p.max_block_size() <= k);
            let round: Partition = p.to_string().parse().unwrap();
            prop_assert_eq!(&round, p);
        }
    }

    #[test]
    fn labels_round_trip(labels in proptest::collection::vec(0usize..5, 2..8)) {
        let p = Partition::from_labels(&labels).unwrap();
        let q = Partition::from_labels(&p.labels()).unwrap();
        prop_assert_eq!(&p, &q);
        for (i, &a) in labels.iter().enumerate() {
            for (j, &b) in labels.iter().enumerate() {
                prop_assert_eq!(a == b, p.coalition_of(PlayerId(i)).contains(j));
            }
        }
    }
}
