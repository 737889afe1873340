use std::collections::{BTreeSet, VecDeque};

use branchkit::permgroup::{normalizer, tau_action};
use branchkit::scenario::{catalog_group, catalog_names};
use branchkit::{Limits, Permutation, PermutationGroup};
use proptest::prelude::*;

/// All elements of `⟨gens⟩` by breadth-first closure.
fn closure(degree: usize, gens: &[Permutation]) -> BTreeSet<Permutation> {
    let mut seen = BTreeSet::from([Permutation::identity(degree)]);
    let mut queue = VecDeque::from([Permutation::identity(degree)]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = x.then(g);
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen
}

#[test]
fn catalog_orders_match_closure() {
    for name in catalog_names().filter(|n| *n != "A7") {
        let g = catalog_group(name).unwrap();
        let all = closure(g.degree(), g.generators());
        assert_eq!(g.order(), all.len() as u128, "{name}");
        let listed: BTreeSet<Permutation> = g.elements(Limits::default()).unwrap().into_iter().collect();
        assert_eq!(listed, all, "{name}");
    }
}

#[test]
fn tau_actions_are_faithful_transitive_non_regular() {
    for name in ["A5", "A6", "PSL27"] {
        let g = catalog_group(name).unwrap();
        let tau = tau_action(&g, Limits::default()).unwrap();
        assert!(tau.point_count() >= 5, "{name}");
        let image = tau.image_group().unwrap();
        assert_eq!(image.order(), g.order(), "{name}");
        assert!(image.is_transitive() && !image.is_regular(), "{name}");
    }
}

#[test]
fn normalizer_by_brute_force() {
    let g = catalog_group("A5").unwrap();
    let h = PermutationGroup::generated(5, &[Permutation::parse_cycles("(0 1 2)", 5).unwrap()]).unwrap();
    let hs = closure(5, h.generators());
    let expected = closure(5, g.generators())
        .into_iter()
        .filter(|x| hs.iter().all(|y| hs.contains(&y.conjugate_by(x))))
        .count();
    assert_eq!(normalizer(&g, &h, Limits::default()).unwrap().order(), expected as u128);
}

fn perm6() -> impl Strategy<Value = Permutation> {
    Just((0..6).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::from_images(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn order_and_membership_match_closure(gens in prop::collection::vec(perm6(), 1..4), probe in perm6()) {
        let g = PermutationGroup::generated(6, &gens).unwrap();
        let all = closure(6, &gens);
        prop_assert_eq!(g.order(), all.len() as u128);
        prop_assert_eq!(g.contains(&probe).unwrap(), all.contains(&probe));
    }
}
