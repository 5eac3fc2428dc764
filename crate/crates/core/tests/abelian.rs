mod common;

use common::{group, SMALL_GROUPS};
use proptest::prelude::*;
use zslab::{FiniteAbelianGroup, GroupElement};

proptest! {
    #[test]
    fn normal_form_is_idempotent(orders in prop::collection::vec(2u32..13, 1..4)) {
        let g = FiniteAbelianGroup::new(&orders).unwrap();
        let f = g.invariant_factors();
        prop_assert!(f.windows(2).all(|w| w[1] % w[0] == 0));
        prop_assert!(f.iter().all(|&n| n >= 2));
        prop_assert_eq!(FiniteAbelianGroup::new(f).unwrap(), g.clone());
        prop_assert_eq!(g.order(), orders.iter().map(|&n| n as u64).product::<u64>());
        let reparsed: FiniteAbelianGroup = g.to_string().parse().unwrap();
        prop_assert_eq!(reparsed, g);
    }

    #[test]
    fn group_axioms(name in prop::sample::select(SMALL_GROUPS), a in 0usize..64, b in 0usize..64, c in 0usize..64) {
        let g = group(name);
        let n = g.order() as usize;
        let (x, y, z) = (g.element_at(a % n), g.element_at(b % n), g.element_at(c % n));
        let add = |p: &GroupElement, q: &GroupElement| g.add(p, q).unwrap();
        prop_assert_eq!(add(&x, &y), add(&y, &x));
        prop_assert_eq!(add(&add(&x, &y), &z), add(&x, &add(&y, &z)));
        prop_assert_eq!(add(&x, &g.zero()), x.clone());
        prop_assert!(add(&x, &g.neg(&x).unwrap()).is_zero());
        prop_assert_eq!(g.index_of(&x).unwrap(), a % n);
    }
}

#[test]
fn order_and_exponent_match_enumeration() {
    for name in SMALL_GROUPS.iter().chain(&["C2^2xC6", "C4xC8", "C12"]) {
        let g = group(name);
        let elems: Vec<_> = g.elements().collect();
        assert_eq!(elems.len() as u64, g.order());
        let exp = elems.iter().map(|e| g.order_of(e).unwrap()).max().unwrap();
        assert_eq!(exp, g.exponent() as u64, "{name}");
        assert!(g.d_star() <= g.order());
    }
    for n in 2..=20 {
        assert_eq!(FiniteAbelianGroup::cyclic(n).unwrap().d_star(), n as u64);
    }
}

#[test]
fn grammar_variants() {
    assert_eq!(group("C2^2xC12"), group("2,2,12"));
    assert_eq!(group("C6xC4"), group("C2xC12"));
    assert_eq!(group("C3+C3"), group("C3^2"));
}
