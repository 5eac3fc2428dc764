mod common;

use std::collections::BTreeSet;

use common::{group, group_and_indices, zero_sum_from, Oracle, SMALL_GROUPS};
use proptest::prelude::*;
use zslab::zerosum::davenport;
use zslab::{AtomSet, GroupElement, Sequence};

#[test]
fn atoms_agree_with_oracle_and_checker() {
    for name in ["C2", "C3", "C4", "C2^2", "C5", "C6", "C2xC4"] {
        let g = group(name);
        let set = AtomSet::enumerate(&g, &g.elements().collect::<Vec<_>>()).unwrap();
        let mut oracle = Oracle::new(&g);
        let d = set.davenport() as u32;
        let atom_vectors: Vec<Vec<u32>> =
            oracle.zero_sums(d + 1).into_iter().filter(|v| oracle.lengths(v) == BTreeSet::from([1])).collect();
        let from_oracle: BTreeSet<Sequence> = atom_vectors.iter().map(|v| oracle.sequence(&g, v)).collect();
        let listed: BTreeSet<Sequence> = set.atoms().collect();
        assert_eq!(listed.len(), set.len(), "{name}: duplicates");
        assert_eq!(listed, from_oracle, "{name}");
        assert!(listed.iter().all(Sequence::is_atom));
    }
}

#[test]
fn davenport_at_least_d_star() {
    for name in SMALL_GROUPS {
        let g = group(name);
        let d = davenport(&g, &g.elements().collect::<Vec<_>>()).unwrap() as u64;
        assert!(d >= g.d_star(), "{name}");
    }
}

#[test]
fn negation_closure_and_zero() {
    for name in SMALL_GROUPS {
        let g = group(name);
        let set = AtomSet::enumerate(&g, &g.elements().collect::<Vec<_>>()).unwrap();
        let atoms: BTreeSet<Sequence> = set.atoms().collect();
        let zero = Sequence::from_elements(&g, [g.zero()].iter()).unwrap();
        assert!(atoms.contains(&zero));
        for a in &atoms {
            assert!(atoms.contains(&a.negate()), "{name}: {a}");
            if a.multiplicity(&g.zero()) > 0 {
                assert_eq!(a, &zero);
            }
        }
    }
}

proptest! {
    #[test]
    fn enumeration_is_order_independent(
        (g, idx) in group_and_indices(&["C4", "C2^2", "C5", "C6", "C2xC4", "C2^3"], 8),
        seed in any::<u64>(),
    ) {
        let mut subset: Vec<GroupElement> = idx.iter().map(|&i| g.element_at(i)).collect();
        subset.dedup();
        prop_assume!(!subset.is_empty());
        let a: BTreeSet<Sequence> = AtomSet::enumerate(&g, &subset).unwrap().atoms().collect();
        // deterministic shuffle
        let mut shuffled = subset.clone();
        let mut s = seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let b: BTreeSet<Sequence> = AtomSet::enumerate_with_jobs(&g, &shuffled, 2).unwrap().atoms().collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn sequence_text_round_trip((g, idx) in group_and_indices(SMALL_GROUPS, 10)) {
        let s = zero_sum_from(&g, &idx);
        prop_assert!(s.is_zero_sum());
        let t = s.to_string();
        let back = Sequence::parse(&g, &t).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.to_string(), t);
        prop_assert_eq!(s.len(), s.entries().map(|(_, m)| m as usize).sum::<usize>());
        prop_assert!(s.entries().all(|(_, m)| m > 0));
    }
}
