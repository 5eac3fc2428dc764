//! Shared helpers for integration tests, including an exhaustive
//! factorization enumerator that shares no code with the library engine.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use proptest::prelude::*;
use zslab::{FiniteAbelianGroup, GroupElement, Sequence};

/// Sets of lengths by brute force: atoms are found by testing every
/// sub-multiset for minimality, factorizations by recursion on the first
/// support element.
pub struct Oracle {
    factors: Vec<u32>,
    elems: Vec<Vec<u32>>,
    memo: HashMap<Vec<u32>, BTreeSet<u32>>,
}

impl Oracle {
    pub fn new(g: &FiniteAbelianGroup) -> Self {
        let factors = g.invariant_factors().to_vec();
        let mut elems: Vec<Vec<u32>> = vec![vec![]];
        for &n in &factors {
            elems = elems.into_iter().flat_map(|e| (0..n).map(move |c| [e.clone(), vec![c]].concat())).collect();
        }
        Oracle { factors, elems, memo: HashMap::new() }
    }

    pub fn elements(&self) -> &[Vec<u32>] {
        &self.elems
    }

    fn is_zero_sum(&self, v: &[u32]) -> bool {
        self.factors.iter().enumerate().all(|(i, &n)| {
            let s: u64 = v.iter().zip(&self.elems).map(|(&m, e)| m as u64 * e[i] as u64).sum();
            s.is_multiple_of(n as u64)
        })
    }

    fn sub_vectors(v: &[u32]) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        for &m in v {
            out = out.into_iter().flat_map(|w| (0..=m).map(move |k| [w.clone(), vec![k]].concat())).collect();
        }
        out
    }

    fn is_atom(&self, v: &[u32]) -> bool {
        let total: u32 = v.iter().sum();
        total > 0
            && self.is_zero_sum(v)
            && Self::sub_vectors(v).iter().all(|w| {
                let t: u32 = w.iter().sum();
                t == 0 || t == total || !self.is_zero_sum(w)
            })
    }

    /// `L(B)` for a multiplicity vector over [`elements`](Self::elements).
    pub fn lengths(&mut self, v: &[u32]) -> BTreeSet<u32> {
        if v.iter().all(|&m| m == 0) {
            return BTreeSet::from([0]);
        }
        if let Some(l) = self.memo.get(v) {
            return l.clone();
        }
        let first = v.iter().position(|&m| m > 0).unwrap();
        let mut out = BTreeSet::new();
        for w in Self::sub_vectors(v) {
            if w[first] == 0 || !self.is_atom(&w) {
                continue;
            }
            let rest: Vec<u32> = v.iter().zip(&w).map(|(a, b)| a - b).collect();
            for l in self.lengths(&rest) {
                out.insert(l + 1);
            }
        }
        self.memo.insert(v.to_vec(), out.clone());
        out
    }

    pub fn lengths_of(&mut self, s: &Sequence) -> BTreeSet<u32> {
        let v: Vec<u32> = self.elems.iter().map(|c| s.entries().find(|(e, _)| e.coords() == c.as_slice()).map_or(0, |x| x.1)).collect();
        self.lengths(&v)
    }

    /// All zero-sum multiplicity vectors with `1 <= |B| <= max_len`.
    pub fn zero_sums(&self, max_len: u32) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut cur = vec![0; self.elems.len()];
        self.walk(0, max_len, &mut cur, &mut out);
        out
    }

    fn walk(&self, i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == cur.len() {
            if cur.iter().any(|&m| m > 0) && self.is_zero_sum(cur) {
                out.push(cur.clone());
            }
            return;
        }
        for m in 0..=left {
            cur[i] = m;
            self.walk(i + 1, left - m, cur, out);
        }
        cur[i] = 0;
    }

    pub fn sequence(&self, g: &FiniteAbelianGroup, v: &[u32]) -> Sequence {
        let elems: Vec<GroupElement> = self.elems.iter().map(|c| g.element(&c.iter().map(|&x| x as i64).collect::<Vec<_>>()).unwrap()).collect();
        Sequence::from_pairs(g, elems.iter().zip(v.iter().copied()).filter(|(_, m)| *m > 0)).unwrap()
    }
}

pub const SMALL_GROUPS: &[&str] = &["C2", "C3", "C4", "C2^2", "C5", "C6", "C2xC4", "C2^3", "C7", "C3^2"];

pub fn group(s: &str) -> FiniteAbelianGroup {
    s.parse().unwrap()
}

/// A group from `names` together with element indices.
pub fn group_and_indices(names: &'static [&'static str], max_len: usize) -> impl Strategy<Value = (FiniteAbelianGroup, Vec<usize>)> {
    prop::sample::select(names).prop_flat_map(move |name| {
        let g = group(name);
        let order = g.order() as usize;
        (Just(g), prop::collection::vec(0..order, 0..=max_len))
    })
}

/// A zero-sum sequence: the chosen elements followed by the negative of
/// their sum.
pub fn zero_sum_from(g: &FiniteAbelianGroup, idx: &[usize]) -> Sequence {
    let mut elems: Vec<GroupElement> = idx.iter().map(|&i| g.element_at(i)).collect();
    let sum = elems.iter().fold(g.zero(), |acc, e| g.add(&acc, e).unwrap());
    if !sum.is_zero() {
        elems.push(g.neg(&sum).unwrap());
    }
    Sequence::from_elements(g, elems.iter()).unwrap()
}

pub fn to_set(l: &zslab::LengthSet) -> BTreeSet<u32> {
    l.iter().collect()
}
