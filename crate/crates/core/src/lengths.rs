//! Sets of lengths `L(B)` in the block monoid `B(G_0)`, distance sets, and
//! half-factoriality scans.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::abelian::{FiniteAbelianGroup, GroupElement};
use crate::error::{Error, Result};
use crate::zerosum::{canonical_cmp, walk_from, with_pool, AtomSet, Counts, Sequence};

/// A finite set of non-negative integers, stored as a bitset.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct LengthSet {
    words: Vec<u64>,
}

impl LengthSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(v: u32) -> Self {
        let mut s = Self::new();
        s.insert(v);
        s
    }

    /// `[lo, hi]`; empty when `lo > hi`.
    pub fn interval(lo: u32, hi: u32) -> Self {
        (lo..=hi).collect()
    }

    /// `start + step·[0, count]`.
    pub fn progression(start: u32, step: u32, count: u32) -> Self {
        (0..=count).map(|i| start + step * i).collect()
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn from_words(mut words: Vec<u64>) -> Self {
        while words.last() == Some(&0) {
            words.pop();
        }
        LengthSet { words }
    }

    pub fn insert(&mut self, v: u32) {
        let w = v as usize / 64;
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << (v % 64);
    }

    pub fn contains(&self, v: u32) -> bool {
        self.words.get(v as usize / 64).is_some_and(|w| w >> (v % 64) & 1 == 1)
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn min(&self) -> Option<u32> {
        self.words.iter().enumerate().find(|(_, &w)| w != 0).map(|(i, w)| i as u32 * 64 + w.trailing_zeros())
    }

    pub fn max(&self) -> Option<u32> {
        let last = *self.words.last()?;
        Some((self.words.len() as u32 - 1) * 64 + 63 - last.leading_zeros())
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros();
                bits &= bits - 1;
                Some(i as u32 * 64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }

    pub fn union_with(&mut self, other: &LengthSet) {
        if self.words.len() < other.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// `self ∪= other + 1`.
    pub(crate) fn union_incremented(&mut self, other: &LengthSet) {
        if other.words.is_empty() {
            return;
        }
        let need = if other.words.last().unwrap() >> 63 == 1 { other.words.len() + 1 } else { other.words.len() };
        if self.words.len() < need {
            self.words.resize(need, 0);
        }
        let mut carry = 0u64;
        for (i, &w) in other.words.iter().enumerate() {
            self.words[i] |= (w << 1) | carry;
            carry = w >> 63;
        }
        if carry != 0 {
            self.words[other.words.len()] |= carry;
        }
    }

    /// `k + L`.
    pub fn shifted(&self, k: u32) -> LengthSet {
        self.iter().map(|v| v + k).collect()
    }

    pub fn is_subset(&self, other: &LengthSet) -> bool {
        self.words.iter().enumerate().all(|(i, &w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    /// Whether the set is a non-empty integer interval.
    pub fn is_interval(&self) -> bool {
        match (self.min(), self.max()) {
            (Some(lo), Some(hi)) => self.len() as u32 == hi - lo + 1,
            _ => false,
        }
    }
}

impl FromIterator<u32> for LengthSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        let mut s = LengthSet::new();
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl fmt::Debug for LengthSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LengthSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for LengthSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_vec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LengthSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Vec::<u32>::deserialize(d)?.into_iter().collect())
    }
}

/// `Δ(L)`: the gaps between consecutive elements of `L`.
pub fn delta_of(l: &LengthSet) -> Result<LengthSet> {
    if l.is_empty() {
        return Err(Error::EmptyLengthSet);
    }
    let v = l.to_vec();
    Ok(v.windows(2).map(|w| w[1] - w[0]).collect())
}

/// `L_1 + L_2 = {k + l}`.
pub fn sumset(a: &LengthSet, b: &LengthSet) -> LengthSet {
    let mut out = LengthSet::new();
    for k in a.iter() {
        out.union_with(&b.shifted(k));
    }
    out
}

/// Memo table `B ↦ L(B)` for one atom set.
///
/// Entries are pure functions of the key, so tables built by different
/// workers over the same atom set can be merged freely.
#[derive(Clone, Debug, Default)]
pub struct LengthMemo {
    map: HashMap<Counts, LengthSet>,
}

impl LengthMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn merge(&mut self, other: LengthMemo) {
        if self.map.is_empty() {
            self.map = other.map;
        } else {
            self.map.extend(other.map);
        }
    }

    /// Entries in canonical key order.
    pub fn entries(&self) -> Vec<(&Counts, &LengthSet)> {
        let mut v: Vec<_> = self.map.iter().collect();
        v.sort_by(|a, b| canonical_cmp(a.0, b.0));
        v
    }

    pub fn insert(&mut self, key: Counts, value: LengthSet) {
        self.map.insert(key, value);
    }

    /// `L(B)` for a multiplicity vector over `atoms.subset()`; the empty set
    /// when `B` is not zero-sum.
    ///
    /// Every factorization of `B` has an atom containing any fixed element of
    /// `supp(B)`, so the union runs only over atoms through the support
    /// element contained in the fewest atoms.
    pub fn lengths(&mut self, atoms: &AtomSet, b: &Counts) -> LengthSet {
        if b.is_empty() {
            return LengthSet::singleton(0);
        }
        if let Some(v) = self.map.get(b) {
            return v.clone();
        }
        let mask = b.support_mask();
        let pivot = (0..b.width())
            .filter(|&p| b.as_slice()[p] > 0)
            .min_by_key(|&p| atoms.containing(p).len())
            .expect("non-empty");
        let mut acc = LengthSet::new();
        for &ai in atoms.containing(pivot) {
            let ai = ai as usize;
            if atoms.atom_support(ai) & !mask != 0 {
                continue;
            }
            let atom = &atoms.atom_counts()[ai];
            if let Some(rest) = b.checked_sub(atom) {
                let sub = self.lengths(atoms, &rest);
                acc.union_incremented(&sub);
            }
        }
        self.map.insert(b.clone(), acc.clone());
        acc
    }
}

/// Result of a half-factoriality scan.
#[derive(Clone, Debug, Serialize)]
pub struct HalfFactorialScan {
    pub half_factorial: bool,
    pub bound: usize,
    /// A shortest zero-sum sequence with `|L(B)| > 1`, if one was found.
    pub witness: Option<String>,
    pub witness_lengths: Option<LengthSet>,
}

/// The block monoid `B(G_0)`: its atoms and a length memo.
#[derive(Clone, Debug)]
pub struct BlockMonoid {
    atoms: AtomSet,
    memo: LengthMemo,
    jobs: usize,
}

impl BlockMonoid {
    pub fn new(group: &FiniteAbelianGroup, subset: &[GroupElement]) -> Result<Self> {
        Ok(Self::from_atoms(AtomSet::enumerate(group, subset)?))
    }

    /// `B(G)`, i.e. `G_0 = G`.
    pub fn full(group: &FiniteAbelianGroup) -> Result<Self> {
        let all: Vec<GroupElement> = group.elements().collect();
        Self::new(group, &all)
    }

    pub fn from_atoms(atoms: AtomSet) -> Self {
        BlockMonoid { atoms, memo: LengthMemo::new(), jobs: 1 }
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs.max(1);
        self
    }

    pub fn with_memo(mut self, memo: LengthMemo) -> Self {
        self.memo.merge(memo);
        self
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    pub fn atoms(&self) -> &AtomSet {
        &self.atoms
    }

    pub fn memo(&self) -> &LengthMemo {
        &self.memo
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        self.atoms.group()
    }

    pub fn subset(&self) -> &[GroupElement] {
        self.atoms.subset()
    }

    pub fn davenport(&self) -> usize {
        self.atoms.davenport()
    }

    /// `L(B)` for a zero-sum sequence supported on `G_0`.
    pub fn length_set(&mut self, b: &Sequence) -> Result<LengthSet> {
        let c = self.atoms.counts_of(b)?;
        if !b.is_zero_sum() {
            return Err(Error::NotZeroSum);
        }
        Ok(self.lengths_of(&c))
    }

    pub(crate) fn lengths_of(&mut self, c: &Counts) -> LengthSet {
        self.memo.lengths(&self.atoms, c)
    }

    /// Whether every zero-sum `B` with `|B| <= bound` has `|L(B)| = 1`; on
    /// failure, reports a shortest witness (least in canonical order among
    /// those).
    pub fn half_factorial_scan(&mut self, bound: usize) -> HalfFactorialScan {
        let best: Option<(Counts, LengthSet)> = self.scan(
            1,
            bound,
            true,
            || None,
            |best: &mut Option<(Counts, LengthSet)>, c, l| {
                if l.len() > 1 && best.as_ref().is_none_or(|(b, _)| canonical_cmp(c, b).is_lt()) {
                    *best = Some((c.clone(), l.clone()));
                }
            },
            |a, b| match (a, b) {
                (Some(x), Some(y)) => Some(if canonical_cmp(&y.0, &x.0).is_lt() { y } else { x }),
                (x, None) => x,
                (None, y) => y,
            },
        );
        HalfFactorialScan {
            half_factorial: best.is_none(),
            bound,
            witness_lengths: best.as_ref().map(|b| b.1.clone()),
            witness: best.map(|(c, _)| self.atoms.sequence_of(&c).to_string()),
        }
    }

    /// Visits every zero-sum `B` over `G_0` with `min_len <= |B| <= max_len`
    /// together with `L(B)`, folding into a per-task accumulator.
    ///
    /// With `skip_zero`, sequences divisible by `0` are left out (they only
    /// shift the length set). With more than one job the walk is split on the
    /// multiplicities of the first two elements; each task has its own memo
    /// and all memos are merged back afterwards. `merge` must be associative
    /// and insensitive to task order for results to be job-count independent.
    pub(crate) fn scan<T, I, V, M>(&mut self, min_len: usize, max_len: usize, skip_zero: bool, init: I, visit: V, merge: M) -> T
    where
        T: Send,
        I: Fn() -> T + Sync + Send,
        V: Fn(&mut T, &Counts, &LengthSet) + Sync + Send,
        M: Fn(T, T) -> T + Sync + Send,
    {
        let zero = self.atoms.zero_position();
        let positions: Vec<usize> = (0..self.atoms.subset().len()).filter(|&p| !(skip_zero && Some(p) == zero)).collect();
        let width = self.atoms.subset().len();
        let atoms = &self.atoms;
        if self.jobs <= 1 || positions.len() < 2 {
            let memo = &mut self.memo;
            let mut acc = init();
            let mut counts = Counts::zeros(width);
            walk_from(atoms, &positions, 0, 0, 0, min_len, max_len, &mut counts, &mut |c| {
                let l = memo.lengths(atoms, c);
                visit(&mut acc, c, &l);
            });
            return acc;
        }
        let ig = atoms.indexed_group();
        let (p0, p1) = (positions[0], positions[1]);
        let mut tasks = Vec::new();
        for m0 in 0..=max_len {
            for m1 in 0..=(max_len - m0) {
                tasks.push((m0, m1));
            }
        }
        let results: Vec<(T, LengthMemo)> = with_pool(self.jobs, || {
            tasks
                .par_iter()
                .map(|&(m0, m1)| {
                    let mut memo = LengthMemo::new();
                    let mut acc = init();
                    let mut counts = Counts::zeros(width);
                    counts.as_mut_slice()[p0] = m0 as u16;
                    counts.as_mut_slice()[p1] = m1 as u16;
                    let mut sigma = 0;
                    for _ in 0..m0 {
                        sigma = ig.add(sigma, atoms.group_index(p0));
                    }
                    for _ in 0..m1 {
                        sigma = ig.add(sigma, atoms.group_index(p1));
                    }
                    walk_from(atoms, &positions, 2, sigma, m0 + m1, min_len, max_len, &mut counts, &mut |c| {
                        let l = memo.lengths(atoms, c);
                        visit(&mut acc, c, &l);
                    });
                    (acc, memo)
                })
                .collect()
        });
        let mut out: Option<T> = None;
        for (acc, memo) in results {
            self.memo.merge(memo);
            out = Some(match out {
                None => acc,
                Some(prev) => merge(prev, acc),
            });
        }
        out.unwrap_or_else(init)
    }
}
