//! Sequences over finite abelian groups, minimal zero-sum sequences and the
//! Davenport constant of a subset.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abelian::{FiniteAbelianGroup, GroupElement};
use crate::error::{Error, Result};

/// A finite multiset of group elements, `S = ∏ g^{v_g(S)}`.
///
/// Multiplicities are never stored as zero; entries are kept in the element
/// order of [`FiniteAbelianGroup::elements`], which is also the canonical
/// text order `[(c..)*m,...]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sequence {
    group: FiniteAbelianGroup,
    mult: BTreeMap<GroupElement, u32>,
}

impl Sequence {
    pub fn empty(group: &FiniteAbelianGroup) -> Self {
        Sequence { group: group.clone(), mult: BTreeMap::new() }
    }

    pub fn from_elements<'a>(group: &FiniteAbelianGroup, elems: impl IntoIterator<Item = &'a GroupElement>) -> Result<Self> {
        let mut s = Self::empty(group);
        for e in elems {
            s.push(e, 1)?;
        }
        Ok(s)
    }

    pub fn from_pairs<'a>(group: &FiniteAbelianGroup, pairs: impl IntoIterator<Item = (&'a GroupElement, u32)>) -> Result<Self> {
        let mut s = Self::empty(group);
        for (e, m) in pairs {
            s.push(e, m)?;
        }
        Ok(s)
    }

    /// Multiplies in `e^m`.
    pub fn push(&mut self, e: &GroupElement, m: u32) -> Result<()> {
        if !self.group.contains(e) {
            return Err(Error::NotInGroup(e.to_string()));
        }
        if m > 0 {
            *self.mult.entry(e.clone()).or_insert(0) += m;
        }
        Ok(())
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    /// `|S|`.
    pub fn len(&self) -> usize {
        self.mult.values().map(|&m| m as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.mult.is_empty()
    }

    /// `v_g(S)`.
    pub fn multiplicity(&self, g: &GroupElement) -> u32 {
        self.mult.get(g).copied().unwrap_or(0)
    }

    pub fn support(&self) -> impl Iterator<Item = &GroupElement> {
        self.mult.keys()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&GroupElement, u32)> {
        self.mult.iter().map(|(g, &m)| (g, m))
    }

    /// `σ(S) = Σ v_g(S) g`.
    pub fn sigma(&self) -> GroupElement {
        let mut acc = self.group.zero();
        for (g, &m) in &self.mult {
            let term = self.group.scale(m as i64, g).expect("element of own group");
            acc = self.group.add(&acc, &term).expect("element of own group");
        }
        acc
    }

    pub fn is_zero_sum(&self) -> bool {
        self.sigma().is_zero()
    }

    fn same_group(&self, other: &Sequence) -> Result<()> {
        if self.group != other.group {
            return Err(Error::ShapeMismatch { expected: self.group.rank(), found: other.group.rank() });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Sequence) -> Result<Sequence> {
        self.same_group(other)?;
        let mut out = self.clone();
        for (g, &m) in &other.mult {
            *out.mult.entry(g.clone()).or_insert(0) += m;
        }
        Ok(out)
    }

    /// `S^k`.
    pub fn pow(&self, k: u32) -> Sequence {
        let mut out = Self::empty(&self.group);
        if k > 0 {
            for (g, &m) in &self.mult {
                out.mult.insert(g.clone(), m * k);
            }
        }
        out
    }

    /// Whether `self` divides `other`, i.e. `v_g(self) <= v_g(other)` for all `g`.
    pub fn divides(&self, other: &Sequence) -> bool {
        self.group == other.group && self.mult.iter().all(|(g, &m)| other.multiplicity(g) >= m)
    }

    /// `self · divisor^{-1}`.
    pub fn div(&self, divisor: &Sequence) -> Result<Sequence> {
        self.same_group(divisor)?;
        if !divisor.divides(self) {
            return Err(Error::NotADivisor);
        }
        let mut out = self.clone();
        for (g, &m) in &divisor.mult {
            let slot = out.mult.get_mut(g).expect("divisor checked");
            *slot -= m;
            if *slot == 0 {
                out.mult.remove(g);
            }
        }
        Ok(out)
    }

    /// `-S`: every `g` replaced by `-g`, multiplicities preserved.
    pub fn negate(&self) -> Sequence {
        let mut out = Self::empty(&self.group);
        for (g, &m) in &self.mult {
            let ng = self.group.neg(g).expect("element of own group");
            out.mult.insert(ng, m);
        }
        out
    }

    /// Whether `S` is a minimal zero-sum sequence.
    ///
    /// Dynamic programme over the elements of `S`: for every partial sum keep
    /// the set of subsequence lengths reaching it. `S` is an atom iff it is
    /// non-empty, zero-sum, and 0 is reached by no length in `(0, |S|)`.
    pub fn is_atom(&self) -> bool {
        let len = self.len();
        if len == 0 || !self.is_zero_sum() {
            return false;
        }
        // A zero-sum free sequence has length < |G|, so an atom has length <= |G|.
        if len as u64 > self.group.order() {
            return false;
        }
        let Ok(ig) = IndexedGroup::new(&self.group) else {
            return false;
        };
        let words = len / 64 + 1;
        let mut reach = vec![vec![0u64; words]; ig.order()];
        reach[0][0] = 1;
        for (g, &m) in &self.mult {
            let gi = self.group.index_of(g).expect("element of own group");
            for _ in 0..m {
                let prev = reach.clone();
                for (s, lens) in prev.iter().enumerate() {
                    if lens.iter().all(|&w| w == 0) {
                        continue;
                    }
                    let t = ig.add(s, gi);
                    shift_or(&mut reach[t], lens);
                }
            }
        }
        let zero = &reach[0];
        (1..len).all(|l| zero[l / 64] >> (l % 64) & 1 == 0)
    }

    /// Parses the canonical text form `[(c1,..)*m, ...]`; a bare element
    /// without `*m` counts once.
    pub fn parse(group: &FiniteAbelianGroup, s: &str) -> Result<Sequence> {
        let t = s.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::Parse { token: t.to_string(), reason: "sequence must be enclosed in [ ]".into() })?;
        let mut out = Self::empty(group);
        for entry in split_top_level(inner) {
            let entry = entry.trim();
            if entry.is_empty() {
                continue;
            }
            let (elem, mult) = match entry.rsplit_once('*') {
                Some((e, m)) => {
                    let m = m.trim().parse::<u32>().map_err(|_| Error::Parse {
                        token: entry.to_string(),
                        reason: "multiplicity must be a non-negative integer".into(),
                    })?;
                    (e, m)
                }
                None => (entry, 1),
            };
            let e = group.parse_element(elem)?;
            out.push(&e, mult)?;
        }
        Ok(out)
    }
}

/// Parses a subset written `[(1,0),(0,1)]` (brackets optional); for groups
/// of rank at most one, bare integers `1,2` are accepted too.
pub fn parse_subset(group: &FiniteAbelianGroup, s: &str) -> Result<Vec<GroupElement>> {
    let t = s.trim();
    let inner = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')).unwrap_or(t);
    split_top_level(inner)
        .into_iter()
        .map(str::trim)
        .filter(|e| !e.is_empty())
        .map(|e| group.parse_element(e))
        .collect()
}

/// Inverse of [`parse_subset`]: `[(1,0),(0,1)]`.
pub fn format_subset(subset: &[GroupElement]) -> String {
    let parts: Vec<String> = subset.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(","))
}

/// Splits on commas that are not inside parentheses.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn shift_or(dst: &mut [u64], src: &[u64]) {
    let mut carry = 0u64;
    for (d, &w) in dst.iter_mut().zip(src) {
        *d |= (w << 1) | carry;
        carry = w >> 63;
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (g, m)) in self.mult.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{g}*{m}")?;
        }
        f.write_str("]")
    }
}

impl PartialOrd for Sequence {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Sequence {
    /// Shorter sequences first, then lexicographic on canonical entries.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.mult.iter().cmp(other.mult.iter()))
            .then_with(|| self.group.cmp(&other.group))
    }
}

/// Group arithmetic on element indices with a precomputed addition table.
#[derive(Clone, Debug)]
pub(crate) struct IndexedGroup {
    n: usize,
    add: Vec<u32>,
    neg: Vec<u32>,
}

/// Largest group order for which an addition table is built.
const MAX_TABLE_ORDER: u64 = 2048;

impl IndexedGroup {
    pub(crate) fn new(group: &FiniteAbelianGroup) -> Result<Self> {
        if group.order() > MAX_TABLE_ORDER {
            return Err(Error::GroupTooLarge);
        }
        let n = group.order() as usize;
        let elems: Vec<GroupElement> = group.elements().collect();
        let mut add = vec![0u32; n * n];
        for (i, a) in elems.iter().enumerate() {
            for (j, b) in elems.iter().enumerate().skip(i) {
                let s = group.index_of(&group.add(a, b)?)? as u32;
                add[i * n + j] = s;
                add[j * n + i] = s;
            }
        }
        let neg = elems.iter().map(|a| group.index_of(&group.neg(a).unwrap()).unwrap() as u32).collect();
        Ok(IndexedGroup { n, add, neg })
    }

    #[inline]
    pub(crate) fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub(crate) fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.n + b] as usize
    }

    #[inline]
    pub(crate) fn neg(&self, a: usize) -> usize {
        self.neg[a] as usize
    }
}

/// Multiplicity vector of a sequence over the positions of a fixed subset.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Counts(Box<[u16]>);

impl Counts {
    pub fn zeros(width: usize) -> Self {
        Counts(vec![0; width].into_boxed_slice())
    }

    pub fn from_vec(v: Vec<u16>) -> Self {
        Counts(v.into_boxed_slice())
    }

    pub fn as_slice(&self) -> &[u16] {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&m| m as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&m| m == 0)
    }

    /// Bit `p` set iff position `p` occurs.
    pub fn support_mask(&self) -> u128 {
        self.0.iter().enumerate().filter(|(_, &m)| m > 0).fold(0u128, |acc, (p, _)| acc | 1 << p)
    }

    pub fn divides(&self, other: &Counts) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &Counts) -> Option<Counts> {
        let mut out = self.0.clone();
        for (o, &d) in out.iter_mut().zip(other.0.iter()) {
            *o = o.checked_sub(d)?;
        }
        Some(Counts(out))
    }

    pub fn plus(&self, other: &Counts) -> Counts {
        Counts(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn scaled(&self, k: u16) -> Counts {
        Counts(self.0.iter().map(|a| a * k).collect())
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [u16] {
        &mut self.0
    }
}

/// The complete set `A(G_0)` of minimal zero-sum sequences over a subset `G_0`.
#[derive(Clone, Debug)]
pub struct AtomSet {
    group: FiniteAbelianGroup,
    subset: Vec<GroupElement>,
    indices: Vec<usize>,
    ig: IndexedGroup,
    atoms: Vec<Counts>,
    supports: Vec<u128>,
    lengths: Vec<u16>,
    containing: Vec<Vec<u32>>,
    davenport: usize,
}

impl AtomSet {
    /// Enumerates all minimal zero-sum sequences over `subset` (duplicates
    /// are dropped; the subset is put in element order).
    pub fn enumerate(group: &FiniteAbelianGroup, subset: &[GroupElement]) -> Result<Self> {
        Self::enumerate_with_jobs(group, subset, 1)
    }

    /// As [`enumerate`](Self::enumerate), with the search split across `jobs`
    /// worker threads by the first element chosen.
    pub fn enumerate_with_jobs(group: &FiniteAbelianGroup, subset: &[GroupElement], jobs: usize) -> Result<Self> {
        let subset = canonical_subset(group, subset)?;
        let ig = IndexedGroup::new(group)?;
        let indices: Vec<usize> = subset.iter().map(|e| group.index_of(e)).collect::<Result<_>>()?;
        let order: Vec<usize> = (0..subset.len()).collect();
        let atoms = with_pool(jobs, || search_atoms(group, &ig, &indices, &order));
        Ok(Self::assemble(group.clone(), subset, indices, ig, atoms))
    }

    /// Rebuilds an atom set from stored parts, re-validating every atom.
    pub fn from_parts(group: &FiniteAbelianGroup, subset: &[GroupElement], atoms: Vec<Counts>) -> Result<Self> {
        let subset = canonical_subset(group, subset)?;
        let ig = IndexedGroup::new(group)?;
        let indices: Vec<usize> = subset.iter().map(|e| group.index_of(e)).collect::<Result<_>>()?;
        let set = Self::assemble(group.clone(), subset, indices, ig, atoms);
        for a in &set.atoms {
            if a.width() != set.subset.len() || !set.sequence_of(a).is_atom() {
                return Err(Error::Parse { token: "atom payload".into(), reason: "entry is not a minimal zero-sum sequence".into() });
            }
        }
        Ok(set)
    }

    fn assemble(group: FiniteAbelianGroup, subset: Vec<GroupElement>, indices: Vec<usize>, ig: IndexedGroup, mut atoms: Vec<Counts>) -> Self {
        let width = subset.len();
        atoms.sort_by(canonical_cmp);
        atoms.dedup();
        let supports: Vec<u128> = atoms.iter().map(Counts::support_mask).collect();
        let lengths: Vec<u16> = atoms.iter().map(|a| a.total() as u16).collect();
        let mut containing = vec![Vec::new(); width];
        for (i, a) in atoms.iter().enumerate() {
            for (p, &m) in a.as_slice().iter().enumerate() {
                if m > 0 {
                    containing[p].push(i as u32);
                }
            }
        }
        let davenport = lengths.iter().copied().max().unwrap_or(0) as usize;
        AtomSet { group, subset, indices, ig, atoms, supports, lengths, containing, davenport }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    /// `G_0` in element order; positions in [`Counts`] refer to this list.
    pub fn subset(&self) -> &[GroupElement] {
        &self.subset
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `D(G_0)`: the maximal atom length, 0 when there are no atoms.
    pub fn davenport(&self) -> usize {
        self.davenport
    }

    pub fn atom_counts(&self) -> &[Counts] {
        &self.atoms
    }

    pub fn atoms(&self) -> impl Iterator<Item = Sequence> + '_ {
        self.atoms.iter().map(|a| self.sequence_of(a))
    }

    pub(crate) fn atom_support(&self, i: usize) -> u128 {
        self.supports[i]
    }

    pub(crate) fn atom_length(&self, i: usize) -> usize {
        self.lengths[i] as usize
    }

    /// Indices of atoms in which position `p` occurs.
    pub(crate) fn containing(&self, p: usize) -> &[u32] {
        &self.containing[p]
    }

    pub(crate) fn indexed_group(&self) -> &IndexedGroup {
        &self.ig
    }

    /// Group index of subset position `p`.
    pub(crate) fn group_index(&self, p: usize) -> usize {
        self.indices[p]
    }

    pub fn position_of(&self, g: &GroupElement) -> Option<usize> {
        self.subset.binary_search(g).ok()
    }

    pub fn zero_position(&self) -> Option<usize> {
        self.subset.first().filter(|g| g.is_zero()).map(|_| 0)
    }

    /// Positions of `-G_0` when `G_0 = -G_0`.
    pub fn negation_map(&self) -> Option<Vec<usize>> {
        self.indices.iter().map(|&i| self.indices.iter().position(|&j| j == self.ig.neg(i))).collect()
    }

    pub fn counts_of(&self, s: &Sequence) -> Result<Counts> {
        if s.group() != &self.group {
            return Err(Error::ShapeMismatch { expected: self.group.rank(), found: s.group().rank() });
        }
        let mut c = Counts::zeros(self.subset.len());
        for (g, m) in s.entries() {
            let p = self.position_of(g).ok_or(Error::SupportOutsideSubset)?;
            c.as_mut_slice()[p] = u16::try_from(m).map_err(|_| Error::OutOfContract("multiplicity above 65535".into()))?;
        }
        Ok(c)
    }

    pub fn sequence_of(&self, c: &Counts) -> Sequence {
        let mut s = Sequence::empty(&self.group);
        for (p, &m) in c.as_slice().iter().enumerate() {
            if m > 0 {
                s.push(&self.subset[p], m as u32).expect("subset element");
            }
        }
        s
    }

    /// Group index of `σ` of a multiplicity vector.
    #[cfg(test)]
    pub(crate) fn sigma_index(&self, c: &Counts) -> usize {
        let mut acc = 0;
        for (p, &m) in c.as_slice().iter().enumerate() {
            for _ in 0..m {
                acc = self.ig.add(acc, self.indices[p]);
            }
        }
        acc
    }
}

/// Orders multiplicity vectors like the corresponding [`Sequence`]s.
pub(crate) fn canonical_cmp(a: &Counts, b: &Counts) -> std::cmp::Ordering {
    let entries = |c: &Counts| -> Vec<(usize, u16)> {
        c.as_slice().iter().enumerate().filter(|(_, &m)| m > 0).map(|(p, &m)| (p, m)).collect()
    };
    a.total().cmp(&b.total()).then_with(|| entries(a).cmp(&entries(b)))
}

fn canonical_subset(group: &FiniteAbelianGroup, subset: &[GroupElement]) -> Result<Vec<GroupElement>> {
    for g in subset {
        if !group.contains(g) {
            return Err(Error::NotInGroup(g.to_string()));
        }
    }
    let mut v = subset.to_vec();
    v.sort();
    v.dedup();
    if v.len() > 128 {
        return Err(Error::SubsetTooLarge(v.len()));
    }
    Ok(v)
}

pub(crate) fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    if jobs <= 1 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Depth-first search over zero-sum free sequences in nondecreasing position
/// order (`order` lists the positions in traversal order).
///
/// Invariant: the partial sequence `P` is zero-sum free and `sums` holds the
/// sums of all its subsequences, the empty one included. Appending `g`:
/// if `σ(P) + g = 0` then `Pg` is an atom (a proper zero-sum subsequence of
/// `Pg` would leave a non-empty zero-sum complement inside `P`); otherwise
/// `Pg` stays zero-sum free iff `-g` is not a subsequence sum of `P`.
fn search_atoms(group: &FiniteAbelianGroup, ig: &IndexedGroup, indices: &[usize], order: &[usize]) -> Vec<Counts> {
    let width = indices.len();
    let words = ig.order() / 64 + 1;
    let cap = group.order() as usize;
    let orders: Vec<u64> = indices.iter().map(|&i| group.order_of(&group.element_at(i)).unwrap()).collect();

    struct Frame<'a> {
        ig: &'a IndexedGroup,
        indices: &'a [usize],
        order: &'a [usize],
        orders: &'a [u64],
        words: usize,
        cap: usize,
        out: Vec<Counts>,
    }

    fn dfs(fr: &mut Frame<'_>, start: usize, sums: &[u64], sigma: usize, len: usize, counts: &mut Counts) {
        for k in start..fr.order.len() {
            let p = fr.order[k];
            let g = fr.indices[p];
            if counts.as_slice()[p] as u64 >= fr.orders[p] {
                continue;
            }
            let next_sigma = fr.ig.add(sigma, g);
            counts.as_mut_slice()[p] += 1;
            if next_sigma == 0 {
                fr.out.push(counts.clone());
            } else if len + 1 < fr.cap && sums[fr.ig.neg(g) / 64] >> (fr.ig.neg(g) % 64) & 1 == 0 {
                let mut next = sums.to_vec();
                for (w, &word) in sums.iter().enumerate() {
                    let mut bits = word;
                    while bits != 0 {
                        let b = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        let t = fr.ig.add(w * 64 + b, g);
                        next[t / 64] |= 1 << (t % 64);
                    }
                }
                debug_assert_eq!(next.len(), fr.words);
                dfs(fr, k, &next, next_sigma, len + 1, counts);
            }
            counts.as_mut_slice()[p] -= 1;
        }
    }

    let mut empty_sums = vec![0u64; words];
    empty_sums[0] = 1;
    let first_choices: Vec<usize> = (0..order.len()).collect();
    first_choices
        .par_iter()
        .map(|&k| {
            let mut fr = Frame { ig, indices, order, orders: &orders, words, cap, out: Vec::new() };
            let mut counts = Counts::zeros(width);
            // Restrict the first step to order[k] by running the loop body once.
            let p = order[k];
            let g = indices[p];
            counts.as_mut_slice()[p] = 1;
            if g == 0 {
                fr.out.push(counts.clone());
            } else {
                let mut sums = empty_sums.clone();
                sums[g / 64] |= 1 << (g % 64);
                dfs(&mut fr, k, &sums, g, 1, &mut counts);
            }
            fr.out
        })
        .flatten()
        .collect()
}

/// `D(G_0)` by exhaustive enumeration.
pub fn davenport(group: &FiniteAbelianGroup, subset: &[GroupElement]) -> Result<usize> {
    Ok(AtomSet::enumerate(group, subset)?.davenport())
}

/// Calls `visit` on every zero-sum multiplicity vector over `positions` of
/// `atoms.subset()` with length in `[min_len, max_len]`. Vectors are built
/// in place; `visit` must clone what it keeps.
#[cfg(test)]
pub(crate) fn walk_zero_sums(
    atoms: &AtomSet,
    positions: &[usize],
    min_len: usize,
    max_len: usize,
    visit: &mut dyn FnMut(&Counts),
) {
    let mut counts = Counts::zeros(atoms.subset().len());
    walk_from(atoms, positions, 0, 0, 0, min_len, max_len, &mut counts, visit);
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn walk_from(
    atoms: &AtomSet,
    positions: &[usize],
    k: usize,
    sigma: usize,
    len: usize,
    min_len: usize,
    max_len: usize,
    counts: &mut Counts,
    visit: &mut dyn FnMut(&Counts),
) {
    if k == positions.len() {
        if sigma == 0 && len >= min_len && len > 0 {
            visit(counts);
        }
        return;
    }
    let p = positions[k];
    let g = atoms.group_index(p);
    let ig = atoms.indexed_group();
    let mut s = sigma;
    let mut m = 0;
    loop {
        counts.as_mut_slice()[p] = m as u16;
        walk_from(atoms, positions, k + 1, s, len + m, min_len, max_len, counts, visit);
        if len + m >= max_len {
            break;
        }
        m += 1;
        s = ig.add(s, g);
    }
    counts.as_mut_slice()[p] = 0;
}
