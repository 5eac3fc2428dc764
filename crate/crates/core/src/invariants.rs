//! Unions of sets of lengths `U_k`, `U_M` with their extrema `λ`, `ρ`, the
//! elasticity, `ℸ`, and observed distance sets.

use std::collections::{BTreeMap, HashSet};

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lengths::{delta_of, BlockMonoid, LengthSet};
use crate::zerosum::{canonical_cmp, AtomSet, Counts};

/// A computed invariant of `B(G_0)` with its witnesses.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub invariant: String,
    pub group: String,
    pub subset: Vec<String>,
    /// `k` for `U_k`, the set `M` for `U_M`, empty otherwise.
    pub parameter: Vec<u32>,
    pub lengths: Option<LengthSet>,
    pub value: Option<u64>,
    /// Canonical text forms of witnessing sequences.
    pub witnesses: Vec<String>,
    /// True when the value is backed by a complete enumeration.
    pub exact: bool,
    /// Search bound for observed (non-exact) quantities.
    pub bound: Option<usize>,
}

impl InvariantReport {
    fn new(m: &BlockMonoid, invariant: &str) -> Self {
        InvariantReport {
            invariant: invariant.to_string(),
            group: m.group().to_string(),
            subset: m.subset().iter().map(ToString::to_string).collect(),
            parameter: Vec::new(),
            lengths: None,
            value: None,
            witnesses: Vec::new(),
            exact: true,
            bound: None,
        }
    }

    /// `λ`: the minimum of the reported union.
    pub fn min(&self) -> Option<u32> {
        self.lengths.as_ref().and_then(LengthSet::min)
    }

    /// `ρ`: the maximum of the reported union.
    pub fn max(&self) -> Option<u32> {
        self.lengths.as_ref().and_then(LengthSet::max)
    }
}

/// Observed distances `∪ Δ(L(B))` over `|B| <= bound`, each with the least
/// witness in canonical order.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaReport {
    pub group: String,
    pub subset: Vec<String>,
    pub distances: LengthSet,
    pub witnesses: BTreeMap<u32, String>,
    pub bound: usize,
    pub exact: bool,
}

impl DeltaReport {
    pub fn min(&self) -> Option<u32> {
        self.distances.min()
    }
}

/// One row of the `λ` formula comparison.
#[derive(Clone, Debug, Serialize)]
pub struct LambdaRow {
    pub m: u32,
    pub computed: u32,
    pub formula: u32,
    pub witness: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaCheck {
    pub group: String,
    pub davenport: usize,
    /// `ρ_{2k+1}` for `k = 0, 1, ...` as used by the formula.
    pub rho_odd: Vec<u32>,
    pub rows: Vec<LambdaRow>,
}

impl LambdaCheck {
    pub fn mismatches(&self) -> impl Iterator<Item = &LambdaRow> {
        self.rows.iter().filter(|r| r.computed != r.formula)
    }

    pub fn all_match(&self) -> bool {
        self.mismatches().next().is_none()
    }
}

#[derive(Default)]
struct UnionDetail {
    union: LengthSet,
    /// Least `B` (canonical order) with each length in `L(B)`.
    per_length: BTreeMap<u32, Counts>,
    lo: Option<Counts>,
    hi: Option<Counts>,
}

/// Upper bound for `max L(B)`.
///
/// With `v` copies of 0 and `B'` the rest, a factorization of `B'` into `t`
/// atoms of length 2 and `s` longer atoms has `2t + 3s <= |B'|` and `t` at
/// most the number `p` of disjoint pairs `g(-g)` in `B'`, whence
/// `t + s <= (|B'| + p) / 3` as well as `t + s <= |B'| / 2`.
pub(crate) fn max_length_upper_bound(atoms: &AtomSet, neg: &[usize], b: &Counts) -> u32 {
    let zero = atoms.zero_position();
    let v = zero.map_or(0, |z| b.as_slice()[z] as u32);
    let rest = b.total() as u32 - v;
    let mut pairs = 0u32;
    for (p, &m) in b.as_slice().iter().enumerate() {
        if Some(p) == zero || m == 0 {
            continue;
        }
        let q = neg[p];
        if q == p {
            pairs += m as u32 / 2;
        } else if p < q {
            pairs += m.min(b.as_slice()[q]) as u32;
        }
    }
    v + (rest / 2).min((rest + pairs) / 3)
}

impl BlockMonoid {
    /// All distinct products of exactly `k` atoms, in canonical order.
    ///
    /// `keep_last` filters the final level given (product, its length); the
    /// final level is built by pairing each level-`k-1` product only with
    /// atoms at least `min_last_len(|p|)` long.
    fn products(&self, k: u32, min_last_len: &dyn Fn(usize) -> usize, keep_last: &dyn Fn(&Counts) -> bool) -> Vec<Counts> {
        let atoms = self.atoms();
        let width = atoms.subset().len();
        if k == 0 {
            return vec![Counts::zeros(width)];
        }
        let mut level: Vec<Counts> = vec![Counts::zeros(width)];
        for step in 1..=k {
            let last = step == k;
            let mut next: HashSet<Counts> = HashSet::new();
            for p in &level {
                let need = if last { min_last_len(p.total()) } else { 0 };
                // atoms are sorted by length, so walk from the longest down
                for (ai, a) in atoms.atom_counts().iter().enumerate().rev() {
                    if atoms.atom_length(ai) < need {
                        break;
                    }
                    let q = p.plus(a);
                    if !last || keep_last(&q) {
                        next.insert(q);
                    }
                }
            }
            let mut v: Vec<Counts> = next.into_iter().collect();
            v.sort_by(canonical_cmp);
            level = v;
        }
        level
    }

    /// `U_k(G_0)`: the union of all `L(B)` with `k ∈ L(B)`; `λ_k` and `ρ_k`
    /// are its minimum and maximum. Witnesses are, in order, the least
    /// sequences attaining `λ_k` and `ρ_k`.
    pub fn u_k(&mut self, k: u32) -> InvariantReport {
        let mut r = self.union_over(&[k]);
        r.invariant = "U_k".into();
        r
    }

    /// `U_M(G_0)`: the union of all `L(B)` with `M ⊆ L(B)`.
    ///
    /// Such `B` are products of `min M` atoms, so only those are visited,
    /// after discarding products whose length bound rules out `max M`.
    pub fn u_m(&mut self, m_set: &[u32]) -> Result<InvariantReport> {
        if m_set.is_empty() {
            return Err(Error::OutOfContract("M must be non-empty".into()));
        }
        let mut r = self.union_over(m_set);
        r.invariant = "U_M".into();
        Ok(r)
    }

    fn union_over(&mut self, m_set: &[u32]) -> InvariantReport {
        let u = self.union_detail(m_set);
        let mut r = InvariantReport::new(self, "U_M");
        r.parameter = m_set.iter().copied().collect::<LengthSet>().to_vec();
        r.value = u.union.max().map(u64::from);
        r.witnesses = [u.lo, u.hi].into_iter().flatten().map(|b| self.atoms().sequence_of(&b).to_string()).collect();
        r.lengths = Some(u.union);
        r
    }

    fn union_detail(&mut self, m_set: &[u32]) -> UnionDetail {
        let m: LengthSet = m_set.iter().copied().collect();
        let (kmin, kmax) = (m.min().unwrap(), m.max().unwrap());
        let neg = self.atoms().negation_map();
        let products = {
            let atoms = self.atoms();
            let keep = |b: &Counts| match &neg {
                Some(neg) => max_length_upper_bound(atoms, neg, b) >= kmax,
                None => true,
            };
            // a zero-free B has max L(B) <= |B|/2
            let zero_free = atoms.zero_position().is_none();
            let need = |len: usize| if zero_free && kmax > kmin { (2 * kmax as usize).saturating_sub(len) } else { 0 };
            self.products(kmin, &need, &keep)
        };
        let mut out = UnionDetail::default();
        let (mut lo_v, mut hi_v) = (u32::MAX, 0);
        // products are in canonical order, so first hits are the least witnesses
        for b in products {
            let l = self.lengths_of(&b);
            if !m.is_subset(&l) {
                continue;
            }
            out.union.union_with(&l);
            let (mn, mx) = (l.min().unwrap(), l.max().unwrap());
            for v in l.iter() {
                out.per_length.entry(v).or_insert_with(|| b.clone());
            }
            if mn < lo_v {
                lo_v = mn;
                out.lo = Some(b.clone());
            }
            if mx > hi_v || out.hi.is_none() {
                hi_v = mx;
                out.hi = Some(b);
            }
        }
        out
    }

    /// `ρ_k` with a witness, `None` when no product of `k` atoms exists.
    pub fn rho_k(&mut self, k: u32) -> Option<u32> {
        self.u_k(k).max()
    }

    pub fn lambda_k(&mut self, k: u32) -> Option<u32> {
        self.u_k(k).min()
    }

    /// `max_{k <= k_max} ρ_k / k`; `None` without atoms.
    pub fn elasticity_up_to(&mut self, k_max: u32) -> Option<Ratio<u64>> {
        (1..=k_max).filter_map(|k| self.rho_k(k).map(|r| Ratio::new(r as u64, k as u64))).max()
    }

    /// `ℸ(G_0) = max over atom pairs of min(L(uv) \ {2})`, with `min ∅ = 0`.
    pub fn daleth(&mut self) -> InvariantReport {
        let atoms: Vec<Counts> = self.atoms().atom_counts().to_vec();
        let mut best: Option<(u32, usize, usize)> = None;
        for i in 0..atoms.len() {
            for j in i..atoms.len() {
                let l = self.lengths_of(&atoms[i].plus(&atoms[j]));
                let v = l.iter().find(|&x| x != 2).unwrap_or(0);
                if best.is_none_or(|(b, _, _)| v > b) {
                    best = Some((v, i, j));
                }
            }
        }
        let mut r = InvariantReport::new(self, "daleth");
        r.value = Some(best.map_or(0, |b| b.0 as u64));
        if let Some((_, i, j)) = best.filter(|b| b.0 > 0) {
            r.witnesses = vec![
                self.atoms().sequence_of(&atoms[i]).to_string(),
                self.atoms().sequence_of(&atoms[j]).to_string(),
            ];
        }
        r
    }

    /// `∪ Δ(L(B))` over zero-sum `B` with `|B| <= bound`; a subset of `Δ(G_0)`
    /// that grows with the bound.
    pub fn delta_observed(&mut self, bound: usize) -> DeltaReport {
        type Acc = BTreeMap<u32, Counts>;
        let found: Acc = self.scan(
            1,
            bound,
            true,
            Acc::new,
            |acc: &mut Acc, c, l| {
                if l.len() < 2 {
                    return;
                }
                for d in delta_of(l).expect("non-empty").iter() {
                    match acc.get(&d) {
                        Some(w) if !canonical_cmp(c, w).is_lt() => {}
                        _ => {
                            acc.insert(d, c.clone());
                        }
                    }
                }
            },
            |mut a, b| {
                for (d, w) in b {
                    match a.get(&d) {
                        Some(v) if !canonical_cmp(&w, v).is_lt() => {}
                        _ => {
                            a.insert(d, w);
                        }
                    }
                }
                a
            },
        );
        DeltaReport {
            group: self.group().to_string(),
            subset: self.subset().iter().map(ToString::to_string).collect(),
            distances: found.keys().copied().collect(),
            witnesses: found.iter().map(|(&d, c)| (d, self.atoms().sequence_of(c).to_string())).collect(),
            bound,
            exact: false,
        }
    }

    /// Compares `λ_m = min U_m` with the closed formula
    /// `λ_{kD+j} = 2k` (j = 0), `2k+1` (1 <= j <= ρ_{2k+1} - kD), `2k+2` otherwise,
    /// for all `1 <= m <= k_max·D`. Meaningful for `G_0 = G`.
    pub fn lambda_formula_check(&mut self, k_max: u32) -> LambdaCheck {
        let d = self.davenport() as u32;
        let rho_odd: Vec<u32> = (0..k_max).map(|k| self.rho_k(2 * k + 1).unwrap_or(0)).collect();
        let top = k_max * d;
        // ℓ ∈ U_m iff m ∈ U_ℓ, so λ_m is the least ℓ whose union reaches m;
        // only small ℓ are ever needed
        let mut lambda: BTreeMap<u32, (u32, Counts)> = BTreeMap::new();
        let mut l = 1;
        while (lambda.len() as u32) < top && l <= top {
            let u = self.union_detail(&[l]);
            for (&m, b) in u.per_length.range(1..=top) {
                lambda.entry(m).or_insert_with(|| (l, b.clone()));
            }
            l += 1;
        }
        let mut rows = Vec::new();
        for m in 1..=top {
            let (k, j) = (m / d, m % d);
            let formula = if j == 0 {
                2 * k
            } else if j <= rho_odd[k as usize] - k * d {
                2 * k + 1
            } else {
                2 * k + 2
            };
            let (computed, witness) = match lambda.get(&m) {
                Some((v, b)) => (*v, self.atoms().sequence_of(b).to_string()),
                None => (0, String::new()),
            };
            rows.push(LambdaRow { m, computed, formula, witness });
        }
        LambdaCheck { group: self.group().to_string(), davenport: self.davenport(), rho_odd, rows }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::FiniteAbelianGroup;

    fn full(orders: &[u32]) -> BlockMonoid {
        BlockMonoid::full(&FiniteAbelianGroup::new(orders).unwrap()).unwrap()
    }

    fn set(v: &[u32]) -> LengthSet {
        v.iter().copied().collect()
    }

    #[test]
    fn u_k_small() {
        let mut m = full(&[3]);
        assert_eq!(m.u_k(2).lengths.unwrap(), set(&[2, 3]));
        assert_eq!(m.u_k(1).lengths.unwrap(), set(&[1]));
        assert_eq!(m.u_k(0).lengths.unwrap(), set(&[0]));
        let mut c5 = full(&[5]);
        assert_eq!(c5.rho_k(3), Some(6));
    }

    #[test]
    fn u_k_witnesses_attain_extrema() {
        let mut m = full(&[2, 4]);
        let r = m.u_k(3);
        assert_eq!(r.witnesses.len(), 2);
        let g = m.group().clone();
        let lo = crate::zerosum::Sequence::parse(&g, &r.witnesses[0]).unwrap();
        let hi = crate::zerosum::Sequence::parse(&g, &r.witnesses[1]).unwrap();
        let l_lo = m.length_set(&lo).unwrap();
        let l_hi = m.length_set(&hi).unwrap();
        assert!(l_lo.contains(3) && l_hi.contains(3));
        assert_eq!(l_lo.min(), r.min());
        assert_eq!(l_hi.max(), r.max());
    }

    #[test]
    fn u_m_examples() {
        assert_eq!(full(&[5]).u_m(&[2, 5]).unwrap().lengths.unwrap(), set(&[2, 5]));
        assert_eq!(full(&[3, 3]).u_m(&[2, 5]).unwrap().lengths.unwrap(), LengthSet::interval(2, 5));
        assert_eq!(full(&[2, 2, 2]).u_m(&[2, 4]).unwrap().lengths.unwrap(), set(&[2, 4]));
        assert!(full(&[3]).u_m(&[]).is_err());
        // nothing contains both 2 and 4 over C3
        assert!(full(&[3]).u_m(&[2, 4]).unwrap().lengths.unwrap().is_empty());
    }

    #[test]
    fn pruned_products_agree_with_unpruned() {
        for orders in [&[6][..], &[2, 4][..], &[2, 2, 2][..]] {
            let mut m = full(orders);
            let d = m.davenport() as u32;
            for mset in [vec![2, d], vec![2, 3], vec![3, d + 1]] {
                let pruned = m.u_m(&mset).unwrap().lengths.unwrap();
                let all = m.products(mset[0], &|_| 0, &|_| true);
                let mut naive = LengthSet::new();
                let mm: LengthSet = mset.iter().copied().collect();
                for b in all {
                    let l = m.lengths_of(&b);
                    if mm.is_subset(&l) {
                        naive.union_with(&l);
                    }
                }
                assert_eq!(pruned, naive, "{orders:?} {mset:?}");
            }
        }
    }

    #[test]
    fn daleth_examples() {
        assert_eq!(full(&[3]).daleth().value, Some(3));
        let g = FiniteAbelianGroup::new(&[7]).unwrap();
        let single = vec![g.element(&[2]).unwrap()];
        assert_eq!(BlockMonoid::new(&g, &single).unwrap().daleth().value, Some(0));
    }

    #[test]
    fn independent_set_has_no_daleth_and_one_distance() {
        let g = FiniteAbelianGroup::new(&[3, 3, 3, 3]).unwrap();
        let mut subset = vec![g.element(&[-1, -1, -1, -1]).unwrap()];
        subset.extend((0..4).map(|i| g.basis_element(i)));
        let mut m = BlockMonoid::new(&g, &subset).unwrap();
        assert_eq!(m.daleth().value, Some(0));
        assert_eq!(m.delta_observed(20).distances, set(&[2]));
    }

    #[test]
    fn delta_observed_examples() {
        assert_eq!(full(&[5]).delta_observed(15).distances, set(&[1, 2, 3]));
        let mut small = full(&[5]);
        let a = small.delta_observed(6).distances;
        let b = small.delta_observed(12).distances;
        assert!(a.is_subset(&b));
    }

    #[test]
    fn elasticity() {
        assert_eq!(full(&[3]).elasticity_up_to(2), Some(Ratio::new(3, 2)));
        assert_eq!(full(&[2, 2]).elasticity_up_to(2), Some(Ratio::new(3, 2)));
        assert_eq!(BlockMonoid::full(&FiniteAbelianGroup::trivial()).unwrap().elasticity_up_to(3), Some(Ratio::new(1, 1)));
    }

    #[test]
    fn lambda_formula_small() {
        let check = full(&[3]).lambda_formula_check(2);
        let mut c3 = full(&[3]);
        for row in &check.rows {
            assert_eq!(Some(row.computed), c3.lambda_k(row.m), "m = {}", row.m);
        }
        assert!(check.all_match(), "{:?}", check.rows);
        assert_eq!(check.rows.len(), 6);
        assert_eq!(check.rows[2].computed, 2); // m = D
        assert!(full(&[4]).lambda_formula_check(2).all_match());
    }
}
