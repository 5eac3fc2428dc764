//! Structure of sets of lengths: AAMP descriptors, the minimal-distance
//! formula for two-element subsets of cyclic groups, `Δ*`, and the complete
//! descriptions of `𝓛(G)` for the small groups where one is known.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::abelian::{FiniteAbelianGroup, GroupElement};
use crate::error::{Error, Result};
use crate::lengths::{BlockMonoid, LengthSet};
use crate::zerosum::with_pool;

/// Witness that `L = y + (L′ ∪ L* ∪ L″)` is an almost arithmetic
/// multiprogression with difference `d`, period `𝒟` and bound `M`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AampDescriptor {
    pub y: u32,
    pub d: u32,
    /// `𝒟` with `{0, d} ⊆ 𝒟 ⊆ [0, d]`.
    pub period: Vec<u32>,
    pub bound: u32,
    /// `L′ ⊆ [-M, -1]`.
    pub lower: Vec<i64>,
    /// `L* = [0, max L*] ∩ (𝒟 + dℤ)`.
    pub core: Vec<i64>,
    /// `L″ ⊆ max L* + [1, M]`.
    pub upper: Vec<i64>,
}

impl AampDescriptor {
    /// The set this descriptor was built from.
    pub fn reconstruct(&self) -> LengthSet {
        self.lower
            .iter()
            .chain(&self.core)
            .chain(&self.upper)
            .map(|&v| (self.y as i64 + v) as u32)
            .collect()
    }

    /// Whether the parts satisfy the defining constraints (used in tests).
    pub fn is_consistent(&self) -> bool {
        let (d, m) = (self.d as i64, self.bound as i64);
        let in_period = |v: i64| self.period.contains(&(v.rem_euclid(d) as u32));
        let top = match self.core.last() {
            Some(&t) => t,
            None => return false,
        };
        let full: Vec<i64> = (0..=top).filter(|&v| in_period(v)).collect();
        self.period.first() == Some(&0)
            && self.period.last() == Some(&self.d)
            && self.core == full
            && self.lower.iter().all(|&v| (-m..=-1).contains(&v) && in_period(v))
            && self.upper.iter().all(|&v| v > top && v <= top + m && in_period(v))
    }
}

impl fmt::Display for AampDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let period: Vec<String> = self.period.iter().map(ToString::to_string).collect();
        write!(f, "y={} d={} period={{{}}} M={}", self.y, self.d, period.join(","), self.bound)
    }
}

/// For a fixed shift `y ∈ L`: the descriptor with the longest `L*`, and the
/// smallest bound that makes it valid.
fn descriptor_at(l: &[u32], d: u32, y: u32) -> AampDescriptor {
    let rel: Vec<i64> = l.iter().map(|&v| v as i64 - y as i64).collect();
    let di = d as i64;
    let mut period: Vec<u32> = rel.iter().map(|v| v.rem_euclid(di) as u32).collect();
    period.push(0);
    period.push(d);
    period.sort_unstable();
    period.dedup();
    let residues = &period[..period.len() - 1];
    // walk the non-negative part while it stays complete
    let nonneg: Vec<i64> = rel.iter().copied().filter(|&v| v >= 0).collect();
    let mut top = 0i64;
    let mut expect = 0i64;
    let mut idx = 0;
    loop {
        // next value of 𝒟 + dℤ after `expect` is the candidate that must be present
        if idx < nonneg.len() && nonneg[idx] == expect {
            top = expect;
            idx += 1;
            expect += 1;
            while !residues.contains(&(expect.rem_euclid(di) as u32)) {
                expect += 1;
            }
        } else {
            break;
        }
    }
    let lower: Vec<i64> = rel.iter().copied().filter(|&v| v < 0).collect();
    let core: Vec<i64> = nonneg.iter().copied().filter(|&v| v <= top).collect();
    let upper: Vec<i64> = nonneg.iter().copied().filter(|&v| v > top).collect();
    let need_low = lower.first().map_or(0, |&v| -v);
    let need_high = upper.last().map_or(0, |&v| v - top);
    AampDescriptor { y, d, period, bound: need_low.max(need_high) as u32, lower, core, upper }
}

/// Decides whether `L` is an AAMP with difference `d` and bound `M`,
/// returning the descriptor with the smallest shift `y`.
///
/// The period is forced: it must contain every residue of `L - y`, and any
/// larger period only makes `L*` harder to complete.
pub fn classify_aamp(l: &LengthSet, d: u32, m: u32) -> Option<AampDescriptor> {
    if l.is_empty() || d == 0 {
        return None;
    }
    let v = l.to_vec();
    let lo = v[0];
    v.iter()
        .take_while(|&&y| y <= lo + m)
        .map(|&y| descriptor_at(&v, d, y))
        .find(|desc| desc.bound <= m)
        .map(|mut desc| {
            desc.bound = m;
            desc
        })
}

/// The smallest `M` with `classify_aamp(L, d, M)` succeeding, with the
/// canonical descriptor at that bound. Never exceeds `max L - min L`.
pub fn min_bound(l: &LengthSet, d: u32) -> Option<(u32, AampDescriptor)> {
    if l.is_empty() || d == 0 {
        return None;
    }
    let v = l.to_vec();
    let best = v
        .iter()
        .map(|&y| descriptor_at(&v, d, y))
        .min_by_key(|desc| (desc.bound, desc.y))?;
    Some((best.bound, best))
}

/// Shapes allowed for sets of lengths over a cyclic group of order 5.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum C5Shape {
    #[serde(rename = "AP-diff-1")]
    ApDiff1,
    #[serde(rename = "AP-diff-3")]
    ApDiff3,
    #[serde(rename = "AMP-period-{0,2,3}")]
    AmpPeriod023,
    #[serde(rename = "AMP-period-{0,1,3}")]
    AmpPeriod013,
    #[serde(rename = "none")]
    None,
}

impl fmt::Display for C5Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            C5Shape::ApDiff1 => "AP-diff-1",
            C5Shape::ApDiff3 => "AP-diff-3",
            C5Shape::AmpPeriod023 => "AMP-period-{0,2,3}",
            C5Shape::AmpPeriod013 => "AMP-period-{0,1,3}",
            C5Shape::None => "none",
        })
    }
}

pub fn c5_shape(l: &LengthSet) -> C5Shape {
    if classify_aamp(l, 1, 0).is_some() {
        return C5Shape::ApDiff1;
    }
    match classify_aamp(l, 3, 0).map(|desc| desc.period) {
        Some(p) if p == [0, 3] => C5Shape::ApDiff3,
        Some(p) if p == [0, 2, 3] => C5Shape::AmpPeriod023,
        Some(p) if p == [0, 1, 3] => C5Shape::AmpPeriod013,
        _ => C5Shape::None,
    }
}

/// Continued fraction `n/a = [a₀; a₁, …, a_m]` with `m` even.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CfExpansion<T> {
    pub n: T,
    pub a: T,
    pub terms: Vec<T>,
}

impl<T: Integer + Clone> CfExpansion<T> {
    pub fn value(&self) -> Ratio<T> {
        let mut it = self.terms.iter().rev();
        let mut x = Ratio::from_integer(it.next().expect("non-empty expansion").clone());
        for t in it {
            x = Ratio::from_integer(t.clone()) + x.recip();
        }
        x
    }
}

impl<T: fmt::Display> fmt::Display for CfExpansion<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.terms[0])?;
        for (i, t) in self.terms[1..].iter().enumerate() {
            write!(f, "{}{t}", if i == 0 { "; " } else { ", " })?;
        }
        f.write_str("]")
    }
}

fn cf_error<T: ToPrimitive>(n: &T, a: &T) -> Error {
    Error::CfPrecondition { n: n.to_u64().unwrap_or(u64::MAX), a: a.to_u64().unwrap_or(u64::MAX) }
}

/// Euclidean expansion of `n/a`, with the tail rewritten
/// `[…, t] = […, t-1, 1]` when needed to get an odd number of terms.
pub fn cf_odd<T: Integer + Clone + ToPrimitive>(n: T, a: T) -> Result<CfExpansion<T>> {
    let two = T::one() + T::one();
    if a < two || n <= a || !n.gcd(&a).is_one() {
        return Err(cf_error(&n, &a));
    }
    let mut terms = Vec::new();
    let (mut p, mut q) = (n.clone(), a.clone());
    while !q.is_zero() {
        let (t, r) = p.div_rem(&q);
        terms.push(t);
        p = q;
        q = r;
    }
    if terms.len() % 2 == 0 {
        let last = terms.pop().expect("non-empty");
        terms.push(last - T::one());
        terms.push(T::one());
    }
    Ok(CfExpansion { n, a, terms })
}

/// `min Δ({e, ae})` for `ord(e) = n`: the gcd of the odd-indexed terms of
/// the odd-length expansion of `n/a`.
pub fn min_delta_two_element<T: Integer + Clone + ToPrimitive>(n: T, a: T) -> Result<T> {
    let cf = cf_odd(n, a)?;
    Ok(cf.terms.iter().skip(1).step_by(2).fold(T::zero(), |g, t| g.gcd(t)))
}

/// `a = (n - c₁)/c₂` and `d_a = (n - c₁ - c₂)/(c₁c₂)` when both are positive
/// integers.
pub fn d_a_criterion<T: Integer + Clone>(n: T, c1: T, c2: T) -> Option<(T, T)> {
    if c1.is_zero() || c2.is_zero() || n <= c1.clone() + c2.clone() {
        return None;
    }
    let (a, ra) = (n.clone() - c1.clone()).div_rem(&c2);
    let (d, rd) = (n - c1.clone() - c2.clone()).div_rem(&(c1 * c2));
    (ra.is_zero() && rd.is_zero() && !a.is_zero() && !d.is_zero()).then_some((a, d))
}

/// How the minimum distance of one subset was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaSource {
    ContinuedFraction,
    Scan,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsetDelta {
    pub subset: Vec<String>,
    pub min_delta: Option<u32>,
    pub source: DeltaSource,
    pub witness: Option<String>,
}

/// `{min Δ(G₀)}` over the non-empty subsets `G₀ ⊆ G \ {0}`, from bounded
/// scans. Subsets with no distance up to the bound are listed with
/// `min_delta = None`; they are either half-factorial or need a larger bound.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaStarReport {
    pub group: String,
    pub values: LengthSet,
    pub bound: usize,
    pub subsets_scanned: usize,
    pub without_distance: usize,
    pub details: Vec<SubsetDelta>,
    pub exact: bool,
}

/// If `{x, y} = {e, ae}` with `gcd(a, ord e) = 1` and `2 <= a < ord e`,
/// returns `(ord e, a)`.
pub fn as_two_element_cyclic(g: &FiniteAbelianGroup, x: &GroupElement, y: &GroupElement) -> Option<(u64, u64)> {
    for (e, t) in [(x, y), (y, x)] {
        let n = g.order_of(e).ok()?;
        for a in 2..n {
            if a.gcd(&n) == 1 && g.scale(a as i64, e).ok()? == *t {
                return Some((n, a));
            }
        }
    }
    None
}

pub const DELTA_STAR_MAX_ORDER: u64 = 12;

pub fn delta_star_observed(g: &FiniteAbelianGroup, bound: usize, jobs: usize) -> Result<DeltaStarReport> {
    if g.order() > DELTA_STAR_MAX_ORDER {
        return Err(Error::GroupTooLarge);
    }
    let nonzero: Vec<GroupElement> = g.elements().filter(|e| !e.is_zero()).collect();
    let masks: Vec<u32> = (1..(1u32 << nonzero.len())).collect();
    let details: Vec<SubsetDelta> = with_pool(jobs, || {
        masks
            .par_iter()
            .map(|&mask| -> Result<SubsetDelta> {
                let subset: Vec<GroupElement> =
                    nonzero.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| e.clone()).collect();
                let names = subset.iter().map(ToString::to_string).collect();
                if let [x, y] = &subset[..] {
                    if let Some((n, a)) = as_two_element_cyclic(g, x, y) {
                        return Ok(SubsetDelta {
                            subset: names,
                            min_delta: Some(min_delta_two_element(n, a)? as u32),
                            source: DeltaSource::ContinuedFraction,
                            witness: None,
                        });
                    }
                }
                let report = BlockMonoid::new(g, &subset)?.delta_observed(bound);
                let min = report.min();
                Ok(SubsetDelta {
                    subset: names,
                    min_delta: min,
                    source: DeltaSource::Scan,
                    witness: min.and_then(|d| report.witnesses.get(&d).cloned()),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(DeltaStarReport {
        group: g.to_string(),
        values: details.iter().filter_map(|s| s.min_delta).collect(),
        bound,
        subsets_scanned: details.len(),
        without_distance: details.iter().filter(|s| s.min_delta.is_none()).count(),
        details,
        exact: false,
    })
}

/// Result of matching a set against the known description of `𝓛(G)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosedFormMatch {
    pub member: bool,
    pub family: Option<&'static str>,
    pub params: BTreeMap<&'static str, u32>,
}

impl ClosedFormMatch {
    fn no() -> Self {
        ClosedFormMatch { member: false, family: None, params: BTreeMap::new() }
    }

    fn yes(family: &'static str, params: &[(&'static str, u32)]) -> Self {
        ClosedFormMatch { member: true, family: Some(family), params: params.iter().copied().collect() }
    }
}

/// `L = y + s + step·[0, k]` for some `y >= 0`, where `s = shift(k)`.
fn progression_family(l: &[u32], step: u32, shift: impl Fn(u32) -> u32) -> Option<(u32, u32)> {
    let (lo, hi) = (*l.first()?, *l.last()?);
    if (hi - lo) % step != 0 {
        return None;
    }
    let k = (hi - lo) / step;
    if l.len() as u32 != k + 1 || l.windows(2).any(|w| w[1] - w[0] != step) {
        return None;
    }
    lo.checked_sub(shift(k)).map(|y| (y, k))
}

pub fn is_cataloged(g: &FiniteAbelianGroup) -> bool {
    matches!(g.invariant_factors(), [] | [2] | [3] | [2, 2] | [4] | [2, 2, 2] | [3, 3])
}

pub fn closed_form_membership(g: &FiniteAbelianGroup, l: &LengthSet) -> Result<ClosedFormMatch> {
    if !is_cataloged(g) {
        return Err(Error::UncatalogedGroup(g.to_string()));
    }
    let v = l.to_vec();
    if v.is_empty() {
        return Ok(ClosedFormMatch::no());
    }
    let yk = |family, r: Option<(u32, u32)>| r.map(|(y, k)| ClosedFormMatch::yes(family, &[("y", y), ("k", k)]));
    let found = match g.invariant_factors() {
        [] | [2] => (v.len() == 1).then(|| ClosedFormMatch::yes("{m}", &[("m", v[0])])),
        [3] | [2, 2] => yk("y+2k+[0,k]", progression_family(&v, 1, |k| 2 * k)),
        [4] => yk("y+k+1+[0,k]", progression_family(&v, 1, |k| k + 1))
            .or_else(|| yk("y+2k+2[0,k]", progression_family(&v, 2, |k| 2 * k))),
        [2, 2, 2] => yk("y+k+1+[0,k]", progression_family(&v, 1, |k| k + 1).filter(|&(_, k)| k <= 2))
            .or_else(|| yk("y+k+[0,k]", progression_family(&v, 1, |k| k).filter(|&(_, k)| k >= 3)))
            .or_else(|| yk("y+2k+2[0,k]", progression_family(&v, 2, |k| 2 * k))),
        [3, 3] => {
            let (lo, hi) = (v[0], v[v.len() - 1]);
            if v.len() as u32 != hi - lo + 1 {
                None
            } else if v == [1] {
                Some(ClosedFormMatch::yes("{1}", &[]))
            } else if lo % 2 == 0 {
                let k = lo / 2;
                (hi <= 5 * k).then(|| ClosedFormMatch::yes("[2k,l]", &[("k", k), ("l", hi)]))
            } else {
                let k = lo / 2;
                (k >= 1 && hi <= 5 * k + 2).then(|| ClosedFormMatch::yes("[2k+1,l]", &[("k", k), ("l", hi)]))
            }
        }
        _ => unreachable!("checked by is_cataloged"),
    };
    Ok(found.unwrap_or_else(ClosedFormMatch::no))
}
