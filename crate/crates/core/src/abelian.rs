//! Finite abelian groups in invariant-factor normal form.
//!
//! A group is stored as its chain `n_1 | n_2 | ... | n_r` with `n_1 > 1`;
//! elements are dense coordinate vectors with coordinate `i` reduced
//! modulo `n_i`. The empty chain is the trivial group.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite abelian group `C_{n_1} ⊕ ... ⊕ C_{n_r}` with `1 < n_1 | ... | n_r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FiniteAbelianGroup {
    factors: Vec<u32>,
}

/// An element of a [`FiniteAbelianGroup`], as its coordinate vector.
///
/// The derived ordering is lexicographic on coordinates, which is the
/// enumeration order of [`FiniteAbelianGroup::elements`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    coords: Vec<u32>,
}

impl GroupElement {
    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

fn prime_power_split(mut n: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut q = 1;
            while n.is_multiple_of(p) {
                n /= p;
                q *= p;
            }
            out.push((p, q));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, n));
    }
    out
}

impl FiniteAbelianGroup {
    /// Builds the invariant-factor normal form of `C_{m_1} ⊕ ... ⊕ C_{m_s}`.
    ///
    /// Each order is split into prime powers; for every prime the powers are
    /// sorted and the largest ones are multiplied together into `n_r`, the
    /// next largest into `n_{r-1}`, and so on.
    pub fn new(cyclic_orders: &[u32]) -> Result<Self> {
        if let Some(&bad) = cyclic_orders.iter().find(|&&m| m <= 1) {
            return Err(Error::InvalidOrder(bad));
        }
        let mut by_prime: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for &m in cyclic_orders {
            for (p, q) in prime_power_split(m) {
                by_prime.entry(p).or_default().push(q);
            }
        }
        let rank = by_prime.values().map(Vec::len).max().unwrap_or(0);
        let mut factors = vec![1u32; rank];
        for powers in by_prime.values_mut() {
            powers.sort_unstable_by(|a, b| b.cmp(a));
            for (slot, q) in factors.iter_mut().rev().zip(powers.iter()) {
                *slot = slot.checked_mul(*q).ok_or(Error::GroupTooLarge)?;
            }
        }
        Ok(FiniteAbelianGroup { factors })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup { factors: Vec::new() }
    }

    pub fn cyclic(n: u32) -> Result<Self> {
        if n == 1 {
            return Ok(Self::trivial());
        }
        Self::new(&[n])
    }

    pub fn invariant_factors(&self) -> &[u32] {
        &self.factors
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().map(|&n| n as u64).product()
    }

    /// `r(G)`, the number of invariant factors.
    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    /// `exp(G) = n_r`, and 1 for the trivial group.
    pub fn exponent(&self) -> u32 {
        self.factors.last().copied().unwrap_or(1)
    }

    /// `D*(G) = 1 + Σ (n_i - 1)`.
    pub fn d_star(&self) -> u64 {
        1 + self.factors.iter().map(|&n| (n - 1) as u64).sum::<u64>()
    }

    pub fn is_cyclic(&self) -> bool {
        self.factors.len() <= 1
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement { coords: vec![0; self.factors.len()] }
    }

    /// Builds an element from arbitrary integer coordinates, reducing each
    /// one modulo its invariant factor.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.factors.len() {
            return Err(Error::ShapeMismatch { expected: self.factors.len(), found: coords.len() });
        }
        Ok(GroupElement {
            coords: coords
                .iter()
                .zip(&self.factors)
                .map(|(&c, &n)| c.rem_euclid(n as i64) as u32)
                .collect(),
        })
    }

    /// The `i`-th standard generator `e_i` (order `n_i`).
    pub fn basis_element(&self, i: usize) -> GroupElement {
        let mut e = self.zero();
        e.coords[i] = 1 % self.factors[i];
        e
    }

    pub fn contains(&self, a: &GroupElement) -> bool {
        a.coords.len() == self.factors.len() && a.coords.iter().zip(&self.factors).all(|(&c, &n)| c < n)
    }

    fn check(&self, a: &GroupElement) -> Result<()> {
        if a.coords.len() != self.factors.len() {
            return Err(Error::ShapeMismatch { expected: self.factors.len(), found: a.coords.len() });
        }
        if !self.contains(a) {
            return Err(Error::NotInGroup(a.to_string()));
        }
        Ok(())
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(GroupElement {
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .zip(&self.factors)
                .map(|((&x, &y), &n)| ((x as u64 + y as u64) % n as u64) as u32)
                .collect(),
        })
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(GroupElement {
            coords: a.coords.iter().zip(&self.factors).map(|(&x, &n)| (n - x) % n).collect(),
        })
    }

    /// `k · a` for any integer `k`.
    pub fn scale(&self, k: i64, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(GroupElement {
            coords: a
                .coords
                .iter()
                .zip(&self.factors)
                .map(|(&x, &n)| (k.rem_euclid(n as i64) * x as i64 % n as i64) as u32)
                .collect(),
        })
    }

    /// Order of `a`: the lcm over coordinates of `n_i / gcd(c_i, n_i)`.
    pub fn order_of(&self, a: &GroupElement) -> Result<u64> {
        self.check(a)?;
        Ok(a.coords
            .iter()
            .zip(&self.factors)
            .map(|(&c, &n)| (n / c.gcd(&n)) as u64)
            .fold(1u64, |acc, o| acc.lcm(&o)))
    }

    /// All elements in lexicographic order of coordinates.
    pub fn elements(&self) -> Elements<'_> {
        Elements { group: self, next: Some(self.zero()) }
    }

    /// Position of `a` in [`elements`](Self::elements) (mixed radix, first
    /// coordinate most significant).
    pub fn index_of(&self, a: &GroupElement) -> Result<usize> {
        self.check(a)?;
        Ok(a.coords.iter().zip(&self.factors).fold(0usize, |acc, (&c, &n)| acc * n as usize + c as usize))
    }

    pub fn element_at(&self, mut index: usize) -> GroupElement {
        let mut coords = vec![0u32; self.factors.len()];
        for (slot, &n) in coords.iter_mut().zip(&self.factors).rev() {
            *slot = (index % n as usize) as u32;
            index /= n as usize;
        }
        GroupElement { coords }
    }

    /// Whether the subgroup generated by `elems` has order `∏ ord(e_i)`.
    ///
    /// For finite groups this is the usual independence condition
    /// `Σ m_i e_i = 0 ⇒ m_i e_i = 0`.
    pub fn is_independent(&self, elems: &[GroupElement]) -> Result<bool> {
        for e in elems {
            self.check(e)?;
            if e.is_zero() {
                return Err(Error::ZeroInIndependentSet);
            }
        }
        let mut expected: u64 = 1;
        for e in elems {
            expected = match expected.checked_mul(self.order_of(e)?) {
                Some(v) if v <= self.order() => v,
                _ => return Ok(false),
            };
        }
        Ok(self.subgroup_order(elems)? == expected)
    }

    /// Order of the subgroup generated by `gens`, by closure from zero.
    pub fn subgroup_order(&self, gens: &[GroupElement]) -> Result<u64> {
        let n = usize::try_from(self.order()).map_err(|_| Error::GroupTooLarge)?;
        let mut seen = vec![false; n];
        let mut stack = vec![self.zero()];
        seen[0] = true;
        let mut count = 1u64;
        while let Some(x) = stack.pop() {
            for g in gens {
                let y = self.add(&x, g)?;
                let i = self.index_of(&y)?;
                if !seen[i] {
                    seen[i] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        Ok(count)
    }

    /// Parses a single element written either as `(c_1,...,c_r)` or, for a
    /// group of rank at most one, as a bare integer.
    pub fn parse_element(&self, s: &str) -> Result<GroupElement> {
        let t = s.trim();
        let inner = match t.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            Some(inner) => inner,
            None if self.rank() <= 1 => t,
            None => return Err(Error::Parse { token: t.to_string(), reason: "expected (c1,...,cr)".into() }),
        };
        let coords: Vec<i64> = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|c| {
                    c.trim().parse::<i64>().map_err(|_| Error::Parse {
                        token: c.trim().to_string(),
                        reason: "not an integer coordinate".into(),
                    })
                })
                .collect::<Result<_>>()?
        };
        if coords.len() != self.rank() {
            return Err(Error::Parse {
                token: t.to_string(),
                reason: format!("expected {} coordinate(s)", self.rank()),
            });
        }
        self.element(&coords)
    }
}

impl fmt::Display for FiniteAbelianGroup {
    /// Formats as `C2^2xC12`; the trivial group prints as `C1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("C1");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.factors.len() {
            let n = self.factors[i];
            let run = self.factors[i..].iter().take_while(|&&m| m == n).count();
            if !first {
                f.write_str("x")?;
            }
            first = false;
            if run > 1 {
                write!(f, "C{n}^{run}")?;
            } else {
                write!(f, "C{n}")?;
            }
            i += run;
        }
        Ok(())
    }
}

impl FromStr for FiniteAbelianGroup {
    type Err = Error;

    /// Accepts `C6`, `C2^2xC12` (also `+` as separator), bare comma lists
    /// such as `2,2,12`, and `C1` / `trivial` for the trivial group.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse { token: String::new(), reason: "empty group spec".into() });
        }
        if s.eq_ignore_ascii_case("trivial") || s == "C1" || s == "1" {
            return Ok(Self::trivial());
        }
        let parse_num = |tok: &str| -> Result<u32> {
            tok.trim().parse::<u32>().map_err(|_| Error::Parse {
                token: tok.trim().to_string(),
                reason: "expected a positive integer".into(),
            })
        };
        let mut orders = Vec::new();
        if s.starts_with(['C', 'c']) {
            for tok in s.split(['x', 'X', '+']) {
                let tok = tok.trim();
                let body = tok.strip_prefix(['C', 'c']).ok_or_else(|| Error::Parse {
                    token: tok.to_string(),
                    reason: "expected a cyclic factor like C6 or C2^3".into(),
                })?;
                let (base, exp) = match body.split_once('^') {
                    Some((b, e)) => (parse_num(b).map_err(|_| bad_token(tok))?, parse_num(e).map_err(|_| bad_token(tok))?),
                    None => (parse_num(body).map_err(|_| bad_token(tok))?, 1),
                };
                if base == 1 {
                    continue;
                }
                if base == 0 {
                    return Err(bad_token(tok));
                }
                orders.extend(std::iter::repeat_n(base, exp as usize));
            }
        } else {
            for tok in s.split(',') {
                let n = parse_num(tok)?;
                if n == 1 {
                    continue;
                }
                if n == 0 {
                    return Err(bad_token(tok.trim()));
                }
                orders.push(n);
            }
        }
        Self::new(&orders)
    }
}

fn bad_token(tok: &str) -> Error {
    Error::Parse { token: tok.to_string(), reason: "malformed cyclic factor".into() }
}

/// Iterator over the elements of a group in lexicographic order.
pub struct Elements<'a> {
    group: &'a FiniteAbelianGroup,
    next: Option<GroupElement>,
}

impl Iterator for Elements<'_> {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carry = true;
        for (c, &n) in succ.coords.iter_mut().zip(&self.group.factors).rev() {
            *c += 1;
            if *c < n {
                carry = false;
                break;
            }
            *c = 0;
        }
        if !carry {
            self.next = Some(succ);
        }
        Some(current)
    }
}
