//! Named checks tying computed invariants to known results, each producing a
//! report with witnesses and the CLI commands that reproduce them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::abelian::{FiniteAbelianGroup, GroupElement};
use crate::cache::Cache;
use crate::error::{Error, Result};
use crate::lengths::{delta_of, sumset, BlockMonoid, LengthSet};
use crate::structure::{
    c5_shape, classify_aamp, closed_form_membership, delta_star_observed, min_bound, min_delta_two_element, C5Shape,
};
use crate::zerosum::{format_subset, with_pool, Counts, Sequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    InconclusiveBound,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::InconclusiveBound => "INCONCLUSIVE",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    /// Parameters as given; defaults are described by `summary`.
    pub params: BTreeMap<String, String>,
    pub status: Status,
    pub summary: String,
    /// Failures first, then supporting evidence.
    pub witnesses: Vec<String>,
    /// `zslab` invocations reproducing the witnesses.
    pub reproduce: Vec<String>,
    pub elapsed_ms: u64,
}

/// `key=value` parameters of a check. Group lists are separated by spaces or
/// semicolons (`group=C3;C2^2`).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Params(pub BTreeMap<String, String>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse<S: AsRef<str>>(items: &[S]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for item in items {
            let item = item.as_ref();
            let (k, v) = item.split_once('=').ok_or_else(|| Error::Parse {
                token: item.to_string(),
                reason: "expected key=value".into(),
            })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Params(map))
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.0
            .get(key)
            .map(|v| {
                v.parse::<T>().map_err(|_| Error::Parse { token: v.clone(), reason: format!("bad value for `{key}`") })
            })
            .transpose()
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Explicit `group=` list, or the given defaults.
    fn groups(&self, defaults: &[&str]) -> Result<Vec<FiniteAbelianGroup>> {
        match self.0.get("group") {
            Some(v) => v.split([';', ' ']).filter(|s| !s.is_empty()).map(str::parse).collect(),
            None => defaults.iter().map(|s| s.parse()).collect(),
        }
    }

    /// Explicit `key=` value as a one-element list, or the given range.
    fn values(&self, key: &str, defaults: impl IntoIterator<Item = u32>) -> Result<Vec<u32>> {
        Ok(match self.get::<u32>(key)? {
            Some(v) => vec![v],
            None => defaults.into_iter().collect(),
        })
    }
}

/// Suite configuration.
#[derive(Clone, Debug, Default)]
pub struct SuiteConfig {
    /// Checks to run; empty means all.
    pub include: Vec<String>,
    pub exclude: Vec<String>,
    pub jobs: usize,
    pub cache: Option<Cache>,
    /// Harness self-test: the named check treats its first expectation as
    /// unmet, which must surface as a failure with a witness.
    pub tamper: Option<String>,
}

type CheckFn = fn(&mut Ctx, &Params) -> Result<()>;

struct Entry {
    name: &'static str,
    about: &'static str,
    run: CheckFn,
}

const REGISTRY: &[Entry] = &[
    Entry { name: "davenport", about: "D(G) = D*(G) by exhaustive atom enumeration", run: check_davenport },
    Entry { name: "carlitz", about: "half-factorial exactly when |G| <= 2", run: check_half_factorial },
    Entry { name: "lem23", about: "{2,3} and {2,n} as sets of lengths of explicit sequences", run: check_small_length_sets },
    Entry { name: "lemAP", about: "L((g(-g))^{kn}) = 2k + (n-2)[0,k]", run: check_symmetric_progression },
    Entry { name: "rho_even", about: "rho_2 = D, rho_4 = 2D, and the odd sandwich", run: check_rho_even },
    Entry { name: "rho_odd_cyclic", about: "rho_{2k+1}(C_n) = kn + 1", run: check_rho_odd_cyclic },
    Entry { name: "uk_interval", about: "U_k(G) is an interval", run: check_uk_interval },
    Entry { name: "lambda_formula", about: "lambda_m against the three-case formula", run: check_lambda_formula },
    Entry { name: "u2_extremal", about: "U_{2,rho_2} for cyclic, elementary 2- and rank-2 groups", run: check_u2_extremal },
    Entry { name: "prop3u", about: "3 in U_{2,D*}(C_2^{r-1} + C_2n) iff n >= 3", run: check_three_in_union },
    Entry { name: "dist_theorem", about: "observed Delta(C_n) = [1,n-2], Delta(C_2^r) = [1,r-1]", run: check_distance_interval },
    Entry { name: "daleth_bound", about: "daleth <= D, equality cases, and the independent-set example", run: check_daleth },
    Entry { name: "cgp_distance", about: "n-2 in Delta(L(B)) forces Delta(L(B)) = {n-2} over C_n", run: check_single_distance },
    Entry { name: "delta_star", about: "observed Delta* values and the exp-3 gap", run: check_delta_star },
    Entry { name: "closed_forms", about: "sets of lengths match the complete descriptions", run: check_closed_forms },
    Entry { name: "c5_shapes", about: "sets of lengths over C_5 have one of four shapes", run: check_c5_shapes },
    Entry { name: "aamp_examples", about: "the two explicit AAMP examples", run: check_aamp_examples },
    Entry { name: "stsl_empirical", about: "sets of lengths are AAMPs with difference in observed Delta*", run: check_structure_empirics },
    Entry { name: "cf_vs_bruteforce", about: "continued-fraction min Delta against bounded scans", run: check_cf },
    Entry { name: "stsl_bound_example", about: "the sumset example needs bound >= (n-3)(n/2-3)", run: check_structure_bound_example },
];

/// Names and one-line descriptions of all checks, in suite order.
pub fn registry() -> Vec<(&'static str, &'static str)> {
    REGISTRY.iter().map(|e| (e.name, e.about)).collect()
}

pub fn run_check(name: &str, params: &Params, cfg: &SuiteConfig) -> Result<CheckReport> {
    let entry = REGISTRY.iter().find(|e| e.name == name).ok_or_else(|| Error::UnknownCheck(name.to_string()))?;
    let start = Instant::now();
    let mut ctx = Ctx {
        cache: cfg.cache.clone(),
        jobs: cfg.jobs.max(1),
        tamper: cfg.tamper.as_deref() == Some(name),
        failures: Vec::new(),
        inconclusive: Vec::new(),
        evidence: Vec::new(),
        reproduce: Vec::new(),
        notes: Vec::new(),
    };
    (entry.run)(&mut ctx, params)?;
    if ctx.tamper {
        // the check recorded evidence without going through `expect`
        let first = ctx.evidence.first().cloned().unwrap_or_else(|| "no evidence".into());
        ctx.failures.push(format!("{first} (tampered expectation)"));
    }
    let status = if !ctx.failures.is_empty() {
        Status::Fail
    } else if !ctx.inconclusive.is_empty() {
        Status::InconclusiveBound
    } else {
        Status::Pass
    };
    let summary = match status {
        Status::Fail => ctx.failures.first().cloned().unwrap_or_default(),
        Status::InconclusiveBound => ctx.inconclusive.first().cloned().unwrap_or_default(),
        Status::Pass if ctx.notes.is_empty() => match ctx.evidence.len() {
            1 => "1 expectation met".to_string(),
            n => format!("{n} expectations met"),
        },
        Status::Pass => ctx.notes.join("; "),
    };
    let mut witnesses = ctx.failures;
    witnesses.extend(ctx.inconclusive);
    witnesses.extend(ctx.evidence);
    ctx.reproduce.dedup();
    Ok(CheckReport {
        name: name.to_string(),
        params: params.0.clone(),
        status,
        summary,
        witnesses,
        reproduce: ctx.reproduce,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

/// Runs every selected check with default parameters. Checks run
/// concurrently; reports come back in registry order.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    for n in cfg.include.iter().chain(&cfg.exclude) {
        if !REGISTRY.iter().any(|e| e.name == n) {
            return Err(Error::UnknownCheck(n.clone()));
        }
    }
    let names: Vec<&str> = REGISTRY
        .iter()
        .map(|e| e.name)
        .filter(|n| cfg.include.is_empty() || cfg.include.iter().any(|i| i == n))
        .filter(|n| !cfg.exclude.iter().any(|x| x == n))
        .collect();
    let inner = SuiteConfig { jobs: 1, ..cfg.clone() };
    with_pool(cfg.jobs, || names.par_iter().map(|n| run_check(n, &Params::new(), &inner)).collect())
}

struct Ctx {
    cache: Option<Cache>,
    jobs: usize,
    tamper: bool,
    failures: Vec<String>,
    inconclusive: Vec<String>,
    evidence: Vec<String>,
    reproduce: Vec<String>,
    notes: Vec<String>,
}

impl Ctx {
    fn monoid(&self, g: &FiniteAbelianGroup, subset: Option<&[GroupElement]>) -> Result<BlockMonoid> {
        let all: Vec<GroupElement>;
        let subset = match subset {
            Some(s) => s,
            None => {
                all = g.elements().collect();
                &all
            }
        };
        match &self.cache {
            Some(c) => c.block_monoid(g, subset, self.jobs),
            None => Ok(BlockMonoid::new(g, subset)?.with_jobs(self.jobs)),
        }
    }

    /// Records `got == want`; on mismatch the witness and reproduction are
    /// attached to the failure.
    fn expect<T: PartialEq + fmt::Display>(&mut self, what: &str, got: T, want: T, repro: Option<String>) -> bool {
        let tampered = std::mem::take(&mut self.tamper);
        if got == want && !tampered {
            self.evidence.push(format!("{what}: {got}"));
            return true;
        }
        let mark = if tampered { " (tampered expectation)" } else { "" };
        self.failures.push(format!("{what}: got {got}, expected {want}{mark}"));
        if let Some(r) = repro {
            self.reproduce.push(r);
        }
        false
    }

    fn fail(&mut self, msg: String, repro: Option<String>) {
        self.failures.push(msg);
        if let Some(r) = repro {
            self.reproduce.push(r);
        }
    }

    fn inconclusive(&mut self, msg: String, repro: Option<String>) {
        self.inconclusive.push(msg);
        if let Some(r) = repro {
            self.reproduce.push(r);
        }
    }

    fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    /// Observed set against a claimed exact set: extra values fail, missing
    /// values only mean the bound was too small.
    fn expect_observed(&mut self, what: &str, got: &LengthSet, want: &LengthSet, repro: String) {
        if self.tamper || !got.is_subset(want) {
            self.expect(what, got, want, Some(repro));
        } else if got != want {
            self.inconclusive(format!("{what}: observed {got} is a strict subset of {want}"), Some(repro));
        } else {
            self.evidence.push(format!("{what}: {got}"));
        }
    }
}

fn subset_flag(subset: Option<&[GroupElement]>) -> String {
    subset.map(|s| format!(" --subset '{}'", format_subset(s))).unwrap_or_default()
}

fn repro_lengths(g: &FiniteAbelianGroup, subset: Option<&[GroupElement]>, seq: &str) -> String {
    format!("zslab lengths --group {g}{} --seq '{seq}'", subset_flag(subset))
}

fn seq(g: &FiniteAbelianGroup, parts: &[(&GroupElement, u32)]) -> Result<Sequence> {
    Sequence::from_pairs(g, parts.iter().map(|&(e, m)| (e, m)))
}

fn cyclic_generator(n: u32) -> Result<(FiniteAbelianGroup, GroupElement)> {
    let g = FiniteAbelianGroup::cyclic(n)?;
    let e = g.basis_element(0);
    Ok((g, e))
}

fn is_elementary_two(g: &FiniteAbelianGroup) -> bool {
    !g.invariant_factors().is_empty() && g.exponent() == 2
}

fn check_davenport(ctx: &mut Ctx, p: &Params) -> Result<()> {
    let groups = p.groups(&["C3", "C2^2", "C4", "C2^3", "C3^2", "C2xC4", "C5", "C2^2xC4", "C2^2xC6"])?;
    for g in &groups {
        let m = ctx.monoid(g, None)?;
        let d = m.davenport() as u64;
        if ctx.expect(&format!("D({g})"), d, g.d_star(), Some(format!("zslab davenport --group {g}"))) {
            if let Some(longest) = m.atoms().atoms().last() {
                ctx.evidence.push(format!("longest atom over {g}: {longest}"));
            }
        }
    }
    ctx.note(format!("D = D* for {} groups", groups.len()));
    Ok(())
}

fn check_half_factorial(ctx: &mut Ctx, p: &Params) -> Result<()> {
    let groups = p.groups(&["C1", "C2", "C3", "C4", "C2^2", "C5", "C6", "C2^3"])?;
    for g in &groups {
        let mut m = ctx.monoid(g, None)?;
        // any non-half-factorial B(G) has a witness of length <= 2 D(G)
        let bound = p.get_or("bound", 2 * m.davenport().max(1))?;
        let scan = m.half_factorial_scan(bound);
        let repro = scan.witness.as_ref().map(|w| repro_lengths(g, None, w));
        if ctx.expect(&format!("B({g}) half-factorial"), scan.half_factorial, g.order() <= 2, repro) {
            if let (Some(w), Some(l)) = (&scan.witness, &scan.witness_lengths) {
                ctx.evidence.push(format!("{g}: L({w}) = {l}"));
            }
        }
    }
    ctx.note(format!("{} groups", groups.len()));
    Ok(())
}

fn check_small_length_sets(ctx: &mut Ctx, p: &Params) -> Result<()> {
    for n in p.values("n", 3..=6)? {
        if n < 3 {
            return Err(Error::OutOfContract("lem23 needs n >= 3".into()));
        }
        let (g, e) = cyclic_generator(n)?;
        let mut m = ctx.monoid(&g, None)?;
        let (e2, me, me2) = (g.scale(2, &e)?, g.neg(&e)?, g.scale(-2, &e)?);
        let b = seq(&g, &[(&e, 2), (&me2, 1), (&me, 2), (&e2, 1)])?;
        let l = m.length_set(&b)?;
        ctx.expect(&format!("L({b}) over {g}"), l, LengthSet::from_iter([2, 3]), Some(repro_lengths(&g, None, &b.to_string())));
        let c = seq(&g, &[(&e, n), (&me, n)])?;
        let l = m.length_set(&c)?;
        ctx.expect(&format!("L({c}) over {g}"), l, LengthSet::from_iter([2, n]), Some(repro_lengths(&g, None, &c.to_string())));
    }
    if p.get::<u32>("n")?.is_none() {
        for g in [FiniteAbelianGroup::new(&[2, 2])?, FiniteAbelianGroup::new(&[2, 2, 2])?] {
            let (e1, e2) = (g.basis_element(0), g.basis_element(1));
            let s = g.add(&e1, &e2)?;
            let d = seq(&g, &[(&e1, 2), (&e2, 2), (&s, 2)])?;
            let l = ctx.monoid(&g, None)?.length_set(&d)?;
            ctx.expect(&format!("L({d}) over {g}"), l, LengthSet::from_iter([2, 3]), Some(repro_lengths(&g, None, &d.to_string())));
        }
    }
    ctx.note("all constructions exact");
    Ok(())
}

fn check_symmetric_progression(ctx: &mut Ctx, p: &Params) -> Result<()> {
    for n in p.values("n", 3..=5)? {
        if n < 3 {
            return Err(Error::OutOfContract("lemAP needs n >= 3".into()));
        }
        let (g, e) = cyclic_generator(n)?;
        let me = g.neg(&e)?;
        let mut m = ctx.monoid(&g, None)?;
        for k in p.values("k", 1..=4)? {
            let b = seq(&g, &[(&e, k * n), (&me, k * n)])?;
            let l = m.length_set(&b)?;
            let want = LengthSet::progression(2 * k, n - 2, k);
            ctx.expect(&format!("n={n} k={k}: L"), l, want, Some(repro_lengths(&g, None, &b.to_string())));
        }
    }
    Ok(())
}

fn check_rho_even(ctx: &mut Ctx, p: &Params) -> Result<()> {
    for g in p.groups(&["C3", "C2^2", "C4", "C5", "C6", "C2^3"])? {
        let mut m = ctx.monoid(&g, None)?;
        let d = m.davenport() as u32;
        for l in 1..=p.get_or("l", 2u32)? {
            let rho = m.rho_k(2 * l).unwrap_or(0);
            ctx.expect(&format!("rho_{}({g})", 2 * l), rho, l * d, Some(format!("zslab rho --group {g} --k {}", 2 * l)));
        }
        let rho3 = m.rho_k(3).unwrap_or(0);
        let repro = Some(format!("zslab rho --group {g} --k 3"));
        if rho3 < d + 1 || rho3 > d + d / 2 {
            ctx.fail(format!("rho_3({g}) = {rho3} outside [{}, {}]", d + 1, d + d / 2), repro);
        } else {
            ctx.evidence.push(format!("rho_3({g}) = {rho3} in [{}, {}]", d + 1, d + d / 2));
        }
    }
    Ok(())
}

fn check_rho_odd_cyclic(ctx: &mut Ctx, p: &Params) -> Result<()> {
    for n in p.values("n", 3..=7)? {
        if n < 3 {
            return Err(Error::OutOfContract("rho_odd_cyclic needs n >= 3".into()));
        }
        let g = FiniteAbelianGroup::cyclic(n)?;
        let mut m = ctx.monoid(&g, None)?;
        // rho_5 is cheap only while the atom count is small
        let kmax = p.get_or("kmax", if n <= 5 { 2 } else { 1 })?;
        for k in 1..=kmax {
            let rho = m.rho_k(2 * k + 1).unwrap_or(0);
            ctx.expect(&format!("rho_{}(C{n})", 2 * k + 1), rho, k * n + 1, Some(format!("zslab rho --group {g} --k {}", 2 * k + 1)));
        }
    }
    Ok(())
}

const ORDER_AT_MOST_9: &[&str] = &["C2", "C3", "C4", "C2^2", "C5", "C6", "C7", "C8", "C2xC4", "C2^3", "C9", "C3^2"];

fn check_uk_interval(ctx: &mut Ctx, p: &Params) -> Result<()> {
    let kmax = p.get_or("k", 4u32)?;
    for g in p.groups(ORDER_AT_MOST_9)? {
        let mut m = ctx.monoid(&g, None)?;
        for k in 0..=kmax {
            let r = m.u_k(k);
            let u = r.lengths.clone().unwrap_or_default();
            let repro = Some(format!("zslab uk --group {g} --k {k}"));
            if !u.is_interval() {
                ctx.fail(format!("U_{k}({g}) = {u} is not an interval"), repro);
            } else if k <= 1 && u != LengthSet::singleton(k) {
                ctx.fail(format!("U_{k}({g}) = {u}, expected {{{k}}}"), repro);
            } else {
                ctx.evidence.push(format!("U_{k}({g}) = {u}"));
            }
        }
    }
    Ok(())
}

fn check_lambda_formula(ctx: &mut Ctx, p: &Params) -> Result<()> {
    let kmax = p.get_or("kmax", 2u32)?;
    for g in p.groups(&["C2", "C3", "C4", "C2^2", "C5", "C6", "C2^3", "C2xC4", "C7", "C3^2"])? {
        let check = ctx.monoid(&g, None)?.lambda_formula_check(kmax);
        let mut ok = true;
        for row in check.rows.clone() {
            ok &= ctx.expect(
                &format!("lambda_{}({g})", row.m),
                row.computed,
                row.formula,
                Some(format!("zslab lambda --group {g} --k {}", row.m)),
            );
        }
        if ok {
            ctx.evidence.push(format!("{g}: rho_odd = {:?}, m <= {}", check.rho_odd, kmax as usize * check.davenport));
        }
    }
    Ok(())
}

/// `U_{2,rho_2}` as predicted for cyclic groups, elementary 2-groups and
/// rank-two groups `C_m + C_mn`.
fn u2_prediction(g: &FiniteAbelianGroup, rho2: u32) -> Option<LengthSet> {
    if g.is_cyclic() || is_elementary_two(g) {
        return Some(LengthSet::from_iter([2, rho2]));
    }
    match *g.invariant_factors() {
        [m, mn] => {
            let n = mn / m;
            Some(match m {
                2 => (1..=n).map(|a| 2 * a).chain([rho2]).collect(),
                3 | 4 => LengthSet::interval(2, rho2),
                _ => LengthSet::interval(2, rho2).iter().filter(|&v| v != 3).collect(),
            })
        }
        _ => None,
    }
}

fn check_u2_extremal(ctx: &mut Ctx, p: &Params) -> Result<()> {
    for g in p.groups(&["C5", "C6", "C2^3", "C2^2", "C2xC4", "C3^2"])? {
        let mut m = ctx.monoid(&g, None)?;
        let rho2 = m.rho_k(2).unwrap_or(0);
        let want = u2_prediction(&g, rho2).ok_or_else(|| Error::OutOfContract(format!("no prediction for {g}")))?;
        let r = m.u_m(&[2, rho2])?;
        let got = r.lengths.unwrap_or_default();
        ctx.expect(&format!("U_{{2,{rho2}}}({g})"), got, want, Some(format!("zslab um --group {g} --m 2,{rho2}")));
    }
    Ok(())
}

/// The minimal zero-sum sequence `U` of length `D*` and the factorization
/// `U(-U) = V1 V2 V3` over `C_2^{r-1} + C_{2n}`, `n >= 3`.
pub fn three_atom_witness(g: &FiniteAbelianGroup) -> Result<[Sequence; 4]> {
    let f_ = g.invariant_factors();
    let r = f_.len();
    let f = g.basis_element(r - 1);
    let e: Vec<GroupElement> = (0..r - 1).map(|i| g.basis_element(i)).collect();
    let n = f_[r - 1] / 2;
    let mf = g.neg(&f)?;
    let sum_e = e.iter().try_fold(g.zero(), |acc, x| g.add(&acc, x))?;
    let tail: Vec<(&GroupElement, u32)> = e[2..].iter().map(|x| (x, 1)).collect();
    let (f_e1, f_e2, mf_e1, mf_e2) = (g.add(&f, &e[0])?, g.add(&f, &e[1])?, g.add(&mf, &e[0])?, g.add(&mf, &e[1])?);
    let (mf_sum, f_sum) = (g.add(&mf, &sum_e)?, g.add(&f, &sum_e)?);
    let build = |head: &[(&GroupElement, u32)]| -> Result<Sequence> {
        let mut parts = head.to_vec();
        parts.extend(tail.iter().copied());
        seq(g, &parts)
    };
    let u = build(&[(&f, 2 * n - 3), (&f_e1, 3), (&f_e2, 1), (&mf_sum, 1)])?;
    let v1 = build(&[(&f, 2 * n - 3), (&f_e1, 1), (&f_e2, 1), (&f_sum, 1)])?;
    let v2 = build(&[(&mf, 2 * n - 5), (&mf_e1, 3), (&mf_e2, 1), (&mf_sum, 1)])?;
    let v3 = seq(g, &[(&f_e1, 2), (&mf, 2)])?;
    Ok([u, v1, v2, v3])
}

fn check_three_in_union(ctx: &mut Ctx, p: &Params) -> Result<()> {
    for g in p.groups(&["C2^3", "C2^2xC4", "C2^2xC6"])? {
        let f = g.invariant_factors();
        let r = f.len();
        if r < 3 || f[..r - 1].iter().any(|&x| x != 2) || f[r - 1] % 2 != 0 {
            return Err(Error::OutOfContract(format!("{g} is not C_2^(r-1) + C_2n with r >= 3")));
        }
        let n = f[r - 1] / 2;
        let ds = g.d_star() as u32;
        let mut m = ctx.monoid(&g, None)?;
        let u = m.u_m(&[2, ds])?.lengths.unwrap_or_default();
        let has3 = u.contains(3);
        let repro = Some(format!("zslab um --group {g} --m 2,{ds}"));
        if ctx.expect(&format!("3 in U_{{2,{ds}}}({g}) = {u}"), has3, n >= 3, repro) {
            ctx.note(format!("{g}: 3 {} U", if has3 { "∈" } else { "∉" }));
        }
        if n >= 3 {
            let [uu, v1, v2, v3] = three_atom_witness(&g)?;
            let product = uu.mul(&uu.negate())?;
            let atoms_ok = [&uu, &v1, &v2, &v3].iter().all(|s| s.is_atom()) && uu.len() as u32 == ds;
            let factor_ok = v1.mul(&v2)?.mul(&v3)? == product;
            let l = m.length_set(&product)?;
            let repro = Some(repro_lengths(&g, None, &product.to_string()));
            if atoms_ok && factor_ok && l.contains(3) && l.contains(2) && l.contains(ds) {
                ctx.evidence.push(format!("U = {uu}"));
                ctx.evidence.push(format!("V1 = {v1}, V2 = {v2}, V3 = {v3}"));
                ctx.evidence.push(format!("L(U(-U)) = {l}"));
            } else {
                ctx.fail(format!("witness over {g} invalid: atoms {atoms_ok}, product {factor_ok}, L = {l}"), repro);
            }
        }
    }
    Ok(())
}

fn check_distance_interval(ctx: &mut Ctx, p: &Params) -> Result<()> {
    let groups = p.groups(&["C3", "C4", "C5", "C6", "C2^2", "C2^3"])?;
    for g in groups {
        let (want, default_bound) = if g.is_cyclic() && g.order() >= 3 {
            let n = g.order() as u32;
            (LengthSet::interval(1, n - 2), 3 * n as usize)
        } else if is_elementary_two(&g) && g.rank() >= 2 {
            let r = g.rank() as u32;
            (LengthSet::interval(1, r - 1), 2 * (r as usize + 1) + 6)
        } else {
            return Err(Error::OutOfContract(format!("no distance prediction for {g}")));
        };
        let bound = p.get_or("bound", default_bound)?;
        let got = ctx.monoid(&g, None)?.delta_observed(bound).distances;
        ctx.expect_observed(&format!("Delta_obs({g}, {bound})"), &got, &want, format!("zslab delta --group {g} --bound {bound}"));
    }
    Ok(())
}

/// `G_0 = {e_0, ..., e_r}` in `C_n^r` with `e_0 = -(e_1 + ... + e_r)`.
pub fn independent_set_example(n: u32, r: usize) -> Result<(FiniteAbelianGroup, Vec<GroupElement>)> {
    let g = FiniteAbelianGroup::new(&vec![n; r])?;
    let mut subset = vec![g.element(&vec![-1; r])?];
    subset.extend((0..r).map(|i| g.basis_element(i)));
    Ok((g, subset))
}

fn check_daleth(ctx: &mut Ctx, p: &Params) -> Result<()> {
    for g in p.groups(&["C3", "C4", "C5", "C6", "C2^2", "C2^3", "C2xC4"])? {
        let mut m = ctx.monoid(&g, None)?;
        let dal = m.daleth();
        let value = dal.value.unwrap_or(0) as u32;
        let d = m.davenport() as u32;
        let repro = Some(format!("zslab daleth --group {g}"));
        if value > d {
            ctx.fail(format!("daleth({g}) = {value} exceeds D = {d}"), repro.clone());
        }
        // both classes satisfy the condition giving daleth = 2 + max Delta
        let exact = if g.is_cyclic() && g.order() >= 3 {
            Some(g.order() as u32)
        } else if is_elementary_two(&g) && g.rank() >= 2 {
            Some(g.rank() as u32 + 1)
        } else {
            None
        };
        if let Some(want) = exact {
            ctx.expect(&format!("daleth({g})"), value, want, repro);
        } else {
            ctx.evidence.push(format!("daleth({g}) = {value} <= {d}"));
        }
    }
    let n = p.get_or("set_n", 3u32)?;
    let r = p.get_or("set_r", 4usize)?;
    if n < 3 || r < 3 || n as usize == r + 1 {
        return Err(Error::OutOfContract("example needs n, r >= 3 and n != r + 1".into()));
    }
    let (g, subset) = independent_set_example(n, r)?;
    let mut m = ctx.monoid(&g, Some(&subset))?;
    let sub = Some(subset.as_slice());
    let dal = m.daleth().value.unwrap_or(0);
    ctx.expect(&format!("daleth(example n={n} r={r})"), dal, 0, Some(format!("zslab daleth --group {g}{}", subset_flag(sub))));
    let bound = p.get_or("set_bound", n as usize * (r + 1) + 5)?;
    let got = m.delta_observed(bound).distances;
    let want = LengthSet::singleton((n as i64 - r as i64 - 1).unsigned_abs() as u32);
    let repro = format!("zslab delta --group {g}{} --bound {bound}", subset_flag(sub));
    ctx.expect_observed(&format!("Delta_obs(example n={n} r={r}, {bound})"), &got, &want, repro);
    Ok(())
}

fn check_single_distance(ctx: &mut Ctx, p: &Params) -> Result<()> {
    for n in p.values("n", 4..=6)? {
        if n < 3 {
            return Err(Error::OutOfContract("cgp_distance needs n >= 3".into()));
        }
        let g = FiniteAbelianGroup::cyclic(n)?;
        let bound = p.get_or("bound", 3 * n as usize)?;
        let mut m = ctx.monoid(&g, None)?;
        let target = n - 2;
        type Acc = (usize, Option<Counts>);
        let (hits, bad): Acc = m.scan(
            1,
            bound,
            true,
            || (0, None),
            |acc: &mut Acc, c, l| {
                if l.len() < 2 {
                    return;
                }
                let d = delta_of(l).expect("non-empty");
                if d.contains(target) {
                    acc.0 += 1;
                    if d.len() > 1 && acc.1.as_ref().is_none_or(|b| crate::zerosum::canonical_cmp(c, b).is_lt()) {
                        acc.1 = Some(c.clone());
                    }
                }
            },
            |a, b| {
                let bad = match (a.1, b.1) {
                    (Some(x), Some(y)) => Some(if crate::zerosum::canonical_cmp(&y, &x).is_lt() { y } else { x }),
                    (x, y) => x.or(y),
                };
                (a.0 + b.0, bad)
            },
        );
        match bad {
            Some(c) => {
                let s = m.atoms().sequence_of(&c);
                let l = m.lengths_of(&c);
                ctx.fail(format!("C{n}: L({s}) = {l} has {target} among other distances"), Some(repro_lengths(&g, None, &s.to_string())));
            }
            None if hits == 0 => ctx.inconclusive(format!("C{n}: no B with distance {target} up to length {bound}"), None),
            None => ctx.evidence.push(format!("C{n}: {hits} sets with distance {target}, all with Delta = {{{target}}} (|B| <= {bound})")),
        }
    }
    Ok(())
}

fn check_delta_star(ctx: &mut Ctx, p: &Params) -> Result<()> {
    let cases: Vec<(FiniteAbelianGroup, Option<LengthSet>)> = match p.0.get("group") {
        Some(_) => p.groups(&[])?.into_iter().map(|g| (g, None)).collect(),
        None => vec![
            ("C5".parse()?, Some(LengthSet::from_iter([1, 3]))),
            ("C6".parse()?, Some(LengthSet::from_iter([1, 2, 4]))),
            ("C2^3".parse()?, Some(LengthSet::from_iter([1, 2]))),
            ("C7".parse()?, None),
        ],
    };
    for (g, want) in cases {
        let bound = p.get_or("bound", 3 * (g.exponent() as u64).max(g.d_star()) as usize)?;
        let r = delta_star_observed(&g, bound, ctx.jobs)?;
        let repro = format!("zslab delta-star --group {g} --bound {bound}");
        let what = format!("Delta*_obs({g}, {bound})");
        match want {
            Some(w) => ctx.expect_observed(&what, &r.values, &w, repro),
            None => {
                // exp-3 is excluded while 1 and exp-2 are present
                let n = g.exponent();
                let required = LengthSet::from_iter([1, n - 2]);
                if r.values.contains(n - 3) {
                    let who = r.details.iter().find(|s| s.min_delta == Some(n - 3));
                    let detail = who.map(|s| format!(" from {}", format_subset_strs(&s.subset))).unwrap_or_default();
                    ctx.fail(format!("{what} = {} contains {}{detail}", r.values, n - 3), Some(repro));
                } else if !required.is_subset(&r.values) {
                    ctx.inconclusive(format!("{what} = {} misses part of {required}", r.values), Some(repro));
                } else {
                    ctx.evidence.push(format!("{what} = {}: {} absent, {required} present", r.values, n - 3));
                }
            }
        }
    }
    Ok(())
}

fn format_subset_strs(s: &[String]) -> String {
    format!("[{}]", s.join(","))
}

fn check_closed_forms(ctx: &mut Ctx, p: &Params) -> Result<()> {
    let bound = p.get_or("bound", 12usize)?;
    for g in p.groups(&["C1", "C2", "C3", "C2^2", "C4", "C2^3", "C3^2"])? {
        let mut m = ctx.monoid(&g, None)?;
        type Acc = (usize, Option<Counts>);
        let gg = g.clone();
        let (count, bad): Acc = m.scan(
            1,
            bound,
            false,
            || (0, None),
            |acc: &mut Acc, c, l| {
                acc.0 += 1;
                let member = closed_form_membership(&gg, l).map(|r| r.member).unwrap_or(false);
                if !member && acc.1.as_ref().is_none_or(|b| crate::zerosum::canonical_cmp(c, b).is_lt()) {
                    acc.1 = Some(c.clone());
                }
            },
            merge_count_witness,
        );
        closed_form_membership(&g, &LengthSet::singleton(1))?;
        report_scan(ctx, &g, &mut m, count, bad, bound, "matches no family");
    }
    Ok(())
}

fn merge_count_witness(a: (usize, Option<Counts>), b: (usize, Option<Counts>)) -> (usize, Option<Counts>) {
    let bad = match (a.1, b.1) {
        (Some(x), Some(y)) => Some(if crate::zerosum::canonical_cmp(&y, &x).is_lt() { y } else { x }),
        (x, y) => x.or(y),
    };
    (a.0 + b.0, bad)
}

fn report_scan(ctx: &mut Ctx, g: &FiniteAbelianGroup, m: &mut BlockMonoid, count: usize, bad: Option<Counts>, bound: usize, what: &str) {
    match bad {
        Some(c) => {
            let s = m.atoms().sequence_of(&c);
            let l = m.lengths_of(&c);
            ctx.fail(format!("{g}: L({s}) = {l} {what}"), Some(repro_lengths(g, None, &s.to_string())));
        }
        None => ctx.evidence.push(format!("{g}: all {count} zero-sum sequences with |B| <= {bound}")),
    }
}

fn check_c5_shapes(ctx: &mut Ctx, p: &Params) -> Result<()> {
    let bound = p.get_or("bound", 15usize)?;
    let g = FiniteAbelianGroup::cyclic(5)?;
    let mut m = ctx.monoid(&g, None)?;
    type Acc = (usize, Option<Counts>);
    let (count, bad): Acc = m.scan(
        1,
        bound,
        false,
        || (0, None),
        |acc: &mut Acc, c, l| {
            acc.0 += 1;
            if c5_shape(l) == C5Shape::None && acc.1.as_ref().is_none_or(|b| crate::zerosum::canonical_cmp(c, b).is_lt()) {
                acc.1 = Some(c.clone());
            }
        },
        merge_count_witness,
    );
    report_scan(ctx, &g, &mut m, count, bad, bound, "has none of the four shapes");
    Ok(())
}

fn check_aamp_examples(ctx: &mut Ctx, p: &Params) -> Result<()> {
    // e1, e2, g, h independent of orders 2, 2, 10, 14 inside C2^3 x C70
    let grp = FiniteAbelianGroup::new(&[2, 2, 10, 14])?;
    let e1 = grp.element(&[1, 0, 0, 0])?;
    let e2 = grp.element(&[0, 1, 0, 0])?;
    let g = grp.element(&[0, 0, 1, 14])?;
    let h = grp.element(&[0, 0, 0, 5])?;
    let orders: Vec<u64> = [&e1, &e2, &g, &h].iter().map(|x| grp.order_of(x)).collect::<Result<_>>()?;
    if orders != [2, 2, 10, 14] || !grp.is_independent(&[e1.clone(), e2.clone(), g.clone(), h.clone()])? {
        return Err(Error::OutOfContract("example elements are not independent of orders 2, 2, 10, 14".into()));
    }
    let (mg, mh, s) = (grp.neg(&g)?, grp.neg(&h)?, grp.add(&e1, &e2)?);
    for k in p.values("k", 1..=2)? {
        let base = seq(&grp, &[(&g, 10 * k), (&mg, 10 * k), (&h, 14 * k), (&mh, 14 * k)])?;
        let subset: Vec<GroupElement> = vec![g.clone(), mg.clone(), h.clone(), mh.clone()];
        let l = ctx.monoid(&grp, Some(&subset))?.length_set(&base)?;
        let mut want = LengthSet::from_iter([4 * k, 24 * k]);
        want.union_with(&LengthSet::progression(4 * k + 8, 4, 5 * k - 4));
        let repro = Some(format!("zslab lengths --group {grp} --subset '{}' --seq '{base}'", format_subset(&subset)));
        ctx.expect(&format!("k={k}: L"), l.clone(), want, repro.clone());
        match classify_aamp(&l, 4, 8) {
            Some(d) if d.period == [0, 4] => ctx.evidence.push(format!("k={k}: AAP {d}")),
            other => ctx.fail(format!("k={k}: {l} not an AAP with difference 4, bound 8 ({other:?})"), repro),
        }
        let extra = seq(&grp, &[(&e1, 2), (&e2, 2), (&s, 2)])?;
        let full = base.mul(&extra)?;
        let mut subset2 = subset.clone();
        subset2.extend([e1.clone(), e2.clone(), s.clone()]);
        let l2 = ctx.monoid(&grp, Some(&subset2))?.length_set(&full)?;
        let want2 = sumset(&l, &LengthSet::from_iter([2, 3]));
        let repro2 = Some(format!("zslab lengths --group {grp} --subset '{}' --seq '{full}'", format_subset(&subset2)));
        ctx.expect(&format!("k={k}: L with (e1 e2 (e1+e2))^2"), l2.clone(), want2, repro2.clone());
        match classify_aamp(&l2, 4, 8) {
            Some(d) if d.period == [0, 1, 4] => ctx.evidence.push(format!("k={k}: AAMP {d}")),
            other => ctx.fail(format!("k={k}: {l2} not an AAMP with period {{0,1,4}}, bound 8 ({other:?})"), repro2),
        }
    }
    Ok(())
}

fn check_structure_empirics(ctx: &mut Ctx, p: &Params) -> Result<()> {
    let bound = p.get_or("bound", 15usize)?;
    for g in p.groups(&["C5", "C6", "C3^2"])? {
        let ds_bound = p.get_or("delta_star_bound", 3 * g.exponent() as usize)?;
        let ds = delta_star_observed(&g, ds_bound, ctx.jobs)?.values.to_vec();
        if ds.is_empty() {
            ctx.inconclusive(format!("{g}: empty observed Delta*"), None);
            continue;
        }
        let mut m = ctx.monoid(&g, None)?;
        // (count, unclassified witness, (max bound, its witness))
        type Acc = (usize, Option<Counts>, Option<(u32, Counts)>);
        let ds_ref = &ds;
        let (count, bad, worst): Acc = m.scan(
            1,
            bound,
            true,
            || (0, None, None),
            |acc: &mut Acc, c, l| {
                acc.0 += 1;
                let best = ds_ref.iter().filter_map(|&d| min_bound(l, d).map(|x| x.0)).min();
                match best {
                    None => {
                        if acc.1.as_ref().is_none_or(|b| crate::zerosum::canonical_cmp(c, b).is_lt()) {
                            acc.1 = Some(c.clone());
                        }
                    }
                    Some(mb) => {
                        let better = match &acc.2 {
                            None => true,
                            Some((v, w)) => mb > *v || (mb == *v && crate::zerosum::canonical_cmp(c, w).is_lt()),
                        };
                        if better {
                            acc.2 = Some((mb, c.clone()));
                        }
                    }
                }
            },
            |a, b| {
                let (n, bad) = merge_count_witness((a.0, a.1), (b.0, b.1));
                let worst = match (a.2, b.2) {
                    (Some(x), Some(y)) => Some(if y.0 > x.0 || (y.0 == x.0 && crate::zerosum::canonical_cmp(&y.1, &x.1).is_lt()) { y } else { x }),
                    (x, y) => x.or(y),
                };
                (n, bad, worst)
            },
        );
        if bad.is_some() {
            report_scan(ctx, &g, &mut m, count, bad, bound, "is not an AAMP for any observed difference");
            continue;
        }
        let worst_txt = worst
            .map(|(v, c)| format!("{v} at {}", m.atoms().sequence_of(&c)))
            .unwrap_or_else(|| "0".into());
        ctx.evidence.push(format!(
            "{g}: {count} sets (|B| <= {bound}), differences {}, largest minimal bound {worst_txt}",
            LengthSet::from_iter(ds.iter().copied())
        ));
    }
    Ok(())
}

fn check_cf(ctx: &mut Ctx, p: &Params) -> Result<()> {
    let nmax = p.get_or("nmax", 16u32)?;
    let mut compared = 0;
    for n in 3..=nmax {
        let (g, e) = cyclic_generator(n)?;
        for a in 2..n {
            if num_integer::gcd(a, n) != 1 {
                continue;
            }
            let cf = min_delta_two_element(n, a)?;
            let subset = vec![e.clone(), g.scale(a as i64, &e)?];
            let mut m = ctx.monoid(&g, Some(&subset))?;
            let mut bound = 4 * n as usize;
            let mut observed = m.delta_observed(bound).min();
            if observed != Some(cf) {
                bound *= 2;
                observed = m.delta_observed(bound).min();
            }
            compared += 1;
            let repro = format!("zslab delta --group {g} --subset '{}' --bound {bound}", format_subset(&subset));
            match observed {
                Some(v) => {
                    if v != cf {
                        ctx.expect(&format!("min Delta({{e,{a}e}}) in C{n}"), v, cf, Some(repro));
                    }
                }
                None => ctx.inconclusive(format!("C{n}, a={a}: no distance up to {bound}"), Some(repro)),
            }
        }
    }
    for (n, a, want) in [(7u32, 6u32, 5u32), (10, 3, 2)] {
        let got = min_delta_two_element(n, a)?;
        ctx.expect(&format!("cf min Delta(n={n}, a={a})"), got, want, Some(format!("zslab mindelta-cf --n {n} --a {a}")));
    }
    ctx.note(format!("{compared} pairs agree"));
    Ok(())
}

fn check_structure_bound_example(ctx: &mut Ctx, p: &Params) -> Result<()> {
    let n = p.get_or("n", 10u32)?;
    let k = p.get_or("k", 10u32)?;
    if n < 6 || n % 2 != 0 || (n / 2) % 2 != 1 {
        return Err(Error::OutOfContract("n must be even with n/2 odd and n >= 6".into()));
    }
    let l = sumset(&LengthSet::progression(2 * k, n / 2 - 2, k), &LengthSet::progression(2 * k, n - 2, k));
    let (mb, desc) = min_bound(&l, 1).ok_or(Error::EmptyLengthSet)?;
    let floor = (n - 3) * (n / 2 - 3);
    let set = l.to_vec().iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
    let repro = Some(format!("zslab aamp min-bound --set {set} --d 1"));
    if mb >= floor {
        ctx.evidence.push(format!("n={n} k={k}: min bound {mb} >= {floor} ({desc})"));
        ctx.note(format!("min bound {mb} >= {floor}"));
    } else {
        ctx.expect(&format!("n={n} k={k}: min bound >= {floor}"), mb, floor, repro);
    }
    Ok(())
}
