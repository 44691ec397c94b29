//! Elements with prescribed quadratic Hilbert symbols against a fixed family.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::approx::Approx;
use crate::arith;
use crate::enumerate::small_integral;
use crate::error::{Error, Result};
use crate::field::{FieldCtx, NfElem};
use crate::place::{self, infinite_places, primes_above, Place, PrimeIdeal};
use crate::symbols::{candidate_places, hilbert_symbol, is_local_square, Sign};

/// Targets `ε_{i,v}` for the family `a_i`; unlisted entries are `+1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prescription {
    pub family: Vec<NfElem>,
    pub targets: BTreeMap<(usize, Place), Sign>,
}

impl Prescription {
    pub fn new(family: Vec<NfElem>) -> Prescription {
        Prescription { family, targets: BTreeMap::new() }
    }

    pub fn set(&mut self, row: usize, place: Place, sign: Sign) {
        if sign == Sign::Plus {
            self.targets.remove(&(row, place));
        } else {
            self.targets.insert((row, place), sign);
        }
    }

    pub fn target(&self, row: usize, place: &Place) -> Sign {
        self.targets
            .get(&(row, place.clone()))
            .copied()
            .unwrap_or(Sign::Plus)
    }

    /// Places carrying at least one `-1`.
    pub fn flagged_places(&self) -> BTreeSet<Place> {
        self.targets
            .iter()
            .filter(|(_, s)| **s == Sign::Minus)
            .map(|((_, v), _)| v.clone())
            .collect()
    }

    /// Rows `a_i := <elem>` then entries `(i, <place>) = -1`, rows counted from 1.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, a) in self.family.iter().enumerate() {
            out.push_str(&format!("a_{} := {a}\n", i + 1));
        }
        for ((i, v), s) in &self.targets {
            out.push_str(&format!("({}, {v}) = {s}\n", i + 1));
        }
        out
    }

    pub fn parse(ctx: &FieldCtx, text: &str) -> Result<Prescription> {
        let mut family = Vec::new();
        let mut entries = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let bad = || Error::Input(format!("bad prescription line {line:?}"));
            if let Some((lhs, rhs)) = line.split_once(":=") {
                let idx: usize = lhs.trim().strip_prefix("a_").ok_or_else(bad)?.parse().map_err(|_| bad())?;
                if idx != family.len() + 1 {
                    return Err(Error::Input(format!("row a_{idx} out of order")));
                }
                family.push(ctx.elem(rhs.trim())?);
            } else {
                let (lhs, rhs) = line.split_once('=').ok_or_else(bad)?;
                let inner = lhs.trim().strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
                let (i, v) = inner.split_once(',').ok_or_else(bad)?;
                let i: usize = i.trim().parse().map_err(|_| bad())?;
                entries.push((i, Place::parse(ctx.field(), v.trim())?, Sign::parse(rhs)?));
            }
        }
        let mut p = Prescription::new(family);
        for (i, v, s) in entries {
            if i == 0 || i > p.family.len() {
                return Err(Error::Input(format!("row index {i} out of range")));
            }
            p.set(i - 1, v, s);
        }
        Ok(p)
    }
}

/// A reason a prescription has no solution.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    EmptyFamily,
    ZeroEntry { row: usize },
    /// The row's targets multiply to `-1`.
    RowProduct { row: usize },
    /// No local class realizes the column at this place.
    LocalUnsolvable { place: Place },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyFamily => write!(f, "empty family"),
            Violation::ZeroEntry { row } => write!(f, "row {} is zero", row + 1),
            Violation::RowProduct { row } => {
                write!(f, "row product: targets of row {} multiply to -1", row + 1)
            }
            Violation::LocalUnsolvable { place } => {
                write!(f, "local obstruction: no local solution at {place}")
            }
        }
    }
}

/// Outcome of [`check_conditions`]: violations, or a local class per flagged place.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub violations: Vec<Violation>,
    pub local: BTreeMap<Place, NfElem>,
}

impl CheckReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Global elements whose images form an `F_2`-basis of `K_v^x / K_v^x2`.
pub fn local_square_class_basis(ctx: &FieldCtx, v: &Place) -> Result<Vec<NfElem>> {
    let f = ctx.field();
    match v {
        Place::Complex => Ok(Vec::new()),
        Place::Real(_) => Ok(vec![NfElem::from_int(f, -1)]),
        Place::Finite(prime) if !prime.is_dyadic() => {
            let gf = prime.residue_field();
            let u = place::lift(prime, &gf, gf.non_square().expect("odd residue field"));
            Ok(vec![u, prime.uniformizer()])
        }
        Place::Finite(prime) => {
            let rank = prime.local_degree() as usize + 2;
            let pi = prime.uniformizer();
            let four = NfElem::from_int(f, 4);
            let one = NfElem::one(f);
            let mut cands = vec![NfElem::from_int(f, -1)];
            let mut steps = small_integral(f, 2);
            steps.sort_by_key(|s| (crate::approx::size(s), s.c1().is_negative(), s.c0().is_negative()));
            cands.extend(steps.iter().map(|s| &one + &(&four * s)));
            let units: Vec<NfElem> = small_integral(f, 4)
                .into_iter()
                .filter(|x| !x.is_zero() && place::valuation(ctx, x, prime) == 0)
                .collect();
            cands.extend(units.iter().cloned());
            cands.push(pi.clone());
            cands.extend(units.iter().map(|u| u * &pi));
            let mut basis = Vec::new();
            let mut span = vec![NfElem::one(f)];
            for c in cands {
                if basis.len() == rank {
                    break;
                }
                let mut new = true;
                for s in &span {
                    if is_local_square(ctx, &(&c * &s.inv()?), v)? {
                        new = false;
                        break;
                    }
                }
                if new {
                    let more: Vec<NfElem> = span.iter().map(|s| s * &c).collect();
                    span.extend(more);
                    basis.push(c);
                }
            }
            if basis.len() != rank {
                return Err(Error::Invariant(format!(
                    "found rank {} of {rank} for square classes at {v}",
                    basis.len()
                )));
            }
            Ok(basis)
        }
    }
}

/// Global elements representing every class of `K_v^x / K_v^x2`.
pub fn local_class_representatives(ctx: &FieldCtx, v: &Place) -> Result<Vec<NfElem>> {
    let mut span = vec![NfElem::one(ctx.field())];
    for c in local_square_class_basis(ctx, v)? {
        let more: Vec<NfElem> = span.iter().map(|s| s * &c).collect();
        span.extend(more);
    }
    Ok(span)
}

/// Checks nonzero rows, row products, and local solvability at flagged places.
pub fn check_conditions(ctx: &FieldCtx, p: &Prescription) -> Result<CheckReport> {
    let mut violations = Vec::new();
    if p.family.is_empty() {
        violations.push(Violation::EmptyFamily);
    }
    for (i, a) in p.family.iter().enumerate() {
        if a.is_zero() {
            violations.push(Violation::ZeroEntry { row: i });
        }
    }
    if !violations.is_empty() {
        return Ok(CheckReport { violations, local: BTreeMap::new() });
    }
    for (i, _) in p.family.iter().enumerate() {
        let prod = p
            .targets
            .iter()
            .filter(|((r, _), _)| *r == i)
            .fold(Sign::Plus, |acc, (_, s)| acc * *s);
        if prod == Sign::Minus {
            violations.push(Violation::RowProduct { row: i });
        }
    }
    let mut local = BTreeMap::new();
    for v in p.flagged_places() {
        match local_solution(ctx, p, &v)? {
            Some(x) => {
                local.insert(v, x);
            }
            None => violations.push(Violation::LocalUnsolvable { place: v }),
        }
    }
    Ok(CheckReport { violations, local })
}

/// A local class with the prescribed column at `v`.
fn local_solution(ctx: &FieldCtx, p: &Prescription, v: &Place) -> Result<Option<NfElem>> {
    for x in local_class_representatives(ctx, v)? {
        let mut ok = true;
        for (i, a) in p.family.iter().enumerate() {
            if hilbert_symbol(ctx, a, &x, v)? != p.target(i, v) {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Search limits for [`solve`].
#[derive(Clone, Copy, Debug)]
pub struct SolveConfig {
    pub attempts: usize,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { attempts: 20_000, seed: 0 }
    }
}

/// A solution with its full symbol table.
#[derive(Clone, Debug)]
pub struct Solved {
    pub x: NfElem,
    /// `(row, place, symbol)` over every place where a symbol can be `-1`.
    pub table: Vec<(usize, Place, Sign)>,
    pub attempts: usize,
}

/// Finds `x` with `(a_i, x)_v = ε_{i,v}` everywhere.
///
/// `x` is pinned to the chosen local class at the dyadic primes, the flagged
/// places and the real places, and to `1` at further primes of the family
/// while the congruence step stays small. It is then shifted until it is a
/// unit at the remaining primes of the family, has the right symbols there,
/// and its support outside them is a single prime.
pub fn solve(ctx: &FieldCtx, p: &Prescription, config: SolveConfig) -> Result<Solved> {
    let report = check_conditions(ctx, p)?;
    if !report.is_ok() {
        let list: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::Input(format!("prescription is inadmissible: {}", list.join("; "))));
    }
    let f = ctx.field();
    let mut pinned: BTreeSet<PrimeIdeal> = primes_above(f, 2).into_iter().collect();
    for v in p.flagged_places() {
        if let Place::Finite(q) = v {
            pinned.insert(q);
        }
    }
    let mut rest: BTreeSet<PrimeIdeal> = BTreeSet::new();
    for a in &p.family {
        rest.extend(place::support(ctx, a)?.into_iter().filter(|q| !pinned.contains(q)));
    }
    let mut problem = Approx::new().integral_outside();
    let mut fixed_norm = BigInt::one();
    let mut step_bound = BigInt::one();
    for q in &pinned {
        let v = Place::Finite(q.clone());
        let target = report.local.get(&v).cloned().unwrap_or_else(|| NfElem::one(f));
        let val = place::valuation(ctx, &target, q);
        let two_val = if q.is_dyadic() { q.e() as i64 } else { 0 };
        let k = val + 2 * two_val + 1;
        problem = problem.congruent(q, target, k);
        fixed_norm *= BigInt::from(q.norm()).pow(val as u32);
        step_bound *= BigInt::from(q.p()).pow(k as u32);
    }
    let budget = BigInt::one() << (48 / f.degree() as usize);
    let mut by_norm: Vec<PrimeIdeal> = rest.iter().cloned().collect();
    by_norm.sort_by_key(|q| q.norm());
    let mut checked: Vec<PrimeIdeal> = Vec::new();
    for q in by_norm {
        let cost = if pinned.iter().any(|r| r.p() == q.p()) { 1 } else { q.p() };
        if &step_bound * BigInt::from(cost) <= budget {
            step_bound *= BigInt::from(cost);
            pinned.insert(q.clone());
            problem = problem.congruent(&q, NfElem::one(f), 1);
        } else {
            checked.push(q);
        }
    }
    for v in infinite_places(f) {
        if let Place::Real(_) = v {
            let positive = report
                .local
                .get(&v)
                .map(|x| place::real_sign(x, &v) == Some(std::cmp::Ordering::Greater))
                .unwrap_or(true);
            problem = problem.sign(&v, positive);
        }
    }
    let sol = problem.solve(ctx)?;
    let below: BTreeSet<u64> = pinned.iter().chain(rest.iter()).map(|q| q.p()).collect();
    let limit = BigInt::from(u64::MAX);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let near = small_integral(f, 6);
    'search: for attempt in 0..config.attempts {
        let z = match near.get(attempt) {
            Some(z) => z.clone(),
            None => {
                let r = 8 + (attempt / 1000) as i64 * 8;
                let c1 = if f.degree() == 1 { 0 } else { rng.random_range(-r..=r) };
                NfElem::from_ints(f, rng.random_range(-r..=r), c1)
            }
        };
        let x = &sol.x + &z.scale_int(&sol.step);
        if x.is_zero() || problem.verify(ctx, &x).is_err() {
            continue;
        }
        for q in &checked {
            if place::valuation(ctx, &x, q) != 0 {
                continue 'search;
            }
        }
        let n = x.norm().to_integer().abs();
        let cof = &n / &fixed_norm;
        if &cof * &fixed_norm != n {
            continue;
        }
        let single = cof.is_one()
            || (cof <= limit && arith::is_prime(&cof) && !below.contains(&cof.to_u64().unwrap()))
            || arith::exact_sqrt(&cof).is_some_and(|r| {
                r <= limit
                    && arith::is_prime(&r)
                    && r.to_u64().is_some_and(|r| primes_above(f, r).len() == 1 && !below.contains(&r))
            });
        if !single {
            continue;
        }
        for q in &checked {
            let v = Place::Finite(q.clone());
            for a in &p.family {
                if hilbert_symbol(ctx, a, &x, &v)? == Sign::Minus {
                    continue 'search;
                }
            }
        }
        let table = symbol_table(ctx, p, &x)?;
        if table.iter().all(|(i, v, s)| *s == p.target(*i, v)) {
            return Ok(Solved { x, table, attempts: attempt + 1 });
        }
    }
    Err(Error::SearchExhausted(format!(
        "no solution among {} shifts of {} by multiples of {}",
        config.attempts, sol.x, sol.step
    )))
}

/// Every symbol `(a_i, x)_v` over the places where one can be `-1`, with
/// each row's product checked to be `+1`.
pub fn symbol_table(ctx: &FieldCtx, p: &Prescription, x: &NfElem) -> Result<Vec<(usize, Place, Sign)>> {
    let mut places: BTreeSet<Place> = p.flagged_places();
    for a in &p.family {
        places.extend(candidate_places(ctx, a, x)?);
    }
    let mut table = Vec::new();
    for (i, a) in p.family.iter().enumerate() {
        let mut prod = Sign::Plus;
        for v in &places {
            let s = hilbert_symbol(ctx, a, x, v)?;
            prod = prod * s;
            table.push((i, v.clone(), s));
        }
        if prod == Sign::Minus {
            return Err(Error::Invariant(format!("row {} of ({}, x) has product -1", i + 1, a)));
        }
    }
    Ok(table)
}

/// Rechecks a claimed solution against every target.
pub fn verify_solution(ctx: &FieldCtx, p: &Prescription, x: &NfElem) -> Result<()> {
    for (i, v, s) in symbol_table(ctx, p, x)? {
        if s != p.target(i, &v) {
            return Err(Error::Invariant(format!(
                "({}, {x})_{v} = {s}, expected {}",
                p.family[i],
                p.target(i, &v)
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minus_one_at_two_and_infinity() {
        let ctx = FieldCtx::parse("Q").unwrap();
        let mut p = Prescription::new(vec![ctx.int(-1)]);
        p.set(0, Place::parse(ctx.field(), "p:2").unwrap(), Sign::Minus);
        p.set(0, Place::parse(ctx.field(), "real").unwrap(), Sign::Minus);
        assert!(check_conditions(&ctx, &p).unwrap().is_ok());
        let sol = solve(&ctx, &p, SolveConfig::default()).unwrap();
        verify_solution(&ctx, &p, &sol.x).unwrap();
        let back = Prescription::parse(&ctx, &p.to_text()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn dyadic_classes_over_q() {
        let ctx = FieldCtx::parse("Q").unwrap();
        let reps = local_class_representatives(&ctx, &Place::parse(ctx.field(), "p:2").unwrap()).unwrap();
        let mut s: Vec<String> = reps.iter().map(|x| x.to_string()).collect();
        s.sort();
        let mut want = vec!["1", "-1", "5", "-5", "2", "-2", "10", "-10"];
        want.sort();
        assert_eq!(s, want);
    }
}
