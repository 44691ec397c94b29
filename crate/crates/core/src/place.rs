//! Prime ideals, places, valuations and residue maps.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::arith;
use crate::error::{Error, Result};
use crate::field::{Field, FieldCtx, NfElem};
use crate::residue::{Gf, GfElem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Splitting {
    Rational,
    Split,
    Inert,
    Ramified,
}

/// A nonzero prime of `O_K`. Degree-one primes of a quadratic field are
/// identified by the root `r` with `w ≡ r (mod P)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrimeIdeal {
    field: Field,
    p: u64,
    root: Option<u64>,
    kind: Splitting,
}

impl PrimeIdeal {
    pub fn field(&self) -> Field {
        self.field
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn root(&self) -> Option<u64> {
        self.root
    }

    pub fn kind(&self) -> Splitting {
        self.kind
    }

    pub fn e(&self) -> u32 {
        if self.kind == Splitting::Ramified {
            2
        } else {
            1
        }
    }

    pub fn f(&self) -> u32 {
        if self.kind == Splitting::Inert {
            2
        } else {
            1
        }
    }

    pub fn norm(&self) -> u64 {
        self.p.pow(self.f())
    }

    pub fn is_dyadic(&self) -> bool {
        self.p == 2
    }

    /// `v_P(2)`.
    pub fn dyadic_e(&self) -> u32 {
        if self.is_dyadic() {
            self.e()
        } else {
            0
        }
    }

    /// Local degree `[K_P : Q_p]`.
    pub fn local_degree(&self) -> u32 {
        self.e() * self.f()
    }

    /// An element of valuation exactly one.
    pub fn uniformizer(&self) -> NfElem {
        match (self.kind, self.root) {
            (Splitting::Rational | Splitting::Inert, _) => NfElem::from_int(self.field, self.p),
            (_, Some(r)) => {
                let p2 = BigInt::from(self.p) * self.p;
                let r = [r, r + self.p]
                    .into_iter()
                    .find(|&c| !minpoly_at(self.field, &BigInt::from(c)).is_multiple_of(&p2))
                    .expect("one of r, r + p is a simple root mod p^2");
                &NfElem::omega(self.field) - &NfElem::from_int(self.field, r)
            }
            _ => unreachable!(),
        }
    }

    /// Generators `(p, pi)` of the ideal.
    pub fn generators(&self) -> (NfElem, NfElem) {
        (NfElem::from_int(self.field, self.p), self.uniformizer())
    }

    pub fn residue_field(&self) -> Gf {
        match self.kind {
            Splitting::Inert => {
                let p = self.p as i64;
                let tr = self.field.omega_trace().to_i64().unwrap();
                let n = self.field.omega_norm().to_i64().unwrap();
                Gf::with_modulus(
                    self.p,
                    vec![n.rem_euclid(p) as u64, (-tr).rem_euclid(p) as u64, 1],
                )
                .expect("minimal polynomial of w is irreducible mod an inert prime")
            }
            _ => Gf::new(self.p, 1).expect("prime field"),
        }
    }

    /// The conjugate prime (itself unless split).
    pub fn conjugate(&self) -> PrimeIdeal {
        match (self.kind, self.root) {
            (Splitting::Split, Some(r)) => {
                let tr = self.field.omega_trace().to_u64().unwrap();
                let other = (tr + self.p - r) % self.p;
                PrimeIdeal { root: Some(other), ..self.clone() }
            }
            _ => self.clone(),
        }
    }

    pub fn token(&self) -> String {
        match self.root {
            Some(r) => format!("p:{}:{}", self.p, r),
            None => format!("p:{}", self.p),
        }
    }

    fn sort_key(&self) -> (u64, u64, Option<u64>) {
        (self.norm(), self.p, self.root)
    }
}

impl Ord for PrimeIdeal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for PrimeIdeal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

/// Real embeddings: `Rational` for `Q`, otherwise `sqrt d -> ±|sqrt d|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Embedding {
    Rational,
    Plus,
    Minus,
}

impl Embedding {
    pub fn sign(self) -> i8 {
        match self {
            Embedding::Minus => -1,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Finite(PrimeIdeal),
    Real(Embedding),
    Complex,
}

impl Place {
    pub fn prime(&self) -> Option<&PrimeIdeal> {
        match self {
            Place::Finite(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Place::Finite(_))
    }

    pub fn is_dyadic(&self) -> bool {
        matches!(self, Place::Finite(p) if p.is_dyadic())
    }

    pub fn token(&self) -> String {
        match self {
            Place::Finite(p) => p.token(),
            Place::Real(Embedding::Rational) => "real".into(),
            Place::Real(Embedding::Plus) => "real:+".into(),
            Place::Real(Embedding::Minus) => "real:-".into(),
            Place::Complex => "complex".into(),
        }
    }

    pub fn parse(field: Field, token: &str) -> Result<Place> {
        let t = token.trim();
        let bad = || Error::Input(format!("bad place {token:?} for {field}"));
        match (t, field) {
            ("real", Field::Rational) => return Ok(Place::Real(Embedding::Rational)),
            ("real:+", Field::Quadratic(d)) if d > 0 => return Ok(Place::Real(Embedding::Plus)),
            ("real:-", Field::Quadratic(d)) if d > 0 => return Ok(Place::Real(Embedding::Minus)),
            ("complex", Field::Quadratic(d)) if d < 0 => return Ok(Place::Complex),
            _ => {}
        }
        let rest = t.strip_prefix("p:").ok_or_else(bad)?;
        let (p, root) = match rest.split_once(':') {
            Some((p, r)) => (p, Some(r.parse::<u64>().map_err(|_| bad())?)),
            None => (rest, None),
        };
        let p: u64 = p.parse().map_err(|_| bad())?;
        if !arith::is_prime_u64(p) {
            return Err(bad());
        }
        primes_above(field, p)
            .into_iter()
            .find(|q| q.root == root)
            .map(Place::Finite)
            .ok_or_else(bad)
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

pub fn infinite_places(field: Field) -> Vec<Place> {
    match field {
        Field::Rational => vec![Place::Real(Embedding::Rational)],
        Field::Quadratic(d) if d > 0 => {
            vec![Place::Real(Embedding::Plus), Place::Real(Embedding::Minus)]
        }
        Field::Quadratic(_) => vec![Place::Complex],
    }
}

pub fn real_places(field: Field) -> Vec<Place> {
    infinite_places(field)
        .into_iter()
        .filter(|v| matches!(v, Place::Real(_)))
        .collect()
}

/// `w^2 - tr(w) w + N(w)` evaluated at an integer.
fn minpoly_at(field: Field, x: &BigInt) -> BigInt {
    x * x - field.omega_trace() * x + field.omega_norm()
}

/// The primes of `O_K` above the rational prime `p`, ordered by root.
pub fn primes_above(field: Field, p: u64) -> Vec<PrimeIdeal> {
    let mk = |root, kind| PrimeIdeal { field, p, root, kind };
    if field == Field::Rational {
        return vec![mk(None, Splitting::Rational)];
    }
    let roots: Vec<u64> = if p == 2 {
        (0..2u64)
            .filter(|&r| minpoly_at(field, &BigInt::from(r)).is_even())
            .collect()
    } else {
        let disc = field.disc().mod_floor(&BigInt::from(p)).to_u64().unwrap();
        match arith::sqrt_mod_prime(disc, p) {
            None => Vec::new(),
            Some(s) => {
                let tr = field.omega_trace().to_u64().unwrap();
                let inv2 = (p + 1) / 2;
                let half = |x: u64| ((x as u128 * inv2 as u128) % p as u128) as u64;
                let r1 = half((tr + s) % p);
                let r2 = half((tr + p - s) % p);
                let mut v = vec![r1, r2];
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    };
    match roots.len() {
        0 => vec![mk(None, Splitting::Inert)],
        1 if p == 2 && field.half_integral_basis() => unreachable!(),
        1 => vec![mk(Some(roots[0]), Splitting::Ramified)],
        _ => roots
            .into_iter()
            .map(|r| mk(Some(r), Splitting::Split))
            .collect(),
    }
}

/// Primes of `O_K` of norm at most `bound`, ascending by norm.
pub fn primes_up_to_norm(field: Field, bound: u64) -> Vec<PrimeIdeal> {
    let mut out: Vec<PrimeIdeal> = arith::primes_up_to(bound)
        .into_iter()
        .flat_map(|p| primes_above(field, p))
        .filter(|q| q.norm() <= bound)
        .collect();
    out.sort();
    out
}

/// Lift of the root of `P` to a root of the minimal polynomial of `w` modulo `p^k`.
fn lifted_root(ctx: &FieldCtx, prime: &PrimeIdeal, k: u32) -> BigInt {
    let r = prime.root.expect("degree-one prime");
    let key = (prime.p, r, k);
    if let Some(v) = ctx.root_cache.lock().unwrap().get(&key) {
        return v.clone();
    }
    let field = prime.field;
    let p = BigInt::from(prime.p);
    let mut root = BigInt::from(r);
    let mut prec = 1u32;
    while prec < k {
        prec = (2 * prec).min(k);
        let m = p.pow(prec);
        let f = minpoly_at(field, &root);
        let df = BigInt::from(2) * &root - field.omega_trace();
        let inv = arith::mod_inv(&df, &m).expect("simple root");
        root = (&root - f * inv).mod_floor(&m);
    }
    let root = root.mod_floor(&p.pow(k.max(1)));
    ctx.root_cache.lock().unwrap().insert(key, root.clone());
    root
}

/// `v_P(n0 + n1 w)` for integers not both zero.
fn int_valuation(ctx: &FieldCtx, n0: &BigInt, n1: &BigInt, prime: &PrimeIdeal) -> i64 {
    let p = prime.p;
    match prime.kind {
        Splitting::Rational => arith::vp(n0, p).unwrap() as i64,
        Splitting::Inert => {
            let a = arith::vp(n0, p).unwrap_or(u32::MAX);
            let b = arith::vp(n1, p).unwrap_or(u32::MAX);
            a.min(b) as i64
        }
        Splitting::Ramified => {
            let n = int_norm(prime.field, n0, n1);
            arith::vp(&n, p).unwrap() as i64
        }
        Splitting::Split => {
            let n = int_norm(prime.field, n0, n1);
            let bound = arith::vp(&n, p).unwrap();
            let m = BigInt::from(p).pow(bound + 1);
            let root = lifted_root(ctx, prime, bound + 1);
            let t = (n0 + n1 * root).mod_floor(&m);
            arith::vp(&t, p).expect("valuation bounded by the norm") as i64
        }
    }
}

fn int_norm(field: Field, n0: &BigInt, n1: &BigInt) -> BigInt {
    n0 * n0 + field.omega_trace() * n0 * n1 + field.omega_norm() * n1 * n1
}

/// `v_P(x)`, or `None` for `x = 0`.
pub fn valuation_opt(ctx: &FieldCtx, x: &NfElem, prime: &PrimeIdeal) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let (n0, n1, den) = x.integral_parts();
    let vn = int_valuation(ctx, &n0, &n1, prime);
    let vd = arith::vp(&den, prime.p).unwrap() as i64 * prime.e() as i64;
    Some(vn - vd)
}

/// `v_P(x)` for nonzero `x`.
pub fn valuation(ctx: &FieldCtx, x: &NfElem, prime: &PrimeIdeal) -> i64 {
    valuation_opt(ctx, x, prime).expect("valuation of zero")
}

pub fn try_valuation(ctx: &FieldCtx, x: &NfElem, prime: &PrimeIdeal) -> Result<i64> {
    valuation_opt(ctx, x, prime).ok_or_else(|| Error::Input("valuation of 0".into()))
}

pub fn is_integral_at(ctx: &FieldCtx, x: &NfElem, prime: &PrimeIdeal) -> bool {
    valuation_opt(ctx, x, prime).is_none_or(|v| v >= 0)
}

/// Integral `y` with `v_P(x - y) >= k`; requires `v_P(x) >= 0`.
pub fn local_rep(ctx: &FieldCtx, x: &NfElem, prime: &PrimeIdeal, k: u32) -> NfElem {
    let field = prime.field;
    if x.is_zero() || k == 0 {
        return NfElem::zero(field);
    }
    debug_assert!(is_integral_at(ctx, x, prime));
    let p = BigInt::from(prime.p);
    let (n0, n1, den) = x.integral_parts();
    let (s, m) = arith::split_prime(&den, prime.p);
    match prime.kind {
        Splitting::Rational | Splitting::Split => {
            let modulus = p.pow(k + s);
            let value = match prime.kind {
                Splitting::Split => {
                    let root = lifted_root(ctx, prime, k + s);
                    (&n0 + &n1 * root).mod_floor(&modulus)
                }
                _ => n0.mod_floor(&modulus),
            };
            let pk = p.pow(k);
            let value = value / p.pow(s);
            let inv = arith::mod_inv(&m, &pk).expect("unit");
            NfElem::from_int(field, (value * inv).mod_floor(&pk))
        }
        Splitting::Inert | Splitting::Ramified => {
            let ps = p.pow(s);
            let prec = if prime.kind == Splitting::Ramified { k.div_ceil(2) } else { k };
            let pk = p.pow(prec);
            let inv = arith::mod_inv(&m, &pk).expect("unit");
            let c0 = (&n0 / &ps * &inv).mod_floor(&pk);
            let c1 = (&n1 / &ps * &inv).mod_floor(&pk);
            NfElem::from_ints(field, c0, c1)
        }
    }
}

/// Image of a `P`-integral element in the residue field.
pub fn reduce(ctx: &FieldCtx, x: &NfElem, prime: &PrimeIdeal, gf: &Gf) -> GfElem {
    let rep = local_rep(ctx, x, prime, 1);
    let (c0, c1) = rep.int_coords();
    let p = BigInt::from(prime.p);
    match prime.kind {
        Splitting::Inert => {
            let d0 = c0.mod_floor(&p).to_u64().unwrap();
            let d1 = c1.mod_floor(&p).to_u64().unwrap();
            gf.from_digits(&[d0, d1])
        }
        Splitting::Ramified => {
            let r = BigInt::from(prime.root.unwrap());
            (c0 + c1 * r).mod_floor(&p).to_u64().unwrap()
        }
        _ => c0.mod_floor(&p).to_u64().unwrap(),
    }
}

/// Integral element reducing to `g`.
pub fn lift(prime: &PrimeIdeal, gf: &Gf, g: GfElem) -> NfElem {
    let d = gf.digits(g);
    match prime.kind {
        Splitting::Inert => NfElem::from_ints(prime.field, d[0], d[1]),
        _ => NfElem::from_int(prime.field, d[0]),
    }
}

/// Nonzero valuations of `x`, ascending by prime.
pub fn factor_elem(ctx: &FieldCtx, x: &NfElem) -> Result<Vec<(PrimeIdeal, i64)>> {
    if x.is_zero() {
        return Err(Error::Input("cannot factor 0".into()));
    }
    let mut out = Vec::new();
    for p in rational_primes_under(x)? {
        for q in primes_above(x.field(), p) {
            let v = valuation(ctx, x, &q);
            if v != 0 {
                out.push((q, v));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Rational primes below any prime in the support of nonzero `x`.
pub fn rational_primes_under(x: &NfElem) -> Result<Vec<u64>> {
    let (n0, n1, den) = x.integral_parts();
    let norm = int_norm(x.field(), &n0, &n1);
    let mut ps: Vec<u64> = Vec::new();
    for n in [norm, den] {
        if n.abs().is_one() {
            continue;
        }
        for (p, _) in arith::factor_integer(&n) {
            ps.push(p.to_u64().ok_or_else(|| {
                Error::Unsupported(format!("{x} has a prime factor {p} above 2^64"))
            })?);
        }
    }
    ps.sort_unstable();
    ps.dedup();
    Ok(ps)
}

/// Places where `x` has nonzero valuation.
pub fn support(ctx: &FieldCtx, x: &NfElem) -> Result<Vec<PrimeIdeal>> {
    Ok(factor_elem(ctx, x)?.into_iter().map(|(p, _)| p).collect())
}

/// Sign of `x` at a real place.
pub fn real_sign(x: &NfElem, place: &Place) -> Option<Ordering> {
    match place {
        Place::Real(e) => x.real_sign(e.sign()),
        _ => None,
    }
}

pub fn is_zero_or_unit_at(ctx: &FieldCtx, x: &NfElem, prime: &PrimeIdeal) -> bool {
    valuation_opt(ctx, x, prime).is_none_or(|v| v == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(s: &str) -> FieldCtx {
        FieldCtx::parse(s).unwrap()
    }

    #[test]
    fn splitting_types() {
        let k = ctx("Q(sqrt,-1)");
        let f = k.field();
        assert_eq!(primes_above(f, 2)[0].kind(), Splitting::Ramified);
        assert_eq!(primes_above(f, 3)[0].kind(), Splitting::Inert);
        assert_eq!(primes_above(f, 5).len(), 2);
        let k = ctx("Q(sqrt,-7)");
        assert_eq!(primes_above(k.field(), 2).len(), 2);
        let k = ctx("Q(sqrt,5)");
        assert_eq!(primes_above(k.field(), 2)[0].kind(), Splitting::Inert);
        assert_eq!(primes_above(k.field(), 5)[0].kind(), Splitting::Ramified);
    }

    #[test]
    fn uniformizers_have_valuation_one() {
        for s in ["Q", "Q(sqrt,-1)", "Q(sqrt,-5)", "Q(sqrt,5)", "Q(sqrt,-7)", "Q(sqrt,3)"] {
            let k = ctx(s);
            for q in primes_up_to_norm(k.field(), 60) {
                assert_eq!(valuation(&k, &q.uniformizer(), &q), 1, "{s} {q}");
            }
        }
    }

    #[test]
    fn valuation_examples() {
        let k = ctx("Q(sqrt,-1)");
        let f = k.field();
        let half = NfElem::parse(f, "1/2").unwrap();
        let fac = factor_elem(&k, &half).unwrap();
        assert_eq!(fac.len(), 1);
        assert_eq!(fac[0].1, -2);
        let q = ctx("Q");
        let x = NfElem::parse(Field::Rational, "12/5").unwrap();
        let fac: Vec<(u64, i64)> = factor_elem(&q, &x)
            .unwrap()
            .into_iter()
            .map(|(p, v)| (p.p(), v))
            .collect();
        assert_eq!(fac, vec![(2, 2), (3, 1), (5, -1)]);
    }

    #[test]
    fn local_rep_is_close() {
        let k = ctx("Q(sqrt,-5)");
        let f = k.field();
        let x = NfElem::parse(f, "3/7 + 5/7*w").unwrap();
        for q in primes_up_to_norm(f, 50) {
            if !is_integral_at(&k, &x, &q) {
                continue;
            }
            for n in 1..5 {
                let y = local_rep(&k, &x, &q, n);
                assert!(y.is_integral());
                let d = &x - &y;
                assert!(d.is_zero() || valuation(&k, &d, &q) >= n as i64, "{q} {n}");
            }
        }
    }

    #[test]
    fn place_tokens_roundtrip() {
        let k = ctx("Q(sqrt,5)");
        for q in primes_up_to_norm(k.field(), 40) {
            let pl = Place::Finite(q);
            assert_eq!(Place::parse(k.field(), &pl.token()).unwrap(), pl);
        }
        assert!(Place::parse(k.field(), "p:4").is_err());
        assert!(Place::parse(k.field(), "complex").is_err());
    }
}
