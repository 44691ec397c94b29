//! Local squares, quadratic Hilbert symbols and ramification sets.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::Mul;
use std::sync::Mutex;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_traits::ToPrimitive;

use crate::conic;
use crate::error::{Error, Result};
use crate::field::{FieldCtx, NfElem};
use crate::place::{self, infinite_places, primes_above, Place, PrimeIdeal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_bool(plus: bool) -> Sign {
        if plus {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn value(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn parse(s: &str) -> Result<Sign> {
        match s.trim() {
            "1" | "+1" | "+" => Ok(Sign::Plus),
            "-1" | "-" => Ok(Sign::Minus),
            other => Err(Error::Input(format!("bad sign {other:?}"))),
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_bool(self == rhs)
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

type ClassKey = (u32, i128, i128);

/// Cache of local conic outcomes keyed by normalized square-class data.
#[derive(Default)]
pub struct SymbolMemo {
    table: Mutex<HashMap<(PrimeIdeal, ClassKey, ClassKey), bool>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl SymbolMemo {
    pub fn stats(&self) -> (u64, u64) {
        (
            self.hits.load(AtomicOrdering::Relaxed),
            self.misses.load(AtomicOrdering::Relaxed),
        )
    }
}

fn nonzero(x: &NfElem, what: &str) -> Result<()> {
    if x.is_zero() {
        Err(Error::Input(format!("{what} must be nonzero")))
    } else {
        Ok(())
    }
}

/// `x = pi^v u`; returns `v` and the unit `u`.
fn split_uniformizer(ctx: &FieldCtx, x: &NfElem, prime: &PrimeIdeal) -> (i64, NfElem) {
    let v = place::valuation(ctx, x, prime);
    let u = x * &prime.uniformizer().pow(-v);
    (v, u)
}

/// Whether `x` is a square in the completion at `place`.
pub fn is_local_square(ctx: &FieldCtx, x: &NfElem, place: &Place) -> Result<bool> {
    nonzero(x, "x")?;
    Ok(match place {
        Place::Complex => true,
        Place::Real(e) => x.real_sign(e.sign()) == Some(std::cmp::Ordering::Greater),
        Place::Finite(prime) => {
            let (v, u) = split_uniformizer(ctx, x, prime);
            if v % 2 != 0 {
                return Ok(false);
            }
            if prime.is_dyadic() {
                let e = prime.dyadic_e();
                let rep = place::local_rep(ctx, &u, prime, 2 * e + 1);
                conic::unit_is_square_dyadic(ctx, prime, &rep)
            } else {
                let gf = prime.residue_field();
                gf.is_square(place::reduce(ctx, &u, prime, &gf))
            }
        }
    })
}

/// Quadratic Hilbert symbol `(a, b)_v`.
pub fn hilbert_symbol(ctx: &FieldCtx, a: &NfElem, b: &NfElem, place: &Place) -> Result<Sign> {
    nonzero(a, "a")?;
    nonzero(b, "b")?;
    Ok(match place {
        Place::Complex => Sign::Plus,
        Place::Real(e) => {
            let neg = |x: &NfElem| x.real_sign(e.sign()) == Some(std::cmp::Ordering::Less);
            Sign::from_bool(!(neg(a) && neg(b)))
        }
        Place::Finite(prime) if prime.is_dyadic() => conic_symbol(ctx, a, b, prime),
        Place::Finite(prime) => tame_symbol(ctx, a, b, prime),
    })
}

/// Odd residue characteristic: `((-1)^{αβ} u_a^β / u_b^α mod P)^{(q-1)/2}`.
pub fn tame_symbol(ctx: &FieldCtx, a: &NfElem, b: &NfElem, prime: &PrimeIdeal) -> Sign {
    let gf = prime.residue_field();
    let (alpha, ua) = split_uniformizer(ctx, a, prime);
    let (beta, ub) = split_uniformizer(ctx, b, prime);
    let ra = place::reduce(ctx, &ua, prime, &gf);
    let rb = place::reduce(ctx, &ub, prime, &gf);
    let mut w = gf.mul(gf.pow_signed(ra, beta), gf.pow_signed(rb, -alpha));
    if (alpha * beta).rem_euclid(2) == 1 {
        w = gf.neg(w);
    }
    Sign::from_bool(gf.is_square(w))
}

/// Normalized data for one argument of the conic search.
fn conic_class(ctx: &FieldCtx, x: &NfElem, prime: &PrimeIdeal) -> (ClassKey, u32, NfElem) {
    let (v, u) = split_uniformizer(ctx, x, prime);
    let parity = v.rem_euclid(2) as u32;
    let rep = if prime.is_dyadic() {
        place::local_rep(ctx, &u, prime, 2 * prime.dyadic_e() + 1)
    } else {
        // Odd places: only the residue character matters.
        let gf = prime.residue_field();
        let r = place::reduce(ctx, &u, prime, &gf);
        if gf.is_square(r) {
            NfElem::one(prime.field())
        } else {
            place::lift(prime, &gf, gf.non_square().unwrap())
        }
    };
    let (c0, c1) = rep.int_coords();
    let key = (parity, c0.to_i128().unwrap(), c1.to_i128().unwrap());
    (key, parity, rep)
}

/// Hilbert symbol by deciding local solvability of `z^2 = a x^2 + b y^2`.
/// Valid at every finite place; the default at dyadic places.
pub fn conic_symbol(ctx: &FieldCtx, a: &NfElem, b: &NfElem, prime: &PrimeIdeal) -> Sign {
    let (ka, pa, ra) = conic_class(ctx, a, prime);
    let (kb, pb, rb) = conic_class(ctx, b, prime);
    let key = if ka <= kb {
        (prime.clone(), ka, kb)
    } else {
        (prime.clone(), kb, ka)
    };
    let memo = &ctx.symbol_memo;
    if let Some(&ok) = memo.table.lock().unwrap().get(&key) {
        memo.hits.fetch_add(1, AtomicOrdering::Relaxed);
        return Sign::from_bool(ok);
    }
    memo.misses.fetch_add(1, AtomicOrdering::Relaxed);
    let ok = conic::conic_solvable(ctx, prime, (pa, &ra), (pb, &rb));
    memo.table.lock().unwrap().insert(key, ok);
    Sign::from_bool(ok)
}

/// Finite primes dividing 2 or in the support of some element, in order.
pub fn bad_primes(ctx: &FieldCtx, elems: &[&NfElem]) -> Result<Vec<PrimeIdeal>> {
    let mut set: BTreeSet<PrimeIdeal> = primes_above(ctx.field(), 2).into_iter().collect();
    for x in elems {
        nonzero(x, "element")?;
        set.extend(place::support(ctx, x)?);
    }
    Ok(set.into_iter().collect())
}

/// Every place where `(a, b)_v` can be `-1`.
pub fn candidate_places(ctx: &FieldCtx, a: &NfElem, b: &NfElem) -> Result<Vec<Place>> {
    let mut out: Vec<Place> = bad_primes(ctx, &[a, b])?
        .into_iter()
        .map(Place::Finite)
        .collect();
    out.extend(infinite_places(ctx.field()));
    Ok(out)
}

/// Places where the quaternion algebra `(a, b)` ramifies.
pub fn delta_set(ctx: &FieldCtx, a: &NfElem, b: &NfElem) -> Result<BTreeSet<Place>> {
    let mut out = BTreeSet::new();
    for v in candidate_places(ctx, a, b)? {
        if hilbert_symbol(ctx, a, b, &v)? == Sign::Minus {
            out.insert(v);
        }
    }
    Ok(out)
}

/// All symbols over the candidate places; errors if their product is not `+1`.
pub fn reciprocity_audit(ctx: &FieldCtx, a: &NfElem, b: &NfElem) -> Result<Vec<(Place, Sign)>> {
    let mut table = Vec::new();
    let mut prod = Sign::Plus;
    for v in candidate_places(ctx, a, b)? {
        let s = hilbert_symbol(ctx, a, b, &v)?;
        prod = prod * s;
        table.push((v, s));
    }
    if prod == Sign::Minus {
        return Err(Error::Invariant(format!(
            "product of Hilbert symbols of ({a}, {b}) over {} is -1",
            ctx.field()
        )));
    }
    Ok(table)
}

/// A quaternion pair `(a, b)` with its ramification set.
#[derive(Clone, Debug)]
pub struct QuaternionPair {
    pub a: NfElem,
    pub b: NfElem,
    delta: BTreeSet<Place>,
}

impl QuaternionPair {
    pub fn new(ctx: &FieldCtx, a: NfElem, b: NfElem) -> Result<QuaternionPair> {
        let delta = delta_set(ctx, &a, &b)?;
        Ok(QuaternionPair { a, b, delta })
    }

    pub fn delta(&self) -> &BTreeSet<Place> {
        &self.delta
    }

    pub fn finite_delta(&self) -> Vec<PrimeIdeal> {
        self.delta.iter().filter_map(|v| v.prime().cloned()).collect()
    }

    /// Whether some real place lies in the ramification set.
    pub fn ramified_at_infinity(&self) -> bool {
        self.delta.iter().any(|v| !v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldCtx {
        FieldCtx::parse("Q").unwrap()
    }

    fn place(ctx: &FieldCtx, s: &str) -> Place {
        Place::parse(ctx.field(), s).unwrap()
    }

    #[test]
    fn rational_examples() {
        let k = q();
        let m1 = k.int(-1);
        assert_eq!(hilbert_symbol(&k, &m1, &m1, &place(&k, "p:2")).unwrap(), Sign::Minus);
        assert_eq!(hilbert_symbol(&k, &m1, &m1, &place(&k, "real")).unwrap(), Sign::Minus);
        let d = delta_set(&k, &m1, &m1).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(hilbert_symbol(&k, &k.int(2), &k.int(3), &place(&k, "p:3")).unwrap(), Sign::Minus);
        assert!(hilbert_symbol(&k, &k.int(0), &k.int(3), &place(&k, "p:3")).is_err());
    }

    #[test]
    fn rational_dyadic_table() {
        // (a, b)_2 = (-1)^{ε(u)ε(w) + α ω(w) + β ω(u)}
        let k = q();
        let p2 = place(&k, "p:2");
        let eps = |u: i64| ((u.rem_euclid(8) - 1) / 2) % 2;
        let omg = |u: i64| ((u * u - 1) / 8).rem_euclid(2);
        for a in [-10i64, -7, -6, -5, -3, -2, -1, 1, 2, 3, 5, 6, 7, 10, 12, 24] {
            for b in [-10i64, -7, -5, -3, -2, -1, 1, 2, 3, 5, 6, 7, 14] {
                let (al, u) = (a.trailing_zeros() as i64, a >> a.trailing_zeros());
                let (be, w) = (b.trailing_zeros() as i64, b >> b.trailing_zeros());
                let e = eps(u) * eps(w) + al * omg(w) + be * omg(u);
                let want = Sign::from_bool(e % 2 == 0);
                let got = hilbert_symbol(&k, &k.int(a), &k.int(b), &p2).unwrap();
                assert_eq!(got, want, "({a},{b})_2");
            }
        }
    }

    #[test]
    fn local_squares() {
        let k = q();
        let p2 = place(&k, "p:2");
        assert!(is_local_square(&k, &k.int(17), &p2).unwrap());
        assert!(!is_local_square(&k, &k.int(5), &p2).unwrap());
        assert!(is_local_square(&k, &k.int(-7), &p2).unwrap());
        assert!(!is_local_square(&k, &k.int(2), &p2).unwrap());
        let p5 = place(&k, "p:5");
        assert!(is_local_square(&k, &k.int(-1), &p5).unwrap());
        assert!(!is_local_square(&k, &k.int(2), &p5).unwrap());
    }
}
