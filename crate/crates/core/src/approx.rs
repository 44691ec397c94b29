//! Weak approximation: elements meeting finitely many local conditions.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith;
use crate::error::{Error, Result};
use crate::field::{Field, FieldCtx, NfElem};
use crate::place::{self, Place, PrimeIdeal, Splitting};

#[derive(Clone, Debug)]
pub enum Constraint {
    /// `v_P(x - target) >= k`.
    Congruent { prime: PrimeIdeal, target: NfElem, k: i64 },
    /// Sign at a real place.
    Sign { place: Place, positive: bool },
}

/// A set of local conditions to be met simultaneously.
#[derive(Clone, Debug, Default)]
pub struct Approx {
    constraints: Vec<Constraint>,
    integral_outside: bool,
}

/// A solution together with a positive integer `step` such that
/// `x + step * z` meets every congruence for all integral `z`.
#[derive(Clone, Debug)]
pub struct Solution {
    pub x: NfElem,
    pub step: BigInt,
}

impl Approx {
    pub fn new() -> Approx {
        Approx::default()
    }

    /// Require the result to be integral at every prime.
    pub fn integral_outside(mut self) -> Approx {
        self.integral_outside = true;
        self
    }

    pub fn congruent(mut self, prime: &PrimeIdeal, target: NfElem, k: i64) -> Approx {
        self.constraints.push(Constraint::Congruent { prime: prime.clone(), target, k });
        self
    }

    /// `v_P(x) = n` exactly.
    pub fn valuation(self, prime: &PrimeIdeal, n: i64) -> Approx {
        let target = prime.uniformizer().pow(n);
        self.congruent(prime, target, n + 1)
    }

    /// `x ≡ c (mod P)`.
    pub fn residue(self, prime: &PrimeIdeal, c: NfElem) -> Approx {
        self.congruent(prime, c, 1)
    }

    pub fn sign(mut self, place: &Place, positive: bool) -> Approx {
        self.constraints.push(Constraint::Sign { place: place.clone(), positive });
        self
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn solve(&self, ctx: &FieldCtx) -> Result<Solution> {
        let field = ctx.field();
        let mut by_p: BTreeMap<u64, Vec<(PrimeIdeal, NfElem, i64)>> = BTreeMap::new();
        let mut signs: Vec<(Place, bool)> = Vec::new();
        for c in &self.constraints {
            match c {
                Constraint::Congruent { prime, target, k } => {
                    by_p.entry(prime.p()).or_default().push((prime.clone(), target.clone(), *k));
                }
                Constraint::Sign { place, positive } => {
                    if !matches!(place, Place::Real(_)) {
                        return Err(Error::Input(format!("sign condition at non-real place {place}")));
                    }
                    if signs.iter().any(|(v, s)| v == place && s != positive) {
                        return Err(Error::Input(format!("conflicting signs at {place}")));
                    }
                    signs.push((place.clone(), *positive));
                }
            }
        }
        // Scale by D = prod p^{s_p} so that every target becomes P-integral.
        let mut d_total = BigInt::one();
        let mut shifts = BTreeMap::new();
        for (&p, items) in &by_p {
            let mut s_p = 0u32;
            for (prime, target, _) in items {
                if let Some(v) = place::valuation_opt(ctx, target, prime) {
                    if v < 0 {
                        if self.integral_outside {
                            return Err(Error::Input(format!(
                                "target {target} is not integral at {prime}"
                            )));
                        }
                        s_p = s_p.max(u32::div_ceil(-v as u32, prime.e()));
                    }
                }
            }
            d_total *= BigInt::from(p).pow(s_p);
            shifts.insert(p, s_p);
        }
        let mut moduli = Vec::new();
        let mut residues = Vec::new();
        for (&p, items) in &by_p {
            let s_p = shifts[&p];
            let scaled: Vec<(PrimeIdeal, NfElem, u32)> = items
                .iter()
                .map(|(pr, t, k)| {
                    let k = (k + (pr.e() * s_p) as i64).max(0) as u32;
                    (pr.clone(), t.scale_int(&d_total), k)
                })
                .collect();
            let (m, y) = solve_at_p(ctx, p, &scaled)?;
            moduli.push(m);
            residues.push(y);
        }
        let (mut y0, mut y1, m) = crt_coords(&residues, &moduli);
        // Centre the representative.
        let half = &m / 2;
        if y0 > half {
            y0 -= &m;
        }
        if y1 > half {
            y1 -= &m;
        }
        let y = NfElem::from_ints(field, y0, y1);
        let dinv = num_rational::BigRational::new(BigInt::one(), d_total.clone());
        let mut x = y.scale(&dinv);
        let step = &m / &d_total;
        if !signs.is_empty() {
            x = fix_signs(field, x, &step, &signs)?;
        }
        self.verify(ctx, &x)?;
        Ok(Solution { x, step })
    }

    /// Checks every constraint against `x`.
    pub fn verify(&self, ctx: &FieldCtx, x: &NfElem) -> Result<()> {
        for c in &self.constraints {
            let ok = match c {
                Constraint::Congruent { prime, target, k } => {
                    let diff = x - target;
                    diff.is_zero() || place::valuation(ctx, &diff, prime) >= *k
                }
                Constraint::Sign { place, positive } => {
                    let want = if *positive { Ordering::Greater } else { Ordering::Less };
                    place::real_sign(x, place) == Some(want)
                }
            };
            if !ok {
                return Err(Error::Invariant(format!("approximation {x} fails {c:?}")));
            }
        }
        if self.integral_outside && !x.is_integral() {
            return Err(Error::Invariant(format!("approximation {x} is not integral")));
        }
        Ok(())
    }
}

/// Integral `y` (as integer coordinates mod `p^K`) meeting the congruences above `p`.
fn solve_at_p(
    ctx: &FieldCtx,
    p: u64,
    items: &[(PrimeIdeal, NfElem, u32)],
) -> Result<(BigInt, (BigInt, BigInt))> {
    let pb = BigInt::from(p);
    // Strongest requirement per prime.
    let mut per_prime: BTreeMap<PrimeIdeal, (NfElem, u32)> = BTreeMap::new();
    for (prime, target, k) in items {
        match per_prime.get(prime) {
            Some((t0, k0)) => {
                let (lo, hi) = if k0 <= k { (*k0, *k) } else { (*k, *k0) };
                let diff = t0 - target;
                if !diff.is_zero() && place::valuation(ctx, &diff, prime) < lo as i64 {
                    return Err(Error::Input(format!("incompatible congruences at {prime}")));
                }
                if *k > *k0 {
                    per_prime.insert(prime.clone(), (target.clone(), hi));
                }
            }
            None => {
                per_prime.insert(prime.clone(), (target.clone(), *k));
            }
        }
    }
    let big_k = per_prime
        .iter()
        .map(|(pr, (_, k))| u32::div_ceil(*k, pr.e()))
        .max()
        .unwrap_or(0)
        .max(1);
    let modulus = pb.pow(big_k);
    let entries: Vec<(&PrimeIdeal, &(NfElem, u32))> = per_prime.iter().collect();
    let coords = match entries[0].0.kind() {
        Splitting::Split => {
            let mut primes: Vec<PrimeIdeal> = entries.iter().map(|(pr, _)| (*pr).clone()).collect();
            let mut reps: Vec<BigInt> = entries
                .iter()
                .map(|(pr, (t, _))| place::local_rep(ctx, t, pr, big_k).int_coords().0)
                .collect();
            // A lone split constraint would otherwise give a rational
            // residue, which the conjugate prime divides whenever the target
            // is not a unit.
            if primes.len() == 1 {
                primes.push(primes[0].conjugate());
                reps.push(BigInt::one());
            }
            {
                let w = NfElem::omega(entries[0].0.field());
                let r1 = place::local_rep(ctx, &w, &primes[0], big_k).int_coords().0;
                let r2 = place::local_rep(ctx, &w, &primes[1], big_k).int_coords().0;
                let inv = arith::mod_inv(&(&r1 - &r2), &modulus)
                    .ok_or_else(|| Error::Invariant("roots not distinct mod p".into()))?;
                let y1 = ((&reps[0] - &reps[1]) * inv).mod_floor(&modulus);
                let y0 = (&reps[0] - &y1 * &r1).mod_floor(&modulus);
                (y0, y1)
            }
        }
        _ => {
            let (pr, (t, k)) = entries[0];
            let rep = place::local_rep(ctx, t, pr, *k);
            rep.int_coords()
        }
    };
    Ok((modulus, coords))
}

fn crt_coords(residues: &[(BigInt, BigInt)], moduli: &[BigInt]) -> (BigInt, BigInt, BigInt) {
    let mut m = BigInt::one();
    let mut y0 = BigInt::zero();
    let mut y1 = BigInt::zero();
    for ((r0, r1), mi) in residues.iter().zip(moduli) {
        let inv = arith::mod_inv(&m, mi).expect("coprime moduli");
        let lift = |acc: &BigInt, r: &BigInt| -> BigInt {
            let t = ((r - acc) * &inv).mod_floor(mi);
            acc + &m * t
        };
        y0 = lift(&y0, r0);
        y1 = lift(&y1, r1);
        m *= mi;
    }
    (y0.mod_floor(&m), y1.mod_floor(&m), m)
}

/// Adds multiples of `step` times a sign-pattern element until the signs hold.
fn fix_signs(field: Field, x: NfElem, step: &BigInt, signs: &[(Place, bool)]) -> Result<NfElem> {
    let wanted = |v: &Place| signs.iter().find(|(p, _)| p == v).map(|(_, s)| *s);
    let ok = |y: &NfElem| {
        signs.iter().all(|(v, s)| {
            let want = if *s { Ordering::Greater } else { Ordering::Less };
            place::real_sign(y, v) == Some(want)
        })
    };
    if ok(&x) {
        return Ok(x);
    }
    let places = place::real_places(field);
    // Element whose signs at (+, -) embeddings are the requested ones.
    let target_signs: Vec<bool> = places
        .iter()
        .map(|v| wanted(v).unwrap_or_else(|| place::real_sign(&x, v) == Some(Ordering::Greater)))
        .collect();
    let direction = match (field, target_signs.as_slice()) {
        (Field::Rational, [s]) => NfElem::from_int(field, if *s { 1 } else { -1 }),
        (Field::Quadratic(_), [s1, s2]) => {
            let sqrt_d = &NfElem::from_int(field, 2) * &NfElem::omega(field)
                - NfElem::from_int(field, field.omega_trace());
            match (s1, s2) {
                (true, true) => NfElem::one(field),
                (false, false) => NfElem::from_int(field, -1),
                (true, false) => sqrt_d,
                (false, true) => -sqrt_d,
            }
        }
        _ => return Err(Error::Invariant("sign pattern for field without real places".into())),
    };
    let mut scale = step.clone();
    for _ in 0..4096 {
        let y = &x + &direction.scale_int(&scale);
        if ok(&y) {
            return Ok(y);
        }
        scale *= 2;
    }
    Err(Error::SearchExhausted("sign adjustment".into()))
}

/// Height-style size of `x` used when ranking approximation candidates.
pub fn size(x: &NfElem) -> BigInt {
    let (n0, n1, den) = x.integral_parts();
    n0.abs().max(n1.abs()).max(den)
}
