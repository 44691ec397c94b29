//! Library results against independent brute-force computations.

mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use intdef_core::enumerate::enumerate_by_height;
use intdef_core::place::{self, primes_above, primes_up_to_norm};
use intdef_core::symbols::hilbert_symbol;
use intdef_core::trace::u_set;
use intdef_core::{FieldCtx, Place, Sign};

use common::{is_prime, ConicOracle};

#[test]
fn hilbert_symbols_match_conic_oracle_over_q() {
    let ctx = FieldCtx::parse("Q").unwrap();
    for p in (3..=23).filter(|&p| is_prime(p)) {
        let v = Place::Finite(primes_above(ctx.field(), p as u64)[0].clone());
        let mut oracle = ConicOracle::new(p);
        for a in -12i64..=12 {
            for b in -12i64..=12 {
                if a == 0 || b == 0 {
                    continue;
                }
                let got = hilbert_symbol(&ctx, &ctx.int(a), &ctx.int(b), &v).unwrap();
                assert_eq!(got == Sign::Plus, oracle.solvable(a, b), "({a}, {b}) at {p}");
            }
        }
    }
}

#[test]
fn rational_factorization_matches_trial_division() {
    let ctx = FieldCtx::parse("Q").unwrap();
    for n in (-300i64..=300).filter(|n| n.abs() > 1) {
        let got: Vec<(u64, i64)> = place::factor_elem(&ctx, &ctx.int(n))
            .unwrap()
            .into_iter()
            .map(|(p, e)| (p.p(), e))
            .collect();
        let mut want = Vec::new();
        let mut m = n.abs();
        let mut d = 2;
        while m > 1 {
            let mut e = 0;
            while m % d == 0 {
                m /= d;
                e += 1;
            }
            if e > 0 {
                want.push((d as u64, e));
            }
            d += 1;
        }
        assert_eq!(got, want, "{n}");
    }
}

#[test]
fn prime_norms_multiply_to_element_norm() {
    for spec in ["Q(sqrt,-1)", "Q(sqrt,-5)", "Q(sqrt,5)", "Q(sqrt,-23)", "Q(sqrt,10)"] {
        let ctx = FieldCtx::parse(spec).unwrap();
        for x in enumerate_by_height(ctx.field(), 4) {
            if x.is_zero() {
                continue;
            }
            let mut num = BigInt::one();
            let mut den = BigInt::one();
            for (p, e) in place::factor_elem(&ctx, &x).unwrap() {
                let np = BigInt::from(p.norm()).pow(e.unsigned_abs() as u32);
                if e > 0 {
                    num *= np;
                } else {
                    den *= np;
                }
            }
            assert_eq!(x.norm().abs(), BigRational::new(num, den), "{spec}: {x}");
        }
    }
}

#[test]
fn integrality_matches_characteristic_polynomial() {
    for spec in ["Q", "Q(sqrt,-1)", "Q(sqrt,-3)", "Q(sqrt,-5)", "Q(sqrt,5)", "Q(sqrt,13)"] {
        let ctx = FieldCtx::parse(spec).unwrap();
        for x in enumerate_by_height(ctx.field(), 6) {
            let oracle = x.trace().is_integer() && x.norm().is_integer();
            assert_eq!(x.is_integral(), oracle, "{spec}: {x}");
            let poles = place::factor_elem(&ctx, &x).map(|f| f.iter().any(|(_, e)| *e < 0)).unwrap_or(false);
            assert_eq!(!poles, oracle, "{spec}: {x}");
        }
    }
}

/// Number of reduced primitive forms `(a, b, c)` with `b^2 - 4ac = disc < 0`.
fn reduced_forms(disc: i64) -> usize {
    let mut count = 0;
    let mut a = 1;
    while 3 * a * a <= -disc {
        for b in -a + 1..=a {
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            if a.gcd(&b).gcd(&c) == 1 {
                count += 1;
            }
        }
        a += 1;
    }
    count
}

#[test]
fn imaginary_class_numbers_match_reduced_forms() {
    for d in [-1i64, -2, -3, -5, -6, -10, -13, -14, -15, -17, -21, -23, -26, -30, -47, -71] {
        let ctx = FieldCtx::parse(&format!("Q(sqrt,{d})")).unwrap();
        let disc = ctx.disc().to_i64().unwrap();
        assert_eq!(ctx.class_number(), reduced_forms(disc), "d = {d}");
    }
}

#[test]
fn split_primes_match_quadratic_residues() {
    for d in [-1i64, -5, 2, 5, -7] {
        let ctx = FieldCtx::parse(&format!("Q(sqrt,{d})")).unwrap();
        let disc = ctx.disc().to_i64().unwrap();
        for p in (3..200).filter(|&p| is_prime(p)) {
            let above = primes_above(ctx.field(), p as u64).len();
            let want = if disc % p == 0 {
                1
            } else if (1..p).any(|x| (x * x - disc).rem_euclid(p) == 0) {
                2
            } else {
                1
            };
            assert_eq!(above, want, "d = {d}, p = {p}");
        }
        let norms: Vec<u64> = primes_up_to_norm(ctx.field(), 50).iter().map(|p| p.norm()).collect();
        assert!(norms.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn printed_u_tables() {
    let printed = [
        (2, "1"),
        (3, "0"),
        (4, "a a+1"),
        (5, "1 4"),
        (7, "0 3 4"),
        (8, "1 a a^2 a^2+a"),
        (9, "a a+2 2a 2a+1"),
        (11, "0 1 5 6 10"),
    ];
    for (q, want) in printed {
        assert_eq!(u_set(q).unwrap().render(), want, "U_{q}");
    }
}

#[test]
fn local_squares_match_residues_over_q() {
    let ctx = FieldCtx::parse("Q").unwrap();
    for p in [3i64, 5, 7, 11, 13] {
        let v = Place::Finite(primes_above(ctx.field(), p as u64)[0].clone());
        for x in (-200i64..=200).filter(|x| *x != 0) {
            let mut m = x;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            let residue = (1..p).any(|y| (y * y - m).rem_euclid(p) == 0);
            let got = intdef_core::symbols::is_local_square(&ctx, &ctx.int(x), &v).unwrap();
            assert_eq!(got, e % 2 == 0 && residue, "{x} at {p}");
        }
    }
}
