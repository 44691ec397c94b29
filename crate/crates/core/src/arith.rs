//! Integer helpers: factorization, modular arithmetic, square roots.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_prime::nt_funcs;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Prime factorization of `|n|`, primes ascending. `n` must be nonzero.
pub fn factor_integer(n: &BigInt) -> Vec<(BigInt, u32)> {
    assert!(!n.is_zero(), "factor_integer(0)");
    let m = n.magnitude();
    if let Some(small) = m.to_u128() {
        return nt_funcs::factorize128(small)
            .into_iter()
            .map(|(p, e)| (BigInt::from(p), e as u32))
            .collect();
    }
    nt_funcs::factorize(m.clone())
        .into_iter()
        .map(|(p, e)| (BigInt::from_biguint(Sign::Plus, p), e as u32))
        .collect()
}

/// Probabilistic primality (deterministic below 2^64).
pub fn is_prime(n: &BigInt) -> bool {
    if n.sign() != Sign::Plus {
        return false;
    }
    if let Some(small) = n.to_u64() {
        return nt_funcs::is_prime64(small);
    }
    let m: BigUint = n.magnitude().clone();
    nt_funcs::is_prime(&m, None).probably()
}

pub fn is_prime_u64(n: u64) -> bool {
    nt_funcs::is_prime64(n)
}

/// Primes `<= n` in ascending order.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(k, &b)| b.then_some(k as u64))
        .collect()
}

/// Splits `n = p^v * m` with `p ∤ m`. `n` must be nonzero.
pub fn split_prime(n: &BigInt, p: u64) -> (u32, BigInt) {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut m = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return (v, m);
        }
        m = q;
        v += 1;
    }
}

/// `v_p(n)`, with `None` for `n = 0`.
pub fn vp(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        None
    } else {
        Some(split_prime(n, p).0)
    }
}

pub fn vp_i128(mut n: i128, p: u64, cap: u32) -> u32 {
    if n == 0 {
        return cap;
    }
    let p = p as i128;
    let mut v = 0;
    while v < cap && n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

pub fn mod_pow(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m128 = m as u128;
    let mut acc: u128 = 1;
    let mut b = (base % m) as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inv(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(m);
    let g = a.extended_gcd(m);
    if !g.gcd.is_one() {
        return None;
    }
    Some(g.x.mod_floor(m))
}

/// Square roots of `a` modulo an odd prime `p` (Tonelli–Shanks).
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if mod_pow(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(mod_pow(a, (p + 1) / 4, p));
    }
    let mut q = p - 1;
    let mut s = 0;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while mod_pow(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mulm = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let mut m = s;
    let mut c = mod_pow(z, q, p);
    let mut t = mod_pow(a, q, p);
    let mut r = mod_pow(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mulm(t2, t2);
            i += 1;
        }
        let mut b = c;
        for _ in 0..(m - i - 1) {
            b = mulm(b, b);
        }
        m = i;
        c = mulm(b, b);
        t = mulm(t, c);
        r = mulm(r, b);
    }
    Some(r)
}

/// Exact integer square root if `n` is a perfect square.
pub fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Kronecker symbol `(a/n)` for `n > 0`.
pub fn kronecker(a: &BigInt, n: u64) -> i32 {
    assert!(n > 0);
    let mut n = n;
    let mut result = 1;
    let a = a.clone();
    while n % 2 == 0 {
        n /= 2;
        if a.is_even() {
            return 0;
        }
        let r = a.mod_floor(&BigInt::from(8)).to_u64().unwrap();
        if r == 3 || r == 5 {
            result = -result;
        }
    }
    if n == 1 {
        return result;
    }
    let mut a = a.mod_floor(&BigInt::from(n)).to_u64().unwrap();
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Compares `sqrt(d)` (with `d >= 0`) against the integer `c`.
pub fn cmp_sqrt(d: &BigInt, c: &BigInt) -> std::cmp::Ordering {
    if c.is_negative() {
        return std::cmp::Ordering::Greater;
    }
    d.cmp(&(c * c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn tonelli_matches_brute_force() {
        for p in primes_up_to(200).into_iter().skip(1) {
            for a in 0..p {
                let brute = (0..p).find(|x| x * x % p == a);
                match sqrt_mod_prime(a, p) {
                    Some(r) => assert_eq!(r * r % p, a),
                    None => assert!(brute.is_none()),
                }
            }
        }
    }

    #[test]
    fn kronecker_agrees_with_euler() {
        for p in primes_up_to(100).into_iter().skip(1) {
            for a in -30i64..30 {
                let e = mod_pow(a.rem_euclid(p as i64) as u64, (p - 1) / 2, p);
                let want = if a % p as i64 == 0 { 0 } else if e == 1 { 1 } else { -1 };
                assert_eq!(kronecker(&big(a), p), want, "({a}/{p})");
            }
        }
        assert_eq!(kronecker(&big(5), 2), -1);
        assert_eq!(kronecker(&big(17), 2), 1);
    }

    #[test]
    fn factorization_roundtrip() {
        let n = big(2 * 2 * 3 * 1_000_000_007);
        let f = factor_integer(&n);
        assert_eq!(f, vec![(big(2), 2), (big(3), 1), (big(1_000_000_007), 1)]);
        let huge: BigInt = BigInt::from(u128::MAX) * 7 * 7;
        let prod = factor_integer(&huge)
            .into_iter()
            .fold(BigInt::one(), |acc, (p, e)| acc * p.pow(e));
        assert_eq!(prod, huge);
    }

    #[test]
    fn sqrt_comparison() {
        use std::cmp::Ordering::*;
        assert_eq!(cmp_sqrt(&big(5), &big(2)), Greater);
        assert_eq!(cmp_sqrt(&big(4), &big(2)), Equal);
        assert_eq!(cmp_sqrt(&big(3), &big(2)), Less);
    }
}
