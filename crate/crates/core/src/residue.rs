//! Finite fields `F_{p^n}` for small `n`, with elements encoded as base-`p` integers.

use crate::error::{Error, Result};

/// `F_{p^n}` presented as `F_p[a]/(m(a))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gf {
    p: u64,
    n: u32,
    q: u64,
    /// Monic modulus, low degree first, length `n + 1`.
    modulus: Vec<u64>,
}

/// Element index: `c_0 + c_1 p + ... + c_{n-1} p^{n-1}` for `c_0 + c_1 a + ...`.
pub type GfElem = u64;

impl Gf {
    /// Field of order `p^n` presented by its Conway polynomial (`n <= 3`).
    pub fn new(p: u64, n: u32) -> Result<Gf> {
        if n == 0 || n > 3 {
            return Err(Error::Unsupported(format!("residue degree {n}")));
        }
        let q = p.checked_pow(n).ok_or_else(|| Error::Unsupported("field too large".into()))?;
        if n == 1 {
            return Ok(Gf { p, n, q, modulus: vec![0, 1] });
        }
        let g = primitive_root(p);
        // Conway order: x^n - a_1 x^{n-1} + a_2 x^{n-2} - ..., lexicographic in (a_1, ..., a_n).
        for idx in 0..q {
            let a = digits_of(idx, p, n);
            let mut m = vec![0u64; n as usize + 1];
            m[n as usize] = 1;
            for i in 1..=n as usize {
                let ai = a[n as usize - i];
                m[n as usize - i] = if i % 2 == 1 { (p - ai) % p } else { ai };
            }
            if !is_irreducible(&m, p) {
                continue;
            }
            let f = Gf { p, n, q, modulus: m };
            let gen = p; // the element `a`
            let primitive = crate::arith::factor_integer(&num_bigint::BigInt::from(q - 1))
                .iter()
                .all(|(r, _)| f.pow(gen, (q - 1) / u64::try_from(r).unwrap()) != 1);
            if primitive && f.pow(gen, (q - 1) / (p - 1)) == g {
                return Ok(f);
            }
        }
        unreachable!("a Conway polynomial of degree {n} exists mod {p}")
    }

    /// Field with a caller-supplied monic modulus (low degree first).
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<Gf> {
        let n = modulus.len() as u32 - 1;
        if n == 0 || n > 3 || *modulus.last().unwrap() != 1 {
            return Err(Error::Unsupported("modulus must be monic of degree 1..=3".into()));
        }
        let modulus: Vec<u64> = modulus.into_iter().map(|c| c % p).collect();
        if !is_irreducible(&modulus, p) {
            return Err(Error::Invariant("reducible residue field modulus".into()));
        }
        Ok(Gf { p, n, q: p.pow(n), modulus })
    }

    /// Finite field of order `q`, which must be a prime power with exponent at most 3.
    pub fn of_order(q: u64) -> Result<Gf> {
        if q < 2 {
            return Err(Error::Input(format!("{q} is not a prime power")));
        }
        for n in 1..=3u32 {
            let p = (q as f64).powf(1.0 / n as f64).round() as u64;
            for c in p.saturating_sub(1)..=p + 1 {
                if c >= 2 && c.checked_pow(n) == Some(q) && crate::arith::is_prime_u64(c) {
                    return Gf::new(c, n);
                }
            }
        }
        Err(Error::Unsupported(format!("q = {q} is not p, p^2 or p^3")))
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> GfElem {
        0
    }

    pub fn one(&self) -> GfElem {
        1
    }

    pub fn elements(&self) -> impl Iterator<Item = GfElem> {
        0..self.q
    }

    pub fn from_int(&self, k: i64) -> GfElem {
        k.rem_euclid(self.p as i64) as u64
    }

    pub fn from_digits(&self, digits: &[u64]) -> GfElem {
        digits
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.p + c % self.p)
    }

    pub fn digits(&self, x: GfElem) -> Vec<u64> {
        digits_of(x, self.p, self.n)
    }

    pub fn add(&self, x: GfElem, y: GfElem) -> GfElem {
        let (a, b) = (self.digits(x), self.digits(y));
        let s: Vec<u64> = a.iter().zip(&b).map(|(u, v)| (u + v) % self.p).collect();
        self.from_digits(&s)
    }

    pub fn neg(&self, x: GfElem) -> GfElem {
        let s: Vec<u64> = self.digits(x).iter().map(|u| (self.p - u) % self.p).collect();
        self.from_digits(&s)
    }

    pub fn sub(&self, x: GfElem, y: GfElem) -> GfElem {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: GfElem, y: GfElem) -> GfElem {
        let p = self.p as u128;
        let (a, b) = (self.digits(x), self.digits(y));
        let n = self.n as usize;
        let mut prod = vec![0u128; 2 * n - 1];
        for (i, &u) in a.iter().enumerate() {
            for (j, &v) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u as u128 * v as u128) % p;
            }
        }
        for k in (n..prod.len()).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for (i, &m) in self.modulus[..n].iter().enumerate() {
                let idx = k - n + i;
                prod[idx] = (prod[idx] + (p - m as u128 % p) % p * c) % p;
            }
        }
        let out: Vec<u64> = prod[..n].iter().map(|&c| c as u64).collect();
        self.from_digits(&out)
    }

    pub fn pow(&self, x: GfElem, mut e: u64) -> GfElem {
        let mut acc = self.one();
        let mut b = x;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    /// Power with a signed exponent; `x` must be nonzero when `e < 0`.
    pub fn pow_signed(&self, x: GfElem, e: i64) -> GfElem {
        if e >= 0 {
            self.pow(x, e as u64)
        } else {
            self.pow(self.inv(x), e.unsigned_abs())
        }
    }

    pub fn inv(&self, x: GfElem) -> GfElem {
        assert!(x != 0, "inverse of zero in F_{}", self.q);
        self.pow(x, self.q - 2)
    }

    pub fn is_square(&self, x: GfElem) -> bool {
        x == 0 || self.p == 2 || self.pow(x, (self.q - 1) / 2) == 1
    }

    /// `+1` for nonzero squares, `-1` for non-squares, `0` for zero (odd `q`).
    pub fn quadratic_character(&self, x: GfElem) -> i32 {
        if x == 0 {
            0
        } else if self.is_square(x) {
            1
        } else {
            -1
        }
    }

    /// Smallest-index non-square (odd `q` only).
    pub fn non_square(&self) -> Option<GfElem> {
        (1..self.q).find(|&x| !self.is_square(x))
    }

    /// Polynomial rendering in the generator `a`, e.g. `2a^2+a+1`.
    pub fn render(&self, x: GfElem) -> String {
        if self.n == 1 || x < self.p {
            return x.to_string();
        }
        let d = self.digits(x);
        let mut terms = Vec::new();
        for k in (0..d.len()).rev() {
            let c = d[k];
            if c == 0 {
                continue;
            }
            let var = match k {
                0 => String::new(),
                1 => "a".to_string(),
                _ => format!("a^{k}"),
            };
            terms.push(match (c, k) {
                (_, 0) => c.to_string(),
                (1, _) => var,
                _ => format!("{c}{var}"),
            });
        }
        terms.join("+")
    }

    pub fn render_set(&self, xs: &[GfElem]) -> String {
        xs.iter().map(|&x| self.render(x)).collect::<Vec<_>>().join(" ")
    }

    /// Inverse of [`Gf::render`].
    pub fn parse(&self, s: &str) -> Result<GfElem> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut digits = vec![0u64; self.n as usize];
        for term in s.split('+') {
            let bad = || Error::Input(format!("bad residue term {term:?}"));
            let (coef, deg) = match term.find('a') {
                None => (term.parse::<u64>().map_err(|_| bad())?, 0usize),
                Some(i) => {
                    let c = if i == 0 { 1 } else { term[..i].parse().map_err(|_| bad())? };
                    let rest = &term[i + 1..];
                    let k = if rest.is_empty() {
                        1
                    } else {
                        rest.strip_prefix('^').ok_or_else(bad)?.parse().map_err(|_| bad())?
                    };
                    (c, k)
                }
            };
            if deg >= digits.len() {
                return Err(bad());
            }
            digits[deg] = (digits[deg] + coef) % self.p;
        }
        Ok(self.from_digits(&digits))
    }
}

fn digits_of(mut x: u64, p: u64, n: u32) -> Vec<u64> {
    let mut out = Vec::with_capacity(n as usize);
    for _ in 0..n {
        out.push(x % p);
        x /= p;
    }
    out
}

/// Least primitive root modulo `p`.
fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let factors = crate::arith::factor_integer(&num_bigint::BigInt::from(p - 1));
    (2..p)
        .find(|&g| {
            factors
                .iter()
                .all(|(r, _)| crate::arith::mod_pow(g, (p - 1) / u64::try_from(r).unwrap(), p) != 1)
        })
        .unwrap()
}

/// Irreducibility over `F_p` for degree at most 3: no roots.
fn is_irreducible(m: &[u64], p: u64) -> bool {
    let deg = m.len() - 1;
    if deg == 1 {
        return true;
    }
    (0..p).all(|x| {
        let v = m.iter().rev().fold(0u128, |acc, &c| (acc * x as u128 + c as u128) % p as u128);
        v != 0
    })
}
