//! Fractional ideals in Hermite normal form, principality and class groups.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::{Field, FieldCtx, NfElem};
use crate::place::{primes_up_to_norm, PrimeIdeal};

/// `(1/den) * (a Z + (b + c w) Z)` with `c | a`, `c | b`, `0 <= b < a`.
/// Over `Q` only `a` and `den` are meaningful (`b = 0`, `c = 1`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ideal {
    field: Field,
    den: BigInt,
    a: BigInt,
    b: BigInt,
    c: BigInt,
}

/// Hermite form of the lattice spanned by integer vectors `(x0, x1)`.
fn hnf(vectors: &[(BigInt, BigInt)]) -> (BigInt, BigInt, BigInt) {
    let mut a = BigInt::zero();
    let mut top: Option<(BigInt, BigInt)> = None;
    for (v0, v1) in vectors {
        if v1.is_zero() {
            a = a.gcd(v0);
            continue;
        }
        match top.take() {
            None => top = Some((v0.clone(), v1.clone())),
            Some((b, c)) => {
                let eg = c.extended_gcd(v1);
                let g = eg.gcd;
                let nb = &eg.x * &b + &eg.y * v0;
                let residual = (v1 / &g) * &b - (&c / &g) * v0;
                a = a.gcd(&residual);
                top = Some((nb, g));
            }
        }
    }
    let (mut b, mut c) = top.expect("lattice of full rank");
    if c.is_negative() {
        b = -b;
        c = -c;
    }
    assert!(!a.is_zero(), "lattice of full rank");
    let b = b.mod_floor(&a);
    (a, b, c)
}

impl Ideal {
    fn from_lattice(field: Field, den: BigInt, vectors: &[(BigInt, BigInt)]) -> Ideal {
        let (a, b, c) = if field == Field::Rational {
            let a = vectors.iter().fold(BigInt::zero(), |g, (v0, _)| g.gcd(v0));
            (a, BigInt::zero(), BigInt::one())
        } else {
            hnf(vectors)
        };
        Ideal { field, den, a, b, c }.normalized()
    }

    fn normalized(mut self) -> Ideal {
        let g = if self.field == Field::Rational {
            self.a.clone()
        } else {
            self.a.gcd(&self.b).gcd(&self.c)
        };
        let h = g.gcd(&self.den);
        let scale = &g / &h;
        self.den /= &h;
        self.a = &self.a / &g * &scale;
        if self.field != Field::Rational {
            self.b = &self.b / &g * &scale;
            self.c = &self.c / &g * &scale;
            self.b = self.b.mod_floor(&self.a);
        }
        self
    }

    /// Ideal generated by the given elements (not all zero).
    pub fn generated_by(field: Field, gens: &[NfElem]) -> Result<Ideal> {
        let gens: Vec<&NfElem> = gens.iter().filter(|g| !g.is_zero()).collect();
        if gens.is_empty() {
            return Err(Error::Input("the zero ideal is not fractional".into()));
        }
        let den = gens.iter().fold(BigInt::one(), |l, g| l.lcm(&g.denominator()));
        let mut vectors = Vec::new();
        for g in gens {
            let y = g.scale_int(&den);
            let (y0, y1) = y.int_coords();
            vectors.push((y0, y1));
            if field != Field::Rational {
                let (z0, z1) = (&y * &NfElem::omega(field)).int_coords();
                vectors.push((z0, z1));
            }
        }
        Ok(Ideal::from_lattice(field, den, &vectors))
    }

    pub fn principal(x: &NfElem) -> Result<Ideal> {
        Ideal::generated_by(x.field(), std::slice::from_ref(x))
    }

    pub fn unit(field: Field) -> Ideal {
        Ideal::principal(&NfElem::one(field)).unwrap()
    }

    pub fn from_prime(prime: &PrimeIdeal) -> Ideal {
        let (p, pi) = prime.generators();
        Ideal::generated_by(prime.field(), &[p, pi]).unwrap()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    fn basis(&self) -> Vec<NfElem> {
        let first = NfElem::from_int(self.field, self.a.clone());
        if self.field == Field::Rational {
            vec![first]
        } else {
            vec![first, NfElem::from_ints(self.field, self.b.clone(), self.c.clone())]
        }
    }

    /// `Z`-basis of the numerator lattice and the common denominator.
    pub fn hnf(&self) -> (BigInt, BigInt, BigInt, BigInt) {
        (self.a.clone(), self.b.clone(), self.c.clone(), self.den.clone())
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    pub fn norm(&self) -> BigRational {
        let num = if self.field == Field::Rational {
            self.a.clone()
        } else {
            &self.a * &self.c
        };
        let den = self.den.pow(self.field.degree());
        BigRational::new(num, den)
    }

    pub fn mul(&self, other: &Ideal) -> Ideal {
        let mut vectors = Vec::new();
        for x in self.basis() {
            for y in other.basis() {
                let z = &x * &y;
                let (z0, z1) = z.int_coords();
                vectors.push((z0, z1));
            }
        }
        Ideal::from_lattice(self.field, &self.den * &other.den, &vectors)
    }

    pub fn scale(&self, q: &BigRational) -> Ideal {
        assert!(!q.is_zero());
        let n = q.numer().abs();
        let vectors: Vec<(BigInt, BigInt)> = self
            .basis()
            .iter()
            .map(|x| {
                let (x0, x1) = x.scale_int(&n).int_coords();
                (x0, x1)
            })
            .collect();
        Ideal::from_lattice(self.field, &self.den * q.denom(), &vectors)
    }

    pub fn conj(&self) -> Ideal {
        let vectors: Vec<(BigInt, BigInt)> = self
            .basis()
            .iter()
            .map(|x| x.conj().int_coords())
            .collect();
        Ideal::from_lattice(self.field, self.den.clone(), &vectors)
    }

    pub fn inverse(&self) -> Ideal {
        if self.field == Field::Rational {
            let vectors = [(self.den.clone(), BigInt::zero())];
            return Ideal::from_lattice(self.field, self.a.clone(), &vectors);
        }
        let n = self.norm();
        self.conj().scale(&n.recip())
    }

    pub fn pow(&self, e: i64) -> Ideal {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut acc = Ideal::unit(self.field);
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    pub fn contains(&self, x: &NfElem) -> bool {
        let y = x.scale_int(&self.den);
        if !y.is_integral() {
            return false;
        }
        let (y0, y1) = y.int_coords();
        if self.field == Field::Rational {
            return y0.is_multiple_of(&self.a);
        }
        if !y1.is_multiple_of(&self.c) {
            return false;
        }
        let k = &y1 / &self.c;
        (y0 - k * &self.b).is_multiple_of(&self.a)
    }
}

/// A generator of `I` if it is principal. Searches a box that contains a
/// generator whenever one exists; errors if that box is impractically large.
pub fn is_principal(ctx: &FieldCtx, ideal: &Ideal) -> Result<Option<NfElem>> {
    let field = ctx.field();
    let (a, b, c, den) = ideal.hnf();
    let scale = BigRational::new(BigInt::one(), den);
    if field == Field::Rational {
        return Ok(Some(NfElem::from_int(field, a).scale(&scale)));
    }
    let d = BigInt::from(field.d().unwrap());
    let n = &a * &c;
    // Up to units, a generator has |sigma(x)| <= sqrt(E N) at every embedding,
    // where E bounds the fundamental unit (1 for imaginary fields).
    let e_bound: BigInt = match &ctx.units().fundamental {
        None => BigInt::one(),
        Some(u) => {
            let (s, t) = u.sqrt_coords();
            let up = s.abs() + t.abs() * BigRational::from_integer(d.abs().sqrt() + 1);
            up.ceil().to_integer()
        }
    };
    let bound: BigInt = (&e_bound * &n).sqrt() + 1;
    let root_d: BigInt = d.abs().sqrt().max(BigInt::one());
    let tr = field.omega_trace();
    let y_max: BigInt = (BigInt::from(2) * &bound) / (&c * &root_d) + 1;
    let x_span: BigInt = (BigInt::from(4) * &bound) / &a + 2;
    let work: BigInt = (BigInt::from(2) * &y_max + 1) * &x_span;
    if work > BigInt::from(50_000_000u64) {
        return Err(Error::Undecided(format!(
            "principality search box too large for ideal of norm {n}"
        )));
    }
    let target = BigRational::from_integer(n.clone());
    let mut y = -&y_max;
    while y <= y_max {
        let u1: BigInt = &y * &c;
        let two = BigInt::from(2);
        let shift: BigInt = &u1 * &tr;
        let lo: BigInt = Integer::div_floor(&(-(&two * &bound) - &shift), &two);
        let hi: BigInt = Integer::div_ceil(&(&two * &bound - &shift), &two);
        let x_lo: BigInt = Integer::div_floor(&(&lo - &y * &b), &a);
        let x_hi: BigInt = Integer::div_ceil(&(&hi - &y * &b), &a);
        let mut x = x_lo;
        while x <= x_hi {
            let u0 = &x * &a + &y * &b;
            let alpha = NfElem::from_ints(field, u0, u1.clone());
            if alpha.norm().abs() == target {
                return Ok(Some(alpha.scale(&scale)));
            }
            x += 1;
        }
        y += 1;
    }
    Ok(None)
}

/// Ideal class group as a list of integral representatives; entry 0 is `O_K`.
#[derive(Clone, Debug)]
pub struct ClassGroup {
    reps: Vec<Ideal>,
}

impl ClassGroup {
    pub fn order(&self) -> usize {
        self.reps.len()
    }

    pub fn reps(&self) -> &[Ideal] {
        &self.reps
    }

    /// Index of the class of `I`.
    pub fn class_of(&self, ctx: &FieldCtx, ideal: &Ideal) -> Result<usize> {
        for (i, r) in self.reps.iter().enumerate() {
            if is_principal(ctx, &ideal.mul(&r.inverse()))?.is_some() {
                return Ok(i);
            }
        }
        Err(Error::Invariant("ideal outside every class".into()))
    }
}

pub(crate) fn compute_class_group(ctx: &FieldCtx) -> ClassGroup {
    let field = ctx.field();
    let unit = Ideal::unit(field);
    let bound = ctx.minkowski_bound();
    let bound = bound.to_u64().expect("Minkowski bound fits in u64");
    let gens: Vec<Ideal> = primes_up_to_norm(field, bound)
        .iter()
        .map(Ideal::from_prime)
        .collect();
    let mut reps = vec![unit];
    let mut frontier = 0;
    while frontier < reps.len() {
        let r = reps[frontier].clone();
        frontier += 1;
        for g in &gens {
            let cand = r.mul(g);
            let known = reps.iter().any(|s| {
                is_principal(ctx, &cand.mul(&s.inverse()))
                    .expect("class group search within bounds")
                    .is_some()
            });
            if !known {
                reps.push(cand);
            }
        }
    }
    ClassGroup { reps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::place::primes_above;

    #[test]
    fn class_numbers() {
        for (s, h) in [
            ("Q", 1),
            ("Q(sqrt,-1)", 1),
            ("Q(sqrt,-3)", 1),
            ("Q(sqrt,-5)", 2),
            ("Q(sqrt,-23)", 3),
            ("Q(sqrt,-14)", 4),
            ("Q(sqrt,5)", 1),
            ("Q(sqrt,10)", 2),
            ("Q(sqrt,-7)", 1),
        ] {
            let ctx = FieldCtx::parse(s).unwrap();
            assert_eq!(ctx.class_number(), h, "{s}");
        }
    }

    #[test]
    fn prime_above_two_in_minus_five_is_not_principal() {
        let ctx = FieldCtx::parse("Q(sqrt,-5)").unwrap();
        let p2 = Ideal::from_prime(&primes_above(ctx.field(), 2)[0]);
        assert!(is_principal(&ctx, &p2).unwrap().is_none());
        let sq = p2.mul(&p2);
        let g = is_principal(&ctx, &sq).unwrap().unwrap();
        assert_eq!(g.norm().abs(), BigRational::from_integer(4.into()));
    }

    #[test]
    fn ideal_arithmetic() {
        let ctx = FieldCtx::parse("Q(sqrt,-5)").unwrap();
        let f = ctx.field();
        for p in [2u64, 3, 5, 7, 29] {
            for q in primes_above(f, p) {
                let i = Ideal::from_prime(&q);
                assert_eq!(i.norm(), BigRational::from_integer(q.norm().into()));
                assert_eq!(i.mul(&i.inverse()), Ideal::unit(f));
                assert!(i.contains(&q.uniformizer()));
            }
        }
        let q = Ideal::principal(&NfElem::parse(Field::Rational, "6/5").unwrap()).unwrap();
        assert_eq!(q.mul(&q.inverse()), Ideal::unit(Field::Rational));
        let x = NfElem::parse(f, "3/2 + 1/3*w").unwrap();
        let ix = Ideal::principal(&x).unwrap();
        assert_eq!(ix.norm(), x.norm().abs());
        assert!(ix.contains(&x));
    }
}
