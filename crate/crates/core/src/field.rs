//! The fields `Q` and `Q(sqrt d)` and exact elements over the integral basis `{1, w}`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith;
use crate::error::{Error, Result};
use crate::ideal::ClassGroup;
use crate::symbols::SymbolMemo;

/// `Q` or `Q(sqrt d)` with `d` squarefree, `d != 0, 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Rational,
    Quadratic(i64),
}

impl Field {
    pub fn quadratic(d: i64) -> Result<Field> {
        if d == 0 || d == 1 {
            return Err(Error::Input(format!("d = {d} does not give a quadratic field")));
        }
        let f = arith::factor_integer(&BigInt::from(d));
        if f.iter().any(|(_, e)| *e > 1) {
            return Err(Error::Input(format!("d = {d} is not squarefree")));
        }
        Ok(Field::Quadratic(d))
    }

    /// Parses `Q`, `Q(sqrt,d)` or `Q(sqrt(d))`.
    pub fn parse(s: &str) -> Result<Field> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t == "Q" {
            return Ok(Field::Rational);
        }
        let inner = t
            .strip_prefix("Q(sqrt,")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| t.strip_prefix("Q(sqrt(").and_then(|r| r.strip_suffix("))")))
            .ok_or_else(|| Error::Input(format!("unrecognised field {s:?}")))?;
        let d: i64 = inner
            .parse()
            .map_err(|_| Error::Input(format!("unrecognised field {s:?}")))?;
        Field::quadratic(d)
    }

    pub fn degree(self) -> u32 {
        match self {
            Field::Rational => 1,
            Field::Quadratic(_) => 2,
        }
    }

    pub fn d(self) -> Option<i64> {
        match self {
            Field::Rational => None,
            Field::Quadratic(d) => Some(d),
        }
    }

    /// Whether `w = (1 + sqrt d)/2` rather than `sqrt d`.
    pub fn half_integral_basis(self) -> bool {
        matches!(self, Field::Quadratic(d) if d.rem_euclid(4) == 1)
    }

    pub fn disc(self) -> BigInt {
        match self {
            Field::Rational => BigInt::one(),
            Field::Quadratic(d) if self.half_integral_basis() => BigInt::from(d),
            Field::Quadratic(d) => BigInt::from(4 * d),
        }
    }

    /// Trace of `w`; `w^2 = tr(w) w - N(w)`.
    pub fn omega_trace(self) -> BigInt {
        BigInt::from(i64::from(self.half_integral_basis()))
    }

    pub fn omega_norm(self) -> BigInt {
        match self {
            Field::Rational => BigInt::zero(),
            Field::Quadratic(d) if self.half_integral_basis() => BigInt::from((1 - d) / 4),
            Field::Quadratic(d) => BigInt::from(-d),
        }
    }

    pub fn is_totally_real(self) -> bool {
        match self {
            Field::Rational => true,
            Field::Quadratic(d) => d > 0,
        }
    }

    pub fn real_embedding_count(self) -> usize {
        match self {
            Field::Rational => 1,
            Field::Quadratic(d) if d > 0 => 2,
            Field::Quadratic(_) => 0,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "Q"),
            Field::Quadratic(d) => write!(f, "Q(sqrt,{d})"),
        }
    }
}

/// `c0 + c1 w` with rational coordinates.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NfElem {
    field: Field,
    c0: BigRational,
    c1: BigRational,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl NfElem {
    pub fn new(field: Field, c0: BigRational, c1: BigRational) -> NfElem {
        assert!(
            field != Field::Rational || c1.is_zero(),
            "rational field element with nonzero w-coordinate"
        );
        NfElem { field, c0, c1 }
    }

    pub fn from_ints(field: Field, c0: impl Into<BigInt>, c1: impl Into<BigInt>) -> NfElem {
        NfElem::new(
            field,
            BigRational::from_integer(c0.into()),
            BigRational::from_integer(c1.into()),
        )
    }

    pub fn from_int(field: Field, n: impl Into<BigInt>) -> NfElem {
        NfElem::from_ints(field, n, 0)
    }

    pub fn from_rational(field: Field, q: BigRational) -> NfElem {
        NfElem::new(field, q, BigRational::zero())
    }

    /// `(n0 + n1 w) / den`.
    pub fn from_parts(field: Field, n0: BigInt, n1: BigInt, den: BigInt) -> NfElem {
        NfElem::new(
            field,
            BigRational::new(n0, den.clone()),
            BigRational::new(n1, den),
        )
    }

    pub fn zero(field: Field) -> NfElem {
        NfElem::from_int(field, 0)
    }

    pub fn one(field: Field) -> NfElem {
        NfElem::from_int(field, 1)
    }

    pub fn omega(field: Field) -> NfElem {
        assert!(field != Field::Rational, "w is undefined over Q");
        NfElem::from_ints(field, 0, 1)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn c0(&self) -> &BigRational {
        &self.c0
    }

    pub fn c1(&self) -> &BigRational {
        &self.c1
    }

    pub fn is_zero(&self) -> bool {
        self.c0.is_zero() && self.c1.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.c0.is_one() && self.c1.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.c1.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.c0.is_integer() && self.c1.is_integer()
    }

    /// Least common denominator of the coordinates.
    pub fn denominator(&self) -> BigInt {
        self.c0.denom().lcm(self.c1.denom())
    }

    /// `(n0, n1, den)` with `self = (n0 + n1 w)/den`, `den > 0` minimal.
    pub fn integral_parts(&self) -> (BigInt, BigInt, BigInt) {
        let den = self.denominator();
        let n0 = (&self.c0 * BigRational::from_integer(den.clone())).to_integer();
        let n1 = (&self.c1 * BigRational::from_integer(den.clone())).to_integer();
        (n0, n1, den)
    }

    /// Integer coordinates of an integral element.
    pub fn int_coords(&self) -> (BigInt, BigInt) {
        debug_assert!(self.is_integral());
        (self.c0.to_integer(), self.c1.to_integer())
    }

    pub fn conj(&self) -> NfElem {
        let tr = BigRational::from_integer(self.field.omega_trace());
        NfElem {
            field: self.field,
            c0: &self.c0 + &self.c1 * tr,
            c1: -&self.c1,
        }
    }

    pub fn norm(&self) -> BigRational {
        if self.field == Field::Rational {
            return self.c0.clone();
        }
        let tr = BigRational::from_integer(self.field.omega_trace());
        let n = BigRational::from_integer(self.field.omega_norm());
        &self.c0 * &self.c0 + &tr * &self.c0 * &self.c1 + n * &self.c1 * &self.c1
    }

    pub fn trace(&self) -> BigRational {
        if self.field == Field::Rational {
            return self.c0.clone();
        }
        let tr = BigRational::from_integer(self.field.omega_trace());
        rat(2) * &self.c0 + tr * &self.c1
    }

    pub fn inv(&self) -> Result<NfElem> {
        if self.is_zero() {
            return Err(Error::NotInvertible("0 has no inverse".into()));
        }
        if self.field == Field::Rational {
            return Ok(NfElem::from_rational(self.field, self.c0.recip()));
        }
        let n = self.norm();
        let c = self.conj();
        Ok(NfElem {
            field: self.field,
            c0: &c.c0 / &n,
            c1: &c.c1 / &n,
        })
    }

    pub fn checked_div(&self, other: &NfElem) -> Result<NfElem> {
        Ok(self * &other.inv()?)
    }

    pub fn scale(&self, q: &BigRational) -> NfElem {
        NfElem {
            field: self.field,
            c0: &self.c0 * q,
            c1: &self.c1 * q,
        }
    }

    pub fn scale_int(&self, n: &BigInt) -> NfElem {
        self.scale(&BigRational::from_integer(n.clone()))
    }

    /// `self^e`; `self` must be nonzero when `e < 0`.
    pub fn pow(&self, e: i64) -> NfElem {
        let base = if e < 0 {
            self.inv().expect("negative power of zero")
        } else {
            self.clone()
        };
        let mut acc = NfElem::one(self.field);
        let mut b = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            k >>= 1;
        }
        acc
    }

    /// `(s, t)` with `self = s + t sqrt d`.
    pub fn sqrt_coords(&self) -> (BigRational, BigRational) {
        if self.field.half_integral_basis() {
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            (&self.c0 + &self.c1 * &half, &self.c1 * half)
        } else {
            (self.c0.clone(), self.c1.clone())
        }
    }

    pub fn from_sqrt_coords(field: Field, s: BigRational, t: BigRational) -> NfElem {
        if field.half_integral_basis() {
            let c1 = &t * rat(2);
            NfElem::new(field, s - &t, c1)
        } else {
            NfElem::new(field, s, t)
        }
    }

    /// Sign under a real embedding: `sqrt d -> embedding * |sqrt d|`.
    /// Returns `None` when the field has no real embedding.
    pub fn real_sign(&self, embedding: i8) -> Option<Ordering> {
        match self.field {
            Field::Rational => Some(self.c0.cmp(&BigRational::zero())),
            Field::Quadratic(d) if d < 0 => None,
            Field::Quadratic(d) => {
                let (s, t) = self.sqrt_coords();
                let t = if embedding < 0 { -t } else { t };
                let zero = BigRational::zero();
                let (ss, ts) = (s.cmp(&zero), t.cmp(&zero));
                if ts == Ordering::Equal || ss == ts {
                    return Some(if ss == Ordering::Equal { ts } else { ss });
                }
                if ss == Ordering::Equal {
                    return Some(ts);
                }
                let lhs = &s * &s;
                let rhs = &t * &t * rat(d);
                Some(if lhs > rhs { ss } else { ts })
            }
        }
    }

    /// Floating-point value under a real embedding, for display only.
    pub fn real_approx(&self, embedding: i8) -> f64 {
        let (s, t) = self.sqrt_coords();
        let sqrt_d = self.field.d().map_or(0.0, |d| (d as f64).sqrt());
        s.to_f64().unwrap_or(f64::NAN) + embedding as f64 * t.to_f64().unwrap_or(f64::NAN) * sqrt_d
    }

    pub fn is_totally_positive(&self) -> bool {
        match self.field {
            Field::Rational => self.c0.is_positive(),
            Field::Quadratic(d) if d < 0 => !self.is_zero(),
            Field::Quadratic(_) => {
                self.real_sign(1) == Some(Ordering::Greater)
                    && self.real_sign(-1) == Some(Ordering::Greater)
            }
        }
    }

    /// Height: largest absolute value among the reduced numerators and the common denominator.
    pub fn height(&self) -> BigInt {
        let (n0, n1, den) = self.integral_parts();
        n0.abs().max(n1.abs()).max(den)
    }

    /// Square root in the field, if one exists.
    pub fn sqrt(&self) -> Option<NfElem> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let field = self.field;
        let (s, t) = self.sqrt_coords();
        let root = if t.is_zero() {
            if let Some(r) = rational_sqrt(&s) {
                Some(NfElem::from_rational(field, r))
            } else if let Some(d) = field.d() {
                rational_sqrt(&(&s / rat(d)))
                    .map(|u| NfElem::from_sqrt_coords(field, BigRational::zero(), u))
            } else {
                None
            }
        } else {
            let n = rational_sqrt(&self.norm())?;
            let two = rat(2);
            [&s + &n, &s - &n].into_iter().find_map(|x| {
                let alpha = rational_sqrt(&(x / &two))?;
                if alpha.is_zero() {
                    return None;
                }
                let beta = &t / (&alpha * &two);
                Some(NfElem::from_sqrt_coords(field, alpha, beta))
            })
        };
        root.filter(|r| &(r * r) == self)
    }

    pub fn is_square(&self) -> bool {
        self.sqrt().is_some()
    }

    /// Parses `a/c + b/c*w` style expressions (terms `q`, `q*w`, `w`, `-w`).
    pub fn parse(field: Field, s: &str) -> Result<NfElem> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(Error::Input("empty element".into()));
        }
        let bad = || Error::Input(format!("cannot parse element {s:?} in {field}"));
        let mut terms = Vec::new();
        let mut cur = String::new();
        for (i, ch) in t.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with(['*', '/']) {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        let mut c0 = BigRational::zero();
        let mut c1 = BigRational::zero();
        for term in terms {
            let (sign, body) = match term.strip_prefix('-') {
                Some(b) => (-1, b),
                None => (1, term.strip_prefix('+').unwrap_or(&term)),
            };
            let (coef, is_w) = if body == "w" {
                (BigRational::one(), true)
            } else if let Some(q) = body.strip_suffix("*w") {
                (parse_rational(q).ok_or_else(bad)?, true)
            } else {
                (parse_rational(body).ok_or_else(bad)?, false)
            };
            let coef = coef * rat(sign);
            if is_w {
                if field == Field::Rational {
                    return Err(bad());
                }
                c1 += coef;
            } else {
                c0 += coef;
            }
        }
        Ok(NfElem::new(field, c0, c1))
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.parse::<BigInt>().ok()?, d.parse::<BigInt>().ok()?),
        None => (s.parse::<BigInt>().ok()?, BigInt::one()),
    };
    (!d.is_zero()).then(|| BigRational::new(n, d))
}

pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = arith::exact_sqrt(q.numer())?;
    let d = arith::exact_sqrt(q.denom())?;
    Some(BigRational::new(n, d))
}

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for NfElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c1.is_zero() {
            return write!(f, "{}", fmt_rational(&self.c0));
        }
        let w = if self.c1.is_one() {
            "w".to_string()
        } else if (-&self.c1).is_one() {
            "-w".to_string()
        } else {
            format!("{}*w", fmt_rational(&self.c1))
        };
        if self.c0.is_zero() {
            return write!(f, "{w}");
        }
        let c0 = fmt_rational(&self.c0);
        match w.strip_prefix('-') {
            Some(rest) => write!(f, "{c0} - {rest}"),
            None => write!(f, "{c0} + {w}"),
        }
    }
}

impl fmt::Debug for NfElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Add<&NfElem> for &NfElem {
    type Output = NfElem;
    fn add(self, rhs: &NfElem) -> NfElem {
        debug_assert_eq!(self.field, rhs.field);
        NfElem {
            field: self.field,
            c0: &self.c0 + &rhs.c0,
            c1: &self.c1 + &rhs.c1,
        }
    }
}

impl Sub<&NfElem> for &NfElem {
    type Output = NfElem;
    fn sub(self, rhs: &NfElem) -> NfElem {
        debug_assert_eq!(self.field, rhs.field);
        NfElem {
            field: self.field,
            c0: &self.c0 - &rhs.c0,
            c1: &self.c1 - &rhs.c1,
        }
    }
}

impl Mul<&NfElem> for &NfElem {
    type Output = NfElem;
    fn mul(self, rhs: &NfElem) -> NfElem {
        debug_assert_eq!(self.field, rhs.field);
        if self.field == Field::Rational {
            return NfElem::from_rational(self.field, &self.c0 * &rhs.c0);
        }
        let tr = BigRational::from_integer(self.field.omega_trace());
        let n = BigRational::from_integer(self.field.omega_norm());
        let hi = &self.c1 * &rhs.c1;
        NfElem {
            field: self.field,
            c0: &self.c0 * &rhs.c0 - &hi * n,
            c1: &self.c0 * &rhs.c1 + &self.c1 * &rhs.c0 + hi * tr,
        }
    }
}

impl Neg for &NfElem {
    type Output = NfElem;
    fn neg(self) -> NfElem {
        NfElem {
            field: self.field,
            c0: -&self.c0,
            c1: -&self.c1,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<NfElem> for NfElem {
            type Output = NfElem;
            fn $m(self, rhs: NfElem) -> NfElem {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&NfElem> for NfElem {
            type Output = NfElem;
            fn $m(self, rhs: &NfElem) -> NfElem {
                (&self).$m(rhs)
            }
        }
        impl $tr<NfElem> for &NfElem {
            type Output = NfElem;
            fn $m(self, rhs: NfElem) -> NfElem {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for NfElem {
    type Output = NfElem;
    fn neg(self) -> NfElem {
        -&self
    }
}

/// Torsion units and, for real quadratic fields, a fundamental unit.
#[derive(Clone, Debug)]
pub struct UnitGroup {
    pub roots_of_unity: Vec<NfElem>,
    pub fundamental: Option<NfElem>,
}

impl UnitGroup {
    /// Representatives of `O_K^x / (O_K^x)^2`.
    pub fn square_class_reps(&self) -> Vec<NfElem> {
        let field = self.roots_of_unity[0].field();
        let mut gens = Vec::new();
        let w = self.roots_of_unity.len();
        // A generator of the torsion group generates it modulo squares.
        let zeta = self
            .roots_of_unity
            .iter()
            .find(|z| (1..w as i64).all(|k| !z.pow(k).is_one()))
            .cloned()
            .unwrap_or_else(|| NfElem::from_int(field, -1));
        gens.push(zeta);
        if let Some(e) = &self.fundamental {
            gens.push(e.clone());
        }
        let mut reps = vec![NfElem::one(field)];
        for g in gens {
            let more: Vec<NfElem> = reps.iter().map(|r| r * &g).collect();
            reps.extend(more);
        }
        reps
    }
}

/// A field together with its unit group and lazily computed invariants.
pub struct FieldCtx {
    field: Field,
    units: UnitGroup,
    class_group: OnceLock<ClassGroup>,
    pub(crate) symbol_memo: SymbolMemo,
    pub(crate) root_cache: Mutex<HashMap<(u64, u64, u32), BigInt>>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx").field("field", &self.field).finish()
    }
}

pub const UNIT_SEARCH_CAP: usize = 100_000;

impl FieldCtx {
    pub fn new(field: Field) -> Result<FieldCtx> {
        let roots_of_unity = match field {
            Field::Quadratic(-1) => vec![
                NfElem::one(field),
                NfElem::omega(field),
                NfElem::from_int(field, -1),
                -NfElem::omega(field),
            ],
            Field::Quadratic(-3) => {
                let w = NfElem::omega(field);
                let one = NfElem::one(field);
                vec![
                    one.clone(),
                    w.clone(),
                    &w - &one,
                    -one.clone(),
                    -w.clone(),
                    &one - &w,
                ]
            }
            _ => vec![NfElem::one(field), NfElem::from_int(field, -1)],
        };
        let fundamental = match field {
            Field::Quadratic(d) if d > 0 => Some(fundamental_unit(field)?),
            _ => None,
        };
        Ok(FieldCtx {
            field,
            units: UnitGroup {
                roots_of_unity,
                fundamental,
            },
            class_group: OnceLock::new(),
            symbol_memo: SymbolMemo::default(),
            root_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn parse(s: &str) -> Result<FieldCtx> {
        FieldCtx::new(Field::parse(s)?)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn disc(&self) -> BigInt {
        self.field.disc()
    }

    pub fn units(&self) -> &UnitGroup {
        &self.units
    }

    /// Integer upper bound for the Minkowski constant, at least 1.
    pub fn minkowski_bound(&self) -> BigInt {
        let disc = self.disc().abs();
        let root = disc.sqrt() + 1;
        let bound = match self.field {
            Field::Rational => BigInt::one(),
            Field::Quadratic(d) if d < 0 => (root * 6367) / 10000,
            Field::Quadratic(_) => root / 2,
        };
        bound.max(BigInt::one())
    }

    pub fn class_group(&self) -> &ClassGroup {
        self.class_group
            .get_or_init(|| crate::ideal::compute_class_group(self))
    }

    pub fn class_number(&self) -> usize {
        self.class_group().order()
    }

    pub fn elem(&self, s: &str) -> Result<NfElem> {
        NfElem::parse(self.field, s)
    }

    pub fn int(&self, n: i64) -> NfElem {
        NfElem::from_int(self.field, n)
    }
}

/// Smallest unit `h + k w > 1` found among continued-fraction convergents of `-conj(w)`.
fn fundamental_unit(field: Field) -> Result<NfElem> {
    let d = BigInt::from(field.d().expect("quadratic"));
    let (mut p, mut q) = if field.half_integral_basis() {
        (BigInt::from(-1), BigInt::from(2))
    } else {
        (BigInt::zero(), BigInt::one())
    };
    let (mut h_prev, mut h) = (BigInt::zero(), BigInt::one());
    let (mut k_prev, mut k) = (BigInt::one(), BigInt::zero());
    for _ in 0..UNIT_SEARCH_CAP {
        let a = floor_quadratic(&p, &q, &d);
        let h_next = &a * &h + &h_prev;
        let k_next = &a * &k + &k_prev;
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        if k.is_positive() {
            let u = NfElem::from_ints(field, h.clone(), k.clone());
            if u.norm().abs().is_one() {
                return Ok(u);
            }
        }
        let p_next = &a * &q - &p;
        let q_next = (&d - &p_next * &p_next) / &q;
        p = p_next;
        q = q_next;
    }
    Err(Error::Config(format!(
        "fundamental unit search exceeded {UNIT_SEARCH_CAP} steps for {field}"
    )))
}

/// `floor((p + sqrt d) / q)` for non-square `d > 0`, `q != 0`.
fn floor_quadratic(p: &BigInt, q: &BigInt, d: &BigInt) -> BigInt {
    let r = d.sqrt();
    let mut m = (p + &r).div_floor(q);
    // x >= m  iff  (p - m q + sqrt d) has the sign of q (or is zero).
    let ge = |m: &BigInt| {
        let u = p - m * q;
        let positive = !u.is_negative() || *d > &u * &u;
        positive == q.is_positive()
    };
    while !ge(&m) {
        m -= 1;
    }
    while ge(&(&m + 1)) {
        m += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_relation() {
        for d in [-5, -3, -1, 2, 3, 5, 13, -7] {
            let f = Field::quadratic(d).unwrap();
            let w = NfElem::omega(f);
            let tr = NfElem::from_int(f, f.omega_trace());
            let n = NfElem::from_int(f, f.omega_norm());
            assert_eq!(&w * &w, &tr * &w - n);
        }
    }

    #[test]
    fn parse_and_display() {
        let f = Field::parse("Q(sqrt,-5)").unwrap();
        for s in ["0", "1", "-3/4", "w", "-w", "1/2 + 3/2*w", "2 - w", "-1/3*w"] {
            let e = NfElem::parse(f, s).unwrap();
            assert_eq!(e.to_string(), s);
        }
        assert!(NfElem::parse(Field::Rational, "w").is_err());
        assert!(Field::parse("Q(sqrt,4)").is_err());
        assert_eq!(Field::parse("Q").unwrap(), Field::Rational);
    }

    #[test]
    fn fundamental_units_small_d() {
        let expect = [
            (2, (1, 1)),
            (3, (2, 1)),
            (5, (0, 1)),
            (6, (5, 2)),
            (7, (8, 3)),
            (13, (1, 1)),
        ];
        for (d, (h, k)) in expect {
            let ctx = FieldCtx::new(Field::quadratic(d).unwrap()).unwrap();
            let e = ctx.units().fundamental.clone().unwrap();
            assert_eq!(e, NfElem::from_ints(ctx.field(), h, k), "d = {d}");
        }
    }

    #[test]
    fn global_square_roots() {
        let f = Field::quadratic(5).unwrap();
        let x = NfElem::parse(f, "3/2 + 7/5*w").unwrap();
        let sq = &x * &x;
        let r = sq.sqrt().unwrap();
        assert!(r == x || r == -x);
        assert!(NfElem::from_int(f, 5).is_square());
        assert!(!NfElem::from_int(f, 2).is_square());
        assert!(NfElem::from_int(Field::Rational, 9).is_square());
    }

    #[test]
    fn real_signs_are_exact() {
        let f = Field::quadratic(2).unwrap();
        let e = NfElem::parse(f, "-1 + w").unwrap();
        assert_eq!(e.real_sign(1), Some(Ordering::Greater));
        assert_eq!(e.real_sign(-1), Some(Ordering::Less));
        let close = NfElem::parse(f, "-99 + 70*w").unwrap();
        assert_eq!(close.real_sign(1), Some(Ordering::Less));
    }
}
