//! Moduli, Artin labels for `K(√a, √b)/K` and the choice of the pair `(a, b)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::approx::Approx;
use crate::enumerate::small_integral;
use crate::error::{Error, Result};
use crate::field::{FieldCtx, NfElem};
use crate::ideal::Ideal;
use crate::place::{self, real_places, Place, PrimeIdeal};
use crate::symbols::{delta_set, is_local_square, Sign};

/// `m0 · m_inf`: an integral ideal given by its factorization, and real places.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Modulus {
    pub m0: Vec<(PrimeIdeal, u32)>,
    pub real_places: Vec<Place>,
}

impl Modulus {
    /// `(x)` times every real place; `x` must be integral.
    pub fn from_element(ctx: &FieldCtx, x: &NfElem) -> Result<Modulus> {
        if !x.is_integral() {
            return Err(Error::Input(format!("modulus generator {x} is not integral")));
        }
        let m0 = place::factor_elem(ctx, x)?
            .into_iter()
            .map(|(p, e)| (p, e as u32))
            .collect();
        Ok(Modulus { m0, real_places: real_places(ctx.field()) })
    }

    pub fn divides(&self, prime: &PrimeIdeal) -> bool {
        self.m0.iter().any(|(p, _)| p == prime)
    }

    pub fn primes(&self) -> impl Iterator<Item = &PrimeIdeal> {
        self.m0.iter().map(|(p, _)| p)
    }

    /// Space-separated `token^exponent` list.
    pub fn render_m0(&self) -> String {
        self.m0
            .iter()
            .map(|(p, e)| format!("{}^{e}", p.token()))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Whether `x ≡ 1 mod* m`.
pub fn in_k_m1(ctx: &FieldCtx, x: &NfElem, modulus: &Modulus) -> bool {
    if x.is_zero() {
        return false;
    }
    let one = NfElem::one(ctx.field());
    let diff = x - &one;
    let finite = modulus
        .m0
        .iter()
        .all(|(p, e)| diff.is_zero() || place::valuation(ctx, &diff, p) >= *e as i64);
    let signs = modulus
        .real_places
        .iter()
        .all(|v| place::real_sign(x, v) == Some(std::cmp::Ordering::Greater));
    finite && signs
}

/// `(x / P)` for a `P`-unit `x` at an odd prime.
pub fn power_residue_symbol(ctx: &FieldCtx, x: &NfElem, prime: &PrimeIdeal) -> Result<Sign> {
    if prime.is_dyadic() {
        return Err(Error::Input(format!("residue symbol at dyadic prime {prime}")));
    }
    if !place::is_zero_or_unit_at(ctx, x, prime) || x.is_zero() {
        return Err(Error::Input(format!("{x} is not a unit at {prime}")));
    }
    let gf = prime.residue_field();
    Ok(Sign::from_bool(gf.is_square(place::reduce(ctx, x, prime, &gf))))
}

/// Frobenius in `Gal(K(√a, √b)/K) = {±1}^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub Sign, pub Sign);

impl Label {
    pub const TRIVIAL: Label = Label(Sign::Plus, Sign::Plus);
    pub const ALL: [Label; 4] = [
        Label(Sign::Plus, Sign::Plus),
        Label(Sign::Plus, Sign::Minus),
        Label(Sign::Minus, Sign::Plus),
        Label(Sign::Minus, Sign::Minus),
    ];

    pub fn parse(s: &str) -> Result<Label> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::Input(format!("bad label {s:?}")))?;
        let (i, j) = inner
            .split_once(',')
            .ok_or_else(|| Error::Input(format!("bad label {s:?}")))?;
        Ok(Label(Sign::parse(i)?, Sign::parse(j)?))
    }
}

impl std::ops::Mul for Label {
    type Output = Label;
    fn mul(self, rhs: Label) -> Label {
        Label(self.0 * rhs.0, self.1 * rhs.1)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0.value(), self.1.value())
    }
}

/// The fixed pair `(a, b)`, its modulus `8ab · ∞`, and prime tables.
pub struct RayContext {
    ctx: Arc<FieldCtx>,
    pub a: NfElem,
    pub b: NfElem,
    modulus: Modulus,
    prime_bound: u64,
    primes: OnceLock<Vec<(PrimeIdeal, Label)>>,
    classes: Mutex<HashMap<PrimeIdeal, usize>>,
}

impl fmt::Debug for RayContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RayContext")
            .field("field", &self.ctx.field())
            .field("a", &self.a)
            .field("b", &self.b)
            .finish()
    }
}

impl RayContext {
    /// Builds the context after checking square independence, `a, b ≡ 1 mod 8`,
    /// coprime supports and total positivity.
    pub fn new(ctx: Arc<FieldCtx>, a: NfElem, b: NfElem, prime_bound: u64) -> Result<RayContext> {
        let f = ctx.field();
        if a.field() != f || b.field() != f {
            return Err(Error::Input("a and b must lie in the context field".into()));
        }
        if a.is_zero() || b.is_zero() {
            return Err(Error::Input("a and b must be nonzero".into()));
        }
        let ab = &a * &b;
        for (name, x) in [("a", &a), ("b", &b), ("ab", &ab)] {
            if x.is_square() {
                return Err(Error::Input(format!("{name} = {x} is a square")));
            }
        }
        let eight = NfElem::from_int(f, 8);
        let one = NfElem::one(f);
        for (name, x) in [("a", &a), ("b", &b)] {
            let y = (x - &one).checked_div(&eight)?;
            if !y.is_integral() {
                return Err(Error::Input(format!("{name} = {x} is not 1 mod 8")));
            }
        }
        let sa: BTreeSet<PrimeIdeal> = place::support(&ctx, &a)?.into_iter().collect();
        let sb: BTreeSet<PrimeIdeal> = place::support(&ctx, &b)?.into_iter().collect();
        if let Some(p) = sa.intersection(&sb).next() {
            return Err(Error::Input(format!("{p} divides a and b")));
        }
        for (name, x) in [("a", &a), ("b", &b)] {
            if !x.is_totally_positive() {
                return Err(Error::Input(format!("{name} = {x} is not totally positive")));
            }
        }
        let modulus = Modulus::from_element(&ctx, &(&eight * &ab))?;
        Ok(RayContext {
            ctx,
            a,
            b,
            modulus,
            prime_bound,
            primes: OnceLock::new(),
            classes: Mutex::new(HashMap::new()),
        })
    }

    pub fn field_ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn shared_ctx(&self) -> Arc<FieldCtx> {
        self.ctx.clone()
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn prime_bound(&self) -> u64 {
        self.prime_bound
    }

    pub fn ab(&self) -> NfElem {
        &self.a * &self.b
    }

    /// Artin label of a prime not dividing `m0`.
    pub fn label(&self, prime: &PrimeIdeal) -> Result<Label> {
        if self.modulus.divides(prime) {
            return Err(Error::Input(format!("{prime} divides the modulus")));
        }
        Ok(Label(
            power_residue_symbol(&self.ctx, &self.a, prime)?,
            power_residue_symbol(&self.ctx, &self.b, prime)?,
        ))
    }

    /// Label of a fractional ideal given by its factorization.
    pub fn label_factored(&self, factors: &[(PrimeIdeal, i64)]) -> Result<Label> {
        let mut out = Label::TRIVIAL;
        for (p, e) in factors {
            if e.rem_euclid(2) == 1 {
                out = out * self.label(p)?;
            } else if self.modulus.divides(p) {
                return Err(Error::Input(format!("{p} divides the modulus")));
            }
        }
        Ok(out)
    }

    /// Label of the principal ideal `(x)`.
    pub fn label_elem(&self, x: &NfElem) -> Result<Label> {
        self.label_factored(&place::factor_elem(&self.ctx, x)?)
    }

    /// Whether `(x)` is prime to `m0`.
    pub fn coprime_to_modulus(&self, x: &NfElem) -> Result<bool> {
        Ok(place::support(&self.ctx, x)?.iter().all(|p| !self.modulus.divides(p)))
    }

    /// Primes of norm at most the bound, prime to `m0`, with their labels.
    pub fn prime_table(&self) -> &[(PrimeIdeal, Label)] {
        self.primes.get_or_init(|| {
            place::primes_up_to_norm(self.ctx.field(), self.prime_bound)
                .into_iter()
                .filter(|p| !self.modulus.divides(p))
                .map(|p| {
                    let l = self.label(&p).expect("prime outside the modulus");
                    (p, l)
                })
                .collect()
        })
    }

    /// Index of the ideal class of `prime`.
    pub fn class_of_prime(&self, prime: &PrimeIdeal) -> Result<usize> {
        if self.ctx.class_number() == 1 {
            return Ok(0);
        }
        if let Some(&c) = self.classes.lock().unwrap().get(prime) {
            return Ok(c);
        }
        let c = self.ctx.class_group().class_of(&self.ctx, &Ideal::from_prime(prime))?;
        self.classes.lock().unwrap().insert(prime.clone(), c);
        Ok(c)
    }

    /// Index of the ideal class of `I`.
    pub fn class_of(&self, ideal: &Ideal) -> Result<usize> {
        if self.ctx.class_number() == 1 {
            return Ok(0);
        }
        self.ctx.class_group().class_of(&self.ctx, ideal)
    }

    /// Smallest prime prime to `m0` in class `class` with label `label`,
    /// skipping any prime rejected by `skip`.
    pub fn find_prime_where(
        &self,
        class: usize,
        label: Label,
        skip: impl Fn(&PrimeIdeal) -> bool,
    ) -> Result<PrimeIdeal> {
        for (p, l) in self.prime_table() {
            if *l != label || skip(p) {
                continue;
            }
            if self.class_of_prime(p)? == class {
                return Ok(p.clone());
            }
        }
        Err(Error::SearchExhausted(format!(
            "no prime of norm <= {} in class {class} with label {label}",
            self.prime_bound
        )))
    }

    pub fn find_prime(&self, class: usize, label: Label) -> Result<PrimeIdeal> {
        self.find_prime_where(class, label, |_| false)
    }

    /// Within the prime bound, every class meets every label.
    pub fn check_chebotarev(&self) -> Result<Vec<(usize, Label, PrimeIdeal)>> {
        let mut out = Vec::new();
        for class in 0..self.ctx.class_number() {
            for label in Label::ALL {
                out.push((class, label, self.find_prime(class, label)?));
            }
        }
        Ok(out)
    }

    /// Rechecks every defining condition, including the dyadic square property.
    pub fn validate(&self) -> Result<()> {
        let again = RayContext::new(self.ctx.clone(), self.a.clone(), self.b.clone(), self.prime_bound)?;
        if again.modulus != self.modulus {
            return Err(Error::Invariant("modulus differs from 8ab".into()));
        }
        for p in place::primes_above(self.ctx.field(), 2) {
            let v = Place::Finite(p);
            for x in [&self.a, &self.b] {
                if !is_local_square(&self.ctx, x, &v)? {
                    return Err(Error::Invariant(format!("{x} is not a square at {v}")));
                }
            }
        }
        self.check_chebotarev()?;
        Ok(())
    }

    /// Canonical text record.
    pub fn to_text(&self) -> String {
        let body = self.canonical_body();
        format!("{body}hash = {}\n", hash_hex(&body))
    }

    fn canonical_body(&self) -> String {
        let reals: Vec<String> = self.modulus.real_places.iter().map(|v| v.token()).collect();
        format!(
            "ray-context v1\nfield = {}\na = {}\nb = {}\nm0 = {}\nreal = {}\nprime-bound = {}\n",
            self.ctx.field(),
            self.a,
            self.b,
            self.modulus.render_m0(),
            if reals.is_empty() { "-".to_string() } else { reals.join(" ") },
            self.prime_bound
        )
    }

    /// SHA-256 of the canonical record, in hex.
    pub fn hash(&self) -> String {
        hash_hex(&self.canonical_body())
    }

    /// Parses and rechecks a record produced by [`RayContext::to_text`].
    pub fn from_text(text: &str) -> Result<RayContext> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("ray-context v1") {
            return Err(Error::Input("missing ray-context header".into()));
        }
        let mut kv = BTreeMap::new();
        for l in lines {
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| Error::Input(format!("bad line {l:?}")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| {
            kv.get(k)
                .cloned()
                .ok_or_else(|| Error::Input(format!("missing key {k}")))
        };
        let ctx = Arc::new(FieldCtx::parse(&get("field")?)?);
        let a = ctx.elem(&get("a")?)?;
        let b = ctx.elem(&get("b")?)?;
        let bound: u64 = get("prime-bound")?
            .parse()
            .map_err(|_| Error::Input("bad prime-bound".into()))?;
        let rc = RayContext::new(ctx, a, b, bound)?;
        if rc.modulus.render_m0() != get("m0")? {
            return Err(Error::Input("m0 does not match 8ab".into()));
        }
        if let Some(h) = kv.get("hash") {
            if *h != rc.hash() {
                return Err(Error::Input("hash mismatch".into()));
            }
        }
        Ok(rc)
    }
}

fn hash_hex(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

/// Search limits for [`select_ab`].
#[derive(Clone, Copy, Debug)]
pub struct SelectConfig {
    pub prime_bound: u64,
    /// Coordinate bound for `α` in `1 + 8α`.
    pub candidate_bound: i64,
}

impl Default for SelectConfig {
    fn default() -> Self {
        SelectConfig { prime_bound: 10_000, candidate_bound: 6 }
    }
}

/// Totally positive `1 + 8α` generating a prime ideal, in enumeration order.
fn prime_candidates(ctx: &FieldCtx, bound: i64) -> Result<Vec<(NfElem, PrimeIdeal)>> {
    let f = ctx.field();
    let eight = NfElem::from_int(f, 8);
    let one = NfElem::one(f);
    let mut out: Vec<(NfElem, PrimeIdeal)> = Vec::new();
    for alpha in small_integral(f, bound) {
        let x = &one + &(&eight * &alpha);
        if x.is_zero() || !x.is_totally_positive() {
            continue;
        }
        if let [(p, 1)] = place::factor_elem(ctx, &x)?.as_slice() {
            if out.iter().all(|(_, q)| q != p) {
                out.push((x, p.clone()));
            }
        }
    }
    Ok(out)
}

/// First pair of prime-generating candidates meeting every condition, with
/// the class/label coverage checked up to `prime_bound`.
pub fn select_ab(ctx: Arc<FieldCtx>, config: SelectConfig) -> Result<RayContext> {
    let cands = prime_candidates(&ctx, config.candidate_bound)?;
    let mut last = None;
    for (i, (a, _)) in cands.iter().enumerate() {
        for (b, _) in &cands[i + 1..] {
            let rc = match RayContext::new(ctx.clone(), a.clone(), b.clone(), config.prime_bound) {
                Ok(rc) => rc,
                Err(e) => {
                    last = Some(e);
                    continue;
                }
            };
            match rc.check_chebotarev() {
                Ok(_) => return Ok(rc),
                Err(e) => last = Some(e),
            }
        }
    }
    Err(Error::SearchExhausted(format!(
        "no pair (a, b) among 1 + 8α with |α| <= {} passed; last failure: {}",
        config.candidate_bound,
        last.map(|e| e.to_string()).unwrap_or_else(|| "no candidates".into())
    )))
}

/// Odd-valuation primes of `(p)` grouped by label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub cells: BTreeMap<Label, Vec<PrimeIdeal>>,
    /// Odd-valuation primes dividing `m0`, which carry no label.
    pub on_modulus: Vec<PrimeIdeal>,
}

impl Partition {
    pub fn cell(&self, label: Label) -> &[PrimeIdeal] {
        &self.cells[&label]
    }

    /// All odd-valuation primes.
    pub fn support(&self) -> Vec<PrimeIdeal> {
        let mut out: Vec<PrimeIdeal> = self.cells.values().flatten().cloned().collect();
        out.extend(self.on_modulus.iter().cloned());
        out.sort();
        out
    }
}

pub fn prime_partition(rc: &RayContext, p: &NfElem) -> Result<Partition> {
    let mut cells: BTreeMap<Label, Vec<PrimeIdeal>> =
        Label::ALL.iter().map(|l| (*l, Vec::new())).collect();
    let mut on_modulus = Vec::new();
    for (q, e) in place::factor_elem(rc.field_ctx(), p)? {
        if e.rem_euclid(2) == 0 {
            continue;
        }
        if rc.modulus.divides(&q) {
            on_modulus.push(q);
        } else {
            let l = rc.label(&q)?;
            cells.get_mut(&l).unwrap().push(q);
        }
    }
    Ok(Partition { cells, on_modulus })
}

/// Both sides of the three label/ramification identities.
#[derive(Clone, Debug)]
pub struct IdentificationReport {
    pub p: NfElem,
    /// `(label, from labels, from Hilbert symbols)`.
    pub rows: Vec<(Label, BTreeSet<Place>, BTreeSet<Place>)>,
}

/// Both sides of `P^[σ](p) = Δ ∩ Δ'` for the three nontrivial labels.
pub fn identification_rows(rc: &RayContext, p: &NfElem) -> Result<IdentificationReport> {
    if p.is_zero() {
        return Err(Error::Input("p must be nonzero".into()));
    }
    if !rc.coprime_to_modulus(p)? {
        return Err(Error::Input(format!("({p}) is not prime to the modulus")));
    }
    let ctx = rc.field_ctx();
    let part = prime_partition(rc, p)?;
    let da = delta_set(ctx, &rc.a, p)?;
    let db = delta_set(ctx, &rc.b, p)?;
    let dab = delta_set(ctx, &rc.ab(), p)?;
    let meet = |x: &BTreeSet<Place>, y: &BTreeSet<Place>| -> BTreeSet<Place> {
        x.intersection(y).cloned().collect()
    };
    let cell = |l: Label| -> BTreeSet<Place> {
        part.cell(l).iter().cloned().map(Place::Finite).collect()
    };
    let rows = vec![
        (Label(Sign::Minus, Sign::Minus), cell(Label(Sign::Minus, Sign::Minus)), meet(&da, &db)),
        (Label(Sign::Minus, Sign::Plus), cell(Label(Sign::Minus, Sign::Plus)), meet(&da, &dab)),
        (Label(Sign::Plus, Sign::Minus), cell(Label(Sign::Plus, Sign::Minus)), meet(&db, &dab)),
    ];
    Ok(IdentificationReport { p: p.clone(), rows })
}

impl IdentificationReport {
    /// Labels whose two sides differ, with the places in exactly one side.
    pub fn mismatches(&self) -> Vec<(Label, BTreeSet<Place>)> {
        self.rows
            .iter()
            .filter(|(_, lhs, rhs)| lhs != rhs)
            .map(|(l, lhs, rhs)| (*l, lhs.symmetric_difference(rhs).cloned().collect()))
            .collect()
    }
}

/// Checks `P^[σ](p) = Δ ∩ Δ'` for the three nontrivial labels.
pub fn exact_identification_audit(rc: &RayContext, p: &NfElem) -> Result<IdentificationReport> {
    let report = identification_rows(rc, p)?;
    if let Some((l, diff)) = report.mismatches().first() {
        let places: Vec<String> = diff.iter().map(|v| v.token()).collect();
        return Err(Error::Invariant(format!(
            "identification fails for p = {p}, label {l}, at {}",
            places.join(" ")
        )));
    }
    Ok(report)
}

/// Random elements of `K_{m,1}` with support outside `m0`, each with the
/// label of its ideal.
pub fn reciprocity_samples(rc: &RayContext, count: usize, seed: u64) -> Result<Vec<(NfElem, Label)>> {
    let ctx = rc.field_ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table: Vec<&PrimeIdeal> = rc.prime_table().iter().map(|(p, _)| p).take(60).collect();
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        if tries > 200 * count.max(1) {
            return Err(Error::SearchExhausted(format!("only {} of {count} ray samples found", out.len())));
        }
        let mut problem = Approx::new().integral_outside();
        for (p, e) in &rc.modulus.m0 {
            problem = problem.congruent(p, NfElem::one(ctx.field()), *e as i64);
        }
        for v in &rc.modulus.real_places {
            problem = problem.sign(v, true);
        }
        let k = rng.random_range(1..=2);
        let mut chosen = BTreeSet::new();
        for _ in 0..k {
            chosen.insert(table[rng.random_range(0..table.len())].clone());
        }
        for q in &chosen {
            problem = problem.valuation(q, rng.random_range(1..=3));
        }
        let sol = problem.solve(ctx)?;
        let c1 = if ctx.field().degree() == 1 { 0 } else { rng.random_range(-3i64..=3) };
        let z = NfElem::from_ints(ctx.field(), rng.random_range(-3i64..=3), c1);
        let x = &sol.x + &z.scale_int(&sol.step);
        if !in_k_m1(ctx, &x, &rc.modulus) {
            continue;
        }
        // Keep factoring cheap: the norm outside the table primes must fit in 64 bits.
        let mut rest = x.norm().numer().abs();
        for q in &chosen {
            let p = BigInt::from(q.p());
            while (&rest % &p).is_zero() {
                rest /= &p;
            }
        }
        if rest.bits() > 64 {
            continue;
        }
        match rc.label_elem(&x) {
            Ok(l) => out.push((x, l)),
            Err(Error::Unsupported(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
