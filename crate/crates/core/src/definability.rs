//! Membership tests for the pieces of the integrality formula, the rings
//! whose Jacobson radicals separate non-integral elements, and the witness
//! constructions behind [`decide_integrality`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Mutex;

use num_traits::Signed;

use crate::approx::Approx;
use crate::classfield::{Label, RayContext};
use crate::enumerate::small_integral;
use crate::error::{Error, Result};
use crate::field::{FieldCtx, NfElem};
use crate::ideal::{is_principal, Ideal};
use crate::place::{self, Place, PrimeIdeal};
use crate::prescription::{self, local_square_class_basis, Prescription, SolveConfig};
use crate::symbols::{delta_set, hilbert_symbol, is_local_square, QuaternionPair, Sign};
use crate::trace::t_membership;

/// Primes at which `c` has odd valuation.
pub fn odd_support(ctx: &FieldCtx, c: &NfElem) -> Result<Vec<PrimeIdeal>> {
    Ok(place::factor_elem(ctx, c)?
        .into_iter()
        .filter(|(_, e)| e.rem_euclid(2) == 1)
        .map(|(p, _)| p)
        .collect())
}

fn require_admissible(pair: &QuaternionPair) -> Result<()> {
    if pair.ramified_at_infinity() {
        return Err(Error::Input(format!(
            "({}, {}) ramifies at a real place",
            pair.a, pair.b
        )));
    }
    Ok(())
}

/// Whether `x` is a square times a unit of the trace ring: even valuation at
/// every finite ramified prime.
pub fn in_square_times_trace_units(ctx: &FieldCtx, x: &NfElem, pair: &QuaternionPair) -> Result<bool> {
    require_admissible(pair)?;
    if x.is_zero() {
        return Err(Error::Input("x must be nonzero".into()));
    }
    Ok(pair
        .finite_delta()
        .iter()
        .all(|p| place::valuation(ctx, x, p).rem_euclid(2) == 0))
}

/// `r` with `x / r^2` a unit of the trace ring, or `None` if there is none.
/// The quotient is checked by trace-ring membership of it and its inverse.
pub fn square_trace_unit_split(
    ctx: &FieldCtx,
    x: &NfElem,
    pair: &QuaternionPair,
) -> Result<Option<(NfElem, NfElem)>> {
    require_admissible(pair)?;
    if x.is_zero() {
        return Err(Error::Input("x must be nonzero".into()));
    }
    let delta = pair.finite_delta();
    let mut problem = Approx::new();
    for p in &delta {
        let v = place::valuation(ctx, x, p);
        if v.rem_euclid(2) == 1 {
            return Ok(None);
        }
        problem = problem.valuation(p, v / 2);
    }
    let r = if delta.is_empty() {
        NfElem::one(ctx.field())
    } else {
        problem.solve(ctx)?.x
    };
    let z = x.checked_div(&(&r * &r))?;
    if t_membership(ctx, &z, pair)? && t_membership(ctx, &z.inv()?, pair)? {
        Ok(Some((r, z)))
    } else {
        Ok(None)
    }
}

/// How a membership question is answered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Parity and sign conditions on valuations.
    Valuation,
    /// The defining formula, with explicit square roots and trace-ring units.
    Formula,
}

fn check_i_c_args(y: &NfElem, c: &NfElem) -> Result<()> {
    if y.is_zero() {
        return Err(Error::Input("y must be nonzero".into()));
    }
    if c.is_zero() {
        return Err(Error::Input("c must be nonzero".into()));
    }
    Ok(())
}

/// Membership of `y` in `c K^2 T^x ∩ (1 - K^2 T^x)`. `y = 1` is never a
/// member since `1 - y = 0`.
pub fn in_i_c(ctx: &FieldCtx, y: &NfElem, c: &NfElem, pair: &QuaternionPair, route: Route) -> Result<bool> {
    require_admissible(pair)?;
    check_i_c_args(y, c)?;
    if y.is_one() {
        return Ok(false);
    }
    let one_minus = &NfElem::one(ctx.field()) - y;
    match route {
        Route::Valuation => {
            let odd: BTreeSet<PrimeIdeal> = odd_support(ctx, c)?.into_iter().collect();
            for p in pair.finite_delta() {
                let v = place::valuation(ctx, y, &p);
                if odd.contains(&p) {
                    if v <= 0 || v.rem_euclid(2) == 0 {
                        return Ok(false);
                    }
                } else if v.rem_euclid(2) == 1
                    || place::valuation(ctx, &one_minus, &p).rem_euclid(2) == 1
                {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Route::Formula => Ok(square_trace_unit_split(ctx, &y.checked_div(c)?, pair)?.is_some()
            && square_trace_unit_split(ctx, &one_minus, pair)?.is_some()),
    }
}

/// `y` with `y` and `z - y` both in `I^c`, built from valuation targets at
/// the ramified primes. `None` when `z` has non-positive valuation at a
/// ramified prime of odd `c`-valuation.
pub fn i_c_split(ctx: &FieldCtx, z: &NfElem, c: &NfElem, pair: &QuaternionPair) -> Result<Option<NfElem>> {
    require_admissible(pair)?;
    let f = ctx.field();
    let odd: BTreeSet<PrimeIdeal> = odd_support(ctx, c)?.into_iter().collect();
    let delta = pair.finite_delta();
    let ok = |y: &NfElem| -> Result<bool> {
        let rest = z - y;
        Ok(!y.is_zero()
            && !rest.is_zero()
            && in_i_c(ctx, y, c, pair, Route::Formula)?
            && in_i_c(ctx, &rest, c, pair, Route::Formula)?)
    };
    if delta.is_empty() {
        for k in 2..40 {
            let y = NfElem::from_int(f, k);
            if ok(&y)? {
                return Ok(Some(y));
            }
        }
        return Ok(None);
    }
    let mut problem = Approx::new();
    for p in &delta {
        let v = place::valuation_opt(ctx, z, p);
        let target = if odd.contains(p) {
            match v {
                None => 1,
                Some(v) if v <= 0 => return Ok(None),
                Some(v) if v % 2 == 0 => 1,
                Some(v) => v + 2,
            }
        } else {
            let floor = v.map(|v| (-v).max(0)).unwrap_or(0);
            -2 * (floor / 2 + 1)
        };
        problem = problem.valuation(p, target);
    }
    let y = problem.solve(ctx)?.x;
    if ok(&y)? {
        Ok(Some(y))
    } else {
        Err(Error::Invariant(format!("split {y} of {z} failed the formula check")))
    }
}

/// Splits certifying membership in the radical: `x = y_a + (x - y_a)` in
/// `I^a + I^a` and `x = y_b + (x - y_b)` in `I^b + I^b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JCert {
    pub y_a: NfElem,
    pub y_b: NfElem,
}

/// Membership in the radical: `x = 0` or `v(x) >= 1` at every ramified
/// prime where `a` or `b` has odd valuation.
pub fn in_j(ctx: &FieldCtx, x: &NfElem, pair: &QuaternionPair) -> Result<bool> {
    require_admissible(pair)?;
    if x.is_zero() {
        return Ok(true);
    }
    let mut odd: BTreeSet<PrimeIdeal> = odd_support(ctx, &pair.a)?.into_iter().collect();
    odd.extend(odd_support(ctx, &pair.b)?);
    Ok(pair
        .finite_delta()
        .iter()
        .filter(|p| odd.contains(p))
        .all(|p| place::valuation(ctx, x, p) >= 1))
}

/// The constructive side of [`in_j`]: both splits, or `None`.
pub fn j_split(ctx: &FieldCtx, x: &NfElem, pair: &QuaternionPair) -> Result<Option<JCert>> {
    require_admissible(pair)?;
    if x.is_zero() {
        return Ok(None);
    }
    let Some(y_a) = i_c_split(ctx, x, &pair.a, pair)? else {
        return Ok(None);
    };
    let Some(y_b) = i_c_split(ctx, x, &pair.b, pair)? else {
        return Ok(None);
    };
    Ok(Some(JCert { y_a, y_b }))
}

/// Rechecks a [`JCert`] through the defining formula.
pub fn verify_j_cert(ctx: &FieldCtx, x: &NfElem, pair: &QuaternionPair, cert: &JCert) -> Result<bool> {
    for (y, c) in [(&cert.y_a, &pair.a), (&cert.y_b, &pair.b)] {
        let rest = x - y;
        if y.is_zero() || rest.is_zero() {
            return Ok(false);
        }
        if !in_i_c(ctx, y, c, pair, Route::Formula)? || !in_i_c(ctx, &rest, c, pair, Route::Formula)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Counts from [`dual_route_audit`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DualRouteReport {
    pub checked: usize,
    /// Elements whose routes disagree, as `(element, what)`.
    pub disagreements: Vec<(NfElem, String)>,
}

/// Compares the valuation and formula routes for `I^a`, `I^b` and `J` on
/// every nonzero element of height at most `height`. Membership in `J` is
/// confirmed by a verified split certificate.
pub fn dual_route_audit(ctx: &FieldCtx, pair: &QuaternionPair, height: u64) -> Result<DualRouteReport> {
    require_admissible(pair)?;
    let mut report = DualRouteReport::default();
    for x in crate::enumerate::enumerate_by_height(ctx.field(), height) {
        if x.is_zero() {
            continue;
        }
        report.checked += 1;
        for (name, c) in [("I^a", &pair.a), ("I^b", &pair.b)] {
            let v = in_i_c(ctx, &x, c, pair, Route::Valuation)?;
            let f = in_i_c(ctx, &x, c, pair, Route::Formula)?;
            if v != f {
                report.disagreements.push((x.clone(), format!("{name}: valuation {v}, formula {f}")));
            }
        }
        let member = in_j(ctx, &x, pair)?;
        let certified = match j_split(ctx, &x, pair)? {
            Some(cert) => verify_j_cert(ctx, &x, pair, &cert)?,
            None => false,
        };
        if member != certified {
            report.disagreements.push((x.clone(), format!("J: valuation {member}, split {certified}")));
        }
    }
    Ok(report)
}

/// Whether `(p)` is prime to `m0`, has label `σ`, and every odd-valuation
/// prime has label `(1,1)` or `σ`.
pub fn in_phi(rc: &RayContext, p: &NfElem, sigma: Label) -> Result<bool> {
    if p.is_zero() {
        return Err(Error::Input("p must be nonzero".into()));
    }
    if !rc.coprime_to_modulus(p)? {
        return Ok(false);
    }
    phi_labels(rc, p, sigma)
}

/// [`in_phi`] up to squares: valuations at primes of `m0` need only be even.
pub fn in_phi_tilde(rc: &RayContext, p: &NfElem, sigma: Label) -> Result<bool> {
    if p.is_zero() {
        return Err(Error::Input("p must be nonzero".into()));
    }
    let factors = place::factor_elem(rc.field_ctx(), p)?;
    if factors
        .iter()
        .any(|(q, e)| rc.modulus().divides(q) && e.rem_euclid(2) == 1)
    {
        return Ok(false);
    }
    phi_labels(rc, p, sigma)
}

fn phi_labels(rc: &RayContext, p: &NfElem, sigma: Label) -> Result<bool> {
    let mut total = Label::TRIVIAL;
    for (q, e) in place::factor_elem(rc.field_ctx(), p)? {
        if e.rem_euclid(2) == 0 || rc.modulus().divides(&q) {
            continue;
        }
        let l = rc.label(&q)?;
        if l != Label::TRIVIAL && l != sigma {
            return Ok(false);
        }
        total = total * l;
    }
    Ok(total == sigma)
}

fn places_of_modulus(rc: &RayContext) -> Vec<Place> {
    let mut out: Vec<Place> = rc.modulus().primes().cloned().map(Place::Finite).collect();
    out.extend(rc.modulus().real_places.iter().cloned());
    out
}

/// `∏_{v | m} (ap, q)_v`.
pub fn modulus_symbol_product(rc: &RayContext, p: &NfElem, q: &NfElem) -> Result<Sign> {
    let ctx = rc.field_ctx();
    let ap = &rc.a * p;
    let mut prod = Sign::Plus;
    for v in places_of_modulus(rc) {
        prod = prod * hilbert_symbol(ctx, &ap, q, &v)?;
    }
    Ok(prod)
}

/// Membership of `(p, q)` in the parameter set of the `(1,1)` rings.
pub fn in_psi(rc: &RayContext, p: &NfElem, q: &NfElem) -> Result<bool> {
    if p.is_zero() || q.is_zero() {
        return Err(Error::Input("p and q must be nonzero".into()));
    }
    let ctx = rc.field_ctx();
    let minus = Label(Sign::Minus, Sign::Minus);
    if !in_phi_tilde(rc, p, Label::TRIVIAL)? || !in_phi_tilde(rc, q, minus)? {
        return Ok(false);
    }
    if modulus_symbol_product(rc, p, q)? != Sign::Minus {
        return Ok(false);
    }
    let ring = WitnessRing::compute(rc, RingKind::Sigma { p: q.clone(), label: minus })?;
    let ratio = p.checked_div(&rc.a)?;
    if ring.delta.is_empty() {
        return Ok(ratio.is_square());
    }
    for prime in &ring.delta {
        if prime.is_dyadic() {
            return Err(Error::Unsupported(format!("dyadic prime {prime} in the ring of {q}")));
        }
        if !is_local_square(ctx, &ratio, &Place::Finite(prime.clone()))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Which semilocal ring a witness lives in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RingKind {
    /// Localization at a prime of `m0`.
    Local { prime: PrimeIdeal },
    /// The ring cut out by the symbols of `a`, `b`, `ab` against `p`, for a
    /// nontrivial label.
    Sigma { p: NfElem, label: Label },
    /// The ring cut out by `Δ(ap, q) ∩ Δ(bp, q)`.
    Pair { p: NfElem, q: NfElem },
}

impl RingKind {
    pub fn name(&self) -> &'static str {
        match self {
            RingKind::Local { .. } => "local",
            RingKind::Sigma { .. } => "sigma",
            RingKind::Pair { .. } => "pair",
        }
    }
}

/// A semilocal ring `⋂_{P ∈ delta} O_P` with its parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessRing {
    pub kind: RingKind,
    pub delta: Vec<PrimeIdeal>,
}

fn finite_meet(x: &BTreeSet<Place>, y: &BTreeSet<Place>) -> Result<Vec<PrimeIdeal>> {
    let mut out = Vec::new();
    for v in x.intersection(y) {
        match v {
            Place::Finite(p) => out.push(p.clone()),
            _ => return Err(Error::Invariant(format!("archimedean place {v} in a ring's defining set"))),
        }
    }
    Ok(out)
}

impl WitnessRing {
    /// Computes the defining primes from Hilbert symbols. For `Sigma` rings
    /// prime to `m0` the result is checked against the label partition.
    pub fn compute(rc: &RayContext, kind: RingKind) -> Result<WitnessRing> {
        let ctx = rc.field_ctx();
        let delta = match &kind {
            RingKind::Local { prime } => {
                if !rc.modulus().divides(prime) {
                    return Err(Error::Input(format!("{prime} does not divide m0")));
                }
                vec![prime.clone()]
            }
            RingKind::Sigma { p, label } => {
                let (x, y) = match (label.0, label.1) {
                    (Sign::Minus, Sign::Minus) => (rc.a.clone(), rc.b.clone()),
                    (Sign::Minus, Sign::Plus) => (rc.a.clone(), rc.ab()),
                    (Sign::Plus, Sign::Minus) => (rc.b.clone(), rc.ab()),
                    (Sign::Plus, Sign::Plus) => {
                        return Err(Error::Input("the trivial label has no ring".into()))
                    }
                };
                let delta = finite_meet(&delta_set(ctx, &x, p)?, &delta_set(ctx, &y, p)?)?;
                if rc.coprime_to_modulus(p)? {
                    let part = crate::classfield::prime_partition(rc, p)?;
                    let outside: Vec<PrimeIdeal> =
                        delta.iter().filter(|q| !rc.modulus().divides(q)).cloned().collect();
                    if part.cell(*label) != outside.as_slice() {
                        return Err(Error::Invariant(format!(
                            "ring of {p} for {label}: symbols give {delta:?}, labels give {:?}",
                            part.cell(*label)
                        )));
                    }
                }
                delta
            }
            RingKind::Pair { p, q } => {
                let ap = &rc.a * p;
                let bp = &rc.b * p;
                finite_meet(&delta_set(ctx, &ap, q)?, &delta_set(ctx, &bp, q)?)?
            }
        };
        Ok(WitnessRing { kind, delta })
    }

    /// Whether `y` lies in the Jacobson radical.
    pub fn radical_contains(&self, ctx: &FieldCtx, y: &NfElem) -> bool {
        y.is_zero() || self.delta.iter().all(|p| place::valuation(ctx, y, p) >= 1)
    }
}

/// Generator of `P0` or of `P0 Q` for a prime `Q` of label `(1,1)` in the
/// inverse class, with the ring it defines for the label of `P0`.
pub fn construct_sigma_witness(rc: &RayContext, p0: &PrimeIdeal) -> Result<(NfElem, WitnessRing)> {
    let ctx = rc.field_ctx();
    let label = rc.label(p0)?;
    if label == Label::TRIVIAL {
        return Err(Error::Input(format!("{p0} has the trivial label")));
    }
    let ideal = Ideal::from_prime(p0);
    let p = match is_principal(ctx, &ideal)? {
        Some(g) => g,
        None => {
            let class = rc.class_of(&ideal.inverse())?;
            let q = rc.find_prime_where(class, Label::TRIVIAL, |q| q == p0)?;
            is_principal(ctx, &ideal.mul(&Ideal::from_prime(&q)))?.ok_or_else(|| {
                Error::Invariant(format!("{p0} * {q} is not principal"))
            })?
        }
    };
    let ring = WitnessRing::compute(rc, RingKind::Sigma { p: p.clone(), label })?;
    if !ring.delta.contains(p0) {
        return Err(Error::Invariant(format!("{p0} missing from the ring of {p}")));
    }
    if !in_phi(rc, &p, label)? {
        return Err(Error::Invariant(format!("{p} is not in Phi for {label}")));
    }
    Ok((p, ring))
}

/// Given `p` in `Phi` for the label of `P0` with `P0` among its primes,
/// builds a second parameter `p'` whose primes of that label meet those of
/// `p` only in `P0`. Returns `p'` and the intersection of the two rings.
pub fn two_ring_isolation(rc: &RayContext, p0: &PrimeIdeal, p: &NfElem) -> Result<(NfElem, Vec<PrimeIdeal>)> {
    let ctx = rc.field_ctx();
    let label = rc.label(p0)?;
    if !in_phi(rc, p, label)? {
        return Err(Error::Input(format!("{p} is not in Phi for {label}")));
    }
    let first = WitnessRing::compute(rc, RingKind::Sigma { p: p.clone(), label })?;
    if !first.delta.contains(p0) {
        return Err(Error::Input(format!("{p0} is not in the ring of {p}")));
    }
    let ideal = Ideal::from_prime(p0);
    let class = rc.class_of(&ideal.inverse())?;
    let avoid: BTreeSet<PrimeIdeal> = place::support(ctx, p)?.into_iter().collect();
    let q = rc.find_prime_where(class, Label::TRIVIAL, |q| q == p0 || avoid.contains(q))?;
    let p2 = is_principal(ctx, &ideal.mul(&Ideal::from_prime(&q)))?
        .ok_or_else(|| Error::Invariant(format!("{p0} * {q} is not principal")))?;
    let second = WitnessRing::compute(rc, RingKind::Sigma { p: p2.clone(), label })?;
    let meet: Vec<PrimeIdeal> = first
        .delta
        .iter()
        .filter(|x| second.delta.contains(x))
        .cloned()
        .collect();
    Ok((p2, meet))
}

/// A generator `q` of a prime ideal of label `(-1,-1)` prime to `m0` with
/// `(q / P0) = target`, such that every element of `avoid` is a unit at `(q)`.
pub fn construct_q_with(rc: &RayContext, p0: &PrimeIdeal, target: Sign, avoid: &[NfElem]) -> Result<NfElem> {
    let ctx = rc.field_ctx();
    if rc.modulus().divides(p0) {
        return Err(Error::Input(format!("{p0} divides m0")));
    }
    let minus = Label(Sign::Minus, Sign::Minus);
    let units = ctx.units().square_class_reps();
    for (cand, l) in rc.prime_table() {
        if *l != minus || cand == p0 {
            continue;
        }
        if avoid.iter().any(|e| place::valuation(ctx, e, cand) != 0) {
            continue;
        }
        if rc.class_of_prime(cand)? != 0 {
            continue;
        }
        let Some(g) = is_principal(ctx, &Ideal::from_prime(cand))? else {
            continue;
        };
        for u in &units {
            let q = &g * u;
            if crate::classfield::power_residue_symbol(ctx, &q, p0)? == target {
                return Ok(q);
            }
        }
    }
    Err(Error::SearchExhausted(format!(
        "no prime generator q of norm <= {} for {p0}",
        rc.prime_bound()
    )))
}

pub fn construct_q(rc: &RayContext, p0: &PrimeIdeal, avoid: &[NfElem]) -> Result<NfElem> {
    construct_q_with(rc, p0, Sign::Minus, avoid)
}

/// Output of [`construct_pair_witness`].
#[derive(Clone, Debug)]
pub struct PairWitness {
    pub p: NfElem,
    pub q: NfElem,
    pub ring: WitnessRing,
    pub prescription: Prescription,
}

fn stage(name: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::SearchExhausted(m) => Error::SearchExhausted(format!("{name}: {m}")),
        other => other,
    }
}

/// Small elements spanning `K_m^x / K_m^x2`, each accepted by `keep`.
fn square_class_basis_at(
    ctx: &FieldCtx,
    m: &PrimeIdeal,
    keep: &dyn Fn(&NfElem) -> Result<bool>,
) -> Result<Vec<NfElem>> {
    let f = ctx.field();
    let v = Place::Finite(m.clone());
    let rank = local_square_class_basis(ctx, &v)?.len();
    let pi = m.uniformizer();
    for bound in [4i64, 8, 16, 32, 64] {
        let mut cands: Vec<NfElem> = small_integral(f, bound).into_iter().filter(|x| !x.is_zero()).collect();
        cands.extend(small_integral(f, bound / 2).iter().filter(|x| !x.is_zero()).map(|x| x * &pi));
        cands.sort_by_key(|x| (x.norm().abs(), crate::approx::size(x)));
        let mut basis = Vec::new();
        let mut span = vec![NfElem::one(f)];
        for c in cands {
            if basis.len() == rank {
                break;
            }
            if !keep(&c)? {
                continue;
            }
            let mut new = true;
            for s in &span {
                if is_local_square(ctx, &(&c * &s.inv()?), &v)? {
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
        if basis.len() == rank {
            return Ok(basis);
        }
    }
    Err(Error::SearchExhausted(format!("no small square-class basis at {m}")))
}

/// Builds `(p, q)` with `Δ(ap, q) ∩ Δ(bp, q) = {P0}` for a prime `P0` of
/// label `(1,1)` prime to `m0`.
pub fn construct_pair_witness(rc: &RayContext, p0: &PrimeIdeal, config: SolveConfig) -> Result<PairWitness> {
    let ctx = rc.field_ctx();
    let f = ctx.field();
    if rc.label(p0)? != Label::TRIVIAL {
        return Err(Error::Input(format!("{p0} does not have the trivial label")));
    }
    let at_p0 = Place::Finite(p0.clone());
    let square_at_p0 = |x: &NfElem| -> Result<bool> {
        Ok(place::valuation(ctx, x, p0) == 0 && is_local_square(ctx, x, &at_p0)?)
    };
    let mut basis = Vec::new();
    for m in rc.modulus().primes() {
        basis.extend(square_class_basis_at(ctx, m, &square_at_p0).map_err(stage("square-class basis"))?);
    }

    let q = construct_q(rc, p0, &basis).map_err(stage("choosing q"))?;
    let q_prime = place::support(ctx, &q)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Invariant(format!("{q} is a unit")))?;
    let at_q = Place::Finite(q_prime.clone());
    let mut e0 = None;
    'outer: for bound in [4i64, 8, 16, 32, 64] {
        for x in small_integral(f, bound) {
            if x.is_zero() || place::valuation(ctx, &x, &q_prime) != 0 {
                continue;
            }
            if !is_local_square(ctx, &x, &at_q)? && square_at_p0(&x)? {
                e0 = Some(x);
                break 'outer;
            }
        }
    }
    let e0 = e0.ok_or_else(|| Error::SearchExhausted(format!("choosing e0: no small element for {q_prime}")))?;

    let mut family = basis;
    let q_row = family.len() + 1;
    family.push(e0);
    family.push(q.clone());
    family.push(rc.a.clone());
    family.push(rc.b.clone());
    let mut table = Prescription::new(family);
    table.set(q_row, Place::Finite(p0.clone()), Sign::Minus);
    table.set(q_row, Place::Finite(q_prime.clone()), Sign::Minus);
    let solved = prescription::solve(ctx, &table, config).map_err(stage("prescription"))?;

    let mut p = solved.x;
    let mut halving = Approx::new();
    let mut needs = false;
    for m in rc.modulus().primes() {
        let v = place::valuation(ctx, &p, m);
        if v.rem_euclid(2) == 1 {
            return Err(Error::Invariant(format!("p = {p} has odd valuation at {m}")));
        }
        if v != 0 {
            needs = true;
        }
        halving = halving.valuation(m, v / 2);
    }
    if needs {
        let r = halving.solve(ctx)?.x;
        p = p.checked_div(&(&r * &r))?;
    }

    let ring = WitnessRing::compute(rc, RingKind::Pair { p: p.clone(), q: q.clone() })?;
    if ring.delta != [p0.clone()] {
        return Err(Error::Invariant(format!(
            "pair ({p}, {q}) cuts out {:?}, expected {{{p0}}}",
            ring.delta
        )));
    }
    if !in_psi(rc, &p, &q)? {
        return Err(Error::Invariant(format!("({p}, {q}) is not in Psi")));
    }
    if !is_local_square(ctx, &(&rc.a * &p), &Place::Finite(q_prime))? {
        return Err(Error::Invariant(format!("a*{p} is not a square at ({q})")));
    }
    Ok(PairWitness { p, q, ring, prescription: table })
}

/// Certificate that `t` is not integral: `y = 1/t` lies in the Jacobson
/// radical of a ring from the integrality formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub t: NfElem,
    pub bad_prime: PrimeIdeal,
    pub ring: WitnessRing,
    pub y: NfElem,
    /// `v_P(y)` for every `P` in the ring's defining set.
    pub valuations: Vec<(PrimeIdeal, i64)>,
}

impl Witness {
    fn new(rc: &RayContext, t: &NfElem, bad_prime: PrimeIdeal, ring: WitnessRing) -> Result<Witness> {
        let ctx = rc.field_ctx();
        let y = t.inv()?;
        let valuations = ring
            .delta
            .iter()
            .map(|p| (p.clone(), place::valuation(ctx, &y, p)))
            .collect();
        Ok(Witness { t: t.clone(), bad_prime, ring, y, valuations })
    }

    /// Canonical text record, tied to the context by its hash.
    pub fn to_text(&self, rc: &RayContext) -> String {
        let mut s = String::from("witness v1\n");
        s += &format!("field = {}\n", rc.field_ctx().field());
        s += &format!("ctx-hash = {}\n", rc.hash());
        s += &format!("t = {}\n", self.t);
        s += &format!("bad-prime = {}\n", self.bad_prime.token());
        s += &format!("kind = {}\n", self.ring.kind.name());
        match &self.ring.kind {
            RingKind::Local { prime } => s += &format!("prime = {}\n", prime.token()),
            RingKind::Sigma { p, label } => s += &format!("label = {label}\np = {p}\n"),
            RingKind::Pair { p, q } => s += &format!("p = {p}\nq = {q}\n"),
        }
        let delta: Vec<String> = self.ring.delta.iter().map(|p| p.token()).collect();
        s += &format!("delta = {}\n", delta.join(" "));
        s += &format!("y = {}\n", self.y);
        let vals: Vec<String> = self.valuations.iter().map(|(p, v)| format!("{}={v}", p.token())).collect();
        s += &format!("valuations = {}\n", vals.join(" "));
        s
    }

    /// Parses a record written by [`Witness::to_text`]; does not verify it.
    pub fn from_text(rc: &RayContext, text: &str) -> Result<Witness> {
        let f = rc.field_ctx().field();
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("witness v1") {
            return Err(Error::Input("missing witness header".into()));
        }
        let mut kv = BTreeMap::new();
        for l in lines {
            let (k, v) = l.split_once('=').ok_or_else(|| Error::Input(format!("bad line {l:?}")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| kv.get(k).cloned().ok_or_else(|| Error::Input(format!("missing key {k}")));
        if get("field")? != f.to_string() {
            return Err(Error::Input("witness field differs from the context".into()));
        }
        if get("ctx-hash")? != rc.hash() {
            return Err(Error::Input("witness was made for a different context".into()));
        }
        let prime = |s: &str| -> Result<PrimeIdeal> {
            Place::parse(f, s)?
                .prime()
                .cloned()
                .ok_or_else(|| Error::Input(format!("{s} is not a finite place")))
        };
        let elem = |k: &str| -> Result<NfElem> { NfElem::parse(f, &get(k)?) };
        let kind = match get("kind")?.as_str() {
            "local" => RingKind::Local { prime: prime(&get("prime")?)? },
            "sigma" => RingKind::Sigma { p: elem("p")?, label: Label::parse(&get("label")?)? },
            "pair" => RingKind::Pair { p: elem("p")?, q: elem("q")? },
            other => return Err(Error::Input(format!("unknown ring kind {other:?}"))),
        };
        let delta = get("delta")?
            .split_whitespace()
            .map(prime)
            .collect::<Result<Vec<_>>>()?;
        let mut valuations = Vec::new();
        for item in get("valuations")?.split_whitespace() {
            let (p, v) = item
                .rsplit_once('=')
                .ok_or_else(|| Error::Input(format!("bad valuation entry {item:?}")))?;
            let v: i64 = v.parse().map_err(|_| Error::Input(format!("bad valuation {v:?}")))?;
            valuations.push((prime(p)?, v));
        }
        Ok(Witness {
            t: elem("t")?,
            bad_prime: prime(&get("bad-prime")?)?,
            ring: WitnessRing { kind, delta },
            y: elem("y")?,
            valuations,
        })
    }
}

/// Rechecks every claim of a witness from scratch.
pub fn verify_witness(rc: &RayContext, w: &Witness) -> Result<()> {
    let ctx = rc.field_ctx();
    let fail = |m: String| Err(Error::Invariant(m));
    if !(&w.t * &w.y).is_one() {
        return fail(format!("t * y = {} != 1", &w.t * &w.y));
    }
    let fresh = WitnessRing::compute(rc, w.ring.kind.clone())?;
    if fresh.delta != w.ring.delta {
        return fail(format!("ring primes {:?} recompute to {:?}", w.ring.delta, fresh.delta));
    }
    match &w.ring.kind {
        RingKind::Local { .. } => {}
        RingKind::Sigma { p, label } => {
            if *label == Label::TRIVIAL || !in_phi(rc, p, *label)? {
                return fail(format!("{p} is not in Phi for {label}"));
            }
        }
        RingKind::Pair { p, q } => {
            if !in_psi(rc, p, q)? {
                return fail(format!("({p}, {q}) is not in Psi"));
            }
        }
    }
    if !w.ring.delta.contains(&w.bad_prime) {
        return fail(format!("{} is not among the ring's primes", w.bad_prime));
    }
    if place::valuation(ctx, &w.t, &w.bad_prime) >= 0 {
        return fail(format!("t = {} is integral at {}", w.t, w.bad_prime));
    }
    let expect: Vec<(PrimeIdeal, i64)> = w
        .ring
        .delta
        .iter()
        .map(|p| (p.clone(), place::valuation(ctx, &w.y, p)))
        .collect();
    if expect != w.valuations {
        return fail(format!("valuation table {:?} recomputes to {expect:?}", w.valuations));
    }
    if let Some((p, v)) = expect.iter().find(|(_, v)| *v < 1) {
        return fail(format!("v_{p}(y) = {v} < 1"));
    }
    Ok(())
}

/// Outcome of [`Decider::decide`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Integral,
    NotIntegral(Box<Witness>),
    /// `t` is not integral, but every ring tried at its poles also contains
    /// a prime where `t` is integral, so `1/t` is not in its radical.
    Unseparated(Box<Gap>),
}

/// The rings tried for an unseparated element, one per pole.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gap {
    pub t: NfElem,
    pub tried: Vec<(PrimeIdeal, WitnessRing)>,
}

impl Gap {
    /// Primes of the tried rings at which `t` is integral.
    pub fn blocking(&self, ctx: &FieldCtx) -> Vec<PrimeIdeal> {
        let mut out: BTreeSet<PrimeIdeal> = BTreeSet::new();
        for (_, ring) in &self.tried {
            out.extend(ring.delta.iter().filter(|p| place::is_integral_at(ctx, &self.t, p)).cloned());
        }
        out.into_iter().collect()
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Integral => write!(f, "integral"),
            Verdict::NotIntegral(w) => write!(f, "not integral ({} ring at {})", w.ring.kind.name(), w.bad_prime),
            Verdict::Unseparated(g) => {
                let tried: Vec<String> = g
                    .tried
                    .iter()
                    .map(|(p, r)| {
                        let d: Vec<String> = r.delta.iter().map(|q| q.token()).collect();
                        format!("{} ring at {p} has primes {}", r.kind.name(), d.join(" "))
                    })
                    .collect();
                write!(f, "not separated: {}", tried.join("; "))
            }
        }
    }
}

/// Integrality decisions for one context. Rings depend only on the chosen
/// pole, so they are cached per prime.
pub struct Decider<'a> {
    rc: &'a RayContext,
    config: SolveConfig,
    rings: Mutex<HashMap<PrimeIdeal, WitnessRing>>,
}

impl<'a> Decider<'a> {
    pub fn new(rc: &'a RayContext, config: SolveConfig) -> Decider<'a> {
        Decider { rc, config, rings: Mutex::new(HashMap::new()) }
    }

    pub fn context(&self) -> &RayContext {
        self.rc
    }

    /// The ring used for elements with a pole at `p0`.
    pub fn ring_for(&self, p0: &PrimeIdeal) -> Result<WitnessRing> {
        if let Some(r) = self.rings.lock().unwrap().get(p0) {
            return Ok(r.clone());
        }
        let rc = self.rc;
        let ring = if rc.modulus().divides(p0) {
            WitnessRing::compute(rc, RingKind::Local { prime: p0.clone() })?
        } else if rc.label(p0)? == Label::TRIVIAL {
            construct_pair_witness(rc, p0, self.config)?.ring
        } else {
            construct_sigma_witness(rc, p0)?.1
        };
        self.rings.lock().unwrap().insert(p0.clone(), ring.clone());
        Ok(ring)
    }

    /// Decides integrality of `t`. Each pole is tried in turn; the first ring
    /// whose primes are all poles of `t` gives a verified witness. Search
    /// failures surface as `Undecided`.
    pub fn decide(&self, t: &NfElem) -> Result<Verdict> {
        if t.is_integral() {
            return Ok(Verdict::Integral);
        }
        let ctx = self.rc.field_ctx();
        let poles: Vec<PrimeIdeal> = place::factor_elem(ctx, t)?
            .into_iter()
            .filter(|(_, e)| *e < 0)
            .map(|(p, _)| p)
            .collect();
        if poles.is_empty() {
            return Err(Error::Invariant(format!("{t} has no pole but is not integral")));
        }
        let mut tried = Vec::new();
        for bad in poles {
            let ring = self.ring_for(&bad).map_err(|e| match e {
                Error::SearchExhausted(m) => Error::Undecided(format!("undecided-by-bound at {bad}: {m}")),
                other => other,
            })?;
            if ring.delta.iter().all(|p| place::valuation(ctx, t, p) < 0) {
                let w = Witness::new(self.rc, t, bad, ring)?;
                verify_witness(self.rc, &w)?;
                return Ok(Verdict::NotIntegral(Box::new(w)));
            }
            tried.push((bad, ring));
        }
        Ok(Verdict::Unseparated(Box::new(Gap { t: t.clone(), tried })))
    }
}

/// One-shot [`Decider::decide`] with default limits.
pub fn decide_integrality(rc: &RayContext, t: &NfElem) -> Result<Verdict> {
    Decider::new(rc, SolveConfig::default()).decide(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn rational() -> RayContext {
        let ctx = Arc::new(FieldCtx::parse("Q").unwrap());
        RayContext::new(ctx.clone(), ctx.int(17), ctx.int(73), 2000).unwrap()
    }

    #[test]
    fn one_third_is_not_separated() {
        let rc = rational();
        let ctx = rc.field_ctx();
        let t = ctx.elem("1/3").unwrap();
        let Verdict::Unseparated(g) = decide_integrality(&rc, &t).unwrap() else {
            panic!("expected a gap for 1/3");
        };
        let blocking: Vec<u64> = g.blocking(ctx).iter().map(|p| p.p()).collect();
        assert_eq!(blocking, vec![17]);
    }

    #[test]
    fn one_fifth_over_q() {
        let rc = rational();
        let t = rc.field_ctx().elem("1/5").unwrap();
        let Verdict::NotIntegral(w) = decide_integrality(&rc, &t).unwrap() else {
            panic!("1/5 not separated");
        };
        assert_eq!(w.bad_prime.p(), 5);
        let back = Witness::from_text(&rc, &w.to_text(&rc)).unwrap();
        assert_eq!(back, *w);
        verify_witness(&rc, &back).unwrap();
    }

    #[test]
    fn sigma_ring_at_five() {
        let rc = rational();
        let p5 = place::primes_above(rc.field_ctx().field(), 5)[0].clone();
        let (p, ring) = construct_sigma_witness(&rc, &p5).unwrap();
        assert_eq!(ring.delta, vec![p5]);
        assert!(in_phi(&rc, &p, Label(Sign::Minus, Sign::Minus)).unwrap());
    }

    #[test]
    fn pair_witness_over_q() {
        let rc = rational();
        let p0 = rc
            .prime_table()
            .iter()
            .find(|(_, l)| *l == Label::TRIVIAL)
            .map(|(p, _)| p.clone())
            .unwrap();
        let pw = construct_pair_witness(&rc, &p0, SolveConfig::default()).unwrap();
        assert_eq!(pw.ring.delta, vec![p0]);
        assert!(in_psi(&rc, &pw.p, &pw.q).unwrap());
        assert_eq!(modulus_symbol_product(&rc, &pw.p, &pw.q).unwrap(), Sign::Minus);
    }
}
