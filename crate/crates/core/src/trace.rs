//! Reduced traces of norm-one quaternions, locally and globally.

use std::cmp::Ordering;

use num_bigint::BigInt;

use crate::approx::Approx;
use crate::enumerate::{enumerate_by_height, small_integral};
use crate::error::{Error, Result};
use crate::field::{Field, FieldCtx, NfElem};
use crate::place::{self, Place, PrimeIdeal};
use crate::residue::{Gf, GfElem};
use crate::symbols::{is_local_square, QuaternionPair};

/// Residues `s` for which `x^2 - s x + 1` is irreducible over `F_q`.
#[derive(Clone, Debug)]
pub struct USet {
    gf: Gf,
    members: Vec<GfElem>,
}

impl USet {
    pub fn of_field(gf: &Gf) -> USet {
        let members = gf.elements().filter(|&s| trace_poly_irreducible(gf, s)).collect();
        USet { gf: gf.clone(), members }
    }

    pub fn q(&self) -> u64 {
        self.gf.order()
    }

    pub fn field(&self) -> &Gf {
        &self.gf
    }

    pub fn members(&self) -> &[GfElem] {
        &self.members
    }

    pub fn contains(&self, s: GfElem) -> bool {
        self.members.binary_search(&s).is_ok()
    }

    /// Members separated by single spaces, in index order.
    pub fn render(&self) -> String {
        self.gf.render_set(&self.members)
    }

    /// Whether `(U ∪ extra) + U` is all of `F_q`.
    pub fn sumset_covers(&self, extra: &[GfElem]) -> bool {
        let gf = &self.gf;
        let mut left: Vec<GfElem> = self.members.clone();
        left.extend_from_slice(extra);
        let mut hit = vec![false; gf.order() as usize];
        for &x in &left {
            for &y in &self.members {
                hit[gf.add(x, y) as usize] = true;
            }
        }
        hit.into_iter().all(|h| h)
    }
}

/// `x^2 - s x + 1` irreducible: discriminant test in odd characteristic,
/// root search in characteristic 2.
fn trace_poly_irreducible(gf: &Gf, s: GfElem) -> bool {
    if gf.characteristic() == 2 {
        return !gf
            .elements()
            .any(|x| gf.add(gf.sub(gf.mul(x, x), gf.mul(s, x)), gf.one()) == 0);
    }
    let disc = gf.sub(gf.mul(s, s), gf.from_int(4));
    disc != 0 && !gf.is_square(disc)
}

/// `U_q` for `q = p`, `p^2`, or `8`.
pub fn u_set(q: u64) -> Result<USet> {
    let gf = Gf::of_order(q)?;
    if gf.degree() > 2 && q != 8 {
        return Err(Error::Unsupported(format!(
            "q = {q}: residue degree {} does not occur for quadratic fields",
            gf.degree()
        )));
    }
    Ok(USet::of_field(&gf))
}

/// One row of the sumset audit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumsetRow {
    pub q: u64,
    /// `(U ∪ {±2}) + U = F_q`, checked for `q <= 11`.
    pub with_two: Option<bool>,
    /// `U + U = F_q`.
    pub plain: bool,
}

/// Sumset checks for `q = 8` and every `q = p` or `p^2` up to `qmax`.
pub fn sumset_audit(qmax: u64) -> Result<Vec<SumsetRow>> {
    let mut rows = Vec::new();
    for q in 2..=qmax {
        let supported = q == 8
            || crate::arith::is_prime_u64(q)
            || crate::arith::exact_sqrt(&BigInt::from(q))
                .and_then(|r| u64::try_from(r).ok())
                .is_some_and(crate::arith::is_prime_u64);
        if !supported {
            continue;
        }
        let u = u_set(q)?;
        let gf = u.field();
        let with_two = (q <= 11).then(|| u.sumset_covers(&[gf.from_int(2), gf.from_int(-2)]));
        rows.push(SumsetRow { q, with_two, plain: u.sumset_covers(&[]) });
    }
    Ok(rows)
}

/// `t^2 - 4`, whose square class decides the splitting of `x^2 - t x + 1`.
fn trace_disc(t: &NfElem) -> NfElem {
    let four = NfElem::from_int(t.field(), 4);
    &(t * t) - &four
}

fn is_pm_two(t: &NfElem) -> bool {
    trace_disc(t).is_zero()
}

/// Whether `t` is the reduced trace of a norm-one element of the algebra
/// at `place`.
pub fn local_trace_membership(
    ctx: &FieldCtx,
    t: &NfElem,
    pair: &QuaternionPair,
    place: &Place,
) -> Result<bool> {
    if !pair.delta().contains(place) {
        return Ok(true);
    }
    local_division_trace(ctx, t, place)
}

/// Membership in the trace set of the local division algebra at `place`.
fn local_division_trace(ctx: &FieldCtx, t: &NfElem, place: &Place) -> Result<bool> {
    match place {
        Place::Complex => Ok(true),
        Place::Real(_) => {
            let two = NfElem::from_int(t.field(), 2);
            let below = place::real_sign(&(t - &two), place) != Some(Ordering::Greater);
            let above = place::real_sign(&(t + &two), place) != Some(Ordering::Less);
            Ok(below && above)
        }
        Place::Finite(prime) => {
            if !place::is_integral_at(ctx, t, prime) {
                return Ok(false);
            }
            if is_pm_two(t) {
                return Ok(true);
            }
            Ok(!is_local_square(ctx, &trace_disc(t), place)?)
        }
    }
}

fn require_definite_free(pair: &QuaternionPair) -> Result<()> {
    if pair.ramified_at_infinity() {
        return Err(Error::Input(format!(
            "({}, {}) ramifies at a real place; a or b must be positive there",
            pair.a, pair.b
        )));
    }
    Ok(())
}

/// Whether `t` is a sum of two reduced traces of norm-one elements, via
/// integrality at the finite ramified places.
pub fn t_membership(ctx: &FieldCtx, t: &NfElem, pair: &QuaternionPair) -> Result<bool> {
    require_definite_free(pair)?;
    Ok(pair.finite_delta().iter().all(|p| place::is_integral_at(ctx, t, p)))
}

/// Coordinates `(x1, x2, x3, x4)` of a quaternion with
/// `x1^2 - a x2^2 - b x3^2 + ab x4^2 = 1`.
pub type NormOne = [NfElem; 4];

pub fn quaternion_norm(pair: &QuaternionPair, x: &NormOne) -> NfElem {
    let ab = &pair.a * &pair.b;
    &(&(&(&x[0] * &x[0]) - &(&pair.a * &(&x[1] * &x[1]))) - &(&pair.b * &(&x[2] * &x[2])))
        + &(&ab * &(&x[3] * &x[3]))
}

/// Norm-one quaternion with reduced trace `h`, searching `x2, x3` up to `height`.
pub fn norm_one_with_trace(pair: &QuaternionPair, h: &NfElem, height: u64) -> Option<NormOne> {
    let field = h.field();
    let half = h.scale(&num_rational::BigRational::new(1.into(), 2.into()));
    let c = &(&half * &half) - &NfElem::one(field);
    let zero = NfElem::zero(field);
    if c.is_zero() {
        return Some([half, zero.clone(), zero.clone(), zero]);
    }
    let ab = &pair.a * &pair.b;
    let ab_inv = ab.inv().ok()?;
    let xs = enumerate_by_height(field, height);
    for x2 in &xs {
        let ax2 = &pair.a * &(x2 * x2);
        for x3 in &xs {
            let rest = &(&ax2 + &(&pair.b * &(x3 * x3))) - &c;
            let sq = &rest * &ab_inv;
            if let Some(x4) = if sq.is_zero() { Some(zero.clone()) } else { sq.sqrt() } {
                return Some([half.clone(), x2.clone(), x3.clone(), x4]);
            }
        }
    }
    None
}

/// Certificate that `t = r + (t - r)` with both summands reduced traces of
/// norm-one quaternions.
#[derive(Clone, Debug)]
pub struct TraceCert {
    pub t: NfElem,
    pub r: NfElem,
    /// Explicit quaternions for `r` and `t - r`; `None` when only the local
    /// conditions were certified.
    pub quaternions: Option<[NormOne; 2]>,
}

impl TraceCert {
    pub fn local_only(&self) -> bool {
        self.quaternions.is_none()
    }

    pub fn halves(&self) -> [NfElem; 2] {
        [self.r.clone(), &self.t - &self.r]
    }

    /// Rechecks both halves at every ramified place and any quaternions.
    pub fn verify(&self, ctx: &FieldCtx, pair: &QuaternionPair) -> Result<()> {
        for h in self.halves() {
            for v in pair.delta() {
                if !local_trace_membership(ctx, &h, pair, v)? {
                    return Err(Error::Invariant(format!("{h} is not a local trace at {v}")));
                }
            }
        }
        if let Some(qs) = &self.quaternions {
            for (h, x) in self.halves().iter().zip(qs) {
                let two_x1 = &x[0] + &x[0];
                if &two_x1 != h || !quaternion_norm(pair, x).is_one() {
                    return Err(Error::Invariant(format!("bad quaternion witness for {h}")));
                }
            }
        }
        Ok(())
    }
}

/// Search limits for [`t_decompose`].
#[derive(Clone, Copy, Debug)]
pub struct DecomposeConfig {
    /// Coordinate bound for local candidates.
    pub candidate_bound: i64,
    /// Height bound for explicit quaternions; `0` skips the search.
    pub quaternion_height: u64,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        DecomposeConfig { candidate_bound: 12, quaternion_height: 6 }
    }
}

impl DecomposeConfig {
    /// Defaults with the quaternion search cut to height 1 over quadratic
    /// fields, where the height-6 box has about a million points.
    pub fn for_field(field: Field) -> Self {
        let quaternion_height = if field.degree() == 1 { 6 } else { 1 };
        DecomposeConfig { quaternion_height, ..Default::default() }
    }
}

/// Precision to which `h` (with `h ≠ ±2`) pins its local square class at `prime`.
fn stable_precision(ctx: &FieldCtx, h: &NfElem, prime: &PrimeIdeal) -> i64 {
    let v = place::valuation(ctx, &trace_disc(h), prime);
    let two_val = if prime.is_dyadic() { prime.e() as i64 } else { 0 };
    (v + 2 * two_val + 1).max(1)
}

/// Splits `t` into two local traces at every finite ramified place.
pub fn t_decompose(
    ctx: &FieldCtx,
    t: &NfElem,
    pair: &QuaternionPair,
    config: DecomposeConfig,
) -> Result<TraceCert> {
    if !t_membership(ctx, t, pair)? {
        return Err(Error::Input(format!("{t} is not integral at every ramified prime")));
    }
    let field = ctx.field();
    let halves_ok = |r: &NfElem| -> Result<bool> {
        for v in pair.delta() {
            if !local_trace_membership(ctx, r, pair, v)?
                || !local_trace_membership(ctx, &(t - r), pair, v)?
            {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut r = None;
    for c in [2, -2] {
        let c = NfElem::from_int(field, c);
        if halves_ok(&c)? {
            r = Some(c);
            break;
        }
    }
    if r.is_none() {
        let mut problem = Approx::new().integral_outside();
        let candidates = small_integral(field, config.candidate_bound);
        for prime in pair.finite_delta() {
            let v = Place::Finite(prime.clone());
            let mut found = None;
            for c in &candidates {
                let rest = t - c;
                if is_pm_two(c) || is_pm_two(&rest) {
                    continue;
                }
                if local_division_trace(ctx, c, &v)? && local_division_trace(ctx, &rest, &v)? {
                    let k = stable_precision(ctx, c, &prime).max(stable_precision(ctx, &rest, &prime));
                    found = Some((c.clone(), k));
                    break;
                }
            }
            let (c, k) = found.ok_or_else(|| {
                Error::SearchExhausted(format!(
                    "no local split of {t} at {prime} with coordinates up to {}",
                    config.candidate_bound
                ))
            })?;
            problem = problem.congruent(&prime, c, k);
        }
        let sol = problem.solve(ctx)?;
        if !halves_ok(&sol.x)? {
            return Err(Error::Invariant(format!("approximated split {} of {t} fails", sol.x)));
        }
        r = Some(sol.x);
    }
    let r = r.unwrap();
    let quaternions = if config.quaternion_height == 0 {
        None
    } else {
        let rest = t - &r;
        norm_one_with_trace(pair, &r, config.quaternion_height)
            .and_then(|x| norm_one_with_trace(pair, &rest, config.quaternion_height).map(|y| [x, y]))
    };
    let cert = TraceCert { t: t.clone(), r, quaternions };
    cert.verify(ctx, pair)?;
    Ok(cert)
}

/// Archimedean box for sums of two traces at an infinite place.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaBox {
    /// No constraint at a split real place.
    Real,
    /// `[-4, 4]` at a ramified real place.
    Interval(i32, i32),
    /// No constraint at a complex place.
    Complex,
}

pub fn sigma_box(pair: &QuaternionPair, sigma: &Place) -> Result<SigmaBox> {
    match sigma {
        Place::Complex => Ok(SigmaBox::Complex),
        Place::Real(_) => {
            let neg = |x: &NfElem| place::real_sign(x, sigma) == Some(Ordering::Less);
            Ok(if neg(&pair.a) && neg(&pair.b) {
                SigmaBox::Interval(-4, 4)
            } else {
                SigmaBox::Real
            })
        }
        Place::Finite(_) => Err(Error::Input(format!("{sigma} is not an infinite place"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_tables() {
        assert_eq!(u_set(11).unwrap().render(), "0 1 5 6 10");
        assert_eq!(u_set(4).unwrap().render(), "a a+1");
        assert_eq!(u_set(9).unwrap().render(), "a a+2 2a 2a+1");
        assert!(u_set(27).is_err());
        assert!(u_set(16).is_err());
    }

    #[test]
    fn decompose_over_q() {
        let ctx = FieldCtx::parse("Q").unwrap();
        let pair = QuaternionPair::new(&ctx, ctx.int(-1), ctx.int(-3)).unwrap();
        assert!(t_membership(&ctx, &ctx.int(1), &pair).is_err());
        let pair = QuaternionPair::new(&ctx, ctx.int(3), ctx.int(5)).unwrap();
        for t in ["0", "1", "4", "1/7", "13/11"] {
            let t = ctx.elem(t).unwrap();
            let cert = t_decompose(&ctx, &t, &pair, DecomposeConfig::default()).unwrap();
            cert.verify(&ctx, &pair).unwrap();
        }
    }
}
