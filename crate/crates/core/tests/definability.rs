use std::sync::Arc;

use intdef_core::classfield::{power_residue_symbol, select_ab, Label, RayContext, SelectConfig};
use intdef_core::definability::*;
use intdef_core::enumerate::enumerate_by_height;
use intdef_core::ideal::{is_principal, Ideal};
use intdef_core::prescription::SolveConfig;
use intdef_core::symbols::QuaternionPair;
use intdef_core::{place, Error, FieldCtx, PrimeIdeal, Sign};

fn context(spec: &str) -> RayContext {
    let ctx = Arc::new(FieldCtx::parse(spec).unwrap());
    select_ab(ctx, SelectConfig { prime_bound: 3000, candidate_bound: 6 }).unwrap()
}

fn primes_with(rc: &RayContext, want: impl Fn(Label) -> bool, n: usize) -> Vec<PrimeIdeal> {
    rc.prime_table().iter().filter(|(_, l)| want(*l)).map(|(p, _)| p.clone()).take(n).collect()
}

#[test]
fn routes_agree_on_small_heights() {
    let ctx = FieldCtx::parse("Q").unwrap();
    for (a, b) in [(17, 3), (5, 7), (3, 5), (2, 5)] {
        let pair = QuaternionPair::new(&ctx, ctx.int(a), ctx.int(b)).unwrap();
        let report = dual_route_audit(&ctx, &pair, 8).unwrap();
        assert!(report.disagreements.is_empty(), "({a}, {b}): {:?}", report.disagreements);
    }
    let ctx = FieldCtx::parse("Q(sqrt,-1)").unwrap();
    let pair = QuaternionPair::new(&ctx, ctx.elem("1+2*w").unwrap(), ctx.int(3)).unwrap();
    let report = dual_route_audit(&ctx, &pair, 3).unwrap();
    assert!(report.disagreements.is_empty(), "{:?}", report.disagreements);
}

#[test]
fn membership_edge_cases() {
    let ctx = FieldCtx::parse("Q").unwrap();
    let pair = QuaternionPair::new(&ctx, ctx.int(3), ctx.int(5)).unwrap();
    let (one, zero) = (ctx.int(1), ctx.int(0));
    assert!(!in_i_c(&ctx, &one, &pair.a, &pair, Route::Valuation).unwrap());
    assert!(!in_i_c(&ctx, &one, &pair.a, &pair, Route::Formula).unwrap());
    assert!(matches!(in_i_c(&ctx, &zero, &pair.a, &pair, Route::Formula), Err(Error::Input(_))));
    assert!(in_j(&ctx, &zero, &pair).unwrap());
    let ramified = QuaternionPair::new(&ctx, ctx.int(-1), ctx.int(-1)).unwrap();
    assert!(matches!(in_j(&ctx, &one, &ramified), Err(Error::Input(_))));
}

#[test]
fn j_certificates_verify() {
    let ctx = FieldCtx::parse("Q").unwrap();
    let pair = QuaternionPair::new(&ctx, ctx.int(3), ctx.int(5)).unwrap();
    for x in ["15", "45/2", "30", "-15/7"] {
        let x = ctx.elem(x).unwrap();
        assert!(in_j(&ctx, &x, &pair).unwrap());
        let cert = j_split(&ctx, &x, &pair).unwrap().expect("split");
        assert!(verify_j_cert(&ctx, &x, &pair, &cert).unwrap());
    }
    let x = ctx.int(5);
    assert!(!in_j(&ctx, &x, &pair).unwrap());
    assert!(j_split(&ctx, &x, &pair).unwrap().is_none());
}

#[test]
fn second_ring_isolates_the_prime_off_the_modulus() {
    for spec in ["Q", "Q(sqrt,-5)"] {
        let rc = context(spec);
        for p0 in primes_with(&rc, |l| l != Label::TRIVIAL, 4) {
            let (p, ring) = construct_sigma_witness(&rc, &p0).unwrap();
            assert!(ring.delta.contains(&p0));
            let (_, meet) = two_ring_isolation(&rc, &p0, &p).unwrap();
            // Primes of the modulus can sit in both rings.
            let off: Vec<PrimeIdeal> = meet.into_iter().filter(|q| !rc.modulus().divides(q)).collect();
            assert_eq!(off, vec![p0.clone()], "{spec} at {p0}");
        }
    }
}

#[test]
fn nonprincipal_sigma_witness() {
    let rc = context("Q(sqrt,-5)");
    let ctx = rc.field_ctx();
    let p0 = rc
        .prime_table()
        .iter()
        .find(|(p, l)| *l != Label::TRIVIAL && is_principal(ctx, &Ideal::from_prime(p)).unwrap().is_none())
        .map(|(p, _)| p.clone())
        .unwrap();
    let (p, ring) = construct_sigma_witness(&rc, &p0).unwrap();
    assert!(ring.delta.contains(&p0));
    assert!(in_phi(&rc, &p, rc.label(&p0).unwrap()).unwrap());
    assert_eq!(place::support(ctx, &p).unwrap().len(), 2);
}

#[test]
fn q_can_take_either_residue() {
    for spec in ["Q", "Q(sqrt,-1)"] {
        let rc = context(spec);
        for p0 in primes_with(&rc, |l| l == Label::TRIVIAL, 3) {
            for target in [Sign::Minus, Sign::Plus] {
                let q = construct_q_with(&rc, &p0, target, &[]).unwrap();
                assert_eq!(power_residue_symbol(rc.field_ctx(), &q, &p0).unwrap(), target);
                let qp = &place::support(rc.field_ctx(), &q).unwrap()[0];
                assert_eq!(rc.label(qp).unwrap(), Label(Sign::Minus, Sign::Minus));
            }
        }
    }
}

#[test]
fn pair_witness_cuts_out_one_prime() {
    for spec in ["Q", "Q(sqrt,-1)"] {
        let rc = context(spec);
        for p0 in primes_with(&rc, |l| l == Label::TRIVIAL, 3) {
            let w = construct_pair_witness(&rc, &p0, SolveConfig::default()).unwrap();
            assert_eq!(w.ring.delta, vec![p0.clone()]);
            assert!(in_psi(&rc, &w.p, &w.q).unwrap());
        }
    }
}

#[test]
fn decisions_match_denominators_over_q() {
    let rc = context("Q");
    let decider = Decider::new(&rc, SolveConfig::default());
    let mut witnessed = 0;
    for t in enumerate_by_height(rc.field_ctx().field(), 8) {
        let v = decider.decide(&t).unwrap();
        assert_eq!(v == Verdict::Integral, t.is_integral(), "{t}");
        if let Verdict::NotIntegral(w) = v {
            let back = Witness::from_text(&rc, &w.to_text(&rc)).unwrap();
            assert_eq!(back, *w);
            verify_witness(&rc, &back).unwrap();
            witnessed += 1;
        }
    }
    assert!(witnessed > 0);
}

#[test]
fn tampered_witnesses_fail() {
    let rc = context("Q");
    let decider = Decider::new(&rc, SolveConfig::default());
    let t = enumerate_by_height(rc.field_ctx().field(), 8)
        .into_iter()
        .find(|t| matches!(decider.decide(t), Ok(Verdict::NotIntegral(_))))
        .unwrap();
    let Verdict::NotIntegral(w) = decider.decide(&t).unwrap() else { unreachable!() };
    let text = w.to_text(&rc);
    let other = rc.field_ctx().elem(&format!("{}+1", w.y)).unwrap();
    let bad_y = text.replace(&format!("y = {}", w.y), &format!("y = {other}"));
    let parsed = Witness::from_text(&rc, &bad_y).unwrap();
    assert!(matches!(verify_witness(&rc, &parsed), Err(Error::Invariant(_))));
    let wrong_ctx = context("Q(sqrt,-1)");
    assert!(Witness::from_text(&wrong_ctx, &text).is_err());
}
