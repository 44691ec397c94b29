//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use intdef_core::classfield::{identification_rows, select_ab, Label, RayContext, SelectConfig};
use intdef_core::definability::{
    construct_pair_witness, dual_route_audit, in_psi, verify_witness, Decider, Verdict, Witness,
};
use intdef_core::enumerate::{enumerate_by_height, small_integral};
use intdef_core::place::primes_above;
use intdef_core::prescription::{
    check_conditions, solve, verify_solution, Prescription, SolveConfig, Violation,
};
use intdef_core::symbols::{candidate_places, hilbert_symbol, reciprocity_audit, QuaternionPair};
use intdef_core::trace::{sumset_audit, t_decompose, t_membership, u_set, DecomposeConfig};
use intdef_core::{Error, Field, FieldCtx, NfElem, Place, Sign};

use common::{is_prime, ConicOracle};

const TEST_FIELDS: [&str; 3] = ["Q", "Q(sqrt,-1)", "Q(sqrt,-5)"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(limit: Duration, start: Instant) -> (bool, String) {
    let t = start.elapsed();
    (t < limit, format!("{:.2}s of {}s", t.as_secs_f64(), limit.as_secs()))
}

fn random_elem(rng: &mut ChaCha8Rng, field: Field, h: i64) -> NfElem {
    loop {
        let c1 = if field == Field::Rational { 0 } else { rng.random_range(-h..=h) };
        let x = NfElem::from_parts(
            field,
            BigInt::from(rng.random_range(-h..=h)),
            BigInt::from(c1),
            BigInt::from(rng.random_range(1..=h)),
        );
        if !x.is_zero() {
            return x;
        }
    }
}

fn contexts() -> Vec<RayContext> {
    TEST_FIELDS
        .iter()
        .map(|s| {
            let ctx = Arc::new(FieldCtx::parse(s).unwrap());
            select_ab(ctx, SelectConfig::default()).unwrap()
        })
        .collect()
}

/// Admissible pairs of small integral elements whose algebra ramifies at
/// two or more finite primes, with distinct ramification sets.
fn test_pairs(ctx: &FieldCtx, n: usize) -> Vec<QuaternionPair> {
    let elems: Vec<NfElem> = small_integral(ctx.field(), 3).into_iter().filter(|x| !x.is_zero()).collect();
    let mut out: Vec<QuaternionPair> = Vec::new();
    for (i, a) in elems.iter().enumerate() {
        for b in &elems[i + 1..] {
            let Ok(pair) = QuaternionPair::new(ctx, a.clone(), b.clone()) else {
                continue;
            };
            if pair.ramified_at_infinity()
                || pair.finite_delta().len() < 2
                || out.iter().any(|q| q.delta() == pair.delta())
            {
                continue;
            }
            out.push(pair);
            if out.len() == n {
                return out;
            }
        }
    }
    out
}

fn u_tables() -> Outcome {
    let start = Instant::now();
    let printed = [
        (2, "{1}"),
        (3, "{0}"),
        (4, "{a, a+1}"),
        (5, "{1,4}"),
        (7, "{0,3,4}"),
        (8, "{1, a, a^2, a^2 + a}"),
        (9, "{a, a+2, 2a, 2a+1}"),
        (11, "{0,1,5,6,10}"),
    ];
    let mut bad = Vec::new();
    for (q, set) in printed {
        let want: Vec<String> = set
            .trim_matches(|c| c == '{' || c == '}')
            .split(',')
            .map(|s| s.chars().filter(|c| !c.is_whitespace()).collect())
            .collect();
        let got = u_set(q).unwrap().render();
        if got != want.join(" ") {
            bad.push(format!("U_{q} = {got}"));
        }
    }
    let (fast, time) = within(Duration::from_secs(1), start);
    outcome(bad.is_empty() && fast, format!("8 tables, mismatches {bad:?}, {time}"))
}

fn sumsets() -> Outcome {
    let start = Instant::now();
    let rows = sumset_audit(200).unwrap();
    let mut expected: BTreeSet<u64> = BTreeSet::new();
    for p in (2..=200).filter(|&p| is_prime(p)) {
        expected.insert(p as u64);
        if p * p <= 200 {
            expected.insert((p * p) as u64);
        }
    }
    expected.insert(8);
    let covered: BTreeSet<u64> = rows.iter().map(|r| r.q).collect();
    let bad: Vec<u64> = rows
        .iter()
        .filter(|r| if r.q <= 11 { r.with_two != Some(true) } else { !r.plain })
        .map(|r| r.q)
        .collect();
    let (fast, time) = within(Duration::from_secs(10), start);
    outcome(
        bad.is_empty() && covered == expected && fast,
        format!("{} fields, failing q {bad:?}, {time}", rows.len()),
    )
}

fn reciprocity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = 0;
    for spec in ["Q", "Q(sqrt,-1)", "Q(sqrt,-5)", "Q(sqrt,5)"] {
        let ctx = FieldCtx::parse(spec).unwrap();
        for _ in 0..1000 {
            let a = random_elem(&mut rng, ctx.field(), 20);
            let b = random_elem(&mut rng, ctx.field(), 20);
            if reciprocity_audit(&ctx, &a, &b).is_err() {
                failures += 1;
            }
        }
    }
    let (fast, time) = within(Duration::from_secs(60), start);
    outcome(failures == 0 && fast, format!("4000 pairs, {failures} failures, {time}"))
}

fn symbol_formula() -> Outcome {
    let ctx = FieldCtx::parse("Q").unwrap();
    let mut checked = 0;
    let mut bad = Vec::new();
    for p in (3..=100).filter(|&p| is_prime(p)) {
        let v = Place::Finite(primes_above(ctx.field(), p as u64)[0].clone());
        let mut oracle = ConicOracle::new(p);
        for a in (-50i64..=50).filter(|a| *a != 0) {
            for b in (-50i64..=50).filter(|b| *b != 0) {
                let s = hilbert_symbol(&ctx, &ctx.int(a), &ctx.int(b), &v).unwrap();
                checked += 1;
                if (s == Sign::Plus) != oracle.solvable(a, b) {
                    bad.push((a, b, p));
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{checked} symbols, {} discrepancies {:?}", bad.len(), &bad[..bad.len().min(3)]))
}

fn trace_equivalence() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    let mut members = 0;
    let mut bad = Vec::new();
    for spec in TEST_FIELDS {
        let ctx = FieldCtx::parse(spec).unwrap();
        let height = if ctx.field() == Field::Rational { 20 } else { 12 };
        let ts = enumerate_by_height(ctx.field(), height);
        for pair in test_pairs(&ctx, 2) {
            for t in &ts {
                checked += 1;
                let member = t_membership(&ctx, t, &pair).unwrap();
                let split = match t_decompose(&ctx, t, &pair, DecomposeConfig::for_field(ctx.field())) {
                    Ok(cert) => cert.verify(&ctx, &pair).is_ok(),
                    Err(Error::Input(_)) => false,
                    Err(e) => {
                        bad.push(format!("{spec} ({}, {}) {t}: {e}", pair.a, pair.b));
                        continue;
                    }
                };
                members += usize::from(member);
                if member != split {
                    bad.push(format!("{spec} ({}, {}) {t}", pair.a, pair.b));
                }
            }
        }
    }
    let (fast, time) = within(Duration::from_secs(300), start);
    outcome(
        bad.is_empty() && fast,
        format!("{checked} cases, {members} members, {} discrepancies {:?}, {time}", bad.len(), &bad[..bad.len().min(3)]),
    )
}

fn dual_route() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for spec in TEST_FIELDS {
        let ctx = FieldCtx::parse(spec).unwrap();
        for pair in test_pairs(&ctx, 1) {
            let report = dual_route_audit(&ctx, &pair, 15).unwrap();
            checked += report.checked;
            bad.extend(report.disagreements.iter().map(|(x, w)| format!("{spec} {x}: {w}")));
        }
    }
    outcome(bad.is_empty(), format!("{checked} elements, {} disagreements {:?}", bad.len(), &bad[..bad.len().min(3)]))
}

fn identification(rcs: &[RayContext]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut total = 0;
    let mut mismatched = 0;
    let mut off_modulus = 0;
    let mut first = None;
    for rc in rcs {
        let ctx = rc.field_ctx();
        let mut n = 0;
        while n < 50 {
            let c1 = if ctx.field() == Field::Rational { 0 } else { rng.random_range(-50i64..=50) };
            let p = NfElem::from_ints(ctx.field(), rng.random_range(-50i64..=50), c1);
            if p.is_zero() || !rc.coprime_to_modulus(&p).unwrap() {
                continue;
            }
            n += 1;
            let diffs = identification_rows(rc, &p).unwrap().mismatches();
            if diffs.is_empty() {
                continue;
            }
            mismatched += 1;
            let on = |v: &Place| v.prime().is_some_and(|q| rc.modulus().divides(q));
            if diffs.iter().any(|(_, d)| !d.iter().all(on)) {
                off_modulus += 1;
            }
            if first.is_none() {
                let (l, d) = &diffs[0];
                let places: Vec<String> = d.iter().map(|v| v.token()).collect();
                first = Some(format!("{} p = {p} label {l} at {}", ctx.field(), places.join(" ")));
            }
        }
        total += n;
    }
    outcome(
        mismatched == 0,
        format!(
            "{total} elements, {mismatched} mismatches ({off_modulus} away from the modulus), first: {}",
            first.unwrap_or_else(|| "-".into())
        ),
    )
}

/// A prescription read off the symbols of a random `x`, so it is solvable.
fn random_prescription(rng: &mut ChaCha8Rng, ctx: &FieldCtx) -> Prescription {
    loop {
        let rows = rng.random_range(1..=3);
        let family: Vec<NfElem> = (0..rows).map(|_| random_elem(rng, ctx.field(), 12)).collect();
        let x = random_elem(rng, ctx.field(), 12);
        let mut p = Prescription::new(family.clone());
        for (i, a) in family.iter().enumerate() {
            for v in candidate_places(ctx, a, &x).unwrap() {
                if hilbert_symbol(ctx, a, &x, &v).unwrap() == Sign::Minus {
                    p.set(i, v, Sign::Minus);
                }
            }
        }
        let flagged = p.flagged_places().len();
        if (1..=4).contains(&flagged) {
            return p;
        }
    }
}

fn prescriptions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut solved, mut rejected) = (0, 0);
    let mut bad = Vec::new();
    for k in 0..100 {
        let ctx = FieldCtx::parse(TEST_FIELDS[k % 3]).unwrap();
        let p = random_prescription(&mut rng, &ctx);
        match solve(&ctx, &p, SolveConfig::default()).and_then(|s| verify_solution(&ctx, &p, &s.x)) {
            Ok(()) => solved += 1,
            Err(e) => bad.push(format!("solve {}: {e}", p.to_text().replace('\n', "; "))),
        }
    }
    for k in 0..100 {
        let ctx = FieldCtx::parse(TEST_FIELDS[k % 3]).unwrap();
        let f = ctx.field();
        let mut p = random_prescription(&mut rng, &ctx);
        let expected: BTreeSet<Violation> = if k % 2 == 0 {
            // Flip one target: the row product becomes -1.
            let row = rng.random_range(0..p.family.len());
            let v = Place::Finite(primes_above(f, 3)[0].clone());
            let s = p.target(row, &v);
            p.set(row, v, s * Sign::Minus);
            [Violation::RowProduct { row }].into()
        } else {
            // A square row cannot have -1 anywhere.
            let s = random_elem(&mut rng, f, 6);
            let row = p.family.len();
            p.family.push(&s * &s);
            let v = Place::Finite(primes_above(f, 3)[0].clone());
            let w = Place::Finite(primes_above(f, 5)[0].clone());
            p.set(row, v.clone(), Sign::Minus);
            p.set(row, w.clone(), Sign::Minus);
            [Violation::LocalUnsolvable { place: v }, Violation::LocalUnsolvable { place: w }].into()
        };
        let got: BTreeSet<Violation> = check_conditions(&ctx, &p).unwrap().violations.into_iter().collect();
        let named = if k % 2 == 0 { expected.is_subset(&got) } else { got == expected };
        if named {
            rejected += 1;
        } else {
            bad.push(format!("mutation {k}: expected {expected:?}, got {got:?}"));
        }
    }
    outcome(
        solved == 100 && rejected == 100,
        format!("{solved}/100 solved, {rejected}/100 rejected, problems {:?}", &bad[..bad.len().min(3)]),
    )
}

fn pair_witnesses(rcs: &[RayContext]) -> Outcome {
    let mut ok = 0;
    let mut bad = Vec::new();
    for rc in rcs {
        let primes: Vec<_> =
            rc.prime_table().iter().filter(|(_, l)| *l == Label::TRIVIAL).map(|(p, _)| p.clone()).take(10).collect();
        for p0 in primes {
            match construct_pair_witness(rc, &p0, SolveConfig::default()) {
                Ok(w) if w.ring.delta == [p0.clone()] && in_psi(rc, &w.p, &w.q).unwrap() => ok += 1,
                Ok(w) => bad.push(format!("{} {p0}: primes {:?}", rc.field_ctx().field(), w.ring.delta)),
                Err(e) => bad.push(format!("{} {p0}: {e}", rc.field_ctx().field())),
            }
        }
    }
    outcome(
        bad.is_empty() && ok == 10 * rcs.len(),
        format!("{ok}/{} exact, problems {:?}", 10 * rcs.len(), &bad[..bad.len().min(3)]),
    )
}

fn end_to_end(rcs: &[RayContext]) -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for rc in rcs {
        let ctx = rc.field_ctx();
        let height = if ctx.field() == Field::Rational { 20 } else { 12 };
        let decider = Decider::new(rc, SolveConfig::default());
        let (mut integral, mut witnessed, mut unseparated, mut wrong, mut errors) = (0, 0, 0, 0, 0);
        let mut example = None;
        for t in enumerate_by_height(ctx.field(), height) {
            match decider.decide(&t) {
                Ok(Verdict::Integral) => {
                    integral += 1;
                    wrong += usize::from(!t.is_integral());
                }
                Ok(Verdict::NotIntegral(w)) => {
                    let back = Witness::from_text(rc, &w.to_text(rc));
                    let verified = back.as_ref().is_ok_and(|b| *b == *w && verify_witness(rc, b).is_ok());
                    if verified && !t.is_integral() {
                        witnessed += 1;
                    } else {
                        wrong += 1;
                    }
                }
                Ok(Verdict::Unseparated(g)) => {
                    unseparated += 1;
                    if example.is_none() {
                        let blocking: Vec<String> = g.blocking(ctx).iter().map(|p| p.token()).collect();
                        example = Some(format!("{t} blocked by {}", blocking.join(" ")));
                    }
                }
                Err(_) => errors += 1,
            }
        }
        pass &= unseparated == 0 && wrong == 0 && errors == 0;
        parts.push(format!(
            "{}: {integral} integral, {witnessed} witnessed, {unseparated} unseparated (e.g. {}), {wrong} wrong, {errors} errors",
            ctx.field(),
            example.unwrap_or_else(|| "-".into())
        ));
    }
    let (fast, time) = within(Duration::from_secs(900), start);
    outcome(pass && fast, format!("{}; {time}", parts.join("; ")))
}

fn main() {
    let names = [
        "U-tables",
        "sumset lemma",
        "Hilbert reciprocity",
        "symbol formula vs conic oracle",
        "trace membership vs decomposition",
        "dual-route J / I^c",
        "identification audit",
        "prescription solver",
        "pair-witness exactness",
        "end-to-end integrality",
    ];
    let rcs = contexts();
    let mut failed = 0;
    for (k, name) in names.iter().enumerate() {
        let start = Instant::now();
        let o = match k {
            0 => u_tables(),
            1 => sumsets(),
            2 => reciprocity(),
            3 => symbol_formula(),
            4 => trace_equivalence(),
            5 => dual_route(),
            6 => identification(&rcs),
            7 => prescriptions(),
            8 => pair_witnesses(&rcs),
            _ => end_to_end(&rcs),
        };
        failed += usize::from(!o.pass);
        println!(
            "criterion {:>2} {}: {} [{:.1}s] {}",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", names.len());
        std::process::exit(1);
    }
}
