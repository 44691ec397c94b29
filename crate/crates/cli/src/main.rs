mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use intdef_core::classfield::{
    identification_rows, prime_partition, reciprocity_samples, select_ab, Label, RayContext,
    SelectConfig,
};
use intdef_core::definability::{
    dual_route_audit, verify_witness, Decider, Verdict, Witness,
};
use intdef_core::enumerate::{enumerate_by_height, small_integral};
use intdef_core::ideal::{is_principal, Ideal};
use intdef_core::prescription::{check_conditions, solve, verify_solution, Prescription, SolveConfig};
use intdef_core::symbols::{candidate_places, delta_set, hilbert_symbol, reciprocity_audit, QuaternionPair};
use intdef_core::trace::{
    local_trace_membership, sigma_box, SigmaBox, sumset_audit, t_decompose, t_membership, u_set, DecomposeConfig,
};
use intdef_core::{place, Error, FieldCtx, NfElem, Place, Result, Sign};

use config::RunConfig;
use output::{strings, Out, Record};

#[derive(Parser)]
#[command(name = "intdef", version, about = "Integrality certificates over Q and quadratic fields")]
struct Cli {
    /// Settings file with `key = value` lines.
    #[arg(long, env = "INTDEF_CONFIG", global = true)]
    config: Option<PathBuf>,
    /// `text` or `records` (one JSON object per line).
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Norm bound for prime tables.
    #[arg(long, global = true)]
    prime_bound: Option<u64>,
    /// Attempt cap for randomized searches.
    #[arg(long, global = true)]
    retries: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Field data.
    Field {
        #[command(subcommand)]
        command: FieldCommand,
    },
    /// Prime ideal factorization of an element.
    Factor {
        field: String,
        #[arg(allow_hyphen_values = true)]
        elem: String,
    },
    /// Hilbert symbols of a pair.
    Hilbert {
        field: String,
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
        /// A single place, e.g. `p:5`, `p:5:2`, `real:+`.
        #[arg(long, conflicts_with = "all")]
        place: Option<String>,
        /// Every candidate place plus the reciprocity product.
        #[arg(long)]
        all: bool,
    },
    /// Ramification set of the quaternion algebra of a pair.
    Delta {
        field: String,
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// The set U_q, or the sumset checks up to a bound.
    Useq {
        #[arg(required_unless_present = "audit")]
        q: Option<u64>,
        #[arg(long, value_name = "QMAX")]
        audit: Option<u64>,
    },
    /// Reduced-trace membership and decomposition.
    Trace {
        #[command(subcommand)]
        command: TraceCommand,
    },
    /// Ray-class contexts.
    Ctx {
        #[command(subcommand)]
        command: CtxCommand,
    },
    /// Labels of a prime (`p:...`) or the partition of an element.
    Artin {
        ctxfile: PathBuf,
        #[arg(allow_hyphen_values = true)]
        target: String,
    },
    /// Checks and solves a prescription file.
    Prescribe { ctxfile: PathBuf, file: PathBuf },
    /// Decides integrality of one element, writing a witness when it is not integral.
    Witness {
        ctxfile: PathBuf,
        #[arg(allow_hyphen_values = true)]
        t: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rechecks a witness file against a context.
    CheckWitness { ctxfile: PathBuf, file: PathBuf },
    /// Batch integrality decisions.
    Integrality {
        #[command(subcommand)]
        command: IntegrityCommand,
    },
    /// Invariant suites.
    Audit {
        #[command(subcommand)]
        command: AuditCommand,
    },
}

#[derive(Subcommand)]
enum FieldCommand {
    Info { field: String },
}

#[derive(Args)]
struct TraceArgs {
    field: String,
    #[arg(allow_hyphen_values = true)]
    a: String,
    #[arg(allow_hyphen_values = true)]
    b: String,
    #[arg(allow_hyphen_values = true)]
    t: String,
}

#[derive(Subcommand)]
enum TraceCommand {
    Check(TraceArgs),
    Decompose(TraceArgs),
}

#[derive(Subcommand)]
enum CtxCommand {
    Select {
        field: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Verify { file: PathBuf },
}

#[derive(Subcommand)]
enum IntegrityCommand {
    Sweep {
        ctxfile: PathBuf,
        #[arg(long)]
        height: u64,
        /// Directory for one witness file per non-integral element.
        #[arg(long)]
        witness_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AuditCommand {
    All { ctxfile: PathBuf },
}

fn run_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(p) = &cli.config {
        cfg.load(p)?;
    }
    if let Some(f) = &cli.format {
        cfg.set("format", f)?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(b) = cli.prime_bound {
        cfg.set("prime-bound", &b.to_string())?;
    }
    if let Some(r) = cli.retries {
        cfg.set("retries", &r.to_string())?;
    }
    Ok(cfg)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))
}

fn load_ctx(path: &Path) -> Result<RayContext> {
    RayContext::from_text(&read(path)?)
}

fn render_ideal(i: &Ideal) -> String {
    let (a, b, c, den) = i.hnf();
    let num = if i.field() == intdef_core::Field::Rational {
        format!("({a})")
    } else {
        format!("({a}, {})", NfElem::from_ints(i.field(), b, c))
    };
    if den == 1.into() {
        num
    } else {
        format!("{num}/{den}")
    }
}

fn field_info(out: &mut Out, spec: &str) -> Result<()> {
    let ctx = FieldCtx::parse(spec)?;
    let f = ctx.field();
    let w = match f.d() {
        None => "none".to_string(),
        Some(d) if f.half_integral_basis() => format!("(1+sqrt({d}))/2"),
        Some(d) => format!("sqrt({d})"),
    };
    let basis = if f.degree() == 1 { "1" } else { "1 w" };
    out.emit(Record::new("field", format!("field {f}")).with("field", f.to_string()));
    out.emit(
        Record::new("discriminant", format!("discriminant {}", ctx.disc()))
            .with("value", ctx.disc().to_string()),
    );
    out.emit(
        Record::new("basis", format!("integral-basis {basis} (w = {w})"))
            .with("basis", basis)
            .with("w", w.clone()),
    );
    let units = ctx.units();
    let roots: Vec<String> = units.roots_of_unity.iter().map(|u| u.to_string()).collect();
    let fund = units.fundamental.as_ref().map(|e| e.to_string()).unwrap_or_else(|| "-".into());
    out.emit(
        Record::new("units", format!("roots-of-unity {}\nfundamental-unit {fund}", roots.join(" ")))
            .with("roots-of-unity", strings(&roots))
            .with("fundamental-unit", fund),
    );
    out.emit(
        Record::new("minkowski", format!("minkowski-bound {}", ctx.minkowski_bound()))
            .with("value", ctx.minkowski_bound().to_string()),
    );
    let cg = ctx.class_group();
    out.emit(Record::new("class-number", format!("class-number {}", cg.order())).with("value", cg.order()));
    for (k, rep) in cg.reps().iter().enumerate() {
        out.emit(
            Record::new("class", format!("class {k} {}", render_ideal(rep)))
                .with("index", k)
                .with("ideal", render_ideal(rep)),
        );
    }
    Ok(())
}

fn factor(out: &mut Out, spec: &str, x: &str) -> Result<()> {
    let ctx = FieldCtx::parse(spec)?;
    let x = ctx.elem(x)?;
    if x.is_zero() {
        return Err(Error::Input("cannot factor 0".into()));
    }
    for (p, e) in place::factor_elem(&ctx, &x)? {
        out.emit(
            Record::new(
                "factor",
                format!("{}  norm {}  e {}  f {}  exponent {e}", p.token(), p.norm(), p.e(), p.f()),
            )
            .with("prime", p.token())
            .with("norm", p.norm())
            .with("ramification", p.e())
            .with("degree", p.f())
            .with("exponent", e),
        );
    }
    Ok(())
}

fn sign_record(kind: &'static str, v: &Place, s: Sign) -> Record {
    Record::new(kind, format!("{} {s}", v.token())).with("place", v.token()).with("symbol", s.value())
}

fn hilbert(out: &mut Out, spec: &str, a: &str, b: &str, at: Option<&str>, all: bool) -> Result<()> {
    let ctx = FieldCtx::parse(spec)?;
    let (a, b) = (ctx.elem(a)?, ctx.elem(b)?);
    if let Some(t) = at {
        let v = Place::parse(ctx.field(), t)?;
        out.emit(sign_record("symbol", &v, hilbert_symbol(&ctx, &a, &b, &v)?));
        return Ok(());
    }
    if all {
        let table = reciprocity_audit(&ctx, &a, &b)?;
        for (v, s) in &table {
            out.emit(sign_record("symbol", v, *s));
        }
        out.emit(Record::new("product", "product +1").with("value", 1));
        return Ok(());
    }
    for v in candidate_places(&ctx, &a, &b)? {
        let s = hilbert_symbol(&ctx, &a, &b, &v)?;
        out.emit(sign_record("symbol", &v, s));
    }
    Ok(())
}

fn delta(out: &mut Out, spec: &str, a: &str, b: &str) -> Result<()> {
    let ctx = FieldCtx::parse(spec)?;
    let d = delta_set(&ctx, &ctx.elem(a)?, &ctx.elem(b)?)?;
    let toks: Vec<String> = d.iter().map(|v| v.token()).collect();
    let text = if toks.is_empty() { "{}".to_string() } else { toks.join(" ") };
    out.emit(Record::new("delta", text).with("places", strings(&toks)));
    Ok(())
}

fn useq(out: &mut Out, q: Option<u64>, audit: Option<u64>) -> Result<()> {
    if let Some(qmax) = audit {
        let mut failed = 0;
        for row in sumset_audit(qmax)? {
            let ok = row.plain || (row.q <= 11 && row.with_two == Some(true));
            failed += usize::from(!ok);
            let with_two = match row.with_two {
                Some(b) => b.to_string(),
                None => "-".into(),
            };
            out.emit(
                Record::new("sumset", format!("q {}  U+U {}  (U+-2)+U {with_two}  {}", row.q, row.plain, if ok { "ok" } else { "FAIL" }))
                    .with("q", row.q)
                    .with("plain", row.plain)
                    .with("with-two", row.with_two.map(Value::from).unwrap_or(Value::Null))
                    .with("ok", ok),
            );
        }
        if failed > 0 {
            return Err(Error::Invariant(format!("{failed} sumset checks failed")));
        }
        return Ok(());
    }
    let q = q.expect("clap requires q without --audit");
    let u = u_set(q)?;
    out.emit(Record::new("useq", u.render()).with("q", q).with("members", u.render()));
    Ok(())
}

fn trace(out: &mut Out, cfg: &RunConfig, args: &TraceArgs, decompose: bool) -> Result<()> {
    let ctx = FieldCtx::parse(&args.field)?;
    let pair = QuaternionPair::new(&ctx, ctx.elem(&args.a)?, ctx.elem(&args.b)?)?;
    let t = ctx.elem(&args.t)?;
    if !decompose {
        for v in pair.delta() {
            let (kind, text, ok) = match v {
                Place::Finite(_) => {
                    let ok = local_trace_membership(&ctx, &t, &pair, v)?;
                    ("local", format!("{} {}", v.token(), if ok { "trace" } else { "not-trace" }), ok)
                }
                _ => {
                    let bounds = match sigma_box(&pair, v)? {
                        SigmaBox::Interval(lo, hi) => format!("[{lo}, {hi}]"),
                        SigmaBox::Real | SigmaBox::Complex => "unconstrained".into(),
                    };
                    ("box", format!("{} {bounds}", v.token()), true)
                }
            };
            out.emit(Record::new(kind, text).with("place", v.token()).with("ok", ok));
        }
        let m = t_membership(&ctx, &t, &pair)?;
        out.emit(Record::new("membership", format!("membership {m}")).with("t", t.to_string()).with("member", m));
        return Ok(());
    }
    let mut config = DecomposeConfig::for_field(ctx.field());
    config.candidate_bound = config.candidate_bound.max(cfg.candidate_bound);
    if let Some(h) = cfg.quaternion_height {
        config.quaternion_height = h;
    }
    let cert = t_decompose(&ctx, &t, &pair, config)?;
    cert.verify(&ctx, &pair)?;
    let [r, s] = cert.halves();
    out.emit(
        Record::new("decomposition", format!("{t} = {r} + {s}"))
            .with("t", t.to_string())
            .with("halves", strings([&r, &s])),
    );
    match &cert.quaternions {
        Some(qs) => {
            for (h, x) in [&r, &s].iter().zip(qs) {
                let coords: Vec<String> = x.iter().map(|c| c.to_string()).collect();
                out.emit(
                    Record::new("quaternion", format!("trace {h}: {}", coords.join(" ")))
                        .with("trace", h.to_string())
                        .with("coordinates", strings(&coords)),
                );
            }
        }
        None => out.emit(Record::new("local-only", "local certificate only").with("t", t.to_string())),
    }
    Ok(())
}

fn ctx_select(out: &mut Out, cfg: &RunConfig, spec: &str, path: Option<&Path>) -> Result<()> {
    let ctx = Arc::new(FieldCtx::parse(spec)?);
    let rc = select_ab(ctx, SelectConfig { prime_bound: cfg.prime_bound, candidate_bound: cfg.candidate_bound })?;
    let text = rc.to_text();
    match path {
        Some(p) => {
            write(p, &text)?;
            out.emit(
                Record::new("ctx", format!("a = {}  b = {}  hash {}", rc.a, rc.b, rc.hash()))
                    .with("a", rc.a.to_string())
                    .with("b", rc.b.to_string())
                    .with("hash", rc.hash()),
            );
        }
        None => out.emit(Record::new("ctx", text.trim_end()).with("text", text.clone())),
    }
    Ok(())
}

fn ctx_verify(out: &mut Out, path: &Path) -> Result<()> {
    let rc = load_ctx(path)?;
    rc.validate()?;
    out.emit(Record::new("verified", format!("ok {}", rc.hash())).with("hash", rc.hash()));
    Ok(())
}

fn artin(out: &mut Out, path: &Path, target: &str) -> Result<()> {
    let rc = load_ctx(path)?;
    let f = rc.field_ctx().field();
    if target.starts_with("p:") {
        let v = Place::parse(f, target)?;
        let p = v.prime().ok_or_else(|| Error::Input(format!("{target} is not a prime")))?;
        let l = rc.label(p)?;
        let class = rc.class_of_prime(p)?;
        out.emit(
            Record::new("label", format!("{} label {l} class {class}", p.token()))
                .with("prime", p.token())
                .with("label", l.to_string())
                .with("class", class),
        );
        return Ok(());
    }
    let x = NfElem::parse(f, target)?;
    if x.is_zero() {
        return Err(Error::Input("0 has no label".into()));
    }
    if rc.coprime_to_modulus(&x)? {
        let l = rc.label_elem(&x)?;
        out.emit(Record::new("label", format!("({x}) label {l}")).with("elem", x.to_string()).with("label", l.to_string()));
    }
    let part = prime_partition(&rc, &x)?;
    for l in Label::ALL {
        let cell: Vec<String> = part.cell(l).iter().map(|p| p.token()).collect();
        out.emit(
            Record::new("cell", format!("{l}: {}", cell.join(" ")))
                .with("label", l.to_string())
                .with("primes", strings(&cell)),
        );
    }
    let on: Vec<String> = part.on_modulus.iter().map(|p| p.token()).collect();
    out.emit(Record::new("cell", format!("modulus: {}", on.join(" "))).with("label", "modulus").with("primes", strings(&on)));
    Ok(())
}

fn prescribe(out: &mut Out, cfg: &RunConfig, ctxfile: &Path, file: &Path) -> Result<()> {
    let rc = load_ctx(ctxfile)?;
    let ctx = rc.field_ctx();
    let p = Prescription::parse(ctx, &read(file)?)?;
    let report = check_conditions(ctx, &p)?;
    for v in &report.violations {
        out.emit(Record::new("violation", format!("violation: {v}")).with("reason", v.to_string()));
    }
    if !report.is_ok() {
        return Err(Error::Input(format!("{} admissibility conditions fail", report.violations.len())));
    }
    let sol = solve(ctx, &p, SolveConfig { attempts: cfg.retries, seed: cfg.seed })?;
    verify_solution(ctx, &p, &sol.x)?;
    out.emit(
        Record::new("solution", format!("x = {}  after {} attempts", sol.x, sol.attempts))
            .with("x", sol.x.to_string())
            .with("attempts", sol.attempts),
    );
    for (row, v, s) in &sol.table {
        out.emit(
            Record::new("symbol", format!("row {} {} {s}", row + 1, v.token()))
                .with("row", row + 1)
                .with("place", v.token())
                .with("symbol", s.value()),
        );
    }
    Ok(())
}

fn verdict_record(rc: &RayContext, t: &NfElem, v: &Verdict) -> Record {
    let rec = Record::new("verdict", format!("{t}  {v}")).with("t", t.to_string());
    match v {
        Verdict::Integral => rec.with("verdict", "integral"),
        Verdict::NotIntegral(w) => rec
            .with("verdict", "not-integral")
            .with("ring", w.ring.kind.name())
            .with("bad-prime", w.bad_prime.token())
            .with("ring-primes", strings(w.ring.delta.iter().map(|p| p.token()))),
        Verdict::Unseparated(g) => rec
            .with("verdict", "unseparated")
            .with("blocking", strings(g.blocking(rc.field_ctx()).iter().map(|p| p.token()))),
    }
}

fn witness(out: &mut Out, cfg: &RunConfig, ctxfile: &Path, t: &str, path: Option<&Path>) -> Result<()> {
    let rc = load_ctx(ctxfile)?;
    let t = rc.field_ctx().elem(t)?;
    let decider = Decider::new(&rc, SolveConfig { attempts: cfg.retries, seed: cfg.seed });
    let v = decider.decide(&t)?;
    out.emit(verdict_record(&rc, &t, &v));
    match v {
        Verdict::Integral => Ok(()),
        Verdict::NotIntegral(w) => {
            let text = w.to_text(&rc);
            match path {
                Some(p) => write(p, &text),
                None => {
                    out.emit(Record::new("witness", text.trim_end()).with("text", text.clone()));
                    Ok(())
                }
            }
        }
        Verdict::Unseparated(_) => Err(Error::Undecided(format!("no ring separates {t}"))),
    }
}

fn check_witness(out: &mut Out, ctxfile: &Path, file: &Path) -> Result<()> {
    let rc = load_ctx(ctxfile)?;
    let w = Witness::from_text(&rc, &read(file)?)?;
    verify_witness(&rc, &w)?;
    out.emit(Record::new("verified", format!("ok {} is not integral", w.t)).with("t", w.t.to_string()));
    Ok(())
}

fn sweep(out: &mut Out, cfg: &RunConfig, ctxfile: &Path, height: u64, dir: Option<&Path>) -> Result<()> {
    if height == 0 {
        return Err(Error::Input("height must be positive".into()));
    }
    let rc = load_ctx(ctxfile)?;
    if let Some(d) = dir {
        fs::create_dir_all(d).map_err(|e| Error::Input(format!("cannot create {}: {e}", d.display())))?;
    }
    let decider = Decider::new(&rc, SolveConfig { attempts: cfg.retries, seed: cfg.seed });
    let (mut integral, mut witnessed, mut gaps, mut undecided) = (0usize, 0usize, 0usize, 0usize);
    for (k, t) in enumerate_by_height(rc.field_ctx().field(), height).into_iter().enumerate() {
        if t.is_zero() {
            out.emit(Record::new("verdict", "0  integral").with("t", "0").with("verdict", "integral"));
            integral += 1;
            continue;
        }
        match decider.decide(&t) {
            Ok(v) => {
                match &v {
                    Verdict::Integral => integral += 1,
                    Verdict::NotIntegral(w) => {
                        witnessed += 1;
                        if let Some(d) = dir {
                            write(&d.join(format!("witness-{k:05}.txt")), &w.to_text(&rc))?;
                        }
                    }
                    Verdict::Unseparated(_) => gaps += 1,
                }
                out.emit(verdict_record(&rc, &t, &v));
            }
            Err(Error::Undecided(m)) => {
                undecided += 1;
                out.emit(
                    Record::new("verdict", format!("{t}  undecided: {m}"))
                        .with("t", t.to_string())
                        .with("verdict", "undecided")
                        .with("reason", m),
                );
            }
            Err(e) => return Err(e),
        }
    }
    out.emit(
        Record::new(
            "summary",
            format!("integral {integral}  witnessed {witnessed}  unseparated {gaps}  undecided {undecided}"),
        )
        .with("integral", integral)
        .with("witnessed", witnessed)
        .with("unseparated", gaps)
        .with("undecided", undecided),
    );
    Ok(())
}

/// A pair `(a, g)` with `g` generating a prime of label `(-1,-1)`, which
/// ramifies at that prime and at the prime of `a`.
fn audit_pair(rc: &RayContext) -> Result<QuaternionPair> {
    let ctx = rc.field_ctx();
    let minus = Label(Sign::Minus, Sign::Minus);
    for (p, l) in rc.prime_table() {
        if *l != minus {
            continue;
        }
        if let Some(g) = is_principal(ctx, &Ideal::from_prime(p))? {
            return QuaternionPair::new(ctx, rc.a.clone(), g);
        }
    }
    Err(Error::SearchExhausted("no principal prime of label (-1,-1) in the table".into()))
}

fn audit_all(out: &mut Out, cfg: &RunConfig, ctxfile: &Path) -> Result<()> {
    let rc = load_ctx(ctxfile)?;
    let ctx = rc.field_ctx();
    let mut failed = Vec::new();
    let mut line = |out: &mut Out, name: &'static str, ok: bool, detail: String| {
        out.emit(
            Record::new("audit", format!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" }))
                .with("check", name)
                .with("ok", ok)
                .with("detail", detail),
        );
        if !ok {
            failed.push(name);
        }
    };

    let samples = reciprocity_samples(&rc, cfg.samples, cfg.seed)?;
    let bad = samples.iter().filter(|(_, l)| *l != Label::TRIVIAL).count();
    let mut product_bad = 0;
    for (x, _) in &samples {
        for c in [&rc.a, &rc.b] {
            if matches!(reciprocity_audit(ctx, c, x), Err(Error::Invariant(_))) {
                product_bad += 1;
            }
        }
    }
    line(
        out,
        "reciprocity",
        bad == 0 && product_bad == 0,
        format!("{} ray elements, {bad} nontrivial labels, {product_bad} symbol products of -1", samples.len()),
    );

    let bound = if ctx.field().degree() == 1 { 1000 } else { 30 };
    let mut checked = 0;
    let mut mismatches = Vec::new();
    let mut off_modulus = 0;
    for x in small_integral(ctx.field(), bound) {
        if checked == cfg.samples {
            break;
        }
        if x.is_zero() || place::factor_elem(ctx, &x)?.is_empty() || !rc.coprime_to_modulus(&x)? {
            continue;
        }
        checked += 1;
        let diffs = identification_rows(&rc, &x)?.mismatches();
        if diffs.is_empty() {
            continue;
        }
        let on_modulus = |v: &Place| v.prime().is_some_and(|p| rc.modulus().divides(p));
        if diffs.iter().any(|(_, d)| !d.iter().all(on_modulus)) {
            off_modulus += 1;
        }
        mismatches.push(x.to_string());
    }
    let first: Vec<&str> = mismatches.iter().take(5).map(String::as_str).collect();
    line(
        out,
        "identification",
        mismatches.is_empty(),
        format!(
            "{checked} elements, {} mismatches ({off_modulus} away from the modulus) {}",
            mismatches.len(),
            first.join(" ")
        ),
    );

    let pair = audit_pair(&rc)?;
    let report = dual_route_audit(ctx, &pair, cfg.audit_height)?;
    let first: Vec<String> = report.disagreements.iter().take(3).map(|(x, w)| format!("{x} ({w})")).collect();
    line(
        out,
        "dual-route",
        report.disagreements.is_empty(),
        format!(
            "pair ({}, {}), {} elements, {} disagreements {}",
            pair.a,
            pair.b,
            report.checked,
            report.disagreements.len(),
            first.join(" ")
        ),
    );

    let rows = sumset_audit(200)?;
    let bad: Vec<u64> = rows
        .iter()
        .filter(|r| if r.q <= 11 { r.with_two != Some(true) } else { !r.plain })
        .map(|r| r.q)
        .collect();
    line(out, "sumset", bad.is_empty(), format!("{} fields up to 200, failing q: {bad:?}", rows.len()));

    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Invariant(format!("audit failed: {}", failed.join(", "))))
    }
}

fn dispatch(cli: &Cli, cfg: &RunConfig, out: &mut Out) -> Result<()> {
    match &cli.command {
        Command::Field { command: FieldCommand::Info { field } } => field_info(out, field),
        Command::Factor { field, elem } => factor(out, field, elem),
        Command::Hilbert { field, a, b, place, all } => hilbert(out, field, a, b, place.as_deref(), *all),
        Command::Delta { field, a, b } => delta(out, field, a, b),
        Command::Useq { q, audit } => useq(out, *q, *audit),
        Command::Trace { command: TraceCommand::Check(args) } => trace(out, cfg, args, false),
        Command::Trace { command: TraceCommand::Decompose(args) } => trace(out, cfg, args, true),
        Command::Ctx { command: CtxCommand::Select { field, out: path } } => ctx_select(out, cfg, field, path.as_deref()),
        Command::Ctx { command: CtxCommand::Verify { file } } => ctx_verify(out, file),
        Command::Artin { ctxfile, target } => artin(out, ctxfile, target),
        Command::Prescribe { ctxfile, file } => prescribe(out, cfg, ctxfile, file),
        Command::Witness { ctxfile, t, out: path } => witness(out, cfg, ctxfile, t, path.as_deref()),
        Command::CheckWitness { ctxfile, file } => check_witness(out, ctxfile, file),
        Command::Integrality { command: IntegrityCommand::Sweep { ctxfile, height, witness_dir } } => {
            sweep(out, cfg, ctxfile, *height, witness_dir.as_deref())
        }
        Command::Audit { command: AuditCommand::All { ctxfile } } => audit_all(out, cfg, ctxfile),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run_config(&cli).and_then(|cfg| {
        let mut out = Out::new(cfg.format);
        dispatch(&cli, &cfg, &mut out)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
