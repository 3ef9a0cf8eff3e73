//! One function per subcommand: load inputs, call the library, re-check
//! what can be re-checked, and assemble the report.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};
use zariski_core::arith::format_rational;
use zariski_core::equidist::{
    discrepancy_report, kronecker_independence, reorder_uniform, ud_test, ud_test_numeric, FormalReal, TorusPoint,
    UdRow,
};
use zariski_core::orbit::{
    construct_dense_homomorphism, ensure_injective_window, find_orbit_point, find_orbit_point_in, flow_simulate,
    integer_stream, requirement_net, verify_hom_witness, verify_witness, ArcBox, FamilyMember, FlowAlpha, HomConfig,
    Requirement, Witness,
};
use zariski_core::setexpr::{classify_prefix_set, extract_almost_torsion};
use zariski_core::zariski::{closure_oracle_prefix, is_zariski_dense, zariski_closure, OracleConfig};
use zariski_core::{setexpr, ClosedSet, Error, GroupDescriptor, SetExpr, TorsionClass};

use crate::config::{required, JobConfig};
use crate::error::{CliError, Result};
use crate::io::{single_point, Integers, Loader, Points, Reals};
use crate::report::{Report, FINITE_SCOPE};

const DEFAULT_DIVISOR_BOUND: u64 = 64;
const DEFAULT_ORACLE_PREFIX: usize = 64;
const DEFAULT_COSET_BOUND: usize = 3;
const DEFAULT_K_MAX: i64 = 3;
const DEFAULT_M: u64 = 10;
const DEFAULT_FLOW_PREFIX: usize = 1000;
/// Elements of the set re-checked against a computed closure.
const MEMBERSHIP_CHECKS: usize = 64;

pub fn dispatch(job: &JobConfig) -> Result<Report> {
    match job.command.as_deref() {
        Some("classify") => classify(job),
        Some("closure") => closure(job),
        Some("dense") => dense(job),
        Some("oracle") => oracle(job),
        Some("kronecker") => kronecker(job),
        Some("weyl") => weyl(job),
        Some("orbit") => orbit(job),
        Some("hom") => hom(job),
        Some("flow") => flow(job),
        Some(other) => Err(CliError::Usage(format!("unknown command `{other}`"))),
        None => Err(CliError::Usage("no command given".into())),
    }
}

fn value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("library types serialize")
}

struct Draft {
    command: &'static str,
    computation: &'static str,
    scope: Option<&'static str>,
    parameters: Value,
    result: Value,
    floating_point_fields: Vec<&'static str>,
    verification: Vec<String>,
    summary: Vec<String>,
}

impl Draft {
    fn new(command: &'static str, computation: &'static str, parameters: Value, result: Value) -> Self {
        Draft {
            command,
            computation,
            scope: None,
            parameters,
            result,
            floating_point_fields: Vec::new(),
            verification: Vec::new(),
            summary: Vec::new(),
        }
    }

    fn finish(self, loader: Loader) -> Report {
        let (input_sha256, inputs) = loader.finish();
        Report {
            tool: "zariski",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command.into(),
            computation: self.computation.into(),
            scope: self.scope,
            input_sha256,
            inputs,
            parameters: self.parameters,
            result: self.result,
            floating_point_fields: self.floating_point_fields,
            verification: self.verification,
            summary: self.summary,
        }
    }
}

fn group_and_set(l: &mut Loader, job: &JobConfig) -> Result<(GroupDescriptor, SetExpr)> {
    let g: GroupDescriptor = l.read("group", required(&job.inputs.group, "group")?)?;
    let x: SetExpr = l.read("set", required(&job.inputs.set, "set")?)?;
    Ok((g, x))
}

/// Re-checks that the first elements of `x` lie in `closed`.
fn membership_check(g: &GroupDescriptor, x: &SetExpr, closed: &ClosedSet) -> Result<String> {
    let prefix = x.normalize(g)?.enumerate_prefix(g, MEMBERSHIP_CHECKS);
    let missing = prefix.iter().filter(|e| !closed.contains(g, e)).count();
    Ok(format!(
        "first {} elements of the set lie in the closure: {}",
        prefix.len(),
        if missing == 0 { "ok".to_string() } else { format!("FAILED ({missing} outside)") }
    ))
}

fn classify(job: &JobConfig) -> Result<Report> {
    let mut l = Loader::default();
    let (g, x) = group_and_set(&mut l, job)?;
    let class = setexpr::classify(&x, &g)?;
    let mut result = match value(&class) {
        Value::Object(m) => m,
        _ => unreachable!("tagged enum"),
    };
    let mut summary = vec![match &class {
        TorsionClass::AlmostTorsion { n } => format!("almost {n}-torsion"),
        TorsionClass::NotAlmostTorsion { d, g } => format!("not almost torsion: infinite fiber {{x : {d}·x = {g}}}"),
        TorsionClass::FiniteSet => "finite set".into(),
    }];
    if let (TorsionClass::NotAlmostTorsion { .. }, Some(e)) = (&class, extract_almost_torsion(&x, &g)?) {
        summary.push(format!("contains {} + (an almost {}-torsion set)", e.shift, e.level));
        result.insert("extraction".into(), value(&e));
    }
    let divisor_bound = job.divisor_bound.unwrap_or(DEFAULT_DIVISOR_BOUND);
    if let Some(n) = job.prefix {
        let p = classify_prefix_set(&x, &g, n, divisor_bound, job.threshold)?;
        summary.push(format!(
            "prefix of {}: candidate level {}, largest fiber {} (threshold {}), {}",
            p.prefix_len,
            p.candidate,
            p.max_fiber,
            p.threshold,
            if p.consistent { "consistent" } else { "flagged" }
        ));
        result.insert("prefix".into(), value(&p));
    }
    let params = json!({ "prefix": job.prefix, "divisor_bound": divisor_bound, "threshold": job.threshold });
    let mut d = Draft::new(
        "classify",
        "almost n-torsion classification of a normalized set expression",
        params,
        Value::Object(result),
    );
    d.summary = summary;
    Ok(d.finish(l))
}

fn closure(job: &JobConfig) -> Result<Report> {
    let mut l = Loader::default();
    let (g, x) = group_and_set(&mut l, job)?;
    let c = zariski_closure(&x, &g)?;
    let mut d = Draft::new("closure", "Zariski closure in normal form F ∪ ⋃ (h + G[n])", json!({}), value(&c));
    d.summary.push(c.to_string());
    d.verification.push(membership_check(&g, &x, &c)?);
    Ok(d.finish(l))
}

fn dense(job: &JobConfig) -> Result<Report> {
    let mut l = Loader::default();
    let (g, x) = group_and_set(&mut l, job)?;
    let r = is_zariski_dense(&x, &g)?;
    let mut d = Draft::new("dense", "Zariski density decision with certificate", json!({}), value(&r));
    d.summary.push(format!("{} (closure {})", if r.dense { "dense" } else { "not dense" }, r.closure));
    d.verification.push(membership_check(&g, &x, &r.closure)?);
    d.verification.push(format!(
        "closure is the whole group: {}",
        if r.closure.is_whole(&g) == r.dense { "agrees with verdict" } else { "DISAGREES with verdict" }
    ));
    Ok(d.finish(l))
}

fn oracle(job: &JobConfig) -> Result<Report> {
    let mut l = Loader::default();
    let (g, x) = group_and_set(&mut l, job)?;
    let cfg = OracleConfig::new(
        job.prefix.unwrap_or(DEFAULT_ORACLE_PREFIX),
        job.modulus_bound.unwrap_or_else(|| g.exponent()),
        job.coset_bound.unwrap_or(DEFAULT_COSET_BOUND),
    );
    let guess = closure_oracle_prefix(&x, &g, &cfg)?;
    let exact = zariski_closure(&x, &g)?;
    let agrees = guess.set_eq(&g, &exact);
    let params = json!({ "prefix": cfg.prefix, "modulus_bound": cfg.modulus_bound, "coset_bound": cfg.coset_bound });
    let result = json!({ "oracle": value(&guess), "exact": value(&exact), "agrees": agrees });
    let mut d = Draft::new("oracle", "prefix-based closure guess compared with the exact closure", params, result);
    d.summary.push(format!("oracle: {guess}"));
    d.summary.push(format!("exact:  {exact}"));
    d.verification.push(format!("oracle and exact closure {}", if agrees { "agree" } else { "differ" }));
    Ok(d.finish(l))
}

fn kronecker(job: &JobConfig) -> Result<Report> {
    let mut l = Loader::default();
    let Reals(xs) = l.read("reals", required(&job.inputs.reals, "reals")?)?;
    let r = kronecker_independence(&xs);
    let mut d = Draft::new(
        "kronecker",
        "rational independence of 1, x_1, ..., x_d (Kronecker density criterion)",
        json!({}),
        value(&r),
    );
    d.summary.push(format!("rank of {{1, x_1, ..., x_{}}} over Q: {}", xs.len(), r.rank));
    match &r.relation {
        None => d.summary.push("independent: the multiples of x are dense in the torus".into()),
        Some(m) => {
            let terms: Vec<String> = std::iter::once((!m[0].is_zero()).then(|| m[0].to_string()))
                .chain(m[1..].iter().enumerate().map(|(i, c)| (!c.is_zero()).then(|| format!("{c}·x_{}", i + 1))))
                .flatten()
                .collect();
            d.summary.push(format!("relation: {} = 0", terms.join(" + ").replace("+ -", "- ")));
            let sum = m[1..].iter().zip(&xs).fold(
                FormalReal::rational(BigRational::from_integer(m[0].clone())),
                |acc, (c, x)| acc.add(&x.scale(&BigRational::from_integer(c.clone()))),
            );
            let ok = sum.c0.is_zero() && sum.beta.is_empty();
            d.verification.push(format!("relation evaluates to 0: {}", if ok { "ok" } else { "FAILED" }));
        }
    }
    Ok(d.finish(l))
}

fn ud_summary(rows: &[UdRow], m: u64) -> String {
    let failed = rows.iter().filter(|r| !r.pass).count();
    let worst = rows.iter().map(|r| r.magnitude).fold(0.0, f64::max);
    format!("{} characters, {} above 1/{m}, largest |Weyl sum| {worst:.6}", rows.len(), failed)
}

fn weyl(job: &JobConfig) -> Result<Report> {
    let mut l = Loader::default();
    let points: Points = l.read("points", required(&job.inputs.points, "points")?)?;
    let k_max = job.k_max.unwrap_or(DEFAULT_K_MAX);
    let m = job.m.unwrap_or(DEFAULT_M);
    let reorder = job.reorder.unwrap_or(false);
    let mut result = Map::new();
    let mut summary = Vec::new();
    let (rows, floats) = match &points {
        Points::Exact(ps) => {
            result.insert("exact".into(), Value::Bool(true));
            let floats: Vec<Vec<f64>> = ps.iter().map(TorusPoint::to_f64).collect();
            (ud_test(ps, k_max, m)?, floats)
        }
        Points::Numeric(ps) => {
            result.insert("exact".into(), Value::Bool(false));
            (ud_test_numeric(ps, k_max, m)?, ps.clone())
        }
    };
    summary.push(ud_summary(&rows, m));
    let disc = discrepancy_report(&floats)?;
    summary.push(format!(
        "star discrepancy: mean over coordinates {:.6}, box probe {:.6}",
        disc.coordinate_mean, disc.box_probe
    ));
    result.insert("ud_table".into(), value(&rows));
    result.insert("discrepancy".into(), value(&disc));
    if reorder {
        let Points::Exact(ps) = &points else {
            return Err(CliError::Usage("--reorder needs exact (string) coordinates".into()));
        };
        let r = reorder_uniform(ps)?;
        if let Some(last) = r.prefix_discrepancy.last() {
            summary.push(format!("reordered: final mean discrepancy {}", format_rational(last)));
        }
        result.insert("reordering".into(), value(&r));
    }
    let params = json!({ "k_max": k_max, "m": m, "reorder": reorder });
    let mut d = Draft::new("weyl", "Weyl criterion table and star discrepancy of a finite point set", params, Value::Object(result));
    d.floating_point_fields = vec!["ud_table[].magnitude", "ud_table[].bound", "discrepancy"];
    d.summary = summary;
    Ok(d.finish(l))
}

/// Requirements from `--reqs`, or a generated net with one block per level
/// (`levels[j]` for set `j`), ids renumbered consecutively. Only generated
/// nets are shuffled by the seed.
fn requirements(l: &mut Loader, job: &JobConfig, levels: &[u64]) -> Result<(Vec<Requirement>, Value)> {
    if let Some(path) = &job.inputs.reqs {
        let reqs: Vec<Requirement> = l.read("reqs", path)?;
        return Ok((reqs, json!({ "source": "file" })));
    }
    let (Some(dim), eps) = (job.dim, job.epsilon()?) else {
        return Err(CliError::Usage("give --reqs, or --dim (with --epsilon) to generate a net".into()));
    };
    let mut reqs = Vec::new();
    for (j, &n) in levels.iter().enumerate() {
        for mut r in requirement_net(n, dim, eps.as_ref())? {
            r.id = reqs.len();
            r.set = j;
            reqs.push(r);
        }
    }
    if let Some(seed) = job.seed {
        reqs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let info = json!({
        "source": "net",
        "levels": levels,
        "dim": dim,
        "epsilon": eps.as_ref().map(format_rational),
        "seed": job.seed,
    });
    Ok((reqs, info))
}

fn margin_summary(w: &Witness) -> String {
    match w.margins.iter().min() {
        Some(m) => format_rational(m),
        None => "-".into(),
    }
}

fn check_line(w: &Witness, ok: bool) -> String {
    format!(
        "requirement {}: s = {}, image {}, least margin {}: {}",
        w.requirement,
        w.s,
        w.point,
        margin_summary(w),
        if ok { "ok" } else { "FAILED" }
    )
}

fn find_req(reqs: &[Requirement], id: usize) -> Result<&Requirement> {
    reqs.iter()
        .find(|r| r.id == id)
        .ok_or_else(|| CliError::Usage(format!("witness names unknown requirement {id}")))
}

fn orbit(job: &JobConfig) -> Result<Report> {
    let mut l = Loader::default();
    enum Source {
        Set(SetExpr),
        Stream(Vec<BigInt>),
    }
    let source = match (&job.inputs.set, &job.inputs.stream) {
        (Some(p), None) => Source::Set(l.read("set", p)?),
        (None, Some(p)) => Source::Stream(l.read::<Integers>("stream", p)?.0),
        _ => return Err(CliError::Usage("give exactly one of --set and --stream".into())),
    };
    let (reqs, net) = requirements(&mut l, job, &[job.level.unwrap_or(0)])?;
    let dim = job.dim.or_else(|| reqs.first().map(|r| r.arc.dim())).unwrap_or(1);
    let res = match source {
        Source::Set(s) => find_orbit_point(&s, &reqs, dim)?,
        Source::Stream(v) => find_orbit_point_in(&mut integer_stream(v), &reqs, dim)?,
    };
    let mut verification = Vec::new();
    let mut all_ok = res.witnesses.len() == reqs.len();
    for w in &res.witnesses {
        let ok = verify_witness(w, &find_req(&reqs, w.requirement)?.arc, &res.x);
        all_ok &= ok;
        verification.push(check_line(w, ok));
    }
    let mut result = match value(&res) {
        Value::Object(m) => m,
        _ => unreachable!("struct"),
    };
    result.insert("verified".into(), Value::Bool(all_ok));
    let params = json!({ "dim": dim, "requirements": net, "count": reqs.len() });
    let mut d = Draft::new(
        "orbit",
        "nested dyadic refinement: a point x with s·x in every requirement box for some s in S",
        params,
        Value::Object(result),
    );
    d.scope = Some(FINITE_SCOPE);
    d.summary.push(format!("x = {}", res.x));
    d.summary.push(format!("{} requirements met, all witnesses re-verified: {all_ok}", res.witnesses.len()));
    d.verification = verification;
    Ok(d.finish(l))
}

fn hom(job: &JobConfig) -> Result<Report> {
    let mut l = Loader::default();
    let g: GroupDescriptor = l.read("group", required(&job.inputs.group, "group")?)?;
    let sets: Vec<SetExpr> = l.read("family", required(&job.inputs.family, "family")?)?;
    let levels = sets
        .iter()
        .enumerate()
        .map(|(j, s)| match setexpr::classify(s, &g)? {
            TorsionClass::AlmostTorsion { n } => Ok(n),
            other => Err(Error::InvalidSet(format!("family member {j} is not almost torsion: {other:?}")).into()),
        })
        .collect::<Result<Vec<u64>>>()?;
    let (reqs, net) = requirements(&mut l, job, &levels)?;
    let dim = job.dim.or_else(|| reqs.first().map(|r| r.arc.dim())).unwrap_or(1);
    let defaults = HomConfig::default();
    let cfg = HomConfig {
        backtrack_budget: job.backtrack_budget.unwrap_or(defaults.backtrack_budget),
        max_walk: job.max_walk.unwrap_or(defaults.max_walk),
    };
    let family: Vec<FamilyMember> = sets.into_iter().map(|set| FamilyMember { set }).collect();
    let res = construct_dense_homomorphism(&g, &family, dim, &reqs, &cfg)?;

    let mut verification = Vec::new();
    let mut all_ok = res.witnesses.len() == reqs.len();
    for w in &res.witnesses {
        let ok = verify_hom_witness(w, &find_req(&reqs, w.requirement)?.arc, &res.assignment);
        all_ok &= ok;
        verification.push(check_line(w, ok));
    }
    let mut result = match value(&res) {
        Value::Object(m) => m,
        _ => unreachable!("struct"),
    };
    let mut summary = vec![
        format!("levels: {:?}", res.levels),
        format!("assignment: {}", res.assignment),
        format!("{} requirements met, all witnesses re-verified: {all_ok}", res.witnesses.len()),
    ];
    if let Some(window) = job.window {
        let inj = ensure_injective_window(&g, &res.assignment, window)?;
        let line = format!(
            "images of the first {} group elements pairwise distinct ({} extra coordinates)",
            inj.window,
            inj.extra.len()
        );
        summary.push(line.clone());
        verification.push(line);
        result.insert("injective_window".into(), value(&inj));
    }
    result.insert("verified".into(), Value::Bool(all_ok));
    let params = json!({
        "dim": dim,
        "requirements": net,
        "count": reqs.len(),
        "backtrack_budget": cfg.backtrack_budget,
        "max_walk": cfg.max_walk,
        "window": job.window,
    });
    let mut d = Draft::new(
        "hom",
        "homomorphism on finitely many generators meeting every requirement box from its family member",
        params,
        Value::Object(result),
    );
    d.scope = Some(FINITE_SCOPE);
    d.summary = summary;
    d.verification = verification;
    Ok(d.finish(l))
}

fn flow(job: &JobConfig) -> Result<Report> {
    let mut l = Loader::default();
    let s: SetExpr = l.read("set", required(&job.inputs.set, "set")?)?;
    let alpha = match single_point(l.read("alpha", required(&job.inputs.alpha, "alpha")?)?, "alpha")? {
        Points::Exact(mut v) => FlowAlpha::Exact(v.remove(0)),
        Points::Numeric(mut v) => FlowAlpha::Numeric(v.remove(0)),
    };
    let dim = match &alpha {
        FlowAlpha::Exact(a) => a.dim(),
        FlowAlpha::Numeric(a) => a.len(),
    };
    let x0 = match &job.inputs.x0 {
        Some(p) => match single_point(l.read("x0", p)?, "x0")? {
            Points::Exact(mut v) => v.remove(0),
            Points::Numeric(_) => return Err(CliError::Usage("x0 needs exact (string) coordinates".into())),
        },
        None => TorusPoint::zero(dim),
    };
    let boxes: Vec<ArcBox> = match &job.inputs.boxes {
        Some(p) => l.read("boxes", p)?,
        None => Vec::new(),
    };
    let n = job.prefix.unwrap_or(DEFAULT_FLOW_PREFIX);
    let r = flow_simulate(&s, &alpha, &x0, &boxes, n)?;
    let mut d = Draft::new(
        "flow",
        "orbit visits x0 + s·alpha for s over a prefix of S",
        json!({ "prefix": n, "exact_alpha": matches!(alpha, FlowAlpha::Exact(_)) }),
        value(&r),
    );
    d.scope = Some(FINITE_SCOPE);
    d.floating_point_fields = vec!["points", "discrepancy"];
    d.summary.push(format!(
        "{} points visited{}",
        r.visited,
        r.distinct.map(|k| format!(", {k} distinct")).unwrap_or_default()
    ));
    for (i, b) in r.boxes.iter().enumerate() {
        d.summary.push(match b.first_hit {
            Some(f) => format!("box {i}: {} hits, first at position {f}", b.hits),
            None => format!("box {i}: never visited"),
        });
    }
    d.summary.push(format!("mean star discrepancy {:.6}", r.discrepancy.coordinate_mean));
    Ok(d.finish(l))
}
