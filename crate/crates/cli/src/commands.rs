use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _, Result};
use serde_json::{json, Value};
use typical_core::arithmetic::{
    covering_bound, dim_evidence, exp_partial_sum, polynomial_image, product_set, projection_identity_check,
    sum_set, Polynomial, DEFAULT_EXPANSION_CAP,
};
use typical_core::avoidance::{
    generate, perturbation_trials, sample_typical, scan, verify_certificate, AngleSpec, AvoidanceCertificate,
    Constraint, GenerateConfig, ScanOptions, Violation,
};
use typical_core::category::{avoid_construct, hits, NowhereDenseScheme};
use typical_core::dyadic::{box_count_profile, DEFAULT_ENUMERATION_CAP};
use typical_core::funcspace::{avoid_many, avoid_shift, graph_hits_fiber, FiberSet, PLFunction};
use typical_core::geom::{hausdorff_distance, Pattern};
use typical_core::scalar::{exact_sqrt, parse_rational};
use typical_core::{BigRational, FinitePointSet, PointSetDoc, Scalar};

use crate::args::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A constraint violation or a failed identity; exit code 2.
    Violation,
}

/// Per-run bookkeeping for the manifest.
#[derive(Debug, Default)]
pub struct Ctx {
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub backend: Option<String>,
}

impl Ctx {
    /// Writes `text` to `out`, or to stdout without one.
    fn emit(&mut self, out: &Option<PathBuf>, text: &str) -> Result<()> {
        let mut text = text.to_string();
        if !text.ends_with('\n') {
            text.push('\n');
        }
        match out {
            Some(path) => {
                fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
                self.outputs.push(path.clone());
            }
            None => print!("{text}"),
        }
        Ok(())
    }

    fn backend(&mut self, set: &FinitePointSet) {
        self.backend.get_or_insert_with(|| set.backend().to_string());
    }
}

/// Summary lines go to stdout when the result went to a file.
fn note(out: &Option<PathBuf>, line: &str) {
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_set(path: &Path) -> Result<FinitePointSet> {
    FinitePointSet::from_json(&read(path)?).with_context(|| format!("parsing point set {}", path.display()))
}

fn format_point(set: &FinitePointSet, i: usize) -> String {
    let coords: Vec<String> = set.points()[i]
        .coords()
        .iter()
        .map(|c| match c {
            Scalar::Exact(r) => r.to_string(),
            Scalar::Float(x) => format!("{x:?}"),
        })
        .collect();
    format!("({})", coords.join(", "))
}

fn parse_pattern(desc: &str) -> Result<Pattern> {
    if desc == "equilateral" {
        return Ok(Pattern::equilateral());
    }
    if let Some(list) = desc.strip_prefix("line:") {
        let v = list.split(',').map(|t| parse_rational(t.trim())).collect::<typical_core::Result<Vec<_>>>()?;
        let [a, b, c]: [BigRational; 3] = v.try_into().map_err(|_| anyhow!("line pattern needs three values"))?;
        let sq = |x: &BigRational, y: &BigRational| (x - y) * (x - y);
        return Ok(Pattern::from_squared_sides([sq(&a, &b), sq(&b, &c), sq(&a, &c)])?);
    }
    let text = read(Path::new(desc))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing pattern {desc}"))?;
    if v.get("squared_sides").is_some() {
        let mut v = v;
        v["kind"] = json!("pattern");
        return match Constraint::from_json(&v)? {
            Constraint::Pattern(p) => Ok(p),
            _ => unreachable!(),
        };
    }
    let doc: PointSetDoc = serde_json::from_value(v).with_context(|| format!("parsing pattern {desc}"))?;
    let set = doc.into_set()?;
    let [a, b, c] = set.points() else { bail!("pattern needs exactly three distinct points") };
    Ok(Pattern::from_points(a, b, c)?)
}

fn build_constraint(c: &ConstraintArgs) -> Result<Constraint> {
    match c.constraint {
        None => bail!("--constraint is required"),
        Some(ConstraintKind::GeneralPosition) => Ok(Constraint::GeneralPosition),
        Some(ConstraintKind::Pattern) => Ok(Constraint::Pattern(parse_pattern(&c.pattern)?)),
        Some(ConstraintKind::Angle) => {
            let theta = c.theta.ok_or_else(|| anyhow!("--theta is required for the angle constraint"))?;
            Ok(Constraint::Angle(AngleSpec::new(theta)?))
        }
    }
}

fn report_violation(set: &FinitePointSet, constraint: &Constraint, v: &Violation) {
    let pts: Vec<String> = v.tuple.iter().map(|&i| format_point(set, i)).collect();
    println!("violation: {} tuple {:?} gap {}", constraint.name(), v.tuple, v.gap);
    println!("points: {}", pts.join(" "));
}

pub fn run(cli: Cli, ctx: &mut Ctx) -> Result<Status> {
    match cli.command {
        Command::Generate(a) => cmd_generate(a, ctx),
        Command::Verify(a) => cmd_verify(a),
        Command::Hausdorff(a) => cmd_hausdorff(a),
        Command::HitTest(a) => cmd_hit_test(a, ctx),
        Command::Dimension(a) => cmd_dimension(a, ctx),
        Command::Arith(a) => cmd_arith(a, ctx),
        Command::Func(a) => cmd_func(a, ctx),
        Command::SampleTypical(a) => cmd_sample_typical(a, ctx),
        Command::Replay(_) => unreachable!("handled by main"),
    }
}

fn cmd_generate(a: GenerateArgs, ctx: &mut Ctx) -> Result<Status> {
    let constraint = build_constraint(&a.constraint)?;
    let mut cfg = GenerateConfig::new(a.level, a.dim, constraint, a.seed);
    cfg.max_retries = a.max_retries;
    cfg.tau = a.tau;
    cfg.jobs = a.jobs.max(1);
    let cert = generate(&cfg)?;
    ctx.seed = Some(a.seed);
    ctx.backend = Some("exact".into());
    if a.trials > 0 {
        let r = perturbation_trials(&cert.gamma, &cert.constraint, cert.epsilon(), a.trials, a.seed)?;
        if let Some(f) = r.failures.first() {
            bail!("perturbation trial failed: {f}");
        }
        note(&a.out, &format!("perturbation trials: {} clean", r.trials));
    }
    ctx.emit(&a.out, &cert.to_json())?;
    note(
        &a.out,
        &format!(
            "points {} tuples {} margin {} (~{:e}){}",
            cert.gamma.len(),
            cert.tuples_checked,
            cert.epsilon(),
            cert.margin.epsilon_f64(),
            if cert.margin.tiny { " tiny" } else { "" }
        ),
    );
    Ok(Status::Ok)
}

fn cmd_verify(a: VerifyArgs) -> Result<Status> {
    let input = a.input.as_ref().or(a.in_file.as_ref()).unwrap();
    let text = read(input)?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", input.display()))?;
    let jobs = a.jobs.max(1);
    if v.get("gamma").is_some() {
        let cert = AvoidanceCertificate::from_json(&text)?;
        let report = verify_certificate(&cert, a.tol, jobs)?;
        if !report.one_per_cube {
            println!("invalid: points are not one per level-{} cube", cert.level);
            return Ok(Status::Violation);
        }
        if let Some(i) = report.c1_failure {
            println!("invalid: point {i} {} is within the margin of its cube boundary", format_point(&cert.gamma, i));
            return Ok(Status::Violation);
        }
        if let Some(v) = &report.violation {
            report_violation(&cert.gamma, &cert.constraint, v);
            return Ok(Status::Violation);
        }
        if a.trials > 0 {
            let r = perturbation_trials(&cert.gamma, &cert.constraint, cert.epsilon(), a.trials, a.seed)?;
            if let Some(f) = r.failures.first() {
                println!("perturbation trial failed: {f}");
                return Ok(Status::Violation);
            }
            println!("perturbation trials: {} clean", r.trials);
        }
        println!("clean: {} tuples, margin {}", report.tuples, cert.epsilon());
        return Ok(Status::Ok);
    }
    let set = set_from_value(v)?;
    let constraint = build_constraint(&a.constraint)?;
    let report = scan(&set, &constraint, ScanOptions { tol: a.tol, jobs, min_gap: false })?;
    match &report.violation {
        Some(v) => {
            report_violation(&set, &constraint, v);
            Ok(Status::Violation)
        }
        None => {
            println!("clean: {} tuples", report.tuples);
            Ok(Status::Ok)
        }
    }
}

fn set_from_value(v: Value) -> Result<FinitePointSet> {
    let doc: PointSetDoc = serde_json::from_value(v).context("parsing point set")?;
    Ok(doc.into_set()?)
}

fn cmd_hausdorff(a: HausdorffArgs) -> Result<Status> {
    let e = read_set(&a.a)?;
    let f = read_set(&a.b)?;
    let h = hausdorff_distance(&e, &f)?;
    match (&h.squared, a.float) {
        (Scalar::Exact(q), false) => match exact_sqrt(q) {
            Some(r) => println!("{r}"),
            None => println!("sqrt({q})"),
        },
        _ => println!("{:?}", h.value),
    }
    Ok(Status::Ok)
}

fn cmd_hit_test(a: HitTestArgs, ctx: &mut Ctx) -> Result<Status> {
    let e = read_set(&a.set)?;
    let scheme = NowhereDenseScheme::from_json(&read(&a.avoid)?)?;
    ctx.backend(&e);
    let before = hits(&e, &scheme)?;
    let r = avoid_construct(&e, &scheme, a.level)?;
    ctx.emit(&a.out, &r.f.to_json())?;
    note(&a.out, &format!("E hits A: {before}"));
    note(&a.out, &format!("F points {} eps' {}", r.f.len(), r.epsilon));
    note(&a.out, &format!("d_H(E,F)^2 {}", r.hausdorff_squared));
    Ok(Status::Ok)
}

fn cmd_dimension(a: DimensionArgs, ctx: &mut Ctx) -> Result<Status> {
    let e = read_set(&a.set)?;
    ctx.backend(&e);
    let mut csv = String::from("n,count,slope\n");
    for row in box_count_profile(&e, a.max_level)? {
        let slope = row.slope.map(|s| format!("{s:.6}")).unwrap_or_default();
        csv.push_str(&format!("{},{},{}\n", row.level, row.count, slope));
    }
    ctx.emit(&a.out, &csv)?;
    Ok(Status::Ok)
}

fn cmd_arith(cmd: ArithCommand, ctx: &mut Ctx) -> Result<Status> {
    let cap = |c: Option<u128>| c.unwrap_or(DEFAULT_EXPANSION_CAP);
    match cmd {
        ArithCommand::Sum(a) => {
            let set = read_set(&a.set)?;
            ctx.backend(&set);
            let s = sum_set(&set, a.m, cap(a.cap))?;
            ctx.emit(&a.out, &s.to_json())?;
            note(&a.out, &format!("|S^{}(A)| = {}", a.m, s.len()));
        }
        ArithCommand::Prod(a) => {
            let set = read_set(&a.set)?;
            ctx.backend(&set);
            let s = product_set(&set, a.m, cap(a.cap))?;
            ctx.emit(&a.out, &s.to_json())?;
            note(&a.out, &format!("|T^{}(A)| = {}", a.m, s.len()));
        }
        ArithCommand::Poly(a) => {
            let set = read_set(&a.set)?;
            ctx.backend(&set);
            let p: Polynomial = a.coeffs.parse()?;
            let s = polynomial_image(&p, &set, cap(a.cap))?;
            ctx.emit(&a.out, &s.to_json())?;
            note(&a.out, &format!("|P(A)| = {}", s.len()));
        }
        ArithCommand::Exp(a) => {
            let set = read_set(&a.set)?;
            ctx.backend(&set);
            let s = exp_partial_sum(&set, a.m, cap(a.cap))?;
            ctx.emit(&a.out, &s.set.to_json())?;
            note(&a.out, &format!("|S_{}| = {} gap_bound {}", a.m, s.set.len(), s.gap_bound));
        }
        ArithCommand::Identity(a) => {
            let set = read_set(&a.set)?;
            ctx.backend(&set);
            let r = projection_identity_check(&set, a.m, cap(a.cap))?;
            let doc = json!({
                "equal": r.equal,
                "projected": r.projected.to_doc(),
                "sumset": r.sumset.to_doc(),
            });
            ctx.emit(&a.out, &serde_json::to_string_pretty(&doc)?)?;
            println!("{}", if r.equal { "equal" } else { "not equal" });
            if !r.equal {
                return Ok(Status::Violation);
            }
        }
        ArithCommand::Cover(a) => {
            let b = covering_bound(a.n, a.m, a.s)?;
            println!("log2 {}", b.log2);
            println!("value {:e}", b.value);
        }
        ArithCommand::DimEvidence(a) => {
            ctx.seed = Some(a.seed);
            ctx.backend = Some("exact".into());
            let rows = dim_evidence(&a.levels, a.m, a.seed, DEFAULT_EXPANSION_CAP)?;
            let mut csv = String::from(
                "n,m,base_size,sum_size,product_size,sum_boxes,product_boxes,sum_slope,product_slope,covering_log2\n",
            );
            for r in rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{:.6},{:.6},{:.6}\n",
                    r.n,
                    r.m,
                    r.base_size,
                    r.sum_size,
                    r.product_size,
                    r.sum_boxes,
                    r.product_boxes,
                    r.sum_slope,
                    r.product_slope,
                    r.covering_log2
                ));
            }
            ctx.emit(&a.out, &csv)?;
        }
    }
    Ok(Status::Ok)
}

fn read_function(path: &Path) -> Result<PLFunction> {
    PLFunction::from_json(&read(path)?).with_context(|| format!("parsing function {}", path.display()))
}

fn read_fiber(path: &Path) -> Result<FiberSet> {
    FiberSet::from_json(&read(path)?).with_context(|| format!("parsing fibre {}", path.display()))
}

fn cmd_func(cmd: FuncCommand, ctx: &mut Ctx) -> Result<Status> {
    match cmd {
        FuncCommand::HitTest(a) => {
            let f = read_function(&a.f)?;
            let fiber = read_fiber(&a.fiber)?;
            println!("{}", graph_hits_fiber(&f, &fiber)?);
        }
        FuncCommand::Avoid(a) => {
            let f = read_function(&a.f)?;
            let fibers = a.fiber.iter().map(|p| read_fiber(p)).collect::<Result<Vec<_>>>()?;
            let eps = parse_rational(&a.eps)?;
            ctx.backend = Some("exact".into());
            let (g, distance, clearances) = if let [fiber] = fibers.as_slice() {
                let r = avoid_shift(&f, fiber, &eps)?;
                (r.g, r.distance, vec![r.clearance])
            } else {
                let r = avoid_many(&f, &fibers, &eps)?;
                (r.g, r.distance, r.clearances)
            };
            ctx.emit(&a.out, &g.to_json())?;
            let clear: Vec<String> = clearances.iter().map(ToString::to_string).collect();
            note(&a.out, &format!("d(f,g) {} clearance {}", distance, clear.join(",")));
        }
    }
    Ok(Status::Ok)
}

fn cmd_sample_typical(a: SampleTypicalArgs, ctx: &mut Ctx) -> Result<Status> {
    let s = sample_typical(a.dim, &a.levels, a.seed, DEFAULT_ENUMERATION_CAP)?;
    ctx.seed = Some(a.seed);
    ctx.backend = Some("exact".into());
    let doc = json!({
        "dim": a.dim,
        "levels": s.levels,
        "seed": a.seed,
        "bounds": s.bounds.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "measured_squared": s.measured.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "stages": s.stages.iter().map(FinitePointSet::to_doc).collect::<Vec<_>>(),
    });
    ctx.emit(&a.out, &serde_json::to_string_pretty(&doc)?)?;
    let sizes: Vec<String> = s.stages.iter().map(|f| f.len().to_string()).collect();
    note(&a.out, &format!("stage sizes {}", sizes.join(",")));
    Ok(Status::Ok)
}
