use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cubic_bisect::cut::Cut;
use cubic_bisect::firstmoment::*;
use cubic_bisect::graph::{sample_configuration, sample_simple_cubic, to_multigraph, Multigraph};
use cubic_bisect::improve::{local_search, random_bisection, MoveBudget};
use cubic_bisect::montecarlo::{
    factor_b, orthant_mc_region, upper_bound_chain, OrthantRegion, UpperBoundChain, DEFAULT_BLOCK,
};
use cubic_bisect::oracle::exact_bisection;
use cubic_bisect::seed::{derive, derive_indexed};
use cubic_bisect::wave::{default_radius, finite_radius_prediction, wave_bisect, WaveParams, LAMBDA_DEFAULT};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::record::{canonical, fmt9, sha256_hex};

/// Type-one point and type-two multipliers quoted with the bounds.
pub const TYPE1_POINT: (f64, f64) = (0.1069, 0.1802);
pub const TYPE2_THRESHOLD: f64 = 0.103295;
pub const TYPE2_MULTIPLIERS: (f64, f64) = (0.002428, -1.412768);

pub struct Ctx {
    pub seed: u64,
    /// Write files and text output; off during replay.
    pub emit: bool,
}

pub struct Outcome {
    pub outputs: Value,
    /// Replaces the default JSON print of `outputs`.
    pub stdout: Option<String>,
}

impl Outcome {
    fn json(outputs: Value) -> Self {
        Outcome { outputs: canonical(outputs), stdout: None }
    }
}

fn parse<T: DeserializeOwned>(command: &str, params: Value) -> CliResult<T> {
    serde_json::from_value(params).map_err(|e| CliError::Invalid(format!("{command}: {e}")))
}

pub fn run(command: &str, params: Value, ctx: &Ctx) -> CliResult<Outcome> {
    match command {
        "gen" => gen(parse(command, params)?, ctx),
        "bisect" => bisect(parse(command, params)?, ctx),
        "bench" => bench(parse(command, params)?, ctx),
        "stats" => stats(parse(command, params)?, ctx),
        "exact" => exact(parse(command, params)?),
        "mc orthant" => orthant(parse(command, params)?, ctx),
        "bounds eval-type1" => eval_type1(parse(command, params)?),
        "bounds opt-type1" => opt_type1(parse(command, params)?),
        "bounds eval-type2" => eval_type2(parse(command, params)?),
        "bounds opt-type2" => opt_type2(parse(command, params)?),
        "bounds report" => report(parse(command, params)?, ctx),
        "bounds type1-curve" => type1_curve(parse(command, params)?, ctx),
        other => Err(CliError::Invalid(format!("unknown command `{other}`"))),
    }
}

fn require<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Invalid(format!("missing --{flag}")))
}

fn load_graph(path: &Path) -> CliResult<Multigraph> {
    Multigraph::load(path).map_err(|e| match e {
        cubic_bisect::Error::Io(io) => CliError::Invalid(format!("cannot read {}: {io}", path.display())),
        other => other.into(),
    })
}

fn write_out(path: &Option<PathBuf>, text: &str, ctx: &Ctx) -> CliResult<Option<String>> {
    match path {
        Some(p) if ctx.emit => {
            std::fs::write(p, text)?;
            Ok(None)
        }
        Some(_) => Ok(None),
        None => Ok(Some(text.to_string())),
    }
}

fn range_pair(range: &[f64]) -> CliResult<(f64, f64)> {
    match range {
        &[lo, hi] if lo <= hi => Ok((lo, hi)),
        _ => Err(CliError::Invalid(format!("range must be `lo,hi` with lo <= hi, got {range:?}"))),
    }
}

fn gen(a: GenArgs, ctx: &Ctx) -> CliResult<Outcome> {
    let n = require(a.n, "n")?;
    let g = if a.simple {
        sample_simple_cubic(n, ctx.seed, a.max_attempts)?
    } else {
        to_multigraph(&sample_configuration(n, ctx.seed)?)
    };
    let text = g.to_edge_list();
    let stdout = write_out(&a.out, &text, ctx)?;
    let mut out = Outcome::json(json!({
        "n": g.n(),
        "m": g.m(),
        "simple": g.is_simple(),
        "sha256": sha256_hex(text.as_bytes()),
    }));
    out.stdout = stdout;
    Ok(out)
}

fn budget(max_set_size: usize, max_rounds: usize, seed: u64) -> MoveBudget {
    MoveBudget { max_set_size, max_rounds, rng_seed: derive(seed, "search") }
}

fn bisect(a: BisectArgs, ctx: &Ctx) -> CliResult<Outcome> {
    let g = load_graph(&require(a.input.clone(), "input")?)?;
    let n = g.n();
    let budget = budget(a.max_set_size, a.max_rounds, ctx.seed);
    let mut extra = serde_json::Map::new();
    let cut = match a.method {
        Method::Exact => exact_bisection(&g)?.witness,
        Method::Local => {
            let Init::Random = a.init;
            let out = local_search(&g, &random_bisection(&g, derive(ctx.seed, "init")), &budget);
            if a.round_trace {
                extra.insert("round_trace".into(), serde_json::to_value(&out.trace)?);
            }
            out.cut
        }
        Method::Wave => {
            let p = WaveParams { lambda: a.lambda, radius: a.radius.unwrap_or_else(|| default_radius(n)), seed: ctx.seed };
            let out = wave_bisect(&g, &p, &budget)?;
            extra.insert("lambda".into(), json!(p.lambda));
            extra.insert("radius".into(), json!(p.radius));
            if a.stage_trace {
                extra.insert("stage_trace".into(), serde_json::to_value(&out.stages)?);
            }
            if a.round_trace {
                extra.insert("round_trace".into(), serde_json::to_value(&out.search_trace)?);
            }
            out.cut
        }
    };
    let mut v = cut_json(a.method.name(), &cut);
    v.as_object_mut().expect("object").extend(extra);
    Ok(Outcome::json(v))
}

fn cut_json(method: &str, c: &Cut) -> Value {
    let n = c.n();
    json!({
        "method": method,
        "n": n,
        "crossing": c.crossing(),
        "fraction": if n == 0 { 0.0 } else { c.crossing() as f64 / n as f64 },
        "balance": c.imbalance(),
        "bisection": c.to_line(),
    })
}

const STAGES: [&str; 5] = ["sign", "isolated", "swap", "repair", "local"];

struct BenchRow {
    n: usize,
    seed: u64,
    radius: Option<usize>,
    crossing: usize,
    balance: usize,
    stages: [Option<usize>; 5],
}

fn bench_instance(a: &BenchArgs, n: usize, seed: u64) -> CliResult<BenchRow> {
    let g = to_multigraph(&sample_configuration(n, seed)?);
    let budget = budget(a.max_set_size, a.max_rounds, seed);
    let mut stages = [None; 5];
    let (cut, radius) = match a.method {
        Method::Exact => (exact_bisection(&g)?.witness, None),
        Method::Local => {
            let out = local_search(&g, &random_bisection(&g, derive(seed, "init")), &budget);
            stages[4] = Some(out.cut.crossing());
            (out.cut, None)
        }
        Method::Wave => {
            let p = WaveParams { lambda: a.lambda, radius: a.radius.unwrap_or_else(|| default_radius(n)), seed };
            let out = wave_bisect(&g, &p, &budget)?;
            for s in &out.stages {
                if let Some(i) = STAGES.iter().position(|&x| x == s.stage) {
                    stages[i] = Some(s.crossing);
                }
            }
            (out.cut, Some(p.radius))
        }
    };
    Ok(BenchRow { n, seed, radius, crossing: cut.crossing(), balance: cut.imbalance(), stages })
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

fn bench(a: BenchArgs, ctx: &Ctx) -> CliResult<Outcome> {
    let jobs: Vec<(usize, u64)> = a
        .n
        .iter()
        .flat_map(|&n| (0..a.seeds).map(move |i| (n, derive_indexed(ctx.seed, "bench", i as u64))))
        .collect();
    let rows = jobs.par_iter().map(|&(n, s)| bench_instance(&a, n, s)).collect::<CliResult<Vec<_>>>()?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["n", "seed", "method", "radius", "crossing", "fraction", "balance"];
    let stage_cols: Vec<String> = STAGES.iter().map(|s| format!("stage_{s}")).collect();
    header.extend(stage_cols.iter().map(String::as_str));
    w.write_record(&header)?;
    let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
    let mut aggregates = Vec::new();
    for chunk in rows.chunk_by(|x, y| x.n == y.n) {
        let n = chunk[0].n;
        let frac = |c: usize| c as f64 / n as f64;
        for r in chunk {
            let mut rec = vec![n.to_string(), r.seed.to_string(), a.method.name().into(), opt(r.radius)];
            rec.extend([r.crossing.to_string(), fmt9(frac(r.crossing)), r.balance.to_string()]);
            rec.extend(r.stages.iter().map(|&s| opt(s)));
            w.write_record(&rec)?;
        }
        let col = |f: &dyn Fn(&BenchRow) -> Option<f64>| -> Option<(f64, f64)> {
            let xs: Option<Vec<f64>> = chunk.iter().map(f).collect();
            xs.map(|xs| mean_stderr(&xs))
        };
        let crossing = col(&|r| Some(r.crossing as f64)).expect("non-empty");
        let fraction = col(&|r| Some(frac(r.crossing))).expect("non-empty");
        let balance = col(&|r| Some(r.balance as f64)).expect("non-empty");
        let radius = col(&|r| r.radius.map(|x| x as f64));
        let stages: Vec<Option<(f64, f64)>> = (0..5).map(|i| col(&|r| r.stages[i].map(frac))).collect();
        for (label, pick) in [("mean", 0usize), ("stderr", 1)] {
            let p = |x: (f64, f64)| fmt9(if pick == 0 { x.0 } else { x.1 });
            let mut rec = vec![n.to_string(), label.into(), a.method.name().into(), radius.map(p).unwrap_or_default()];
            rec.extend([p(crossing), p(fraction), p(balance)]);
            rec.extend(stages.iter().map(|s| s.map(p).unwrap_or_default()));
            w.write_record(&rec)?;
        }
        let predicted = match (a.method, chunk[0].radius) {
            (Method::Wave, Some(r)) => Some(finite_radius_prediction(r, a.lambda)?.cut_rate),
            _ => None,
        };
        aggregates.push(json!({
            "n": n,
            "instances": chunk.len(),
            "mean_fraction": fraction.0,
            "stderr_fraction": fraction.1,
            "stage_mean_fraction": STAGES.iter().zip(&stages)
                .filter_map(|(s, v)| v.map(|v| (s.to_string(), json!(v.0))))
                .collect::<serde_json::Map<_, _>>(),
            "predicted_sign_fraction": predicted,
        }));
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(anyhow::anyhow!("{e}")))?;
    let text = String::from_utf8(bytes).expect("csv is utf-8");
    let stdout = write_out(&a.out, &text, ctx)?;
    let mut out = Outcome::json(json!({
        "rows": rows.len(),
        "aggregates": aggregates,
        "sha256": sha256_hex(text.as_bytes()),
    }));
    out.stdout = stdout;
    Ok(out)
}

fn stats(a: StatsArgs, ctx: &Ctx) -> CliResult<Outcome> {
    let g = match (&a.input, a.n) {
        (Some(p), _) => load_graph(p)?,
        (None, Some(n)) => to_multigraph(&sample_configuration(n, ctx.seed)?),
        (None, None) => return Err(CliError::Invalid("need --input or --n".into())),
    };
    let loops = g.edges().iter().filter(|(u, v)| u == v).count();
    let mut sorted: Vec<(usize, usize)> = g.edges().iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    sorted.sort_unstable();
    let parallel = sorted.windows(2).filter(|w| w[0] == w[1] && w[0].0 != w[0].1).count();
    let core = g.two_core();
    let short = g.count_short_cycle_vertices(a.cycle_len);
    Ok(Outcome::json(json!({
        "n": g.n(),
        "m": g.m(),
        "cubic": g.is_cubic(),
        "simple": g.is_simple(),
        "loops": loops,
        "parallel_edges": parallel,
        "cherries": g.cherries().len(),
        "two_core": { "vertices": core.graph.n(), "edges": core.graph.m() },
        "short_cycles": { "max_len": a.cycle_len, "vertices": short },
        "typical": g.is_typical(),
    })))
}

fn exact(a: ExactArgs) -> CliResult<Outcome> {
    let g = load_graph(&require(a.input.clone(), "input")?)?;
    let r = exact_bisection(&g)?;
    let mut v = json!({
        "n": g.n(),
        "width": r.width,
        "fraction": r.width as f64 / g.n() as f64,
        "explored": r.explored,
    });
    if a.emit_witness {
        v["witness"] = json!(r.witness.to_line());
    }
    Ok(Outcome::json(v))
}

fn orthant_block(samples: u64, blocks: Option<u64>) -> CliResult<u64> {
    match blocks {
        Some(0) => Err(CliError::Invalid("--blocks must be positive".into())),
        Some(b) => Ok(samples.div_ceil(b).max(1)),
        None => Ok(DEFAULT_BLOCK),
    }
}

fn mc_json(mc: &cubic_bisect::montecarlo::MCResult, block: u64) -> Value {
    json!({
        "estimate": mc.estimate,
        "stderr": mc.stderr,
        "samples": mc.samples,
        "hits": mc.hits,
        "seed": mc.seed,
        "block_size": block,
        "ci95": [mc.estimate - 1.96 * mc.stderr, mc.estimate + 1.96 * mc.stderr],
    })
}

fn orthant(a: OrthantArgs, ctx: &Ctx) -> CliResult<Outcome> {
    if a.samples == 0 {
        return Err(CliError::Invalid("--samples must be positive".into()));
    }
    let block = orthant_block(a.samples, a.blocks)?;
    let region = OrthantRegion::from_factor(&factor_b(LAMBDA_DEFAULT)?);
    let mc = orthant_mc_region(&region, a.samples, ctx.seed, block);
    Ok(Outcome::json(mc_json(&mc, block)))
}

fn eval_type1(a: EvalType1Args) -> CliResult<Outcome> {
    let p = Type1Point::new(require(a.beta, "beta")?, require(a.t, "T")?);
    let e = type1_exponent(p)?;
    Ok(Outcome::json(json!({ "beta_prime": p.beta_prime, "T": p.t, "exponent": e, "growth": e.exp() })))
}

fn type1_json(o: &Type1Optimum, lo: f64, hi: f64) -> Value {
    json!({
        "range": [lo, hi],
        "max_value": o.max_value,
        "argmax": { "beta_prime": o.argmax.beta_prime, "T": o.argmax.t },
        "grid_points": o.grid_points,
        "certificate": {
            "upper_bound": o.certificate.upper_bound,
            "boxes": o.certificate.boxes,
            "unresolved": o.certificate.unresolved,
            "certifies_negative": o.certificate.certifies_negative(),
        },
    })
}

fn opt_type1(a: OptType1Args) -> CliResult<Outcome> {
    let (lo, hi) = range_pair(&a.range)?;
    Ok(Outcome::json(type1_json(&type1_optimize(lo, hi)?, lo, hi)))
}

fn side_json(s: &Type2Side) -> CliResult<Value> {
    Ok(json!({
        "beta_prime": s.beta_prime,
        "lam1": s.lam1,
        "lam2": s.lam2,
        "lam3": s.lam3,
        "t": s.t,
        "k": s.k,
        "residuals": s.residuals()?,
    }))
}

fn eval_type2(a: EvalType2Args) -> CliResult<Outcome> {
    let beta1 = require(a.beta1, "beta1")?;
    let (lam1, lam3) = (require(a.lam1, "lam1")?, require(a.lam3, "lam3")?);
    let p = Type2Point {
        beta1,
        beta2: a.beta2.unwrap_or(beta1),
        lam1_a: lam1,
        lam3_a: lam3,
        lam1_b: a.lam1b.unwrap_or(lam1),
        lam3_b: a.lam3b.unwrap_or(lam3),
    };
    let e = type2_exponent(&p)?;
    let (s1, s2) = p.sides()?;
    Ok(Outcome::json(json!({
        "beta1": p.beta1,
        "beta2": p.beta2,
        "exponent": e,
        "base": e.exp(),
        "sides": [side_json(&s1)?, side_json(&s2)?],
    })))
}

fn type2_json(o: &Type2Optimum, lo: f64, hi: f64, search: &Type2Search) -> Value {
    json!({
        "range": [lo, hi],
        "domain": search.domain,
        "multipliers": search.multipliers,
        "sup_base": o.sup_base,
        "exponent": o.exponent,
        "worst_point": o.worst_point,
        "evaluations": o.evaluations,
        "certifies_below_one": o.certifies_below_one(),
    })
}

fn opt_type2(a: OptType2Args) -> CliResult<Outcome> {
    let (lo, hi) = range_pair(&a.range)?;
    let search = Type2Search {
        domain: if a.diagonal { Type2Domain::Diagonal } else { Type2Domain::Square },
        multipliers: if a.shared { Type2Multipliers::Shared } else { Type2Multipliers::Independent },
        beta_grid: a.beta_grid,
        ..Type2Search::default()
    };
    Ok(Outcome::json(type2_json(&type2_optimize(lo, hi, &search)?, lo, hi, &search)))
}

fn report_json(chain: &UpperBoundChain, type1: Value, type2: Value) -> Value {
    let mut v = json!({
        "lambda": chain.lambda,
        "sigma": chain.sigma,
        "orthant": chain.trio,
        "lyons_rate": chain.lyons_rate,
        "border_center_density": chain.border_center_density,
        "xi": chain.xi,
        "rigorous_upper_bound": chain.rigorous,
        "type1": type1,
        "type2": type2,
        "discrepancies": chain.discrepancies,
    });
    if let Some(mc) = &chain.mc {
        v["nonrigorous"] = json!({
            "mc": mc_json(mc, DEFAULT_BLOCK),
            "isolated_per_side": chain.isolated_per_side,
            "isolated_gain": chain.isolated_gain,
            "remaining_centers": chain.remaining,
            "upper_bound": chain.nonrigorous,
        });
    }
    v
}

fn report(a: ReportArgs, ctx: &Ctx) -> CliResult<Outcome> {
    let mc = if a.skip_mc {
        None
    } else {
        let region = OrthantRegion::from_factor(&factor_b(LAMBDA_DEFAULT)?);
        Some(orthant_mc_region(&region, a.samples.max(1), ctx.seed, DEFAULT_BLOCK))
    };
    let chain = upper_bound_chain(LAMBDA_DEFAULT, mc)?;

    let (b, t) = TYPE1_POINT;
    let t1_value = type1_exponent(Type1Point::new(b, t))?;
    let t1_opt = type1_optimize(0.10, b)?;
    let type1 = json!({
        "point": { "beta_prime": b, "T": t, "exponent": t1_value },
        "optimum": type1_json(&t1_opt, 0.10, b),
    });

    let (l1, l3) = TYPE2_MULTIPLIERS;
    let t2_value = type2_exponent(&Type2Point::symmetric(TYPE2_THRESHOLD, l1, l3))?;
    let search = Type2Search::default();
    let t2_opt = type2_optimize(0.1, TYPE2_THRESHOLD, &search)?;
    let type2 = json!({
        "threshold": TYPE2_THRESHOLD,
        "point": { "beta_prime": TYPE2_THRESHOLD, "lam1": l1, "lam3": l3, "exponent": t2_value, "base": t2_value.exp() },
        "optimum": type2_json(&t2_opt, 0.1, TYPE2_THRESHOLD, &search),
    });

    let outputs = canonical(report_json(&chain, type1, type2));
    let stdout = (!a.json).then(|| report_text(&outputs));
    Ok(Outcome { outputs, stdout })
}

fn report_text(v: &Value) -> String {
    let num = |p: &str| v.pointer(p).map(|x| x.to_string()).unwrap_or_else(|| "-".into());
    let mut s = String::new();
    let mut line = |label: &str, p: &str| {
        let _ = writeln!(s, "{label:<44} {}", num(p));
    };
    line("lambda", "/lambda");
    for k in 0..v["sigma"].as_array().map_or(0, Vec::len) {
        line(&format!("sigma_{k}"), &format!("/sigma/{k}"));
    }
    line("cherry P(same sign)", "/orthant/p_same");
    line("cherry P(one end differs)", "/orthant/p_one");
    line("cherry P(border)", "/orthant/p_border");
    line("sign cut rate", "/lyons_rate");
    line("border centers per vertex, one side", "/border_center_density");
    line("xi", "/xi");
    line("rigorous upper bound", "/rigorous_upper_bound");
    if v.get("nonrigorous").is_some() {
        line("isolated-center probability (MC)", "/nonrigorous/mc/estimate");
        line("  stderr", "/nonrigorous/mc/stderr");
        line("  95% CI low", "/nonrigorous/mc/ci95/0");
        line("  95% CI high", "/nonrigorous/mc/ci95/1");
        line("  samples", "/nonrigorous/mc/samples");
        line("isolated centers per side", "/nonrigorous/isolated_per_side");
        line("gain from isolated switch", "/nonrigorous/isolated_gain");
        line("remaining border centers", "/nonrigorous/remaining_centers");
        line("non-rigorous upper bound", "/nonrigorous/upper_bound");
    }
    line("type-one exponent at (0.1069, 0.1802)", "/type1/point/exponent");
    line("type-one max over [0.10, 0.1069]", "/type1/optimum/max_value");
    line("  at beta'", "/type1/optimum/argmax/beta_prime");
    line("  at T", "/type1/optimum/argmax/T");
    line("  certified upper bound", "/type1/optimum/certificate/upper_bound");
    line("type-two threshold", "/type2/threshold");
    line("type-two base at quoted multipliers", "/type2/point/base");
    line("type-two sup over [0.1, threshold]", "/type2/optimum/sup_base");
    line("  certifies below one", "/type2/optimum/certifies_below_one");
    if let Some(ds) = v["discrepancies"].as_array() {
        let _ = writeln!(s, "discrepancies:");
        for d in ds {
            let _ = writeln!(
                s,
                "  {}: printed {}, computed {} ({})",
                d["quantity"].as_str().unwrap_or(""),
                d["printed"],
                d["computed"],
                d["resolution"].as_str().unwrap_or("")
            );
        }
    }
    s
}

fn type1_curve(a: Type1CurveArgs, ctx: &Ctx) -> CliResult<Outcome> {
    let (lo, hi) = range_pair(&a.range)?;
    let pts = type1_zero_curve(lo, hi, a.steps)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["beta_prime", "T", "value"])?;
    for p in &pts {
        w.write_record([fmt9(p.beta_prime), fmt9(p.t), fmt9(p.value)])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(anyhow::anyhow!("{e}")))?;
    let text = String::from_utf8(bytes).expect("csv is utf-8");
    let stdout = write_out(&a.out, &text, ctx)?;
    let mut out = Outcome::json(json!({ "points": pts.len(), "sha256": sha256_hex(text.as_bytes()) }));
    out.stdout = stdout;
    Ok(out)
}
