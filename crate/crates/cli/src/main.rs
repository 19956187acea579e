//! `curvlab`: measure coarse curvature of finite metric spaces.
//!
//! Exit codes: 0 on success, 1 on usage or I/O errors, 2 when `analyze`
//! finds an inequality check violated beyond its slack.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use curvlab::balls::{
    ball_intersection, ecc_report, inscribed_formula_check, nearest_ball_hausdorff, scan_ball_pairs, RadiusPolicy,
    ScanTargets,
};
use curvlab::bounds::{constants_bounds, delta_linear, delta_of_eps, meat_bound, thinbigons_bound};
use curvlab::cat::{cat_ecc_test, cat_test, ecc_kappa, extension_check, CatSampling, DEFAULT_TOLERANCE};
use curvlab::divergence::{divergence_constants, estimate_e, estimate_f_d};
use curvlab::generate::{generate_edges, write_edge_list, GenKind, GenSpec};
use curvlab::metric::load_space;
use curvlab::rational::{parse_rational, to_pq};
use curvlab::report::{run_analysis, AnalyzeParams};
use curvlab::{InputFormat, MetricSpace, Rational};

#[derive(Parser, Debug)]
#[command(name = "curvlab", version, about = "Coarse curvature of finite metric spaces")]
struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a seeded test space as an edge list.
    Gen(GenArgs),
    /// Full analysis report with inequality checks.
    Analyze(AnalyzeArgs),
    /// Ball-intersection eccentricity: one pair, or a scan.
    Ecc(EccArgs),
    /// Evaluate the explicit growth bounds.
    Bounds(BoundsArgs),
    /// Divergence profiles f_D and e.
    Diverge(DivergeArgs),
    /// Comparison-triangle test against the model plane of curvature kappa.
    Cat(CatArgs),
    /// Print Ecc_kappa(s, t, d).
    Ecckappa(EccKappaArgs),
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// Edge list (`u v w` lines) or CSV distance matrix.
    #[arg(long)]
    input: PathBuf,
    /// `edgelist` or `matrix`.
    #[arg(long, default_value = "edgelist")]
    format: InputFormat,
    /// Insert `k` points on every edge.
    #[arg(long, default_value_t = 0)]
    subdivide: u32,
}

impl InputArgs {
    fn load(&self) -> Result<MetricSpace> {
        let space = load_space(&self.input, self.format)?;
        if self.subdivide > 0 {
            return Ok(space.subdivide(self.subdivide)?);
        }
        Ok(space)
    }

    fn format_name(&self) -> &'static str {
        match self.format {
            InputFormat::EdgeList => "edgelist",
            InputFormat::Matrix => "matrix",
        }
    }
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Write JSON to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print JSON on standard output (the default when no summary exists).
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    kind: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long)]
    radius: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge-list destination (standard output when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PolicyArgs {
    /// `all-realized`, `half-integral` or `sampled`.
    #[arg(long, default_value = "all-realized")]
    policy: String,
    /// Tuples drawn by the sampled policy.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl PolicyArgs {
    fn policy(&self) -> Result<RadiusPolicy> {
        Ok(match self.policy.as_str() {
            "all-realized" => RadiusPolicy::AllRealized,
            "half-integral" => RadiusPolicy::HalfIntegral,
            "sampled" => RadiusPolicy::Sampled {
                samples: self.samples.unwrap_or(10_000),
                seed: self.seed,
            },
            other => bail!("unknown radius policy `{other}`"),
        })
    }
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    policy: PolicyArgs,
    /// Also compute divergence profiles with this separation D.
    #[arg(long, value_parser = rational)]
    divergence_d: Option<Rational>,
    #[arg(long, default_value_t = 8)]
    r_max: u64,
    /// Record start and finish times (makes reports differ between runs).
    #[arg(long)]
    timestamps: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct EccArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    policy: PolicyArgs,
    #[arg(long)]
    x: Option<String>,
    #[arg(long, value_parser = rational)]
    s: Option<Rational>,
    #[arg(long)]
    y: Option<String>,
    #[arg(long, value_parser = rational)]
    t: Option<Rational>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, value_parser = rational, default_value = "1")]
    eps: Rational,
    /// Comma-separated: delta, meat, constants, linear, thinbigons.
    #[arg(long, default_value = "delta,meat,constants,linear")]
    which: String,
    #[arg(long, default_value_t = 3)]
    q: i64,
    #[arg(long, default_value_t = 1)]
    k0: i64,
    #[arg(long, default_value_t = 2)]
    k1: i64,
    #[arg(long = "T", value_parser = rational)]
    t: Option<Rational>,
    #[arg(long = "D", value_parser = rational)]
    d: Option<Rational>,
    /// Omit exact values.
    #[arg(long)]
    log2_only: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct DivergeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long = "D", alias = "d", value_parser = rational, default_value = "2")]
    d: Rational,
    #[arg(long, default_value_t = 8)]
    r_max: u64,
    /// `f`, `e` or `both`.
    #[arg(long, default_value = "both")]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct CatArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, allow_hyphen_values = true)]
    kappa: f64,
    /// Sample this many triangles instead of scanning all of them.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Also test ball-pair eccentricities against Ecc_kappa.
    #[arg(long)]
    ecc: bool,
    #[arg(long, default_value = "all-realized")]
    policy: String,
    /// Run the eccentricity test even if the extension check fails.
    #[arg(long)]
    assume_extension: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct EccKappaArgs {
    #[arg(long, allow_hyphen_values = true)]
    kappa: f64,
    #[arg(short = 's')]
    s: f64,
    #[arg(short = 't')]
    t: f64,
    #[arg(short = 'd')]
    d: f64,
}

fn emit(output: &OutputArgs, value: &Value, summary: Option<String>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    if let Some(path) = &output.out {
        fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    let mut stdout = io::stdout().lock();
    match summary {
        Some(s) if !output.json => stdout.write_all(s.as_bytes())?,
        _ if output.out.is_none() || output.json => stdout.write_all(text.as_bytes())?,
        _ => {}
    }
    Ok(())
}

fn gen(args: GenArgs) -> Result<()> {
    let kind: GenKind = args.kind.parse()?;
    let spec = GenSpec {
        kind,
        n: args.n,
        m: args.m,
        depth: args.depth,
        radius: args.radius,
        seed: args.seed,
    };
    let edges = generate_edges(&spec)?;
    match &args.out {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_edge_list(&spec, &edges, io::BufWriter::new(file))?;
        }
        None => write_edge_list(&spec, &edges, io::stdout().lock())?,
    }
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<bool> {
    let space = args.input.load()?;
    args.policy.policy()?;
    let params = AnalyzeParams {
        input: args.input.input.display().to_string(),
        format: args.input.format_name().to_string(),
        subdivide: args.input.subdivide,
        policy: args.policy.policy.clone(),
        samples: args.policy.samples,
        seed: args.policy.seed,
        divergence_d: args.divergence_d,
        r_max: args.r_max,
        timestamps: args.timestamps,
    };
    let report = run_analysis(&space, &params);
    let value = report.to_json(&space);
    let mut summary = format!(
        "points {}  delta4 {}  delta_slim {}  max ecc {}  max hausdorff {}\n",
        space.len(),
        to_pq(&report.delta4.value),
        to_pq(&report.delta_slim.value),
        to_pq(&report.scan.max_ecc),
        to_pq(&report.scan.max_hausdorff),
    );
    for c in &report.checks {
        summary.push_str(&format!(
            "{}: {} = {} <= {} = {} + {}  {}\n",
            c.name,
            c.lhs_name,
            to_pq(&c.lhs),
            c.rhs_name,
            to_pq(&c.rhs),
            to_pq(&c.slack),
            if c.passed { "ok" } else { "VIOLATED" }
        ));
    }
    emit(&args.output, &value, Some(summary))?;
    Ok(report.passed())
}

fn ecc(args: EccArgs) -> Result<()> {
    let space = args.input.load()?;
    let value = match (&args.x, args.s, &args.y, args.t) {
        (Some(x), Some(s), Some(y), Some(t)) => {
            let (x, y) = (space.resolve(x)?, space.resolve(y)?);
            let set = ball_intersection(&space, x, s, y, t);
            let report = ecc_report(&space, &set);
            let check = inscribed_formula_check(&space, x, s, y, t, extension_check(&space));
            let nearest = nearest_ball_hausdorff(&space, &set).ok();
            json!({
                "pair": [space.label(x), to_pq(&s), space.label(y), to_pq(&t)],
                "intersection": set.iter().map(|p| space.label(p).clone()).collect::<Vec<_>>(),
                "report": report.to_json(&space),
                "nearest_ball": nearest.map(|(b, h)| json!({ "ball": b.to_json(&space), "hausdorff": to_pq(&h) })),
                "inscribed": {
                    "vacuous": check.vacuous,
                    "prescribed_radius": to_pq(&check.prescribed_radius),
                    "prescribed_position": to_pq(&check.prescribed_position),
                    "center": check.center.map(|c| space.label(c).clone()),
                    "max_inscribed": to_pq(&check.max_inscribed),
                    "passed": check.passed(),
                },
            })
        }
        (None, None, None, None) => scan_ball_pairs(&space, args.policy.policy()?, ScanTargets::BOTH).to_json(&space),
        _ => bail!("a single pair needs all of --x, --s, --y, --t"),
    };
    emit(&args.output, &value, None)
}

fn bounds(args: BoundsArgs) -> Result<()> {
    let mut out = serde_json::Map::new();
    for which in args.which.split(',').map(str::trim).filter(|w| !w.is_empty()) {
        let v = match which {
            "meat" => meat_bound(args.q, args.k0, args.k1)?.to_json(),
            "thinbigons" => {
                let (Some(t), Some(d)) = (args.t, args.d) else {
                    bail!("thinbigons needs --T and --D");
                };
                thinbigons_bound(t, args.eps, d)?.to_json()
            }
            "constants" => constants_bounds(args.eps)?.to_json(),
            "delta" => delta_of_eps(args.eps)?.to_json(),
            "linear" => delta_linear(args.eps)?.to_json(),
            other => bail!("unknown bound `{other}`"),
        };
        out.insert(which.to_string(), v);
    }
    let mut value = Value::Object(out);
    if args.log2_only {
        strip_exact(&mut value);
    }
    emit(&args.output, &value, None)
}

fn strip_exact(v: &mut Value) {
    match v {
        Value::Object(map) => {
            if let Some(e) = map.get_mut("exact") {
                *e = Value::Null;
            }
            map.values_mut().for_each(strip_exact);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_exact),
        _ => {}
    }
}

fn diverge(args: DivergeArgs) -> Result<()> {
    let space = args.input.load()?;
    let (want_f, want_e) = match args.mode.as_str() {
        "f" => (true, false),
        "e" => (false, true),
        "both" => (true, true),
        other => bail!("unknown mode `{other}` (expected f, e or both)"),
    };
    let mut value = json!({ "D": to_pq(&args.d), "r_max": args.r_max, "seed": args.seed });
    if want_f {
        let f = estimate_f_d(&space, args.d, args.r_max)?;
        value["constants"] = divergence_constants(&f).map(|c| c.to_json()).unwrap_or(Value::Null);
        value["f"] = f.to_json(&space);
    }
    if want_e {
        value["e"] = estimate_e(&space, args.d, args.r_max)?.to_json(&space);
    }
    emit(&args.output, &value, None)
}

fn cat(args: CatArgs) -> Result<()> {
    let space = args.input.load()?;
    let sampling = CatSampling {
        samples: args.samples,
        seed: args.seed,
    };
    let report = cat_test(&space, args.kappa, sampling, args.tolerance)?;
    let mut value = json!({
        "extension": extension_check(&space),
        "extension_is_heuristic": true,
        "comparison": report.to_json(&space),
    });
    if args.ecc {
        let policy = PolicyArgs {
            policy: args.policy.clone(),
            samples: args.samples,
            seed: args.seed,
        }
        .policy()?;
        let ecc = cat_ecc_test(&space, args.kappa, policy, args.assume_extension, args.tolerance)?;
        value["ecc"] = ecc.to_json(&space);
    }
    emit(&args.output, &value, None)
}

/// `v` with 15 significant digits.
fn significant(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (14 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

fn ecckappa(args: EccKappaArgs) -> Result<()> {
    let v = ecc_kappa(args.kappa, args.s, args.t, args.d)?;
    println!("{}", significant(v));
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Gen(a) => gen(a)?,
        Command::Analyze(a) => return analyze(a),
        Command::Ecc(a) => ecc(a)?,
        Command::Bounds(a) => bounds(a)?,
        Command::Diverge(a) => diverge(a)?,
        Command::Cat(a) => cat(a)?,
        Command::Ecckappa(a) => ecckappa(a)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
