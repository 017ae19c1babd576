use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use kepfair::colgen::{compute_reference_point, full_master, prepare, sample_indices, solve_scheme, ColGenParams};
use kepfair::conic::export_problem;
use kepfair::instance::{generate_instance, parse_instance, parse_preflib, Caps, Instance};
use kepfair::metrics::{lottery_objective, mean_std, SchemeReport, CSV_HEADER};
use kepfair::schemes::{build_master, FairnessConcept, SchemeKind};

#[derive(Parser, Debug)]
#[command(name = "kepfair", version, about = "Fair lottery policies for kidney exchange programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute a lottery for every instance x concept x kind and write reports.
    Solve(RunArgs),
    /// Compare column generation against the full-column master.
    Oracle(RunArgs),
    /// Write a random instance in the native format.
    Generate(GenerateArgs),
    /// Draw exchange plans from the lottery stored in a report.
    Sample(SampleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ConceptArg {
    If,
    Rawls,
    Aristotle,
    Nash,
    Utilitarian,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Single,
    Swp,
    Nswp,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct GenSpec {
    n: usize,
    ndd: f64,
    density: f64,
}

impl FromStr for GenSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [n, ndd, density] = parts[..] else {
            return Err("expected n,ndd,density".into());
        };
        let spec = GenSpec {
            n: n.parse().map_err(|_| format!("bad pair count `{n}`"))?,
            ndd: ndd.parse().map_err(|_| format!("bad NDD fraction `{ndd}`"))?,
            density: density.parse().map_err(|_| format!("bad density `{density}`"))?,
        };
        if !(0.0..=1.0).contains(&spec.ndd) || !(0.0..=1.0).contains(&spec.density) {
            return Err("NDD fraction and density must lie in [0, 1]".into());
        }
        Ok(spec)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Weights(f64, f64);

impl FromStr for Weights {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or("expected a,b")?;
        let a: f64 = a.trim().parse().map_err(|_| format!("bad weight `{a}`"))?;
        let b: f64 = b.trim().parse().map_err(|_| format!("bad weight `{b}`"))?;
        if !(a > 0.0 && b > 0.0) {
            return Err("SWP weights must be positive".into());
        }
        Ok(Weights(a, b))
    }
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Instance files (`.wmd`/`.dat` are read as PrefLib, anything else as the native format).
    #[arg(long, num_args = 1..)]
    instance: Vec<PathBuf>,
    /// Generate an instance instead: pairs, NDD fraction, arc density.
    #[arg(long, value_name = "N,NDD,DENSITY")]
    generate: Option<GenSpec>,
    #[arg(long, value_enum, num_args = 1.., default_value = "all")]
    concept: Vec<ConceptArg>,
    #[arg(long, value_enum, num_args = 1.., default_value = "all")]
    kind: Vec<KindArg>,
    #[arg(long, default_value_t = 3)]
    cycle_cap: usize,
    #[arg(long, default_value_t = 3)]
    chain_cap: usize,
    /// Conic solver tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Reduced-cost tolerance for termination.
    #[arg(long, default_value_t = 1e-6)]
    price_tol: f64,
    /// Seconds per run.
    #[arg(long, default_value_t = 3600.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 80)]
    pra_threshold: u8,
    #[arg(long, value_name = "A,B")]
    swp_weights: Option<Weights>,
    #[arg(long)]
    maximal_only: bool,
    /// Compare each run with the full-column master and record the gap.
    #[arg(long)]
    oracle_check: bool,
    /// Write the final master of each run in CBF.
    #[arg(long)]
    export_conic: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Plan limit for the full-column master.
    #[arg(long, default_value_t = 20_000)]
    plan_limit: usize,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(short = 'n', long = "pairs")]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    ndd: f64,
    #[arg(long, default_value_t = 0.2)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    report: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    draws: usize,
}

fn concepts(args: &[ConceptArg]) -> Vec<FairnessConcept> {
    let mut out = Vec::new();
    for a in args {
        let add: &[FairnessConcept] = match a {
            ConceptArg::If => &[FairnessConcept::IndividualFairness],
            ConceptArg::Rawls => &[FairnessConcept::Rawls],
            ConceptArg::Aristotle => &[FairnessConcept::Aristotle],
            ConceptArg::Nash => &[FairnessConcept::Nash],
            ConceptArg::Utilitarian => &[FairnessConcept::Utilitarian],
            ConceptArg::All => &FairnessConcept::ALL,
        };
        for c in add {
            if !out.contains(c) {
                out.push(*c);
            }
        }
    }
    out
}

fn kinds(args: &[KindArg], weights: Option<Weights>) -> Vec<SchemeKind> {
    let swp = SchemeKind::Swp {
        lambda: weights.map(|w| (w.0, w.1)),
    };
    let mut out = Vec::new();
    for a in args {
        let add = match a {
            KindArg::Single => vec![SchemeKind::Single],
            KindArg::Swp => vec![swp],
            KindArg::Nswp => vec![SchemeKind::Nswp],
            KindArg::All => vec![SchemeKind::Single, swp, SchemeKind::Nswp],
        };
        for k in add {
            if !out.contains(&k) {
                out.push(k);
            }
        }
    }
    out
}

fn load_instance(path: &Path) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let inst = if matches!(ext, "wmd" | "dat") {
        parse_preflib(&text)
    } else {
        parse_instance(&text)
    };
    inst.with_context(|| format!("parsing {}", path.display()))
}

fn instances(args: &RunArgs) -> anyhow::Result<Vec<(String, Instance)>> {
    let mut out = Vec::new();
    for path in &args.instance {
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("instance")
            .to_string();
        out.push((id, load_instance(path)?));
    }
    if let Some(g) = args.generate {
        let id = format!("gen-{}-{}-{}-{}", g.n, g.ndd, g.density, args.seed);
        out.push((id, generate_instance(g.n, g.ndd, g.density, args.seed)));
    }
    if out.is_empty() {
        bail!("no instance given; use --instance or --generate");
    }
    Ok(out)
}

fn params(args: &RunArgs) -> ColGenParams {
    ColGenParams {
        tol_price: args.price_tol,
        solver_tol: args.tol,
        time_limit_s: args.time_limit,
        maximal_only: args.maximal_only,
        pra_threshold: args.pra_threshold,
        ..ColGenParams::default()
    }
}

/// One `(instance, concept, kind)` job.
struct Job<'a> {
    id: &'a str,
    inst: &'a Instance,
    concept: FairnessConcept,
    kind: SchemeKind,
}

fn jobs<'a>(args: &RunArgs, insts: &'a [(String, Instance)]) -> Vec<Job<'a>> {
    let mut out = Vec::new();
    for (id, inst) in insts {
        for concept in concepts(&args.concept) {
            for kind in kinds(&args.kind, args.swp_weights) {
                if concept == FairnessConcept::Utilitarian && kind != SchemeKind::Single {
                    continue;
                }
                out.push(Job { id, inst, concept, kind });
            }
        }
    }
    out
}

struct RunResult {
    report: SchemeReport,
    /// Full-column master objective next to the column generation one.
    oracle: Option<(f64, f64)>,
}

fn run_job(job: &Job<'_>, args: &RunArgs, caps: Caps, with_oracle: bool) -> anyhow::Result<RunResult> {
    let params = params(args);
    params.validate()?;
    let deadline = Instant::now() + Duration::from_secs_f64(args.time_limit);
    let prep = prepare(job.inst, caps, params.pra_threshold)?;
    let (reference, pool) = compute_reference_point(&prep, job.concept, &params, deadline)?;
    let run = solve_scheme(&prep, job.concept, job.kind, reference, &pool, &params, deadline)?;
    let mut report = run.report;
    report.instance = job.id.to_string();
    let mut oracle = None;
    if with_oracle {
        let full = full_master(&prep.instance, caps, &run.outcome.spec, args.plan_limit, args.tol)?;
        let spec = &run.outcome.spec;
        let ours = lottery_objective(spec, &run.lottery);
        let theirs = lottery_objective(spec, &full.lottery(&prep.instance));
        report.oracle_gap = Some((ours - theirs).abs());
        oracle = Some((ours, theirs));
    }
    if args.export_conic {
        let master = build_master(&prep.instance, &run.outcome.columns, &run.outcome.spec)?;
        let path = args.out.join(format!("{}.cbf", stem(&report)));
        fs::write(&path, export_problem(&master.problem)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(RunResult { report, oracle })
}

fn stem(r: &SchemeReport) -> String {
    format!("{}_{}_{}", r.instance, r.concept, r.kind.tag())
}

fn pool(jobs: usize) -> anyhow::Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| anyhow!("thread pool: {e}"))
}

fn cmd_solve(args: &RunArgs) -> anyhow::Result<ExitCode> {
    let caps = Caps::new(args.cycle_cap, args.chain_cap)?;
    let insts = instances(args)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let jobs = jobs(args, &insts);
    let results: Vec<anyhow::Result<RunResult>> =
        pool(args.jobs)?.install(|| jobs.par_iter().map(|j| run_job(j, args, caps, args.oracle_check)).collect());

    let mut ok = true;
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    let mut pofs: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for (job, res) in jobs.iter().zip(results) {
        match res {
            Ok(r) => {
                let path = args.out.join(format!("{}.txt", stem(&r.report)));
                fs::write(&path, r.report.to_text()).with_context(|| format!("writing {}", path.display()))?;
                csv.push_str(&r.report.csv_row());
                csv.push('\n');
                if !r.report.converged {
                    ok = false;
                    eprintln!("{} {} {}: did not converge", job.id, job.concept, job.kind.tag());
                }
                if let Some(p) = r.report.pof {
                    pofs.entry((job.concept.to_string(), job.kind.tag().to_string()))
                        .or_default()
                        .push(p);
                }
                println!(
                    "{} {} {}: f1 = {} f2 = {} pof = {} support = {}",
                    job.id,
                    job.concept,
                    job.kind.tag(),
                    r.report.f1,
                    r.report.f2.map(|v| v.to_string()).unwrap_or_else(|| "none".into()),
                    r.report.pof.map(|v| v.to_string()).unwrap_or_else(|| "undefined".into()),
                    r.report.support_size
                );
            }
            Err(e) => {
                ok = false;
                eprintln!("{} {} {}: error: {e:#}", job.id, job.concept, job.kind.tag());
            }
        }
    }
    let csv_path = args.out.join("results.csv");
    fs::write(&csv_path, csv).with_context(|| format!("writing {}", csv_path.display()))?;
    if insts.len() > 1 {
        for ((c, k), v) in &pofs {
            if let Some((m, s, n)) = mean_std(v) {
                println!("summary {c} {k}: pof = {m:.6} +- {s:.6} over {n} runs");
            }
        }
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_oracle(args: &RunArgs) -> anyhow::Result<ExitCode> {
    let caps = Caps::new(args.cycle_cap, args.chain_cap)?;
    let insts = instances(args)?;
    let jobs = jobs(args, &insts);
    let results: Vec<anyhow::Result<RunResult>> =
        pool(args.jobs)?.install(|| jobs.par_iter().map(|j| run_job(j, args, caps, true)).collect());
    let mut ok = true;
    for (job, res) in jobs.iter().zip(results) {
        let r = res?;
        let (cg, full) = r.oracle.expect("oracle requested");
        let gap = (cg - full).abs();
        if gap > 1e-6 {
            ok = false;
        }
        println!(
            "gap {} {} {}: colgen = {cg:.9} oracle = {full:.9} gap = {gap:.3e}",
            job.id,
            job.concept,
            job.kind.tag()
        );
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_generate(args: &GenerateArgs) -> anyhow::Result<ExitCode> {
    if !(0.0..=1.0).contains(&args.ndd) || !(0.0..=1.0).contains(&args.density) {
        bail!("--ndd and --density must lie in [0, 1]");
    }
    if args.n == 0 {
        bail!("-n must be positive");
    }
    let text = generate_instance(args.n, args.ndd, args.density, args.seed).to_native();
    match &args.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sample(args: &SampleArgs) -> anyhow::Result<ExitCode> {
    let text = fs::read_to_string(&args.report).with_context(|| format!("reading {}", args.report.display()))?;
    let report = SchemeReport::parse(&text)?;
    if report.support.is_empty() {
        bail!("report has an empty support");
    }
    let probs: Vec<f64> = report.support.iter().map(|s| s.0).collect();
    for k in sample_indices(&probs, args.seed, args.draws) {
        println!("{}", report.support[k].1);
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Sample(a) => cmd_sample(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
