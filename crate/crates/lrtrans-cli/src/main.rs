mod job;
mod report;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lrtrans::corpus::{corpus, random_generating};
use lrtrans::coset_geometry::{coset_intersection_graph, render_board_ascii, render_board_dot};
use lrtrans::nielsen_engine::{GenMultiset, Setting};
use lrtrans::solvers::{reduce_via_core, solve_batch, solve_general, solve_with, Rejection, SolveReport, Strategy};
use lrtrans::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use job::{parse_strategy, read, split_list, GroupSource, JobSpec, MultisetSpec};
use report::{verify, ReportDoc, SCHEMA};

#[derive(Parser)]
#[command(name = "lrtrans", version, about = "Nielsen moves into left-right transversals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the chessboards of a subgroup.
    Atlas(AtlasArgs),
    /// Move a generating multiset into a left-right transversal.
    Solve(SolveArgs),
    /// Re-check a solve report.
    Verify(VerifyArgs),
    /// Solve random instances over the built-in corpus.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GroupArgs {
    /// Named family such as `symmetric:4` or `frobenius:21`.
    #[arg(long, conflicts_with = "group_file")]
    family: Option<String>,
    /// Group file: generators, a blank line, then subgroup generators.
    #[arg(long)]
    group_file: Option<PathBuf>,
    /// Subgroup generators separated by `;`.
    #[arg(long)]
    subgroup: Option<String>,
    /// Job file in canonical `key value` form; flags override it.
    #[arg(long)]
    job: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Render {
    Ascii,
    Dot,
}

#[derive(Args)]
struct AtlasArgs {
    #[command(flatten)]
    group: GroupArgs,
    /// Elements to draw on the boards, or `random-generating:k`.
    #[arg(long)]
    multiset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    render: Option<Render>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    group: GroupArgs,
    /// Elements separated by `;`, or `random-generating:k`.
    #[arg(long)]
    multiset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Strategy tag or `auto` for the full ladder.
    #[arg(long)]
    strategy: Option<String>,
    /// Solve in the quotient by the core and lift the moves.
    #[arg(long)]
    via_core: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    group: GroupArgs,
    /// Report produced by `solve`.
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Random instances per group and subgroup.
    #[arg(long, default_value_t = 4)]
    per_pair: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest multiset size drawn.
    #[arg(long, default_value_t = 4)]
    max_size: usize,
}

enum Failure {
    Honest,
    Error(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Error(e.to_string())
    }
}

impl From<String> for Failure {
    fn from(e: String) -> Failure {
        Failure::Error(e)
    }
}

type Outcome = Result<(), Failure>;

fn job_from(args: &GroupArgs, multiset: Option<&str>, seed: Option<u64>, strategy: Option<&str>, via_core: bool) -> Result<JobSpec, Failure> {
    let mut job = match &args.job {
        Some(path) => JobSpec::from_text(&read(path)?)?,
        None => JobSpec { group: GroupSource::Family(String::new()), subgroup: None, multiset: None, seed: 0, strategy: None, via_core: false },
    };
    match (&args.family, &args.group_file) {
        (Some(f), _) => job.group = GroupSource::Family(f.clone()),
        (None, Some(p)) => job.group = GroupSource::File(p.clone()),
        (None, None) if args.job.is_none() => return Err(Failure::Error("one of --family, --group-file or --job is required".into())),
        _ => {}
    }
    if let Some(s) = &args.subgroup {
        job.subgroup = Some(split_list(s));
    }
    if let Some(m) = multiset {
        job.multiset = Some(MultisetSpec::parse(m)?);
    }
    if let Some(s) = seed {
        job.seed = s;
    }
    if let Some(s) = strategy {
        job.strategy = parse_strategy(s)?;
    }
    job.via_core |= via_core;
    Ok(job)
}

fn cmd_atlas(args: AtlasArgs) -> Outcome {
    let job = job_from(&args.group, args.multiset.as_deref(), args.seed, None, false)?;
    let st = job.setting()?;
    let filled = job.multiset(&st)?.map(|m| m.values()).unwrap_or_default();
    let (g, atlas) = (&st.group, &st.atlas);
    let mut out = String::new();
    if let Some(Render::Dot) = args.render {
        for b in 0..atlas.boards.len() {
            out.push_str(&render_board_dot(g, atlas, b, &filled, &[]));
        }
        print!("{out}");
        return Ok(());
    }
    let _ = writeln!(out, "group order {}, subgroup order {}, index {}", g.order(), st.subgroup.order(), st.index());
    let _ = writeln!(out, "boards {}", atlas.boards.len());
    for b in &atlas.boards {
        let d = b.dim();
        let kind = if b.self_inverse { "self-inverse".to_string() } else { format!("inverse of board {}", b.inverse_board) };
        let _ = writeln!(out, "board {}: {d}x{d}, {kind}, {} elements, contains {}", b.board_id, b.size(), g.name(b.min_element));
    }
    let gamma = coset_intersection_graph(g, &st.subgroup, &st.subgroup);
    let sizes: Vec<String> = gamma.component_sizes().iter().map(|(l, r)| format!("{l}x{r}")).collect();
    let _ = writeln!(out, "coset graph components {} [{}], all complete: {}", sizes.len(), sizes.join(" "), gamma.all_complete());
    if let Some(Render::Ascii) = args.render {
        for b in 0..atlas.boards.len() {
            out.push('\n');
            out.push_str(&render_board_ascii(g, atlas, b, &filled, &[]));
        }
    }
    print!("{out}");
    Ok(())
}

fn run_solver(job: &JobSpec, s: &GenMultiset) -> Result<SolveReport, Error> {
    if job.via_core {
        return reduce_via_core(s);
    }
    let Some(strategy) = job.strategy else { return solve_general(s) };
    match solve_with(strategy, s) {
        Err(e @ (Error::NotApplicable(_) | Error::Precondition(_) | Error::Resource { .. })) => {
            Ok(SolveReport::failure(s, vec![Rejection { strategy, reason: e.to_string() }]))
        }
        other => other,
    }
}

fn cmd_solve(args: SolveArgs) -> Outcome {
    let job = job_from(&args.group, args.multiset.as_deref(), args.seed, args.strategy.as_deref(), args.via_core)?;
    let st = job.setting()?;
    let s = job.multiset(&st)?.ok_or_else(|| "--multiset is required".to_string())?;
    if !s.generates() {
        return Err(Failure::Error("multiset does not generate the group".into()));
    }
    let report = run_solver(&job, &s)?;
    let doc = ReportDoc::new(&st.group, &job.to_text(), &report);
    let text = doc.to_json();
    match &args.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => print!("{text}"),
    }
    if report.success() {
        Ok(())
    } else {
        Err(Failure::Honest)
    }
}

fn cmd_verify(args: VerifyArgs) -> Outcome {
    let text = read(&args.report)?;
    let doc: ReportDoc = serde_json::from_str(&text).map_err(|e| format!("cannot parse report: {e}"))?;
    let mut job = match (&args.group.family, &args.group.group_file, &args.group.job) {
        (None, None, None) => JobSpec::from_text(&doc.job.join("\n"))?,
        _ => job_from(&args.group, None, None, None, false)?,
    };
    if args.group.subgroup.is_none() && job.subgroup.is_none() {
        job.subgroup = JobSpec::from_text(&doc.job.join("\n")).ok().and_then(|j| j.subgroup);
    }
    let st = job.setting()?;
    let msg = verify(&doc, &st)?;
    println!("{msg}");
    Ok(())
}

#[derive(Serialize)]
struct SweepSummary {
    schema: u32,
    instances: usize,
    solved: usize,
    failed: usize,
    errors: usize,
    by_strategy: BTreeMap<String, usize>,
}

fn cmd_sweep(args: SweepArgs) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut instances = Vec::new();
    for cg in corpus() {
        for h in &cg.subgroups {
            let st = Setting::new(cg.group.clone(), h.clone());
            let top = st.index().min(args.max_size);
            for i in 0..args.per_pair {
                let k = 1 + i % top;
                if let Ok(v) = random_generating(&cg.group, k, &mut rng) {
                    instances.push(GenMultiset::new(st.clone(), &v)?);
                }
            }
        }
    }
    let results = run_batch(&instances, args.jobs)?;
    let mut summary = SweepSummary { schema: SCHEMA, instances: results.len(), solved: 0, failed: 0, errors: 0, by_strategy: BTreeMap::new() };
    for r in &results {
        match r {
            Ok(rep) if rep.success() => {
                summary.solved += 1;
                *summary.by_strategy.entry(rep.theorem_used.map_or("none", Strategy::tag).to_string()).or_default() += 1;
            }
            Ok(_) => summary.failed += 1,
            Err(_) => summary.errors += 1,
        }
    }
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    if summary.errors > 0 {
        return Err(Failure::Error(format!("{} instances raised errors", summary.errors)));
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn run_batch(instances: &[GenMultiset], jobs: usize) -> Result<Vec<lrtrans::Result<SolveReport>>, Failure> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| e.to_string())?;
    Ok(pool.install(|| solve_batch(instances)))
}

#[cfg(not(feature = "parallel"))]
fn run_batch(instances: &[GenMultiset], _jobs: usize) -> Result<Vec<lrtrans::Result<SolveReport>>, Failure> {
    Ok(solve_batch(instances))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Atlas(a) => cmd_atlas(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Honest) => ExitCode::from(2),
        Err(Failure::Error(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
