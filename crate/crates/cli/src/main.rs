//! `bhd`: Bregman-Hausdorff divergences between point clouds.
//!
//! Subcommands:
//! * `hausdorff` -- one-sided primal/dual Bregman-Hausdorff divergence
//! * `chernoff-hausdorff` -- symmetric Chernoff-Bregman-Hausdorff distance
//! * `gen` -- synthetic uniform-simplex clouds
//! * `bench` -- timing table comparing backends
//!
//! Exit codes: 0 success, 2 usage, 3 parse/IO, 4 domain/validation,
//! 5 convergence.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use bregman::data::DEFAULT_SIMPLEX_TOL;
use bregman::hausdorff::{hausdorff_par, HausdorffResult, RunStats};
use bregman::{
    chernoff_hausdorff, hausdorff, load_points, sample_simplex, save_points, Backend,
    ChernoffConfig, Error, Generator, PointCloud, Validation, Variant,
};

#[derive(Parser)]
#[command(name = "bhd", version, about = "Bregman-Hausdorff divergences between point clouds")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// One-sided Bregman-Hausdorff divergence between two CSV clouds
    Hausdorff(HausdorffArgs),
    /// Symmetric Chernoff-Bregman-Hausdorff distance
    ChernoffHausdorff(ChernoffArgs),
    /// Generate a uniform-simplex point cloud
    Gen(GenArgs),
    /// Compare backend timings on synthetic data
    Bench(BenchArgs),
}

#[derive(Args)]
struct DataArgs {
    /// CSV file for the set P (sup side)
    #[arg(long)]
    p: String,
    /// CSV file for the set Q (inf side)
    #[arg(long)]
    q: String,
    /// Divergence: se, kl, gkl, or is
    #[arg(long, default_value = "kl")]
    divergence: String,
    /// Hausdorff variant: primal or dual
    #[arg(long, default_value = "primal")]
    variant: String,
    /// Input validation: none, positive, or simplex
    #[arg(long, default_value = "none")]
    validate: String,
    /// Per-point tolerance on |sum - 1| under simplex validation
    #[arg(long, default_value_t = DEFAULT_SIMPLEX_TOL)]
    simplex_tol: f64,
    /// Output format: json or table
    #[arg(long, default_value = "table")]
    output: String,
}

#[derive(Args)]
struct HausdorffArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Backend: linear, kdtree, or shell
    #[arg(long, default_value = "shell")]
    backend: String,
    /// Also compute the reverse direction H(Q || P)
    #[arg(long)]
    both_directions: bool,
    /// Worker threads; 1 means sequential (the default, for reproducible
    /// timings)
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct ChernoffArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Backend: linear, kdtree, or shell
    #[arg(long, default_value = "shell")]
    backend: String,
    /// Equal-divergence tolerance for the bisection
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    /// Bisection iteration budget
    #[arg(long, default_value_t = 200)]
    max_iterations: u32,
    /// Refuse to build Chernoff sets larger than this (|P| x |Q| is
    /// quadratic; subsample the inputs instead)
    #[arg(long, default_value_t = 10_000_000)]
    max_pairs: u64,
}

#[derive(Args)]
struct GenArgs {
    /// Point dimension (d >= 2)
    #[arg(long)]
    dim: usize,
    /// Number of points
    #[arg(long)]
    count: usize,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path
    #[arg(long)]
    out: String,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated dimensions, e.g. 10,50
    #[arg(long, default_value = "10")]
    dims: String,
    /// Sizes as |P|,|Q|
    #[arg(long, default_value = "20000,2000")]
    sizes: String,
    /// Comma-separated divergences
    #[arg(long, default_value = "kl")]
    divergences: String,
    /// Comma-separated backends
    #[arg(long, default_value = "linear,kdtree,shell")]
    backends: String,
    /// Runs per cell; the median is reported
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hausdorff variant
    #[arg(long, default_value = "primal")]
    variant: String,
    /// Output format: json or table
    #[arg(long, default_value = "table")]
    output: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Hausdorff(args) => cmd_hausdorff(args),
        Cmd::ChernoffHausdorff(args) => cmd_chernoff(args),
        Cmd::Gen(args) => cmd_gen(args),
        Cmd::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Usage(_) | Error::DimensionMismatch { .. } => 2,
        Error::Parse { .. } | Error::Io { .. } => 3,
        Error::Domain(_) | Error::Validation(_) => 4,
        Error::Convergence { .. } => 5,
    }
}

/// Renders a possibly infinite value. JSON has no infinity literal, so
/// +infinity becomes the string "inf"; the table rendering prints the same
/// token.
fn json_real(v: f64) -> serde_json::Value {
    if v.is_infinite() {
        json!("inf")
    } else {
        json!(v)
    }
}

fn fmt_real(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v}")
    }
}

fn parse_output(s: &str) -> Result<bool, Error> {
    match s {
        "json" => Ok(true),
        "table" => Ok(false),
        other => Err(Error::Usage(format!("unknown output format '{other}' (expected json or table)"))),
    }
}

struct LoadedPair {
    p: PointCloud,
    q: PointCloud,
    g: Generator,
    variant: Variant,
    json: bool,
}

fn load_pair(data: &DataArgs) -> Result<LoadedPair, Error> {
    let g: Generator = data.divergence.parse()?;
    let variant: Variant = data.variant.parse()?;
    let validation: Validation = data.validate.parse()?;
    let json = parse_output(&data.output)?;
    let p = load_points(&data.p, validation, data.simplex_tol)?;
    let q = load_points(&data.q, validation, data.simplex_tol)?;
    Ok(LoadedPair { p, q, g, variant, json })
}

fn stats_json(stats: &RunStats) -> serde_json::Value {
    json!({
        "build_secs": stats.build_secs,
        "query_secs": stats.query_secs,
        "queries": stats.queries,
        "points_visited": stats.points_visited,
        "nodes_visited": stats.nodes_visited,
        "early_terminations": stats.early_terminations,
        "hit_infinite": stats.hit_infinite,
    })
}

fn result_json(r: &HausdorffResult) -> serde_json::Value {
    json!({
        "value": json_real(r.value.get()),
        "witness": r.witness.map(|(i, j)| json!([i, j])).unwrap_or(json!(null)),
        "counters": stats_json(&r.stats),
    })
}

fn print_result_table(label: &str, r: &HausdorffResult, units: &str) {
    println!("{label:<12} {} {units}", fmt_real(r.value.get()));
    match r.witness {
        Some((i, j)) => println!("  witness     ({i}, {j})"),
        None => println!("  witness     none (all queries shell-terminated)"),
    }
    println!("  build       {:.6}s", r.stats.build_secs);
    println!("  query       {:.6}s", r.stats.query_secs);
    println!(
        "  counters    queries={} points={} nodes={} early={}",
        r.stats.queries, r.stats.points_visited, r.stats.nodes_visited, r.stats.early_terminations
    );
}

fn cmd_hausdorff(args: HausdorffArgs) -> Result<(), Error> {
    let backend: Backend = args.backend.parse()?;
    let pair = load_pair(&args.data)?;
    if args.threads == 0 {
        return Err(Error::Usage("--threads must be at least 1".into()));
    }

    let run = |p: &PointCloud, q: &PointCloud| -> Result<HausdorffResult, Error> {
        if args.threads > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(args.threads)
                .build()
                .map_err(|e| Error::Usage(format!("cannot build thread pool: {e}")))?;
            pool.install(|| hausdorff_par(p, q, pair.g, pair.variant, backend))
        } else {
            hausdorff(p, q, pair.g, pair.variant, backend)
        }
    };

    let forward = run(&pair.p, &pair.q)?;
    let backward = if args.both_directions {
        Some(run(&pair.q, &pair.p)?)
    } else {
        None
    };

    if pair.json {
        let mut results = vec![result_json(&forward)];
        if let Some(b) = &backward {
            results.push(result_json(b));
        }
        let report = json!({
            "command": "hausdorff",
            "divergence": pair.g.name(),
            "variant": pair.variant.to_string(),
            "backend": backend.name(),
            "units": pair.g.units(),
            "directions": if backward.is_some() { json!(["P||Q", "Q||P"]) } else { json!(["P||Q"]) },
            "results": results,
        });
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!(
            "divergence={} variant={} backend={} |P|={} |Q|={}",
            pair.g.name(),
            pair.variant,
            backend.name(),
            pair.p.len(),
            pair.q.len()
        );
        print_result_table("H(P||Q)", &forward, pair.g.units());
        if let Some(b) = &backward {
            print_result_table("H(Q||P)", b, pair.g.units());
        }
    }
    Ok(())
}

fn cmd_chernoff(args: ChernoffArgs) -> Result<(), Error> {
    let backend: Backend = args.backend.parse()?;
    let pair = load_pair(&args.data)?;
    let pairs = pair.p.len() as u64 * pair.q.len() as u64;
    if pairs > args.max_pairs {
        return Err(Error::Usage(format!(
            "Chernoff set would hold {pairs} points, above the --max-pairs budget of {}; \
             subsample the inputs",
            args.max_pairs
        )));
    }
    let cfg = ChernoffConfig { tolerance: args.tolerance, max_iterations: args.max_iterations };
    let out = chernoff_hausdorff(pair.g, &pair.p, &pair.q, pair.variant, backend, &cfg)?;

    if pair.json {
        let report = json!({
            "command": "chernoff-hausdorff",
            "divergence": pair.g.name(),
            "variant": pair.variant.to_string(),
            "backend": backend.name(),
            "units": pair.g.units(),
            "chernoff_set_size": out.set_size,
            "max_equal_divergence_residual": out.max_residual,
            "result": result_json(&out.result),
        });
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!(
            "divergence={} variant={} backend={} |P|={} |Q|={} |C|={}",
            pair.g.name(),
            pair.variant,
            backend.name(),
            pair.p.len(),
            pair.q.len(),
            out.set_size
        );
        print_result_table("CH(P,Q)", &out.result, pair.g.units());
        println!("  residual    {:.3e}", out.max_residual);
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<(), Error> {
    let cloud = sample_simplex(args.dim, args.count, args.seed)?;
    save_points(&cloud, &args.out)?;
    eprintln!("wrote {} points of dimension {} to {}", cloud.len(), cloud.dim(), args.out);
    Ok(())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Error>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|e| Error::Usage(format!("bad {what} entry '{tok}': {e}")))
        })
        .collect()
}

fn cmd_bench(args: BenchArgs) -> Result<(), Error> {
    let dims: Vec<usize> = parse_list(&args.dims, "--dims")?;
    let sizes: Vec<usize> = parse_list(&args.sizes, "--sizes")?;
    let divergences: Vec<Generator> = args
        .divergences
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()?;
    let backends: Vec<Backend> = args
        .backends
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()?;
    let variant: Variant = args.variant.parse()?;
    let json = parse_output(&args.output)?;
    if sizes.len() != 2 {
        return Err(Error::Usage("--sizes must be |P|,|Q|".into()));
    }
    if args.repeats == 0 {
        return Err(Error::Usage("--repeats must be at least 1".into()));
    }

    let mut records = Vec::new();
    for (di, &dim) in dims.iter().enumerate() {
        let p = sample_simplex(dim, sizes[0], args.seed + 2 * di as u64)?;
        let q = sample_simplex(dim, sizes[1], args.seed + 2 * di as u64 + 1)?;
        for &g in &divergences {
            let mut medians: Vec<(Backend, f64, f64)> = Vec::new();
            for &backend in &backends {
                let mut times = Vec::with_capacity(args.repeats);
                let mut value = 0.0;
                for _ in 0..args.repeats {
                    let start = std::time::Instant::now();
                    let r = hausdorff(&p, &q, g, variant, backend)?;
                    times.push(start.elapsed().as_secs_f64());
                    value = r.value.get();
                }
                times.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let median = times[times.len() / 2];
                medians.push((backend, median, value));
            }
            let speedup = {
                let lin = medians.iter().find(|(b, ..)| *b == Backend::Linear);
                let sh = medians.iter().find(|(b, ..)| *b == Backend::Shell);
                match (lin, sh) {
                    (Some((_, tl, _)), Some((_, ts, _))) if *ts > 0.0 => Some(tl / ts),
                    _ => None,
                }
            };
            for (backend, median, value) in &medians {
                records.push(json!({
                    "dim": dim,
                    "n_p": sizes[0],
                    "n_q": sizes[1],
                    "divergence": g.name(),
                    "backend": backend.name(),
                    "median_secs": median,
                    "value": json_real(*value),
                }));
            }
            if !json {
                print!("dim={dim:<4} divergence={:<4}", g.name());
                for (backend, median, _) in &medians {
                    print!(" {}={:.4}s", backend.name(), median);
                }
                match speedup {
                    Some(s) => println!(" speedup(shell/linear)={s:.1}x"),
                    None => println!(),
                }
            } else if let Some(s) = speedup {
                records.push(json!({
                    "dim": dim,
                    "divergence": g.name(),
                    "backend": "speedup_shell_vs_linear",
                    "ratio": s,
                }));
            }
        }
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&json!({
            "command": "bench",
            "variant": variant.to_string(),
            "repeats": args.repeats,
            "records": records,
        })).unwrap());
    }
    Ok(())
}
