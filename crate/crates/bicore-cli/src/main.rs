use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bicore::analytics;
use bicore::butterfly;
use bicore::decomp;
use bicore::graph::stats;
use bicore::index::{
    load_index_expecting, query_stored, save_index, IndexKind, StoredIndex, TwoDIndex,
};
use bicore::peel::online_core;
use bicore::router::{
    cross_validate, default_grid, generate_training_set, hybrid_query, train_classifier,
    write_training_csv, Hyperparams, Indexes2D, Optimizer, ParamSpace, QueryRouter,
};
use bicore::{Core, Error, LoadedGraph, Result};

#[derive(Parser)]
#[command(
    name = "bicore",
    version,
    about = "Strength-aware (alpha,beta)-core tools for bipartite graphs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate an edge list and rewrite it in canonical form
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Structural summary of a graph
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = TextFormat::Text)]
        format: TextFormat,
    },
    /// Butterfly, caterpillar, and support counts
    Count {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = TextFormat::Text)]
        format: TextFormat,
    },
    /// Build a query index and write it next to the input
    BuildIndex {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        index_dir: Option<PathBuf>,
    },
    /// Compute one core
    Query {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        alpha: u32,
        #[arg(long)]
        beta: u32,
        #[arg(long)]
        tau: u32,
        #[arg(long, value_enum, default_value_t = Method::Online)]
        method: Method,
        #[arg(long, value_enum, default_value_t = CoreFormat::EdgeList)]
        format: CoreFormat,
        #[arg(long)]
        index_dir: Option<PathBuf>,
    },
    /// Emit the full strength decomposition as CSV
    Decompose {
        #[arg(long)]
        input: PathBuf,
        /// Recompute every level from scratch instead of reusing ladder state
        #[arg(long)]
        naive: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample timed queries, cross-validate, and save a strategy router
    TrainRouter {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        index_dir: Option<PathBuf>,
        /// Also write the labeled training set to this CSV file
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Time every query method on seeded random parameters
    Bench {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 50)]
        queries: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Density and clustering across cores
    Profile {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        alpha: Option<u32>,
        #[arg(long)]
        beta: Option<u32>,
        #[arg(long, default_value_t = 10_000)]
        max_rows: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Method {
    Online,
    Total,
    Ab,
    Bt,
    At,
    Hybrid,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Online => "online",
            Method::Total => "total",
            Method::Ab => "ab",
            Method::Bt => "bt",
            Method::At => "at",
            Method::Hybrid => "hybrid",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Total,
    Ab,
    Bt,
    At,
}

impl KindArg {
    fn kind(self) -> IndexKind {
        match self {
            KindArg::Total => IndexKind::Total,
            KindArg::Ab => IndexKind::Ab,
            KindArg::Bt => IndexKind::Bt,
            KindArg::At => IndexKind::At,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum CoreFormat {
    EdgeList,
    Csv,
    Json,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("bicore: {e}");
        std::process::exit(exit_code(&e));
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) => 1,
        Error::Parse { .. }
        | Error::InvalidEdge { .. }
        | Error::Io(_)
        | Error::Corrupt(_)
        | Error::IncompatibleIndex(_) => 2,
        Error::AlreadyDeleted { .. } => 3,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Ingest { input, output } => ingest(&input, &output),
        Cmd::Stats { input, format } => show_stats(&input, format),
        Cmd::Count { input, format } => show_counts(&input, format),
        Cmd::BuildIndex {
            input,
            kind,
            index_dir,
        } => build_index(&input, kind.kind(), index_dir),
        Cmd::Query {
            input,
            alpha,
            beta,
            tau,
            method,
            format,
            index_dir,
        } => query(&input, alpha, beta, tau, method, format, index_dir),
        Cmd::Decompose { input, naive, out } => decompose_cmd(&input, naive, out),
        Cmd::TrainRouter {
            input,
            samples,
            seed,
            index_dir,
            export,
        } => train_router(&input, samples, seed, index_dir, export),
        Cmd::Bench {
            input,
            queries,
            seed,
        } => bench(&input, queries, seed),
        Cmd::Profile {
            input,
            alpha,
            beta,
            max_rows,
            out,
        } => profile(&input, alpha, beta, max_rows, out),
    }
}

fn load(path: &Path) -> Result<LoadedGraph> {
    let f = File::open(path)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    LoadedGraph::load_edge_list(BufReader::new(f))
}

/// --index-dir beats BICORE_INDEX_DIR beats the input file's directory.
fn resolve_index_dir(flag: Option<PathBuf>, input: &Path) -> PathBuf {
    if let Some(d) = flag {
        return d;
    }
    if let Ok(d) = std::env::var("BICORE_INDEX_DIR") {
        if !d.is_empty() {
            return PathBuf::from(d);
        }
    }
    match input.parent() {
        Some(p) => p.to_path_buf(),
        None => PathBuf::from("."),
    }
}

fn file_stem(input: &Path) -> String {
    input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("graph")
        .to_string()
}

fn index_path(dir: &Path, stem: &str, kind: IndexKind) -> PathBuf {
    dir.join(format!("{stem}.{}.bcix", kind.as_str()))
}

fn router_path(dir: &Path, stem: &str) -> PathBuf {
    dir.join(format!("{stem}.router.bcrt"))
}

fn need_file(path: &Path, build_hint: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Io(io::Error::new(
            io::ErrorKind::NotFound,
            format!("{} not found; run `{build_hint}` first", path.display()),
        )))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(BufWriter::new(f))
}

fn ingest(input: &Path, output: &Path) -> Result<()> {
    let lg = load(input)?;
    let mut w = create(output)?;
    lg.write_edge_list(&mut w)?;
    w.flush()?;
    println!(
        "upper={} lower={} edges={}",
        lg.graph.upper_count(),
        lg.graph.lower_count(),
        lg.graph.edge_count()
    );
    Ok(())
}

fn show_stats(input: &Path, format: TextFormat) -> Result<()> {
    let lg = load(input)?;
    let s = stats(&lg.graph);
    let pairs: Vec<(&str, u64)> = vec![
        ("upper", lg.graph.upper_count() as u64),
        ("lower", lg.graph.lower_count() as u64),
        ("vertices", s.n as u64),
        ("edges", s.m as u64),
        ("d_max_upper", s.d_max_upper as u64),
        ("d_max_lower", s.d_max_lower as u64),
        ("degeneracy", s.degeneracy as u64),
        ("alpha_max", s.alpha_max as u64),
        ("beta_max", s.beta_max as u64),
        ("tau_max", s.tau_max as u64),
    ];
    emit_pairs(&pairs, &[], format)
}

fn show_counts(input: &Path, format: TextFormat) -> Result<()> {
    let lg = load(input)?;
    let g = &lg.graph;
    let butterflies = butterfly::count_butterflies_total(g);
    let caterpillars = butterfly::count_caterpillars(g);
    let max_support = butterfly::edge_supports(g).into_iter().max().unwrap_or(0);
    let ints: Vec<(&str, u64)> = vec![
        ("butterflies", butterflies),
        ("caterpillars", caterpillars),
        ("max_support", max_support as u64),
    ];
    let floats: Vec<(&str, f64)> = vec![
        ("clustering", analytics::clustering_coefficient(g)),
        ("density", analytics::graph_density(g)),
    ];
    emit_pairs(&ints, &floats, format)
}

fn emit_pairs(ints: &[(&str, u64)], floats: &[(&str, f64)], format: TextFormat) -> Result<()> {
    match format {
        TextFormat::Text => {
            for (k, v) in ints {
                println!("{k}={v}");
            }
            for (k, v) in floats {
                println!("{k}={v:.6}");
            }
        }
        TextFormat::Json => {
            let mut obj = serde_json::Map::new();
            for (k, v) in ints {
                obj.insert(k.to_string(), serde_json::json!(v));
            }
            for (k, v) in floats {
                obj.insert(k.to_string(), serde_json::json!(v));
            }
            println!("{}", serde_json::Value::Object(obj));
        }
    }
    Ok(())
}

fn build_index(input: &Path, kind: IndexKind, index_dir: Option<PathBuf>) -> Result<()> {
    let lg = load(input)?;
    let dir = resolve_index_dir(index_dir, input);
    let path = index_path(&dir, &file_stem(input), kind);
    let t0 = Instant::now();
    let idx = StoredIndex::build(&lg.graph, kind);
    let build_ms = t0.elapsed().as_secs_f64() * 1e3;
    save_index(&path, &idx, &lg.graph)?;
    let bytes = std::fs::metadata(&path)?.len();
    println!("kind={}", kind.as_str());
    println!("path={}", path.display());
    println!("build_ms={build_ms:.3}");
    println!("bytes={bytes}");
    Ok(())
}

fn query(
    input: &Path,
    alpha: u32,
    beta: u32,
    tau: u32,
    method: Method,
    format: CoreFormat,
    index_dir: Option<PathBuf>,
) -> Result<()> {
    if alpha == 0 || beta == 0 {
        return Err(Error::Usage("alpha and beta must be at least 1".into()));
    }
    let lg = load(input)?;
    let g = &lg.graph;
    let dir = resolve_index_dir(index_dir, input);
    let stem = file_stem(input);

    let load_stored = |kind: IndexKind| -> Result<StoredIndex> {
        let path = index_path(&dir, &stem, kind);
        need_file(
            &path,
            &format!(
                "bicore build-index --input {} --kind {}",
                input.display(),
                kind.as_str()
            ),
        )?;
        load_index_expecting(&path, g, kind)
    };

    let t0 = Instant::now();
    let core = match method {
        Method::Online => online_core(g, alpha, beta, tau),
        Method::Total => query_stored(&load_stored(IndexKind::Total)?, g, alpha, beta, tau),
        Method::Ab => query_stored(&load_stored(IndexKind::Ab)?, g, alpha, beta, tau),
        Method::Bt => query_stored(&load_stored(IndexKind::Bt)?, g, alpha, beta, tau),
        Method::At => query_stored(&load_stored(IndexKind::At)?, g, alpha, beta, tau),
        Method::Hybrid => {
            let idx = Indexes2D {
                ab: unwrap_2d(load_stored(IndexKind::Ab)?),
                bt: unwrap_2d(load_stored(IndexKind::Bt)?),
                at: unwrap_2d(load_stored(IndexKind::At)?),
            };
            let rpath = router_path(&dir, &stem);
            need_file(
                &rpath,
                &format!(
                    "bicore train-router --input {} --samples N",
                    input.display()
                ),
            )?;
            let router = QueryRouter::load(&rpath)?;
            hybrid_query(g, &idx, &router, alpha, beta, tau)
        }
    };
    let elapsed_ms = t0.elapsed().as_secs_f64() * 1e3;
    print_core(&lg, &core, method, alpha, beta, tau, elapsed_ms, format)
}

fn unwrap_2d(idx: StoredIndex) -> TwoDIndex {
    match idx {
        StoredIndex::TwoD(t) => t,
        StoredIndex::Total(_) => unreachable!("kind was checked at load"),
    }
}

#[allow(clippy::too_many_arguments)]
fn print_core(
    lg: &LoadedGraph,
    core: &Core,
    method: Method,
    alpha: u32,
    beta: u32,
    tau: u32,
    elapsed_ms: f64,
    format: CoreFormat,
) -> Result<()> {
    let hash = core.result_hash(lg);
    let mut pairs: Vec<(u64, u64)> = core.edges.iter().map(|&e| lg.external_edge(e)).collect();
    pairs.sort_unstable();
    let out = io::stdout();
    let mut w = BufWriter::new(out.lock());
    match format {
        CoreFormat::EdgeList => {
            for (u, v) in &pairs {
                writeln!(w, "{u} {v}")?;
            }
        }
        CoreFormat::Csv => {
            writeln!(w, "upper,lower")?;
            for (u, v) in &pairs {
                writeln!(w, "{u},{v}")?;
            }
        }
        CoreFormat::Json => {
            let edges: Vec<serde_json::Value> = pairs
                .iter()
                .map(|&(u, v)| serde_json::json!([u, v]))
                .collect();
            let obj = serde_json::json!({
                "method": method.name(),
                "alpha": alpha,
                "beta": beta,
                "tau": tau,
                "upper": core.upper.len(),
                "lower": core.lower.len(),
                "edges": core.edges.len(),
                "result_hash": format!("{hash:#018x}"),
                "elapsed_ms": elapsed_ms,
                "edge_list": edges,
            });
            writeln!(w, "{obj}")?;
            w.flush()?;
            return Ok(());
        }
    }
    writeln!(
        w,
        "# method={} alpha={} beta={} tau={} upper={} lower={} edges={} hash={:#018x} elapsed_ms={:.3}",
        method.name(),
        alpha,
        beta,
        tau,
        core.upper.len(),
        core.lower.len(),
        core.edges.len(),
        hash,
        elapsed_ms
    )?;
    w.flush()?;
    Ok(())
}

fn decompose_cmd(input: &Path, naive: bool, out: Option<PathBuf>) -> Result<()> {
    let lg = load(input)?;
    let t0 = Instant::now();
    let table = if naive {
        decomp::decompose(&lg.graph)
    } else {
        decomp::decompose_optimized(&lg.graph)
    };
    let elapsed_ms = t0.elapsed().as_secs_f64() * 1e3;
    let mut rows = 0u64;
    let mut sink = csv_sink(out)?;
    writeln!(sink, "alpha,beta,tau,layer,vertex")?;
    for alpha in 1..=table.alpha_max {
        for beta in 1..=table.beta_max(alpha) {
            for run in table.slice(alpha, beta).unwrap_or(&[]) {
                for &flat in &run.verts {
                    let (layer, ext) = external_vertex(&lg, flat);
                    writeln!(sink, "{alpha},{beta},{},{layer},{ext}", run.tau)?;
                    rows += 1;
                }
            }
        }
    }
    sink.flush()?;
    eprintln!(
        "alpha_max={} rows={rows} elapsed_ms={elapsed_ms:.3}",
        table.alpha_max
    );
    Ok(())
}

fn external_vertex(lg: &LoadedGraph, flat: u32) -> (&'static str, u64) {
    let (layer, id) = lg.graph.split_flat(flat);
    match layer {
        bicore::Layer::Upper => ("upper", lg.upper_ext[id as usize]),
        bicore::Layer::Lower => ("lower", lg.lower_ext[id as usize]),
    }
}

fn csv_sink(out: Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(create(&p)?),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn train_router(
    input: &Path,
    samples: usize,
    seed: u64,
    index_dir: Option<PathBuf>,
    export: Option<PathBuf>,
) -> Result<()> {
    let lg = load(input)?;
    let g = &lg.graph;
    let dir = resolve_index_dir(index_dir, input);
    let t0 = Instant::now();
    let idx = Indexes2D::build(g);
    eprintln!(
        "built 2d indexes in {:.3} ms",
        t0.elapsed().as_secs_f64() * 1e3
    );
    let data = generate_training_set(g, &idx, samples, seed)?;
    let norms = ParamSpace::of_graph(g).norms();
    let report = cross_validate(&data, norms, &default_grid(), seed)?;
    println!("hidden,optimizer,mean_tse,accuracy,selected");
    for (i, row) in report.rows.iter().enumerate() {
        println!(
            "{},{},{:.9},{:.4},{}",
            row.hp.hidden,
            row.hp.optimizer.name(),
            row.mean_tse,
            row.accuracy,
            (i == report.best) as u8
        );
    }
    let best = report.best_row().hp;
    let router = train_classifier(&data, norms, best, seed)?;
    let rpath = router_path(&dir, &file_stem(input));
    router.save(&rpath)?;
    eprintln!(
        "saved {} (hidden={} optimizer={} samples={})",
        rpath.display(),
        best.hidden,
        best.optimizer.name(),
        data.len()
    );
    if let Some(p) = export {
        let mut w = create(&p)?;
        write_training_csv(&mut w, &data)?;
        w.flush()?;
    }
    Ok(())
}

fn bench(input: &Path, queries: usize, seed: u64) -> Result<()> {
    let lg = load(input)?;
    let g = &lg.graph;
    let space = ParamSpace::of_graph(g);
    if space.size() == 0 {
        return Err(Error::Usage(
            "graph has no strength-1 cores, nothing to benchmark".into(),
        ));
    }
    if queries == 0 {
        return Err(Error::Usage("need at least one query".into()));
    }

    let t0 = Instant::now();
    let total = bicore::index::TotalIndex::build(g);
    eprintln!(
        "built total index in {:.3} ms",
        t0.elapsed().as_secs_f64() * 1e3
    );
    let t0 = Instant::now();
    let idx2 = Indexes2D::build(g);
    eprintln!(
        "built 2d indexes in {:.3} ms",
        t0.elapsed().as_secs_f64() * 1e3
    );
    let router = bench_router(g, &idx2, &space, seed);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let triples: Vec<(u32, u32, u32)> = (0..queries)
        .map(|_| space.decode(rng.gen_range(0..space.size())))
        .collect();

    println!("method,queries,mean_ms,median_ms,result_hash");
    let mut means = Vec::new();
    for method in [
        Method::Online,
        Method::Total,
        Method::Ab,
        Method::Bt,
        Method::At,
        Method::Hybrid,
    ] {
        let mut times = Vec::with_capacity(triples.len());
        let mut hash_bytes = Vec::with_capacity(triples.len() * 8);
        for &(a, b, t) in &triples {
            let t0 = Instant::now();
            let core = match method {
                Method::Online => online_core(g, a, b, t),
                Method::Total => total.query(g, a, b, t),
                Method::Ab => bicore::index::query_via_2d(&idx2.ab, g, a, b, t),
                Method::Bt => bicore::index::query_via_2d(&idx2.bt, g, a, b, t),
                Method::At => bicore::index::query_via_2d(&idx2.at, g, a, b, t),
                Method::Hybrid => hybrid_query(g, &idx2, &router, a, b, t),
            };
            times.push(t0.elapsed().as_secs_f64() * 1e3);
            hash_bytes.extend_from_slice(&core.result_hash(&lg).to_le_bytes());
        }
        let mean = times.iter().sum::<f64>() / times.len() as f64;
        let mut sorted = times.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = if sorted.len() % 2 == 1 {
            sorted[sorted.len() / 2]
        } else {
            (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) / 2.0
        };
        let agg = bicore::hash::fnv1a_64(hash_bytes.iter().copied());
        println!(
            "{},{},{mean:.6},{median:.6},{agg:#018x}",
            method.name(),
            triples.len()
        );
        means.push(mean);
    }
    if means[0] < means[1] {
        eprintln!(
            "warning: online mean {:.6} ms beat the total index mean {:.6} ms on this graph",
            means[0], means[1]
        );
    }
    Ok(())
}

/// Bench runs self-contained, so it trains a throwaway router on however
/// many samples the space allows rather than requiring a saved one.
fn bench_router(
    g: &bicore::BipartiteGraph,
    idx: &Indexes2D,
    space: &ParamSpace,
    seed: u64,
) -> QueryRouter {
    let norms = space.norms();
    let n = space.sample_cap().min(24) as usize;
    let data = match generate_training_set(g, idx, n, seed) {
        Ok(d) if !d.is_empty() => d,
        _ => return QueryRouter::untrained(norms, 10, seed),
    };
    let hp = Hyperparams {
        hidden: 20,
        optimizer: Optimizer::Lbfgs { epochs: 120 },
    };
    train_classifier(&data, norms, hp, seed).expect("training set is nonempty")
}

fn profile(
    input: &Path,
    alpha: Option<u32>,
    beta: Option<u32>,
    max_rows: usize,
    out: Option<PathBuf>,
) -> Result<()> {
    let lg = load(input)?;
    let rows = match (alpha, beta) {
        (Some(a), Some(b)) => {
            if a == 0 || b == 0 {
                return Err(Error::Usage("alpha and beta must be at least 1".into()));
            }
            analytics::tau_sweep(&lg.graph, a, b)
        }
        (None, None) => analytics::profile_cores(&lg.graph, max_rows),
        _ => {
            return Err(Error::Usage(
                "--alpha and --beta must be given together".into(),
            ))
        }
    };
    let mut sink = csv_sink(out)?;
    analytics::write_profile_csv(&mut sink, &rows)?;
    sink.flush()?;
    Ok(())
}
