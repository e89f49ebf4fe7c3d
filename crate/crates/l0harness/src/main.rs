//! Command-line harness: dataset generation, single sampling runs, repeated
//! benchmark trials with deviation metrics, and distinct-count estimation.

use std::fs::File;
use std::io::{self, BufReader};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use l0harness::csv::{parse_stream, write_stream};
use l0harness::json::Json;
use l0harness::metrics::deviation_metrics;
use l0harness::resources::measure_resources;
use l0harness::trials::{run_trials, SamplerMode, TrialSpec};
use l0sketch::datagen::{add_near_duplicates, random_dataset, rescale_min_distance, DuplicateMode, LabeledStream};
use l0sketch::{
    F0IwConfig, F0IwEstimator, F0SwConfig, F0SwEstimator, GridMode, IwConfig, IwSampler, SwConfig,
    SwSampler, Window,
};

#[derive(Parser)]
#[command(name = "l0harness", about = "Distinct sampling over noisy point streams", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled noisy stream as CSV.
    Gen(GenArgs),
    /// Run one sampler over a stream and print the sampled points.
    Sample(SampleArgs),
    /// Repeated-trial benchmark: deviation metrics plus time/space.
    Bench(BenchArgs),
    /// Estimate the number of distinct groups.
    F0(F0Args),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    /// Uniformly many near-duplicates per base point.
    Rand,
    /// Power-law near-duplicate counts.
    Powerlaw,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "rand")]
    kind: GenKind,
    /// Number of base points (groups).
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    dim: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Upper bound of the uniform duplicate count (rand kind).
    #[arg(long, default_value_t = 100)]
    kmax: u32,
    /// Emit a header line.
    #[arg(long)]
    header: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV file (x1..xd[,group_id][,timestamp]); mutually exclusive
    /// with --gen.
    #[arg(long, conflicts_with = "gen")]
    input: Option<PathBuf>,
    /// Skip one header line of --input.
    #[arg(long, requires = "input")]
    has_header: bool,
    /// Generate the stream in-process instead of reading a file.
    #[arg(long, value_enum)]
    gen: Option<GenKind>,
    #[arg(long, default_value_t = 500)]
    gen_n: usize,
    #[arg(long, default_value_t = 5)]
    gen_dim: usize,
    #[arg(long, default_value_t = 100)]
    gen_kmax: u32,
    /// Seed for the generated dataset (fixed across trials).
    #[arg(long, default_value_t = 1)]
    gen_seed: u64,
    /// Point dimension of --input.
    #[arg(long, requires = "input")]
    dim: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Iw,
    Sw,
}

#[derive(Clone, Copy, ValueEnum)]
enum WmodeArg {
    Seq,
    Time,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridModeArg {
    Auto,
    Planar,
    Highdim,
}

#[derive(Args)]
struct SamplerArgs {
    #[arg(long, value_enum, default_value = "iw")]
    mode: ModeArg,
    /// Duplicate distance threshold; defaults to 1/dim^1.5 (the generated
    /// datasets' intra-group diameter bound).
    #[arg(long)]
    alpha: Option<f64>,
    /// Window width (items or time units), sliding-window mode only.
    #[arg(long)]
    window: Option<u64>,
    #[arg(long, value_enum, default_value = "seq")]
    wmode: WmodeArg,
    /// Upper bound on the stream length; defaults to twice the input length
    /// rounded up to a power of two.
    #[arg(long)]
    m_bound: Option<u64>,
    #[arg(long, default_value_t = 3.2)]
    kappa0: f64,
    /// Number of samples per query (infinite window).
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "auto")]
    grid_mode: GridModeArg,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[arg(long, default_value_t = 10_000)]
    runs: u64,
    /// Full-stream scans for the time/space measurement.
    #[arg(long, default_value_t = 100)]
    scans: u64,
}

#[derive(Args)]
struct F0Args {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    /// Independent copies (infinite window) combined by a median.
    #[arg(long, default_value_t = 9)]
    copies: usize,
    /// Copies per averaging group (sliding window).
    #[arg(long, default_value_t = 16)]
    copies_per_group: usize,
    /// Averaging groups combined by a median (sliding window).
    #[arg(long, default_value_t = 9)]
    groups: usize,
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run() -> Result<(), Box<dyn std::error::Error>> {
    match Cli::parse().command {
        Command::Gen(args) => cmd_gen(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Bench(args) => cmd_bench(args),
        Command::F0(args) => cmd_f0(args),
    }
}

fn generate_stream(kind: GenKind, n: usize, dim: usize, kmax: u32, seed: u64) -> Result<LabeledStream, l0sketch::Error> {
    let base = random_dataset(n, dim, seed)?;
    let rescaled = rescale_min_distance(&base)?;
    let mode = match kind {
        GenKind::Rand => DuplicateMode::Uniform { max: kmax },
        GenKind::Powerlaw => DuplicateMode::PowerLaw,
    };
    add_near_duplicates(&rescaled, mode, seed.wrapping_add(1))
}

/// Loads or generates the stream. The second component tells whether labels
/// came with the data (generated data is always labeled).
fn load_data(args: &DataArgs) -> Result<(LabeledStream, bool, String), Box<dyn std::error::Error>> {
    if let Some(path) = &args.input {
        let dim = args.dim.ok_or("--input requires --dim")?;
        let file = BufReader::new(File::open(path)?);
        let parsed = parse_stream(file, dim, args.has_header)?;
        let alpha_truth = 1.0 / (dim as f64).powf(1.5);
        let source = format!("file:{}", path.display());
        match parsed.groups.is_some() {
            true => Ok((parsed.into_labeled(alpha_truth).expect("labels present"), true, source)),
            false => {
                let points = parsed.points.into_iter().map(|p| (p, 0)).collect::<Vec<_>>();
                let n = points.len();
                Ok((
                    LabeledStream {
                        points,
                        n_groups: n.max(1),
                        alpha_truth,
                        dim,
                    },
                    false,
                    source,
                ))
            }
        }
    } else {
        let kind = args.gen.unwrap_or(GenKind::Rand);
        let data = generate_stream(kind, args.gen_n, args.gen_dim, args.gen_kmax, args.gen_seed)?;
        let source = format!(
            "gen:{}:n={}:dim={}:seed={}",
            match kind {
                GenKind::Rand => "rand",
                GenKind::Powerlaw => "powerlaw",
            },
            args.gen_n,
            args.gen_dim,
            args.gen_seed
        );
        Ok((data, true, source))
    }
}

struct ResolvedSampler {
    mode: SamplerMode,
    alpha: f64,
    window: Option<Window>,
    wmode: WmodeArg,
    m_bound: u64,
    kappa0: f64,
    k: usize,
    seed: u64,
    grid_mode: GridMode,
}

fn resolve_sampler(
    args: &SamplerArgs,
    data: &LabeledStream,
) -> Result<ResolvedSampler, Box<dyn std::error::Error>> {
    let alpha = args.alpha.unwrap_or(data.alpha_truth);
    let mode = match args.mode {
        ModeArg::Iw => SamplerMode::Iw,
        ModeArg::Sw => SamplerMode::Sw,
    };
    let window = match (mode, args.window) {
        (SamplerMode::Sw, Some(w)) => Some(match args.wmode {
            WmodeArg::Seq => Window::sequence(w)?,
            WmodeArg::Time => Window::time(w)?,
        }),
        (SamplerMode::Sw, None) => return Err("--mode sw requires --window".into()),
        (SamplerMode::Iw, _) => None,
    };
    let m_bound = args
        .m_bound
        .unwrap_or_else(|| (2 * data.len() as u64).next_power_of_two().max(4));
    let grid_mode = match args.grid_mode {
        GridModeArg::Auto => GridMode::auto(data.dim),
        GridModeArg::Planar => GridMode::Planar,
        GridModeArg::Highdim => GridMode::HighDim,
    };
    Ok(ResolvedSampler {
        mode,
        alpha,
        window,
        wmode: args.wmode,
        m_bound,
        kappa0: args.kappa0,
        k: args.k,
        seed: args.seed,
        grid_mode,
    })
}

fn config_json(r: &ResolvedSampler, data: &LabeledStream, source: &str, runs: Option<u64>) -> Json {
    let mut fields = vec![
        (
            "mode",
            Json::Str(match r.mode {
                SamplerMode::Iw => "iw".into(),
                SamplerMode::Sw => "sw".into(),
            }),
        ),
        ("alpha", Json::Real(r.alpha)),
        ("dim", Json::UInt(data.dim as u64)),
        (
            "window",
            r.window.map_or(Json::Null, |w| Json::UInt(w.width())),
        ),
        (
            "wmode",
            Json::Str(match r.wmode {
                WmodeArg::Seq => "seq".into(),
                WmodeArg::Time => "time".into(),
            }),
        ),
        ("mBound", Json::UInt(r.m_bound)),
        ("kappa0", Json::Real(r.kappa0)),
        ("k", Json::UInt(r.k as u64)),
        ("seed", Json::UInt(r.seed)),
    ];
    if let Some(runs) = runs {
        fields.push(("runs", Json::UInt(runs)));
    }
    fields.push(("source", Json::Str(source.to_string())));
    fields.push(("points", Json::UInt(data.len() as u64)));
    fields.push(("groups", Json::UInt(data.n_groups as u64)));
    Json::obj(fields)
}

fn cmd_gen(args: GenArgs) -> Result<(), Box<dyn std::error::Error>> {
    let data = generate_stream(args.kind, args.n, args.dim, args.kmax, args.seed)?;
    let result = match &args.out {
        Some(path) => write_stream(File::create(path)?, &data, args.header),
        None => write_stream(io::stdout().lock(), &data, args.header),
    };
    match result {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn cmd_sample(args: SampleArgs) -> Result<(), Box<dyn std::error::Error>> {
    let (data, labeled, source) = load_data(&args.data)?;
    let r = resolve_sampler(&args.sampler, &data)?;
    let group_json = |idx: u64| {
        if labeled {
            data.group_of(idx).map_or(Json::Null, Json::UInt)
        } else {
            Json::Null
        }
    };
    let sampled: Vec<l0sketch::Point> = match r.mode {
        SamplerMode::Iw => {
            let mut cfg = IwConfig::new(r.alpha, data.dim, r.m_bound, r.seed);
            cfg.kappa0 = r.kappa0;
            cfg.k = r.k;
            cfg.grid_mode = r.grid_mode;
            let mut sampler = IwSampler::new(cfg)?;
            for (p, _) in &data.points {
                sampler.insert(p)?;
            }
            sampler.query(r.seed ^ 0xa11ce)
        }
        SamplerMode::Sw => {
            let mut cfg = SwConfig::new(r.alpha, data.dim, r.window.unwrap(), r.m_bound, r.seed);
            cfg.kappa0 = r.kappa0;
            cfg.grid_mode = r.grid_mode;
            let mut sampler = SwSampler::new(cfg)?;
            for (p, _) in &data.points {
                sampler.insert(p)?;
            }
            sampler.query(r.seed ^ 0xa11ce).into_iter().collect()
        }
    };
    let samples = sampled
        .iter()
        .map(|p| {
            Json::obj(vec![
                ("coords", Json::Array(p.coords.iter().map(|&c| Json::Real(c)).collect())),
                ("arrivalIndex", Json::UInt(p.arrival_index)),
                ("group", group_json(p.arrival_index)),
            ])
        })
        .collect();
    let out = Json::obj(vec![
        ("config", config_json(&r, &data, &source, None)),
        ("samples", Json::Array(samples)),
    ]);
    println!("{}", out.render());
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), Box<dyn std::error::Error>> {
    let (data, labeled, source) = load_data(&args.data)?;
    if !labeled {
        return Err("bench needs group labels: use --gen or a labeled input file".into());
    }
    let r = resolve_sampler(&args.sampler, &data)?;
    let spec = TrialSpec {
        mode: r.mode,
        alpha: r.alpha,
        m_bound: r.m_bound,
        kappa0: r.kappa0,
        k: r.k,
        grid_mode: r.grid_mode,
        window: r.window,
        runs: args.runs,
        base_seed: r.seed,
    };
    let outcome = run_trials(&data, &spec)?;
    let (std_nm, max_nm) = deviation_metrics(&outcome.dist);
    let resources = measure_resources(&data, &spec, args.scans)?;

    let hits = outcome
        .dist
        .hits
        .iter()
        .map(|(g, c)| (g.to_string(), Json::UInt(*c)))
        .collect();
    let out = Json::Object(vec![
        ("config".into(), config_json(&r, &data, &source, Some(args.runs))),
        ("hits".into(), Json::Object(hits)),
        ("trials".into(), Json::UInt(outcome.dist.trials)),
        ("stdDevNm".into(), Json::Real(std_nm)),
        ("maxDevNm".into(), Json::Real(max_nm)),
        ("pTimeMs".into(), Json::Real(resources.p_time_ms)),
        ("pSpaceWords".into(), Json::UInt(resources.p_space_words as u64)),
        ("errors".into(), Json::UInt(outcome.errors)),
    ]);
    println!("{}", out.render());
    Ok(())
}

fn cmd_f0(args: F0Args) -> Result<(), Box<dyn std::error::Error>> {
    let (data, _, source) = load_data(&args.data)?;
    let r = resolve_sampler(&args.sampler, &data)?;
    let (estimate, copies, errors) = match r.mode {
        SamplerMode::Iw => {
            let mut cfg = F0IwConfig::new(r.alpha, data.dim, r.m_bound, args.eps, r.seed);
            cfg.copies = args.copies;
            cfg.grid_mode = r.grid_mode;
            let mut est = F0IwEstimator::new(cfg)?;
            for (p, _) in &data.points {
                est.insert(p)?;
            }
            (Some(est.estimate()), args.copies as u64, 0u64)
        }
        SamplerMode::Sw => {
            let mut cfg = F0SwConfig::new(
                r.alpha,
                data.dim,
                r.window.unwrap(),
                r.m_bound,
                args.eps,
                r.seed,
            );
            cfg.copies_per_group = args.copies_per_group;
            cfg.groups = args.groups;
            cfg.kappa0 = r.kappa0;
            cfg.grid_mode = r.grid_mode;
            let mut est = F0SwEstimator::new(cfg)?;
            for (p, _) in &data.points {
                est.insert(p)?;
            }
            (est.estimate(), est.num_copies() as u64, est.insert_errors())
        }
    };
    let out = Json::obj(vec![
        ("config", config_json(&r, &data, &source, None)),
        ("eps", Json::Real(args.eps)),
        ("copies", Json::UInt(copies)),
        ("estimate", estimate.map_or(Json::Null, Json::Real)),
        ("errors", Json::UInt(errors)),
    ]);
    println!("{}", out.render());
    Ok(())
}
