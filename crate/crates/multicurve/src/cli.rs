//! Command-line front end: reproducible tables, samplers, and convergence
//! demonstrations, plus the correlator cache lifecycle.
//!
//! Output contract:
//!
//! * Every output file starts with a header carrying the crate version, the
//!   run configuration, and the SHA-256 checksum of the correlator cache
//!   state at startup.
//! * Identical configurations produce byte-identical output. `--threads`
//!   only distributes deterministic per-draw substreams and never changes
//!   output bytes, so it is not echoed; file paths are likewise omitted
//!   (the cache is identified by its content checksum instead).
//! * CSV is RFC-4180 with a `.` decimal point. JSON mirrors the CSV columns
//!   one to one; every cell is the same string as its CSV rendering, floats
//!   with 17 significant digits, rationals as `p/q`.
//! * Exit codes: 0 success, 1 failed selftest or I/O failure, 2 invalid
//!   arguments, 3 budget exceeded, 4 cache corruption.
//!
//! Cache files wrap the correlator table's canonical serialization in one
//! `sha256 <hex>` line, so any corruption (including whole-record
//! truncation) is detected on load; rewriting a loaded cache is
//! byte-idempotent.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::asymptotics::{
    mp_asymptotic_multicurve, s_asymptote, s_direct, s_truncated, zeta_weights_f64,
    AdmissiblePair,
};
use crate::exact::{format_f64, Rational};
use crate::graphs::{enumerate_stable_graphs, StableGraph};
use crate::intersection::CorrelatorTable;
use crate::measure::{
    mass_asymptote, truncated_mass_b, MulticurveMeasure, MultiplicityBound,
};
use crate::moments::{
    mp_exact_multicurve, mp_gem_closed, pd_marginal_moment, MomentAccumulator, MomentIndex,
};
use crate::sampling::{
    size_biased_reorder, LargeGenusSampler, LengthVector, MulticurveSampler, RandomStream,
    VectorOrdering, EXACT_CORRELATOR_MAX_GENUS, EXACT_SAMPLER_MAX_GENUS,
};
use crate::{Error, Result};

/// Published sorted-component means of PD(1/2): `(E V_1, E V_2, E V_3)`.
pub const PD_SORTED_TARGETS: [f64; 3] = [0.758, 0.171, 0.049];

/// Index cutoff when summing sorted-marginal quadratures: beyond `j = 60`
/// the marginals carry no mass at double precision for θ ≤ 3/2.
const PD_MARGINAL_CUTOFF: u32 = 60;

#[derive(Parser)]
#[command(
    name = "mcl",
    version,
    about = "Random multicurve statistics: censuses, measures, samplers, moments, and limit-law tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct OutputOpts {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv, env = "MCL_FORMAT")]
    format: OutputFormat,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true, env = "MCL_OUT")]
    out: Option<PathBuf>,

    /// Correlator cache file: verified on load, rewritten at exit, created
    /// when missing.
    #[arg(long, global = true, env = "MCL_CACHE")]
    cache: Option<PathBuf>,

    /// Worker threads; the thread count never changes output bytes.
    #[arg(long, global = true, default_value_t = 1, env = "MCL_THREADS")]
    threads: usize,

    /// Floating-point precision in bits, recorded in the header. Exact
    /// rational arithmetic is used wherever results are exact; floating
    /// paths are IEEE doubles, so only 53 is accepted.
    #[arg(long, global = true, default_value_t = 53, env = "MCL_PRECISION_BITS")]
    precision_bits: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the stable-graph census of one genus with automorphism counts.
    Graphs(GraphsArgs),
    /// One ψ-class correlator ⟨τ_{d_1}⋯τ_{d_n}⟩_g.
    Correlator(CorrelatorArgs),
    /// Kontsevich volume polynomial V_{g,n}, one monomial per row.
    VolumePoly(VolumePolyArgs),
    /// Topological-type measure table with b, the truncated b̃, and the
    /// growth-law ratio.
    Weights(WeightsArgs),
    /// Draw normalized multicurve length vectors, one component per row.
    Sample(SampleArgs),
    /// Length-spectrum moments computed by several methods side by side.
    Moments(MomentsArgs),
    /// Genus sweep of sorted top-3 component means toward the PD(1/2) values.
    Converge(ConvergeArgs),
    /// Composition-sum tables: direct, truncated, and growth-law values.
    Asym(AsymArgs),
    /// Run the built-in verification suite; exits 1 on any failure.
    Selftest,
}

#[derive(Args)]
struct GraphsArgs {
    /// Surface genus (≥ 2).
    #[arg(long, env = "MCL_GENUS")]
    genus: u32,
}

#[derive(Args)]
struct CorrelatorArgs {
    /// Genus of the moduli space.
    #[arg(long, env = "MCL_GENUS")]
    genus: u32,

    /// ψ-exponents d_1,…,d_n (comma separated).
    #[arg(long, value_delimiter = ',', required = true, env = "MCL_D")]
    d: Vec<u32>,
}

#[derive(Args)]
struct VolumePolyArgs {
    /// Genus of the moduli space.
    #[arg(long, env = "MCL_GENUS")]
    genus: u32,

    /// Number of variables (marked points).
    #[arg(long, env = "MCL_N")]
    n: usize,
}

#[derive(Args)]
struct WeightsArgs {
    /// Surface genus (≥ 2).
    #[arg(long, env = "MCL_GENUS")]
    genus: u32,

    /// Multiplicity bound: a positive integer or `inf`.
    #[arg(long, env = "MCL_M")]
    m: MultiplicityBound,

    /// Truncation parameter κ > 1 for the truncated mass b̃.
    #[arg(long, default_value_t = 1.5, env = "MCL_KAPPA")]
    kappa: f64,
}

#[derive(Args)]
struct SampleArgs {
    /// Surface genus (≥ 2).
    #[arg(long, env = "MCL_GENUS")]
    genus: u32,

    /// Multiplicity bound: a positive integer or `inf`.
    #[arg(long, env = "MCL_M")]
    m: MultiplicityBound,

    /// Number of draws; draw i consumes substream i of the seed.
    #[arg(long, default_value_t = 1000, env = "MCL_SAMPLES")]
    samples: u32,

    /// RNG seed.
    #[arg(long, default_value_t = 0, env = "MCL_SEED")]
    seed: u64,

    /// Component ordering: unordered (edge order), size_biased, or sorted.
    #[arg(long, default_value = "unordered", env = "MCL_ORDERING")]
    ordering: VectorOrdering,

    /// Use the truncated large-genus sampler with approximate correlator
    /// factors instead of the exact census sampler.
    #[arg(long, env = "MCL_APPROX_CORRELATORS")]
    approx_correlators: bool,

    /// κ > 1 for the large-genus sampler's loop bound.
    #[arg(long, default_value_t = 1.5, env = "MCL_KAPPA")]
    kappa: f64,
}

#[derive(Args)]
struct MomentsArgs {
    /// Surface genus (≥ 2).
    #[arg(long, env = "MCL_GENUS")]
    genus: u32,

    /// Multiplicity bound: a positive integer or `inf`.
    #[arg(long, env = "MCL_M")]
    m: MultiplicityBound,

    /// Moment index p_1,…,p_r (comma separated).
    #[arg(long, value_delimiter = ',', required = true, env = "MCL_P")]
    p: Vec<u64>,

    /// Methods to tabulate, one row each.
    #[arg(long, value_delimiter = ',', value_enum, default_value = "exact,mc", env = "MCL_METHOD")]
    method: Vec<MomentMethod>,

    /// Monte Carlo draws for the mc method.
    #[arg(long, default_value_t = 1_000_000, env = "MCL_SAMPLES")]
    samples: u32,

    /// RNG seed for the mc method.
    #[arg(long, default_value_t = 0, env = "MCL_SEED")]
    seed: u64,

    /// κ > 1 for the truncated and asymptotic methods.
    #[arg(long, default_value_t = 1.5, env = "MCL_KAPPA")]
    kappa: f64,

    /// θ for the gem and pd methods.
    #[arg(long, default_value_t = 0.5, env = "MCL_THETA")]
    theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MomentMethod {
    /// Full-census exact moment (genus ≤ 6).
    Exact,
    /// Exact moment of the κ-truncated one-vertex measure.
    Truncated,
    /// Large-genus growth-law evaluation.
    Asymptotic,
    /// Size-biased Monte Carlo with the exact sampler.
    Mc,
    /// GEM(θ) closed form.
    Gem,
    /// PD(θ) sorted-marginal quadrature (single-index p only).
    Pd,
}

impl MomentMethod {
    fn name(self) -> &'static str {
        match self {
            MomentMethod::Exact => "exact",
            MomentMethod::Truncated => "truncated",
            MomentMethod::Asymptotic => "asymptotic",
            MomentMethod::Mc => "mc",
            MomentMethod::Gem => "gem",
            MomentMethod::Pd => "pd",
        }
    }
}

#[derive(Args)]
struct ConvergeArgs {
    /// Genus sweep (comma separated, each ≥ 2).
    #[arg(long, value_delimiter = ',', default_value = "2,8,64,512", env = "MCL_GENUS")]
    genus: Vec<u32>,

    /// Multiplicity bound: a positive integer or `inf`.
    #[arg(long, default_value = "inf", env = "MCL_M")]
    m: MultiplicityBound,

    /// Draws per genus; draw i of genus entry e consumes substream e·2³² + i.
    #[arg(long, default_value_t = 100_000, env = "MCL_SAMPLES")]
    samples: u32,

    /// RNG seed.
    #[arg(long, default_value_t = 0, env = "MCL_SEED")]
    seed: u64,

    /// κ > 1 for the large-genus sampler's loop bound.
    #[arg(long, default_value_t = 1.5, env = "MCL_KAPPA")]
    kappa: f64,

    /// Use the truncated sampler with approximate correlator factors for
    /// every genus, not only where the census or correlators force it.
    #[arg(long, env = "MCL_APPROX_CORRELATORS")]
    approx_correlators: bool,
}

#[derive(Args)]
struct AsymArgs {
    /// Weight sequence: partial ζ_m with m a positive integer or `inf`.
    #[arg(long, env = "MCL_M")]
    m: MultiplicityBound,

    /// Moment index p_1,…,p_r (comma separated).
    #[arg(long, value_delimiter = ',', required = true, env = "MCL_P")]
    p: Vec<u64>,

    /// Values of n to tabulate (comma separated, each ≥ 1).
    #[arg(long, value_delimiter = ',', required = true, env = "MCL_N")]
    n: Vec<u32>,

    /// κ > 1 for the truncated column.
    #[arg(long, default_value_t = 1.5, env = "MCL_KAPPA")]
    kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Ordered `key=value` configuration echo for output headers.
struct RunConfig {
    command: &'static str,
    pairs: Vec<(&'static str, String)>,
}

impl RunConfig {
    fn new(command: &'static str) -> RunConfig {
        RunConfig { command, pairs: Vec::new() }
    }

    fn push(&mut self, key: &'static str, value: impl ToString) {
        self.pairs.push((key, value.to_string()));
    }
}

/// One rectangular result table; every cell is already rendered.
struct Table {
    columns: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

/// Parse arguments from the process environment, run, and return the exit
/// code for the process.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mcl: {e}");
            match e {
                Error::InvalidArgument(_) => 2,
                Error::BudgetExceeded(_) => 3,
                Error::CacheCorrupt(_) => 4,
                Error::Io(_) => 1,
            }
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let opts = cli.output;
    if opts.threads == 0 {
        return Err(Error::invalid("--threads must be ≥ 1"));
    }
    if opts.precision_bits != 53 {
        return Err(Error::invalid(
            "only IEEE double precision is implemented; --precision-bits must be 53",
        ));
    }

    if matches!(cli.command, Command::Selftest) {
        return selftest_command();
    }

    let (table, checksum) = open_cache(opts.cache.as_deref())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let (config, result) = pool.install(|| match cli.command {
        Command::Graphs(a) => graphs_command(&a),
        Command::Correlator(a) => correlator_command(&table, &a),
        Command::VolumePoly(a) => volume_poly_command(&table, &a),
        Command::Weights(a) => weights_command(&table, &a),
        Command::Sample(a) => sample_command(&table, &a),
        Command::Moments(a) => moments_command(&table, &a),
        Command::Converge(a) => converge_command(&table, &a),
        Command::Asym(a) => asym_command(&a),
        Command::Selftest => unreachable!("handled above"),
    })?;
    write_output(&opts, &config, &checksum, &result)?;
    if let Some(path) = &opts.cache {
        save_cache(&table, path)?;
    }
    Ok(0)
}

fn selftest_command() -> Result<i32> {
    let exe = std::env::current_exe().ok();
    let mut passed = 0usize;
    let results = crate::selftest::run_all_with(exe.as_deref(), &mut |r| {
        println!("{}", r.line());
    });
    for r in &results {
        if r.passed {
            passed += 1;
        }
    }
    println!("{passed}/{} checks passed", results.len());
    Ok(if passed == results.len() { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// Cache lifecycle

const CACHE_CHECKSUM_PREFIX: &str = "sha256 ";

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        write!(out, "{byte:02x}").expect("write to string");
    }
    out
}

/// Load (and fully verify) the cache at `path`, or start from the seeded
/// fresh table. Returns the table and the checksum echoed into headers.
fn open_cache(path: Option<&Path>) -> Result<(CorrelatorTable, String)> {
    match path {
        Some(p) if p.exists() => {
            let text = std::fs::read_to_string(p)?;
            let (first, payload) = text
                .split_once('\n')
                .ok_or_else(|| Error::cache("cache file has no checksum line"))?;
            let stored = first.strip_prefix(CACHE_CHECKSUM_PREFIX).ok_or_else(|| {
                Error::cache("cache file does not start with a `sha256 <hex>` line")
            })?;
            let actual = sha256_hex(payload.as_bytes());
            if stored != actual {
                return Err(Error::cache(format!(
                    "cache checksum mismatch: header says {stored}, content hashes to {actual}"
                )));
            }
            let table = CorrelatorTable::from_cache_str(payload)?;
            table.verify_seeds()?;
            Ok((table, actual))
        }
        _ => {
            let table = CorrelatorTable::new();
            let checksum = table.checksum_hex();
            Ok((table, checksum))
        }
    }
}

fn save_cache(table: &CorrelatorTable, path: &Path) -> Result<()> {
    let payload = table.to_cache_string();
    let mut out = String::with_capacity(payload.len() + 72);
    out.push_str(CACHE_CHECKSUM_PREFIX);
    out.push_str(&sha256_hex(payload.as_bytes()));
    out.push('\n');
    out.push_str(&payload);
    std::fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Output rendering

fn write_output(
    opts: &OutputOpts,
    config: &RunConfig,
    checksum: &str,
    table: &Table,
) -> Result<()> {
    let bytes = match opts.format {
        OutputFormat::Csv => render_csv(opts, config, checksum, table)?,
        OutputFormat::Json => render_json(opts, config, checksum, table)?,
    };
    match &opts.out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

fn render_csv(
    opts: &OutputOpts,
    config: &RunConfig,
    checksum: &str,
    table: &Table,
) -> Result<Vec<u8>> {
    let mut head = format!("# mcl {} command={}", env!("CARGO_PKG_VERSION"), config.command);
    for (key, value) in &config.pairs {
        write!(head, " {key}={value}").expect("write to string");
    }
    write!(
        head,
        " format={} precision_bits={} cache_checksum={checksum}",
        opts.format.name(),
        opts.precision_bits
    )
    .expect("write to string");
    head.push('\n');

    let mut writer = csv::Writer::from_writer(head.into_bytes());
    writer
        .write_record(table.columns)
        .and_then(|()| table.rows.iter().try_for_each(|row| writer.write_record(row)))
        .map_err(|e| Error::invalid(format!("csv rendering: {e}")))?;
    writer.into_inner().map_err(|e| Error::invalid(format!("csv rendering: {e}")))
}

fn render_json(
    opts: &OutputOpts,
    config: &RunConfig,
    checksum: &str,
    table: &Table,
) -> Result<Vec<u8>> {
    let mut config_map = serde_json::Map::new();
    for (key, value) in &config.pairs {
        config_map.insert((*key).to_string(), serde_json::Value::String(value.clone()));
    }
    config_map.insert("format".into(), opts.format.name().into());
    config_map.insert("precision_bits".into(), opts.precision_bits.to_string().into());
    let rows: Vec<serde_json::Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut m = serde_json::Map::new();
            for (column, cell) in table.columns.iter().zip(row) {
                m.insert((*column).to_string(), serde_json::Value::String(cell.clone()));
            }
            serde_json::Value::Object(m)
        })
        .collect();
    let doc = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": config.command,
        "config": config_map,
        "cache_checksum": checksum,
        "columns": table.columns,
        "rows": rows,
    });
    let mut bytes = serde_json::to_vec_pretty(&doc)
        .map_err(|e| Error::invalid(format!("json rendering: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn rational_cell(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

fn join_list<T: ToString>(items: &[T], separator: &str) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(separator)
}

fn genera_cell(graph: &StableGraph) -> String {
    join_list(graph.vertex_genera(), " ")
}

fn edges_cell(graph: &StableGraph) -> String {
    graph
        .edges()
        .iter()
        .map(|(a, b)| format!("{a}-{b}"))
        .collect::<Vec<_>>()
        .join(" ")
}

// ---------------------------------------------------------------------------
// Subcommands

fn graphs_command(a: &GraphsArgs) -> Result<(RunConfig, Table)> {
    let graphs = enumerate_stable_graphs(a.genus, None)?;
    let mut config = RunConfig::new("graphs");
    config.push("genus", a.genus);
    let rows = graphs
        .iter()
        .enumerate()
        .map(|(i, graph)| {
            vec![
                i.to_string(),
                genera_cell(graph),
                edges_cell(graph),
                graph.automorphism_count().to_string(),
            ]
        })
        .collect();
    Ok((config, Table { columns: &["index", "genera", "edges", "aut"], rows }))
}

fn correlator_command(table: &CorrelatorTable, a: &CorrelatorArgs) -> Result<(RunConfig, Table)> {
    let value = table.correlator(a.genus, &a.d)?;
    let mut config = RunConfig::new("correlator");
    config.push("genus", a.genus);
    config.push("d", join_list(&a.d, ","));
    let rows = vec![vec![a.genus.to_string(), join_list(&a.d, " "), rational_cell(&value)]];
    Ok((config, Table { columns: &["genus", "d", "value"], rows }))
}

fn volume_poly_command(table: &CorrelatorTable, a: &VolumePolyArgs) -> Result<(RunConfig, Table)> {
    let poly = table.volume_polynomial(a.genus, a.n)?;
    let mut config = RunConfig::new("volume-poly");
    config.push("genus", a.genus);
    config.push("n", a.n);
    let rows = poly
        .iter()
        .map(|(exponents, coeff)| vec![join_list(exponents, " "), rational_cell(coeff)])
        .collect();
    Ok((config, Table { columns: &["exponents", "coefficient"], rows }))
}

fn weights_command(table: &CorrelatorTable, a: &WeightsArgs) -> Result<(RunConfig, Table)> {
    let measure = MulticurveMeasure::build(table, a.genus, a.m)?;
    let mut config = RunConfig::new("weights");
    config.push("genus", a.genus);
    config.push("m", a.m);
    config.push("kappa", a.kappa);

    let probabilities = measure.probabilities();
    let mut rows: Vec<Vec<String>> = measure
        .entries()
        .iter()
        .zip(&probabilities)
        .enumerate()
        .map(|(i, ((graph, mass), probability))| {
            vec![
                i.to_string(),
                genera_cell(graph),
                edges_cell(graph),
                graph.automorphism_count().to_string(),
                mass.to_value().render(),
                rational_cell(probability),
            ]
        })
        .collect();

    let b = measure.b();
    let b_tilde = truncated_mass_b(table, a.genus, a.m, a.kappa)?;
    let asymptote = mass_asymptote(a.genus, &a.m);
    let summary = |label: &str, value: String| {
        vec![label.to_string(), String::new(), String::new(), String::new(), value, String::new()]
    };
    rows.push(summary("b", b.to_value().render()));
    rows.push(summary("b_tilde", b_tilde.to_value().render()));
    rows.push(summary("mass_asymptote", format_f64(asymptote)));
    rows.push(summary("asymptote_ratio", format_f64(b.to_f64() / asymptote)));

    Ok((
        config,
        Table { columns: &["row", "genera", "edges", "aut", "value", "probability"], rows },
    ))
}

enum AnySampler {
    Exact(MulticurveSampler),
    Large(LargeGenusSampler),
}

fn apply_ordering(
    v: LengthVector,
    ordering: VectorOrdering,
    stream: &mut RandomStream,
) -> LengthVector {
    match ordering {
        VectorOrdering::Unordered => v,
        VectorOrdering::SortedDesc => v.sorted_desc(),
        VectorOrdering::SizeBiased => size_biased_reorder(&v, stream),
    }
}

fn sample_command(table: &CorrelatorTable, a: &SampleArgs) -> Result<(RunConfig, Table)> {
    if a.genus < 2 {
        return Err(Error::invalid("sampling needs genus ≥ 2"));
    }
    let sampler = if a.approx_correlators {
        AnySampler::Large(LargeGenusSampler::new(table, a.genus, a.m, a.kappa, true)?)
    } else {
        AnySampler::Exact(MulticurveSampler::new(table, a.genus, a.m)?)
    };
    let mut config = RunConfig::new("sample");
    config.push("genus", a.genus);
    config.push("m", a.m);
    config.push("kappa", a.kappa);
    config.push("ordering", a.ordering);
    config.push("samples", a.samples);
    config.push("seed", a.seed);
    config.push("approx_correlators", a.approx_correlators);

    let per_draw: Vec<Vec<Vec<String>>> = (0..a.samples)
        .into_par_iter()
        .map(|draw| {
            let mut stream = RandomStream::new(a.seed, u64::from(draw));
            let (graph_cell, multiplicities, v) = match &sampler {
                AnySampler::Exact(s) => {
                    let (t, v) = s.sample(&mut stream);
                    let multiplicities = (a.ordering == VectorOrdering::Unordered)
                        .then(|| t.multiplicities().to_vec());
                    (t.graph_index().to_string(), multiplicities, v)
                }
                AnySampler::Large(s) => (String::new(), None, s.sample(&mut stream)),
            };
            let v = apply_ordering(v, a.ordering, &mut stream);
            v.values()
                .iter()
                .enumerate()
                .map(|(j, &x)| {
                    let multiplicity = multiplicities
                        .as_ref()
                        .map_or(String::new(), |m| m[j].to_string());
                    vec![
                        draw.to_string(),
                        graph_cell.clone(),
                        j.to_string(),
                        multiplicity,
                        format_f64(x),
                    ]
                })
                .collect()
        })
        .collect();

    let rows = per_draw.into_iter().flatten().collect();
    Ok((
        config,
        Table { columns: &["draw", "graph", "component", "multiplicity", "length"], rows },
    ))
}

fn moments_command(table: &CorrelatorTable, a: &MomentsArgs) -> Result<(RunConfig, Table)> {
    let p = MomentIndex::new(a.p.clone())?;
    let mut config = RunConfig::new("moments");
    config.push("genus", a.genus);
    config.push("m", a.m);
    config.push("p", join_list(&a.p, ","));
    config.push(
        "method",
        a.method.iter().map(|m| m.name()).collect::<Vec<_>>().join(","),
    );
    config.push("samples", a.samples);
    config.push("seed", a.seed);
    config.push("kappa", a.kappa);
    config.push("theta", a.theta);

    let mut rows = Vec::with_capacity(a.method.len());
    for method in &a.method {
        let mut row = vec![method.name().to_string(), String::new(), String::new(), String::new()];
        match method {
            MomentMethod::Exact => {
                row[1] = rational_cell(&mp_exact_multicurve(table, a.genus, a.m, &p, None)?);
            }
            MomentMethod::Truncated => {
                row[1] =
                    rational_cell(&mp_exact_multicurve(table, a.genus, a.m, &p, Some(a.kappa))?);
            }
            MomentMethod::Asymptotic => {
                row[1] = format_f64(mp_asymptotic_multicurve(a.genus, a.m, &p, a.kappa)?);
            }
            MomentMethod::Mc => {
                let sampler = MulticurveSampler::new(table, a.genus, a.m)?;
                let mut stream = RandomStream::new(a.seed, 0);
                let mut acc = MomentAccumulator::new(p.clone());
                for _ in 0..a.samples {
                    let (_, v) = sampler.sample(&mut stream);
                    acc.push(&size_biased_reorder(&v, &mut stream))?;
                }
                let est = acc.estimate()?;
                row[1] = format_f64(est.value);
                row[2] = format_f64(est.standard_error);
                row[3] = a.samples.to_string();
            }
            MomentMethod::Gem => {
                row[1] = mp_gem_closed(a.theta, &p)?.render();
            }
            MomentMethod::Pd => {
                if p.r() != 1 {
                    return Err(Error::invalid(
                        "the pd method sums sorted-marginal quadratures and supports only \
                         single-index p",
                    ));
                }
                let power = u32::try_from(p.powers()[0] + 1)
                    .map_err(|_| Error::invalid("pd moment power out of range"))?;
                let mut value = 0.0;
                for j in 1..=PD_MARGINAL_CUTOFF {
                    value += pd_marginal_moment(a.theta, j, power)?;
                }
                row[1] = format_f64(value);
            }
        }
        rows.push(row);
    }
    Ok((config, Table { columns: &["method", "value", "std_error", "samples"], rows }))
}

/// One row of the genus-convergence sweep.
#[derive(Debug, Clone)]
pub struct ConvergeRow {
    pub genus: u32,
    pub draws: u32,
    /// Means of the three largest sorted components.
    pub tops: [f64; 3],
    /// Euclidean distance of `tops` to [`PD_SORTED_TARGETS`].
    pub distance: f64,
}

/// Sweep sorted top-3 component means over a genus list: the exact census
/// sampler up to genus 6, the truncated large-genus sampler above (with
/// approximate correlator factors where exact ones are out of budget).
/// Draw `i` of genus entry `e` uses substream `e·2³² + i`, so results do
/// not depend on how draws are scheduled over threads.
pub fn converge_rows(
    table: &CorrelatorTable,
    genus_list: &[u32],
    bound: MultiplicityBound,
    kappa: f64,
    samples: u32,
    seed: u64,
    force_approx: bool,
) -> Result<Vec<ConvergeRow>> {
    if samples == 0 {
        return Err(Error::invalid("convergence sweep needs at least one draw"));
    }
    genus_list
        .iter()
        .enumerate()
        .map(|(entry, &genus)| {
            if genus < 2 {
                return Err(Error::invalid("sampling needs genus ≥ 2"));
            }
            let sampler = if genus <= EXACT_SAMPLER_MAX_GENUS && !force_approx {
                AnySampler::Exact(MulticurveSampler::new(table, genus, bound)?)
            } else {
                let approx = force_approx || genus > EXACT_CORRELATOR_MAX_GENUS;
                AnySampler::Large(LargeGenusSampler::new(table, genus, bound, kappa, approx)?)
            };
            let tops: Vec<[f64; 3]> = (0..samples)
                .into_par_iter()
                .map(|draw| {
                    let mut stream =
                        RandomStream::new(seed, ((entry as u64) << 32) | u64::from(draw));
                    let v = match &sampler {
                        AnySampler::Exact(s) => s.sample(&mut stream).1,
                        AnySampler::Large(s) => s.sample(&mut stream),
                    };
                    let sorted = v.sorted_desc();
                    [sorted.component(0), sorted.component(1), sorted.component(2)]
                })
                .collect();
            let mut sums = [0.0f64; 3];
            for t in &tops {
                for (sum, x) in sums.iter_mut().zip(t) {
                    *sum += x;
                }
            }
            let tops = sums.map(|s| s / f64::from(samples));
            let distance = tops
                .iter()
                .zip(&PD_SORTED_TARGETS)
                .map(|(mean, target)| (mean - target).powi(2))
                .sum::<f64>()
                .sqrt();
            Ok(ConvergeRow { genus, draws: samples, tops, distance })
        })
        .collect()
}

fn converge_command(table: &CorrelatorTable, a: &ConvergeArgs) -> Result<(RunConfig, Table)> {
    let sweep =
        converge_rows(table, &a.genus, a.m, a.kappa, a.samples, a.seed, a.approx_correlators)?;
    let mut config = RunConfig::new("converge");
    config.push("genus", join_list(&a.genus, ","));
    config.push("m", a.m);
    config.push("kappa", a.kappa);
    config.push("samples", a.samples);
    config.push("seed", a.seed);
    config.push("approx_correlators", a.approx_correlators);
    let rows = sweep
        .iter()
        .map(|row| {
            vec![
                row.genus.to_string(),
                row.draws.to_string(),
                format_f64(row.tops[0]),
                format_f64(row.tops[1]),
                format_f64(row.tops[2]),
                format_f64(row.distance),
            ]
        })
        .collect();
    Ok((
        config,
        Table { columns: &["genus", "draws", "top1", "top2", "top3", "distance"], rows },
    ))
}

fn asym_command(a: &AsymArgs) -> Result<(RunConfig, Table)> {
    let p = MomentIndex::new(a.p.clone())?;
    if a.n.iter().any(|&n| n == 0) {
        return Err(Error::invalid("composition sums need n ≥ 1"));
    }
    let pair = AdmissiblePair::new(zeta_weights_f64(a.m)?)?;
    let mut config = RunConfig::new("asym");
    config.push("m", a.m);
    config.push("p", join_list(&a.p, ","));
    config.push("n", join_list(&a.n, ","));
    config.push("kappa", a.kappa);

    let rows: Vec<Vec<String>> = a
        .n
        .par_iter()
        .map(|&n| {
            let direct: f64 = s_direct(pair.sequence(), &p, n);
            let truncated: f64 = s_truncated(pair.sequence(), &p, n, a.kappa)?;
            let asymptote = s_asymptote(&pair, &p, n);
            Ok(vec![
                n.to_string(),
                format_f64(direct),
                format_f64(truncated),
                format_f64(asymptote),
                format_f64(direct / asymptote),
            ])
        })
        .collect::<Result<_>>()?;
    Ok((
        config,
        Table { columns: &["n", "s_direct", "s_truncated", "s_asymptote", "ratio"], rows },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses_and_validates() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn cache_envelope_roundtrip() {
        let table = CorrelatorTable::new();
        table.correlator(2, &[4]).unwrap();
        let dir = std::env::temp_dir()
            .join(format!("mcl-cache-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cache.txt");

        save_cache(&table, &path).unwrap();
        let first = std::fs::read(&path).unwrap();
        let (loaded, checksum) = open_cache(Some(&path)).unwrap();
        assert_eq!(checksum, loaded.checksum_hex());
        save_cache(&loaded, &path).unwrap();
        let second = std::fs::read(&path).unwrap();
        assert_eq!(first, second);

        // Cutting one whole record keeps the payload well formed, so only
        // the checksum line catches it.
        let text = String::from_utf8(first).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines.remove(lines.len() - 1);
        let mut truncated = lines.join("\n");
        truncated.push('\n');
        std::fs::write(&path, truncated).unwrap();
        match open_cache(Some(&path)) {
            Err(Error::CacheCorrupt(_)) => {}
            Err(other) => panic!("expected cache corruption, got error {other}"),
            Ok(_) => panic!("expected cache corruption, got a loaded table"),
        }

        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn rendering_formats_mirror_each_other() {
        let opts = OutputOpts {
            format: OutputFormat::Csv,
            out: None,
            cache: None,
            threads: 1,
            precision_bits: 53,
        };
        let mut config = RunConfig::new("demo");
        config.push("genus", 2);
        let table = Table {
            columns: &["a", "b"],
            rows: vec![vec!["1".into(), "x y".into()]],
        };
        let csv = String::from_utf8(render_csv(&opts, &config, "feed", &table).unwrap()).unwrap();
        assert!(csv.starts_with("# mcl "));
        assert!(csv.contains("command=demo genus=2 format=csv precision_bits=53 cache_checksum=feed\n"));
        assert!(csv.ends_with("a,b\n1,x y\n"));

        let json = render_json(&opts, &config, "feed", &table).unwrap();
        let doc: serde_json::Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(doc["config"]["genus"], "2");
        assert_eq!(doc["cache_checksum"], "feed");
        assert_eq!(doc["columns"], serde_json::json!(["a", "b"]));
        assert_eq!(doc["rows"][0]["b"], "x y");
    }

    #[test]
    fn moment_methods_agree_on_small_case() {
        let table = CorrelatorTable::new();
        let args = MomentsArgs {
            genus: 2,
            m: MultiplicityBound::Finite(1),
            p: vec![1],
            method: vec![MomentMethod::Exact, MomentMethod::Mc],
            samples: 200_000,
            seed: 5,
            kappa: 1.5,
            theta: 0.5,
        };
        let (_, out) = moments_command(&table, &args).unwrap();
        let exact: f64 = {
            let cell = &out.rows[0][1];
            let (num, den) = cell.split_once('/').unwrap();
            num.parse::<f64>().unwrap() / den.parse::<f64>().unwrap()
        };
        let mc: f64 = out.rows[1][1].parse().unwrap();
        let se: f64 = out.rows[1][2].parse().unwrap();
        assert!((mc - exact).abs() < 4.0 * se, "mc {mc} vs exact {exact} (se {se})");
    }

    #[test]
    fn pd_method_matches_gem_closed_form() {
        // E Σ_j V_j^{p+1} is the same moment through the sorted marginals
        // as through the GEM closed form.
        let table = CorrelatorTable::new();
        let args = MomentsArgs {
            genus: 2,
            m: MultiplicityBound::Finite(1),
            p: vec![1],
            method: vec![MomentMethod::Gem, MomentMethod::Pd],
            samples: 1,
            seed: 0,
            kappa: 1.5,
            theta: 0.5,
        };
        let (_, out) = moments_command(&table, &args).unwrap();
        let gem: f64 = {
            let cell = &out.rows[0][1];
            let (num, den) = cell.split_once('/').unwrap();
            num.parse::<f64>().unwrap() / den.parse::<f64>().unwrap()
        };
        let pd: f64 = out.rows[1][1].parse().unwrap();
        assert!((gem - 2.0 / 3.0).abs() < 1e-12);
        assert!((pd - gem).abs() < 1e-6, "pd {pd} vs gem {gem}");
    }
}
