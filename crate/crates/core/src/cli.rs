//! Command-line front end: file ingestion, experiment orchestration, and
//! report emission.
//!
//! Exit contract: 0 success, 1 domain error (mathematically invalid
//! request), 2 input error (unreadable or unparseable), 3 internal
//! verification failure (always a bug). Reports are JSON with the key order
//! fixed by struct declaration, so one config and seed produce one byte
//! sequence; `NCCLAB_SEED` overrides `--seed` wherever a seed is consumed.

use std::collections::BTreeMap;
use std::env;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuits::{
    cells_to_bits, bits_to_cells, circuit_to_ds, eval_circuit, find_common_bits,
    find_common_bits_exact, Circuit, CircuitDs, CircuitError,
};
use crate::coding::search::search_coding_rate;
use crate::coding::CodingError;
use crate::ds::{
    answer, index_bits, permutation_inverse, preprocess, DsError, Hellman, InvBlock,
    InvTrivialScan, InvTrivialTable, OracleTape, PolyTableKind, SystematicDs,
};
use crate::field::{
    ffft, ffft_inverse, naive_dft, FieldElement, FieldError, PrimeField, RootOfUnity,
};
use crate::flow::{
    flow_rate, ncc_gap_report, pair_density_check, parse_network_file, render_network_file,
    DensityReport, FlowError, GapReport, FEAS_TOL, OPT_TOL,
};
use crate::reduction::{
    audit_reduction, build_layered_graph, poly_fixing, prune_high_degree, run_poly_scheme,
    select_bucket, suggested_distance, BucketCensus, CensusPlan, ReductionError,
};

#[derive(Parser)]
#[command(
    name = "ncclab",
    version,
    about = "Desk-scale experiments on data structures, network coding, and concurrent flow"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Finite-field Fourier transform of a coefficient vector.
    Fft(FftArgs),
    /// Run the structure-to-network reduction pipeline and audit it.
    Reduce(ReduceArgs),
    /// Concurrent flow rate of a network file, with the per-edge flows as CSV.
    Flowrate(FlowrateArgs),
    /// Compare the searched coding rate against the flow rate.
    Gap(GapArgs),
    /// Cut a circuit's common bits and derive a query structure from it.
    Commonbits(CommonbitsArgs),
}

#[derive(Args)]
struct FftArgs {
    /// Prime field modulus.
    #[arg(long)]
    p: u64,
    /// Transform length; must divide p - 1.
    #[arg(long)]
    n: u64,
    /// Coefficient file: integers below p, separated by commas or whitespace.
    #[arg(long)]
    input: PathBuf,
    /// Also write the result here, one element per line.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Apply the inverse transform.
    #[arg(long)]
    inverse: bool,
    /// Cross-check the result against the quadratic-time transform.
    #[arg(long)]
    check: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    /// Invert a permutation given as an oracle tape.
    Inversion,
    /// Evaluate a polynomial on the root-of-unity grid.
    Polyeval,
    /// Interpolate a polynomial from grid values.
    Polyinterp,
}

impl Problem {
    fn name(self) -> &'static str {
        match self {
            Problem::Inversion => "inversion",
            Problem::Polyeval => "polyeval",
            Problem::Polyinterp => "polyinterp",
        }
    }
}

#[derive(Args)]
struct ReduceArgs {
    /// Problem family the structure answers.
    #[arg(long, value_enum)]
    problem: Problem,
    /// Structure to reduce (inversion only): inv_block, inv_trivial_table,
    /// inv_trivial_scan, or hellman.
    #[arg(long)]
    ds: Option<String>,
    /// Input length.
    #[arg(long)]
    n: usize,
    /// Query budget parameter of the structure, where it takes one.
    #[arg(long)]
    t: Option<usize>,
    /// Degree slack: vertices of out-degree above q*t are pruned.
    #[arg(long, default_value_t = 8)]
    q: usize,
    /// Prime field modulus (polynomial problems only).
    #[arg(long)]
    p: Option<u64>,
    /// Fixed source-to-sink shift; default is the best of all n shifts.
    #[arg(long)]
    b: Option<usize>,
    /// Distance below which a source-sink pair counts as short.
    #[arg(long)]
    d: Option<usize>,
    /// Advice-rate parameter reported alongside its derived slack.
    #[arg(long, default_value_t = 0.0625)]
    epsilon: f64,
    /// Census size when sampling (default 100000); polynomial problems
    /// verify this many random coefficient vectors (default 200).
    #[arg(long)]
    samples: Option<usize>,
    /// RNG seed; the NCCLAB_SEED environment variable wins over this flag.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix for <out>.network, <out>.bucket.json, <out>.report.json.
    #[arg(long, default_value = "reduce")]
    out: PathBuf,
}

#[derive(Args)]
struct FlowrateArgs {
    /// Network file.
    #[arg(long)]
    network: PathBuf,
    /// Flow table destination (default: <network>.flow.csv).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Largest acceptable constraint violation in the returned flow.
    #[arg(long, default_value_t = FEAS_TOL)]
    feas_tol: f64,
    /// Largest acceptable complementary-slackness residual.
    #[arg(long, default_value_t = OPT_TOL)]
    opt_tol: f64,
}

#[derive(Args)]
struct GapArgs {
    /// Network file.
    #[arg(long)]
    network: PathBuf,
    /// Largest message width (bits) tried by the coding search.
    #[arg(long, default_value_t = 2)]
    max_rate_bits: u32,
    /// Write the comparison as JSON here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct CommonbitsArgs {
    /// Circuit netlist file.
    #[arg(long)]
    netlist: PathBuf,
    /// Common-bits budget the cut must satisfy.
    #[arg(long)]
    bound: usize,
    /// Bits per input/output block of the derived structure.
    #[arg(long, default_value_t = 1)]
    block_bits: usize,
    /// Exhaustive minimum cut instead of the layered heuristic.
    #[arg(long)]
    exact: bool,
    /// Replay the derived structure against direct circuit evaluation.
    #[arg(long)]
    verify: bool,
    /// Write the cut and structure descriptor as JSON here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// RNG seed for sampled verification; NCCLAB_SEED wins over this flag.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// One failure, already classified by exit code.
#[derive(Debug)]
enum CliError {
    Domain(String),
    Input(String),
    Verify(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Input(_) => 2,
            CliError::Verify(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Domain(m) | CliError::Input(m) | CliError::Verify(m) => m,
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::NoSuchRoot { .. } => CliError::Domain(format!("NoSuchRoot: {e}")),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<DsError> for CliError {
    // InvalidParams reflects the user's numbers; anything else surfacing
    // here means a wrapper invariant broke.
    fn from(e: DsError) -> Self {
        match e {
            DsError::InvalidParams { .. } => CliError::Domain(e.to_string()),
            _ => CliError::Verify(e.to_string()),
        }
    }
}

impl From<CodingError> for CliError {
    fn from(e: CodingError) -> Self {
        match e {
            CodingError::SearchSpaceTooLarge { .. }
            | CodingError::AlphabetTooLarge { .. }
            | CodingError::CyclicNetwork
            | CodingError::NotDirected
            | CodingError::InvalidNetwork { .. } => CliError::Domain(e.to_string()),
            CodingError::BadNetworkFile { .. } => CliError::Input(e.to_string()),
            _ => CliError::Verify(e.to_string()),
        }
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::MalformedFile { .. } => CliError::Input(e.to_string()),
            _ => CliError::Verify(e.to_string()),
        }
    }
}

impl From<CircuitError> for CliError {
    fn from(e: CircuitError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::AdaptiveDsRejected { .. } => {
                CliError::Domain(format!("AdaptiveDSRejected: {e}"))
            }
            ReductionError::LayerTooSmall { .. } => CliError::Domain(e.to_string()),
            ReductionError::EmptyInput => CliError::Input(e.to_string()),
            ReductionError::MissingMessage { .. } | ReductionError::InconsistentInput { .. } => {
                CliError::Verify(e.to_string())
            }
            ReductionError::Ds(e) => e.into(),
            ReductionError::Field(e) => e.into(),
            ReductionError::Coding(e) => e.into(),
        }
    }
}

pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version land on stdout with code 0; usage errors are
            // input errors like any other.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Fft(args) => cmd_fft(args),
        Command::Reduce(args) => cmd_reduce(args),
        Command::Flowrate(args) => cmd_flowrate(args),
        Command::Gap(args) => cmd_gap(args),
        Command::Commonbits(args) => cmd_commonbits(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn resolve_seed(flag: u64) -> Result<u64, CliError> {
    match env::var("NCCLAB_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| {
            CliError::Input(format!("NCCLAB_SEED must be an unsigned integer, got {s:?}"))
        }),
        Err(env::VarError::NotPresent) => Ok(flag),
        Err(e) => Err(CliError::Input(format!("NCCLAB_SEED: {e}"))),
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Verify(format!("report serialization failed: {e}")))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{}{suffix}", prefix.display()))
}

/// Field name next to the expression that produced it, attached to every
/// JSON report so derived numbers are auditable without the source.
#[derive(Serialize)]
struct FormulaTag {
    field: &'static str,
    formula: &'static str,
}

fn tags(pairs: &[(&'static str, &'static str)]) -> Vec<FormulaTag> {
    pairs.iter().map(|&(field, formula)| FormulaTag { field, formula }).collect()
}

// ---------------------------------------------------------------- fft

fn parse_coefficients(text: &str, field: PrimeField) -> Result<Vec<FieldElement>, CliError> {
    let mut out = Vec::new();
    for tok in text.split([',', ' ', '\t', '\n', '\r']) {
        if tok.is_empty() {
            continue;
        }
        let v: u64 = tok.parse().map_err(|_| {
            CliError::Input(format!("coefficient {tok:?} is not an unsigned integer"))
        })?;
        if v >= field.modulus() {
            return Err(CliError::Input(format!(
                "coefficient {v} is not below the modulus {}",
                field.modulus()
            )));
        }
        out.push(field.element(v));
    }
    Ok(out)
}

fn cmd_fft(args: FftArgs) -> Result<(), CliError> {
    let field = PrimeField::new(args.p)?;
    let root = RootOfUnity::find(field, args.n)?;
    let coeffs = parse_coefficients(&read_file(&args.input)?, field)?;
    if coeffs.len() as u64 != args.n {
        return Err(CliError::Input(format!(
            "expected {} coefficients, {} has {}",
            args.n,
            args.input.display(),
            coeffs.len()
        )));
    }
    let out = if args.inverse { ffft_inverse(&coeffs, &root)? } else { ffft(&coeffs, &root)? };
    let values: Vec<u64> = out.iter().map(|v| v.value()).collect();
    let joined: Vec<String> = values.iter().map(u64::to_string).collect();
    println!("{}", joined.join(","));
    if args.check {
        let reference: Vec<u64> = if args.inverse {
            // Definitional inverse: naive transform at sigma^-1, scaled by 1/n.
            let n_inv = field.inv(args.n % field.modulus())?;
            naive_dft(&coeffs, &root.inverse())?
                .iter()
                .map(|v| field.mul(v.value(), n_inv))
                .collect()
        } else {
            naive_dft(&coeffs, &root)?.iter().map(|v| v.value()).collect()
        };
        if values != reference {
            return Err(CliError::Verify("fast and naive transforms disagree".into()));
        }
        println!("OK naive-DFT match");
    }
    if let Some(path) = &args.output {
        let mut body = joined.join("\n");
        body.push('\n');
        write_file(path, &body)?;
    }
    Ok(())
}

// ------------------------------------------------------------- reduce

/// Everything the run depended on, echoed verbatim into the report.
#[derive(Serialize)]
struct ConfigEcho {
    command: &'static str,
    problem: &'static str,
    structure: String,
    n: usize,
    t: Option<usize>,
    q: usize,
    p: Option<u64>,
    shift_override: Option<usize>,
    distance: usize,
    epsilon: f64,
    samples: usize,
    seed: u64,
    out: String,
}

#[derive(Serialize)]
struct ReduceReportFile {
    config: ConfigEcho,
    report: crate::reduction::ReductionReport,
    formulas: Vec<FormulaTag>,
}

/// The bucket in portable form: both advice strings plus the removed-vertex
/// values every member shares.
#[derive(Serialize)]
struct BucketFile {
    advice_1_hex: String,
    advice_1_bits: usize,
    advice_2_hex: String,
    advice_2_bits: usize,
    source_fixes: BTreeMap<usize, u64>,
    middle_fixes: BTreeMap<usize, u64>,
    members: usize,
}

impl BucketFile {
    fn new(census: &BucketCensus) -> Self {
        let fixing = &census.bucket.fixing;
        BucketFile {
            advice_1_hex: fixing.advice_1.to_hex(),
            advice_1_bits: fixing.advice_1.len(),
            advice_2_hex: fixing.advice_2.to_hex(),
            advice_2_bits: fixing.advice_2.len(),
            source_fixes: fixing.source_fixes.clone(),
            middle_fixes: fixing.middle_fixes.clone(),
            members: census.bucket.members.len(),
        }
    }
}

fn reduction_formulas() -> Vec<FormulaTag> {
    tags(&[
        ("edge_bound", "2*t*n"),
        ("degree_bound", "q*t"),
        ("removed_bound", "2*n/q"),
        ("long_fraction_threshold", "1 - 2/sqrt(n)"),
        ("fixed_bits_bound", "2*s + (2/q)*n*edge_bits"),
        ("guaranteed_fraction", "2^-fixed_bits_bound"),
        ("min_inputs_bound", "2^(n*log2(n) - 2*n)"),
        ("epsilon_measured", "s/(n*log2(n))"),
        ("epsilon_prime", "2*epsilon + 2/q + 2/log2(n)"),
        ("density.delta_prime", "(delta - 5/6)/10"),
        ("density.bound", "delta_prime*d"),
        ("density.edges_per_pair", "|E|/k"),
    ])
}

fn build_inversion_ds(
    name: &str,
    n: usize,
    t: Option<usize>,
) -> Result<Box<dyn SystematicDs>, CliError> {
    let need_t = || CliError::Input(format!("--t is required for {name}"));
    Ok(match name {
        "inv_block" => Box::new(InvBlock::new(n, t.ok_or_else(need_t)?)?),
        "inv_trivial_table" => Box::new(InvTrivialTable::new(n)?),
        "inv_trivial_scan" => Box::new(InvTrivialScan::new(n)?),
        // t defaults to 1: the build refuses hellman before t matters.
        "hellman" => Box::new(Hellman::new(n, t.unwrap_or(1))?),
        other => {
            return Err(CliError::Input(format!(
                "unknown structure {other}; expected inv_block, inv_trivial_table, \
                 inv_trivial_scan, or hellman"
            )))
        }
    })
}

fn cmd_reduce(args: ReduceArgs) -> Result<(), CliError> {
    match args.problem {
        Problem::Inversion => reduce_inversion(args),
        Problem::Polyeval => reduce_poly(args, PolyTableKind::Eval),
        Problem::Polyinterp => reduce_poly(args, PolyTableKind::Interp),
    }
}

fn reduce_inversion(args: ReduceArgs) -> Result<(), CliError> {
    let name = args
        .ds
        .as_deref()
        .ok_or_else(|| CliError::Input("--ds is required for --problem inversion".into()))?;
    let ds = build_inversion_ds(name, args.n, args.t)?;
    let graph = build_layered_graph(ds.as_ref(), index_bits(args.n))?;
    let mut net = prune_high_degree(graph, args.q);
    let d = args.d.unwrap_or_else(|| suggested_distance(args.n, args.q, ds.t_queries()));
    match args.b {
        Some(b) => net.set_shift(b, d),
        None => {
            net.choose_shift(d);
        }
    }
    let seed = resolve_seed(args.seed)?;
    let samples = args.samples.unwrap_or(100_000);
    let census = select_bucket(&net, ds.as_ref(), &CensusPlan::auto(args.n, samples, seed))?;
    let report = audit_reduction(&net, ds.as_ref(), &census, args.epsilon)?;

    let file = ReduceReportFile {
        config: ConfigEcho {
            command: "reduce",
            problem: args.problem.name(),
            structure: report.structure.clone(),
            n: args.n,
            t: args.t,
            q: args.q,
            p: None,
            shift_override: args.b,
            distance: d,
            epsilon: args.epsilon,
            samples,
            seed,
            out: args.out.display().to_string(),
        },
        report,
        formulas: reduction_formulas(),
    };
    let json = to_json(&file)?;
    write_file(&with_suffix(&args.out, ".network"), &render_network_file(&net.to_network()?))?;
    write_file(&with_suffix(&args.out, ".bucket.json"), &to_json(&BucketFile::new(&census))?)?;
    write_file(&with_suffix(&args.out, ".report.json"), &json)?;
    println!("{json}");
    if !file.report.all_correct {
        return Err(CliError::Verify(
            "scheme verification failed on at least one bucket member".into(),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct PolyReport {
    structure: String,
    n: usize,
    p: u64,
    advice_bits: usize,
    queries: usize,
    edge_bits: usize,
    edges: usize,
    edge_bound: usize,
    shift: usize,
    distance: usize,
    long_fraction: f64,
    samples_verified: usize,
    all_correct: bool,
    seed: u64,
    density: DensityReport,
}

#[derive(Serialize)]
struct PolyReportFile {
    config: ConfigEcho,
    report: PolyReport,
    formulas: Vec<FormulaTag>,
}

fn reduce_poly(args: ReduceArgs, kind: PolyTableKind) -> Result<(), CliError> {
    let p = args
        .p
        .ok_or_else(|| CliError::Input("--p is required for polynomial problems".into()))?;
    let field = PrimeField::new(p)?;
    let root = RootOfUnity::find(field, args.n as u64)?;
    let ds = kind.build(root);
    let graph = build_layered_graph(ds.as_ref(), field.element_bits())?;
    let mut net = prune_high_degree(graph, args.q);
    let d = args.d.unwrap_or_else(|| suggested_distance(args.n, args.q, ds.t_queries()));
    match args.b {
        Some(b) => net.set_shift(b, d),
        None => {
            net.choose_shift(d);
        }
    }
    let seed = resolve_seed(args.seed)?;
    let samples = args.samples.unwrap_or(200);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all_correct = true;
    for _ in 0..samples {
        let alpha: Vec<u64> = (0..args.n).map(|_| rng.random_range(0..p)).collect();
        let fixing = poly_fixing(&net, kind, &root, &alpha)?;
        let run = run_poly_scheme(&net, kind, &root, &fixing, &alpha)?;
        if run.outputs != alpha {
            all_correct = false;
        }
    }

    let file = PolyReportFile {
        config: ConfigEcho {
            command: "reduce",
            problem: args.problem.name(),
            structure: ds.name(),
            n: args.n,
            t: args.t,
            q: args.q,
            p: Some(p),
            shift_override: args.b,
            distance: d,
            epsilon: args.epsilon,
            samples,
            seed,
            out: args.out.display().to_string(),
        },
        report: PolyReport {
            structure: ds.name(),
            n: args.n,
            p,
            advice_bits: ds.s_bits(),
            queries: ds.t_queries(),
            edge_bits: field.element_bits(),
            edges: net.graph.edges().len(),
            edge_bound: 2 * ds.t_queries() * args.n,
            shift: net.shift,
            distance: net.distance,
            long_fraction: net.long_fraction,
            samples_verified: samples,
            all_correct,
            seed,
            density: pair_density_check(
                net.graph.edges().len(),
                args.n,
                net.long_fraction,
                net.distance,
            ),
        },
        formulas: tags(&[
            ("edge_bound", "2*t*n"),
            ("density.delta_prime", "(delta - 5/6)/10"),
            ("density.bound", "delta_prime*d"),
            ("density.edges_per_pair", "|E|/k"),
        ]),
    };
    let json = to_json(&file)?;
    write_file(&with_suffix(&args.out, ".network"), &render_network_file(&net.to_network()?))?;
    write_file(&with_suffix(&args.out, ".report.json"), &json)?;
    println!("{json}");
    if !all_correct {
        return Err(CliError::Verify(
            "telescoping identity failed on at least one sampled vector".into(),
        ));
    }
    Ok(())
}

// ----------------------------------------------------- flowrate / gap

fn cmd_flowrate(args: FlowrateArgs) -> Result<(), CliError> {
    let net = parse_network_file(&read_file(&args.network)?)?;
    let sol = flow_rate(&net)?;
    if sol.max_violation > args.feas_tol {
        return Err(CliError::Verify(format!(
            "constraint violation {} exceeds {}",
            sol.max_violation, args.feas_tol
        )));
    }
    if sol.complementary_slackness > args.opt_tol {
        return Err(CliError::Verify(format!(
            "complementary-slackness residual {} exceeds {}",
            sol.complementary_slackness, args.opt_tol
        )));
    }
    println!("flow_rate {:?}", sol.rate);
    let csv = args
        .csv
        .unwrap_or_else(|| PathBuf::from(format!("{}.flow.csv", args.network.display())));
    write_file(&csv, &sol.to_csv())
}

#[derive(Serialize)]
struct GapFile {
    network: String,
    max_rate_bits: u32,
    best_rate_bits: u32,
    tables_tried: u128,
    skipped_rates: Vec<u32>,
    gap: GapReport,
    formulas: Vec<FormulaTag>,
}

fn cmd_gap(args: GapArgs) -> Result<(), CliError> {
    let net = parse_network_file(&read_file(&args.network)?)?;
    let search = search_coding_rate(&net, args.max_rate_bits)?;
    let gap = ncc_gap_report(&net, search.best_rate_bits as f64)?;
    println!(
        "coding {:?} flow {:?} ratio {:?}",
        gap.coding_rate_bits, gap.directed_flow_rate, gap.coding_over_directed
    );
    if let Some(path) = &args.report {
        let file = GapFile {
            network: args.network.display().to_string(),
            max_rate_bits: args.max_rate_bits,
            best_rate_bits: search.best_rate_bits,
            tables_tried: search.tables_tried,
            skipped_rates: search.skipped_rates,
            gap,
            formulas: tags(&[
                ("coding_over_directed", "coding_rate/directed_flow_rate"),
                ("coding_over_undirected", "coding_rate/undirected_flow_rate"),
            ]),
        };
        write_file(path, &to_json(&file)?)?;
    }
    Ok(())
}

// --------------------------------------------------------- commonbits

#[derive(Serialize)]
struct DsDescriptor {
    name: String,
    n: usize,
    block_bits: usize,
    s_bits: usize,
    t_queries: usize,
    query_sets: Vec<Vec<usize>>,
}

#[derive(Serialize)]
struct CommonBitsFile {
    netlist: String,
    gates: usize,
    logic_gates: usize,
    n_in: usize,
    n_out: usize,
    depth: usize,
    bound: usize,
    exact: bool,
    cut: Vec<usize>,
    cut_size: usize,
    bound_unreachable: bool,
    connectivity: Vec<Vec<usize>>,
    ds: DsDescriptor,
    formulas: Vec<FormulaTag>,
}

fn cmd_commonbits(args: CommonbitsArgs) -> Result<(), CliError> {
    let circuit = Circuit::from_netlist(&read_file(&args.netlist)?)?;
    let cut = if args.exact {
        find_common_bits_exact(&circuit, args.bound)?
    } else {
        find_common_bits(&circuit, args.bound)
    };
    let ds = circuit_to_ds(circuit.clone(), &cut, args.block_bits)?;
    println!("cut size {}", cut.cut.len());
    println!("s {} t {}", ds.s_bits(), ds.t_queries());
    if cut.bound_unreachable {
        println!("bound unreachable");
    }
    if let Some(path) = &args.report {
        let file = CommonBitsFile {
            netlist: args.netlist.display().to_string(),
            gates: circuit.gates().len(),
            logic_gates: circuit.size(),
            n_in: circuit.n_in(),
            n_out: circuit.n_out(),
            depth: circuit.depth(),
            bound: args.bound,
            exact: args.exact,
            cut: cut.cut.iter().copied().collect(),
            cut_size: cut.cut.len(),
            bound_unreachable: cut.bound_unreachable,
            connectivity: cut.connectivity.iter().map(|s| s.iter().copied().collect()).collect(),
            ds: DsDescriptor {
                name: ds.name(),
                n: ds.n(),
                block_bits: ds.block_bits(),
                s_bits: ds.s_bits(),
                t_queries: ds.t_queries(),
                query_sets: (0..ds.n()).map(|j| ds.query_set(j).unwrap_or_default()).collect(),
            },
            formulas: tags(&[("ds.s_bits", "|cut|"), ("ds.t_queries", "max_j |Q_j|")]),
        };
        write_file(path, &to_json(&file)?)?;
    }
    if args.verify {
        verify_commonbits(&circuit, &ds, resolve_seed(args.seed)?)?;
    }
    Ok(())
}

fn ds_outputs(ds: &CircuitDs, cells: &[u64]) -> Result<Vec<u64>, CliError> {
    let advice = preprocess(ds, &OracleTape::new(cells.to_vec()))?;
    (0..ds.n())
        .map(|j| {
            let mut tape = OracleTape::new(cells.to_vec());
            Ok(answer(ds, &advice, j, &mut tape)?)
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<u64>> {
    fn rec(n: usize, cur: &mut Vec<u64>, used: &mut [bool], out: &mut Vec<Vec<u64>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                cur.push(v as u64);
                rec(n, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Structure-vs-circuit differential over the table space (exhaustive up to
/// 4096 tables, 1000 seeded samples beyond), plus a permutation census when
/// the cell width admits one: a permutation table answered correctly at
/// every block means the structure computed its inverse.
fn verify_commonbits(circuit: &Circuit, ds: &CircuitDs, seed: u64) -> Result<(), CliError> {
    let n = ds.n();
    let b = ds.block_bits();
    let tables: Vec<Vec<u64>> = if n * b <= 12 {
        (0..1u64 << (n * b))
            .map(|code| (0..n).map(|i| code >> (i * b) & ((1 << b) - 1)).collect())
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..1000).map(|_| (0..n).map(|_| rng.random_range(0..1u64 << b)).collect()).collect()
    };
    let total = tables.len();
    let mut ok = 0usize;
    for cells in &tables {
        let outs = ds_outputs(ds, cells)?;
        let eval = eval_circuit(circuit, &cells_to_bits(cells, b)?)?;
        if outs == bits_to_cells(&eval, b) {
            ok += 1;
        }
    }
    println!("tables {ok}/{total} OK");
    if ok != total {
        return Err(CliError::Verify(format!(
            "structure disagrees with direct evaluation on {} of {total} tables",
            total - ok
        )));
    }
    if n <= 8 && 1u64 << b >= n as u64 {
        let perms = permutations(n);
        let total = perms.len();
        let mut inverted = 0usize;
        for p in &perms {
            let inverse: Vec<u64> =
                permutation_inverse(p)?.into_iter().map(|v| v as u64).collect();
            if ds_outputs(ds, p)? == inverse {
                inverted += 1;
            }
        }
        println!("{inverted}/{total} permutations OK");
    }
    Ok(())
}
