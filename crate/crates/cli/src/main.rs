//! `pd-qdist`: exact and simulated-QAOA distances between persistence diagrams.

use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pdq_core::exact::{brute_force_optimum, enumerate_feasible, exact_distance, minimum_over};
use pdq_core::filtration::{vietoris_rips_persistence, PointCloud};
use pdq_core::matchgraph::build_graph;
use pdq_core::qaoa::{estimate_distance, EstimateOptions, SearchStrategy};
use pdq_core::qsim::{clause_value, initial_state, Simulator};
use pdq_core::reference::{clean_pair, noisy_pair, ReferencePair};
use pdq_core::{
    diagrams::load_diagram, BasisState, ClauseKind, DiagramFormat, Error, FeasibilityMode,
    MatchingGraph, Norm, PersistenceDiagram, Result, StateVector, Variant,
};

#[derive(Parser)]
#[command(name = "pd-qdist", version, about = "Distances between persistence diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact distance via an assignment solver.
    Exact(PairArgs),
    /// Optimise a QAOA circuit, sample it and report the best matching.
    Qaoa(QaoaArgs),
    /// Dump the matching graph and its qubit layout.
    Graph(PairArgs),
    /// List feasible basis states with their costs.
    Enumerate(EnumerateArgs),
    /// Check mixer feasibility, completeness, minimum equality and clause symmetry.
    Verify(VerifyArgs),
    /// Rips persistence diagrams of a 2-D point cloud.
    Rips(RipsArgs),
    /// Write the seeded reference clouds and diagrams.
    GenExample(GenExampleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Wasserstein,
    Dcp,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClauseArg {
    Paper,
    Symmetric,
}

impl From<ClauseArg> for ClauseKind {
    fn from(c: ClauseArg) -> Self {
        match c {
            ClauseArg::Paper => ClauseKind::PaperLiteral,
            ClauseArg::Symmetric => ClauseKind::SymmetricGenerator,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Grid,
    NelderMead,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for DiagramFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => DiagramFormat::Csv,
            FormatArg::Json => DiagramFormat::Json,
        }
    }
}

#[derive(Args)]
struct PairArgs {
    /// First diagram (.csv with birth,death rows, or .json).
    #[arg(long)]
    d1: PathBuf,
    /// Second diagram.
    #[arg(long)]
    d2: PathBuf,
    #[arg(long, value_enum, default_value = "wasserstein")]
    variant: MetricArg,
    /// Power applied to point distances.
    #[arg(short, default_value_t = 2.0)]
    p: f64,
    /// Order of the point norm, a number ≥ 1 or "inf".
    #[arg(short, default_value = "inf")]
    q: Norm,
    /// Clipping constant for dcp.
    #[arg(short, default_value_t = 0.2)]
    c: f64,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QaoaArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, default_value_t = 1)]
    layers: usize,
    #[arg(long, default_value_t = 10_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Angle grid points per angle over [0, 2π).
    #[arg(long, default_value_t = 16)]
    grid: usize,
    #[arg(long, value_enum, default_value = "nelder-mead")]
    strategy: StrategyArg,
    /// Also solve exactly and include the result.
    #[arg(long)]
    with_exact: bool,
    /// Histogram CSV path; defaults to the --out path with a .csv extension.
    #[arg(long)]
    histogram: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// List only states satisfying the exact constraints.
    #[arg(long)]
    strict_only: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Clause whose pair symmetry is checked.
    #[arg(long, value_enum, default_value = "symmetric")]
    clause: ClauseArg,
}

#[derive(Args)]
struct RipsArgs {
    /// Point cloud CSV with x,y rows.
    #[arg(long)]
    cloud: PathBuf,
    #[arg(long, default_value_t = 1)]
    max_dim: usize,
    /// Largest edge length in the filtration.
    #[arg(long, default_value_t = f64::INFINITY)]
    max_scale: f64,
    /// Directory for one diagram file per dimension; stdout JSON otherwise.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct GenExampleArgs {
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = ErrorReport {
                error: e.kind(),
                message: e.to_string(),
            };
            let json = serde_json::to_string(&report).unwrap_or_else(|_| e.to_string());
            eprintln!("{json}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Exact(a) => cmd_exact(&a),
        Command::Qaoa(a) => cmd_qaoa(&a),
        Command::Graph(a) => cmd_graph(&a),
        Command::Enumerate(a) => cmd_enumerate(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Rips(a) => cmd_rips(&a),
        Command::GenExample(a) => cmd_gen_example(&a),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn read_diagram(path: &Path) -> Result<PersistenceDiagram> {
    let file = open(path)?;
    let mut d = load_diagram(BufReader::new(file), DiagramFormat::from_path(path))?;
    if d.label.is_empty() {
        d.label = path.display().to_string();
    }
    Ok(d)
}

impl PairArgs {
    fn variant(&self) -> Result<Variant> {
        match self.variant {
            MetricArg::Wasserstein => Variant::wasserstein(self.p, self.q),
            MetricArg::Dcp => Variant::dcp(self.p, self.q, self.c),
        }
    }

    fn diagrams(&self) -> Result<(PersistenceDiagram, PersistenceDiagram)> {
        Ok((read_diagram(&self.d1)?, read_diagram(&self.d2)?))
    }

    fn graph(&self) -> Result<MatchingGraph> {
        let (d1, d2) = self.diagrams()?;
        build_graph(&d1, &d2, self.variant()?)
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    emit(out, &bytes)
}

fn cmd_exact(a: &PairArgs) -> Result<()> {
    let (d1, d2) = a.diagrams()?;
    let result = exact_distance(&d1, &d2, a.variant()?)?;
    emit_json(a.out.as_deref(), &result)
}

fn cmd_qaoa(a: &QaoaArgs) -> Result<()> {
    let (d1, d2) = a.pair.diagrams()?;
    let options = EstimateOptions {
        num_layers: a.layers,
        shots: a.shots,
        seed: a.seed,
        grid_resolution: a.grid,
        strategy: match a.strategy {
            StrategyArg::Grid => SearchStrategy::Grid,
            StrategyArg::NelderMead => SearchStrategy::GridThenNelderMead,
        },
        with_exact: a.with_exact,
    };
    let report = estimate_distance(&d1, &d2, a.pair.variant()?, &options)?;
    emit_json(a.pair.out.as_deref(), &report)?;
    let histogram = a
        .histogram
        .clone()
        .or_else(|| a.pair.out.as_ref().map(|p| p.with_extension("csv")));
    if let Some(path) = histogram {
        report.write_histogram_csv(File::create(path)?)?;
    }
    Ok(())
}

fn cmd_graph(a: &PairArgs) -> Result<()> {
    let g = a.graph()?;
    emit_json(a.out.as_deref(), &g.dump())
}

fn cmd_enumerate(a: &EnumerateArgs) -> Result<()> {
    let g = a.pair.graph()?;
    let mode = if a.strict_only {
        FeasibilityMode::Strict
    } else {
        FeasibilityMode::Relaxed
    };
    let mut text = String::from("index,bits,cost,distance,strict\n");
    for s in enumerate_feasible(&g, mode)? {
        let cost = g.state_cost(s);
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            s.0,
            s.to_bits(g.num_qubits()),
            cost,
            g.variant().cost_to_distance(cost, g.m()),
            g.check_feasibility(s, FeasibilityMode::Strict)
        ));
    }
    emit(a.pair.out.as_deref(), text.as_bytes())
}

const VERIFY_BETAS: [f64; 3] = [0.3, 0.7, 1.9];
const OFF_SUPPORT_TOL: f64 = 1e-12;
const ON_SUPPORT_MIN: f64 = 1e-9;
const MINIMUM_TOL: f64 = 1e-9;

fn stray_amplitude(st: &StateVector, feasible: &[bool]) -> Option<(usize, f64)> {
    st.amplitudes()
        .iter()
        .enumerate()
        .find(|(k, amp)| !feasible[*k] && amp.norm() >= OFF_SUPPORT_TOL)
        .map(|(k, amp)| (k, amp.norm()))
}

fn cmd_verify(a: &VerifyArgs) -> Result<()> {
    let g = a.pair.graph()?;
    let q = g.num_qubits();
    let feasible_states = enumerate_feasible(&g, FeasibilityMode::Relaxed)?;
    let mut feasible = vec![false; g.dimension()];
    for s in &feasible_states {
        feasible[s.0] = true;
    }
    let mut sim = Simulator::new(&g);
    let mut results: Vec<(&str, std::result::Result<String, String>)> = Vec::new();

    let mut preserved = Ok(format!(
        "{} feasible starts x {} angles",
        feasible_states.len(),
        VERIFY_BETAS.len()
    ));
    'outer: for &beta in &VERIFY_BETAS {
        for &s in &feasible_states {
            let mut st = StateVector::basis(q, s);
            sim.apply_mixer(&mut st, beta)?;
            if let Some((k, amp)) = stray_amplitude(&st, &feasible) {
                preserved = Err(format!(
                    "start {} beta {beta}: amplitude {amp:e} on infeasible {}",
                    s.to_bits(q),
                    BasisState(k).to_bits(q)
                ));
                break 'outer;
            }
        }
    }
    results.push(("mixer preserves feasibility", preserved));

    let mut complete = Ok(format!("{} feasible states reached", feasible_states.len()));
    for &beta in &VERIFY_BETAS {
        let mut st = initial_state(&g)?;
        sim.apply_mixer(&mut st, beta)?;
        let missing = feasible_states
            .iter()
            .find(|s| st.amplitude(**s).norm() <= ON_SUPPORT_MIN);
        if let Some(s) = missing {
            complete = Err(format!("beta {beta}: feasible {} not reached", s.to_bits(q)));
            break;
        }
        if let Some((k, amp)) = stray_amplitude(&st, &feasible) {
            complete = Err(format!(
                "beta {beta}: amplitude {amp:e} on infeasible {}",
                BasisState(k).to_bits(q)
            ));
            break;
        }
    }
    results.push(("mixer reaches every feasible matching", complete));

    let (strict, _) = minimum_over(&g, FeasibilityMode::Strict)?;
    let (relaxed, _) = brute_force_optimum(&g)?;
    let exact = exact_distance(g.d1(), g.d2(), *g.variant())?;
    let from_graph = g.variant().cost_to_distance(relaxed, g.m());
    let minimum = if (strict - relaxed).abs() <= MINIMUM_TOL
        && (from_graph - exact.distance).abs() <= MINIMUM_TOL
    {
        Ok(format!("distance {from_graph}"))
    } else {
        Err(format!(
            "strict {strict}, relaxed {relaxed}, graph distance {from_graph}, assignment distance {}",
            exact.distance
        ))
    };
    results.push(("relaxed minimum equals exact distance", minimum));

    let kind = ClauseKind::from(a.clause);
    let asymmetric = g.edges().iter().find_map(|e| {
        (0..g.dimension()).map(BasisState).find_map(|s| {
            let flipped = BasisState(s.0 ^ (1 << e.bit_index));
            (clause_value(&g, e, s, kind) != clause_value(&g, e, flipped, kind))
                .then(|| format!("edge {} at {}", e.kind, s.to_bits(q)))
        })
    });
    results.push((
        "clause is symmetric under its target",
        match asymmetric {
            None => Ok(format!("{} clause", kind.name())),
            Some(at) => Err(format!("{} clause differs at {at}", kind.name())),
        },
    ));

    let mut text = String::new();
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => text.push_str(&format!("PASS {name}: {detail}\n")),
            Err(detail) => {
                failed += 1;
                text.push_str(&format!("FAIL {name}: {detail}\n"));
            }
        }
    }
    emit(a.pair.out.as_deref(), text.as_bytes())?;
    if failed > 0 {
        return Err(Error::Verification(format!("{failed} of {} properties failed", results.len())));
    }
    Ok(())
}

fn cmd_rips(a: &RipsArgs) -> Result<()> {
    let cloud = PointCloud::load_csv(BufReader::new(open(&a.cloud)?))?;
    let diagrams = vietoris_rips_persistence(&cloud, a.max_dim, a.max_scale)?;
    match &a.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let ext = match a.format {
                FormatArg::Csv => "csv",
                FormatArg::Json => "json",
            };
            for (dim, d) in &diagrams {
                let file = File::create(dir.join(format!("H{dim}.{ext}")))?;
                d.write(file, a.format.into())?;
            }
            Ok(())
        }
        None => {
            let as_map: std::collections::BTreeMap<String, Vec<[f64; 2]>> = diagrams
                .values()
                .map(|d| {
                    let pts = d.points.iter().map(|p| [p.birth, p.death]).collect();
                    (d.label.clone(), pts)
                })
                .collect();
            emit_json(None, &as_map)
        }
    }
}

fn write_pair(dir: &Path, pair: &ReferencePair) -> Result<()> {
    let name = pair.name;
    pair.cloud1.write_csv(File::create(dir.join(format!("{name}_cloud1.csv")))?)?;
    pair.cloud2.write_csv(File::create(dir.join(format!("{name}_cloud2.csv")))?)?;
    pair.d1
        .write(File::create(dir.join(format!("{name}_d1.csv")))?, DiagramFormat::Csv)?;
    pair.d2
        .write(File::create(dir.join(format!("{name}_d2.csv")))?, DiagramFormat::Csv)?;
    Ok(())
}

fn cmd_gen_example(a: &GenExampleArgs) -> Result<()> {
    fs::create_dir_all(&a.out_dir)?;
    write_pair(&a.out_dir, &clean_pair()?)?;
    write_pair(&a.out_dir, &noisy_pair()?)?;
    let e1 = [
        ("e1_d1.csv", vec![(0.0, 1.0)]),
        ("e1_d2.csv", vec![(0.0, 1.0), (0.0, 3.0)]),
    ];
    for (file, pairs) in e1 {
        let d = PersistenceDiagram::from_pairs("H1", &pairs)?;
        d.write(File::create(a.out_dir.join(file))?, DiagramFormat::Csv)?;
    }
    Ok(())
}
