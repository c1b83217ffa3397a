//! The variational loop: circuit schedule, angle search, decoding of
//! measured states into matchings, and end-to-end distance reports.
//!
//! A circuit with `L` layers prepares
//! `U_M(β_L) U_g(γ_L) ⋯ U_M(β_1) U_g(γ_1) U_M(β_0) |initial⟩`.
//! The leading `U_M(β_0)` spreads the all-unmatched basis state over every
//! feasible matching before the first cost layer.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagrams::PersistenceDiagram;
use crate::error::{Error, Result};
use crate::exact::{enumerate_feasible, exact_distance, ExactResult, Matching};
use crate::matchgraph::{build_graph, BasisState, EdgeKind, FeasibilityMode, MatchingGraph, Variant};
use crate::qsim::{initial_state, sample_measurements, ResourceCounts, Simulator, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub gamma: f64,
    pub beta: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub beta0: f64,
    pub layers: Vec<Layer>,
}

impl QaoaParams {
    pub fn new(beta0: f64, layers: Vec<Layer>) -> Self {
        QaoaParams { beta0, layers }
    }

    fn from_slice(v: &[f64]) -> Self {
        QaoaParams {
            beta0: v[0],
            layers: v[1..]
                .chunks(2)
                .map(|c| Layer {
                    gamma: c[0],
                    beta: c[1],
                })
                .collect(),
        }
    }

    /// Divides every γ by `scale`: converts normalised-weight angles to raw ones.
    fn unscale_gammas(&self, scale: f64) -> Self {
        let mut out = self.clone();
        for l in &mut out.layers {
            l.gamma /= scale;
        }
        out
    }
}

/// Prepares the layered state from the initial basis state.
pub fn run_layers(g: &MatchingGraph, params: &QaoaParams) -> Result<StateVector> {
    let mut sim = Simulator::new(g);
    run_layers_with(&mut sim, params)
}

pub fn run_layers_with(sim: &mut Simulator<'_>, params: &QaoaParams) -> Result<StateVector> {
    let mut state = initial_state(sim.graph())?;
    sim.apply_mixer(&mut state, params.beta0)?;
    for layer in &params.layers {
        sim.apply_cost(&mut state, layer.gamma)?;
        sim.apply_mixer(&mut state, layer.beta)?;
    }
    Ok(state)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStrategy {
    Grid,
    #[default]
    GridThenNelderMead,
}

/// One evaluated parameter vector during the angle search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEntry {
    pub params: QaoaParams,
    pub expected_cost: f64,
}

/// Outcome of [`optimize_angles`].
#[derive(Clone, Debug)]
pub struct Optimized {
    /// Best parameters, with γ in units of the raw edge weights.
    pub params: QaoaParams,
    pub expected_cost: f64,
    /// Best value found by the grid stage alone.
    pub grid_expected_cost: f64,
    /// Largest edge weight; γ was searched on weights divided by it.
    pub weight_scale: f64,
    pub trace: Vec<TraceEntry>,
}

/// Nelder-Mead stops when every vertex is this close to the best one.
pub const NELDER_MEAD_SIZE_TOL: f64 = 1e-4;
pub const NELDER_MEAD_MAX_ITERS: usize = 200;

/// Minimises the expected cost of the layered state over the angles.
///
/// Angles are searched on `grid_resolution` evenly spaced values in
/// `[0, 2π)`, with γ applied to weights divided by the largest weight. With
/// one layer the grid is exhaustive over `(β0, γ, β)`; with more layers the
/// first layer comes from that exhaustive grid, later layers start from
/// seeded random grid points, and coordinate sweeps refine every angle.
/// Ties go to the lexicographically smallest parameter vector.
pub fn optimize_angles(
    g: &MatchingGraph,
    num_layers: usize,
    strategy: SearchStrategy,
    grid_resolution: usize,
    seed: u64,
) -> Result<Optimized> {
    if num_layers == 0 {
        return Err(Error::Parameter("at least one layer is required".into()));
    }
    if grid_resolution < 2 {
        return Err(Error::Parameter(format!(
            "grid resolution must be at least 2, got {grid_resolution}"
        )));
    }
    let scale = match g.max_weight() {
        w if w > 0.0 => w,
        _ => 1.0,
    };
    let mut base = Simulator::new(g);
    base.cost_diagonal();
    let grid: Vec<f64> = (0..grid_resolution)
        .map(|k| std::f64::consts::TAU * k as f64 / grid_resolution as f64)
        .collect();

    let mut trace = Vec::new();
    let (mut best, mut best_cost) = exhaustive_single_layer(&base, &grid, scale, &mut trace)?;

    if num_layers > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 1..num_layers {
            best.push(grid[rng.random_range(0..grid.len())]);
            best.push(grid[rng.random_range(0..grid.len())]);
        }
        best_cost = evaluate(&base, &best, scale)?;
        trace.push(entry(&best, scale, best_cost));
        for _sweep in 0..8 {
            let mut improved = false;
            for coord in 0..best.len() {
                let candidates: Vec<(f64, f64)> = grid
                    .par_iter()
                    .map(|&value| {
                        let mut theta = best.clone();
                        theta[coord] = value;
                        evaluate(&base, &theta, scale).map(|c| (value, c))
                    })
                    .collect::<Result<_>>()?;
                for (value, cost) in candidates {
                    let mut theta = best.clone();
                    theta[coord] = value;
                    trace.push(entry(&theta, scale, cost));
                    if cost < best_cost {
                        best_cost = cost;
                        best = theta;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }

    let grid_expected_cost = best_cost;
    if strategy == SearchStrategy::GridThenNelderMead {
        let step = 0.5 * std::f64::consts::TAU / grid_resolution as f64;
        let mut objective = |theta: &[f64]| -> Result<f64> {
            let c = evaluate(&base, theta, scale)?;
            trace.push(entry(theta, scale, c));
            Ok(c)
        };
        let (theta, cost) = nelder_mead(&mut objective, &best, step)?;
        if cost < best_cost {
            best = theta;
            best_cost = cost;
        }
    }

    Ok(Optimized {
        params: QaoaParams::from_slice(&best).unscale_gammas(scale),
        expected_cost: best_cost,
        grid_expected_cost,
        weight_scale: scale,
        trace,
    })
}

fn entry(theta: &[f64], scale: f64, expected_cost: f64) -> TraceEntry {
    TraceEntry {
        params: QaoaParams::from_slice(theta).unscale_gammas(scale),
        expected_cost,
    }
}

fn evaluate(base: &Simulator<'_>, theta: &[f64], scale: f64) -> Result<f64> {
    let mut sim = base.clone();
    let params = QaoaParams::from_slice(theta).unscale_gammas(scale);
    let state = run_layers_with(&mut sim, &params)?;
    Ok(diagonal_expectation(&state, sim.cost_diagonal()))
}

fn diagonal_expectation(state: &StateVector, costs: &[f64]) -> f64 {
    state
        .amplitudes()
        .iter()
        .zip(costs)
        .map(|(a, c)| a.norm_sqr() * c)
        .sum()
}

/// Exhaustive `(β0, γ, β)` grid, sharing the prefix states between points.
fn exhaustive_single_layer(
    base: &Simulator<'_>,
    grid: &[f64],
    scale: f64,
    trace: &mut Vec<TraceEntry>,
) -> Result<(Vec<f64>, f64)> {
    let prefixes: Vec<StateVector> = grid
        .par_iter()
        .map(|&beta0| {
            let mut sim = base.clone();
            let mut st = initial_state(sim.graph())?;
            sim.apply_mixer(&mut st, beta0)?;
            Ok(st)
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|a| (0..grid.len()).map(move |b| (a, b)))
        .collect();
    let rows: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let mut sim = base.clone();
            let mut phased = prefixes[a].clone();
            sim.apply_cost(&mut phased, grid[b] / scale)?;
            grid.iter()
                .map(|&beta| {
                    let mut st = phased.clone();
                    sim.apply_mixer(&mut st, beta)?;
                    Ok(diagonal_expectation(&st, sim.cost_diagonal()))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let mut best = vec![0.0; 3];
    let mut best_cost = f64::INFINITY;
    for (&(a, b), row) in pairs.iter().zip(&rows) {
        for (c, &cost) in row.iter().enumerate() {
            let theta = [grid[a], grid[b], grid[c]];
            trace.push(entry(&theta, scale, cost));
            if cost < best_cost {
                best_cost = cost;
                best = theta.to_vec();
            }
        }
    }
    Ok((best, best_cost))
}

/// Downhill simplex with the usual coefficients (reflect 1, expand 2,
/// contract ½, shrink ½).
fn nelder_mead<F>(f: &mut F, start: &[f64], step: f64) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let dim = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((start.to_vec(), f(start)?));
    for k in 0..dim {
        let mut x = start.to_vec();
        x[k] += step;
        let fx = f(&x)?;
        simplex.push((x, fx));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));

    for _ in 0..NELDER_MEAD_MAX_ITERS {
        order(&mut simplex);
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if size < NELDER_MEAD_SIZE_TOL {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64)
            .collect();
        let towards = |t: f64, worst: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(worst)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let worst = simplex[dim].0.clone();
        let worst_f = simplex[dim].1;
        let reflected = towards(-1.0, &worst);
        let fr = f(&reflected)?;
        if fr < simplex[0].1 {
            let expanded = towards(-2.0, &worst);
            let fe = f(&expanded)?;
            simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
        } else {
            let contracted = if fr < worst_f {
                towards(-0.5, &worst)
            } else {
                towards(0.5, &worst)
            };
            let fc = f(&contracted)?;
            if fc < worst_f.min(fr) {
                simplex[dim] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best
                        .iter()
                        .zip(&vertex.0)
                        .map(|(b, v)| b + 0.5 * (v - b))
                        .collect();
                    let fx = f(&x)?;
                    *vertex = (x, fx);
                }
            }
        }
    }
    order(&mut simplex);
    let (x, fx) = simplex.swap_remove(0);
    Ok((x, fx))
}

/// A basis state read back as a matching.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecodedMatching {
    #[serde(flatten)]
    pub matching: Matching,
    pub strict: bool,
    pub relaxed: bool,
}

/// Lists present main edges as pairs; present auxiliary edges become
/// diagonal assignments (Wasserstein) or penalised points (d_p^c).
pub fn decode_matching(g: &MatchingGraph, s: BasisState) -> DecodedMatching {
    let mut matching = Matching::default();
    let mut x_matched = vec![false; g.n()];
    for e in g.edges() {
        if s.bit(e.bit_index) {
            continue;
        }
        match e.kind {
            EdgeKind::Main { i, j } => {
                matching.pairs.push((i, j));
                x_matched[i] = true;
            }
            EdgeKind::AuxX { i } => matching.x_to_diagonal.push(i),
            EdgeKind::AuxY { j } => {
                if g.variant().is_wasserstein() {
                    matching.y_to_diagonal.push(j)
                } else {
                    matching.y_penalized.push(j)
                }
            }
        }
    }
    if !g.variant().is_wasserstein() {
        matching.x_unmatched = (0..g.n()).filter(|&i| !x_matched[i]).collect();
    }
    DecodedMatching {
        matching,
        strict: g.check_feasibility(s, FeasibilityMode::Strict),
        relaxed: g.check_feasibility(s, FeasibilityMode::Relaxed),
    }
}

#[derive(Clone, Debug)]
pub struct EstimateOptions {
    pub num_layers: usize,
    pub shots: u64,
    pub seed: u64,
    pub grid_resolution: usize,
    pub strategy: SearchStrategy,
    pub with_exact: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            num_layers: 1,
            shots: 10_000,
            seed: 0,
            grid_resolution: 16,
            strategy: SearchStrategy::default(),
            with_exact: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampledBest {
    pub bits: String,
    pub cost: f64,
    pub distance: f64,
    pub matching: DecodedMatching,
    #[serde(skip)]
    pub state: BasisState,
}

#[derive(Clone, Debug, Serialize)]
pub struct MostFrequent {
    pub bits: String,
    pub count: u64,
    #[serde(skip)]
    pub state: BasisState,
}

#[derive(Clone, Debug, Serialize)]
pub struct HistogramEntry {
    pub bits: String,
    pub count: u64,
    #[serde(skip)]
    pub state: BasisState,
    #[serde(skip)]
    pub cost: f64,
    #[serde(skip)]
    pub strict: bool,
    #[serde(skip)]
    pub relaxed: bool,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Resources {
    pub qubits: usize,
    /// Phase rotations per cost operator.
    pub rz_count: usize,
    /// Clause-controlled rotations per mixer.
    pub crx_count: usize,
    pub cost_layers: usize,
    pub mixer_layers: usize,
}

impl Resources {
    fn from_counts(qubits: usize, c: ResourceCounts) -> Self {
        let per = |total: usize, ops: usize| total.checked_div(ops).unwrap_or(0);
        Resources {
            qubits,
            rz_count: per(c.rz, c.cost_layers),
            crx_count: per(c.crx, c.mixer_layers),
            cost_layers: c.cost_layers,
            mixer_layers: c.mixer_layers,
        }
    }
}

/// Everything the `qaoa` subcommand reports.
#[derive(Clone, Debug, Serialize)]
pub struct DistanceReport {
    pub variant: Variant,
    pub n: usize,
    pub m: usize,
    pub swapped: bool,
    pub params: QaoaParams,
    pub weight_scale: f64,
    pub expected_cost: f64,
    pub best: Option<SampledBest>,
    pub most_frequent: MostFrequent,
    pub histogram: Vec<HistogramEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactResult>,
    pub resources: Resources,
}

impl DistanceReport {
    /// Relaxed-feasible state with the fewest counts, unsampled states
    /// counting as zero. Ties go to the smallest index.
    pub fn least_frequent_feasible(&self, g: &MatchingGraph) -> Result<(BasisState, u64)> {
        let counts = histogram_map(self);
        enumerate_feasible(g, FeasibilityMode::Relaxed)?
            .into_iter()
            .map(|s| (s, counts.get(&s).copied().unwrap_or(0)))
            .fold(None, |acc: Option<(BasisState, u64)>, (s, c)| match acc {
                Some((_, best)) if best <= c => acc,
                _ => Some((s, c)),
            })
            .ok_or_else(|| Error::Infeasible("no feasible states".into()))
    }

    /// Histogram rows `bits,count,cost,strict,relaxed`.
    pub fn write_histogram_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["bits", "count", "cost", "strict", "relaxed"])
            .map_err(io)?;
        for h in &self.histogram {
            w.write_record([
                h.bits.clone(),
                h.count.to_string(),
                h.cost.to_string(),
                h.strict.to_string(),
                h.relaxed.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Builds the graph, optimises angles, samples the prepared state and
/// reports the cheapest feasible sampled matching.
pub fn estimate_distance(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    variant: Variant,
    options: &EstimateOptions,
) -> Result<DistanceReport> {
    let g = build_graph(d1, d2, variant)?;
    let optimized = optimize_angles(
        &g,
        options.num_layers,
        options.strategy,
        options.grid_resolution,
        options.seed,
    )?;
    report_for_params(&g, &optimized.params, optimized.weight_scale, options)
}

/// Runs a fixed parameter set and assembles the report.
pub fn report_for_params(
    g: &MatchingGraph,
    params: &QaoaParams,
    weight_scale: f64,
    options: &EstimateOptions,
) -> Result<DistanceReport> {
    let mut sim = Simulator::new(g);
    let state = run_layers_with(&mut sim, params)?;
    let expected_cost = diagonal_expectation(&state, sim.cost_diagonal());
    let counts = sample_measurements(&state, options.shots, options.seed)?;
    let q = g.num_qubits();

    let histogram: Vec<HistogramEntry> = counts
        .iter()
        .map(|(&s, &count)| HistogramEntry {
            bits: s.to_bits(q),
            count,
            state: s,
            cost: g.state_cost(s),
            strict: g.check_feasibility(s, FeasibilityMode::Strict),
            relaxed: g.check_feasibility(s, FeasibilityMode::Relaxed),
        })
        .collect();

    // BTreeMap order makes the first maximum the smallest index.
    let (&top, &top_count) = counts
        .iter()
        .fold(None, |acc: Option<(&BasisState, &u64)>, (s, c)| match acc {
            Some((_, best)) if best >= c => acc,
            _ => Some((s, c)),
        })
        .expect("at least one shot was sampled");

    let best = histogram
        .iter()
        .filter(|h| h.relaxed)
        .fold(None::<&HistogramEntry>, |acc, h| match acc {
            Some(b) if b.cost <= h.cost => Some(b),
            _ => Some(h),
        })
        .map(|h| SampledBest {
            bits: h.bits.clone(),
            cost: h.cost,
            distance: g.variant().cost_to_distance(h.cost, g.m()),
            matching: decode_matching(g, h.state),
            state: h.state,
        });

    let exact = if options.with_exact {
        Some(exact_distance(g.d1(), g.d2(), *g.variant())?)
    } else {
        None
    };

    Ok(DistanceReport {
        variant: *g.variant(),
        n: g.n(),
        m: g.m(),
        swapped: g.swapped(),
        params: params.clone(),
        weight_scale,
        expected_cost,
        best,
        most_frequent: MostFrequent {
            bits: top.to_bits(q),
            count: top_count,
            state: top,
        },
        histogram,
        exact,
        resources: Resources::from_counts(q, sim.counts()),
    })
}

/// Histogram keyed by basis state, for callers that want the raw counts.
pub fn histogram_map(report: &DistanceReport) -> BTreeMap<BasisState, u64> {
    report.histogram.iter().map(|h| (h.state, h.count)).collect()
}
