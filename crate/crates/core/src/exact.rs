//! Classical reference solvers: rectangular Hungarian assignment, exact
//! diagram distances, and exhaustive enumeration of feasible edge states.

use serde::Serialize;

use crate::diagrams::PersistenceDiagram;
use crate::error::{Error, Result};
use crate::matchgraph::{qubit_cap, BasisState, FeasibilityMode, MatchingGraph, Metric, Variant};

/// Row-to-column assignment with its total cost.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assignment {
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: f64,
}

/// Minimum-cost assignment of every row to a distinct column.
///
/// `cost` is a `rows × cols` matrix with `rows <= cols`. Entries equal to
/// `f64::INFINITY` are forbidden. Among optimal assignments the one with the
/// lexicographically smallest column sequence is returned.
pub fn hungarian_assign(cost: &[Vec<f64>]) -> Result<Assignment> {
    let rows = cost.len();
    if rows == 0 {
        return Ok(Assignment {
            pairs: Vec::new(),
            total_cost: 0.0,
        });
    }
    let cols = cost[0].len();
    if cost.iter().any(|r| r.len() != cols) {
        return Err(Error::Parameter("cost matrix rows differ in length".into()));
    }
    if rows > cols {
        return Err(Error::Parameter(format!(
            "assignment needs rows <= columns, got {rows} × {cols}"
        )));
    }
    let forbidden = |x: f64| x == f64::INFINITY;
    if cost.iter().flatten().any(|x| x.is_nan() || *x == f64::NEG_INFINITY) {
        return Err(Error::Parameter("cost matrix entries must be finite or +inf".into()));
    }
    if let Some(r) = cost.iter().position(|row| row.iter().all(|&x| forbidden(x))) {
        return Err(Error::Infeasible(format!("row {r} has no allowed column")));
    }

    // Forbidden cells become a value larger than any achievable finite total.
    let sentinel = cost
        .iter()
        .flatten()
        .filter(|x| !forbidden(**x))
        .map(|x| x.abs())
        .sum::<f64>()
        + 1.0;
    let dense: Vec<f64> = cost
        .iter()
        .flatten()
        .map(|&x| if forbidden(x) { sentinel } else { x })
        .collect();
    let at = |r: usize, c: usize| dense[r * cols + c];

    let solved = solve_dense(&dense, rows, cols);
    let mut chosen = solved.assignment;
    if chosen.iter().enumerate().any(|(r, &c)| forbidden(cost[r][c])) {
        return Err(Error::Infeasible(
            "every assignment uses a forbidden entry".into(),
        ));
    }
    let optimum: f64 = chosen.iter().enumerate().map(|(r, &c)| at(r, c)).sum();
    let scale = dense.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let tol = 1e-9 * scale.max(optimum.abs());

    // Lexicographic tie-break: for each row try smaller columns that are tight
    // under the optimal duals and keep the first one that still completes to an
    // optimal assignment.
    for r in 0..rows {
        let prefix_cost: f64 = (0..r).map(|k| at(k, chosen[k])).sum();
        #[allow(clippy::needless_range_loop)]
        for c in 0..chosen[r] {
            if chosen[..r].contains(&c) || forbidden(cost[r][c]) {
                continue;
            }
            if at(r, c) - solved.row_dual[r] - solved.col_dual[c] > tol {
                continue;
            }
            let free_cols: Vec<usize> = (0..cols)
                .filter(|k| *k != c && !chosen[..r].contains(k))
                .collect();
            let rest: Vec<usize> = (r + 1..rows).collect();
            let (tail_cost, tail) = if rest.is_empty() {
                (0.0, Vec::new())
            } else {
                let sub: Vec<f64> = rest
                    .iter()
                    .flat_map(|&rr| free_cols.iter().map(move |&cc| (rr, cc)))
                    .map(|(rr, cc)| at(rr, cc))
                    .collect();
                let s = solve_dense(&sub, rest.len(), free_cols.len());
                let tail: Vec<usize> = s.assignment.iter().map(|&k| free_cols[k]).collect();
                let tail_cost = rest.iter().zip(&tail).map(|(&rr, &cc)| at(rr, cc)).sum();
                (tail_cost, tail)
            };
            if prefix_cost + at(r, c) + tail_cost <= optimum + tol {
                chosen[r] = c;
                chosen[r + 1..].copy_from_slice(&tail);
                break;
            }
        }
    }

    let total_cost = chosen.iter().enumerate().map(|(r, &c)| cost[r][c]).sum();
    Ok(Assignment {
        pairs: chosen.into_iter().enumerate().collect(),
        total_cost,
    })
}

struct DenseSolution {
    assignment: Vec<usize>,
    row_dual: Vec<f64>,
    col_dual: Vec<f64>,
}

/// Shortest-augmenting-path Hungarian method with potentials, O(rows² · cols).
fn solve_dense(cost: &[f64], rows: usize, cols: usize) -> DenseSolution {
    debug_assert!(rows <= cols);
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    // owner[j] = 1-based row matched to 1-based column j, 0 when free.
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];

    for i in 1..=rows {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * cols + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; rows];
    for j in 1..=cols {
        if owner[j] > 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    DenseSolution {
        assignment,
        row_dual: u[1..].to_vec(),
        col_dual: v[1..].to_vec(),
    }
}

/// How the points of the two diagrams are paired up.
///
/// Indices refer to the graph orientation: after the d_p^c swap, `x` is the
/// smaller diagram.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub x_to_diagonal: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub y_to_diagonal: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub y_penalized: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub x_unmatched: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactResult {
    pub distance: f64,
    pub optimal_cost: f64,
    pub matching: Matching,
    pub variant: Variant,
    pub n: usize,
    pub m: usize,
    pub swapped: bool,
}

/// Exact distance through a single assignment problem.
///
/// Wasserstein uses the `(n+m) × (n+m)` matrix augmented with diagonal
/// proxies, where each point may only reach its own projection. d_p^c
/// solves the `n × m` problem on clipped costs `min(c, ‖x−y‖)^p`.
pub fn exact_distance(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    variant: Variant,
) -> Result<ExactResult> {
    variant.validate()?;
    match variant.metric {
        Metric::Wasserstein => exact_wasserstein(d1, d2, variant),
        Metric::Dcp { c } => {
            let swapped = d1.len() > d2.len();
            let (d1, d2) = if swapped { (d2, d1) } else { (d1, d2) };
            exact_dcp(d1, d2, variant, c, swapped)
        }
    }
}

fn exact_wasserstein(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    variant: Variant,
) -> Result<ExactResult> {
    let (n, m) = (d1.len(), d2.len());
    let (p, q) = (variant.p, variant.q);
    let size = n + m;
    let mut cost = vec![vec![f64::INFINITY; size]; size];
    // Rows: x_0..x_{n-1}, then proxies of y. Columns: y_0..y_{m-1}, then proxies of x.
    for (i, x) in d1.points.iter().enumerate() {
        for (j, y) in d2.points.iter().enumerate() {
            cost[i][j] = q.distance(*x, *y).powf(p);
        }
        cost[i][m + i] = q.distance(*x, x.diagonal_projection()).powf(p);
    }
    for (j, y) in d2.points.iter().enumerate() {
        cost[n + j][j] = q.distance(y.diagonal_projection(), *y).powf(p);
        for i in 0..n {
            cost[n + j][m + i] = 0.0;
        }
    }
    let assignment = hungarian_assign(&cost)?;

    let mut matching = Matching::default();
    for &(r, c) in &assignment.pairs {
        match (r < n, c < m) {
            (true, true) => matching.pairs.push((r, c)),
            (true, false) => matching.x_to_diagonal.push(r),
            (false, true) => matching.y_to_diagonal.push(c),
            (false, false) => {}
        }
    }
    matching.y_to_diagonal.sort_unstable();
    let optimal_cost = assignment.total_cost;
    Ok(ExactResult {
        distance: variant.cost_to_distance(optimal_cost, m),
        optimal_cost,
        matching,
        variant,
        n,
        m,
        swapped: false,
    })
}

fn exact_dcp(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    variant: Variant,
    c: f64,
    swapped: bool,
) -> Result<ExactResult> {
    let (n, m) = (d1.len(), d2.len());
    let (p, q) = (variant.p, variant.q);
    let penalty = c.powf(p);
    let raw: Vec<Vec<f64>> = d1
        .points
        .iter()
        .map(|x| d2.points.iter().map(|y| q.distance(*x, *y)).collect())
        .collect();
    let clipped: Vec<Vec<f64>> = raw
        .iter()
        .map(|row| row.iter().map(|&d| d.min(c).powf(p)).collect())
        .collect();
    let assignment = hungarian_assign(&clipped)?;

    let mut matching = Matching::default();
    let mut covered = vec![false; m];
    for &(i, j) in &assignment.pairs {
        if raw[i][j] < c {
            matching.pairs.push((i, j));
            covered[j] = true;
        } else {
            matching.x_unmatched.push(i);
        }
    }
    matching.y_penalized = (0..m).filter(|&j| !covered[j]).collect();
    let optimal_cost = assignment.total_cost + penalty * (m - n) as f64;
    Ok(ExactResult {
        distance: variant.cost_to_distance(optimal_cost, m),
        optimal_cost,
        matching,
        variant,
        n,
        m,
        swapped,
    })
}

/// All basis states passing `check_feasibility(mode)`, ascending, with the
/// default qubit cap.
pub fn enumerate_feasible(g: &MatchingGraph, mode: FeasibilityMode) -> Result<Vec<BasisState>> {
    enumerate_feasible_with_cap(g, mode, qubit_cap())
}

/// Builds feasible states constructively: every partial injective main
/// matching, then every admissible choice of auxiliary bits on top of it.
pub fn enumerate_feasible_with_cap(
    g: &MatchingGraph,
    mode: FeasibilityMode,
    cap: usize,
) -> Result<Vec<BasisState>> {
    if g.num_qubits() > cap {
        return Err(Error::Capacity {
            what: "enumeration qubit count",
            requested: g.num_qubits(),
            cap,
        });
    }
    let (n, m) = (g.n(), g.m());
    let mut mains = Vec::new();
    let mut row_choice = vec![None; n];
    partial_matchings(0, m, &mut vec![false; m], &mut row_choice, &mut mains);

    let mut states = Vec::new();
    for choice in &mains {
        let mut base = g.initial_basis_state().0;
        let mut col_matched = vec![false; m];
        for (i, c) in choice.iter().enumerate() {
            if let Some(j) = *c {
                base &= !(1 << g.main_bit(i, j));
                col_matched[j] = true;
            }
        }
        // Aux edges of main-matched vertices: absent in strict mode, free in
        // relaxed mode. Aux edges of unmatched vertices stay present.
        let mut free = Vec::new();
        let mut aux_of_matched = Vec::new();
        for (i, c) in choice.iter().enumerate() {
            if let (Some(_), Some(bit)) = (c, g.aux_x_bit(i)) {
                aux_of_matched.push(bit);
            }
        }
        for (j, matched) in col_matched.iter().enumerate() {
            if *matched {
                aux_of_matched.push(g.aux_y_bit(j));
            }
        }
        match mode {
            FeasibilityMode::Strict => {
                for bit in aux_of_matched {
                    base |= 1 << bit;
                }
            }
            FeasibilityMode::Relaxed => free = aux_of_matched,
        }
        for subset in 0..1usize << free.len() {
            let mut s = base;
            for (k, bit) in free.iter().enumerate() {
                if subset >> k & 1 == 1 {
                    s |= 1 << bit;
                }
            }
            states.push(BasisState(s));
        }
    }
    states.sort_unstable();
    debug_assert!(states.iter().all(|&s| g.check_feasibility(s, mode)));
    Ok(states)
}

fn partial_matchings(
    row: usize,
    m: usize,
    used: &mut Vec<bool>,
    choice: &mut Vec<Option<usize>>,
    out: &mut Vec<Vec<Option<usize>>>,
) {
    if row == choice.len() {
        out.push(choice.clone());
        return;
    }
    choice[row] = None;
    partial_matchings(row + 1, m, used, choice, out);
    for j in 0..m {
        if !used[j] {
            used[j] = true;
            choice[row] = Some(j);
            partial_matchings(row + 1, m, used, choice, out);
            used[j] = false;
        }
    }
    choice[row] = None;
}

/// Minimum cost over feasible states of the given mode; ties go to the smallest index.
pub fn minimum_over(g: &MatchingGraph, mode: FeasibilityMode) -> Result<(f64, BasisState)> {
    let states = enumerate_feasible(g, mode)?;
    let mut best: Option<(f64, BasisState)> = None;
    for s in states {
        let c = g.state_cost(s);
        if best.is_none_or(|(b, _)| c < b) {
            best = Some((c, s));
        }
    }
    // The all-unmatched state is always feasible, so the list is never empty.
    best.ok_or_else(|| Error::Infeasible("no feasible basis state".into()))
}

/// Minimum `state_cost` over the relaxed-feasible states.
pub fn brute_force_optimum(g: &MatchingGraph) -> Result<(f64, BasisState)> {
    minimum_over(g, FeasibilityMode::Relaxed)
}
