//! The weighted matching graph and its fixed qubit layout.
//!
//! Every edge owns one qubit. A qubit in `|0⟩` means the edge is present, so
//! the bit value is the complement of the edge-selection variable. Bits are
//! laid out row-major over the main edges `(i, j)`, followed by the `x`-side
//! auxiliary edges (Wasserstein only) and then the `y`-side auxiliary edges.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diagrams::{Norm, PersistenceDiagram};
use crate::error::{Error, Result};

/// Default upper bound on the number of edge qubits.
pub const DEFAULT_QUBIT_CAP: usize = 24;

/// Qubit cap, overridable through the `PDQ_QUBIT_CAP` environment variable.
pub fn qubit_cap() -> usize {
    std::env::var("PDQ_QUBIT_CAP")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_QUBIT_CAP)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Metric {
    /// Unmatched points pay their distance to the diagonal.
    Wasserstein,
    /// Unmatched or far points pay a constant `c`, normalised by the larger cardinality.
    Dcp { c: f64 },
}

/// Which distance to compute, with its exponent `p` and point norm `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    #[serde(flatten)]
    pub metric: Metric,
    pub p: f64,
    pub q: Norm,
}

impl Variant {
    pub fn wasserstein(p: f64, q: Norm) -> Result<Self> {
        check_p(p)?;
        Ok(Variant {
            metric: Metric::Wasserstein,
            p,
            q,
        })
    }

    pub fn dcp(p: f64, q: Norm, c: f64) -> Result<Self> {
        check_p(p)?;
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::Parameter(format!("penalty c must be positive, got {c}")));
        }
        Ok(Variant {
            metric: Metric::Dcp { c },
            p,
            q,
        })
    }

    pub fn is_wasserstein(&self) -> bool {
        matches!(self.metric, Metric::Wasserstein)
    }

    pub fn name(&self) -> &'static str {
        match self.metric {
            Metric::Wasserstein => "wasserstein",
            Metric::Dcp { .. } => "dcp",
        }
    }

    /// Maps an optimisation cost to a distance: `cost^(1/p)` or `(cost/m)^(1/p)`.
    pub fn cost_to_distance(&self, cost: f64, m: usize) -> f64 {
        let cost = cost.max(0.0);
        match self.metric {
            Metric::Wasserstein => cost.powf(1.0 / self.p),
            Metric::Dcp { .. } if m == 0 => 0.0,
            Metric::Dcp { .. } => (cost / m as f64).powf(1.0 / self.p),
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        check_p(self.p)?;
        if let Metric::Dcp { c } = self.metric {
            if !c.is_finite() || c <= 0.0 {
                return Err(Error::Parameter(format!("penalty c must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

fn check_p(p: f64) -> Result<()> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::Parameter(format!("exponent p must be finite and >= 1, got {p}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeKind {
    /// Between `x_i ∈ D1` and `y_j ∈ D2`.
    Main { i: usize, j: usize },
    /// Between `x_i` and its diagonal proxy.
    AuxX { i: usize },
    /// Between `y_j` and its diagonal proxy (Wasserstein) or penalty vertex (d_p^c).
    AuxY { j: usize },
}

impl EdgeKind {
    pub fn is_main(&self) -> bool {
        matches!(self, EdgeKind::Main { .. })
    }

    /// Vertex labels, 0-based: `x0`, `y1`, `x~0`, `y~1`.
    pub fn endpoints(&self) -> [String; 2] {
        match *self {
            EdgeKind::Main { i, j } => [format!("x{i}"), format!("y{j}")],
            EdgeKind::AuxX { i } => [format!("x{i}"), format!("x~{i}")],
            EdgeKind::AuxY { j } => [format!("y~{j}"), format!("y{j}")],
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b] = self.endpoints();
        write!(f, "({a},{b})")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Edge {
    #[serde(flatten)]
    pub kind: EdgeKind,
    pub weight: f64,
    pub bit_index: usize,
}

/// A computational basis state of the edge register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisState(pub usize);

impl BasisState {
    /// Bit value at `bit_index`; 0 means the edge is present.
    pub fn bit(self, bit_index: usize) -> bool {
        self.0 >> bit_index & 1 == 1
    }

    /// Bits as a 0/1 string ordered by ascending bit index.
    pub fn to_bits(self, num_qubits: usize) -> String {
        (0..num_qubits)
            .map(|k| if self.bit(k) { '1' } else { '0' })
            .collect()
    }

    /// Inverse of [`BasisState::to_bits`].
    pub fn from_bits(bits: &str) -> Result<Self> {
        let mut index = 0usize;
        for (k, ch) in bits.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => index |= 1 << k,
                other => {
                    return Err(Error::Parameter(format!("invalid bit character {other:?}")))
                }
            }
        }
        Ok(BasisState(index))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeasibilityMode {
    /// Every constrained vertex is matched exactly once.
    Strict,
    /// At most one main edge per vertex, and every constrained vertex is covered.
    Relaxed,
}

#[derive(Clone, Debug)]
pub struct MatchingGraph {
    variant: Variant,
    d1: PersistenceDiagram,
    d2: PersistenceDiagram,
    swapped: bool,
    edges: Vec<Edge>,
    num_qubits: usize,
    pub(crate) masks: Masks,
}

/// Bit masks over basis indices used by the predicates and the simulator.
#[derive(Clone, Debug)]
pub(crate) struct Masks {
    pub all: usize,
    pub main: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub aux_x: Vec<usize>,
    pub aux_y: Vec<usize>,
}

impl MatchingGraph {
    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    /// Cardinality of the (possibly swapped) first diagram.
    pub fn n(&self) -> usize {
        self.d1.len()
    }

    pub fn m(&self) -> usize {
        self.d2.len()
    }

    pub fn d1(&self) -> &PersistenceDiagram {
        &self.d1
    }

    pub fn d2(&self) -> &PersistenceDiagram {
        &self.d2
    }

    /// True when the inputs were exchanged so that `n <= m` (d_p^c only).
    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dimension(&self) -> usize {
        1usize << self.num_qubits
    }

    pub fn main_bit(&self, i: usize, j: usize) -> usize {
        i * self.m() + j
    }

    pub fn aux_x_bit(&self, i: usize) -> Option<usize> {
        self.variant.is_wasserstein().then(|| self.n() * self.m() + i)
    }

    pub fn aux_y_bit(&self, j: usize) -> usize {
        let nm = self.n() * self.m();
        if self.variant.is_wasserstein() {
            nm + self.n() + j
        } else {
            nm + j
        }
    }

    /// Sum of all edge weights.
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn max_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).fold(0.0, f64::max)
    }

    /// Sum of the weights of present (bit 0) edges.
    pub fn state_cost(&self, s: BasisState) -> f64 {
        self.edges
            .iter()
            .filter(|e| !s.bit(e.bit_index))
            .map(|e| e.weight)
            .sum()
    }

    pub fn check_feasibility(&self, s: BasisState, mode: FeasibilityMode) -> bool {
        let present = !s.0 & self.masks.all;
        let wasserstein = self.variant.is_wasserstein();
        let mk = &self.masks;
        for i in 0..self.n() {
            let main = (present & mk.rows[i]).count_ones();
            if main > 1 {
                return false;
            }
            if wasserstein {
                let total = main + (present & mk.aux_x[i]).count_ones();
                let ok = match mode {
                    FeasibilityMode::Strict => total == 1,
                    FeasibilityMode::Relaxed => total >= 1,
                };
                if !ok {
                    return false;
                }
            }
        }
        for j in 0..self.m() {
            let main = (present & mk.cols[j]).count_ones();
            if main > 1 {
                return false;
            }
            let total = main + (present & mk.aux_y[j]).count_ones();
            let ok = match mode {
                FeasibilityMode::Strict => total == 1,
                FeasibilityMode::Relaxed => total >= 1,
            };
            if !ok {
                return false;
            }
        }
        true
    }

    /// The all-unmatched basis state: main bits 1, auxiliary bits 0.
    pub fn initial_basis_state(&self) -> BasisState {
        BasisState(self.masks.main)
    }
}

/// Builds the matching graph using the cap from [`qubit_cap`].
pub fn build_graph(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    variant: Variant,
) -> Result<MatchingGraph> {
    build_graph_with_cap(d1, d2, variant, qubit_cap())
}

pub fn build_graph_with_cap(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    variant: Variant,
    cap: usize,
) -> Result<MatchingGraph> {
    variant.validate()?;
    let wasserstein = variant.is_wasserstein();
    let swapped = !wasserstein && d1.len() > d2.len();
    let (d1, d2) = if swapped { (d2, d1) } else { (d1, d2) };
    let (n, m) = (d1.len(), d2.len());

    let num_qubits = if wasserstein { n * m + n + m } else { n * m + m };
    if num_qubits > cap.min(usize::BITS as usize - 1) {
        return Err(Error::Capacity {
            what: "qubit count",
            requested: num_qubits,
            cap,
        });
    }

    let (p, q) = (variant.p, variant.q);
    let mut edges = Vec::with_capacity(num_qubits);
    for (i, x) in d1.points.iter().enumerate() {
        for (j, y) in d2.points.iter().enumerate() {
            edges.push(Edge {
                kind: EdgeKind::Main { i, j },
                weight: q.distance(*x, *y).powf(p),
                bit_index: i * m + j,
            });
        }
    }
    if wasserstein {
        for (i, x) in d1.points.iter().enumerate() {
            edges.push(Edge {
                kind: EdgeKind::AuxX { i },
                weight: q.distance(*x, x.diagonal_projection()).powf(p),
                bit_index: n * m + i,
            });
        }
    }
    for (j, y) in d2.points.iter().enumerate() {
        let weight = match variant.metric {
            Metric::Wasserstein => q.distance(y.diagonal_projection(), *y).powf(p),
            Metric::Dcp { c } => c.powf(p),
        };
        edges.push(Edge {
            kind: EdgeKind::AuxY { j },
            weight,
            bit_index: if wasserstein { n * m + n + j } else { n * m + j },
        });
    }

    let mut masks = Masks {
        all: (1usize << num_qubits) - 1,
        main: 0,
        rows: vec![0; n],
        cols: vec![0; m],
        aux_x: vec![0; n],
        aux_y: vec![0; m],
    };
    for e in &edges {
        let bit = 1usize << e.bit_index;
        match e.kind {
            EdgeKind::Main { i, j } => {
                masks.main |= bit;
                masks.rows[i] |= bit;
                masks.cols[j] |= bit;
            }
            EdgeKind::AuxX { i } => masks.aux_x[i] = bit,
            EdgeKind::AuxY { j } => masks.aux_y[j] = bit,
        }
    }

    Ok(MatchingGraph {
        variant,
        d1: d1.clone(),
        d2: d2.clone(),
        swapped,
        edges,
        num_qubits,
        masks,
    })
}

/// JSON document describing a graph, as emitted by the `graph` subcommand.
#[derive(Clone, Debug, Serialize)]
pub struct GraphDump {
    pub variant: Variant,
    pub n: usize,
    pub m: usize,
    pub swapped: bool,
    pub num_qubits: usize,
    pub edges: Vec<EdgeDump>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeDump {
    #[serde(flatten)]
    pub kind: EdgeKind,
    pub endpoints: [String; 2],
    pub weight: f64,
    pub bit_index: usize,
}

impl MatchingGraph {
    pub fn dump(&self) -> GraphDump {
        GraphDump {
            variant: self.variant,
            n: self.n(),
            m: self.m(),
            swapped: self.swapped,
            num_qubits: self.num_qubits,
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDump {
                    kind: e.kind,
                    endpoints: e.kind.endpoints(),
                    weight: e.weight,
                    bit_index: e.bit_index,
                })
                .collect(),
        }
    }
}
