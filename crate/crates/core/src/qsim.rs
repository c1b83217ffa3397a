//! Statevector engine for the edge register.
//!
//! Conventions: `R_Z(θ) = exp(−iθZ/2)` with `Z|0⟩ = +|0⟩`, and
//! `R_X(β) = exp(−iβX/2)`, so a mixing rotation acts on a pair of basis
//! states as `[[cos β/2, −i sin β/2], [−i sin β/2, cos β/2]]`.
//!
//! Each edge's mixing rotation is controlled by a clause over the other
//! edge qubits. The clause never reads the target qubit itself, so the two
//! basis states a rotation couples always agree on whether it fires and
//! every per-edge operator is unitary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matchgraph::{qubit_cap, BasisState, Edge, EdgeKind, MatchingGraph};

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state `|s⟩`.
    pub fn basis(num_qubits: usize, s: BasisState) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[s.0] = Complex64::new(1.0, 0.0);
        StateVector {
            num_qubits,
            amplitudes,
        }
    }

    pub fn from_amplitudes(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << num_qubits {
            return Err(Error::Parameter(format!(
                "{} amplitudes do not form a {num_qubits}-qubit state",
                amplitudes.len()
            )));
        }
        Ok(StateVector {
            num_qubits,
            amplitudes,
        })
    }

    /// Equal-weight superposition of the given basis states.
    pub fn uniform_over(num_qubits: usize, states: &[BasisState]) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        let a = 1.0 / (states.len() as f64).sqrt();
        for s in states {
            amplitudes[s.0] = Complex64::new(a, 0.0);
        }
        StateVector {
            num_qubits,
            amplitudes,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, s: BasisState) -> Complex64 {
        self.amplitudes[s.0]
    }

    pub fn probability(&self, s: BasisState) -> f64 {
        self.amplitudes[s.0].norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for a in &mut self.amplitudes {
                *a /= n;
            }
        }
    }

    /// Basis states whose amplitude magnitude exceeds `threshold`.
    pub fn support(&self, threshold: f64) -> Vec<BasisState> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > threshold)
            .map(|(k, _)| BasisState(k))
            .collect()
    }

    fn check_graph(&self, g: &MatchingGraph) -> Result<()> {
        if self.num_qubits != g.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: g.num_qubits(),
                found: self.num_qubits,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClauseKind {
    /// The control clause exactly as written, including the factor on the
    /// target edge's own bit. Only meaningful as a classical predicate.
    #[serde(rename = "paper")]
    PaperLiteral,
    /// The clause with the target-bit factor removed; used inside unitaries.
    #[default]
    #[serde(rename = "symmetric")]
    SymmetricGenerator,
}

impl ClauseKind {
    pub fn name(self) -> &'static str {
        match self {
            ClauseKind::PaperLiteral => "paper",
            ClauseKind::SymmetricGenerator => "symmetric",
        }
    }
}

/// Bit-mask form of an edge's control clause over basis indices.
#[derive(Clone, Copy, Debug)]
struct Clause {
    target: usize,
    /// Bits that must be 1 (edges absent).
    all_absent: usize,
    /// Bits that must be 0 (edges present).
    all_present: usize,
    /// When set, at least one of these bits must be 0. An empty mask never fires.
    any_present: Option<usize>,
}

impl Clause {
    fn for_edge(g: &MatchingGraph, edge: &Edge) -> Clause {
        let mk = &g.masks;
        let target = 1usize << edge.bit_index;
        match edge.kind {
            EdgeKind::Main { i, j } => {
                // No other main edge on x_i or y_j, and the auxiliary edges of
                // both endpoints present, so toggling (i, j) never uncovers a vertex.
                let mut all_present = mk.aux_y[j];
                if let Some(bit) = g.aux_x_bit(i) {
                    all_present |= 1 << bit;
                }
                Clause {
                    target,
                    all_absent: (mk.rows[i] | mk.cols[j]) & !target,
                    all_present,
                    any_present: None,
                }
            }
            EdgeKind::AuxX { i } => Clause {
                target,
                all_absent: 0,
                all_present: 0,
                any_present: Some(mk.rows[i]),
            },
            EdgeKind::AuxY { j } => Clause {
                target,
                all_absent: 0,
                all_present: 0,
                any_present: Some(mk.cols[j]),
            },
        }
    }

    #[inline]
    fn fires(&self, s: usize) -> bool {
        s & self.all_absent == self.all_absent
            && s & self.all_present == 0
            && self.any_present.is_none_or(|m| s & m != m)
    }

    fn controls(&self) -> Vec<usize> {
        let mask = self.all_absent | self.all_present | self.any_present.unwrap_or(0);
        (0..usize::BITS as usize).filter(|k| mask >> k & 1 == 1).collect()
    }
}

/// Value of an edge's control clause on a basis state.
///
/// `PaperLiteral` main edges fire only when the edge is absent and no other
/// main edge touches either endpoint; auxiliary edges fire only when present
/// and their point has a main edge. `SymmetricGenerator` drops the condition
/// on the target bit and, for main edges, requires the endpoints' auxiliary
/// edges to be present.
pub fn clause_value(g: &MatchingGraph, edge: &Edge, s: BasisState, kind: ClauseKind) -> bool {
    let mk = &g.masks;
    let target_set = s.bit(edge.bit_index);
    match kind {
        ClauseKind::SymmetricGenerator => Clause::for_edge(g, edge).fires(s.0),
        ClauseKind::PaperLiteral => match edge.kind {
            EdgeKind::Main { i, j } => {
                let others = (mk.rows[i] | mk.cols[j]) & !(1 << edge.bit_index);
                target_set && s.0 & others == others
            }
            EdgeKind::AuxX { i } => !target_set && s.0 & mk.rows[i] != mk.rows[i],
            EdgeKind::AuxY { j } => !target_set && s.0 & mk.cols[j] != mk.cols[j],
        },
    }
}

/// The all-unmatched basis state: every main edge absent, every auxiliary edge present.
pub fn initial_state(g: &MatchingGraph) -> Result<StateVector> {
    let cap = qubit_cap();
    if g.num_qubits() > cap {
        return Err(Error::Capacity {
            what: "qubit count",
            requested: g.num_qubits(),
            cap,
        });
    }
    Ok(StateVector::basis(g.num_qubits(), g.initial_basis_state()))
}

/// Gate counts accumulated by a [`Simulator`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ResourceCounts {
    pub rz: usize,
    pub crx: usize,
    pub cost_layers: usize,
    pub mixer_layers: usize,
}

/// Applies cost and mixer operators for one graph, counting rotations and
/// optionally recording a gate trace.
#[derive(Clone, Debug)]
pub struct Simulator<'g> {
    graph: &'g MatchingGraph,
    mixer: Vec<Clause>,
    costs: Vec<f64>,
    counts: ResourceCounts,
    trace: Option<String>,
}

impl<'g> Simulator<'g> {
    pub fn new(graph: &'g MatchingGraph) -> Self {
        // Mixer order: main edges row-major, then y-side aux ascending, then x-side aux.
        let mut ordered: Vec<&Edge> = graph.edges().iter().filter(|e| e.kind.is_main()).collect();
        ordered.extend(
            graph
                .edges()
                .iter()
                .filter(|e| matches!(e.kind, EdgeKind::AuxY { .. })),
        );
        ordered.extend(
            graph
                .edges()
                .iter()
                .filter(|e| matches!(e.kind, EdgeKind::AuxX { .. })),
        );
        let mixer = ordered.iter().map(|e| Clause::for_edge(graph, e)).collect();
        Simulator {
            graph,
            mixer,
            costs: Vec::new(),
            counts: ResourceCounts::default(),
            trace: None,
        }
    }

    /// Enables the plain-text gate trace.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(String::new());
        self
    }

    pub fn graph(&self) -> &'g MatchingGraph {
        self.graph
    }

    pub fn counts(&self) -> ResourceCounts {
        self.counts
    }

    pub fn trace(&self) -> Option<&str> {
        self.trace.as_deref()
    }

    /// Cost of every basis state, computed once and cached.
    pub fn cost_diagonal(&mut self) -> &[f64] {
        if self.costs.is_empty() {
            let g = self.graph;
            self.costs = (0..g.dimension())
                .map(|k| g.state_cost(BasisState(k)))
                .collect();
        }
        &self.costs
    }

    /// `U_g(γ) = ∏_e R_Z(−γ w_e)`: multiplies `|s⟩` by `exp(i γ/2 Σ_e w_e z_e(s))`.
    pub fn apply_cost(&mut self, state: &mut StateVector, gamma: f64) -> Result<()> {
        state.check_graph(self.graph)?;
        let total = self.graph.total_weight();
        self.cost_diagonal();
        for (a, &cost) in state.amplitudes.iter_mut().zip(&self.costs) {
            // Σ w z = (present weight) − (absent weight) = 2·cost − total.
            *a *= Complex64::from_polar(1.0, 0.5 * gamma * (2.0 * cost - total));
        }
        self.counts.rz += self.graph.edges().len();
        self.counts.cost_layers += 1;
        if let Some(trace) = &mut self.trace {
            for e in self.graph.edges() {
                let _ = writeln!(trace, "RZ bit={} theta={}", e.bit_index, -gamma * e.weight);
            }
        }
        Ok(())
    }

    /// Full mixer: every edge's clause-controlled `R_X(β)` in mixer order.
    pub fn apply_mixer(&mut self, state: &mut StateVector, beta: f64) -> Result<()> {
        state.check_graph(self.graph)?;
        for k in 0..self.mixer.len() {
            self.rotate(state, k, beta);
        }
        self.counts.mixer_layers += 1;
        Ok(())
    }

    /// A single edge's mixing rotation; `position` indexes the mixer order.
    pub fn apply_edge_mixer(
        &mut self,
        state: &mut StateVector,
        position: usize,
        beta: f64,
    ) -> Result<()> {
        state.check_graph(self.graph)?;
        if position >= self.mixer.len() {
            return Err(Error::Parameter(format!(
                "mixer position {position} out of range for {} edges",
                self.mixer.len()
            )));
        }
        self.rotate(state, position, beta);
        Ok(())
    }

    fn rotate(&mut self, state: &mut StateVector, position: usize, beta: f64) {
        let clause = self.mixer[position];
        let (sin, cos) = (0.5 * beta).sin_cos();
        let amps = &mut state.amplitudes;
        for s in 0..amps.len() {
            if s & clause.target != 0 || !clause.fires(s) {
                continue;
            }
            let partner = s | clause.target;
            let (a, b) = (amps[s], amps[partner]);
            // −i·sin·x = (sin·x.im, −sin·x.re)
            amps[s] = a * cos + Complex64::new(sin * b.im, -sin * b.re);
            amps[partner] = b * cos + Complex64::new(sin * a.im, -sin * a.re);
        }
        self.counts.crx += 1;
        if let Some(trace) = &mut self.trace {
            let controls: Vec<String> = clause.controls().iter().map(|c| c.to_string()).collect();
            let _ = writeln!(
                trace,
                "CRX bits={} target={} theta={} clause={}",
                controls.join(","),
                clause.target.trailing_zeros(),
                beta,
                ClauseKind::SymmetricGenerator.name()
            );
        }
    }
}

pub fn apply_cost_unitary(state: &mut StateVector, g: &MatchingGraph, gamma: f64) -> Result<()> {
    Simulator::new(g).apply_cost(state, gamma)
}

pub fn apply_mixer(state: &mut StateVector, g: &MatchingGraph, beta: f64) -> Result<()> {
    Simulator::new(g).apply_mixer(state, beta)
}

/// `Σ_s |amp_s|² · cost(s)`.
pub fn expected_cost(state: &StateVector, g: &MatchingGraph) -> f64 {
    state
        .amplitudes
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(k, a)| a.norm_sqr() * g.state_cost(BasisState(k)))
        .sum()
}

/// Draws `shots` measurements in the computational basis.
///
/// Each shot takes one uniform `f64` from a ChaCha8 stream seeded with
/// `seed` and inverts the cumulative distribution of `|amp|²` (basis order),
/// so histograms are reproducible bit-for-bit.
pub fn sample_measurements(
    state: &StateVector,
    shots: u64,
    seed: u64,
) -> Result<BTreeMap<BasisState, u64>> {
    if shots == 0 {
        return Err(Error::Parameter("shots must be positive".into()));
    }
    let mut cdf = Vec::with_capacity(state.amplitudes.len());
    let mut acc = 0.0;
    for a in &state.amplitudes {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    if acc.is_nan() || acc <= 0.0 {
        return Err(Error::Parameter("cannot sample from a zero state".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    let last_nonzero = state
        .amplitudes
        .iter()
        .rposition(|a| a.norm_sqr() > 0.0)
        .unwrap_or(0);
    for _ in 0..shots {
        let u = rng.random::<f64>() * acc;
        let k = cdf.partition_point(|&c| c <= u).min(last_nonzero);
        *counts.entry(BasisState(k)).or_insert(0) += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::enumerate_feasible;
    use crate::matchgraph::tests::{arb_diagram, arb_variant, e1_graph};
    use crate::matchgraph::{build_graph, FeasibilityMode};
    use proptest::prelude::*;

    fn s(bits: &str) -> BasisState {
        BasisState::from_bits(bits).unwrap()
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn initial_states() {
        let w = initial_state(&e1_graph(true)).unwrap();
        assert_eq!(w.amplitude(s("11000")), Complex64::new(1.0, 0.0));
        let d = initial_state(&e1_graph(false)).unwrap();
        assert_eq!(d.amplitude(s("1100")), Complex64::new(1.0, 0.0));
        let empty = build_graph(
            &Default::default(),
            &Default::default(),
            crate::Variant::wasserstein(2.0, crate::Norm::INFINITY).unwrap(),
        )
        .unwrap();
        let e = initial_state(&empty).unwrap();
        assert_eq!(e.amplitudes().len(), 1);
    }

    #[test]
    fn one_sided_graph_mixer_is_identity() {
        let (_, d2) = crate::matchgraph::tests::e1();
        let g = build_graph(
            &d2,
            &Default::default(),
            crate::Variant::wasserstein(2.0, crate::Norm::INFINITY).unwrap(),
        )
        .unwrap();
        let mut st = initial_state(&g).unwrap();
        apply_mixer(&mut st, &g, 0.9).unwrap();
        assert_eq!(st.support(0.0), vec![g.initial_basis_state()]);
    }

    #[test]
    fn clause_examples() {
        let g = e1_graph(true);
        let main00 = g.edges()[0];
        let main01 = g.edges()[1];
        let aux_y0 = g.edges()[3];
        let init = g.initial_basis_state();
        let one = s("01000");
        for kind in [ClauseKind::PaperLiteral, ClauseKind::SymmetricGenerator] {
            assert!(clause_value(&g, &main00, init, kind));
            assert!(!clause_value(&g, &main01, one, kind));
            assert!(!clause_value(&g, &aux_y0, init, kind));
        }
        // The literal clause depends on the target bit; the symmetric one does not.
        assert!(!clause_value(&g, &main00, one, ClauseKind::PaperLiteral));
        assert!(clause_value(&g, &main00, one, ClauseKind::SymmetricGenerator));
    }

    #[test]
    fn first_edge_rotation_from_initial_state() {
        let g = e1_graph(true);
        let beta = 0.7;
        let mut st = initial_state(&g).unwrap();
        Simulator::new(&g).apply_edge_mixer(&mut st, 0, beta).unwrap();
        let (sin, cos) = (beta / 2.0).sin_cos();
        assert!(close(st.amplitude(s("11000")), Complex64::new(cos, 0.0)));
        assert!(close(st.amplitude(s("01000")), Complex64::new(0.0, -sin)));
        assert!((st.norm_sqr() - 1.0).abs() < 1e-14);
    }

    /// Amplitudes from the construction tree: each leaf's amplitude is the
    /// product of cos(β/2) for every firing rotation that kept the state and
    /// −i·sin(β/2) for every one that flipped it.
    #[test]
    fn full_mixer_matches_construction_tree() {
        let g = e1_graph(true);
        let beta: f64 = 0.7;
        let (sn, c) = (beta / 2.0).sin_cos();
        let ms = Complex64::new(0.0, -sn);
        let c = Complex64::new(c, 0.0);
        let one = Complex64::new(1.0, 0.0);
        // Mixer order: (x1,y1), (x1,y2), (y~1,y1), (y~2,y2), (x1,x~1).
        let expected = [
            ("11000", c * c),
            ("10000", c * ms * c * c),
            ("10001", c * ms * ms * c),
            ("10100", c * ms * c * ms),
            ("10101", c * ms * ms * ms),
            ("01000", ms * one * c * c),
            ("01010", ms * ms * c),
            ("01100", ms * c * one * ms),
            ("01110", ms * ms * ms),
        ];
        let mut st = initial_state(&g).unwrap();
        apply_mixer(&mut st, &g, beta).unwrap();
        for (bits, amp) in expected {
            assert!(close(st.amplitude(s(bits)), amp), "{bits}: {}", st.amplitude(s(bits)));
        }
        let support = st.support(1e-12);
        assert_eq!(support, enumerate_feasible(&g, FeasibilityMode::Relaxed).unwrap());
    }

    #[test]
    fn zero_angles_are_identity() {
        let g = e1_graph(true);
        let states = enumerate_feasible(&g, FeasibilityMode::Relaxed).unwrap();
        let st = StateVector::uniform_over(g.num_qubits(), &states);
        let mut a = st.clone();
        apply_cost_unitary(&mut a, &g, 0.0).unwrap();
        apply_mixer(&mut a, &g, 0.0).unwrap();
        for (x, y) in a.amplitudes().iter().zip(st.amplitudes()) {
            assert!(close(*x, *y));
        }
    }

    #[test]
    fn cost_unitary_relative_phase() {
        let g = e1_graph(true);
        let states = enumerate_feasible(&g, FeasibilityMode::Relaxed).unwrap();
        let mut st = StateVector::uniform_over(g.num_qubits(), &states);
        let gamma = std::f64::consts::FRAC_PI_2;
        apply_cost_unitary(&mut st, &g, gamma).unwrap();
        // Independent z-sums from the weights: z = +1 for present edges.
        let zsum = |bits: &str| -> f64 {
            g.edges()
                .iter()
                .map(|e| {
                    let z = if bits.as_bytes()[e.bit_index] == b'0' { 1.0 } else { -1.0 };
                    e.weight * z
                })
                .sum()
        };
        // |0⟩: present aux edges 0.25+0.25+2.25, absent mains 0+4 → 2.75 − 4 = −1.25.
        assert!((zsum("11000") + 1.25).abs() < 1e-15);
        // |7⟩: present main(0,0)=0 and aux_y1=2.25; absent 4+0.25+0.25 → −2.25.
        assert!((zsum("01110") + 2.25).abs() < 1e-15);
        let ratio = st.amplitude(s("11000")) / st.amplitude(s("01110"));
        let expected = Complex64::from_polar(1.0, gamma / 2.0 * (zsum("11000") - zsum("01110")));
        assert!(close(ratio, expected));
        for k in &states {
            assert!((st.probability(*k) - 1.0 / 9.0).abs() < 1e-14);
        }
    }

    #[test]
    fn expected_cost_examples() {
        let g = e1_graph(true);
        assert!((expected_cost(&initial_state(&g).unwrap(), &g) - 2.75).abs() < 1e-14);
        let seven = StateVector::basis(5, s("01110"));
        assert!((expected_cost(&seven, &g) - 2.25).abs() < 1e-14);
        let both = StateVector::uniform_over(5, &[s("11000"), s("01110")]);
        assert!((expected_cost(&both, &g) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn sampling_a_basis_state() {
        let st = StateVector::basis(3, BasisState(5));
        let h = sample_measurements(&st, 100, 1).unwrap();
        assert_eq!(h.into_iter().collect::<Vec<_>>(), vec![(BasisState(5), 100)]);
        assert!(matches!(sample_measurements(&st, 0, 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn sampling_two_state_superposition() {
        let st = StateVector::uniform_over(2, &[BasisState(1), BasisState(2)]);
        let h = sample_measurements(&st, 10_000, 3).unwrap();
        assert_eq!(h.values().sum::<u64>(), 10_000);
        for k in [1, 2] {
            let c = h[&BasisState(k)] as f64;
            assert!((c - 5000.0).abs() <= 3.0 * 2500f64.sqrt(), "{c}");
        }
    }

    #[test]
    fn sampling_tracks_amplitudes() {
        let g = e1_graph(true);
        let mut st = initial_state(&g).unwrap();
        apply_mixer(&mut st, &g, 0.7).unwrap();
        let h = sample_measurements(&st, 10_000, 42).unwrap();
        assert_eq!(h.values().sum::<u64>(), 10_000);
        for (k, p) in st.probabilities().iter().enumerate() {
            let f = h.get(&BasisState(k)).copied().unwrap_or(0) as f64 / 10_000.0;
            assert!((f - p).abs() < 0.02, "state {k}: {f} vs {p}");
        }
        assert_eq!(h, sample_measurements(&st, 10_000, 42).unwrap());
    }

    #[test]
    fn resource_counts_and_trace() {
        let g = e1_graph(true);
        let mut sim = Simulator::new(&g).with_trace();
        let mut st = initial_state(&g).unwrap();
        sim.apply_cost(&mut st, 0.5).unwrap();
        sim.apply_mixer(&mut st, 0.5).unwrap();
        let c = sim.counts();
        assert_eq!((c.rz, c.crx, c.cost_layers, c.mixer_layers), (5, 5, 1, 1));
        let trace = sim.trace().unwrap();
        let lines: Vec<_> = trace.lines().collect();
        assert_eq!(lines.len(), 10);
        assert_eq!(lines[0], "RZ bit=0 theta=-0");
        assert_eq!(lines[1], "RZ bit=1 theta=-2");
        assert_eq!(lines[5], "CRX bits=1,2,3 target=0 theta=0.5 clause=symmetric");
        assert_eq!(lines[7], "CRX bits=0 target=3 theta=0.5 clause=symmetric");
        assert_eq!(lines[9], "CRX bits=0,1 target=2 theta=0.5 clause=symmetric");
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let g = e1_graph(true);
        let mut st = StateVector::basis(4, BasisState(0));
        assert!(matches!(
            apply_mixer(&mut st, &g, 0.1),
            Err(Error::DimensionMismatch { expected: 5, found: 4 })
        ));
    }

    fn random_state(num_qubits: usize, raw: &[(f64, f64)]) -> StateVector {
        let amps = (0..1usize << num_qubits)
            .map(|k| {
                let (re, im) = raw[k % raw.len()];
                Complex64::new(re + k as f64 * 1e-3, im)
            })
            .collect();
        let mut st = StateVector::from_amplitudes(num_qubits, amps).unwrap();
        st.normalize();
        st
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn operators_preserve_norm(
            d1 in arb_diagram(2), d2 in arb_diagram(2), v in arb_variant(),
            raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..16),
            gamma in -10.0f64..10.0, beta in -10.0f64..10.0,
        ) {
            let g = build_graph(&d1, &d2, v).unwrap();
            let mut st = random_state(g.num_qubits(), &raw);
            apply_cost_unitary(&mut st, &g, gamma).unwrap();
            prop_assert!((st.norm_sqr() - 1.0).abs() < 1e-10);
            apply_mixer(&mut st, &g, beta).unwrap();
            prop_assert!((st.norm_sqr() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn symmetric_clause_is_pair_invariant(
            d1 in arb_diagram(2), d2 in arb_diagram(3), v in arb_variant(), k in any::<usize>(),
        ) {
            let g = build_graph(&d1, &d2, v).unwrap();
            let st = BasisState(k & ((1 << g.num_qubits()) - 1));
            for e in g.edges() {
                let flipped = BasisState(st.0 ^ (1 << e.bit_index));
                prop_assert_eq!(
                    clause_value(&g, e, st, ClauseKind::SymmetricGenerator),
                    clause_value(&g, e, flipped, ClauseKind::SymmetricGenerator)
                );
            }
        }

        #[test]
        fn cost_layers_commute(
            d1 in arb_diagram(2), d2 in arb_diagram(2), v in arb_variant(),
            raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..16),
            g1 in -5.0f64..5.0, g2 in -5.0f64..5.0,
        ) {
            let g = build_graph(&d1, &d2, v).unwrap();
            let st = random_state(g.num_qubits(), &raw);
            let (mut a, mut b) = (st.clone(), st);
            apply_cost_unitary(&mut a, &g, g1).unwrap();
            apply_cost_unitary(&mut a, &g, g2).unwrap();
            apply_cost_unitary(&mut b, &g, g2).unwrap();
            apply_cost_unitary(&mut b, &g, g1).unwrap();
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-10);
            }
        }
    }
}
