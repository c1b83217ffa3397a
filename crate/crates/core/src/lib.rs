//! Distances between persistence diagrams, computed exactly with classical
//! assignment solvers and approximately with a statevector simulation of a
//! weighted QAOA whose mixer is built from clause-controlled rotations.
//!
//! The crate is organised bottom-up:
//!
//! * [`diagrams`]: persistence-diagram data model, point norms and file I/O.
//! * [`filtration`]: a small Vietoris-Rips persistence generator for test data.
//! * [`matchgraph`]: the weighted matching graph and its qubit layout.
//! * [`exact`]: Hungarian assignment and brute-force reference solvers.
//! * [`qsim`]: the statevector engine (cost phase, constrained mixer, sampling).
//! * [`qaoa`]: angle optimisation, decoding and end-to-end distance reports.
//! * [`reference`]: seeded reference point clouds and their diagrams.

pub mod diagrams;
pub mod error;
pub mod exact;
pub mod filtration;
pub mod matchgraph;
pub mod qaoa;
pub mod qsim;
pub mod reference;

pub use diagrams::{DiagramFormat, DiagramPoint, Norm, PersistenceDiagram};
pub use error::{Error, Result};
pub use exact::{Assignment, ExactResult, Matching};
pub use matchgraph::{BasisState, Edge, EdgeKind, FeasibilityMode, MatchingGraph, Metric, Variant};
pub use qaoa::{DistanceReport, QaoaParams};
pub use qsim::{ClauseKind, StateVector};
