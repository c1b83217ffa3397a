//! Instances shared by the benchmarks.

use pdq_core::{Norm, PersistenceDiagram, Result, Variant};

/// Diagram with `count` points spread along a line above the diagonal.
pub fn ladder(label: &str, count: usize, shift: f64) -> Result<PersistenceDiagram> {
    let pairs: Vec<(f64, f64)> = (0..count)
        .map(|k| {
            let b = 0.1 * k as f64 + shift;
            (b, b + 0.3 + 0.05 * k as f64)
        })
        .collect();
    PersistenceDiagram::from_pairs(label, &pairs)
}

/// Random-looking but fixed square cost matrix.
pub fn cost_matrix(size: usize) -> Vec<Vec<f64>> {
    (0..size)
        .map(|i| {
            (0..size)
                .map(|j| ((i * 37 + j * 11) % 23) as f64 + 0.5 * ((i ^ j) % 5) as f64)
                .collect()
        })
        .collect()
}

pub fn variants() -> Result<[Variant; 2]> {
    Ok([
        Variant::wasserstein(2.0, Norm::INFINITY)?,
        Variant::dcp(2.0, Norm::INFINITY, 0.2)?,
    ])
}
