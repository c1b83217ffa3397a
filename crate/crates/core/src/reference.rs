//! Seeded reference data: two pairs of point clouds built from sampled
//! circles, and their H1 diagrams.
//!
//! The clean pair is one circle against the same circle plus a second,
//! larger one. The noisy pair uses three jittered circles on each side.

use crate::diagrams::PersistenceDiagram;
use crate::error::{Error, Result};
use crate::filtration::{sample_circle, vietoris_rips_persistence, PointCloud};

/// One sampled circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleSpec {
    pub center: [f64; 2],
    pub radius: f64,
    pub count: usize,
    pub noise_sd: f64,
    pub seed: u64,
}

impl CircleSpec {
    pub fn sample(&self) -> Result<PointCloud> {
        sample_circle(self.center, self.radius, self.count, self.noise_sd, self.seed)
    }
}

/// Two clouds, the Rips scale used on them, and their H1 diagrams.
#[derive(Clone, Debug)]
pub struct ReferencePair {
    pub name: &'static str,
    pub cloud1: PointCloud,
    pub cloud2: PointCloud,
    pub max_scale: f64,
    pub d1: PersistenceDiagram,
    pub d2: PersistenceDiagram,
}

const CLEAN_MAX_SCALE: f64 = 4.0;
const NOISY_MAX_SCALE: f64 = 3.0;

const CLEAN_SMALL: CircleSpec = CircleSpec {
    center: [0.0, 0.0],
    radius: 1.0,
    count: 12,
    noise_sd: 0.0,
    seed: 0,
};

const CLEAN_LARGE: CircleSpec = CircleSpec {
    center: [5.0, 0.0],
    radius: 1.5,
    count: 16,
    noise_sd: 0.0,
    seed: 0,
};

const NOISY_FIRST: [CircleSpec; 3] = [
    CircleSpec { center: [0.0, 0.0], radius: 1.0, count: 12, noise_sd: 0.08, seed: 100 },
    CircleSpec { center: [4.0, 0.0], radius: 0.8, count: 10, noise_sd: 0.08, seed: 101 },
    CircleSpec { center: [0.0, 4.0], radius: 0.6, count: 8, noise_sd: 0.08, seed: 102 },
];

const NOISY_SECOND: [CircleSpec; 3] = [
    CircleSpec { center: [0.0, 0.0], radius: 1.0, count: 12, noise_sd: 0.08, seed: 110 },
    CircleSpec { center: [4.0, 0.0], radius: 0.8, count: 10, noise_sd: 0.08, seed: 111 },
    CircleSpec { center: [0.0, 4.0], radius: 0.6, count: 8, noise_sd: 0.08, seed: 112 },
];

fn union_of(specs: &[CircleSpec]) -> Result<PointCloud> {
    let mut clouds = specs.iter().map(CircleSpec::sample);
    let first = clouds
        .next()
        .ok_or_else(|| Error::Parameter("no circles given".into()))??;
    clouds.try_fold(first, |acc, c| Ok(acc.union(&c?)))
}

fn h1(cloud: &PointCloud, max_scale: f64, label: &str) -> Result<PersistenceDiagram> {
    let mut diagrams = vietoris_rips_persistence(cloud, 1, max_scale)?;
    let mut d = diagrams
        .remove(&1)
        .unwrap_or_else(|| PersistenceDiagram::new("H1", Vec::new()));
    d.label = label.to_string();
    Ok(d)
}

fn pair(
    name: &'static str,
    first: &[CircleSpec],
    second: &[CircleSpec],
    max_scale: f64,
) -> Result<ReferencePair> {
    let cloud1 = union_of(first)?;
    let cloud2 = union_of(second)?;
    let d1 = h1(&cloud1, max_scale, &format!("{name}-1"))?;
    let d2 = h1(&cloud2, max_scale, &format!("{name}-2"))?;
    Ok(ReferencePair {
        name,
        cloud1,
        cloud2,
        max_scale,
        d1,
        d2,
    })
}

/// One circle against the same circle plus a larger one: H1 sizes 1 and 2.
pub fn clean_pair() -> Result<ReferencePair> {
    pair("clean", &[CLEAN_SMALL], &[CLEAN_SMALL, CLEAN_LARGE], CLEAN_MAX_SCALE)
}

/// Three jittered circles on each side: H1 sizes 3 and 3.
pub fn noisy_pair() -> Result<ReferencePair> {
    pair("noisy", &NOISY_FIRST, &NOISY_SECOND, NOISY_MAX_SCALE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_sizes() {
        let c = clean_pair().unwrap();
        assert_eq!((c.d1.len(), c.d2.len()), (1, 2));
        let n = noisy_pair().unwrap();
        assert_eq!((n.d1.len(), n.d2.len()), (3, 3));
    }

    #[test]
    fn clean_pair_shares_its_small_circle() {
        let c = clean_pair().unwrap();
        assert!(c.d2.points.contains(&c.d1.points[0]));
    }

    #[test]
    fn reference_data_is_deterministic() {
        let a = noisy_pair().unwrap();
        let b = noisy_pair().unwrap();
        assert_eq!(a.d1, b.d1);
        assert_eq!(a.cloud2, b.cloud2);
    }
}
