//! Desk-scale Vietoris-Rips persistence in dimensions 0 and 1.
//!
//! Used to turn sampled point clouds into persistence diagrams. The boundary
//! matrix is reduced over GF(2) with the plain column algorithm.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::diagrams::{DiagramPoint, PersistenceDiagram};
use crate::error::{Error, Result};

/// Default bound on cloud size; triangle enumeration is cubic in it.
pub const DEFAULT_POINT_CAP: usize = 256;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud {
    points: Vec<[f64; 2]>,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::Validation(format!("non-finite cloud point {p:?}")));
        }
        Ok(PointCloud { points })
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Concatenates two clouds, keeping `self`'s points first.
    pub fn union(&self, other: &PointCloud) -> PointCloud {
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        PointCloud { points }
    }

    /// Reads `x,y` rows; a leading `x,y` header is skipped.
    pub fn load_csv<R: Read>(source: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(source);
        let mut points = Vec::new();
        for (k, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if k == 0 && record.len() == 2 && &record[0] == "x" && &record[1] == "y" {
                continue;
            }
            if record.len() != 2 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 2 fields, found {}", record.len()),
                });
            }
            let mut xy = [0.0; 2];
            for (slot, field) in xy.iter_mut().zip(record.iter()) {
                *slot = field.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("not a number: {field:?}"),
                })?;
            }
            points.push(xy);
        }
        PointCloud::new(points)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["x", "y"]).map_err(io)?;
        for p in &self.points {
            w.write_record([p[0].to_string(), p[1].to_string()]).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `count` points at evenly spaced angles (starting at angle 0) on a circle,
/// each coordinate perturbed by independent N(0, noise_sd²) noise drawn from
/// a ChaCha8 stream seeded with `seed`.
pub fn sample_circle(
    center: [f64; 2],
    radius: f64,
    count: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<PointCloud> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::Parameter(format!("radius must be positive, got {radius}")));
    }
    if count == 0 {
        return Err(Error::Parameter("circle sample count must be at least 1".into()));
    }
    if !noise_sd.is_finite() || noise_sd < 0.0 {
        return Err(Error::Parameter(format!("noise_sd must be nonnegative, got {noise_sd}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise_sd).map_err(|e| Error::Parameter(e.to_string()))?;
    let points = (0..count)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / count as f64;
            let mut p = [
                center[0] + radius * theta.cos(),
                center[1] + radius * theta.sin(),
            ];
            if noise_sd > 0.0 {
                p[0] += normal.sample(&mut rng);
                p[1] += normal.sample(&mut rng);
            }
            p
        })
        .collect();
    PointCloud::new(points)
}

#[derive(Clone, Debug)]
struct Simplex {
    vertices: Vec<usize>,
    value: f64,
}

impl Simplex {
    fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Rips persistence with the default point cap.
pub fn vietoris_rips_persistence(
    cloud: &PointCloud,
    max_dim: usize,
    max_scale: f64,
) -> Result<BTreeMap<usize, PersistenceDiagram>> {
    vietoris_rips_persistence_with_cap(cloud, max_dim, max_scale, DEFAULT_POINT_CAP)
}

/// Persistence pairs of the Rips filtration truncated at `max_scale`.
///
/// H0 features are born at 0. Features still alive at `max_scale` and pairs
/// with zero persistence are not reported.
pub fn vietoris_rips_persistence_with_cap(
    cloud: &PointCloud,
    max_dim: usize,
    max_scale: f64,
    cap: usize,
) -> Result<BTreeMap<usize, PersistenceDiagram>> {
    if cloud.is_empty() {
        return Err(Error::Parameter("point cloud is empty".into()));
    }
    if cloud.len() > cap {
        return Err(Error::Capacity {
            what: "point cloud size",
            requested: cloud.len(),
            cap,
        });
    }
    if max_dim > 1 {
        return Err(Error::Parameter(format!("max_dim must be 0 or 1, got {max_dim}")));
    }
    if max_scale.is_nan() || max_scale <= 0.0 {
        return Err(Error::Parameter(format!("max_scale must be positive, got {max_scale}")));
    }

    let simplices = rips_simplices(cloud, max_dim, max_scale);
    let pairs = reduce(&simplices);

    let mut out: BTreeMap<usize, PersistenceDiagram> = (0..=max_dim)
        .map(|d| (d, PersistenceDiagram::new(format!("H{d}"), Vec::new())))
        .collect();
    for (birth, death) in pairs {
        let dim = simplices[birth].dim();
        let (b, d) = (simplices[birth].value, simplices[death].value);
        if dim <= max_dim && d > b {
            if let Some(diagram) = out.get_mut(&dim) {
                diagram.points.push(DiagramPoint { birth: b, death: d });
            }
        }
    }
    Ok(out)
}

fn rips_simplices(cloud: &PointCloud, max_dim: usize, max_scale: f64) -> Vec<Simplex> {
    let pts = cloud.points();
    let n = pts.len();
    let dist = |i: usize, j: usize| (pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]);

    let mut simplices: Vec<Simplex> = (0..n)
        .map(|v| Simplex {
            vertices: vec![v],
            value: 0.0,
        })
        .collect();
    let mut lengths = vec![f64::INFINITY; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = dist(i, j);
            if d <= max_scale {
                lengths[i * n + j] = d;
                simplices.push(Simplex {
                    vertices: vec![i, j],
                    value: d,
                });
            }
        }
    }
    if max_dim >= 1 {
        for i in 0..n {
            for j in i + 1..n {
                let ij = lengths[i * n + j];
                if ij.is_infinite() {
                    continue;
                }
                for k in j + 1..n {
                    let value = ij.max(lengths[i * n + k]).max(lengths[j * n + k]);
                    if value.is_finite() {
                        simplices.push(Simplex {
                            vertices: vec![i, j, k],
                            value,
                        });
                    }
                }
            }
        }
    }
    simplices.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.dim().cmp(&b.dim()))
            .then_with(|| a.vertices.cmp(&b.vertices))
    });
    simplices
}

/// Standard column reduction; returns (birth, death) simplex index pairs.
fn reduce(simplices: &[Simplex]) -> Vec<(usize, usize)> {
    let n_vertices = simplices.iter().filter(|s| s.dim() == 0).count();
    let mut vertex_index = vec![0usize; n_vertices];
    let mut edge_index = std::collections::HashMap::new();
    for (idx, s) in simplices.iter().enumerate() {
        match s.vertices[..] {
            [v] => vertex_index[v] = idx,
            [a, b] => {
                edge_index.insert((a, b), idx);
            }
            _ => {}
        }
    }

    let mut reduced: Vec<Vec<usize>> = Vec::with_capacity(simplices.len());
    let mut owner: Vec<Option<usize>> = vec![None; simplices.len()];
    let mut pairs = Vec::new();
    for (j, s) in simplices.iter().enumerate() {
        let mut column: Vec<usize> = match s.vertices[..] {
            [_] => Vec::new(),
            [a, b] => vec![vertex_index[a], vertex_index[b]],
            [a, b, c] => vec![edge_index[&(a, b)], edge_index[&(a, c)], edge_index[&(b, c)]],
            _ => unreachable!("only simplices up to dimension 2 are generated"),
        };
        column.sort_unstable();
        while let Some(&low) = column.last() {
            match owner[low] {
                Some(k) => column = symmetric_difference(&column, &reduced[k]),
                None => break,
            }
        }
        if let Some(&low) = column.last() {
            owner[low] = Some(j);
            pairs.push((low, j));
        }
        reduced.push(column);
    }
    pairs
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sorted_points(d: &PersistenceDiagram) -> Vec<(f64, f64)> {
        let mut v: Vec<_> = d.points.iter().map(|p| (p.birth, p.death)).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        v
    }

    /// Union-find count of connected components at scale `eps`.
    fn components(cloud: &PointCloud, eps: f64) -> usize {
        let pts = cloud.points();
        let mut parent: Vec<usize> = (0..pts.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if (pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]) <= eps {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        (0..pts.len()).filter(|&i| find(&mut parent, i) == i).count()
    }

    #[test]
    fn four_point_circle_without_noise() {
        let c = sample_circle([0.0, 0.0], 1.0, 4, 0.0, 0).unwrap();
        let expected = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (p, e) in c.points().iter().zip(expected) {
            assert!((p[0] - e[0]).abs() < 1e-12 && (p[1] - e[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_points_lie_on_circle() {
        let c = sample_circle([2.0, -1.0], 3.5, 17, 0.0, 99).unwrap();
        for p in c.points() {
            assert!(((p[0] - 2.0).hypot(p[1] + 1.0) - 3.5).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_rejects_bad_radius() {
        assert!(matches!(
            sample_circle([0.0, 0.0], 0.0, 4, 0.0, 0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn noisy_circle_has_one_large_loop() {
        let c = sample_circle([0.0, 0.0], 1.0, 32, 0.05, 7).unwrap();
        let dgms = vietoris_rips_persistence(&c, 1, 2.0).unwrap();
        let big = dgms[&1].points.iter().filter(|p| p.persistence() > 0.5).count();
        assert_eq!(big, 1);
    }

    #[test]
    fn two_points_merge_at_their_distance() {
        let c = PointCloud::new(vec![[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let dgms = vietoris_rips_persistence(&c, 0, 2.0).unwrap();
        assert_eq!(sorted_points(&dgms[&0]), vec![(0.0, 1.0)]);
        assert!(!dgms.contains_key(&1));
    }

    #[test]
    fn unit_square_has_one_loop() {
        // Edges of length 1 close the loop; the diagonals (length √2) and all
        // four triangles enter at √2, which kills it.
        let c = PointCloud::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let dgms = vietoris_rips_persistence(&c, 1, 2.0).unwrap();
        let h1 = sorted_points(&dgms[&1]);
        assert_eq!(h1.len(), 1);
        assert_eq!(h1[0].0, 1.0);
        assert!((h1[0].1 - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(dgms[&0].len(), 3);
    }

    #[test]
    fn clean_circle_has_single_loop() {
        let c = sample_circle([0.0, 0.0], 1.0, 32, 0.0, 0).unwrap();
        let dgms = vietoris_rips_persistence(&c, 1, 2.0).unwrap();
        assert_eq!(dgms[&1].len(), 1);
    }

    #[test]
    fn rejects_oversized_cloud() {
        let c = PointCloud::new(vec![[0.0, 0.0]; 5]).unwrap();
        assert!(matches!(
            vietoris_rips_persistence_with_cap(&c, 0, 1.0, 4),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn cloud_csv_roundtrip() {
        let c = sample_circle([0.0, 0.0], 1.0, 5, 0.1, 3).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(PointCloud::load_csv(buf.as_slice()).unwrap(), c);
    }

    fn arb_cloud() -> impl Strategy<Value = Vec<[f64; 2]>> {
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0).prop_map(|(x, y)| [x, y]), 1..14)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn output_points_are_ordered_and_bounded(pts in arb_cloud(), scale in 0.3f64..3.0) {
            let c = PointCloud::new(pts).unwrap();
            for d in vietoris_rips_persistence(&c, 1, scale).unwrap().values() {
                for p in &d.points {
                    prop_assert!(p.death >= p.birth && p.death <= scale);
                }
            }
        }

        #[test]
        fn h0_count_matches_union_find(pts in arb_cloud(), scale in 0.3f64..3.0) {
            let c = PointCloud::new(pts).unwrap();
            let dgms = vietoris_rips_persistence(&c, 0, scale).unwrap();
            prop_assert_eq!(dgms[&0].len(), c.len() - components(&c, scale));
        }

        #[test]
        fn permutation_invariant(pts in arb_cloud(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let mut shuffled = pts.clone();
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let a = vietoris_rips_persistence(&PointCloud::new(pts).unwrap(), 1, 2.5).unwrap();
            let b = vietoris_rips_persistence(&PointCloud::new(shuffled).unwrap(), 1, 2.5).unwrap();
            for dim in 0..=1 {
                let (pa, pb) = (sorted_points(&a[&dim]), sorted_points(&b[&dim]));
                prop_assert_eq!(pa.len(), pb.len());
                for (x, y) in pa.iter().zip(&pb) {
                    prop_assert!((x.0 - y.0).abs() <= 1e-12 && (x.1 - y.1).abs() <= 1e-12);
                }
            }
        }
    }
}
