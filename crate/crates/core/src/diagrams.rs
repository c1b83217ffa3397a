//! Persistence diagrams: points, norms, diagonal projection and file I/O.
//!
//! Two on-disk formats are supported. CSV holds one `birth,death` pair per
//! line with an optional `birth,death` header; JSON is an object
//! `{"label": "...", "points": [[b, d], ...]}`.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A single (birth, death) feature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramPoint {
    pub birth: f64,
    pub death: f64,
}

impl DiagramPoint {
    /// Builds a point, rejecting non-finite coordinates and `death < birth`.
    pub fn new(birth: f64, death: f64) -> Result<Self> {
        if !birth.is_finite() || !death.is_finite() {
            return Err(Error::Validation(format!(
                "non-finite coordinate in ({birth}, {death})"
            )));
        }
        if death < birth {
            return Err(Error::Validation(format!(
                "death {death} is smaller than birth {birth}"
            )));
        }
        Ok(DiagramPoint { birth, death })
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    /// Orthogonal projection onto the diagonal `birth = death`.
    pub fn diagonal_projection(&self) -> DiagramPoint {
        let mid = 0.5 * (self.birth + self.death);
        DiagramPoint {
            birth: mid,
            death: mid,
        }
    }
}

/// Free-function form of [`DiagramPoint::diagonal_projection`].
pub fn diagonal_projection(x: DiagramPoint) -> DiagramPoint {
    x.diagonal_projection()
}

/// Order `q` of an L_q norm on the plane, `1 <= q <= inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norm(f64);

impl Norm {
    pub const INFINITY: Norm = Norm(f64::INFINITY);
    pub const EUCLIDEAN: Norm = Norm(2.0);

    pub fn new(q: f64) -> Result<Self> {
        if q.is_nan() || q < 1.0 {
            return Err(Error::Parameter(format!("norm order q must be >= 1, got {q}")));
        }
        Ok(Norm(q))
    }

    pub fn order(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn distance(self, a: DiagramPoint, b: DiagramPoint) -> f64 {
        let dx = (a.birth - b.birth).abs();
        let dy = (a.death - b.death).abs();
        if self.is_infinite() {
            dx.max(dy)
        } else if self.0 == 1.0 {
            dx + dy
        } else if self.0 == 2.0 {
            dx.hypot(dy)
        } else {
            (dx.powf(self.0) + dy.powf(self.0)).powf(1.0 / self.0)
        }
    }
}

impl Default for Norm {
    fn default() -> Self {
        Norm::INFINITY
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "Inf" | "INF" | "infinity" | "∞" => Ok(Norm::INFINITY),
            other => {
                let q: f64 = other
                    .parse()
                    .map_err(|_| Error::Parameter(format!("cannot parse norm order {other:?}")))?;
                Norm::new(q)
            }
        }
    }
}

impl Serialize for Norm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Norm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(q) => Norm::new(q),
            Raw::Text(t) => t.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// L_q distance between two points. Fails when `q < 1`.
pub fn lq_distance(a: DiagramPoint, b: DiagramPoint, q: f64) -> Result<f64> {
    Ok(Norm::new(q)?.distance(a, b))
}

/// A finite multiset of diagram points. Order is file order; duplicates are kept.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PersistenceDiagram {
    pub label: String,
    pub points: Vec<DiagramPoint>,
}

impl PersistenceDiagram {
    pub fn new(label: impl Into<String>, points: Vec<DiagramPoint>) -> Self {
        PersistenceDiagram {
            label: label.into(),
            points,
        }
    }

    /// Builds a diagram from raw `(birth, death)` pairs, validating each.
    pub fn from_pairs(label: impl Into<String>, pairs: &[(f64, f64)]) -> Result<Self> {
        let points = pairs
            .iter()
            .map(|&(b, d)| DiagramPoint::new(b, d))
            .collect::<Result<Vec<_>>>()?;
        Ok(PersistenceDiagram::new(label, points))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn write<W: Write>(&self, out: W, format: DiagramFormat) -> Result<()> {
        match format {
            DiagramFormat::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(["birth", "death"]).map_err(csv_io)?;
                for p in &self.points {
                    w.write_record([p.birth.to_string(), p.death.to_string()])
                        .map_err(csv_io)?;
                }
                w.flush()?;
                Ok(())
            }
            DiagramFormat::Json => {
                let doc = JsonDiagram {
                    label: self.label.clone(),
                    points: self.points.iter().map(|p| [p.birth, p.death]).collect(),
                };
                serde_json::to_writer_pretty(out, &doc)?;
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagramFormat {
    Csv,
    Json,
}

impl DiagramFormat {
    /// Guesses the format from a file extension; anything other than `.json` is CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => DiagramFormat::Json,
            _ => DiagramFormat::Csv,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonDiagram {
    #[serde(default)]
    label: String,
    points: Vec<[f64; 2]>,
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Reads a diagram in the declared format.
pub fn load_diagram<R: Read>(source: R, format: DiagramFormat) -> Result<PersistenceDiagram> {
    match format {
        DiagramFormat::Csv => load_csv(source),
        DiagramFormat::Json => load_json(source),
    }
}

fn load_csv<R: Read>(source: R) -> Result<PersistenceDiagram> {
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
        if k == 0 && record.len() == 2 && &record[0] == "birth" && &record[1] == "death" {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let parse = |field: &str| -> Result<f64> {
            field.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("not a number: {field:?}"),
            })
        };
        let birth = parse(&record[0])?;
        let death = parse(&record[1])?;
        let point = DiagramPoint::new(birth, death)
            .map_err(|e| Error::Validation(format!("line {line}: {e}")))?;
        points.push(point);
    }
    Ok(PersistenceDiagram::new(String::new(), points))
}

fn load_json<R: Read>(source: R) -> Result<PersistenceDiagram> {
    let doc: JsonDiagram = serde_json::from_reader(source).map_err(|e| Error::Parse {
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    PersistenceDiagram::from_pairs(
        doc.label,
        &doc.points.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(b: f64, d: f64) -> DiagramPoint {
        DiagramPoint::new(b, d).unwrap()
    }

    #[test]
    fn csv_points_in_file_order() {
        let d = load_diagram("0.0,1.0\n0.0,3.0".as_bytes(), DiagramFormat::Csv).unwrap();
        assert_eq!(d.points, vec![pt(0.0, 1.0), pt(0.0, 3.0)]);
    }

    #[test]
    fn csv_header_and_duplicates() {
        let d = load_diagram("birth,death\n1,2\n1,2\n".as_bytes(), DiagramFormat::Csv).unwrap();
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn csv_empty_is_empty_diagram() {
        let d = load_diagram("".as_bytes(), DiagramFormat::Csv).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn csv_rejects_death_before_birth() {
        let err = load_diagram("1.0,0.5".as_bytes(), DiagramFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn csv_rejects_infinite_death() {
        let err = load_diagram("0,inf".as_bytes(), DiagramFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn csv_reports_line_of_malformed_row() {
        let err = load_diagram("0,1\n0,2\n0;3\n".as_bytes(), DiagramFormat::Csv).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
        let err = load_diagram("0,1\nabc,2\n".as_bytes(), DiagramFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn json_roundtrip_keeps_label() {
        let d = PersistenceDiagram::from_pairs("circle", &[(0.0, 1.0), (0.5, 3.0)]).unwrap();
        let mut buf = Vec::new();
        d.write(&mut buf, DiagramFormat::Json).unwrap();
        let back = load_diagram(buf.as_slice(), DiagramFormat::Json).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn json_parse_error_has_line() {
        let err = load_diagram("{\n\"points\": [[0, 1],\n oops]}".as_bytes(), DiagramFormat::Json)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn projection_examples() {
        assert_eq!(diagonal_projection(pt(0.0, 2.0)), pt(1.0, 1.0));
        assert_eq!(diagonal_projection(pt(1.0, 1.0)), pt(1.0, 1.0));
        assert_eq!(diagonal_projection(pt(0.0, 3.0)), pt(1.5, 1.5));
    }

    #[test]
    fn lq_examples() {
        assert_eq!(lq_distance(pt(0.0, 1.0), pt(0.0, 3.0), f64::INFINITY).unwrap(), 2.0);
        assert_eq!(lq_distance(pt(0.0, 3.0), pt(1.5, 1.5), f64::INFINITY).unwrap(), 1.5);
        assert_eq!(lq_distance(pt(0.0, 1.0), pt(0.0, 3.0), 2.0).unwrap(), 2.0);
        assert!(matches!(
            lq_distance(pt(0.0, 1.0), pt(0.0, 3.0), 0.5),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn norm_parses_inf() {
        assert!("inf".parse::<Norm>().unwrap().is_infinite());
        assert_eq!("3".parse::<Norm>().unwrap().order(), 3.0);
        assert!("0.2".parse::<Norm>().is_err());
        assert_eq!(Norm::INFINITY.to_string(), "inf");
    }

    fn arb_point() -> impl Strategy<Value = DiagramPoint> {
        (-10.0f64..10.0, 0.0f64..10.0).prop_map(|(b, l)| pt(b, b + l))
    }

    fn arb_norm() -> impl Strategy<Value = Norm> {
        prop_oneof![
            Just(Norm::INFINITY),
            Just(Norm::EUCLIDEAN),
            (1.0f64..6.0).prop_map(|q| Norm::new(q).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn lq_is_a_metric(a in arb_point(), b in arb_point(), c in arb_point(), q in arb_norm()) {
            prop_assert_eq!(q.distance(a, b), q.distance(b, a));
            prop_assert_eq!(q.distance(a, a), 0.0);
            prop_assert!(q.distance(a, c) <= q.distance(a, b) + q.distance(b, c) + 1e-12);
        }

        #[test]
        fn projection_is_idempotent(x in arb_point()) {
            let p = x.diagonal_projection();
            prop_assert_eq!(p.diagonal_projection(), p);
        }

        #[test]
        fn sup_distance_to_diagonal_is_half_persistence(x in arb_point()) {
            let d = Norm::INFINITY.distance(x, x.diagonal_projection());
            prop_assert!((d - 0.5 * x.persistence()).abs() <= 1e-12);
        }
    }
}
