//! Points, finite point sets and their JSON interchange form.

use std::collections::HashSet;

use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{f64_to_rational, parse_rational, Backend, Scalar};

/// Float points closer than this in every coordinate are merged.
pub const FLOAT_COLLAPSE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<Scalar>,
}

impl Point {
    pub fn new(coords: Vec<Scalar>) -> Result<Point> {
        let Some(first) = coords.first() else {
            return Err(Error::Invalid("point must have at least one coordinate".into()));
        };
        let backend = first.backend();
        if coords.iter().any(|c| c.backend() != backend) {
            return Err(Error::MixedBackend);
        }
        if let Some(x) = coords.iter().find_map(|c| match c {
            Scalar::Float(x) if !x.is_finite() => Some(*x),
            _ => None,
        }) {
            return Err(Error::Invalid(format!("non-finite coordinate {x}")));
        }
        Ok(Point { coords })
    }

    pub fn exact(coords: Vec<BigRational>) -> Point {
        assert!(!coords.is_empty());
        Point { coords: coords.into_iter().map(Scalar::Exact).collect() }
    }

    pub fn float(coords: Vec<f64>) -> Point {
        Point::new(coords.into_iter().map(Scalar::Float).collect()).expect("valid float point")
    }

    /// Exact point from `(numerator, denominator)` pairs.
    pub fn ratios(coords: &[(i64, i64)]) -> Point {
        Point::exact(coords.iter().map(|&(n, d)| crate::scalar::rat(n, d)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn backend(&self) -> Backend {
        self.coords[0].backend()
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.coords
    }

    pub fn coord(&self, k: usize) -> &Scalar {
        &self.coords[k]
    }

    pub fn exact_coords(&self) -> Option<Vec<&BigRational>> {
        self.coords.iter().map(Scalar::as_exact).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(Scalar::to_f64).collect()
    }

    pub fn in_unit_cube(&self) -> bool {
        self.coords.iter().all(|c| match c {
            Scalar::Exact(r) => !r.is_negative() && *r <= BigRational::one(),
            Scalar::Float(x) => (0.0..=1.0).contains(x),
        })
    }

    /// Converts a float point to the exact rational value of its doubles.
    pub fn to_exact(&self) -> Result<Point> {
        let coords = self
            .coords
            .iter()
            .map(|c| match c {
                Scalar::Exact(r) => Ok(r.clone()),
                Scalar::Float(x) => f64_to_rational(*x),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Point::exact(coords))
    }

    pub(crate) fn check_dim(&self, other: &Point) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

/// A finite set of points of a common dimension and backend, without
/// duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePointSet {
    dim: usize,
    backend: Backend,
    points: Vec<Point>,
}

impl FinitePointSet {
    /// Builds a set, dropping repeated points (exact equality, or
    /// coordinate-wise tolerance [`FLOAT_COLLAPSE_TOL`] for floats). The
    /// first occurrence is kept.
    pub fn new(dim: usize, points: Vec<Point>) -> Result<FinitePointSet> {
        if dim == 0 {
            return Err(Error::Invalid("dimension must be at least 1".into()));
        }
        let backend = points.first().map(Point::backend).unwrap_or(Backend::Exact);
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
            }
            if p.backend() != backend {
                return Err(Error::MixedBackend);
            }
        }
        let points = match backend {
            Backend::Exact => {
                let mut seen = HashSet::new();
                points
                    .into_iter()
                    .filter(|p| seen.insert(p.exact_coords().unwrap().into_iter().cloned().collect::<Vec<_>>()))
                    .collect()
            }
            Backend::Float => {
                let mut kept: Vec<Point> = Vec::with_capacity(points.len());
                for p in points {
                    let v = p.to_f64();
                    let dup = kept.iter().any(|q| {
                        q.to_f64().iter().zip(&v).all(|(a, b)| (a - b).abs() <= FLOAT_COLLAPSE_TOL)
                    });
                    if !dup {
                        kept.push(p);
                    }
                }
                kept
            }
        };
        Ok(FinitePointSet { dim, backend, points })
    }

    pub fn empty(dim: usize, backend: Backend) -> FinitePointSet {
        FinitePointSet { dim, backend, points: Vec::new() }
    }

    /// One-dimensional exact set from rationals.
    pub fn from_rationals(values: impl IntoIterator<Item = BigRational>) -> FinitePointSet {
        let points = values.into_iter().map(|v| Point::exact(vec![v])).collect();
        FinitePointSet::new(1, points).expect("one-dimensional exact points")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn in_unit_cube(&self) -> bool {
        self.points.iter().all(Point::in_unit_cube)
    }

    /// Sorted values of a one-dimensional exact set.
    pub fn exact_values_1d(&self) -> Result<Vec<BigRational>> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: self.dim });
        }
        if self.backend != Backend::Exact {
            return Err(Error::ExactRequired);
        }
        let mut v: Vec<BigRational> =
            self.points.iter().map(|p| p.coord(0).as_exact().unwrap().clone()).collect();
        v.sort();
        Ok(v)
    }

    pub fn to_doc(&self) -> PointSetDoc {
        PointSetDoc {
            dim: self.dim,
            backend: self.backend,
            points: self
                .points
                .iter()
                .map(|p| {
                    p.coords()
                        .iter()
                        .map(|c| match c {
                            Scalar::Exact(r) => Value::String(r.to_string()),
                            Scalar::Float(x) => serde_json::json!(x),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<FinitePointSet> {
        let doc: PointSetDoc =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("point-set JSON: {e}")))?;
        doc.into_set()
    }
}

/// Wire form: `{"dim": d, "backend": "exact"|"float", "points": [[c1,..,cd],..]}`
/// with exact coordinates as `"p/q"` strings and float coordinates as numbers.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PointSetDoc {
    pub dim: usize,
    pub backend: Backend,
    pub points: Vec<Vec<Value>>,
}

impl PointSetDoc {
    pub fn into_set(self) -> Result<FinitePointSet> {
        let points = self
            .points
            .iter()
            .map(|row| {
                if row.len() != self.dim {
                    return Err(Error::DimensionMismatch { expected: self.dim, found: row.len() });
                }
                let coords = row
                    .iter()
                    .map(|v| parse_coordinate(v, self.backend))
                    .collect::<Result<Vec<_>>>()?;
                Point::new(coords)
            })
            .collect::<Result<Vec<_>>>()?;
        let set = FinitePointSet::new(self.dim, points)?;
        Ok(FinitePointSet { backend: self.backend, ..set })
    }
}

fn parse_coordinate(v: &Value, backend: Backend) -> Result<Scalar> {
    match (backend, v) {
        (Backend::Exact, Value::String(s)) => Ok(Scalar::Exact(parse_rational(s)?)),
        (Backend::Exact, Value::Number(n)) if n.is_i64() => {
            Ok(Scalar::from_int(n.as_i64().unwrap()))
        }
        (Backend::Float, Value::Number(n)) => {
            n.as_f64().map(Scalar::Float).ok_or_else(|| Error::Invalid(format!("bad number {n}")))
        }
        (Backend::Float, Value::String(s)) => s
            .parse::<f64>()
            .map(Scalar::Float)
            .map_err(|_| Error::Invalid(format!("bad float coordinate {s:?}"))),
        _ => Err(Error::Invalid(format!("coordinate {v} does not match backend {backend}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn exact_duplicates_removed() {
        let s = FinitePointSet::new(
            1,
            vec![Point::ratios(&[(1, 2)]), Point::ratios(&[(2, 4)]), Point::ratios(&[(1, 3)])],
        )
        .unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn float_duplicates_collapse() {
        let s = FinitePointSet::new(1, vec![Point::float(vec![0.5]), Point::float(vec![0.5 + 1e-14])]).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let r = FinitePointSet::new(2, vec![Point::ratios(&[(1, 2)])]);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn json_round_trip_exact() {
        let s = FinitePointSet::new(2, vec![Point::ratios(&[(1, 3), (2, 7)]), Point::ratios(&[(0, 1), (1, 1)])])
            .unwrap();
        let text = s.to_json();
        assert!(text.contains("\"1/3\""));
        assert_eq!(FinitePointSet::from_json(&text).unwrap(), s);
    }

    #[test]
    fn json_rejects_backend_mismatch() {
        let text = r#"{"dim":1,"backend":"exact","points":[[0.5]]}"#;
        assert!(FinitePointSet::from_json(text).is_err());
        let text = r#"{"dim":1,"backend":"exact","points":[["1/0"]]}"#;
        assert!(FinitePointSet::from_json(text).is_err());
    }

    #[test]
    fn unit_cube_membership() {
        assert!(Point::ratios(&[(0, 1), (1, 1)]).in_unit_cube());
        assert!(!Point::exact(vec![rat(-1, 5)]).in_unit_cube());
    }
}
