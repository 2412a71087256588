//! Geometric primitives: distances, the Hausdorff metric on finite sets,
//! similarity classes of triangles, affine dependence and angles.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::PatternKey;
use crate::point::{FinitePointSet, Point};
use crate::scalar::{rational_to_f64, sqrt_enclosure, Backend, Scalar};

/// Default tolerance for equality of float similarity signatures.
pub const FLOAT_SIGNATURE_TOL: f64 = 1e-9;

/// Bits of precision used for certified square-root enclosures (width < 1e-30
/// for unit-scale values).
pub const ENCLOSURE_BITS: u32 = 110;

#[derive(Debug, Clone, PartialEq)]
pub struct Distance {
    pub squared: Scalar,
    pub value: f64,
    /// Rational interval containing the root, exact backend only.
    pub enclosure: Option<(BigRational, BigRational)>,
}

pub fn squared_distance(a: &Point, b: &Point) -> Result<Scalar> {
    a.check_dim(b)?;
    match (a.backend(), b.backend()) {
        (Backend::Exact, Backend::Exact) => {
            let mut acc = BigRational::zero();
            for (x, y) in a.exact_coords().unwrap().into_iter().zip(b.exact_coords().unwrap()) {
                let d = x - y;
                acc += &d * &d;
            }
            Ok(Scalar::Exact(acc))
        }
        (Backend::Float, Backend::Float) => Ok(Scalar::Float(squared_distance_f64(&a.to_f64(), &b.to_f64()))),
        _ => Err(Error::MixedBackend),
    }
}

pub(crate) fn squared_distance_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn euclidean_distance(a: &Point, b: &Point) -> Result<Distance> {
    let squared = squared_distance(a, b)?;
    Ok(match &squared {
        Scalar::Exact(q) => {
            let enclosure = sqrt_enclosure(q, ENCLOSURE_BITS);
            Distance { value: rational_to_f64(q).sqrt(), squared: squared.clone(), enclosure: Some(enclosure) }
        }
        Scalar::Float(q) => Distance { value: q.sqrt(), squared: squared.clone(), enclosure: None },
    })
}

/// Hausdorff distance between two finite sets. `squared` is exact under the
/// exact backend.
#[derive(Debug, Clone, PartialEq)]
pub struct HausdorffDistance {
    pub squared: Scalar,
    pub value: f64,
}

fn check_pair(e: &FinitePointSet, f: &FinitePointSet) -> Result<()> {
    if e.is_empty() || f.is_empty() {
        return Err(Error::EmptySet);
    }
    if e.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: e.dim(), found: f.dim() });
    }
    if e.backend() != f.backend() {
        return Err(Error::MixedBackend);
    }
    Ok(())
}

/// `max_{e in E} min_{f in F} |e - f|^2`.
pub fn directed_hausdorff_squared(e: &FinitePointSet, f: &FinitePointSet) -> Result<Scalar> {
    check_pair(e, f)?;
    match e.backend() {
        Backend::Exact => {
            let fe: Vec<Vec<&BigRational>> = f.points().iter().map(|p| p.exact_coords().unwrap()).collect();
            let mut worst = BigRational::zero();
            for p in e.points() {
                let pc = p.exact_coords().unwrap();
                let mut best: Option<BigRational> = None;
                for q in &fe {
                    let mut acc = BigRational::zero();
                    for (x, y) in pc.iter().zip(q) {
                        let d = *x - *y;
                        acc += &d * &d;
                    }
                    if best.as_ref().is_none_or(|b| acc < *b) {
                        let zero = acc.is_zero();
                        best = Some(acc);
                        if zero {
                            break;
                        }
                    }
                }
                let best = best.unwrap();
                if best > worst {
                    worst = best;
                }
            }
            Ok(Scalar::Exact(worst))
        }
        Backend::Float => {
            let fv: Vec<Vec<f64>> = f.points().iter().map(Point::to_f64).collect();
            let worst = e
                .points()
                .iter()
                .map(|p| {
                    let pv = p.to_f64();
                    fv.iter().map(|q| squared_distance_f64(&pv, q)).fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max);
            Ok(Scalar::Float(worst))
        }
    }
}

pub fn hausdorff_distance(e: &FinitePointSet, f: &FinitePointSet) -> Result<HausdorffDistance> {
    let ab = directed_hausdorff_squared(e, f)?;
    let ba = directed_hausdorff_squared(f, e)?;
    let squared = if ab.cmp_same(&ba)? == Ordering::Less { ba } else { ab };
    let value = squared.to_f64().sqrt();
    Ok(HausdorffDistance { squared, value })
}

/// One element of the ratio set: a distance ratio, stored by its square.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioValue {
    pub squared: Scalar,
    pub value: f64,
}

/// `{ |x_i - x_k| / |x_j - x_k| : i, j, k distinct }`, deduplicated and sorted.
pub fn ratio_set(a: &Point, b: &Point, c: &Point) -> Result<Vec<RatioValue>> {
    let pts = [a, b, c];
    let sq = (0..3)
        .map(|i| (0..3).map(|j| squared_distance(pts[i], pts[j])).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if sq[i][j].is_zero() {
            return Err(Error::CoincidentPoints(format!("points {i} and {j}")));
        }
    }
    let mut ordered = Vec::with_capacity(6);
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                if i != j && j != k && i != k {
                    ordered.push((sq[i][k].clone(), sq[j][k].clone()));
                }
            }
        }
    }
    match a.backend() {
        Backend::Exact => {
            let set: BTreeSet<BigRational> = ordered
                .into_iter()
                .map(|(n, d)| n.as_exact().unwrap() / d.as_exact().unwrap())
                .collect();
            Ok(set
                .into_iter()
                .map(|q| RatioValue { value: rational_to_f64(&q).sqrt(), squared: Scalar::Exact(q) })
                .collect())
        }
        Backend::Float => {
            let mut v: Vec<f64> = ordered.into_iter().map(|(n, d)| n.to_f64() / d.to_f64()).collect();
            v.sort_by(f64::total_cmp);
            v.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * y.abs().max(1.0));
            Ok(v.into_iter().map(|q| RatioValue { squared: Scalar::Float(q), value: q.sqrt() }).collect())
        }
    }
}

/// Canonical form of the similarity class of a triangle: side lengths
/// sorted ascending and divided by the largest.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilaritySignature {
    /// Squared normalized sides `(s1^2, s2^2, 1)`, exact backend only.
    pub squared: Option<[BigRational; 3]>,
    /// Normalized sides `s1 <= s2 <= s3 = 1`.
    pub sides: [f64; 3],
    /// Two of the three points coincide.
    pub degenerate: bool,
}

impl SimilaritySignature {
    fn from_squared_sides(q: [Scalar; 3]) -> Result<SimilaritySignature> {
        let mut q = q;
        q.sort_by(|x, y| x.cmp_same(y).unwrap_or(Ordering::Equal));
        if q[2].is_zero() {
            return Err(Error::CoincidentPoints("all three points coincide".into()));
        }
        let degenerate = q[0].is_zero();
        match &q[2] {
            Scalar::Exact(max) => {
                let squared: [BigRational; 3] = std::array::from_fn(|i| q[i].as_exact().unwrap() / max);
                let sides = std::array::from_fn(|i| rational_to_f64(&squared[i]).sqrt());
                Ok(SimilaritySignature { squared: Some(squared), sides, degenerate })
            }
            Scalar::Float(max) => {
                let sides = std::array::from_fn(|i| (q[i].to_f64() / max).sqrt());
                Ok(SimilaritySignature { squared: None, sides, degenerate })
            }
        }
    }

    /// L-infinity distance between normalized side vectors.
    pub fn gap(&self, other: &SimilaritySignature) -> f64 {
        self.sides.iter().zip(&other.sides).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Exact equality when both are exact, otherwise `gap <= tol`.
    pub fn matches(&self, other: &SimilaritySignature, tol: f64) -> bool {
        if self.degenerate || other.degenerate {
            return false;
        }
        match (&self.squared, &other.squared) {
            (Some(a), Some(b)) => a == b,
            _ => self.gap(other) <= tol,
        }
    }
}

pub fn similarity_signature(a: &Point, b: &Point, c: &Point) -> Result<SimilaritySignature> {
    SimilaritySignature::from_squared_sides([squared_distance(a, b)?, squared_distance(a, c)?, squared_distance(b, c)?])
}

/// A three-point pattern, identified by its similarity class.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    signature: SimilaritySignature,
    key: Option<PatternKey>,
    r_min: f64,
    points: Option<[Point; 3]>,
}

impl Pattern {
    pub fn from_points(a: &Point, b: &Point, c: &Point) -> Result<Pattern> {
        let signature = similarity_signature(a, b, c)?;
        if signature.degenerate {
            return Err(Error::CoincidentPoints("pattern points must be distinct".into()));
        }
        Ok(Pattern::from_signature(signature, Some([a.clone(), b.clone(), c.clone()])))
    }

    /// Pattern given directly by its three squared side lengths. The sides
    /// must be positive and satisfy the (possibly degenerate) triangle
    /// inequality, checked exactly.
    pub fn from_squared_sides(sides: [BigRational; 3]) -> Result<Pattern> {
        let mut q = sides;
        q.sort();
        if !q[0].is_positive() {
            return Err(Error::CoincidentPoints("pattern sides must be positive".into()));
        }
        // sqrt(q0) + sqrt(q1) >= sqrt(q2)  <=>  excess <= 0 or 4 q0 q1 >= excess^2
        let excess = &q[2] - &q[0] - &q[1];
        if excess.is_positive() && BigRational::from_integer(4.into()) * &q[0] * &q[1] < &excess * &excess {
            return Err(Error::Invalid("squared sides violate the triangle inequality".into()));
        }
        let sig = SimilaritySignature::from_squared_sides(q.map(Scalar::Exact))?;
        Ok(Pattern::from_signature(sig, None))
    }

    pub fn equilateral() -> Pattern {
        Pattern::from_squared_sides([BigRational::one(), BigRational::one(), BigRational::one()]).unwrap()
    }

    fn from_signature(signature: SimilaritySignature, points: Option<[Point; 3]>) -> Pattern {
        let key = signature.squared.as_ref().map(PatternKey::new);
        let r_min = signature.sides[0];
        Pattern { signature, key, r_min, points }
    }

    pub fn signature(&self) -> &SimilaritySignature {
        &self.signature
    }

    /// Integer squared sides for exact lattice tests (exact patterns only).
    pub fn key(&self) -> Option<&PatternKey> {
        self.key.as_ref()
    }

    /// Ratio of the shortest to the longest side, in `(0, 1]`.
    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn points(&self) -> Option<&[Point; 3]> {
        self.points.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.key.is_some()
    }
}

/// L-infinity distance between the triple's signature and the pattern's;
/// zero iff the triple is similar to the pattern.
pub fn similarity_gap(a: &Point, b: &Point, c: &Point, pattern: &Pattern) -> Result<f64> {
    let sig = similarity_signature(a, b, c)?;
    if sig.degenerate {
        return Err(Error::CoincidentPoints("two points of the triple coincide".into()));
    }
    if let (Some(x), Some(y)) = (&sig.squared, &pattern.signature.squared) {
        if x == y {
            return Ok(0.0);
        }
    }
    Ok(sig.gap(&pattern.signature))
}

/// Gap of a triple given by its three unsquared side lengths.
pub(crate) fn similarity_gap_from_sides(mut sides: [f64; 3], pattern: &Pattern) -> f64 {
    sides.sort_by(f64::total_cmp);
    let m = sides[2];
    let p = &pattern.signature.sides;
    ((sides[0] / m - p[0]).abs()).max((sides[1] / m - p[1]).abs())
}

pub fn is_similar(a: &Point, b: &Point, c: &Point, pattern: &Pattern, tol: f64) -> Result<bool> {
    let sig = similarity_signature(a, b, c)?;
    Ok(sig.matches(&pattern.signature, tol))
}

/// Verdict and quantitative margin for affine (in)dependence of `d+1`
/// points in dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineDependence {
    pub independent: bool,
    pub determinant: Scalar,
    /// Smallest singular value of the difference matrix; zero iff dependent.
    pub margin: f64,
}

pub fn affine_dependence_margin(pts: &[Point]) -> Result<AffineDependence> {
    let Some(first) = pts.first() else {
        return Err(Error::WrongPointCount { expected: 2, found: 0 });
    };
    let d = first.dim();
    if pts.len() != d + 1 {
        return Err(Error::WrongPointCount { expected: d + 1, found: pts.len() });
    }
    for p in pts {
        first.check_dim(p)?;
        if p.backend() != first.backend() {
            return Err(Error::MixedBackend);
        }
    }
    let rows_f: Vec<f64> = pts[1..]
        .iter()
        .flat_map(|p| p.to_f64().into_iter().zip(first.to_f64()).map(|(x, y)| x - y).collect::<Vec<_>>())
        .collect();
    let sigma = smallest_singular_value(&rows_f, d);
    match first.backend() {
        Backend::Exact => {
            let rows: Vec<Vec<BigRational>> = pts[1..]
                .iter()
                .map(|p| {
                    p.exact_coords()
                        .unwrap()
                        .into_iter()
                        .zip(first.exact_coords().unwrap())
                        .map(|(x, y)| x - y)
                        .collect()
                })
                .collect();
            let det = det_rational(rows);
            let independent = !det.is_zero();
            let margin = if independent { sigma.max(f64::MIN_POSITIVE) } else { 0.0 };
            Ok(AffineDependence { independent, determinant: Scalar::Exact(det), margin })
        }
        Backend::Float => {
            let m = DMatrix::from_row_slice(d, d, &rows_f);
            let det = m.determinant();
            let independent = sigma > 1e-12;
            Ok(AffineDependence { independent, determinant: Scalar::Float(det), margin: if independent { sigma } else { 0.0 } })
        }
    }
}

/// Determinant by Gaussian elimination over the rationals.
pub fn det_rational(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !m[r][k].is_zero()) else {
            return BigRational::zero();
        };
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        let pivot = m[k][k].clone();
        det *= &pivot;
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let f = &m[i][k] / &pivot;
            for j in k..n {
                let v = &f * &m[k][j];
                m[i][j] -= v;
            }
        }
    }
    det
}

/// Smallest singular value of a `d x d` row-major matrix.
pub fn smallest_singular_value(rows: &[f64], d: usize) -> f64 {
    match d {
        1 => rows[0].abs(),
        2 => {
            let (a, b, c, e) = (rows[0], rows[1], rows[2], rows[3]);
            let det = (a * e - b * c).abs();
            let fro = a * a + b * b + c * c + e * e;
            let disc = ((fro * fro - 4.0 * det * det).max(0.0)).sqrt();
            let smax = ((fro + disc) / 2.0).sqrt();
            if smax == 0.0 {
                0.0
            } else {
                det / smax
            }
        }
        3 => {
            let m = nalgebra::Matrix3::from_row_slice(rows);
            m.singular_values().min()
        }
        _ => {
            let m = DMatrix::from_row_slice(d, d, rows);
            m.singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
        }
    }
}

/// Angle at `x` between `y - x` and `z - x`, in `[0, pi]`.
pub fn angle_at(x: &Point, y: &Point, z: &Point) -> Result<f64> {
    x.check_dim(y)?;
    x.check_dim(z)?;
    if x.backend() != y.backend() || x.backend() != z.backend() {
        return Err(Error::MixedBackend);
    }
    match x.backend() {
        Backend::Exact => {
            let (xs, ys, zs) = (x.exact_coords().unwrap(), y.exact_coords().unwrap(), z.exact_coords().unwrap());
            let mut dot = BigRational::zero();
            let mut nu = BigRational::zero();
            let mut nv = BigRational::zero();
            for k in 0..x.dim() {
                let u = ys[k] - xs[k];
                let v = zs[k] - xs[k];
                dot += &u * &v;
                nu += &u * &u;
                nv += &v * &v;
            }
            if nu.is_zero() || nv.is_zero() {
                return Err(Error::CoincidentPoints("zero-length arm".into()));
            }
            // |u x v|^2 = |u|^2 |v|^2 - (u.v)^2 exactly
            let cross2 = &nu * &nv - &dot * &dot;
            Ok(rational_to_f64(&cross2).max(0.0).sqrt().atan2(rational_to_f64(&dot)))
        }
        Backend::Float => angle_at_f64(&x.to_f64(), &y.to_f64(), &z.to_f64())
            .ok_or_else(|| Error::CoincidentPoints("zero-length arm".into())),
    }
}

pub(crate) fn angle_at_f64(x: &[f64], y: &[f64], z: &[f64]) -> Option<f64> {
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for k in 0..x.len() {
        let u = y[k] - x[k];
        let v = z[k] - x[k];
        dot += u * v;
        nu += u * u;
        nv += v * v;
    }
    if nu == 0.0 || nv == 0.0 {
        return None;
    }
    let cos = (dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0);
    Some(cos.acos())
}

pub fn angle_gap(x: &Point, y: &Point, z: &Point, theta: f64) -> Result<f64> {
    Ok((angle_at(x, y, z)? - theta).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn p(c: &[(i64, i64)]) -> Point {
        Point::ratios(c)
    }

    fn set(points: Vec<Point>) -> FinitePointSet {
        let d = points[0].dim();
        FinitePointSet::new(d, points).unwrap()
    }

    #[test]
    fn distance_examples() {
        let o = p(&[(0, 1), (0, 1)]);
        assert_eq!(euclidean_distance(&o, &o).unwrap().squared, Scalar::from_int(0));
        let d = euclidean_distance(&o, &p(&[(3, 5), (4, 5)])).unwrap();
        assert_eq!(d.squared, Scalar::from_int(1));
        assert_eq!(d.enclosure, Some((rat(1, 1), rat(1, 1))));
        let d = euclidean_distance(&o, &p(&[(1, 1), (1, 1)])).unwrap();
        assert_eq!(d.squared, Scalar::from_int(2));
        let (lo, hi) = d.enclosure.unwrap();
        assert!(lo < hi && rational_to_f64(&(&hi - &lo)) < 1e-30);
        assert!((d.value - 2f64.sqrt()).abs() < 1e-15);
        assert!(euclidean_distance(&o, &p(&[(0, 1)])).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        let e = set(vec![p(&[(0, 1), (0, 1)])]);
        let f = set(vec![p(&[(1, 1), (0, 1)])]);
        assert_eq!(hausdorff_distance(&e, &f).unwrap().squared, Scalar::from_int(1));
        assert_eq!(hausdorff_distance(&e, &e).unwrap().squared, Scalar::from_int(0));
        let e = set(vec![p(&[(0, 1)]), p(&[(1, 1)])]);
        let f = set(vec![p(&[(1, 2)])]);
        let h = hausdorff_distance(&e, &f).unwrap();
        assert_eq!(h.squared, Scalar::Exact(rat(1, 4)));
        assert_eq!(h.value, 0.5);
    }

    #[test]
    fn hausdorff_errors() {
        let e = set(vec![p(&[(0, 1)])]);
        let empty = FinitePointSet::empty(1, Backend::Exact);
        assert_eq!(hausdorff_distance(&e, &empty), Err(Error::EmptySet));
        let f = set(vec![p(&[(0, 1), (0, 1)])]);
        assert!(matches!(hausdorff_distance(&e, &f), Err(Error::DimensionMismatch { .. })));
    }

    fn ratios(a: i64, b: i64, c: i64) -> Vec<BigRational> {
        ratio_set(&p(&[(a, 1)]), &p(&[(b, 1)]), &p(&[(c, 1)]))
            .unwrap()
            .into_iter()
            .map(|r| r.squared.as_exact().unwrap().clone())
            .collect()
    }

    #[test]
    fn ratio_set_examples() {
        // squared ratios of {1/2, 1, 2}
        assert_eq!(ratios(0, 1, 2), vec![rat(1, 4), rat(1, 1), rat(4, 1)]);
        // {1/3, 1/2, 2/3, 3/2, 2, 3}
        let sq: Vec<BigRational> =
            [(1, 3), (1, 2), (2, 3), (3, 2), (2, 1), (3, 1)].iter().map(|&(n, d)| rat(n * n, d * d)).collect();
        assert_eq!(ratios(0, 1, 3), sq);
        let eq = Pattern::equilateral();
        assert_eq!(eq.signature().sides, [1.0, 1.0, 1.0]);
        assert!(ratio_set(&p(&[(0, 1)]), &p(&[(0, 1)]), &p(&[(1, 1)])).is_err());
    }

    #[test]
    fn equilateral_ratio_set_is_one() {
        let h = 3f64.sqrt() / 2.0;
        let r = ratio_set(&Point::float(vec![0.0, 0.0]), &Point::float(vec![1.0, 0.0]), &Point::float(vec![0.5, h]))
            .unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn signature_examples() {
        let s = similarity_signature(&p(&[(0, 1)]), &p(&[(1, 1)]), &p(&[(3, 1)])).unwrap();
        assert_eq!(s.squared, Some([rat(1, 9), rat(4, 9), rat(1, 1)]));
        let h = 3f64.sqrt();
        let s = similarity_signature(&Point::float(vec![0.0, 0.0]), &Point::float(vec![2.0, 0.0]), &Point::float(vec![1.0, h]))
            .unwrap();
        assert!(s.matches(Pattern::equilateral().signature(), FLOAT_SIGNATURE_TOL));
        let all = p(&[(1, 2)]);
        assert!(similarity_signature(&all, &all, &all).is_err());
        let s = similarity_signature(&all, &all, &p(&[(0, 1)])).unwrap();
        assert!(s.degenerate);
        assert!(!s.matches(&s, 1.0));
    }

    #[test]
    fn similarity_gap_examples() {
        let pat = Pattern::from_points(&p(&[(0, 1)]), &p(&[(1, 1)]), &p(&[(3, 1)])).unwrap();
        let g = similarity_gap(&p(&[(10, 1)]), &p(&[(12, 1)]), &p(&[(16, 1)]), &pat).unwrap();
        assert_eq!(g, 0.0);
        let h = 3f64.sqrt() / 2.0;
        let g = similarity_gap(&Point::float(vec![0.0, 0.0]), &Point::float(vec![1.0, 0.0]), &Point::float(vec![0.5, h]), &pat)
            .unwrap();
        assert!((g - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn pattern_rejects_impossible_sides() {
        assert!(Pattern::from_squared_sides([rat(1, 1), rat(1, 1), rat(5, 1)]).is_err());
        // collinear 1 + 2 = 3 is allowed
        assert!(Pattern::from_squared_sides([rat(1, 1), rat(4, 1), rat(9, 1)]).is_ok());
        assert!(Pattern::from_squared_sides([rat(0, 1), rat(1, 1), rat(1, 1)]).is_err());
    }

    #[test]
    fn affine_examples() {
        let r = affine_dependence_margin(&[p(&[(0, 1), (0, 1)]), p(&[(1, 1), (0, 1)]), p(&[(0, 1), (1, 1)])]).unwrap();
        assert!(r.independent);
        assert_eq!(r.determinant, Scalar::from_int(1));
        assert!((r.margin - 1.0).abs() < 1e-12);
        let r = affine_dependence_margin(&[p(&[(0, 1), (0, 1)]), p(&[(1, 1), (1, 1)]), p(&[(2, 1), (2, 1)])]).unwrap();
        assert!(!r.independent);
        assert_eq!(r.margin, 0.0);
        let r = affine_dependence_margin(&[p(&[(0, 1), (0, 1)]), p(&[(1, 1), (0, 1)]), p(&[(1, 2), (1, 2)])]).unwrap();
        assert_eq!(r.determinant, Scalar::Exact(rat(1, 2)));
        assert!(matches!(
            affine_dependence_margin(&[p(&[(0, 1), (0, 1)]), p(&[(1, 1), (0, 1)])]),
            Err(Error::WrongPointCount { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn singular_value_closed_form_matches_svd() {
        let rows = [0.3, -1.2, 2.5, 0.7];
        let m = DMatrix::from_row_slice(2, 2, &rows);
        let svd_min = m.singular_values().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((smallest_singular_value(&rows, 2) - svd_min).abs() < 1e-12);
    }

    #[test]
    fn angle_examples() {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        let o = p(&[(0, 1), (0, 1)]);
        assert!((angle_at(&o, &p(&[(1, 1), (0, 1)]), &p(&[(0, 1), (1, 1)])).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(angle_at(&o, &p(&[(1, 1), (1, 1)]), &p(&[(2, 1), (2, 1)])).unwrap(), 0.0);
        assert!((angle_at(&o, &p(&[(1, 1), (0, 1)]), &p(&[(1, 1), (1, 1)])).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert!(angle_at(&o, &o, &p(&[(1, 1), (0, 1)])).is_err());
        let g = angle_gap(&o, &p(&[(1, 1), (0, 1)]), &p(&[(0, 1), (1, 1)]), FRAC_PI_4).unwrap();
        assert!((g - FRAC_PI_4).abs() < 1e-15);
    }
}
