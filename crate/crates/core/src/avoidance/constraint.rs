use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geom::{self, Pattern, FLOAT_SIGNATURE_TOL};
use crate::lattice::Lattice;
use crate::scalar::parse_rational;

/// Tolerance for recognising a forbidden angle whose squared cosine is a
/// small-denominator rational (pi/2, pi/3, pi/4, ...).
const ANGLE_RECOGNITION_TOL: f64 = 1e-12;
const ANGLE_MAX_DENOMINATOR: i64 = 64;

/// A forbidden angle. When `cos^2(theta)` is recognised as a rational, exact
/// detection compares `(u.v)^2 = cos^2 |u|^2 |v|^2` on the lattice; otherwise
/// no triple of rational points can realise the angle exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSpec {
    theta: f64,
    exact: Option<(BigRational, i8)>,
}

impl AngleSpec {
    pub fn new(theta: f64) -> Result<AngleSpec> {
        if !(0.0..std::f64::consts::PI).contains(&theta) {
            return Err(Error::Invalid(format!("angle {theta} outside [0, pi)")));
        }
        let cos = theta.cos();
        let sign = if cos.abs() < ANGLE_RECOGNITION_TOL {
            0
        } else if cos > 0.0 {
            1
        } else {
            -1
        };
        let c2 = cos * cos;
        let exact = (1..=ANGLE_MAX_DENOMINATOR).find_map(|den| {
            let num = (c2 * den as f64).round();
            ((c2 - num / den as f64).abs() < ANGLE_RECOGNITION_TOL)
                .then(|| (BigRational::new(BigInt::from(num as i64), BigInt::from(den)), sign))
        });
        Ok(AngleSpec { theta, exact })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Exact `(cos^2 theta, sign of cos theta)` when recognised.
    pub fn exact_cosine(&self) -> Option<&(BigRational, i8)> {
        self.exact.as_ref()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// No three points similar to the pattern.
    Pattern(Pattern),
    /// Every `d+1` points affinely independent.
    GeneralPosition,
    /// No three points forming the angle at any vertex.
    Angle(AngleSpec),
}

impl Constraint {
    pub fn arity(&self, dim: usize) -> usize {
        match self {
            Constraint::GeneralPosition => dim + 1,
            _ => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Constraint::Pattern(_) => "pattern",
            Constraint::GeneralPosition => "general-position",
            Constraint::Angle(_) => "angle",
        }
    }

    /// Quantitative separation of a tuple from the forbidden configuration,
    /// computed from float coordinates. Zero for degenerate tuples.
    pub fn gap(&self, pts: &[&[f64]]) -> f64 {
        match self {
            Constraint::Pattern(p) => {
                let s = [
                    geom::squared_distance_f64(pts[0], pts[1]).sqrt(),
                    geom::squared_distance_f64(pts[0], pts[2]).sqrt(),
                    geom::squared_distance_f64(pts[1], pts[2]).sqrt(),
                ];
                if s.contains(&0.0) {
                    return 0.0;
                }
                geom::similarity_gap_from_sides(s, p)
            }
            Constraint::GeneralPosition => {
                let d = pts[0].len();
                let rows: Vec<f64> =
                    pts[1..].iter().flat_map(|p| p.iter().zip(pts[0]).map(|(a, b)| a - b)).collect();
                geom::smallest_singular_value(&rows, d)
            }
            Constraint::Angle(a) => {
                let mut best = f64::INFINITY;
                for (x, y, z) in [(0, 1, 2), (1, 0, 2), (2, 0, 1)] {
                    match geom::angle_at_f64(pts[x], pts[y], pts[z]) {
                        Some(t) => best = best.min((t - a.theta).abs()),
                        None => return 0.0,
                    }
                }
                best
            }
        }
    }

    /// Exact violation test on lattice points `idx`; `pts` holds the same
    /// points as floats for patterns known only approximately.
    pub fn violated_exact(&self, lattice: &Lattice, pts: &[Vec<f64>], idx: &[usize]) -> bool {
        match self {
            Constraint::Pattern(p) => match p.key() {
                Some(key) => lattice.is_similar(idx[0], idx[1], idx[2], key),
                None => {
                    let refs: Vec<&[f64]> = idx.iter().map(|&i| pts[i].as_slice()).collect();
                    self.gap(&refs) <= FLOAT_SIGNATURE_TOL
                }
            },
            Constraint::GeneralPosition => lattice.orientation(idx) == std::cmp::Ordering::Equal,
            Constraint::Angle(a) => match &a.exact {
                Some((c2, sign)) => [(0, 1, 2), (1, 0, 2), (2, 0, 1)]
                    .iter()
                    .any(|&(x, y, z)| lattice.angle_equals(idx[x], idx[y], idx[z], c2, *sign)),
                None => false,
            },
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Constraint::Pattern(p) => {
                let sig = p.signature();
                match &sig.squared {
                    Some(q) => json!({"kind": "pattern", "squared_sides": q.iter().map(|v| v.to_string()).collect::<Vec<_>>()}),
                    None => json!({"kind": "pattern", "sides": sig.sides}),
                }
            }
            Constraint::GeneralPosition => json!({"kind": "general-position"}),
            Constraint::Angle(a) => json!({"kind": "angle", "theta": a.theta}),
        }
    }

    pub fn from_json(v: &Value) -> Result<Constraint> {
        let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| Error::Invalid("constraint kind".into()))?;
        match kind {
            "general-position" => Ok(Constraint::GeneralPosition),
            "angle" => {
                let theta = v.get("theta").and_then(Value::as_f64).ok_or_else(|| Error::Invalid("angle theta".into()))?;
                Ok(Constraint::Angle(AngleSpec::new(theta)?))
            }
            "pattern" => {
                if let Some(q) = v.get("squared_sides").and_then(Value::as_array) {
                    let sides = q
                        .iter()
                        .map(|s| s.as_str().ok_or_else(|| Error::Invalid("squared side".into())).and_then(parse_rational))
                        .collect::<Result<Vec<_>>>()?;
                    let sides: [BigRational; 3] =
                        sides.try_into().map_err(|_| Error::Invalid("pattern needs three sides".into()))?;
                    Ok(Constraint::Pattern(Pattern::from_squared_sides(sides)?))
                } else if let Some(s) = v.get("sides").and_then(Value::as_array) {
                    let s: Vec<f64> = s.iter().filter_map(Value::as_f64).collect();
                    if s.len() != 3 {
                        return Err(Error::Invalid("pattern needs three sides".into()));
                    }
                    // realise the triangle in the plane and rebuild from points
                    let pts = triangle_from_sides(s[0], s[1], s[2])?;
                    Ok(Constraint::Pattern(Pattern::from_points(&pts[0], &pts[1], &pts[2])?))
                } else {
                    Err(Error::Invalid("pattern needs squared_sides or sides".into()))
                }
            }
            other => Err(Error::Invalid(format!("unknown constraint kind {other:?}"))),
        }
    }
}

fn triangle_from_sides(a: f64, b: f64, c: f64) -> Result<[crate::point::Point; 3]> {
    use crate::point::Point;
    // place side c on the x-axis; a opposite the origin vertex
    let x = (b * b + c * c - a * a) / (2.0 * c);
    let y2 = b * b - x * x;
    if !(y2 >= -1e-12) || c <= 0.0 {
        return Err(Error::Invalid("sides do not form a triangle".into()));
    }
    Ok([Point::float(vec![0.0, 0.0]), Point::float(vec![c, 0.0]), Point::float(vec![x, y2.max(0.0).sqrt()])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    #[test]
    fn special_angles_are_recognised() {
        assert_eq!(AngleSpec::new(FRAC_PI_2).unwrap().exact, Some((rat(0, 1), 0)));
        assert_eq!(AngleSpec::new(FRAC_PI_4).unwrap().exact, Some((rat(1, 2), 1)));
        assert_eq!(AngleSpec::new(FRAC_PI_3).unwrap().exact, Some((rat(1, 4), 1)));
        assert_eq!(AngleSpec::new(2.0 * FRAC_PI_3).unwrap().exact, Some((rat(1, 4), -1)));
        assert_eq!(AngleSpec::new(0.0).unwrap().exact, Some((rat(1, 1), 1)));
        assert_eq!(AngleSpec::new(1.0).unwrap().exact, None);
        assert!(AngleSpec::new(std::f64::consts::PI).is_err());
    }

    #[test]
    fn constraint_json_round_trip() {
        for c in [
            Constraint::GeneralPosition,
            Constraint::Angle(AngleSpec::new(0.7).unwrap()),
            Constraint::Pattern(Pattern::from_squared_sides([rat(1, 1), rat(4, 1), rat(9, 1)]).unwrap()),
        ] {
            assert_eq!(Constraint::from_json(&c.to_json()).unwrap(), c);
        }
    }

    #[test]
    fn gaps_vanish_on_violations() {
        let o = [0.0, 0.0];
        let a = [1.0, 1.0];
        let b = [2.0, 2.0];
        assert_eq!(Constraint::GeneralPosition.gap(&[&o, &a, &b]), 0.0);
        let right = Constraint::Angle(AngleSpec::new(FRAC_PI_2).unwrap());
        assert!(right.gap(&[&o, &[1.0, 0.0], &[0.0, 1.0]]) < 1e-15);
        let p = Constraint::Pattern(Pattern::from_squared_sides([rat(1, 1), rat(4, 1), rat(9, 1)]).unwrap());
        assert_eq!(p.gap(&[&[0.0], &[0.25], &[0.75]]), 0.0);
    }
}
