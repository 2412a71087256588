//! Piecewise-linear functions on `[0, 1]` under the sup metric, fibres
//! `V_x = {x} x R` carrying a nowhere-dense set, and the constant-shift
//! construction moving a graph off a fibre set.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::category::{DyadicSelection, NowhereDenseScheme, SchemeDoc};
use crate::error::{Error, Result};
use crate::point::Point;
use crate::scalar::parse_rational;

/// Default half-width `W` of the value window `[-W, W]`.
pub const DEFAULT_WINDOW: i64 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLFunction {
    breakpoints: Vec<BigRational>,
    values: Vec<BigRational>,
}

impl PLFunction {
    pub fn new(breakpoints: Vec<BigRational>, values: Vec<BigRational>) -> Result<PLFunction> {
        if breakpoints.len() < 2 || breakpoints.len() != values.len() {
            return Err(Error::Invalid("need at least two breakpoints and one value per breakpoint".into()));
        }
        if !breakpoints[0].is_zero() || !breakpoints.last().unwrap().is_one() {
            return Err(Error::Invalid("breakpoints must run from 0 to 1".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("breakpoints must be strictly increasing".into()));
        }
        Ok(PLFunction { breakpoints, values })
    }

    pub fn constant(c: BigRational) -> PLFunction {
        PLFunction::linear(c.clone(), c)
    }

    /// The segment from `(0, a)` to `(1, b)`.
    pub fn linear(a: BigRational, b: BigRational) -> PLFunction {
        PLFunction { breakpoints: vec![BigRational::zero(), BigRational::one()], values: vec![a, b] }
    }

    pub fn breakpoints(&self) -> &[BigRational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn eval(&self, x: &BigRational) -> Result<BigRational> {
        if x.is_negative() || *x > BigRational::one() {
            return Err(Error::Invalid(format!("{x} outside [0,1]")));
        }
        let k = self.breakpoints.partition_point(|t| t <= x);
        if k == self.breakpoints.len() {
            return Ok(self.values.last().unwrap().clone());
        }
        let (t0, t1) = (&self.breakpoints[k - 1], &self.breakpoints[k]);
        let (v0, v1) = (&self.values[k - 1], &self.values[k]);
        Ok(v0 + (v1 - v0) * (x - t0) / (t1 - t0))
    }

    /// `f + c`.
    pub fn shift(&self, c: &BigRational) -> PLFunction {
        PLFunction { breakpoints: self.breakpoints.clone(), values: self.values.iter().map(|v| v + c).collect() }
    }

    pub fn to_json(&self) -> String {
        let doc = PLFunctionDoc {
            breakpoints: self.breakpoints.iter().map(ToString::to_string).collect(),
            values: self.values.iter().map(ToString::to_string).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<PLFunction> {
        let doc: PLFunctionDoc =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("function JSON: {e}")))?;
        let parse = |v: &[String]| v.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>();
        PLFunction::new(parse(&doc.breakpoints)?, parse(&doc.values)?)
    }
}

/// `{"breakpoints": ["0", "1/2", "1"], "values": ["0", "1/4", "1"]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PLFunctionDoc {
    pub breakpoints: Vec<String>,
    pub values: Vec<String>,
}

/// `max |f - g|` over `[0, 1]`, attained on the merged breakpoints.
pub fn sup_distance(f: &PLFunction, g: &PLFunction) -> BigRational {
    let grid: BTreeSet<&BigRational> = f.breakpoints.iter().chain(&g.breakpoints).collect();
    grid.into_iter()
        .map(|t| (f.eval(t).unwrap() - g.eval(t).unwrap()).abs())
        .max()
        .unwrap()
}

/// A nowhere-dense set on the fibre over `x`. One-dimensional schemes live
/// on `[0, 1]`; value `v` is placed at `(v + W) / 2W`, so the scheme covers
/// the window `[-W, W]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberSet {
    pub x: BigRational,
    pub scheme: NowhereDenseScheme,
    pub window: BigRational,
}

impl FiberSet {
    pub fn new(x: BigRational, scheme: NowhereDenseScheme, window: BigRational) -> Result<FiberSet> {
        if x.is_negative() || x > BigRational::one() {
            return Err(Error::Invalid(format!("fibre position {x} outside [0,1]")));
        }
        if scheme.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: scheme.dim() });
        }
        if !window.is_positive() {
            return Err(Error::Invalid("window must be positive".into()));
        }
        Ok(FiberSet { x, scheme, window })
    }

    /// Finite set of values, given in value space.
    pub fn finite(x: BigRational, values: impl IntoIterator<Item = BigRational>) -> Result<FiberSet> {
        let window = BigRational::from_integer(DEFAULT_WINDOW.into());
        let scaled: Vec<BigRational> = values.into_iter().map(|v| to_unit(&v, &window)).collect();
        if let Some(v) = scaled.iter().find(|v| v.is_negative() || **v > BigRational::one()) {
            return Err(Error::Invalid(format!("value outside the window (scaled {v})")));
        }
        let set = crate::point::FinitePointSet::from_rationals(scaled);
        FiberSet::new(x, NowhereDenseScheme::Finite(set), window)
    }

    pub fn dyadic(x: BigRational, selection: DyadicSelection) -> Result<FiberSet> {
        FiberSet::new(x, NowhereDenseScheme::Dyadic(selection), BigRational::from_integer(DEFAULT_WINDOW.into()))
    }

    /// Whether value `v` lies in the set.
    pub fn contains_value(&self, v: &BigRational) -> Result<bool> {
        let u = to_unit(v, &self.window);
        if u.is_negative() || u > BigRational::one() {
            return Ok(false);
        }
        let p = Point::exact(vec![u]);
        match &self.scheme {
            NowhereDenseScheme::Finite(s) => Ok(s.points().contains(&p)),
            NowhereDenseScheme::Dyadic(d) => d.contains_point(&p),
        }
    }

    /// Closed intervals in value space covering the set, sorted.
    pub fn value_intervals(&self) -> Vec<(BigRational, BigRational)> {
        let mut out: Vec<(BigRational, BigRational)> = match &self.scheme {
            NowhereDenseScheme::Finite(s) => s
                .exact_values_1d()
                .unwrap()
                .iter()
                .map(|u| {
                    let v = from_unit(u, &self.window);
                    (v.clone(), v)
                })
                .collect(),
            NowhereDenseScheme::Dyadic(d) => d
                .selected()
                .iter()
                .map(|q| {
                    let (lo, hi) = q.bounds(0);
                    (from_unit(&lo, &self.window), from_unit(&hi, &self.window))
                })
                .collect(),
        };
        out.sort();
        out
    }
}

/// Fibre wire form. Either `values` (points of `A` in value space) or a
/// one-dimensional `scheme` on the rescaled window is given.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiberDoc {
    pub x: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeDoc>,
}

impl FiberSet {
    pub fn to_json(&self) -> String {
        let doc = FiberDoc {
            x: self.x.to_string(),
            window: Some(self.window.to_string()),
            values: None,
            scheme: Some(SchemeDoc::from(&self.scheme)),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<FiberSet> {
        let doc: FiberDoc = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("fibre JSON: {e}")))?;
        let x = parse_rational(&doc.x)?;
        let window = match &doc.window {
            Some(w) => parse_rational(w)?,
            None => BigRational::from_integer(DEFAULT_WINDOW.into()),
        };
        match (doc.values, doc.scheme) {
            (Some(values), None) => {
                let values = values.iter().map(|v| parse_rational(v)).collect::<Result<Vec<_>>>()?;
                let scaled: Vec<BigRational> = values.iter().map(|v| to_unit(v, &window)).collect();
                if scaled.iter().any(|v| v.is_negative() || *v > BigRational::one()) {
                    return Err(Error::Invalid("fibre value outside the window".into()));
                }
                let set = crate::point::FinitePointSet::from_rationals(scaled);
                FiberSet::new(x, NowhereDenseScheme::Finite(set), window)
            }
            (None, Some(scheme)) => FiberSet::new(x, scheme.try_into()?, window),
            _ => Err(Error::Invalid("fibre needs exactly one of values or scheme".into())),
        }
    }
}

fn to_unit(v: &BigRational, w: &BigRational) -> BigRational {
    (v + w) / (w * BigInt::from(2))
}

fn from_unit(u: &BigRational, w: &BigRational) -> BigRational {
    u * w * BigInt::from(2) - w
}

/// Whether the graph of `f` meets the fibre set, i.e. `f(x) in A`.
pub fn graph_hits_fiber(f: &PLFunction, fiber: &FiberSet) -> Result<bool> {
    fiber.contains_value(&f.eval(&fiber.x)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftResult {
    pub g: PLFunction,
    /// `g(x)`.
    pub value: BigRational,
    /// `(g(x) - eps', g(x) + eps')` misses `A`.
    pub clearance: BigRational,
    /// `sup |f - g|`.
    pub distance: BigRational,
}

/// Gaps of `A` inside the open interval `(lo, hi)`, as open intervals.
fn gaps(intervals: &[(BigRational, BigRational)], lo: &BigRational, hi: &BigRational) -> Vec<(BigRational, BigRational)> {
    let mut out = Vec::new();
    let mut cursor = lo.clone();
    for (a, b) in intervals {
        if b <= lo || a >= hi {
            continue;
        }
        if *a > cursor {
            out.push((cursor.clone(), a.clone()));
        }
        if *b > cursor {
            cursor = b.clone();
        }
    }
    if cursor < *hi {
        out.push((cursor, hi.clone()));
    }
    out
}

/// Smallest distance from `v` to the set (`None` if `A` is empty).
fn distance_to_set(intervals: &[(BigRational, BigRational)], v: &BigRational) -> Option<BigRational> {
    intervals
        .iter()
        .map(|(a, b)| {
            if v < a {
                a - v
            } else if v > b {
                v - b
            } else {
                BigRational::zero()
            }
        })
        .min()
}

/// `g = f + (v - f(x))` for a value `v` within `eps` of `f(x)` that is
/// cleared from `A` by `eps'`. If `f(x)` already sits in a gap it is kept;
/// otherwise `v` is the midpoint of the widest gap (rightmost on ties).
pub fn avoid_shift(f: &PLFunction, fiber: &FiberSet, eps: &BigRational) -> Result<ShiftResult> {
    if !eps.is_positive() {
        return Err(Error::Invalid("eps must be positive".into()));
    }
    let fx = f.eval(&fiber.x)?;
    let intervals = fiber.value_intervals();
    let lo = &fx - eps;
    let hi = &fx + eps;
    let free = gaps(&intervals, &lo, &hi);
    let two = BigRational::from_integer(BigInt::from(2));
    let (value, clearance) = if let Some((a, b)) = free.iter().find(|(a, b)| *a < fx && fx < *b) {
        let c = (&fx - a).min(b - &fx);
        (fx.clone(), c)
    } else {
        let (a, b) = free
            .iter()
            .max_by(|x, y| (&x.1 - &x.0).cmp(&(&y.1 - &y.0)))
            .ok_or_else(|| Error::WitnessExhausted(crate::dyadic::DyadicCube::root(1)))?;
        ((a + b) / &two, (b - a) / &two)
    };
    let g = f.shift(&(&value - &fx));
    let distance = sup_distance(f, &g);

    if distance >= *eps {
        return Err(Error::Postcondition(format!("d(f,g) = {distance} not below eps")));
    }
    if graph_hits_fiber(&g, fiber)? {
        return Err(Error::Postcondition("g(x) lies in A".into()));
    }
    if let Some(d) = distance_to_set(&intervals, &value) {
        if d < clearance {
            return Err(Error::Postcondition(format!("clearance {clearance} exceeds distance {d} to A")));
        }
    }
    Ok(ShiftResult { g, value, clearance, distance })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManyShiftResult {
    pub g: PLFunction,
    /// Radius used at each step.
    pub radii: Vec<BigRational>,
    /// Clearance won at each fibre.
    pub clearances: Vec<BigRational>,
    pub distance: BigRational,
}

/// Applies [`avoid_shift`] fibre by fibre. Step `i` uses a radius no larger
/// than `eps / 2^{i+1}` and than `clearance_j / 2^{i-j}` for every earlier
/// fibre `j`, so the total shift stays below `eps` and no earlier fibre is
/// re-entered.
pub fn avoid_many(f: &PLFunction, fibers: &[FiberSet], eps: &BigRational) -> Result<ManyShiftResult> {
    let mut g = f.clone();
    let mut radii = Vec::with_capacity(fibers.len());
    let mut clearances: Vec<BigRational> = Vec::with_capacity(fibers.len());
    for (i, fiber) in fibers.iter().enumerate() {
        let mut r = eps / BigRational::from_integer(BigInt::one() << (i + 1));
        for (j, c) in clearances.iter().enumerate() {
            let bound = c / BigRational::from_integer(BigInt::one() << (i - j));
            if bound < r {
                r = bound;
            }
        }
        let step = avoid_shift(&g, fiber, &r)?;
        g = step.g;
        radii.push(r);
        clearances.push(step.clearance);
    }
    let distance = sup_distance(f, &g);
    if distance >= *eps {
        return Err(Error::Postcondition(format!("d(f,g) = {distance} not below eps")));
    }
    for fiber in fibers {
        if graph_hits_fiber(&g, fiber)? {
            return Err(Error::Postcondition("g meets a fibre set".into()));
        }
    }
    Ok(ManyShiftResult { g, radii, clearances, distance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn half() -> BigRational {
        rat(1, 2)
    }

    #[test]
    fn sup_distance_examples() {
        let f = PLFunction::linear(rat(0, 1), rat(1, 1));
        assert_eq!(sup_distance(&f, &f), rat(0, 1));
        assert_eq!(sup_distance(&PLFunction::constant(rat(0, 1)), &PLFunction::constant(rat(-3, 2))), rat(3, 2));
        assert_eq!(sup_distance(&f, &PLFunction::linear(rat(1, 1), rat(0, 1))), rat(1, 1));
        let tent = PLFunction::new(vec![rat(0, 1), half(), rat(1, 1)], vec![rat(0, 1), rat(1, 1), rat(0, 1)]).unwrap();
        assert_eq!(sup_distance(&tent, &PLFunction::constant(rat(0, 1))), rat(1, 1));
    }

    #[test]
    fn eval_interpolates() {
        let f = PLFunction::new(vec![rat(0, 1), half(), rat(1, 1)], vec![rat(0, 1), rat(1, 4), rat(1, 1)]).unwrap();
        assert_eq!(f.eval(&rat(1, 4)).unwrap(), rat(1, 8));
        assert_eq!(f.eval(&rat(3, 4)).unwrap(), rat(5, 8));
        assert_eq!(f.eval(&rat(1, 1)).unwrap(), rat(1, 1));
        assert!(f.eval(&rat(2, 1)).is_err());
        assert!(PLFunction::new(vec![rat(0, 1), rat(1, 2)], vec![rat(0, 1), rat(0, 1)]).is_err());
    }

    #[test]
    fn hit_examples() {
        let a = FiberSet::finite(half(), [rat(0, 1)]).unwrap();
        assert!(graph_hits_fiber(&PLFunction::constant(rat(0, 1)), &a).unwrap());
        assert!(!graph_hits_fiber(&PLFunction::constant(rat(1, 1)), &a).unwrap());
        let b = FiberSet::finite(rat(1, 3), [rat(1, 3)]).unwrap();
        assert!(graph_hits_fiber(&PLFunction::linear(rat(0, 1), rat(1, 1)), &b).unwrap());
    }

    #[test]
    fn shift_off_a_point() {
        let f = PLFunction::constant(rat(0, 1));
        let a = FiberSet::finite(half(), [rat(0, 1)]).unwrap();
        let r = avoid_shift(&f, &a, &rat(1, 10)).unwrap();
        assert_eq!(r.value, rat(1, 20));
        assert_eq!(r.distance, rat(1, 20));
        assert_eq!(r.clearance, rat(1, 20));
        let r2 = avoid_shift(&f, &a, &rat(1, 20)).unwrap();
        assert_eq!(r2.value, rat(1, 40));
    }

    #[test]
    fn no_shift_when_clear() {
        let f = PLFunction::linear(rat(0, 1), rat(1, 1));
        let a = FiberSet::finite(half(), [rat(1, 1)]).unwrap();
        let r = avoid_shift(&f, &a, &rat(1, 10)).unwrap();
        assert_eq!(r.g, f);
        assert_eq!(r.clearance, rat(1, 10));
    }

    #[test]
    fn shift_off_cantor_fiber() {
        // unit interval [7/16, 9/16] is the value band [-1/4, 1/4]
        let sel = DyadicSelection::new(1, 4, [vec![7], vec![8]]).unwrap();
        let a = FiberSet::dyadic(rat(1, 4), sel).unwrap();
        let f = PLFunction::constant(rat(0, 1));
        assert!(graph_hits_fiber(&f, &a).unwrap());
        let r = avoid_shift(&f, &a, &rat(1, 1)).unwrap();
        assert!(!graph_hits_fiber(&r.g, &a).unwrap());
        assert!(r.distance < rat(1, 1));
        assert_eq!(r.value, rat(5, 8));
    }

    #[test]
    fn many_fibers() {
        let f = PLFunction::linear(rat(0, 1), rat(1, 1));
        let fibers: Vec<FiberSet> = (1..=20)
            .map(|k| {
                let x = rat(k, 21);
                let fx = f.eval(&x).unwrap();
                FiberSet::finite(x, [fx]).unwrap()
            })
            .collect();
        let r = avoid_many(&f, &fibers, &rat(1, 100)).unwrap();
        assert!(r.distance < rat(1, 100));
        for fiber in &fibers {
            assert!(!graph_hits_fiber(&r.g, fiber).unwrap());
        }
    }

    #[test]
    fn json_round_trip() {
        let f = PLFunction::from_json(r#"{"breakpoints":["0","1/2","1"],"values":["0","1/4","1"]}"#).unwrap();
        assert_eq!(PLFunction::from_json(&f.to_json()).unwrap(), f);
        let a = FiberSet::from_json(r#"{"x":"1/2","values":["0","-1/3"]}"#).unwrap();
        assert!(a.contains_value(&rat(-1, 3)).unwrap());
        assert_eq!(FiberSet::from_json(&a.to_json()).unwrap(), a);
    }
}
