//! Exact arithmetic of finite sets: sumsets `S^m(A)`, product sets `T^m(A)`,
//! polynomial images, the projection identity, covering bounds at scale
//! `eps_n = 2^{-n^2}` and partial sums of `e^A`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::avoidance::stage_radius;
use crate::dyadic::{cubes_meeting_set, dyadic_grid_1d};
use crate::error::{Error, Result};
use crate::point::{FinitePointSet, Point};
use crate::scalar::{parse_rational, Backend};

/// Default bound on intermediate elements produced by one expansion step.
pub const DEFAULT_EXPANSION_CAP: u128 = 1_000_000;

type Vector = Vec<BigRational>;

fn vectors(a: &FinitePointSet) -> Result<Vec<Vector>> {
    if a.backend() != Backend::Exact {
        return Err(Error::ExactRequired);
    }
    Ok(a.points().iter().map(|p| p.exact_coords().unwrap().into_iter().cloned().collect()).collect())
}

fn values(a: &FinitePointSet) -> Result<Vec<BigRational>> {
    a.exact_values_1d()
}

fn to_set(dim: usize, items: impl IntoIterator<Item = Vector>) -> FinitePointSet {
    FinitePointSet::new(dim, items.into_iter().map(Point::exact).collect()).expect("exact points of one dimension")
}

fn from_values(items: impl IntoIterator<Item = BigRational>) -> FinitePointSet {
    FinitePointSet::from_rationals(items)
}

fn expand(left: usize, right: usize, cap: u128) -> Result<()> {
    let requested = left as u128 * right as u128;
    if requested > cap {
        return Err(Error::CapExceeded { requested, cap });
    }
    Ok(())
}

fn plus(x: &[BigRational], y: &[BigRational]) -> Vector {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

/// Deduplicated `X + Y` of one-dimensional value sets.
fn add_sets(x: &BTreeSet<BigRational>, y: &BTreeSet<BigRational>, cap: u128) -> Result<BTreeSet<BigRational>> {
    expand(x.len(), y.len(), cap)?;
    Ok(x.iter().flat_map(|a| y.iter().map(move |b| a + b)).collect())
}

fn mul_sets(x: &BTreeSet<BigRational>, y: &BTreeSet<BigRational>, cap: u128) -> Result<BTreeSet<BigRational>> {
    expand(x.len(), y.len(), cap)?;
    Ok(x.iter().flat_map(|a| y.iter().map(move |b| a * b)).collect())
}

fn nonempty(a: &FinitePointSet) -> Result<()> {
    if a.is_empty() {
        Err(Error::EmptySet)
    } else {
        Ok(())
    }
}

fn positive(m: u32) -> Result<()> {
    if m == 0 {
        Err(Error::Invalid("m must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `S^m(A) = {x_1 + ... + x_m : x_i in A}` in any dimension, built as
/// iterated `A + S`.
pub fn sum_set(a: &FinitePointSet, m: u32, cap: u128) -> Result<FinitePointSet> {
    nonempty(a)?;
    positive(m)?;
    let base = vectors(a)?;
    let mut acc: BTreeSet<Vector> = base.iter().cloned().collect();
    for _ in 1..m {
        expand(acc.len(), base.len(), cap)?;
        acc = acc.iter().flat_map(|s| base.iter().map(move |x| plus(s, x))).collect();
    }
    Ok(to_set(a.dim(), acc))
}

/// `lambda A`.
pub fn scalar_mul(lambda: &BigRational, a: &FinitePointSet) -> Result<FinitePointSet> {
    let scaled: Vec<Vector> = vectors(a)?.into_iter().map(|v| v.into_iter().map(|c| c * lambda).collect()).collect();
    Ok(to_set(a.dim(), scaled))
}

fn power_set_values(a: &BTreeSet<BigRational>, m: u32, cap: u128) -> Result<BTreeSet<BigRational>> {
    let mut acc = a.clone();
    for _ in 1..m {
        acc = mul_sets(&acc, a, cap)?;
    }
    Ok(acc)
}

/// `T^m(A) = {x_1 * ... * x_m : x_i in A}` for one-dimensional `A`.
pub fn product_set(a: &FinitePointSet, m: u32, cap: u128) -> Result<FinitePointSet> {
    nonempty(a)?;
    positive(m)?;
    let base: BTreeSet<BigRational> = values(a)?.into_iter().collect();
    Ok(from_values(power_set_values(&base, m, cap)?))
}

/// `a_0 + a_1 x + ... + a_n x^n` with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    coefficients: Vec<BigRational>,
}

impl Polynomial {
    /// Trailing zero coefficients are dropped; the zero polynomial keeps `a_0 = 0`.
    pub fn new(mut coefficients: Vec<BigRational>) -> Result<Polynomial> {
        if coefficients.is_empty() {
            return Err(Error::Invalid("polynomial needs at least one coefficient".into()));
        }
        while coefficients.len() > 1 && coefficients.last().unwrap().is_zero() {
            coefficients.pop();
        }
        Ok(Polynomial { coefficients })
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Pointwise value `P(x)`.
    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coefficients.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }
}

impl FromStr for Polynomial {
    type Err = Error;

    /// Comma-separated coefficients `a0,a1,...`.
    fn from_str(s: &str) -> Result<Polynomial> {
        let coefficients = s.split(',').map(|t| parse_rational(t.trim())).collect::<Result<Vec<_>>>()?;
        Polynomial::new(coefficients)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coefficients.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// `{a_0} + a_1 T^1(A) + ... + a_n T^n(A)`, each power drawing its own
/// variables. This is not the pointwise image `{P(a) : a in A}`.
pub fn polynomial_image(p: &Polynomial, a: &FinitePointSet, cap: u128) -> Result<FinitePointSet> {
    nonempty(a)?;
    let base: BTreeSet<BigRational> = values(a)?.into_iter().collect();
    let mut acc: BTreeSet<BigRational> = [p.coefficients[0].clone()].into_iter().collect();
    let mut power = base.clone();
    for (k, c) in p.coefficients.iter().enumerate().skip(1) {
        if k > 1 {
            power = mul_sets(&power, &base, cap)?;
        }
        if c.is_zero() {
            continue;
        }
        let scaled: BTreeSet<BigRational> = power.iter().map(|x| x * c).collect();
        acc = add_sets(&acc, &scaled, cap)?;
    }
    Ok(from_values(acc))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionCheck {
    pub equal: bool,
    /// `sqrt(m) pi_e(A^m)` with `e = m^{-1/2}(1, ..., 1)`.
    pub projected: FinitePointSet,
    pub sumset: FinitePointSet,
}

/// Compares `sqrt(m) pi_e(A^m)` with `S^m(A)`. The projection of `x` onto
/// the diagonal is `t (1, ..., 1)` with `t = sum(x) / m`; its coordinate
/// along `e` is `t sqrt(m)`, so the scaled value is `t m`.
pub fn projection_identity_check(a: &FinitePointSet, m: u32, cap: u128) -> Result<ProjectionCheck> {
    nonempty(a)?;
    positive(m)?;
    let base = values(a)?;
    let total = (base.len() as u128).checked_pow(m).unwrap_or(u128::MAX);
    if total > cap {
        return Err(Error::CapExceeded { requested: total, cap });
    }
    let mm = BigRational::from_integer(BigInt::from(m));
    let mut projected = BTreeSet::new();
    let mut digits = vec![0usize; m as usize];
    loop {
        let sum = digits.iter().fold(BigRational::zero(), |s, &i| s + &base[i]);
        let t = &sum / &mm;
        projected.insert(t * &mm);
        let mut k = 0;
        loop {
            if k == digits.len() {
                let projected = from_values(projected);
                let sumset = sum_set(a, m, cap)?;
                let equal = projected.exact_values_1d()? == sumset.exact_values_1d()?;
                return Ok(ProjectionCheck { equal, projected, sumset });
            }
            digits[k] += 1;
            if digits[k] < base.len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoveringBound {
    /// `log2` of the bound.
    pub log2: f64,
    /// The bound itself; `0` or `inf` when outside the `f64` range.
    pub value: f64,
}

/// `(2^n + 1)^m (2^{-n^2} sqrt(m))^s`, evaluated in `log2` space.
pub fn covering_bound(n: u32, m: u32, s: f64) -> Result<CoveringBound> {
    if n == 0 || m == 0 || !(s > 0.0) || !s.is_finite() {
        return Err(Error::Invalid("covering bound needs n >= 1, m >= 1, s > 0".into()));
    }
    let n = n as f64;
    let m = m as f64;
    // log2(2^n + 1) = n + log2(1 + 2^-n)
    let log_n = n + (-n).exp2().ln_1p() / std::f64::consts::LN_2;
    let log2 = m * log_n - s * n * n + 0.5 * s * m.log2();
    Ok(CoveringBound { log2, value: log2.exp2() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpPartialSum {
    pub m: u32,
    /// `S_m = T^0(A)/0! + ... + T^m(A)/m!` with `T^0(A) = {1}`.
    pub set: FinitePointSet,
    /// Upper bound on `d_H(S_m, S_{m+1})`: `max(A)^{m+1} / (m+1)!`.
    pub gap_bound: BigRational,
}

fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |f, i| f * BigInt::from(i))
}

/// Partial sums `S_0, ..., S_m` of `e^A` for `A` in `[0, 1]`.
///
/// `S_{k+1} = S_k + T^{k+1}(A)/(k+1)!` and the added set lies in
/// `[0, M^{k+1}/(k+1)!]` with `M = max A`, so every point of either set is
/// within that distance of the other whether or not `0` is in `A`.
pub fn exp_partial_sums(a: &FinitePointSet, m: u32, cap: u128) -> Result<Vec<ExpPartialSum>> {
    nonempty(a)?;
    let base: BTreeSet<BigRational> = values(a)?.into_iter().collect();
    if base.iter().any(|x| x.is_negative() || *x > BigRational::one()) {
        return Err(Error::Invalid("A must lie in [0, 1]".into()));
    }
    let max = base.iter().next_back().unwrap().clone();
    let mut acc: BTreeSet<BigRational> = [BigRational::one()].into_iter().collect();
    let mut power: BTreeSet<BigRational> = acc.clone();
    let mut out = Vec::with_capacity(m as usize + 1);
    for k in 0..=m {
        if k > 0 {
            power = mul_sets(&power, &base, cap)?;
            let f = BigRational::from_integer(factorial(k));
            let term: BTreeSet<BigRational> = power.iter().map(|x| x / &f).collect();
            acc = add_sets(&acc, &term, cap)?;
        }
        let gap_bound = num_traits::pow(max.clone(), k as usize + 1) / BigRational::from_integer(factorial(k + 1));
        out.push(ExpPartialSum { m: k, set: from_values(acc.iter().cloned()), gap_bound });
    }
    Ok(out)
}

/// `S_m` alone; see [`exp_partial_sums`].
pub fn exp_partial_sum(a: &FinitePointSet, m: u32, cap: u128) -> Result<ExpPartialSum> {
    Ok(exp_partial_sums(a, m, cap)?.pop().unwrap())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimEvidenceRow {
    pub n: u32,
    pub m: u32,
    /// `|A_n|`.
    pub base_size: usize,
    pub sum_size: usize,
    pub product_size: usize,
    /// Box count of `S^m(A_n)/m` (rescaled into `[0, 1]`) at level `n^2`.
    pub sum_boxes: u64,
    pub product_boxes: u64,
    /// `log2(count) / n^2`.
    pub sum_slope: f64,
    pub product_slope: f64,
    pub covering_log2: f64,
}

/// A set shaped like the typical sets in the dimension argument: a random
/// nonempty subset of `{k/2^n}` with each point doubled at distance
/// `eps_n = 2^{-n^2}` inside `[0, 1]`.
pub fn padded_skeleton(n: u32, seed: u64) -> FinitePointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = dyadic_grid_1d(n).exact_values_1d().unwrap();
    let mut chosen: Vec<BigRational> = grid.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    if chosen.is_empty() {
        chosen.push(grid[rng.gen_range(0..grid.len())].clone());
    }
    let eps = stage_radius(n);
    let padded = chosen.into_iter().flat_map(|x| {
        let y = if &x + &eps <= BigRational::one() { &x + &eps } else { &x - &eps };
        [x, y]
    });
    from_values(padded)
}

/// Box counts at scale `eps_n` for `S^m` and `T^m` of [`padded_skeleton`]
/// sets, one row per `n`. Slopes decay roughly like `m/n`.
pub fn dim_evidence(levels: &[u32], m: u32, seed: u64, cap: u128) -> Result<Vec<DimEvidenceRow>> {
    positive(m)?;
    levels
        .iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::Invalid("levels must be positive".into()));
            }
            let a = padded_skeleton(n, seed ^ n as u64);
            let s = sum_set(&a, m, cap)?;
            let t = product_set(&a, m, cap)?;
            let level = n * n;
            let shrunk = scalar_mul(&BigRational::new(BigInt::one(), BigInt::from(m)), &s)?;
            let sum_boxes = cubes_meeting_set(&shrunk, level)?.len() as u64;
            let product_boxes = cubes_meeting_set(&t, level)?.len() as u64;
            Ok(DimEvidenceRow {
                n,
                m,
                base_size: a.len(),
                sum_size: s.len(),
                product_size: t.len(),
                sum_boxes,
                product_boxes,
                sum_slope: (sum_boxes as f64).log2() / level as f64,
                product_slope: (product_boxes as f64).log2() / level as f64,
                covering_log2: covering_bound(n, m, 1.0)?.log2,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::hausdorff_distance;
    use crate::scalar::{rat, Scalar};

    fn set(v: &[i64]) -> FinitePointSet {
        from_values(v.iter().map(|&x| rat(x, 1)))
    }

    fn vals(s: &FinitePointSet) -> Vec<BigRational> {
        s.exact_values_1d().unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| rat(x, 1)).collect()
    }

    const CAP: u128 = DEFAULT_EXPANSION_CAP;

    #[test]
    fn sumset_examples() {
        assert_eq!(vals(&sum_set(&set(&[0, 1]), 2, CAP).unwrap()), ints(&[0, 1, 2]));
        assert_eq!(vals(&sum_set(&set(&[0, 1, 3]), 2, CAP).unwrap()), ints(&[0, 1, 2, 3, 4, 6]));
        assert_eq!(vals(&sum_set(&set(&[0, 1, 3]), 1, CAP).unwrap()), ints(&[0, 1, 3]));
        let plane = FinitePointSet::new(2, vec![Point::ratios(&[(0, 1), (0, 1)]), Point::ratios(&[(1, 1), (0, 1)])]).unwrap();
        assert_eq!(sum_set(&plane, 2, CAP).unwrap().len(), 3);
    }

    #[test]
    fn sumset_cap() {
        let a = from_values((0..100).map(|k| rat(k, 7)));
        assert!(matches!(sum_set(&a, 4, 1000), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn scalar_examples() {
        let a = from_values([rat(0, 1), rat(1, 2)]);
        assert_eq!(vals(&scalar_mul(&rat(0, 1), &a).unwrap()), ints(&[0]));
        assert_eq!(vals(&scalar_mul(&rat(2, 1), &a).unwrap()), ints(&[0, 1]));
        assert_eq!(scalar_mul(&rat(-1, 1), &set(&[1, 2, 5])).unwrap().len(), 3);
    }

    #[test]
    fn product_examples() {
        assert_eq!(vals(&product_set(&set(&[1, 2, 3]), 2, CAP).unwrap()), ints(&[1, 2, 3, 4, 6, 9]));
        assert_eq!(vals(&product_set(&set(&[0, 1]), 5, CAP).unwrap()), ints(&[0, 1]));
        assert_eq!(vals(&product_set(&set(&[2, 7]), 1, CAP).unwrap()), ints(&[2, 7]));
    }

    #[test]
    fn polynomial_examples() {
        let a = set(&[0, 1, 2]);
        let sq: Polynomial = "0,0,1".parse().unwrap();
        assert_eq!(vals(&polynomial_image(&sq, &a, CAP).unwrap()), ints(&[0, 1, 2, 4]));
        let c: Polynomial = "5/3".parse().unwrap();
        assert_eq!(vals(&polynomial_image(&c, &a, CAP).unwrap()), vec![rat(5, 3)]);
        let id: Polynomial = "0,1,0".parse().unwrap();
        assert_eq!(id.degree(), 1);
        assert_eq!(vals(&polynomial_image(&id, &a, CAP).unwrap()), ints(&[0, 1, 2]));
    }

    #[test]
    fn polynomial_image_is_not_pointwise() {
        let p: Polynomial = "0,-1,1".parse().unwrap();
        let a = set(&[0, 1]);
        assert_eq!(vals(&polynomial_image(&p, &a, CAP).unwrap()), ints(&[-1, 0, 1]));
        let pointwise: BTreeSet<BigRational> = vals(&a).iter().map(|x| p.eval(x)).collect();
        assert_eq!(pointwise.into_iter().collect::<Vec<_>>(), ints(&[0]));
    }

    #[test]
    fn projection_examples() {
        let r = projection_identity_check(&set(&[0, 1]), 2, CAP).unwrap();
        assert!(r.equal);
        assert_eq!(vals(&r.projected), ints(&[0, 1, 2]));
        assert!(projection_identity_check(&set(&[4, 9]), 1, CAP).unwrap().equal);
        assert!(projection_identity_check(&set(&[0, 1, 3]), 3, CAP).unwrap().equal);
    }

    #[test]
    fn covering_examples() {
        let b = covering_bound(2, 2, 0.5).unwrap();
        let direct = 25.0 * (2f64.sqrt() / 16.0).sqrt();
        assert!((b.value - direct).abs() < 1e-12 * direct);
        let lo = covering_bound(6, 2, 2.0).unwrap().log2;
        assert!(covering_bound(6, 2, 3.0).unwrap().log2 < lo);
        let mut prev = f64::INFINITY;
        for n in 1..40 {
            let l = covering_bound(n, 3, 0.25).unwrap().log2;
            if n >= 12 {
                assert!(l < prev);
            }
            prev = l;
        }
        assert!(prev < -200.0);
    }

    #[test]
    fn exp_examples() {
        for s in exp_partial_sums(&set(&[0]), 4, CAP).unwrap() {
            assert_eq!(vals(&s.set), ints(&[1]));
        }
        let e = exp_partial_sums(&set(&[1]), 4, CAP).unwrap();
        let expect = [rat(1, 1), rat(2, 1), rat(5, 2), rat(8, 3), rat(65, 24)];
        for (s, x) in e.iter().zip(expect) {
            assert_eq!(vals(&s.set), vec![x]);
        }
        assert_eq!(e[4].gap_bound, rat(1, 120));
    }

    #[test]
    fn exp_gap_bound_holds() {
        let a = from_values([rat(0, 1), rat(1, 3), rat(1, 1)]);
        let sums = exp_partial_sums(&a, 5, CAP).unwrap();
        for w in sums.windows(2) {
            let Scalar::Exact(h2) = hausdorff_distance(&w[0].set, &w[1].set).unwrap().squared else { panic!() };
            assert!(h2 <= &w[0].gap_bound * &w[0].gap_bound);
        }
        assert!(exp_partial_sums(&set(&[2]), 1, CAP).is_err());
    }

    #[test]
    fn dim_evidence_slopes_decay() {
        let rows = dim_evidence(&[2, 3, 4], 2, 7, CAP).unwrap();
        assert!(rows.windows(2).all(|w| w[1].sum_slope < w[0].sum_slope));
        assert_eq!(padded_skeleton(3, 1).len() % 2, 0);
    }
}
