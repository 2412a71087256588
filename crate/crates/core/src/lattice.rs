//! Common-denominator integer view of an exact point set.
//!
//! Every exact predicate used by the exhaustive scans (orientation
//! determinants, squared distances, similarity and angle equalities) is
//! evaluated here on integers. A checked `i128` path handles the usual
//! generated coordinates; any overflow falls back to `BigInt`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::point::FinitePointSet;
use crate::scalar::Backend;

const SMALL_LIMIT_BITS: u64 = 40;

#[derive(Debug, Clone)]
pub struct Lattice {
    dim: usize,
    scale: BigInt,
    small: Option<Vec<i128>>,
    big: Vec<BigInt>,
}

impl Lattice {
    pub fn from_set(set: &FinitePointSet) -> Result<Lattice> {
        if set.backend() != Backend::Exact {
            return Err(Error::ExactRequired);
        }
        let dim = set.dim();
        let mut scale = BigInt::one();
        for p in set.points() {
            for c in p.exact_coords().unwrap() {
                scale = scale.lcm(c.denom());
            }
        }
        let mut big = Vec::with_capacity(set.len() * dim);
        for p in set.points() {
            for c in p.exact_coords().unwrap() {
                big.push(c.numer() * (&scale / c.denom()));
            }
        }
        let small = if big.iter().all(|v| v.bits() <= SMALL_LIMIT_BITS) {
            Some(big.iter().map(|v| v.to_i128().unwrap()).collect())
        } else {
            None
        };
        Ok(Lattice { dim, scale, small, big })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.big.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.big.is_empty()
    }

    /// Common denominator of all coordinates.
    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    pub fn to_f64_points(&self) -> Vec<Vec<f64>> {
        let s = self.scale.to_f64().unwrap();
        self.big
            .chunks(self.dim)
            .map(|c| c.iter().map(|v| v.to_f64().unwrap() / s).collect())
            .collect()
    }

    fn small_diff(&self, s: &[i128], i: usize, j: usize, k: usize) -> i128 {
        s[i * self.dim + k] - s[j * self.dim + k]
    }

    fn big_diff(&self, i: usize, j: usize, k: usize) -> BigInt {
        &self.big[i * self.dim + k] - &self.big[j * self.dim + k]
    }

    /// Squared distance between points `i` and `j`, in lattice units.
    pub fn squared_distance(&self, i: usize, j: usize) -> BigInt {
        if let Some(s) = &self.small {
            if let Some(v) = self.squared_distance_small(s, i, j) {
                return BigInt::from(v);
            }
        }
        (0..self.dim).map(|k| {
            let d = self.big_diff(i, j, k);
            &d * &d
        }).sum()
    }

    fn squared_distance_small(&self, s: &[i128], i: usize, j: usize) -> Option<i128> {
        let mut acc: i128 = 0;
        for k in 0..self.dim {
            let d = self.small_diff(s, i, j, k);
            acc = acc.checked_add(d.checked_mul(d)?)?;
        }
        Some(acc)
    }

    /// Exact squared distance as a rational in the original units.
    pub fn squared_distance_rational(&self, i: usize, j: usize) -> BigRational {
        BigRational::new(self.squared_distance(i, j), &self.scale * &self.scale)
    }

    /// Sign of `det[p_{idx[1]} - p_{idx[0]}, ..., p_{idx[d]} - p_{idx[0]}]`.
    pub fn orientation(&self, idx: &[usize]) -> Ordering {
        assert_eq!(idx.len(), self.dim + 1, "orientation needs d+1 points");
        if let Some(s) = &self.small {
            let rows: Vec<Vec<i128>> = idx[1..]
                .iter()
                .map(|&i| (0..self.dim).map(|k| self.small_diff(s, i, idx[0], k)).collect())
                .collect();
            if let Some(det) = det_i128(rows) {
                return det.cmp(&0);
            }
        }
        let rows: Vec<Vec<BigInt>> = idx[1..]
            .iter()
            .map(|&i| (0..self.dim).map(|k| self.big_diff(i, idx[0], k)).collect())
            .collect();
        det_bigint(rows).sign_ordering()
    }

    /// Sorted squared side lengths of the triangle `(a, b, c)`.
    pub fn sorted_sides(&self, a: usize, b: usize, c: usize) -> [BigInt; 3] {
        let mut q = [self.squared_distance(a, b), self.squared_distance(a, c), self.squared_distance(b, c)];
        q.sort();
        q
    }

    /// Exact similarity test against a pattern given by integer squared
    /// sides `p1 <= p2 <= p3`. Degenerate triples are never similar.
    pub fn is_similar(&self, a: usize, b: usize, c: usize, key: &PatternKey) -> bool {
        if let (Some(s), Some(p)) = (&self.small, &key.small) {
            if let Some(r) = self.is_similar_small(s, a, b, c, p) {
                return r;
            }
        }
        let q = self.sorted_sides(a, b, c);
        if q[0].is_zero() {
            return false;
        }
        &q[0] * &key.big[2] == &key.big[0] * &q[2] && &q[1] * &key.big[2] == &key.big[1] * &q[2]
    }

    fn is_similar_small(&self, s: &[i128], a: usize, b: usize, c: usize, p: &[i128; 3]) -> Option<bool> {
        let mut q = [
            self.squared_distance_small(s, a, b)?,
            self.squared_distance_small(s, a, c)?,
            self.squared_distance_small(s, b, c)?,
        ];
        q.sort_unstable();
        if q[0] == 0 {
            return Some(false);
        }
        Some(
            q[0].checked_mul(p[2])? == p[0].checked_mul(q[2])?
                && q[1].checked_mul(p[2])? == p[1].checked_mul(q[2])?,
        )
    }

    /// Exact test whether the angle at `x` between `y - x` and `z - x`
    /// has squared cosine `cos2` and cosine sign `sign`.
    pub fn angle_equals(&self, x: usize, y: usize, z: usize, cos2: &BigRational, sign: i8) -> bool {
        let mut dot = BigInt::zero();
        let mut nu = BigInt::zero();
        let mut nv = BigInt::zero();
        for k in 0..self.dim {
            let u = self.big_diff(y, x, k);
            let v = self.big_diff(z, x, k);
            dot += &u * &v;
            nu += &u * &u;
            nv += &v * &v;
        }
        if nu.is_zero() || nv.is_zero() {
            return false;
        }
        let dot_sign: i8 = match dot.sign() {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Plus => 1,
        };
        if dot_sign != sign {
            return false;
        }
        &dot * &dot * cos2.denom() == cos2.numer() * nu * nv
    }
}

/// Integer squared sides of a pattern, reduced by their gcd.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternKey {
    big: [BigInt; 3],
    small: Option<[i128; 3]>,
}

impl PatternKey {
    /// From sorted rational squared sides.
    pub fn new(sides: &[BigRational; 3]) -> PatternKey {
        let l = sides.iter().fold(BigInt::one(), |acc, s| acc.lcm(s.denom()));
        let mut big: [BigInt; 3] = std::array::from_fn(|i| sides[i].numer() * (&l / sides[i].denom()));
        let g = big.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        if !g.is_zero() {
            for v in &mut big {
                *v = &*v / &g;
            }
        }
        let small = if big.iter().all(|v| v.bits() <= 48) {
            Some(std::array::from_fn(|i| big[i].to_i128().unwrap()))
        } else {
            None
        };
        PatternKey { big, small }
    }

    pub fn sides(&self) -> &[BigInt; 3] {
        &self.big
    }
}

trait SignOrdering {
    fn sign_ordering(&self) -> Ordering;
}

impl SignOrdering for BigInt {
    fn sign_ordering(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
}

/// Fraction-free (Bareiss) determinant with overflow detection.
pub(crate) fn det_i128(mut m: Vec<Vec<i128>>) -> Option<i128> {
    let n = m.len();
    match n {
        0 => return Some(1),
        1 => return Some(m[0][0]),
        2 => return m[0][0].checked_mul(m[1][1])?.checked_sub(m[0][1].checked_mul(m[1][0])?),
        _ => {}
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(swap) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return Some(0);
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[i][j].checked_mul(m[k][k])?.checked_sub(m[i][k].checked_mul(m[k][j])?)?;
                m[i][j] = v / prev;
            }
        }
        prev = m[k][k];
    }
    m[n - 1][n - 1].checked_mul(sign)
}

pub(crate) fn det_bigint(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Point;

    #[test]
    fn bareiss_agrees_between_paths() {
        let m = vec![vec![2i128, -3, 1], vec![4, 0, -2], vec![1, 5, 7]];
        let b: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
        // 2(0+10) + 3(28+2) + 1(20-0) = 20 + 90 + 20
        assert_eq!(det_i128(m), Some(130));
        assert_eq!(det_bigint(b), BigInt::from(130));
    }

    #[test]
    fn bareiss_pivots_on_zero() {
        let m = vec![vec![0i128, 1, 0], vec![1, 0, 0], vec![0, 0, 1]];
        assert_eq!(det_i128(m), Some(-1));
    }

    #[test]
    fn i128_overflow_falls_back() {
        let big = 1i128 << 100;
        assert_eq!(det_i128(vec![vec![big, 0], vec![0, big]]), None);
    }

    #[test]
    fn collinear_orientation_is_zero() {
        let s = FinitePointSet::new(
            2,
            vec![Point::ratios(&[(0, 1), (0, 1)]), Point::ratios(&[(1, 3), (1, 3)]), Point::ratios(&[(2, 3), (2, 3)])],
        )
        .unwrap();
        let l = Lattice::from_set(&s).unwrap();
        assert_eq!(l.orientation(&[0, 1, 2]), Ordering::Equal);
        assert_eq!(l.scale(), &BigInt::from(3));
    }
}
