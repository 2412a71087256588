//! Level-n dyadic subcubes of the unit cube, point incidence and
//! box-counting profiles.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{FinitePointSet, Point};
use crate::scalar::{Backend, Scalar};

/// Default bound on the number of cubes any enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 22;

/// The closed cube `prod_k [i_k 2^-n, (i_k + 1) 2^-n]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: u32,
    pub index: Vec<u64>,
}

impl DyadicCube {
    pub fn new(level: u32, index: Vec<u64>) -> Result<DyadicCube> {
        if level >= 63 {
            return Err(Error::Invalid(format!("level {level} too deep")));
        }
        if index.is_empty() {
            return Err(Error::Invalid("cube index must have at least one coordinate".into()));
        }
        let side = 1u64 << level;
        if let Some(i) = index.iter().find(|&&i| i >= side) {
            return Err(Error::Invalid(format!("index {i} out of range for level {level}")));
        }
        Ok(DyadicCube { level, index })
    }

    pub fn root(dim: usize) -> DyadicCube {
        DyadicCube { level: 0, index: vec![0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn side(&self) -> BigRational {
        BigRational::new(BigInt::from(1), BigInt::from(1) << self.level as usize)
    }

    pub fn side_f64(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    /// Lower and upper corner coordinates along axis `k`.
    pub fn bounds(&self, k: usize) -> (BigRational, BigRational) {
        let s = self.side();
        let lo = &s * BigInt::from(self.index[k]);
        (lo.clone(), lo + s)
    }

    pub fn center(&self) -> Point {
        let half = self.side() / BigInt::from(2);
        Point::exact((0..self.dim()).map(|k| self.bounds(k).0 + &half).collect())
    }

    pub fn children(&self) -> impl Iterator<Item = DyadicCube> + '_ {
        let d = self.dim();
        (0..1u64 << d).map(move |mask| DyadicCube {
            level: self.level + 1,
            index: (0..d).map(|k| 2 * self.index[k] + ((mask >> k) & 1)).collect(),
        })
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        (self.level > 0).then(|| DyadicCube { level: self.level - 1, index: self.index.iter().map(|i| i / 2).collect() })
    }

    /// The ancestor at `level <= self.level`.
    pub fn ancestor(&self, level: u32) -> DyadicCube {
        assert!(level <= self.level);
        let shift = self.level - level;
        DyadicCube { level, index: self.index.iter().map(|i| i >> shift).collect() }
    }

    pub fn contains_cube(&self, other: &DyadicCube) -> bool {
        other.level >= self.level && other.ancestor(self.level) == *self
    }

    /// Closed-cube membership, exact.
    pub fn contains(&self, p: &Point) -> bool {
        let Some(c) = p.exact_coords() else {
            return self.contains_f64(&p.to_f64());
        };
        (0..self.dim()).all(|k| {
            let (lo, hi) = self.bounds(k);
            *c[k] >= lo && *c[k] <= hi
        })
    }

    fn contains_f64(&self, x: &[f64]) -> bool {
        let s = self.side_f64();
        (0..self.dim()).all(|k| {
            let lo = self.index[k] as f64 * s;
            x[k] >= lo && x[k] <= lo + s
        })
    }

    /// Whether two closed cubes share at least one point.
    pub fn touches(&self, other: &DyadicCube) -> bool {
        let (fine, coarse) = if self.level >= other.level { (self, other) } else { (other, self) };
        let shift = fine.level - coarse.level;
        (0..self.dim()).all(|k| {
            let lo = coarse.index[k] << shift;
            let hi = (coarse.index[k] + 1) << shift;
            fine.index[k] + 1 >= lo && fine.index[k] <= hi
        })
    }

    /// Smallest L-infinity distance from an interior point to the boundary.
    pub fn boundary_distance(&self, p: &Point) -> Scalar {
        match p.exact_coords() {
            Some(c) => Scalar::Exact(
                (0..self.dim())
                    .map(|k| {
                        let (lo, hi) = self.bounds(k);
                        let a = c[k] - lo;
                        let b = hi - c[k];
                        a.min(b)
                    })
                    .min()
                    .unwrap(),
            ),
            None => {
                let x = p.to_f64();
                let s = self.side_f64();
                Scalar::Float(
                    (0..self.dim())
                        .map(|k| {
                            let lo = self.index[k] as f64 * s;
                            (x[k] - lo).min(lo + s - x[k])
                        })
                        .fold(f64::INFINITY, f64::min),
                )
            }
        }
    }

    /// Exact squared Euclidean distance from a point to this closed cube.
    pub fn squared_distance_to(&self, p: &Point) -> BigRational {
        let c = p.exact_coords().expect("exact point");
        let mut acc = BigRational::zero();
        for (k, ck) in c.iter().enumerate() {
            let (lo, hi) = self.bounds(k);
            let d = if **ck < lo {
                lo - *ck
            } else if **ck > hi {
                *ck - hi
            } else {
                continue;
            };
            acc += &d * &d;
        }
        acc
    }
}

/// Checks `count` against `cap`.
pub fn check_cap(count: u128, cap: u128) -> Result<()> {
    if count > cap {
        Err(Error::CapExceeded { requested: count, cap })
    } else {
        Ok(())
    }
}

/// Number of cubes at level `n` in dimension `d`, saturating.
pub fn cube_count(n: u32, d: usize) -> u128 {
    let bits = n as u128 * d as u128;
    if bits >= 127 {
        u128::MAX
    } else {
        1u128 << bits
    }
}

/// All `2^{nd}` cubes of level `n`, in lexicographic index order.
pub fn cubes_at_level(n: u32, d: usize, cap: u128) -> Result<Vec<DyadicCube>> {
    if d == 0 {
        return Err(Error::Invalid("dimension must be at least 1".into()));
    }
    check_cap(cube_count(n, d), cap)?;
    let side = 1u64 << n;
    let total = cube_count(n, d) as usize;
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0u64; d];
    for _ in 0..total {
        out.push(DyadicCube { level: n, index: idx.clone() });
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < side {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(out)
}

/// Index ranges `[lo, hi]` of the level-n cubes whose closure contains `x`
/// along one axis.
fn axis_indices(x: &BigRational, n: u32) -> Result<(u64, u64)> {
    if x < &BigRational::zero() || x > &BigRational::from_integer(1.into()) {
        return Err(Error::Invalid(format!("coordinate {x} outside [0,1]")));
    }
    let scaled = x * BigRational::from_integer(BigInt::from(1) << n as usize);
    let fl = scaled.floor().to_integer();
    let side = 1u64 << n;
    let f = fl.to_u64().unwrap();
    if scaled.is_integer() {
        // face point: belongs to the cubes on both sides
        let lo = f.saturating_sub(1);
        let hi = f.min(side - 1);
        Ok((lo, hi))
    } else {
        Ok((f, f))
    }
}

/// All closed level-n cubes containing `p`.
pub fn cubes_containing(p: &Point, n: u32) -> Result<Vec<DyadicCube>> {
    let p = if p.backend() == Backend::Float { p.to_exact()? } else { p.clone() };
    let ranges = p
        .exact_coords()
        .unwrap()
        .into_iter()
        .map(|x| axis_indices(x, n))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![Vec::new()];
    for (lo, hi) in ranges {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u64>| {
                (lo..=hi).map(move |i| {
                    let mut v = prefix.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
    }
    Ok(out.into_iter().map(|index| DyadicCube { level: n, index }).collect())
}

/// Cube containing an interior point (or the lexicographically first of the
/// cubes sharing a face point).
pub fn cube_of_point(p: &Point, n: u32) -> Result<DyadicCube> {
    Ok(cubes_containing(p, n)?.into_iter().next().unwrap())
}

/// Every closed level-n cube meeting `E`.
pub fn cubes_meeting_set(e: &FinitePointSet, n: u32) -> Result<BTreeSet<DyadicCube>> {
    if e.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut out = BTreeSet::new();
    for p in e.points() {
        out.extend(cubes_containing(p, n)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub level: u32,
    pub count: u64,
    /// `log2(count) / level`; absent at level 0.
    pub slope: Option<f64>,
}

/// Box counts `N_n(E)` for `n = 0..=n_max`, counted from point incidences.
pub fn box_count_profile(e: &FinitePointSet, n_max: u32) -> Result<Vec<ProfileRow>> {
    (0..=n_max)
        .map(|n| {
            let count = cubes_meeting_set(e, n)?.len() as u64;
            let slope = (n > 0).then(|| (count as f64).log2() / n as f64);
            Ok(ProfileRow { level: n, count, slope })
        })
        .collect()
}

/// `{k / 2^n : 0 <= k <= 2^n}` as a one-dimensional exact set.
pub fn dyadic_grid_1d(n: u32) -> FinitePointSet {
    let den = BigInt::from(1) << n as usize;
    FinitePointSet::from_rationals((0..=(1u64 << n)).map(|k| BigRational::new(BigInt::from(k), den.clone())))
}

/// The `d`-dimensional grid `{k / 2^n}^d`.
pub fn dyadic_grid(n: u32, d: usize, cap: u128) -> Result<FinitePointSet> {
    let per_axis = (1u128 << n) + 1;
    check_cap(per_axis.checked_pow(d as u32).unwrap_or(u128::MAX), cap)?;
    let den = BigInt::from(1) << n as usize;
    let mut rows: Vec<Vec<BigRational>> = vec![Vec::new()];
    for _ in 0..d {
        rows = rows
            .into_iter()
            .flat_map(|r| {
                let den = den.clone();
                (0..per_axis as u64).map(move |k| {
                    let mut v = r.clone();
                    v.push(BigRational::new(BigInt::from(k), den.clone()));
                    v
                })
            })
            .collect();
    }
    FinitePointSet::new(d, rows.into_iter().map(Point::exact).collect())
}
