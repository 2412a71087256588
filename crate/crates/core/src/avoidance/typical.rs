//! Finite-stage approximants of a typical compact set: a random subset of a
//! dyadic skeleton, refined stage by stage within the radius schedule
//! `eps_n = 2^{-n^2}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::{check_cap, dyadic_grid};
use crate::error::{Error, Result};
use crate::geom::hausdorff_distance;
use crate::point::{FinitePointSet, Point};
use crate::scalar::Scalar;

const OFFSET_BITS: u32 = 8;

/// `2^{-n^2}`.
pub fn stage_radius(n: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << (n as usize * n as usize))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypicalSample {
    pub levels: Vec<u32>,
    pub stages: Vec<FinitePointSet>,
    /// `eps_{n_k}` bounding `d_H(F_k, F_{k+1})`.
    pub bounds: Vec<BigRational>,
    /// Exact squared `d_H(F_k, F_{k+1})`.
    pub measured: Vec<BigRational>,
}

/// Samples `F_1, ..., F_K` for strictly increasing `levels`. `F_1` is a
/// random nonempty subset of the level-`n_1` grid; each later stage replaces
/// every point by one to three points within `eps_{n_k}` of it.
pub fn sample_typical(dim: usize, levels: &[u32], seed: u64, cap: u128) -> Result<TypicalSample> {
    if levels.is_empty() {
        return Err(Error::Invalid("at least one level required".into()));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) || levels[0] == 0 {
        return Err(Error::Invalid("levels must be positive and strictly increasing".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = dyadic_grid(levels[0], dim, cap)?;
    let mut chosen: Vec<Point> = grid.points().iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    if chosen.is_empty() {
        chosen.push(grid.points()[rng.gen_range(0..grid.len())].clone());
    }
    let mut stages = vec![FinitePointSet::new(dim, chosen)?];
    let mut bounds = Vec::new();
    let mut measured = Vec::new();
    // per-coordinate offsets up to eps / 2^ceil(log2 d) keep |u| <= eps
    let dim_shift = (dim as u64).next_power_of_two().trailing_zeros() as usize;
    for w in levels.windows(2) {
        let n = w[0];
        let eps = stage_radius(n);
        let prev = stages.last().unwrap();
        check_cap(prev.len() as u128 * 3, cap)?;
        let den = BigInt::one() << (n as usize * n as usize + dim_shift + OFFSET_BITS as usize);
        let mut next = Vec::with_capacity(prev.len() * 2);
        for p in prev.points() {
            let keep = rng.gen_bool(0.5);
            if keep {
                next.push(p.clone());
            }
            let extra = if keep { rng.gen_range(0..=2) } else { rng.gen_range(1..=2) };
            for _ in 0..extra {
                let coords = p
                    .exact_coords()
                    .unwrap()
                    .into_iter()
                    .map(|x| {
                        let m = BigRational::new(BigInt::from(rng.gen_range(0..=(1u64 << OFFSET_BITS))), den.clone());
                        let up = x + &m;
                        if up <= BigRational::one() && rng.gen_bool(0.5) || x - &m < BigRational::zero() {
                            up
                        } else {
                            x - &m
                        }
                    })
                    .collect();
                next.push(Point::exact(coords));
            }
        }
        let next = FinitePointSet::new(dim, next)?;
        let h = hausdorff_distance(prev, &next)?;
        let Scalar::Exact(sq) = h.squared else { unreachable!("exact stages") };
        if sq > &eps * &eps {
            return Err(Error::Postcondition(format!("stage distance exceeds 2^-{}", n * n)));
        }
        measured.push(sq);
        bounds.push(eps);
        stages.push(next);
    }
    Ok(TypicalSample { levels: levels.to_vec(), stages, bounds, measured })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DEFAULT_ENUMERATION_CAP;
    use crate::scalar::rat;

    #[test]
    fn single_level_is_nonempty_grid_subset() {
        let s = sample_typical(2, &[2], 5, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(s.stages.len(), 1);
        assert!(s.bounds.is_empty());
        assert!(!s.stages[0].is_empty() && s.stages[0].len() <= 25);
    }

    #[test]
    fn two_levels_respect_bound() {
        let s = sample_typical(1, &[1, 2], 11, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(s.bounds, vec![rat(1, 2)]);
        assert!(s.measured[0] <= rat(1, 4));
        assert!(s.stages[1].in_unit_cube());
    }

    #[test]
    fn radius_schedule_ratio() {
        for n in 1..8u32 {
            let ratio = stage_radius(n + 1) / stage_radius(n);
            assert_eq!(ratio, BigRational::new(BigInt::one(), BigInt::one() << (2 * n + 1) as usize));
        }
    }

    #[test]
    fn rejects_bad_levels() {
        assert!(sample_typical(1, &[], 0, DEFAULT_ENUMERATION_CAP).is_err());
        assert!(sample_typical(1, &[2, 2], 0, DEFAULT_ENUMERATION_CAP).is_err());
    }
}
