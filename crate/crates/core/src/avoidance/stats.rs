//! Monte Carlo check that the set of third points completing a similar copy
//! of a pattern is Lebesgue-null.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::constraint::Constraint;
use crate::error::{Error, Result};
use crate::geom::Pattern;
use crate::lattice::Lattice;
use crate::point::{FinitePointSet, Point};

const SAMPLE_BITS: u32 = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionStats {
    pub samples: u64,
    /// Third points making `{a, b, x}` exactly similar to the pattern.
    pub exact_hits: u64,
    /// Third points whose similarity gap is below the threshold.
    pub near_hits: u64,
    pub near_fraction: f64,
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> Point {
    let den = BigInt::from(1u64 << SAMPLE_BITS);
    Point::exact(
        (0..dim)
            .map(|_| BigRational::new(BigInt::from(rng.gen_range(0..=(1u64 << SAMPLE_BITS))), den.clone()))
            .collect(),
    )
}

/// Fixes two random dyadic points `a != b` and samples `samples` uniform
/// third points `x` of the unit cube.
pub fn completion_statistics(
    dim: usize,
    pattern: &Pattern,
    samples: u64,
    near_threshold: f64,
    seed: u64,
) -> Result<CompletionStats> {
    if !pattern.is_exact() {
        return Err(Error::ExactRequired);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_point(&mut rng, dim);
    let b = loop {
        let b = random_point(&mut rng, dim);
        if b != a {
            break b;
        }
    };
    let constraint = Constraint::Pattern(pattern.clone());
    let mut exact_hits = 0;
    let mut near_hits = 0;
    for _ in 0..samples {
        let x = random_point(&mut rng, dim);
        if x == a || x == b {
            continue;
        }
        let set = FinitePointSet::new(dim, vec![a.clone(), b.clone(), x])?;
        let lattice = Lattice::from_set(&set)?;
        let f = lattice.to_f64_points();
        if constraint.violated_exact(&lattice, &f, &[0, 1, 2]) {
            exact_hits += 1;
        }
        let refs: Vec<&[f64]> = f.iter().map(Vec::as_slice).collect();
        if constraint.gap(&refs) < near_threshold {
            near_hits += 1;
        }
    }
    Ok(CompletionStats { samples, exact_hits, near_hits, near_fraction: near_hits as f64 / samples as f64 })
}
