use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::certificate::AvoidanceCertificate;
use super::constraint::Constraint;
use super::margin::{compute_margin, MarginOptions};
use super::scan::{for_each_combination, scan, ScanOptions};
use crate::dyadic::{cubes_at_level, DyadicCube, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::point::{FinitePointSet, Point};
use crate::scalar::rat;

/// Binary digits of each coordinate below the cube's own resolution.
pub const RESOLUTION_BITS: u32 = 30;

#[derive(Debug, Clone)]
pub struct GenerateConfig {
    pub level: u32,
    pub dim: usize,
    pub constraint: Constraint,
    pub seed: u64,
    pub max_retries: u32,
    /// Acceptance threshold on new tuple gaps; `None` uses [`default_tau`].
    pub tau: Option<f64>,
    pub cap: u128,
    /// Workers for the final exhaustive exact scan.
    pub jobs: usize,
    pub margin: MarginOptions,
}

impl GenerateConfig {
    pub fn new(level: u32, dim: usize, constraint: Constraint, seed: u64) -> GenerateConfig {
        GenerateConfig {
            level,
            dim,
            constraint,
            seed,
            max_retries: 200,
            tau: None,
            cap: DEFAULT_ENUMERATION_CAP,
            jobs: 1,
            margin: MarginOptions::default(),
        }
    }
}

/// Default acceptance threshold: `1e-3 * 2^-n` for pattern and angle
/// constraints, `1e-3 * 2^{-n(d+1)}` for general position, whose gap (a
/// smallest singular value) shrinks with the number of hyperplanes.
pub fn default_tau(constraint: &Constraint, level: u32, dim: usize) -> f64 {
    match constraint {
        Constraint::GeneralPosition => 1e-3 * (-((level as f64) * (dim as f64 + 1.0))).exp2(),
        _ => 1e-3 * (-(level as f64)).exp2(),
    }
}

/// Uniform point of the concentric half-size sub-cube of `cube`, as integer
/// numerators over `2^(level + RESOLUTION_BITS)`.
fn sample_numerators(cube: &DyadicCube, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let b = RESOLUTION_BITS;
    cube.index
        .iter()
        .map(|&i| (i << b) + (1u64 << (b - 2)) + rng.gen_range(0..=(1u64 << (b - 1))))
        .collect()
}

/// Builds one point per level-n cube avoiding the constraint, by rejection
/// sampling each cube in lexicographic order, then certifies the margin and
/// re-checks every tuple exactly.
pub fn generate(cfg: &GenerateConfig) -> Result<AvoidanceCertificate> {
    if cfg.max_retries == 0 {
        return Err(Error::Invalid("max_retries must be at least 1".into()));
    }
    if cfg.level + RESOLUTION_BITS > 52 {
        return Err(Error::Invalid(format!("level {} too deep for generation", cfg.level)));
    }
    let cubes = cubes_at_level(cfg.level, cfg.dim, cfg.cap)?;
    let tau = cfg.tau.unwrap_or_else(|| default_tau(&cfg.constraint, cfg.level, cfg.dim));
    let k = cfg.constraint.arity(cfg.dim);
    let denom = (1u64 << (cfg.level + RESOLUTION_BITS)) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut nums: Vec<Vec<u64>> = Vec::with_capacity(cubes.len());
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(cubes.len());
    for cube in &cubes {
        let mut best_gap = f64::NEG_INFINITY;
        let mut accepted = None;
        for _ in 0..cfg.max_retries {
            let cand_nums = sample_numerators(cube, &mut rng);
            let cand: Vec<f64> = cand_nums.iter().map(|&v| v as f64 / denom).collect();
            let mut worst = f64::INFINITY;
            let mut refs: Vec<&[f64]> = Vec::with_capacity(k);
            for_each_combination(pts.len(), k - 1, |idx| {
                refs.clear();
                refs.extend(idx.iter().map(|&i| pts[i].as_slice()));
                refs.push(&cand);
                let g = cfg.constraint.gap(&refs);
                worst = worst.min(g);
                g > tau
            });
            best_gap = best_gap.max(worst);
            if worst > tau {
                accepted = Some((cand_nums, cand));
                break;
            }
        }
        let Some((n, p)) = accepted else {
            return Err(Error::RetriesExhausted { cube: cube.clone(), best_gap });
        };
        nums.push(n);
        pts.push(p);
    }

    let den = 1i64 << (cfg.level + RESOLUTION_BITS);
    let points = nums
        .iter()
        .map(|row| Point::exact(row.iter().map(|&v| rat(v as i64, den)).collect()))
        .collect();
    let gamma = FinitePointSet::new(cfg.dim, points)?;
    let margin = compute_margin(&gamma, cfg.level, &cfg.constraint, &cfg.margin)?;
    let report = scan(&gamma, &cfg.constraint, ScanOptions { tol: 0.0, jobs: cfg.jobs, min_gap: false })?;
    if let Some(v) = report.violation {
        return Err(Error::ConstraintViolated { tuple: v.tuple, gap: v.gap });
    }
    Ok(AvoidanceCertificate {
        level: cfg.level,
        dim: cfg.dim,
        seed: cfg.seed,
        constraint: cfg.constraint.clone(),
        tau,
        gamma,
        margin,
        tuples_checked: report.tuples,
    })
}
