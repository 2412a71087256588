//! Margin certificates: an explicit radius `eps` such that every ball
//! `B(x_Q, eps)` stays inside its cube (C1) and no admissible perturbation of
//! size `eps` creates a forbidden configuration (C2).
//!
//! Terms, all multiplied by [`MARGIN_SAFETY`] except the exact boundary one:
//! * boundary: `min_Q dist_inf(x_Q, dQ) * (1 - eta)`;
//! * pattern: `g_min * delta_min / 8` (signature Lipschitz bound with
//!   `L = 4 / delta_min`) and `delta_min * r / (2 + 2r)` (two points in one
//!   ball give a side ratio below the pattern's `r = r_min`);
//! * general position: `sigma_min / (2 sqrt d)` (Weyl bound for the difference
//!   matrix);
//! * angle: `min(g_min, 1/2) * delta_min / 8`.

use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::constraint::Constraint;
use super::scan::for_each_combination;
use crate::dyadic::cube_of_point;
use crate::error::{Error, Result};
use crate::geom::squared_distance_f64;
use crate::lattice::Lattice;
use crate::point::{FinitePointSet, Point};
use crate::scalar::{f64_to_rational, rat, rational_to_f64, Scalar};

/// Factor applied to the float-derived margin terms.
pub const MARGIN_SAFETY: f64 = 0.99;

#[derive(Debug, Clone, PartialEq)]
pub struct MarginOptions {
    /// Interiority factor `eta`: the boundary term is `(1 - eta)` times the
    /// smallest boundary distance.
    pub eta: BigRational,
}

impl Default for MarginOptions {
    fn default() -> Self {
        MarginOptions { eta: rat(1, 1024) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginTerm {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    pub epsilon: BigRational,
    pub boundary_term: BigRational,
    pub terms: Vec<MarginTerm>,
    /// Smallest pairwise distance in the configuration.
    pub min_pair_gap: f64,
    /// Smallest constraint gap over all tuples; `None` when no tuple exists.
    pub min_tuple_gap: Option<f64>,
    /// `eps < 2^{-n-8}`.
    pub tiny: bool,
}

impl MarginReport {
    pub fn epsilon_f64(&self) -> f64 {
        rational_to_f64(&self.epsilon)
    }
}

/// Computes the certified margin for a complete one-point-per-cube
/// configuration. Fails if the points are not in bijection with the level-n
/// cubes or if some tuple already has zero gap.
pub fn compute_margin(
    gamma: &FinitePointSet,
    level: u32,
    constraint: &Constraint,
    opts: &MarginOptions,
) -> Result<MarginReport> {
    let dim = gamma.dim();
    if gamma.is_empty() {
        return Err(Error::EmptySet);
    }
    // C1: exact L-infinity distance of each point to its cube's boundary
    let mut cubes = std::collections::BTreeSet::new();
    let mut min_boundary: Option<BigRational> = None;
    for p in gamma.points() {
        let q = cube_of_point(p, level)?;
        let bd = match q.boundary_distance(p) {
            Scalar::Exact(r) => r,
            Scalar::Float(x) => f64_to_rational(x)?,
        };
        if bd <= BigRational::from_integer(0.into()) {
            return Err(Error::Invalid(format!("point on the boundary of cube {q:?}")));
        }
        if !cubes.insert(q.clone()) {
            return Err(Error::Invalid(format!("two points in cube {q:?}")));
        }
        min_boundary = Some(match min_boundary {
            Some(m) if m <= bd => m,
            _ => bd,
        });
    }
    let boundary_term = min_boundary.unwrap() * (BigRational::one() - &opts.eta);

    let pts: Vec<Vec<f64>> = gamma.points().iter().map(Point::to_f64).collect();
    let n = pts.len();
    let mut min_pair = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            min_pair = min_pair.min(squared_distance_f64(&pts[i], &pts[j]).sqrt());
        }
    }

    let k = constraint.arity(dim);
    let mut g_min: Option<f64> = None;
    let mut zero_tuple: Option<Vec<usize>> = None;
    let mut refs: Vec<&[f64]> = Vec::with_capacity(k);
    for_each_combination(n, k, |idx| {
        refs.clear();
        refs.extend(idx.iter().map(|&i| pts[i].as_slice()));
        let g = constraint.gap(&refs);
        if g <= 0.0 {
            zero_tuple = Some(idx.to_vec());
            return false;
        }
        g_min = Some(g_min.map_or(g, |m: f64| m.min(g)));
        true
    });
    if let Some(tuple) = zero_tuple {
        return Err(Error::ConstraintViolated { tuple, gap: 0.0 });
    }

    let mut terms = Vec::new();
    if let Some(g) = g_min {
        match constraint {
            Constraint::Pattern(p) => {
                let r = p.r_min();
                terms.push(MarginTerm { name: "lipschitz".into(), value: g * min_pair / 8.0 });
                terms.push(MarginTerm { name: "same-ball".into(), value: min_pair * r / (2.0 + 2.0 * r) });
            }
            Constraint::GeneralPosition => {
                terms.push(MarginTerm { name: "spectral".into(), value: g / (2.0 * (dim as f64).sqrt()) });
            }
            Constraint::Angle(_) => {
                terms.push(MarginTerm { name: "angle".into(), value: g.min(0.5) * min_pair / 8.0 });
            }
        }
    }
    let mut epsilon = boundary_term.clone();
    for t in &terms {
        let v = f64_to_rational(t.value * MARGIN_SAFETY)?;
        if v < epsilon {
            epsilon = v;
        }
    }
    if epsilon <= BigRational::from_integer(0.into()) {
        return Err(Error::Postcondition("margin underflowed to zero".into()));
    }
    let tiny = rational_to_f64(&epsilon) < (-(level as f64) - 8.0).exp2();
    Ok(MarginReport {
        epsilon,
        boundary_term,
        terms,
        min_pair_gap: if n > 1 { min_pair } else { 0.0 },
        min_tuple_gap: g_min,
        tiny,
    })
}

/// Exact C1 check: every point's L-infinity distance to the boundary of its
/// cube strictly exceeds `eps`. Returns the index of the first failure.
pub fn check_c1(gamma: &FinitePointSet, level: u32, epsilon: &BigRational) -> Result<Option<usize>> {
    for (i, p) in gamma.points().iter().enumerate() {
        let q = cube_of_point(p, level)?;
        let ok = match q.boundary_distance(p) {
            Scalar::Exact(r) => r > *epsilon,
            Scalar::Float(x) => x > rational_to_f64(epsilon),
        };
        if !ok {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrialReport {
    pub trials: u64,
    pub cross_ball: u64,
    pub same_ball: u64,
    pub failures: Vec<String>,
}

fn random_in_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64, on_sphere: bool) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            let scale = if on_sphere { radius / norm } else { radius };
            // stay inside the closed ball despite rounding
            return v.into_iter().map(|x| x * scale * (1.0 - 1e-12)).collect();
        }
    }
}

/// Worst-case change of the constraint gap when each point of a tuple whose
/// smallest side is `delta` moves by at most `eps`.
pub fn gap_shift_bound(constraint: &Constraint, dim: usize, eps: f64, delta: f64) -> f64 {
    match constraint {
        Constraint::Pattern(_) => 4.0 * eps / (delta - 2.0 * eps),
        Constraint::GeneralPosition => 2.0 * eps * (dim as f64).sqrt(),
        Constraint::Angle(_) => 2.0 * (2.0 * eps / delta).min(1.0).asin(),
    }
}

fn exact_violation(constraint: &Constraint, dim: usize, tuple: &[Vec<f64>]) -> Result<bool> {
    let pts = tuple.iter().map(|c| Point::float(c.clone()).to_exact()).collect::<Result<Vec<_>>>()?;
    let set = FinitePointSet::new(dim, pts)?;
    if set.len() < tuple.len() {
        return Ok(true);
    }
    let lattice = Lattice::from_set(&set)?;
    let idx: Vec<usize> = (0..tuple.len()).collect();
    Ok(constraint.violated_exact(&lattice, tuple, &idx))
}

/// Samples perturbations of size at most `eps` and checks C2 on them: for
/// tuples from distinct balls the perturbed tuple must not violate the
/// constraint (exactly, on the rational values of the perturbed doubles),
/// its float gap must stay positive and within the predicted Lipschitz shift
/// of the unperturbed gap. Pattern constraints additionally get tuples with
/// two points in one ball, which must never be similar to the pattern.
pub fn perturbation_trials(
    gamma: &FinitePointSet,
    constraint: &Constraint,
    epsilon: &BigRational,
    trials: u64,
    seed: u64,
) -> Result<TrialReport> {
    let dim = gamma.dim();
    let pts: Vec<Vec<f64>> = gamma.points().iter().map(Point::to_f64).collect();
    let k = constraint.arity(dim);
    let eps = rational_to_f64(epsilon);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = TrialReport::default();
    if pts.len() < k && !(matches!(constraint, Constraint::Pattern(_)) && pts.len() >= 2) {
        return Ok(report);
    }
    let same_ball_allowed = matches!(constraint, Constraint::Pattern(_)) && pts.len() >= 2;
    let cross_allowed = pts.len() >= k;
    for t in 0..trials {
        report.trials += 1;
        let on_sphere = t % 2 == 0;
        let same_ball = same_ball_allowed && (!cross_allowed || t % 4 == 3);
        let (base, tuple): (Vec<Vec<f64>>, Vec<Vec<f64>>) = if same_ball {
            let a = rng.gen_range(0..pts.len());
            let mut c = rng.gen_range(0..pts.len() - 1);
            if c >= a {
                c += 1;
            }
            let base = vec![pts[a].clone(), pts[a].clone(), pts[c].clone()];
            let tuple = base
                .iter()
                .map(|p| {
                    let w = random_in_ball(&mut rng, dim, eps, on_sphere);
                    p.iter().zip(w).map(|(x, dx)| x + dx).collect()
                })
                .collect();
            (base, tuple)
        } else {
            let mut chosen: Vec<usize> = Vec::with_capacity(k);
            while chosen.len() < k {
                let i = rng.gen_range(0..pts.len());
                if !chosen.contains(&i) {
                    chosen.push(i);
                }
            }
            let base: Vec<Vec<f64>> = chosen.iter().map(|&i| pts[i].clone()).collect();
            let tuple = base
                .iter()
                .map(|p| {
                    let w = random_in_ball(&mut rng, dim, eps, on_sphere);
                    p.iter().zip(w).map(|(x, dx)| x + dx).collect()
                })
                .collect();
            (base, tuple)
        };
        let refs: Vec<&[f64]> = tuple.iter().map(Vec::as_slice).collect();
        let gap = constraint.gap(&refs);
        let exact = exact_violation(constraint, dim, &tuple)?;
        if same_ball {
            report.same_ball += 1;
            if exact || gap <= 0.0 {
                report.failures.push(format!("trial {t}: same-ball tuple similar to pattern (gap {gap:e})"));
            }
            continue;
        }
        report.cross_ball += 1;
        let base_refs: Vec<&[f64]> = base.iter().map(Vec::as_slice).collect();
        let base_gap = constraint.gap(&base_refs);
        let mut delta = f64::INFINITY;
        for i in 0..base.len() {
            for j in i + 1..base.len() {
                delta = delta.min(squared_distance_f64(&base[i], &base[j]).sqrt());
            }
        }
        let shift = gap_shift_bound(constraint, dim, eps, delta);
        if exact || gap <= 0.0 {
            report.failures.push(format!("trial {t}: perturbed tuple violates the constraint (gap {gap:e})"));
        } else if gap < base_gap - shift - 1e-12 {
            report.failures.push(format!(
                "trial {t}: gap {gap:e} fell below predicted floor {:e}",
                base_gap - shift
            ));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{cubes_at_level, DEFAULT_ENUMERATION_CAP};
    use crate::geom::Pattern;

    fn centers(n: u32, d: usize) -> FinitePointSet {
        let cubes = cubes_at_level(n, d, DEFAULT_ENUMERATION_CAP).unwrap();
        FinitePointSet::new(d, cubes.iter().map(|q| q.center()).collect()).unwrap()
    }

    #[test]
    fn centers_with_vacuous_constraint() {
        let n = 1;
        let g = centers(n, 1);
        let pat = Constraint::Pattern(Pattern::from_squared_sides([rat(1, 1), rat(4, 1), rat(9, 1)]).unwrap());
        let m = compute_margin(&g, n, &pat, &MarginOptions::default()).unwrap();
        // 2^{-n-1} (1 - 1/1024)
        assert_eq!(m.epsilon, rat(1, 4) * rat(1023, 1024));
        assert!(m.terms.is_empty());
        assert_eq!(check_c1(&g, n, &m.epsilon).unwrap(), None);
        assert_eq!(check_c1(&g, n, &rat(1, 4)).unwrap(), Some(0));
    }

    #[test]
    fn collinear_centers_rejected() {
        // cube centres of a 2x2 grid at level 2 contain collinear triples
        let g = centers(2, 2);
        let r = compute_margin(&g, 2, &Constraint::GeneralPosition, &MarginOptions::default());
        assert!(matches!(r, Err(Error::ConstraintViolated { .. })));
    }

    #[test]
    fn general_position_hand_svd() {
        // points (1/4,1/4), (3/4,1/4), (1/4,3/4) at level 1 in d = 2 plus a
        // fourth point in general position; the triple (0,1,2) has difference
        // matrix diag(1/2, 1/2), sigma_min = 1/2
        let g = FinitePointSet::new(2, vec![
            Point::ratios(&[(1, 4), (1, 4)]),
            Point::ratios(&[(1, 4), (3, 4)]),
            Point::ratios(&[(3, 4), (1, 4)]),
            Point::ratios(&[(5, 8), (11, 16)]),
        ])
        .unwrap();
        let m = compute_margin(&g, 1, &Constraint::GeneralPosition, &MarginOptions::default()).unwrap();
        let sigma = m.min_tuple_gap.unwrap();
        assert!(sigma <= 0.5);
        assert!(m.epsilon_f64() <= sigma / (2.0 * 2f64.sqrt()));
        let rep = perturbation_trials(&g, &Constraint::GeneralPosition, &m.epsilon, 2000, 3).unwrap();
        assert!(rep.failures.is_empty(), "{:?}", rep.failures);
    }
}
