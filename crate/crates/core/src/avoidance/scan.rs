//! Exhaustive tuple scans for constraint violations.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use super::constraint::Constraint;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::point::FinitePointSet;
use crate::scalar::Backend;

/// A tuple (indices into the scanned set) and its constraint gap.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub tuple: Vec<usize>,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub tuples: u64,
    pub violation: Option<Violation>,
    /// Smallest float gap over all tuples, when requested.
    pub min_gap: Option<Violation>,
}

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub tol: f64,
    /// Worker threads; `1` scans on the calling thread.
    pub jobs: usize,
    /// Also compute float gaps and the minimum-gap tuple.
    pub min_gap: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { tol: 0.0, jobs: 1, min_gap: false }
    }
}

/// `C(n, k)` saturating.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Visits all increasing `k`-tuples whose first entry is `first`, in
/// lexicographic order, until `f` returns `false`.
fn for_each_with_first(first: usize, n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    let mut idx: Vec<usize> = Vec::with_capacity(k);
    idx.push(first);
    if k == 1 {
        f(&idx);
        return;
    }
    for j in 1..k {
        idx.push(first + j);
    }
    if idx[k - 1] >= n {
        return;
    }
    loop {
        if !f(&idx) {
            return;
        }
        // advance the rightmost index that can move
        let mut pos = k - 1;
        loop {
            if idx[pos] < n - (k - pos) {
                idx[pos] += 1;
                for q in pos + 1..k {
                    idx[q] = idx[q - 1] + 1;
                }
                break;
            }
            pos -= 1;
            if pos == 0 {
                return;
            }
        }
    }
}

/// Visits every increasing `k`-tuple of `0..n` in lexicographic order until
/// `f` returns `false`.
pub(crate) fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k == 0 {
        f(&[]);
        return;
    }
    let mut go = true;
    for first in 0..n {
        for_each_with_first(first, n, k, |t| {
            go = f(t);
            go
        });
        if !go {
            return;
        }
    }
}

struct Partial {
    violation: Option<Violation>,
    min_gap: Option<Violation>,
    tuples: u64,
}

fn better(a: Option<Violation>, b: Option<Violation>) -> Option<Violation> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            if (y.gap, &y.tuple) < (x.gap, &x.tuple) {
                Some(y)
            } else {
                Some(x)
            }
        }
    }
}

/// Scans every `arity`-subset of `set`. For the exact backend each tuple is
/// tested with the exact predicate; a tuple is reported when it violates
/// exactly or (with `tol > 0`) its float gap is at most `tol`. Float sets are
/// judged by gap alone. The reported tuple is the smallest gap, ties broken
/// lexicographically, so results do not depend on `jobs`.
pub fn scan(set: &FinitePointSet, constraint: &Constraint, opts: ScanOptions) -> Result<ScanReport> {
    let n = set.len();
    let k = constraint.arity(set.dim());
    if n < k {
        return Ok(ScanReport { tuples: 0, violation: None, min_gap: None });
    }
    let lattice = match set.backend() {
        Backend::Exact => Some(Lattice::from_set(set)?),
        Backend::Float => None,
    };
    let pts: Vec<Vec<f64>> = match &lattice {
        Some(l) => l.to_f64_points(),
        None => set.points().iter().map(|p| p.to_f64()).collect(),
    };
    let need_gap = opts.min_gap || opts.tol > 0.0 || lattice.is_none();
    // first index of a known exact violation; later first indices are skipped
    let cutoff = AtomicUsize::new(usize::MAX);
    let exact_only = !need_gap;

    let work = |first: usize| -> Partial {
        let mut part = Partial { violation: None, min_gap: None, tuples: 0 };
        if exact_only && first > cutoff.load(Ordering::Relaxed) {
            return part;
        }
        let mut refs: Vec<&[f64]> = Vec::with_capacity(k);
        for_each_with_first(first, n, k, |idx| {
            part.tuples += 1;
            let exact_hit = lattice.as_ref().is_some_and(|l| constraint.violated_exact(l, &pts, idx));
            let gap = if need_gap {
                refs.clear();
                refs.extend(idx.iter().map(|&i| pts[i].as_slice()));
                if exact_hit {
                    0.0
                } else {
                    constraint.gap(&refs)
                }
            } else {
                0.0
            };
            if need_gap {
                let cand = Violation { tuple: idx.to_vec(), gap };
                if part.min_gap.as_ref().is_none_or(|m| gap < m.gap) {
                    part.min_gap = Some(cand.clone());
                }
                if (exact_hit || gap <= opts.tol) && part.violation.as_ref().is_none_or(|v| gap < v.gap) {
                    part.violation = Some(cand);
                }
                true
            } else if exact_hit {
                part.violation = Some(Violation { tuple: idx.to_vec(), gap: 0.0 });
                cutoff.fetch_min(first, Ordering::Relaxed);
                false
            } else {
                true
            }
        });
        part
    };

    let parts: Vec<Partial> = if opts.jobs <= 1 {
        (0..n).map(work).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
        pool.install(|| (0..n).into_par_iter().map(work).collect())
    };

    let mut report = ScanReport { tuples: 0, violation: None, min_gap: None };
    for p in parts {
        report.tuples += p.tuples;
        report.violation = better(report.violation, p.violation);
        report.min_gap = better(report.min_gap, p.min_gap);
    }
    if exact_only {
        // early exits make the count partial; report the full tuple count
        report.tuples = binomial(n as u64, k as u64);
    }
    Ok(report)
}

/// Exhaustive search for the minimum-gap tuple with gap at most `tol`.
pub fn find_violation(set: &FinitePointSet, constraint: &Constraint, tol: f64) -> Result<Option<Violation>> {
    Ok(scan(set, constraint, ScanOptions { tol, jobs: 1, min_gap: false })?.violation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avoidance::constraint::AngleSpec;
    use crate::geom::Pattern;
    use crate::point::Point;

    #[test]
    fn combination_walk_counts() {
        for (n, k) in [(6usize, 3usize), (7, 4), (5, 1), (4, 4)] {
            let mut total = 0;
            for first in 0..n {
                for_each_with_first(first, n, k, |t| {
                    assert!(t.windows(2).all(|w| w[0] < w[1]) && *t.last().unwrap() < n);
                    total += 1;
                    true
                });
            }
            assert_eq!(total, binomial(n as u64, k as u64));
        }
    }

    #[test]
    fn planted_equilateral_found() {
        let h = 3f64.sqrt() / 2.0;
        let s = FinitePointSet::new(
            2,
            vec![Point::float(vec![0.0, 0.0]), Point::float(vec![0.9, 0.1]), Point::float(vec![1.0, 0.0]), Point::float(vec![0.5, h])],
        )
        .unwrap();
        let v = find_violation(&s, &Constraint::Pattern(Pattern::equilateral()), 1e-9).unwrap().unwrap();
        assert_eq!(v.tuple, vec![0, 2, 3]);
    }

    #[test]
    fn collinear_found_exactly() {
        let s = FinitePointSet::new(
            2,
            vec![Point::ratios(&[(0, 1), (0, 1)]), Point::ratios(&[(1, 1), (1, 1)]), Point::ratios(&[(2, 1), (2, 1)])],
        )
        .unwrap();
        let v = find_violation(&s, &Constraint::GeneralPosition, 0.0).unwrap().unwrap();
        assert_eq!(v.tuple, vec![0, 1, 2]);
        assert_eq!(v.gap, 0.0);
    }

    #[test]
    fn right_angle_found_exactly() {
        let s = FinitePointSet::new(
            2,
            vec![Point::ratios(&[(1, 3), (1, 5)]), Point::ratios(&[(2, 3), (1, 5)]), Point::ratios(&[(1, 3), (4, 5)])],
        )
        .unwrap();
        let c = Constraint::Angle(AngleSpec::new(std::f64::consts::FRAC_PI_2).unwrap());
        assert!(find_violation(&s, &c, 0.0).unwrap().is_some());
        let c = Constraint::Angle(AngleSpec::new(1.0).unwrap());
        assert!(find_violation(&s, &c, 0.0).unwrap().is_none());
    }

    #[test]
    fn parallel_scan_matches_serial() {
        let pts: Vec<Point> = (0..12)
            .map(|i| Point::ratios(&[((i * 7) % 13, 13), ((i * i) % 11, 11)]))
            .collect();
        let s = FinitePointSet::new(2, pts).unwrap();
        let opts = ScanOptions { tol: 0.0, jobs: 1, min_gap: true };
        let a = scan(&s, &Constraint::GeneralPosition, opts).unwrap();
        let b = scan(&s, &Constraint::GeneralPosition, ScanOptions { jobs: 4, ..opts }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.tuples, 220);
    }
}
