//! Nowhere-dense set schemes and the constructive half of the hitting-set
//! theorem: for a finite `E` and a nowhere-dense `A`, build `F` within
//! `2^-n sqrt(d)` of `E` whose `eps'`-neighbourhood misses `A`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::dyadic::{cube_count, cubes_at_level, cubes_containing, cubes_meeting_set, DyadicCube};
use crate::error::{Error, Result};
use crate::geom::{hausdorff_distance, squared_distance};
use crate::point::{FinitePointSet, Point, PointSetDoc};
use crate::scalar::{Backend, Scalar};

/// How far below a cube the witness search may descend for finite sets.
pub const FINITE_DESCENT_LIMIT: u32 = 64;

/// A selection of level-`depth` closed dyadic cubes whose union contains `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicSelection {
    dim: usize,
    depth: u32,
    selected: BTreeSet<DyadicCube>,
    // number of selected descendants of every occupied cube
    counts: BTreeMap<DyadicCube, u128>,
}

impl DyadicSelection {
    pub fn new(dim: usize, depth: u32, selected: impl IntoIterator<Item = Vec<u64>>) -> Result<DyadicSelection> {
        if dim == 0 {
            return Err(Error::MalformedScheme("dimension must be at least 1".into()));
        }
        let mut set = BTreeSet::new();
        for index in selected {
            if index.len() != dim {
                return Err(Error::MalformedScheme(format!("index {index:?} has wrong dimension")));
            }
            let q = DyadicCube::new(depth, index).map_err(|e| Error::MalformedScheme(e.to_string()))?;
            set.insert(q);
        }
        let mut counts = BTreeMap::new();
        for q in &set {
            for l in 0..=depth {
                *counts.entry(q.ancestor(l)).or_insert(0) += 1;
            }
        }
        Ok(DyadicSelection { dim, depth, selected: set, counts })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn selected(&self) -> &BTreeSet<DyadicCube> {
        &self.selected
    }

    /// The cube contains at least one selected cube (or lies inside one).
    pub fn occupied(&self, q: &DyadicCube) -> bool {
        if q.level >= self.depth {
            self.selected.contains(&q.ancestor(self.depth))
        } else {
            self.counts.contains_key(q)
        }
    }

    /// Every level-`depth` descendant of the cube is selected.
    pub fn full(&self, q: &DyadicCube) -> bool {
        if q.level >= self.depth {
            return self.occupied(q);
        }
        let need = cube_count(self.depth - q.level, self.dim);
        self.counts.get(q).is_some_and(|&c| c == need)
    }

    /// First level-`(depth-1)` cube with every child selected. Any full cube
    /// higher up contains one of these.
    pub fn pruning_violation(&self) -> Option<DyadicCube> {
        if self.depth == 0 {
            return self.selected.first().cloned();
        }
        self.counts.keys().find(|q| q.level == self.depth - 1 && self.full(q)).cloned()
    }

    pub fn contains_point(&self, p: &Point) -> Result<bool> {
        if !p.in_unit_cube() {
            return Ok(false);
        }
        Ok(cubes_containing(p, self.depth)?.iter().any(|q| self.selected.contains(q)))
    }

    /// Some selected closed cube meets the closed cube `q`.
    pub fn touches(&self, q: &DyadicCube) -> bool {
        self.selected.iter().any(|s| s.touches(q))
    }

    /// Exact squared distance from `p` to the union of the selected cubes.
    /// Cubes are screened in `f64` first; only those within a slack of the
    /// float minimum are evaluated exactly.
    pub fn squared_distance_to(&self, p: &Point) -> Option<BigRational> {
        let x = p.to_f64();
        let approx: Vec<f64> = self
            .selected
            .iter()
            .map(|q| {
                let s = q.side_f64();
                (0..self.dim)
                    .map(|k| {
                        let lo = q.index[k] as f64 * s;
                        let t = (lo - x[k]).max(x[k] - lo - s).max(0.0);
                        t * t
                    })
                    .sum()
            })
            .collect();
        let best = approx.iter().copied().fold(f64::INFINITY, f64::min);
        let slack = best * 1e-6 + 1e-12;
        self.selected
            .iter()
            .zip(&approx)
            .filter(|(_, &a)| a <= best + slack)
            .map(|(q, _)| q.squared_distance_to(p))
            .min()
    }

    /// Middle-half Cantor scheme in `[0,1]`: each stage keeps the first and
    /// last quarter of every kept interval, so depth is `2 * stages`.
    pub fn cantor_middle_half(stages: u32) -> DyadicSelection {
        let mut kept = vec![0u64];
        for _ in 0..stages {
            kept = kept.into_iter().flat_map(|i| [4 * i, 4 * i + 3]).collect();
        }
        DyadicSelection::new(1, 2 * stages, kept.into_iter().map(|i| vec![i])).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NowhereDenseScheme {
    Finite(FinitePointSet),
    Dyadic(DyadicSelection),
}

impl NowhereDenseScheme {
    pub fn dim(&self) -> usize {
        match self {
            NowhereDenseScheme::Finite(s) => s.dim(),
            NowhereDenseScheme::Dyadic(d) => d.dim,
        }
    }

    fn check(&self) -> Result<()> {
        if let NowhereDenseScheme::Finite(s) = self {
            if s.backend() != Backend::Exact {
                return Err(Error::MalformedScheme("finite schemes need exact coordinates".into()));
            }
        }
        Ok(())
    }

    /// The closed cube meets `A`.
    pub fn meets_cube(&self, q: &DyadicCube) -> bool {
        match self {
            NowhereDenseScheme::Finite(s) => s.points().iter().any(|p| q.contains(p)),
            NowhereDenseScheme::Dyadic(d) => d.touches(q),
        }
    }

    /// No point of `A` in the closed sub-cube (finite), or no selected cube
    /// inside it (dyadic; selected cubes outside can only share its faces).
    fn free(&self, q: &DyadicCube) -> bool {
        match self {
            NowhereDenseScheme::Finite(_) => !self.meets_cube(q),
            NowhereDenseScheme::Dyadic(d) => !d.occupied(q),
        }
    }

    fn descent_limit(&self, q: &DyadicCube) -> u32 {
        match self {
            NowhereDenseScheme::Finite(_) => q.level + FINITE_DESCENT_LIMIT,
            NowhereDenseScheme::Dyadic(d) => d.depth,
        }
    }

    /// Shallowest-first search below `q` for a free sub-cube.
    pub fn witness_below(&self, q: &DyadicCube) -> Option<DyadicCube> {
        if self.free(q) {
            return Some(q.clone());
        }
        let limit = self.descent_limit(q);
        let mut frontier = vec![q.clone()];
        while let Some(level) = frontier.first().map(|c| c.level) {
            if level >= limit {
                return None;
            }
            let mut next = Vec::new();
            for c in &frontier {
                for child in c.children() {
                    if self.free(&child) {
                        return Some(child);
                    }
                    if let NowhereDenseScheme::Dyadic(d) = self {
                        if d.full(&child) {
                            continue;
                        }
                    }
                    next.push(child);
                }
            }
            // finite sets occupy at most 2^d children per point per level
            frontier = next;
        }
        None
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SchemeDoc::from(self)).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<NowhereDenseScheme> {
        let doc: SchemeDoc =
            serde_json::from_str(text).map_err(|e| Error::MalformedScheme(format!("scheme JSON: {e}")))?;
        doc.try_into()
    }
}

/// Wire form of a scheme.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SchemeDoc {
    Finite { dim: usize, points: Vec<Vec<serde_json::Value>> },
    Dyadic { dim: usize, depth: u32, selected: Vec<Vec<u64>> },
}

impl From<&NowhereDenseScheme> for SchemeDoc {
    fn from(s: &NowhereDenseScheme) -> Self {
        match s {
            NowhereDenseScheme::Finite(set) => SchemeDoc::Finite { dim: set.dim(), points: set.to_doc().points },
            NowhereDenseScheme::Dyadic(d) => SchemeDoc::Dyadic {
                dim: d.dim,
                depth: d.depth,
                selected: d.selected.iter().map(|q| q.index.clone()).collect(),
            },
        }
    }
}

impl TryFrom<SchemeDoc> for NowhereDenseScheme {
    type Error = Error;

    fn try_from(doc: SchemeDoc) -> Result<Self> {
        match doc {
            SchemeDoc::Finite { dim, points } => {
                let set = PointSetDoc { dim, backend: Backend::Exact, points }.into_set()?;
                Ok(NowhereDenseScheme::Finite(set))
            }
            SchemeDoc::Dyadic { dim, depth, selected } => {
                Ok(NowhereDenseScheme::Dyadic(DyadicSelection::new(dim, depth, selected)?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NowhereDenseVerdict {
    pub nowhere_dense: bool,
    /// `(level-n cube, free sub-cube inside it)`.
    pub witnesses: Vec<(DyadicCube, DyadicCube)>,
    /// A level-n cube entirely covered by the scheme.
    pub counter_witness: Option<DyadicCube>,
    /// For dyadic schemes: a cube all of whose children are occupied.
    pub pruning_violation: Option<DyadicCube>,
}

/// Whether every level-n cube contains a free sub-cube (at most at the
/// scheme's depth for dyadic selections).
pub fn is_nowhere_dense_at_resolution(a: &NowhereDenseScheme, n: u32, cap: u128) -> Result<NowhereDenseVerdict> {
    a.check()?;
    let pruning_violation = match a {
        NowhereDenseScheme::Dyadic(d) => {
            if n > d.depth {
                return Err(Error::MalformedScheme(format!("resolution {n} deeper than scheme depth {}", d.depth)));
            }
            d.pruning_violation()
        }
        NowhereDenseScheme::Finite(_) => None,
    };
    let mut witnesses = Vec::new();
    for q in cubes_at_level(n, a.dim(), cap)? {
        match a.witness_below(&q) {
            Some(w) => witnesses.push((q, w)),
            None => {
                return Ok(NowhereDenseVerdict {
                    nowhere_dense: false,
                    witnesses,
                    counter_witness: Some(q),
                    pruning_violation,
                })
            }
        }
    }
    Ok(NowhereDenseVerdict { nowhere_dense: true, witnesses, counter_witness: None, pruning_violation })
}

/// Exact test whether `E` meets `A`.
pub fn hits(e: &FinitePointSet, a: &NowhereDenseScheme) -> Result<bool> {
    if e.dim() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: e.dim() });
    }
    a.check()?;
    match a {
        NowhereDenseScheme::Finite(s) => {
            let theirs: BTreeSet<Vec<BigRational>> =
                s.points().iter().map(|p| p.exact_coords().unwrap().into_iter().cloned().collect()).collect();
            Ok(e.points().iter().any(|p| match p.exact_coords() {
                Some(c) => theirs.contains(&c.into_iter().cloned().collect::<Vec<_>>()),
                None => false,
            }))
        }
        NowhereDenseScheme::Dyadic(d) => {
            for p in e.points() {
                let p = if p.backend() == Backend::Float { p.to_exact()? } else { p.clone() };
                if d.contains_point(&p)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// The cube misses `A`; its centre was used with radius `2^{-n-1}`.
    Center,
    /// Centre of a free sub-cube, with clearance radius a quarter of its side.
    Witness { subcube: DyadicCube, radius: BigRational },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AvoidanceResult {
    pub f: FinitePointSet,
    pub epsilon: BigRational,
    pub provenance: Vec<(DyadicCube, Provenance)>,
    /// Exact squared `d_H(E, F)`.
    pub hausdorff_squared: BigRational,
    /// Exact squared distance from `F` to `A` (`None` when `A` is empty).
    pub clearance_squared: Option<BigRational>,
}

/// Exact squared distance from a point set to `A`.
pub fn squared_distance_to_scheme(f: &FinitePointSet, a: &NowhereDenseScheme) -> Result<Option<BigRational>> {
    let mut best: Option<BigRational> = None;
    for p in f.points() {
        let d = match a {
            NowhereDenseScheme::Finite(s) => s
                .points()
                .iter()
                .map(|q| squared_distance(p, q).map(|v| v.as_exact().cloned()))
                .collect::<Result<Option<Vec<_>>>>()?
                .ok_or(Error::ExactRequired)?
                .into_iter()
                .min(),
            NowhereDenseScheme::Dyadic(d) => d.squared_distance_to(p),
        };
        if let Some(d) = d {
            if best.as_ref().is_none_or(|b| d < *b) {
                best = Some(d);
            }
        }
    }
    Ok(best)
}

/// For each level-n cube meeting `E`: its centre if the cube misses `A`,
/// otherwise the centre of a free sub-cube. Both posted inequalities,
/// `d_H(E, F) <= 2^-n sqrt(d)` and `dist(F, A) >= eps'`, are re-checked
/// exactly before returning.
pub fn avoid_construct(e: &FinitePointSet, a: &NowhereDenseScheme, n: u32) -> Result<AvoidanceResult> {
    if e.is_empty() {
        return Err(Error::EmptySet);
    }
    if e.dim() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: e.dim() });
    }
    if e.backend() != Backend::Exact {
        return Err(Error::ExactRequired);
    }
    a.check()?;
    let dim = e.dim();
    let center_radius = BigRational::new(BigInt::from(1), BigInt::from(1) << (n as usize + 1));
    let mut points = Vec::new();
    let mut provenance = Vec::new();
    let mut epsilon: Option<BigRational> = None;
    for q in cubes_meeting_set(e, n)? {
        let (p, prov, r) = if !a.meets_cube(&q) {
            (q.center(), Provenance::Center, center_radius.clone())
        } else {
            let w = a.witness_below(&q).ok_or_else(|| Error::WitnessExhausted(q.clone()))?;
            let radius = w.side() / BigInt::from(4);
            (w.center(), Provenance::Witness { subcube: w, radius: radius.clone() }, radius)
        };
        if epsilon.as_ref().is_none_or(|m| r < *m) {
            epsilon = Some(r);
        }
        points.push(p);
        provenance.push((q, prov));
    }
    let epsilon = epsilon.unwrap();
    let f = FinitePointSet::new(dim, points)?;

    let h = hausdorff_distance(e, &f)?;
    let Scalar::Exact(hausdorff_squared) = h.squared else { unreachable!("exact sets") };
    let bound = BigRational::new(BigInt::from(dim), BigInt::from(1) << (2 * n as usize));
    if hausdorff_squared > bound {
        return Err(Error::Postcondition(format!("d_H(E,F)^2 = {hausdorff_squared} exceeds {bound}")));
    }
    let clearance_squared = squared_distance_to_scheme(&f, a)?;
    if let Some(c) = &clearance_squared {
        if *c < &epsilon * &epsilon {
            return Err(Error::Postcondition(format!("dist(F,A)^2 = {c} below eps'^2")));
        }
    }
    if hits(&f, a)? {
        return Err(Error::Postcondition("F meets A".into()));
    }
    Ok(AvoidanceResult { f, epsilon, provenance, hausdorff_squared, clearance_squared })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DEFAULT_ENUMERATION_CAP;
    use crate::scalar::rat;

    fn finite(vals: &[(i64, i64)]) -> NowhereDenseScheme {
        NowhereDenseScheme::Finite(FinitePointSet::from_rationals(vals.iter().map(|&(n, d)| rat(n, d))))
    }

    #[test]
    fn finite_sets_are_nowhere_dense() {
        let a = finite(&[(1, 2), (1, 4)]);
        let v = is_nowhere_dense_at_resolution(&a, 3, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(v.nowhere_dense);
        assert_eq!(v.witnesses.len(), 8);
        for (q, w) in &v.witnesses {
            assert!(q.contains_cube(w) && !a.meets_cube(w));
        }
    }

    #[test]
    fn full_selection_is_not_nowhere_dense() {
        let sel = DyadicSelection::new(1, 2, (0..4).map(|i| vec![i])).unwrap();
        assert!(sel.pruning_violation().is_some());
        let v = is_nowhere_dense_at_resolution(&NowhereDenseScheme::Dyadic(sel), 1, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(!v.nowhere_dense);
        assert_eq!(v.counter_witness, Some(DyadicCube::new(1, vec![0]).unwrap()));
    }

    #[test]
    fn cantor_scheme_witnesses() {
        let sel = DyadicSelection::cantor_middle_half(3);
        assert_eq!(sel.depth(), 6);
        assert_eq!(sel.selected().len(), 8);
        assert_eq!(sel.pruning_violation(), None);
        let a = NowhereDenseScheme::Dyadic(sel);
        // both halves of [0,1] are occupied; the first free quarter is [1/4,1/2]
        let v = is_nowhere_dense_at_resolution(&a, 0, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(v.witnesses[0].1, DyadicCube::new(2, vec![1]).unwrap());
        for n in 1..6 {
            let v = is_nowhere_dense_at_resolution(&a, n, DEFAULT_ENUMERATION_CAP).unwrap();
            assert!(v.nowhere_dense, "level {n}");
        }
        let v = is_nowhere_dense_at_resolution(&a, 6, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(!v.nowhere_dense);
    }

    #[test]
    fn hits_examples() {
        let e = FinitePointSet::from_rationals([rat(1, 2)]);
        assert!(hits(&e, &finite(&[(1, 2)])).unwrap());
        assert!(!hits(&e, &finite(&[(1, 3)])).unwrap());
        let cantor = NowhereDenseScheme::Dyadic(DyadicSelection::cantor_middle_half(2));
        // kept level-4 intervals are 0, 3, 12, 15; 1/3 lies in interval 5
        assert!(!hits(&FinitePointSet::from_rationals([rat(1, 3)]), &cantor).unwrap());
        assert!(hits(&FinitePointSet::from_rationals([rat(1, 16)]), &cantor).unwrap());
    }

    #[test]
    fn avoid_singleton_on_face() {
        let e = FinitePointSet::from_rationals([rat(1, 2)]);
        let r = avoid_construct(&e, &finite(&[(1, 2)]), 2).unwrap();
        assert_eq!(r.f.len(), 2);
        assert!(r.hausdorff_squared <= rat(1, 16));
        assert!(r.clearance_squared.unwrap() >= &r.epsilon * &r.epsilon);
        assert!(r.provenance.iter().all(|(_, p)| matches!(p, Provenance::Witness { .. })));
    }

    #[test]
    fn avoid_far_set_uses_centers() {
        let e = FinitePointSet::from_rationals([rat(1, 8), rat(1, 5)]);
        let r = avoid_construct(&e, &finite(&[(7, 8)]), 2).unwrap();
        assert!(r.provenance.iter().all(|(_, p)| *p == Provenance::Center));
        assert_eq!(r.epsilon, rat(1, 8));
        assert_eq!(r.f.exact_values_1d().unwrap(), vec![rat(1, 8)]);
    }

    #[test]
    fn coarse_dyadic_scheme_exhausts() {
        let sel = DyadicSelection::new(1, 1, [vec![0]]).unwrap();
        let e = FinitePointSet::from_rationals([rat(1, 8)]);
        let r = avoid_construct(&e, &NowhereDenseScheme::Dyadic(sel), 2);
        assert!(matches!(r, Err(Error::WitnessExhausted(_))));
    }

    #[test]
    fn scheme_json_round_trip() {
        for s in [finite(&[(1, 3), (2, 5)]), NowhereDenseScheme::Dyadic(DyadicSelection::cantor_middle_half(2))] {
            assert_eq!(NowhereDenseScheme::from_json(&s.to_json()).unwrap(), s);
        }
        assert!(NowhereDenseScheme::from_json(r#"{"kind":"dyadic","dim":1,"depth":1,"selected":[[2]]}"#).is_err());
    }

    #[test]
    fn pruning_in_two_dims() {
        let sel = DyadicSelection::new(2, 1, [vec![0, 0], vec![1, 1]]).unwrap();
        assert_eq!(sel.pruning_violation(), None);
        assert!(sel.full(&DyadicCube::new(1, vec![0, 0]).unwrap()));
        assert!(!sel.full(&DyadicCube::root(2)));
        let _ = Point::ratios(&[(1, 2), (1, 2)]);
    }
}
