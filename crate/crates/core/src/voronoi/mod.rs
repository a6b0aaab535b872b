//! Voronoi-type cells of lattice hitting sets.
//!
//! For `x` in `A` and a `Z^d` action, the hitting set is
//! `W_x = {w : T_w(x) in A}`. Its closed cell is
//! `{v : |v| <= |w + v| for all w in W_x}` and its strict cell uses `<` for
//! `w != 0`. Norm-ordered greedy allocation cells sit between the two.
//! Everything here is exact integer arithmetic.

mod geometry;
mod svg;

use std::collections::BTreeSet;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::group::{norm_squared, Coords, GroupError};
use crate::system::{Action, Region};

pub(crate) use geometry::dot;
pub use svg::render_svg;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VoronoiError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("hitting set must contain the zero vector")]
    MissingZero,
    #[error("vector {vector:?} has dimension {found}, expected {expected}")]
    Dimension {
        vector: Vec<i64>,
        expected: usize,
        found: usize,
    },
    #[error("{0}")]
    Unsupported(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("base point is not in the target set")]
    NotInTarget,
}

/// A finite set of lattice vectors containing `0`.
///
/// A set produced by [`hitting_set`] is the truncation of `W_x` to a ball;
/// one built with [`HittingSet::explicit`] is taken as the whole of `W_x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HittingSet {
    dim: usize,
    radius_sq: Option<i64>,
    vectors: BTreeSet<Coords>,
}

impl HittingSet {
    pub fn explicit(
        dim: usize,
        vectors: impl IntoIterator<Item = Vec<i64>>,
    ) -> Result<Self, VoronoiError> {
        let mut set = BTreeSet::new();
        for v in vectors {
            if v.len() != dim {
                return Err(VoronoiError::Dimension {
                    expected: dim,
                    found: v.len(),
                    vector: v,
                });
            }
            set.insert(Coords::from_vec(v));
        }
        if !set.contains(&Coords::from_elem(0, dim)) {
            return Err(VoronoiError::MissingZero);
        }
        Ok(HittingSet {
            dim,
            radius_sq: None,
            vectors: set,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Squared truncation radius, `None` for an explicit set.
    pub fn radius_sq(&self) -> Option<i64> {
        self.radius_sq
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.vectors.contains(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Coords> {
        self.vectors.iter()
    }

    fn nonzero(&self) -> Vec<Coords> {
        self.vectors
            .iter()
            .filter(|w| w.iter().any(|&c| c != 0))
            .cloned()
            .collect()
    }

    /// Whether every `w` with `|w| <= 2 * sqrt(rho_sq)` has been collected.
    fn covers(&self, rho_sq: i64) -> bool {
        self.radius_sq.is_none_or(|r| r >= 4 * rho_sq)
    }
}

impl Serialize for HittingSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.vectors.iter().map(|v| v.as_slice()))
    }
}

/// `{w : |w|^2 <= radius^2, T_w(x) in A}` for an action of `Z^d`.
pub fn hitting_set<S: Action>(
    system: &S,
    target: &S::Set,
    x: &S::Point,
    radius: i64,
) -> Result<HittingSet, VoronoiError> {
    hitting_set_sq(system, target, x, radius.saturating_mul(radius))
}

pub(crate) fn hitting_set_sq<S: Action>(
    system: &S,
    target: &S::Set,
    x: &S::Point,
    radius_sq: i64,
) -> Result<HittingSet, VoronoiError> {
    let group = system.group();
    if !group.is_lattice() {
        return Err(VoronoiError::Unsupported(format!(
            "hitting sets need Z^d, got {group}"
        )));
    }
    if !target.contains(x) {
        return Err(VoronoiError::NotInTarget);
    }
    let dim = group.rank();
    let mut vectors = BTreeSet::new();
    for w in crate::group::ball_points(dim, radius_sq) {
        let g = group.element(&w)?;
        if target.contains(&system.act(&g, x)) {
            vectors.insert(w);
        }
    }
    Ok(HittingSet {
        dim,
        radius_sq: Some(radius_sq),
        vectors,
    })
}

/// A finite set of lattice points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeCell {
    dim: usize,
    points: BTreeSet<Coords>,
}

impl LatticeCell {
    pub fn new(
        dim: usize,
        points: impl IntoIterator<Item = Vec<i64>>,
    ) -> Result<Self, VoronoiError> {
        let mut set = BTreeSet::new();
        for v in points {
            if v.len() != dim {
                return Err(VoronoiError::Dimension {
                    expected: dim,
                    found: v.len(),
                    vector: v,
                });
            }
            set.insert(Coords::from_vec(v));
        }
        Ok(LatticeCell { dim, points: set })
    }

    pub(crate) fn from_set(dim: usize, points: BTreeSet<Coords>) -> Self {
        LatticeCell { dim, points }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.points.contains(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Coords> {
        self.points.iter()
    }

    pub fn is_subset(&self, other: &LatticeCell) -> bool {
        self.points.is_subset(&other.points)
    }

    pub fn max_norm_sq(&self) -> i64 {
        self.points
            .iter()
            .map(|p| norm_squared(p))
            .max()
            .unwrap_or(0)
    }

    /// Componentwise bounding box, `None` when empty.
    pub fn bounds(&self) -> Option<(Coords, Coords)> {
        let first = self.points.iter().next()?;
        let (mut lo, mut hi) = (first.clone(), first.clone());
        for p in &self.points {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Some((lo, hi))
    }
}

impl Serialize for LatticeCell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.points.iter().map(|v| v.as_slice()))
    }
}

/// Closed and strict cells of a hitting set.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "extent", rename_all = "snake_case")]
pub enum VoronoiCells {
    Bounded {
        closed: LatticeCell,
        strict: LatticeCell,
    },
    /// The closed region contains the rays `v + t r` for each listed `r`.
    Unbounded { recession: Vec<Vec<i64>> },
}

impl VoronoiCells {
    pub fn is_bounded(&self) -> bool {
        matches!(self, VoronoiCells::Bounded { .. })
    }
}

fn check_dim(dim: usize) -> Result<(), VoronoiError> {
    if dim == 0 || dim > 3 {
        return Err(VoronoiError::Unsupported(format!(
            "cells are supported for dimensions 1 to 3, got {dim}"
        )));
    }
    Ok(())
}

fn visit_box(lo: &[i64], hi: &[i64], mut visit: impl FnMut(&[i64])) {
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return;
    }
    let mut p = lo.to_vec();
    loop {
        visit(&p);
        let mut i = p.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if p[i] < hi[i] {
                p[i] += 1;
                break;
            }
            p[i] = lo[i];
        }
    }
}

/// Integer box containing the closed cell, which must be bounded.
fn closed_cell_box(dim: usize, nonzero: &[Coords]) -> Result<(Coords, Coords), VoronoiError> {
    match dim {
        1 => {
            // -w/2 <= v for w > 0 and v <= |w|/2 for w < 0.
            let lo = nonzero
                .iter()
                .filter(|w| w[0] > 0)
                .map(|w| -(w[0] / 2) - 1)
                .max();
            let hi = nonzero
                .iter()
                .filter(|w| w[0] < 0)
                .map(|w| (-w[0]) / 2 + 1)
                .min();
            let (lo, hi) = (lo.expect("bounded"), hi.expect("bounded"));
            Ok((Coords::from_slice(&[lo]), Coords::from_slice(&[hi])))
        }
        2 => {
            let (lo, hi) = geometry::bounding_box_2d(nonzero);
            Ok((Coords::from_slice(&lo), Coords::from_slice(&hi)))
        }
        _ => Err(VoronoiError::Unsupported(format!(
            "enumerating bounded cells is supported in dimensions 1 and 2, got {dim}"
        ))),
    }
}

/// Closed and strict cells of `w`, or the recession directions when the
/// closed cell is unbounded.
pub fn voronoi_cells(w: &HittingSet) -> Result<VoronoiCells, VoronoiError> {
    check_dim(w.dim)?;
    let nonzero = w.nonzero();
    let recession = geometry::recession_directions(w.dim, &nonzero);
    if !recession.is_empty() {
        return Ok(VoronoiCells::Unbounded {
            recession: recession.into_iter().map(|r| r.to_vec()).collect(),
        });
    }
    let (lo, hi) = closed_cell_box(w.dim, &nonzero)?;
    let mut closed = BTreeSet::new();
    let mut strict = BTreeSet::new();
    visit_box(&lo, &hi, |v| {
        let mut is_closed = true;
        let mut is_strict = true;
        for u in &nonzero {
            let s = 2 * dot(v, u) + dot(u, u);
            if s < 0 {
                is_closed = false;
                break;
            }
            if s == 0 {
                is_strict = false;
            }
        }
        if is_closed {
            closed.insert(Coords::from_slice(v));
            if is_strict {
                strict.insert(Coords::from_slice(v));
            }
        }
    });
    Ok(VoronoiCells::Bounded {
        closed: LatticeCell::from_set(w.dim, closed),
        strict: LatticeCell::from_set(w.dim, strict),
    })
}

fn norm_lex_less(a: &[i64], b: &[i64]) -> bool {
    (norm_squared(a), a) < (norm_squared(b), b)
}

/// Cell of the norm-ordered greedy allocation at a point whose hitting set
/// is `w`: the `v` with `v <= w + v` for all `w` in norm-then-lex order.
///
/// Candidates are taken from `closed`, the closed cell of `w`.
pub fn norm_lex_cell(w: &HittingSet, closed: &LatticeCell) -> LatticeCell {
    let nonzero = w.nonzero();
    let points = closed
        .iter()
        .filter(|v| {
            nonzero.iter().all(|u| {
                let shifted: Coords = u.iter().zip(v.iter()).map(|(a, b)| a + b).collect();
                !norm_lex_less(&shifted, v)
            })
        })
        .cloned()
        .collect();
    LatticeCell::from_set(w.dim, points)
}

/// Greedy cell certified against the untruncated hitting set.
///
/// Fails with [`VoronoiError::Inconclusive`] when the closed cell of `w` is
/// unbounded or `w` was truncated too tightly to determine it.
pub fn certified_norm_lex_cell(w: &HittingSet) -> Result<LatticeCell, VoronoiError> {
    let (closed, _) = certified_cells(w)?;
    Ok(norm_lex_cell(w, &closed))
}

fn certified_cells(w: &HittingSet) -> Result<(LatticeCell, LatticeCell), VoronoiError> {
    match voronoi_cells(w)? {
        VoronoiCells::Unbounded { recession } => Err(VoronoiError::Inconclusive(format!(
            "closed cell is unbounded along {recession:?}; increase the radius"
        ))),
        VoronoiCells::Bounded { closed, strict } => {
            let rho_sq = closed.max_norm_sq();
            if !w.covers(rho_sq) {
                return Err(VoronoiError::Inconclusive(format!(
                    "radius^2 {} is below 4 * {rho_sq}; increase the radius",
                    w.radius_sq.unwrap_or(0)
                )));
            }
            Ok((closed, strict))
        }
    }
}

/// Whether every lattice point in the interior of `conv(b)` belongs to `b`.
pub fn is_almost_convex(b: &LatticeCell) -> Result<bool, VoronoiError> {
    check_dim(b.dim)?;
    let Some((lo, hi)) = b.bounds() else {
        return Ok(true);
    };
    let points: Vec<Coords> = b.iter().cloned().collect();
    let hull = (b.dim == 2).then(|| geometry::convex_hull_2d(&points));
    let mut ok = true;
    visit_box(&lo, &hi, |p| {
        if !ok || b.contains(p) {
            return;
        }
        let interior = match b.dim {
            1 => lo[0] < p[0] && p[0] < hi[0],
            2 => geometry::strictly_inside_hull(hull.as_ref().unwrap(), p),
            _ => geometry::in_open_hull_by_spanning(b.dim, &points, p),
        };
        if interior {
            ok = false;
        }
    });
    Ok(ok)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    pub strict_size: usize,
    pub cell_size: usize,
    pub closed_size: usize,
    /// Points of the strict cell missing from the allocation cell.
    pub missing: Vec<Vec<i64>>,
    /// Points of the allocation cell outside the closed cell.
    pub excess: Vec<Vec<i64>>,
    pub holds: bool,
}

/// Checks `strict <= b <= closed` for the cells of `w`.
pub fn sandwich_check(w: &HittingSet, b: &LatticeCell) -> Result<SandwichReport, VoronoiError> {
    if b.dim != w.dim {
        return Err(VoronoiError::Dimension {
            vector: Vec::new(),
            expected: w.dim,
            found: b.dim,
        });
    }
    let (closed, strict) = certified_cells(w)?;
    let missing: Vec<Vec<i64>> = strict
        .iter()
        .filter(|p| !b.contains(p))
        .map(|p| p.to_vec())
        .collect();
    let excess: Vec<Vec<i64>> = b
        .iter()
        .filter(|p| !closed.contains(p))
        .map(|p| p.to_vec())
        .collect();
    Ok(SandwichReport {
        strict_size: strict.len(),
        cell_size: b.len(),
        closed_size: closed.len(),
        holds: missing.is_empty() && excess.is_empty(),
        missing,
        excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{FiniteSystem, PointSet};
    use proptest::prelude::*;

    fn cell(dim: usize, pts: &[&[i64]]) -> LatticeCell {
        LatticeCell::new(dim, pts.iter().map(|p| p.to_vec())).unwrap()
    }

    fn hits(dim: usize, pts: &[&[i64]]) -> HittingSet {
        HittingSet::explicit(dim, pts.iter().map(|p| p.to_vec())).unwrap()
    }

    #[test]
    fn one_dimensional_cells() {
        let w = hits(1, &[&[0], &[3], &[-2]]);
        let VoronoiCells::Bounded { closed, strict } = voronoi_cells(&w).unwrap() else {
            panic!("bounded expected");
        };
        assert_eq!(closed, cell(1, &[&[-1], &[0], &[1]]));
        assert_eq!(strict, cell(1, &[&[-1], &[0]]));
        let b = norm_lex_cell(&w, &closed);
        assert!(strict.is_subset(&b) && b.is_subset(&closed));
    }

    #[test]
    fn square_cells() {
        let w = hits(2, &[&[0, 0], &[2, 0], &[-2, 0], &[0, 2], &[0, -2]]);
        let VoronoiCells::Bounded { closed, strict } = voronoi_cells(&w).unwrap() else {
            panic!("bounded expected");
        };
        assert_eq!(closed.len(), 9);
        assert!((-1..=1).all(|a| (-1..=1).all(|b| closed.contains(&[a, b]))));
        assert_eq!(strict, cell(2, &[&[0, 0]]));
        let report = sandwich_check(&w, &norm_lex_cell(&w, &closed)).unwrap();
        assert!(report.holds);
    }

    #[test]
    fn quadrant_is_unbounded() {
        let w = hits(2, &[&[0, 0], &[2, 0], &[0, 2]]);
        let VoronoiCells::Unbounded { recession } = voronoi_cells(&w).unwrap() else {
            panic!("unbounded expected");
        };
        assert!(!recession.is_empty());
        for r in &recession {
            assert!(r[0] >= 0 && r[1] >= 0, "{r:?}");
        }
        // The diagonal lies in the recession cone.
        assert!(dot(&[1, 1], &[2, 0]) >= 0 && dot(&[1, 1], &[0, 2]) >= 0);
        assert!(matches!(
            sandwich_check(&w, &cell(2, &[&[0, 0]])),
            Err(VoronoiError::Inconclusive(_))
        ));
    }

    #[test]
    fn almost_convex_examples() {
        assert!(is_almost_convex(&cell(2, &[&[0, 0], &[1, 0], &[0, 1], &[1, 1]])).unwrap());
        assert!(!is_almost_convex(&cell(1, &[&[-1], &[1]])).unwrap());
        assert!(is_almost_convex(&cell(1, &[&[-1], &[0], &[1]])).unwrap());
        // 3x3 square without its centre.
        let ring: Vec<Vec<i64>> = (-1..=1)
            .flat_map(|a| (-1..=1).map(move |b| vec![a, b]))
            .filter(|p| p != &vec![0, 0])
            .collect();
        assert!(!is_almost_convex(&LatticeCell::new(2, ring).unwrap()).unwrap());
        // Boundary points may be missing.
        assert!(is_almost_convex(&cell(2, &[&[0, 0], &[2, 0], &[0, 2]])).unwrap());
        let cube: Vec<Vec<i64>> = (0..27)
            .map(|i| vec![i % 3 - 1, (i / 3) % 3 - 1, i / 9 - 1])
            .filter(|p| p != &vec![0, 0, 0])
            .collect();
        assert!(!is_almost_convex(&LatticeCell::new(3, cube).unwrap()).unwrap());
    }

    #[test]
    fn errors() {
        assert_eq!(
            HittingSet::explicit(1, [vec![3]]),
            Err(VoronoiError::MissingZero)
        );
        assert!(matches!(
            HittingSet::explicit(2, [vec![0, 0], vec![1]]),
            Err(VoronoiError::Dimension { .. })
        ));
        let w4 = HittingSet::explicit(4, [vec![0; 4]]).unwrap();
        assert!(matches!(
            voronoi_cells(&w4),
            Err(VoronoiError::Unsupported(_))
        ));
    }

    #[test]
    fn truncated_hitting_set_of_a_cycle() {
        let s = FiniteSystem::cycle(5);
        let a = PointSet::from_points(5, [0]).unwrap();
        let w = hitting_set(&s, &a, &0, 10).unwrap();
        let got: Vec<i64> = w.iter().map(|v| v[0]).collect();
        assert_eq!(got, vec![-10, -5, 0, 5, 10]);
        let b = certified_norm_lex_cell(&w).unwrap();
        assert_eq!(b, cell(1, &[&[-2], &[-1], &[0], &[1], &[2]]));
        assert!(hitting_set(&s, &a, &1, 3).is_err());
        let tight = hitting_set(&s, &a, &0, 3).unwrap();
        assert!(matches!(
            certified_norm_lex_cell(&tight),
            Err(VoronoiError::Inconclusive(_))
        ));
    }

    fn arb_hitting_set(dim: usize) -> impl Strategy<Value = HittingSet> {
        prop::collection::vec(prop::collection::vec(-6i64..=6, dim), 0..14).prop_map(
            move |mut vs| {
                vs.push(vec![0; dim]);
                HittingSet::explicit(dim, vs).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn greedy_cells_are_sandwiched_and_almost_convex(w in arb_hitting_set(2)) {
            if let VoronoiCells::Bounded { closed, strict } = voronoi_cells(&w).unwrap() {
                let b = norm_lex_cell(&w, &closed);
                prop_assert!(strict.is_subset(&b));
                prop_assert!(b.is_subset(&closed));
                prop_assert!(closed.contains(&[0, 0]) && strict.contains(&[0, 0]));
                prop_assert!(is_almost_convex(&b).unwrap());
                prop_assert!(is_almost_convex(&strict).unwrap());
            }
        }

        #[test]
        fn closed_cell_matches_brute_force(w in arb_hitting_set(2)) {
            if let VoronoiCells::Bounded { closed, .. } = voronoi_cells(&w).unwrap() {
                let r = 60i64;
                let mut brute = BTreeSet::new();
                for a in -r..=r {
                    for b in -r..=r {
                        let v = [a, b];
                        if w.iter().all(|u| 2 * dot(&v, u) + dot(u, u) >= 0) {
                            brute.insert(Coords::from_slice(&v));
                        }
                    }
                }
                let inside = |p: &Coords| p[0].abs() < r - 1 && p[1].abs() < r - 1;
                let fits = brute.iter().all(inside) && closed.iter().all(inside);
                prop_assume!(fits);
                prop_assert_eq!(closed, LatticeCell::from_set(2, brute));
            }
        }

        #[test]
        fn hull_and_spanning_tests_agree(pts in prop::collection::vec((-3i64..=3, -3i64..=3), 1..10)) {
            let b = LatticeCell::new(2, pts.iter().map(|&(x, y)| vec![x, y])).unwrap();
            let points: Vec<Coords> = b.iter().cloned().collect();
            let hull = geometry::convex_hull_2d(&points);
            for x in -4i64..=4 {
                for y in -4i64..=4 {
                    prop_assert_eq!(
                        geometry::strictly_inside_hull(&hull, &[x, y]),
                        geometry::in_open_hull_by_spanning(2, &points, &[x, y])
                    );
                }
            }
        }
    }
}
