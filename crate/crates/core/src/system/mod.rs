//! Concrete probability-preserving actions.
//!
//! [`FiniteSystem`] is an action by permutations on a finite set with exact
//! rational masses. [`SampledSystem`] is one of a fixed catalog of ergodic
//! systems (circle rotation, torus translation, odometer, finite cycle) that
//! can be sampled from its invariant measure. Both implement [`Action`], which
//! is all the allocation and Voronoi code needs.

mod finite;
mod sampled;

use std::fmt::Debug;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::group::{Group, GroupElement, GroupError};

pub use finite::{FiniteSystem, OrbitSummary};
pub use sampled::{
    Interval, OdometerPoint, OrbitStructure, SampleStream, SampledKind, SampledPoint, SampledSet,
    SampledSystem, Turn, GOLDEN_CONJUGATE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SystemError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("masses sum to {0}, expected 1")]
    MassSum(String),
    #[error("mass of point {0} is negative")]
    NegativeMass(usize),
    #[error("system has no points")]
    Empty,
    #[error("group {group} needs {expected} generator permutations, got {found}")]
    GeneratorCount {
        group: String,
        expected: usize,
        found: usize,
    },
    #[error("generator {generator} is not a permutation of 0..{n_points}")]
    NotPermutation { generator: usize, n_points: usize },
    #[error("generator {generator} moves point {point} to a point of different mass")]
    MassNotPreserved { generator: usize, point: usize },
    #[error("generators {a} and {b} do not commute")]
    NotCommuting { a: usize, b: usize },
    #[error("generator {generator} does not have order dividing {order}")]
    WrongOrder { generator: usize, order: u64 },
    #[error("point {point} out of range for a system with {n_points} points")]
    PointOutOfRange { point: usize, n_points: usize },
    #[error("invalid sampled system: {0}")]
    Sampled(String),
    #[error("set does not match the system: {0}")]
    SetMismatch(String),
}

/// Membership test for a measurable set.
pub trait Region<P> {
    fn contains(&self, p: &P) -> bool;
}

/// A measure-preserving action `gamma -> T_gamma` of a [`Group`].
pub trait Action {
    type Point: Clone + PartialEq + Debug;
    type Set: Region<Self::Point> + Clone + Debug;

    fn group(&self) -> &Group;

    /// `T_g(x)`; `g` must belong to [`Action::group`].
    fn act(&self, g: &GroupElement, x: &Self::Point) -> Self::Point;

    /// Checked version of [`Action::act`].
    fn apply(&self, g: &GroupElement, x: &Self::Point) -> Result<Self::Point, SystemError> {
        if !self.group().contains(g) {
            return Err(GroupError::Mismatch {
                expected: self.group().id(),
                found: g.group_id(),
            }
            .into());
        }
        Ok(self.act(g, x))
    }

    /// `T^n(x)` for actions of `Z`.
    fn shift(&self, x: &Self::Point, n: i64) -> Self::Point {
        let g = self
            .group()
            .element(&[n])
            .expect("shift requires a rank-one group");
        self.act(&g, x)
    }

    /// Index of `x` for systems with finitely many points.
    fn point_index(&self, _x: &Self::Point) -> Option<usize> {
        None
    }

    /// Checks that `set` is a set of this system.
    fn validate_set(&self, _set: &Self::Set) -> Result<(), SystemError> {
        Ok(())
    }

    /// Number of points, for systems with finitely many.
    fn finite_size(&self) -> Option<usize> {
        None
    }

    /// The point with index `i`, for systems with finitely many.
    fn point_at(&self, _i: usize) -> Option<Self::Point> {
        None
    }

    /// Whether every positive-measure orbit meets `set`, when known.
    fn sweeps_out(&self, _set: &Self::Set) -> Option<bool> {
        None
    }

    /// A squared norm beyond which a norm-ordered search for some
    /// `gamma` with `T_gamma(x)` in a set can give up: any hit has a
    /// representative within it.
    fn hit_search_radius_sq(&self) -> Option<i64> {
        None
    }
}

/// A subset of the points of a finite system.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PointSet {
    members: Vec<bool>,
}

impl PointSet {
    pub fn empty(n_points: usize) -> Self {
        PointSet {
            members: vec![false; n_points],
        }
    }

    pub fn full(n_points: usize) -> Self {
        PointSet {
            members: vec![true; n_points],
        }
    }

    pub fn from_points(
        n_points: usize,
        points: impl IntoIterator<Item = usize>,
    ) -> Result<Self, SystemError> {
        let mut set = Self::empty(n_points);
        for p in points {
            if p >= n_points {
                return Err(SystemError::PointOutOfRange { point: p, n_points });
            }
            set.members[p] = true;
        }
        Ok(set)
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        PointSet { members: mask }
    }

    pub fn universe(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, p: usize) -> bool {
        self.members.get(p).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, p: usize) {
        self.members[p] = true;
    }

    pub fn remove(&mut self, p: usize) {
        self.members[p] = false;
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn is_disjoint(&self, other: &PointSet) -> bool {
        self.iter().all(|p| !other.contains(p))
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        PointSet {
            members: self
                .members
                .iter()
                .zip(&other.members)
                .map(|(a, b)| *a || *b)
                .collect(),
        }
    }

    pub fn symmetric_difference(&self, other: &PointSet) -> PointSet {
        PointSet {
            members: self
                .members
                .iter()
                .zip(&other.members)
                .map(|(a, b)| a != b)
                .collect(),
        }
    }
}

impl Region<usize> for PointSet {
    fn contains(&self, p: &usize) -> bool {
        PointSet::contains(self, *p)
    }
}

impl Serialize for PointSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}
