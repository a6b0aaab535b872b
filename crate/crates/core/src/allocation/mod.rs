//! Allocations, their cells, and transported functions.
//!
//! An `A`-allocation assigns to each point `x` a group element `kappa(x)`
//! with `T_kappa(x)(x)` in `A`. Its cell at `x` is
//! `B(x) = {gamma : kappa(T_gamma^-1(x)) = gamma}`, and the transport of
//! `f` is `f_kappa(x) = sum of f(y) over y with T_kappa(y)(y) = x`.

mod finite;
mod sampled;

use std::collections::BTreeSet;
use std::fmt::Debug;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::estimate::EstimateError;
use crate::group::{Enumeration, GroupElement, GroupError};
use crate::system::{Action, Region, SystemError};
use crate::voronoi::{self, VoronoiCells, VoronoiError};

pub use finite::{
    classical_kac, kac_function, transport, verify_allocation_identity, AllocationTable,
    ExactIdentity, ExactKac, KacFunction, PartitionReport, TailBoundReport, TailRow,
};
pub use sampled::{
    classical_kac_mc, verify_allocation_identity_mc, EstimatedIdentity, BAND_SIGMAS,
};

/// Default cap on group elements examined per point on sampled systems.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AllocationError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Voronoi(#[from] VoronoiError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error("return times need an action of Z, got an action of {0}")]
    NotIntegerAction(String),
    #[error("target set is not a sweep-out set")]
    NotSweepOut,
    #[error("the orbit of point {0} never meets the target set")]
    NoHit(String),
    #[error("budget of {budget} exhausted at point {point}")]
    BudgetExceeded { budget: u64, point: String },
    #[error("allocation sends point {point} to {image}, outside the target set")]
    NotInTarget { point: String, image: String },
    #[error("allocation table has {found} entries for a system with {expected} points")]
    TableSize { expected: usize, found: usize },
    #[error("function has {found} values for a system with {expected} points")]
    FunctionSize { expected: usize, found: usize },
    #[error("allocation is undefined at point {0}, which has positive mass")]
    Undefined(usize),
    #[error("{0}")]
    Unsupported(String),
}

impl AllocationError {
    /// Whether the error means "ran out of budget" rather than "wrong input".
    pub fn is_abstention(&self) -> bool {
        matches!(self, AllocationError::BudgetExceeded { .. })
    }
}

type Result<T> = std::result::Result<T, AllocationError>;

fn require_integers<S: Action>(system: &S) -> Result<()> {
    if !system.group().is_integers() {
        return Err(AllocationError::NotIntegerAction(
            system.group().to_string(),
        ));
    }
    Ok(())
}

/// Least `n >= 1` with `T^(sign * n)(x)` in `target`.
fn first_visit<S: Action>(
    system: &S,
    target: &S::Set,
    x: &S::Point,
    sign: i64,
    budget: u64,
) -> Result<u64> {
    require_integers(system)?;
    let limit = system.finite_size().map_or(budget, |n| n as u64);
    let mut y = x.clone();
    for n in 1..=limit {
        y = system.shift(&y, sign);
        if target.contains(&y) {
            return Ok(n);
        }
    }
    if system.finite_size().is_some() {
        Err(AllocationError::NoHit(format!("{x:?}")))
    } else {
        Err(AllocationError::BudgetExceeded {
            budget,
            point: format!("{x:?}"),
        })
    }
}

/// First return time `r_A(x) = min{n >= 1 : T^n(x) in A}` of a `Z`-action.
///
/// Finite systems search the whole orbit and ignore `budget`.
pub fn return_time<S: Action>(
    system: &S,
    target: &S::Set,
    x: &S::Point,
    budget: u64,
) -> Result<u64> {
    first_visit(system, target, x, 1, budget)
}

/// `min{n >= 1 : T^-n(x) in A}`.
pub fn backward_return_time<S: Action>(
    system: &S,
    target: &S::Set,
    x: &S::Point,
    budget: u64,
) -> Result<u64> {
    first_visit(system, target, x, -1, budget)
}

/// First return map `T_A(x) = T^(r_A(x))(x)`.
pub fn induced_map<S: Action>(
    system: &S,
    target: &S::Set,
    x: &S::Point,
    budget: u64,
) -> Result<S::Point> {
    let n = return_time(system, target, x, budget)?;
    Ok(system.shift(x, n as i64))
}

/// A set of group elements.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell(BTreeSet<GroupElement>);

impl Cell {
    pub fn new(elements: impl IntoIterator<Item = GroupElement>) -> Self {
        Cell(elements.into_iter().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.0.contains(g)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroupElement> {
        self.0.iter()
    }

    /// Coordinates of the elements, in order.
    pub fn coords(&self) -> Vec<Vec<i64>> {
        self.0.iter().map(|g| g.coords().to_vec()).collect()
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

/// How an allocation picks `kappa(x)`.
#[derive(Clone, Debug)]
pub enum Strategy {
    /// First `g(n)` with `T_g(n)(x)` in `A`, examining at most `budget`
    /// elements.
    Greedy {
        enumeration: Enumeration,
        budget: u64,
    },
    /// For `Z`-actions: least `n >= 0` with `T^n(x)` in `A`.
    ForwardHitting { budget: u64 },
    /// Per-point values on a finite system; `None` only on null points.
    Table(Vec<Option<GroupElement>>),
}

/// An `A`-allocation on a system.
#[derive(Clone)]
pub struct Allocation<'s, S: Action> {
    system: &'s S,
    target: S::Set,
    strategy: Strategy,
}

impl<S: Action> Debug for Allocation<'_, S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Allocation")
            .field("target", &self.target)
            .field("strategy", &self.strategy)
            .finish()
    }
}

impl<'s, S: Action> Allocation<'s, S> {
    fn checked_target(system: &S, target: &S::Set) -> Result<()> {
        system.validate_set(target)?;
        if system.sweeps_out(target) == Some(false) {
            return Err(AllocationError::NotSweepOut);
        }
        Ok(())
    }

    /// Greedy allocation along `enumeration`.
    pub fn greedy(
        system: &'s S,
        target: S::Set,
        enumeration: Enumeration,
        budget: u64,
    ) -> Result<Self> {
        if enumeration.group() != system.group() {
            return Err(GroupError::Mismatch {
                expected: system.group().id(),
                found: enumeration.group().id(),
            }
            .into());
        }
        Self::checked_target(system, &target)?;
        Ok(Allocation {
            system,
            target,
            strategy: Strategy::Greedy {
                enumeration,
                budget,
            },
        })
    }

    /// Greedy allocation along the standard enumeration of the group.
    pub fn standard(system: &'s S, target: S::Set, budget: u64) -> Result<Self> {
        let e = Enumeration::standard(system.group())?;
        Self::greedy(system, target, e, budget)
    }

    /// `kappa(x) = min{n >= 0 : T^n(x) in A}` for a `Z`-action.
    pub fn forward_hitting(system: &'s S, target: S::Set, budget: u64) -> Result<Self> {
        require_integers(system)?;
        Self::checked_target(system, &target)?;
        Ok(Allocation {
            system,
            target,
            strategy: Strategy::ForwardHitting { budget },
        })
    }

    /// Tabulated allocation on a finite system. Every listed value must
    /// send its point into `target`.
    pub fn from_table(
        system: &'s S,
        target: S::Set,
        table: Vec<Option<GroupElement>>,
    ) -> Result<Self> {
        let Some(n) = system.finite_size() else {
            return Err(AllocationError::Unsupported(
                "tabulated allocations need a finite system".into(),
            ));
        };
        if table.len() != n {
            return Err(AllocationError::TableSize {
                expected: n,
                found: table.len(),
            });
        }
        system.validate_set(&target)?;
        for (i, g) in table.iter().enumerate() {
            if let Some(g) = g {
                let x = system.point_at(i).expect("index below finite_size");
                let y = system.apply(g, &x)?;
                if !target.contains(&y) {
                    return Err(AllocationError::NotInTarget {
                        point: format!("{x:?}"),
                        image: format!("{y:?}"),
                    });
                }
            }
        }
        Ok(Allocation {
            system,
            target,
            strategy: Strategy::Table(table),
        })
    }

    pub fn system(&self) -> &'s S {
        self.system
    }

    pub fn target(&self) -> &S::Set {
        &self.target
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    /// `kappa(x)`.
    pub fn assign(&self, x: &S::Point) -> Result<GroupElement> {
        match &self.strategy {
            Strategy::Greedy {
                enumeration,
                budget,
            } => self.greedy_assign(enumeration, *budget, x),
            Strategy::ForwardHitting { budget } => {
                let n = if self.target.contains(x) {
                    0
                } else {
                    return_time(self.system, &self.target, x, *budget)?
                };
                Ok(self.system.group().element(&[n as i64])?)
            }
            Strategy::Table(table) => {
                let i = self
                    .system
                    .point_index(x)
                    .ok_or_else(|| AllocationError::Unsupported("point has no index".into()))?;
                table
                    .get(i)
                    .cloned()
                    .flatten()
                    .ok_or_else(|| AllocationError::NoHit(format!("{x:?}")))
            }
        }
    }

    fn greedy_assign(
        &self,
        enumeration: &Enumeration,
        budget: u64,
        x: &S::Point,
    ) -> Result<GroupElement> {
        let bound = if enumeration.is_norm_lex() {
            self.system.hit_search_radius_sq()
        } else {
            None
        };
        for (i, g) in enumeration.iter().enumerate() {
            if bound.is_some_and(|b| g.norm_squared() > b) {
                break;
            }
            if i as u64 >= budget {
                return Err(AllocationError::BudgetExceeded {
                    budget,
                    point: format!("{x:?}"),
                });
            }
            if self.target.contains(&self.system.act(&g, x)) {
                return Ok(g);
            }
        }
        Err(AllocationError::NoHit(format!("{x:?}")))
    }

    /// `T_kappa(x)(x)`.
    pub fn image(&self, x: &S::Point) -> Result<S::Point> {
        Ok(self.system.act(&self.assign(x)?, x))
    }

    /// The cell `B(x)`; empty when `x` is not in the target.
    ///
    /// Finite systems scan every point. Otherwise forward-hitting cells come
    /// from backward return times and norm-ordered greedy cells from
    /// certified Voronoi cells of the hitting set.
    pub fn cell(&self, x: &S::Point) -> Result<Cell> {
        if !self.target.contains(x) {
            return Ok(Cell::default());
        }
        if self.system.finite_size().is_some() {
            return self.cell_by_scan(x);
        }
        match &self.strategy {
            Strategy::ForwardHitting { budget } => {
                let n = backward_return_time(self.system, &self.target, x, *budget)?;
                let z = self.system.group();
                Ok(Cell::new(
                    (0..n as i64).map(|k| z.element(&[k]).expect("rank one")),
                ))
            }
            Strategy::Greedy {
                enumeration,
                budget,
            } if enumeration.is_norm_lex() => self.cell_by_voronoi(x, *budget),
            _ => Err(AllocationError::Unsupported(
                "cells of this allocation need a finite system".into(),
            )),
        }
    }

    fn cell_by_scan(&self, x: &S::Point) -> Result<Cell> {
        let n = self.system.finite_size().unwrap_or(0);
        let mut out = BTreeSet::new();
        for i in 0..n {
            let y = self.system.point_at(i).expect("index below finite_size");
            let g = match self.assign(&y) {
                Ok(g) => g,
                Err(AllocationError::NoHit(_)) => continue,
                Err(e) => return Err(e),
            };
            if self.system.act(&g, &y) == *x {
                out.insert(g);
            }
        }
        Ok(Cell(out))
    }

    /// Cell of a norm-ordered greedy allocation from the hitting set of `x`.
    ///
    /// The search radius grows until the closed cell is bounded and the
    /// radius is at least twice its largest norm; candidates are then
    /// decided exactly. Fails when the ball to search would hold more than
    /// `budget` points.
    pub fn cell_by_voronoi(&self, x: &S::Point, budget: u64) -> Result<Cell> {
        let group = self.system.group();
        match &self.strategy {
            Strategy::Greedy { enumeration, .. } if enumeration.is_norm_lex() => {}
            _ => {
                return Err(AllocationError::Unsupported(
                    "Voronoi cells describe norm-ordered greedy allocations".into(),
                ))
            }
        }
        if !self.target.contains(x) {
            return Ok(Cell::default());
        }
        let dim = group.rank() as u32;
        let mut radius_sq: i64 = 4;
        loop {
            let side = 2 * ((radius_sq as f64).sqrt().ceil() as u64) + 1;
            if side.saturating_pow(dim) > budget {
                return Err(AllocationError::BudgetExceeded {
                    budget,
                    point: format!("{x:?}"),
                });
            }
            let w = voronoi::hitting_set_sq(self.system, &self.target, x, radius_sq)?;
            match voronoi::voronoi_cells(&w)? {
                VoronoiCells::Unbounded { .. } => radius_sq *= 4,
                VoronoiCells::Bounded { closed, .. } => {
                    let rho_sq = closed.max_norm_sq();
                    if radius_sq >= 4 * rho_sq {
                        let b = voronoi::norm_lex_cell(&w, &closed);
                        let cell = b
                            .iter()
                            .map(|v| group.element(v))
                            .collect::<std::result::Result<_, _>>()?;
                        return Ok(Cell(cell));
                    }
                    radius_sq = 4 * rho_sq;
                }
            }
        }
    }

    /// Transported value `f_kappa(x) = sum over gamma in B(x) of
    /// f(T_gamma^-1(x))`.
    pub fn transported(&self, f: impl Fn(&S::Point) -> f64, x: &S::Point) -> Result<f64> {
        let cell = self.cell(x)?;
        let group = self.system.group();
        let mut total = 0.0;
        for g in cell.iter() {
            total += f(&self.system.act(&group.invert(g)?, x));
        }
        Ok(total)
    }
}
