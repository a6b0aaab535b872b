//! Finite measure-preserving equivalence relations and class-respecting maps.
//!
//! A relation on a finite space is given by a class label per point. It
//! preserves `mu` exactly when masses are constant on each class: every
//! partial bijection inside the relation is a product of within-class
//! transpositions, and a transposition of `x` and `y` preserves `mu` iff
//! `mu(x) = mu(y)`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;
use thiserror::Error;

use crate::allocation::{Allocation, AllocationError};
use crate::exact::{ratio_string, serialize_ratio, ExtValue};
use crate::group::{Enumeration, GroupElement};
use crate::system::{Action, FiniteSystem, PointSet, SystemError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelationError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Allocation(#[from] AllocationError),
    #[error("relation has {masses} masses but {labels} class labels")]
    Shape { masses: usize, labels: usize },
    #[error("masses sum to {0}, expected 1")]
    MassSum(String),
    #[error("mass of point {0} is negative")]
    NegativeMass(usize),
    #[error("relation is not measure preserving: {0}")]
    Invalid(String),
    #[error("map has {found} entries for {expected} points")]
    TauSize { expected: usize, found: usize },
    #[error("map sends {point} to {image}, outside its class")]
    ClassBreaking { point: usize, image: usize },
    #[error("function has {found} values for {expected} points")]
    FunctionSize { expected: usize, found: usize },
    #[error("no group element moves {point} to {image}")]
    Unreachable { point: usize, image: usize },
}

type Result<T> = std::result::Result<T, RelationError>;

/// An equivalence relation on `0..n` given by class labels.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivRelation {
    #[serde(serialize_with = "crate::exact::serialize_ratio_vec")]
    masses: Vec<BigRational>,
    class_of: Vec<usize>,
}

impl EquivRelation {
    pub fn new(masses: Vec<BigRational>, class_of: Vec<usize>) -> Result<Self> {
        if masses.len() != class_of.len() {
            return Err(RelationError::Shape {
                masses: masses.len(),
                labels: class_of.len(),
            });
        }
        if let Some(i) = masses.iter().position(|m| m.is_negative()) {
            return Err(RelationError::NegativeMass(i));
        }
        let total: BigRational = masses.iter().sum();
        if !total.is_one() {
            return Err(RelationError::MassSum(ratio_string(&total)));
        }
        Ok(EquivRelation { masses, class_of })
    }

    pub fn n_points(&self) -> usize {
        self.masses.len()
    }

    pub fn mass(&self, x: usize) -> &BigRational {
        &self.masses[x]
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.class_of[x]
    }

    /// Classes keyed by label, each listing its points in order.
    pub fn classes(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (x, &c) in self.class_of.iter().enumerate() {
            out.entry(c).or_default().push(x);
        }
        out
    }

    fn check_function(&self, f: &[ExtValue]) -> Result<()> {
        if f.len() != self.n_points() {
            return Err(RelationError::FunctionSize {
                expected: self.n_points(),
                found: f.len(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationVerdict {
    pub valid: bool,
    /// Label of a class whose masses differ.
    pub offending_class: Option<usize>,
    pub reason: Option<String>,
}

/// Accepts iff masses are constant on every class.
pub fn validate_relation(rel: &EquivRelation) -> RelationVerdict {
    for (label, points) in rel.classes() {
        let mut masses = points.iter().map(|&x| rel.mass(x));
        if let Some(first) = masses.next() {
            if let Some(other) = masses.find(|m| *m != first) {
                return RelationVerdict {
                    valid: false,
                    offending_class: Some(label),
                    reason: Some(format!(
                        "class {label} has masses {} and {}",
                        ratio_string(first),
                        ratio_string(other)
                    )),
                };
            }
        }
    }
    RelationVerdict {
        valid: true,
        offending_class: None,
        reason: None,
    }
}

/// A map `tau : X -> X`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TauMap(pub Vec<usize>);

impl TauMap {
    pub fn identity(n: usize) -> Self {
        TauMap((0..n).collect())
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|tau^-1({x})|` for every `x`.
    pub fn preimage_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.0.len()];
        for &y in &self.0 {
            counts[y] += 1;
        }
        counts
    }

    /// `f_tau(x) = sum of f(y) over tau(y) = x`.
    pub fn transport(&self, f: &[ExtValue]) -> Vec<ExtValue> {
        let mut out = vec![ExtValue::zero(); self.0.len()];
        for (y, &x) in self.0.iter().enumerate() {
            out[x] = out[x].clone() + &f[y];
        }
        out
    }

    pub fn is_injective(&self) -> bool {
        self.preimage_counts().iter().all(|&c| c <= 1)
    }
}

fn check_tau(rel: &EquivRelation, tau: &TauMap) -> Result<()> {
    if tau.len() != rel.n_points() {
        return Err(RelationError::TauSize {
            expected: rel.n_points(),
            found: tau.len(),
        });
    }
    for (x, &y) in tau.0.iter().enumerate() {
        if y >= rel.n_points() || rel.class_of(x) != rel.class_of(y) {
            return Err(RelationError::ClassBreaking { point: x, image: y });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationKacReport {
    /// `integral of f`.
    pub integral_f: ExtValue,
    /// `integral of f_tau`.
    pub integral_f_tau: ExtValue,
    pub equal: bool,
    /// `integral of |tau^-1({x})|`.
    #[serde(serialize_with = "serialize_ratio")]
    pub preimage_integral: BigRational,
    /// `preimage_integral == 1`.
    pub preimage_holds: bool,
}

/// Both sides of `integral of f = integral of f_tau`, and the expected
/// number of preimages.
pub fn verify_relation_kac(
    rel: &EquivRelation,
    tau: &TauMap,
    f: &[ExtValue],
) -> Result<RelationKacReport> {
    let verdict = validate_relation(rel);
    if !verdict.valid {
        return Err(RelationError::Invalid(verdict.reason.unwrap_or_default()));
    }
    check_tau(rel, tau)?;
    rel.check_function(f)?;
    let integral = |g: &[ExtValue]| -> ExtValue {
        g.iter()
            .enumerate()
            .map(|(x, v)| v.weighted(rel.mass(x)))
            .sum()
    };
    let integral_f = integral(f);
    let integral_f_tau = integral(&tau.transport(f));
    let preimage_integral: BigRational = tau
        .preimage_counts()
        .iter()
        .enumerate()
        .map(|(x, &c)| rel.mass(x) * BigRational::from_integer(c.into()))
        .sum();
    Ok(RelationKacReport {
        equal: integral_f == integral_f_tau,
        integral_f,
        integral_f_tau,
        preimage_holds: preimage_integral.is_one(),
        preimage_integral,
    })
}

/// The orbit equivalence relation of a finite system.
///
/// # Panics
/// If an orbit carries unequal masses, which a validated
/// [`FiniteSystem`] rules out.
pub fn orbit_relation(fs: &FiniteSystem) -> EquivRelation {
    let rel = EquivRelation {
        masses: fs.masses().to_vec(),
        class_of: fs.orbit_labels(),
    };
    let verdict = validate_relation(&rel);
    assert!(verdict.valid, "corrupt system: {:?}", verdict.reason);
    rel
}

fn first_element_reaching(
    fs: &FiniteSystem,
    e: &Enumeration,
    x: usize,
    y: usize,
) -> Option<GroupElement> {
    let bound = if e.is_norm_lex() {
        fs.hit_search_radius_sq()
    } else {
        None
    };
    for g in e.iter() {
        if bound.is_some_and(|b| g.norm_squared() > b) {
            return None;
        }
        if fs.act(&g, &x) == y {
            return Some(g);
        }
    }
    None
}

/// `A = tau(X)` and the allocation `kappa(x)` = first enumerated `gamma`
/// with `T_gamma(x) = tau(x)`, so that `T_kappa = tau`.
pub fn tau_to_allocation<'s>(
    fs: &'s FiniteSystem,
    tau: &TauMap,
) -> Result<(PointSet, Allocation<'s, FiniteSystem>)> {
    let rel = orbit_relation(fs);
    check_tau(&rel, tau)?;
    let target = PointSet::from_points(fs.n_points(), tau.0.iter().copied())?;
    let e = Enumeration::standard(fs.group()).map_err(SystemError::from)?;
    let mut table = Vec::with_capacity(fs.n_points());
    for x in 0..fs.n_points() {
        let y = tau.apply(x);
        let g = first_element_reaching(fs, &e, x, y)
            .ok_or(RelationError::Unreachable { point: x, image: y })?;
        table.push(Some(g));
    }
    let alloc = Allocation::from_table(fs, target.clone(), table)?;
    Ok((target, alloc))
}

/// `tau(x) = T^(-n_A(x))(x)` with `n_A(x) = min{m >= 1 : T^-m(x) in A}`.
///
/// Null points whose orbit misses `A` are fixed.
pub fn first_return_tau(fs: &FiniteSystem, target: &PointSet) -> Result<TauMap> {
    fs.check_set(target)?;
    let mut table = Vec::with_capacity(fs.n_points());
    for x in 0..fs.n_points() {
        match crate::allocation::backward_return_time(fs, target, &x, 0) {
            Ok(n) => table.push(fs.shift(&x, -(n as i64))),
            Err(AllocationError::NoHit(_)) if fs.is_null(x) => table.push(x),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(TauMap(table))
}
