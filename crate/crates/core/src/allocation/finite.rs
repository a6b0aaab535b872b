//! Exact allocation identities on finite systems.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{return_time, Allocation, AllocationError, Cell, Result};
use crate::exact::{serialize_ratio, ExtValue};
use crate::group::{Enumeration, GroupElement};
use crate::system::{Action, FiniteSystem, PointSet};

/// `kappa` and `T_kappa` evaluated at every point.
#[derive(Clone, Debug, PartialEq)]
pub struct AllocationTable {
    kappa: Vec<Option<GroupElement>>,
    image: Vec<Option<usize>>,
}

impl AllocationTable {
    pub fn kappa(&self, x: usize) -> Option<&GroupElement> {
        self.kappa.get(x)?.as_ref()
    }

    pub fn image(&self, x: usize) -> Option<usize> {
        *self.image.get(x)?
    }

    /// `B(x)` for every point, from one pass over the inverse of `T_kappa`.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = vec![Cell::default(); self.kappa.len()];
        for (g, z) in self.kappa.iter().zip(&self.image) {
            if let (Some(g), Some(z)) = (g, z) {
                cells[*z].0.insert(g.clone());
            }
        }
        cells
    }
}

impl Allocation<'_, FiniteSystem> {
    /// Evaluates the allocation everywhere. Points whose orbit misses the
    /// target are left undefined, which is an error unless they are null.
    pub fn table(&self) -> Result<AllocationTable> {
        let fs = self.system;
        let mut kappa = Vec::with_capacity(fs.n_points());
        let mut image = Vec::with_capacity(fs.n_points());
        for x in 0..fs.n_points() {
            match self.assign(&x) {
                Ok(g) => {
                    image.push(Some(fs.act(&g, &x)));
                    kappa.push(Some(g));
                }
                Err(AllocationError::NoHit(_)) if fs.is_null(x) => {
                    image.push(None);
                    kappa.push(None);
                }
                Err(AllocationError::NoHit(_)) => return Err(AllocationError::Undefined(x)),
                Err(e) => return Err(e),
            }
        }
        Ok(AllocationTable { kappa, image })
    }
}

fn check_function(fs: &FiniteSystem, f: &[ExtValue]) -> Result<()> {
    if f.len() != fs.n_points() {
        return Err(AllocationError::FunctionSize {
            expected: fs.n_points(),
            found: f.len(),
        });
    }
    Ok(())
}

/// `f_kappa` at every point (zero off the target).
pub fn transport(alloc: &Allocation<'_, FiniteSystem>, f: &[ExtValue]) -> Result<Vec<ExtValue>> {
    check_function(alloc.system, f)?;
    let table = alloc.table()?;
    let mut out = vec![ExtValue::zero(); f.len()];
    for (y, z) in table.image.iter().enumerate() {
        if let Some(z) = z {
            out[*z] = out[*z].clone() + &f[y];
        }
    }
    Ok(out)
}

/// Both sides of `integral over A of f_kappa = integral of f`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactIdentity {
    pub lhs: ExtValue,
    pub rhs: ExtValue,
    pub equal: bool,
}

pub fn verify_allocation_identity(
    alloc: &Allocation<'_, FiniteSystem>,
    f: &[ExtValue],
) -> Result<ExactIdentity> {
    let fs = alloc.system;
    let fk = transport(alloc, f)?;
    let lhs: ExtValue = alloc
        .target
        .iter()
        .map(|x| fk[x].weighted(fs.mass(x)))
        .sum();
    let rhs: ExtValue = (0..fs.n_points()).map(|x| f[x].weighted(fs.mass(x))).sum();
    Ok(ExactIdentity {
        equal: lhs == rhs,
        lhs,
        rhs,
    })
}

/// `integral over A of r_A` for a `Z`-action.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactKac {
    #[serde(serialize_with = "serialize_ratio")]
    pub integral: BigRational,
    #[serde(serialize_with = "serialize_ratio")]
    pub target_measure: BigRational,
    pub sweep_out: bool,
    /// `integral == 1`.
    pub holds: bool,
}

pub fn classical_kac(fs: &FiniteSystem, target: &PointSet) -> Result<ExactKac> {
    fs.check_set(target)?;
    let mut integral = BigRational::zero();
    for x in target.iter() {
        let r = return_time(fs, target, &x, 0)?;
        integral += fs.mass(x) * BigRational::from_integer(r.into());
    }
    Ok(ExactKac {
        holds: integral.is_one(),
        integral,
        target_measure: fs.measure(target),
        sweep_out: fs.is_sweep_out(target),
    })
}

/// A Kac function: finitely many cell shapes and, for each point of the
/// target with positive mass, the 1-based index of its shape.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KacFunction {
    shapes: Vec<Cell>,
    phi: Vec<Option<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionReport {
    /// Positive-mass points covered by no translate.
    pub uncovered: Vec<usize>,
    /// Positive-mass points covered more than once.
    pub multiply_covered: Vec<usize>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailRow {
    pub n: usize,
    #[serde(serialize_with = "serialize_ratio")]
    pub measure: BigRational,
    #[serde(serialize_with = "serialize_ratio")]
    pub bound: BigRational,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailBoundReport {
    pub rows: Vec<TailRow>,
    pub holds: bool,
}

/// Shapes listed in order of first occurrence over increasing points.
pub fn kac_function(alloc: &Allocation<'_, FiniteSystem>) -> Result<KacFunction> {
    let fs = alloc.system;
    let cells = alloc.table()?.cells();
    let mut shapes: Vec<Cell> = Vec::new();
    let mut index: HashMap<Cell, usize> = HashMap::new();
    let mut phi = vec![None; fs.n_points()];
    for x in alloc.target.iter().filter(|&x| !fs.is_null(x)) {
        let cell = &cells[x];
        let n = match index.get(cell) {
            Some(&n) => n,
            None => {
                shapes.push(cell.clone());
                index.insert(cell.clone(), shapes.len());
                shapes.len()
            }
        };
        phi[x] = Some(n);
    }
    Ok(KacFunction { shapes, phi })
}

impl KacFunction {
    pub fn shapes(&self) -> &[Cell] {
        &self.shapes
    }

    /// `B_n` for `n >= 1`.
    pub fn shape(&self, n: usize) -> Option<&Cell> {
        self.shapes.get(n.checked_sub(1)?)
    }

    /// `phi(x)`, defined on positive-mass points of the target.
    pub fn phi(&self, x: usize) -> Option<usize> {
        *self.phi.get(x)?
    }

    /// Position of each shape in the fixed list of all finite subsets of
    /// the group, where the set with enumeration indices `i_1, ..., i_k`
    /// sits at `1 + 2^i_1 + ... + 2^i_k`.
    pub fn universal_indices(&self, e: &Enumeration) -> Result<Vec<BigUint>> {
        self.shapes
            .iter()
            .map(|cell| {
                let mut mask = BigUint::zero();
                for g in cell.iter() {
                    mask.set_bit(e.index_of(g)?, true);
                }
                Ok(mask + BigUint::one())
            })
            .collect()
    }

    pub fn cell_size(&self, x: usize) -> Option<usize> {
        Some(self.shape(self.phi(x)?)?.len())
    }

    /// `integral over A of |B_phi|`.
    pub fn expected_cell_size(&self, fs: &FiniteSystem) -> BigRational {
        (0..self.phi.len())
            .filter_map(|x| Some(fs.mass(x) * BigRational::from_integer(self.cell_size(x)?.into())))
            .sum()
    }

    /// Whether the translates `T_gamma^-1(phi^-1(n))`, `gamma` in `B_n`,
    /// cover each positive-mass point exactly once.
    pub fn partition_check(&self, fs: &FiniteSystem) -> Result<PartitionReport> {
        let group = crate::system::Action::group(fs);
        let mut count = vec![0usize; fs.n_points()];
        for x in 0..self.phi.len() {
            let Some(n) = self.phi(x) else { continue };
            for g in self.shapes[n - 1].iter() {
                count[fs.act(&group.invert(g)?, &x)] += 1;
            }
        }
        let uncovered: Vec<usize> = fs.support().filter(|&y| count[y] == 0).collect();
        let multiply_covered: Vec<usize> = fs.support().filter(|&y| count[y] > 1).collect();
        Ok(PartitionReport {
            holds: uncovered.is_empty() && multiply_covered.is_empty(),
            uncovered,
            multiply_covered,
        })
    }

    /// `mu(|B_phi| >= n) <= 1/n` for `n = 1..=n_max`; `n_max` defaults to
    /// the largest shape size.
    pub fn tail_bound_check(&self, fs: &FiniteSystem, n_max: Option<usize>) -> TailBoundReport {
        let largest = self.shapes.iter().map(Cell::len).max().unwrap_or(0);
        let n_max = n_max.unwrap_or(largest).max(1);
        let rows: Vec<TailRow> = (1..=n_max)
            .map(|n| {
                let measure: BigRational = (0..self.phi.len())
                    .filter(|&x| self.cell_size(x).is_some_and(|s| s >= n))
                    .map(|x| fs.mass(x).clone())
                    .sum();
                let bound = BigRational::new(1.into(), n.into());
                TailRow {
                    n,
                    holds: measure <= bound,
                    measure,
                    bound,
                }
            })
            .collect();
        TailBoundReport {
            holds: rows.iter().all(|r| r.holds),
            rows,
        }
    }
}
