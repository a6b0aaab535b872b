//! Sweep-out partitions, fingerprints, and the generator partition.
//!
//! Given disjoint sweep-out sets `A_n` with allocations `kappa_n` and sets
//! `E_n`, the fingerprint of `x` is
//! `C_x = {(n, gamma) : gamma in B_n(x), T_gamma^-1(x) in E_n}` with `n`
//! counted from 1. Points with equal fingerprints form the blocks `P_D`, and
//! each `E_n` is recovered as the union of `T_gamma^-1(P_D)` over blocks
//! whose key contains `(n, gamma)`.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::allocation::{Allocation, AllocationError, Cell};
use crate::exact::{ratio_string, serialize_ratio, serialize_ratio_vec};
use crate::group::GroupElement;
use crate::system::{
    Action, FiniteSystem, Interval, OrbitStructure, OrbitSummary, PointSet, SampledKind,
    SampledSet, SampledSystem, SystemError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Allocation(#[from] AllocationError),
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(String),
    #[error("point {point} has mass {mass}, above epsilon {epsilon}")]
    EpsilonTooSmall {
        point: usize,
        mass: String,
        epsilon: String,
    },
    #[error("{0}")]
    Unsupported(String),
    #[error("target sets {a} and {b} intersect")]
    NotDisjoint { a: usize, b: usize },
    #[error("{allocations} allocations but {sets} sets")]
    LengthMismatch { allocations: usize, sets: usize },
    #[error("index {index} is outside 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
}

type Result<T> = std::result::Result<T, GeneratorError>;

/// Disjoint sweep-out pieces of measure at most `epsilon`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepOutPartition<P> {
    pub pieces: Vec<P>,
    #[serde(serialize_with = "serialize_ratio_vec")]
    pub measures: Vec<BigRational>,
    /// `1 - sum of measures`.
    #[serde(serialize_with = "serialize_ratio")]
    pub residual_mass: BigRational,
    pub warnings: Vec<String>,
}

fn check_epsilon(epsilon: &BigRational) -> Result<()> {
    if !epsilon.is_positive() {
        return Err(GeneratorError::NonPositiveEpsilon(ratio_string(epsilon)));
    }
    Ok(())
}

fn degenerate_warning(epsilon: &BigRational) -> String {
    format!(
        "epsilon {} >= 1: the whole space is the only piece",
        ratio_string(epsilon)
    )
}

/// Greedy packing of points, in index order, into consecutive pieces of
/// mass at most `epsilon`. Null points join the piece being filled.
///
/// Needs an ergodic system, where every set of positive measure sweeps out.
pub fn sweep_out_partition_finite(
    fs: &FiniteSystem,
    epsilon: &BigRational,
) -> Result<SweepOutPartition<PointSet>> {
    check_epsilon(epsilon)?;
    if !fs.is_ergodic() {
        return Err(GeneratorError::Unsupported(
            "sweep-out partitions of non-ergodic finite systems need conditional measures".into(),
        ));
    }
    let n = fs.n_points();
    if *epsilon >= BigRational::one() {
        return Ok(SweepOutPartition {
            pieces: vec![PointSet::full(n)],
            measures: vec![BigRational::one()],
            residual_mass: BigRational::zero(),
            warnings: vec![degenerate_warning(epsilon)],
        });
    }
    let mut pieces = Vec::new();
    let mut measures = Vec::new();
    let mut current = PointSet::empty(n);
    let mut mass = BigRational::zero();
    for x in 0..n {
        let m = fs.mass(x);
        if m > epsilon {
            return Err(GeneratorError::EpsilonTooSmall {
                point: x,
                mass: ratio_string(m),
                epsilon: ratio_string(epsilon),
            });
        }
        if &mass + m > *epsilon {
            pieces.push(std::mem::replace(&mut current, PointSet::empty(n)));
            measures.push(std::mem::take(&mut mass));
        }
        current.insert(x);
        mass += m;
    }
    pieces.push(current);
    measures.push(mass);
    Ok(SweepOutPartition {
        pieces,
        measures,
        residual_mass: BigRational::zero(),
        warnings: Vec::new(),
    })
}

/// Quantile partition of the circle for a rotation.
///
/// Pieces `n = 1..=n_max` are consecutive arcs of length `epsilon / 2^n`
/// starting at 0; the gap of length `epsilon / 2^n_max` before `epsilon` is
/// the residual, and `[epsilon, 1)` is cut into further arcs of length at
/// most `epsilon`.
pub fn sweep_out_partition_rotation(
    ss: &SampledSystem,
    epsilon: &BigRational,
    n_max: usize,
) -> Result<SweepOutPartition<SampledSet>> {
    check_epsilon(epsilon)?;
    if !matches!(ss.kind(), SampledKind::Rotation { .. }) {
        return Err(GeneratorError::Unsupported(
            "quantile sweep-out partitions are implemented for circle rotations".into(),
        ));
    }
    let one = BigRational::one();
    if *epsilon >= one {
        return Ok(SweepOutPartition {
            pieces: vec![SampledSet::Everything],
            measures: vec![one],
            residual_mass: BigRational::zero(),
            warnings: vec![degenerate_warning(epsilon)],
        });
    }
    let mut pieces = Vec::new();
    let mut measures = Vec::new();
    let mut lo = BigRational::zero();
    let mut len = epsilon.clone();
    for _ in 0..n_max {
        len /= BigRational::from_integer(2.into());
        let hi = &lo + &len;
        pieces.push(SampledSet::Interval(Interval::new(lo.clone(), hi.clone())?));
        measures.push(len.clone());
        lo = hi;
    }
    let residual_mass = epsilon - &lo;
    let mut lo = epsilon.clone();
    while lo < one {
        let hi = (&lo + epsilon).min(one.clone());
        pieces.push(SampledSet::Interval(Interval::new(lo.clone(), hi.clone())?));
        measures.push(&hi - &lo);
        lo = hi;
    }
    Ok(SweepOutPartition {
        pieces,
        measures,
        residual_mass,
        warnings: Vec::new(),
    })
}

/// A finite set of pairs `(n, gamma)`, `n` counted from 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint(pub BTreeSet<(usize, GroupElement)>);

impl Fingerprint {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, n: usize, g: &GroupElement) -> bool {
        self.0.contains(&(n, g.clone()))
    }
}

impl Serialize for Fingerprint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for pair in &self.0 {
            seq.serialize_element(pair)?;
        }
        seq.end()
    }
}

fn check_inputs(
    fs: &FiniteSystem,
    allocations: &[Allocation<'_, FiniteSystem>],
    sets: &[PointSet],
) -> Result<()> {
    if allocations.len() != sets.len() {
        return Err(GeneratorError::LengthMismatch {
            allocations: allocations.len(),
            sets: sets.len(),
        });
    }
    for e in sets {
        fs.check_set(e)?;
    }
    for (i, a) in allocations.iter().enumerate() {
        for (j, b) in allocations.iter().enumerate().skip(i + 1) {
            if !a.target().is_disjoint(b.target()) {
                return Err(GeneratorError::NotDisjoint { a: i + 1, b: j + 1 });
            }
        }
    }
    Ok(())
}

fn fingerprint_from_cells(
    fs: &FiniteSystem,
    cells: &[Vec<Cell>],
    sets: &[PointSet],
    x: usize,
) -> Result<Fingerprint> {
    let group = fs.group();
    let mut pairs = BTreeSet::new();
    for (k, (cells_k, e)) in cells.iter().zip(sets).enumerate() {
        for g in cells_k[x].iter() {
            let y = fs.act(&group.invert(g).map_err(SystemError::from)?, &x);
            if e.contains(y) {
                pairs.insert((k + 1, g.clone()));
            }
        }
    }
    Ok(Fingerprint(pairs))
}

/// `C_x` for one point.
pub fn fingerprint(
    fs: &FiniteSystem,
    allocations: &[Allocation<'_, FiniteSystem>],
    sets: &[PointSet],
    x: usize,
) -> Result<Fingerprint> {
    check_inputs(fs, allocations, sets)?;
    fs.check_point(x)?;
    let cells: Vec<Vec<Cell>> = allocations
        .iter()
        .map(|a| {
            let mut row = vec![Cell::default(); fs.n_points()];
            row[x] = a.cell(&x)?;
            Ok(row)
        })
        .collect::<std::result::Result<_, AllocationError>>()?;
    fingerprint_from_cells(fs, &cells, sets, x)
}

/// Positive-mass points grouped by fingerprint, in key order.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorPartition {
    blocks: BTreeMap<Fingerprint, PointSet>,
}

impl GeneratorPartition {
    pub fn blocks(&self) -> impl Iterator<Item = (&Fingerprint, &PointSet)> {
        self.blocks.iter()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, key: &Fingerprint) -> Option<&PointSet> {
        self.blocks.get(key)
    }
}

impl Serialize for GeneratorPartition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Block<'a> {
            key: &'a Fingerprint,
            points: &'a PointSet,
        }
        s.collect_seq(
            self.blocks
                .iter()
                .map(|(key, points)| Block { key, points }),
        )
    }
}

pub fn generator_partition(
    fs: &FiniteSystem,
    allocations: &[Allocation<'_, FiniteSystem>],
    sets: &[PointSet],
) -> Result<GeneratorPartition> {
    check_inputs(fs, allocations, sets)?;
    let cells: Vec<Vec<Cell>> = allocations
        .iter()
        .map(|a| Ok(a.table()?.cells()))
        .collect::<std::result::Result<_, AllocationError>>()?;
    let mut blocks: BTreeMap<Fingerprint, PointSet> = BTreeMap::new();
    for x in fs.support() {
        let key = fingerprint_from_cells(fs, &cells, sets, x)?;
        blocks
            .entry(key)
            .or_insert_with(|| PointSet::empty(fs.n_points()))
            .insert(x);
    }
    Ok(GeneratorPartition { blocks })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReconstructionReport {
    pub index: usize,
    pub reconstructed: PointSet,
    pub expected: PointSet,
    #[serde(serialize_with = "serialize_ratio")]
    pub symmetric_difference_mass: BigRational,
    pub holds: bool,
}

/// Rebuilds `E_n` (1-based `n`) from the blocks and compares it with `sets`.
pub fn reconstruct_and_verify(
    fs: &FiniteSystem,
    gp: &GeneratorPartition,
    sets: &[PointSet],
    n: usize,
) -> Result<ReconstructionReport> {
    if n == 0 || n > sets.len() {
        return Err(GeneratorError::IndexOutOfRange {
            index: n,
            len: sets.len(),
        });
    }
    let group = fs.group();
    let mut rebuilt = PointSet::empty(fs.n_points());
    for (key, block) in &gp.blocks {
        for (m, g) in &key.0 {
            if *m != n {
                continue;
            }
            let inv = group.invert(g).map_err(SystemError::from)?;
            for z in block.iter() {
                rebuilt.insert(fs.act(&inv, &z));
            }
        }
    }
    let expected = sets[n - 1].clone();
    let diff_mass = fs.measure(&rebuilt.symmetric_difference(&expected));
    Ok(ReconstructionReport {
        index: n,
        holds: diff_mass.is_zero(),
        reconstructed: rebuilt,
        expected,
        symmetric_difference_mass: diff_mass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusReport {
    /// Orbit listing for finite systems.
    pub orbits: Option<Vec<OrbitSummary>>,
    /// Orbit description for sampled systems.
    pub structure: Option<OrbitStructure>,
    pub all_positive_mass_orbits_finite: bool,
    pub note: String,
}

pub fn finite_orbit_census(fs: &FiniteSystem) -> CensusReport {
    let orbits = fs.orbit_summaries();
    let note = format!(
        "{} orbit(s), {} of positive mass",
        orbits.len(),
        orbits.iter().filter(|o| o.mass.is_positive()).count()
    );
    CensusReport {
        orbits: Some(orbits),
        structure: None,
        all_positive_mass_orbits_finite: true,
        note,
    }
}

pub fn sampled_orbit_census(ss: &SampledSystem) -> CensusReport {
    let structure = ss.orbit_structure();
    let (finite, note) = match structure {
        OrbitStructure::InfiniteByConstruction => {
            (false, "orbits infinite by construction".to_string())
        }
        OrbitStructure::Finite { size } => (true, format!("every orbit has {size} points")),
    };
    CensusReport {
        orbits: None,
        structure: Some(structure),
        all_positive_mass_orbits_finite: finite,
        note,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;
    use crate::group::Group;
    use crate::system::Turn;
    use crate::system::GOLDEN_CONJUGATE;

    fn ps(n: usize, pts: &[usize]) -> PointSet {
        PointSet::from_points(n, pts.iter().copied()).unwrap()
    }

    #[test]
    fn finite_sweep_out_packing() {
        let s = FiniteSystem::cycle(5);
        let p = sweep_out_partition_finite(&s, &ratio(1, 2)).unwrap();
        assert_eq!(p.pieces, vec![ps(5, &[0, 1]), ps(5, &[2, 3]), ps(5, &[4])]);
        assert_eq!(p.measures, vec![ratio(2, 5), ratio(2, 5), ratio(1, 5)]);
        assert!(p.residual_mass.is_zero());
        assert!(p.pieces.iter().all(|a| s.is_sweep_out(a)));
        let whole = sweep_out_partition_finite(&s, &ratio(1, 1)).unwrap();
        assert_eq!(whole.pieces, vec![PointSet::full(5)]);
        assert_eq!(whole.warnings.len(), 1);
        assert!(matches!(
            sweep_out_partition_finite(&s, &ratio(1, 10)),
            Err(GeneratorError::EpsilonTooSmall { point: 0, .. })
        ));
        assert!(matches!(
            sweep_out_partition_finite(&s, &ratio(0, 1)),
            Err(GeneratorError::NonPositiveEpsilon(_))
        ));
        let two = FiniteSystem::uniform(Group::integers(), vec![vec![1, 0, 3, 2]]).unwrap();
        assert!(matches!(
            sweep_out_partition_finite(&two, &ratio(1, 2)),
            Err(GeneratorError::Unsupported(_))
        ));
    }

    #[test]
    fn rotation_sweep_out_quantiles() {
        let ss = SampledSystem::rotation(Turn::from_decimal(GOLDEN_CONJUGATE).unwrap(), 0).unwrap();
        let p = sweep_out_partition_rotation(&ss, &ratio(1, 2), 4).unwrap();
        assert_eq!(
            &p.measures[..4],
            &[ratio(1, 4), ratio(1, 8), ratio(1, 16), ratio(1, 32)]
        );
        assert_eq!(p.residual_mass, ratio(1, 32));
        assert_eq!(p.measures[4..].to_vec(), vec![ratio(1, 2)]);
        let total: BigRational = p.measures.iter().sum();
        assert_eq!(total + &p.residual_mass, BigRational::one());
        let p20 = sweep_out_partition_rotation(&ss, &ratio(1, 2), 20).unwrap();
        assert_eq!(
            p20.residual_mass,
            ratio(1, 2) / BigRational::from_integer((1u64 << 20).into())
        );
        assert!(p20
            .measures
            .iter()
            .all(|m| m.is_positive() && *m <= ratio(1, 2)));
        let whole = sweep_out_partition_rotation(&ss, &ratio(3, 2), 4).unwrap();
        assert_eq!(whole.pieces, vec![SampledSet::Everything]);
    }

    fn cycle_instance(s: &FiniteSystem) -> (Vec<Allocation<'_, FiniteSystem>>, Vec<PointSet>) {
        let alloc = Allocation::standard(s, ps(5, &[0, 1]), u64::MAX).unwrap();
        (vec![alloc], vec![ps(5, &[0, 2])])
    }

    #[test]
    fn fingerprints_on_cycle() {
        let s = FiniteSystem::cycle(5);
        let (allocs, sets) = cycle_instance(&s);
        let z = |n: i64| Group::integers().element(&[n]).unwrap();
        let fp = |x| fingerprint(&s, &allocs, &sets, x).unwrap();
        assert_eq!(fp(0), Fingerprint([(1, z(0))].into_iter().collect()));
        assert_eq!(fp(1), Fingerprint([(1, z(-1))].into_iter().collect()));
        for x in 2..5 {
            assert!(fp(x).is_empty());
        }
        let empty = vec![PointSet::empty(5)];
        assert!((0..5).all(|x| fingerprint(&s, &allocs, &empty, x).unwrap().is_empty()));
    }

    #[test]
    fn generator_partition_on_cycle() {
        let s = FiniteSystem::cycle(5);
        let (allocs, sets) = cycle_instance(&s);
        let gp = generator_partition(&s, &allocs, &sets).unwrap();
        let blocks: Vec<Vec<usize>> = gp.blocks().map(|(_, b)| b.iter().collect()).collect();
        assert_eq!(blocks.len(), 3);
        assert!(
            blocks.contains(&vec![0])
                && blocks.contains(&vec![1])
                && blocks.contains(&vec![2, 3, 4])
        );
        let r = reconstruct_and_verify(&s, &gp, &sets, 1).unwrap();
        assert!(r.holds);
        assert_eq!(r.reconstructed, ps(5, &[0, 2]));
        assert!(matches!(
            reconstruct_and_verify(&s, &gp, &sets, 2),
            Err(GeneratorError::IndexOutOfRange { .. })
        ));

        let empty = vec![PointSet::empty(5)];
        let gp = generator_partition(&s, &allocs, &empty).unwrap();
        assert_eq!(gp.len(), 1);
        assert!(reconstruct_and_verify(&s, &gp, &empty, 1)
            .unwrap()
            .reconstructed
            .is_empty());

        let all = Allocation::standard(&s, PointSet::full(5), u64::MAX).unwrap();
        let gp = generator_partition(&s, &[all], &[PointSet::full(5)]).unwrap();
        assert_eq!(gp.len(), 1);
    }

    #[test]
    fn overlapping_targets_are_rejected() {
        let s = FiniteSystem::cycle(5);
        let a = Allocation::standard(&s, ps(5, &[0, 1]), u64::MAX).unwrap();
        let b = Allocation::standard(&s, ps(5, &[1, 2]), u64::MAX).unwrap();
        let sets = vec![PointSet::empty(5), PointSet::empty(5)];
        assert_eq!(
            generator_partition(&s, &[a, b], &sets).unwrap_err(),
            GeneratorError::NotDisjoint { a: 1, b: 2 }
        );
    }

    #[test]
    fn census() {
        let r = finite_orbit_census(&FiniteSystem::cycle(5));
        let orbits = r.orbits.unwrap();
        assert_eq!(orbits.len(), 1);
        assert_eq!(orbits[0].size, 5);
        assert!(orbits[0].mass.is_one());
        let two = FiniteSystem::uniform(Group::integers(), vec![vec![1, 2, 0, 4, 5, 3]]).unwrap();
        let sizes: Vec<usize> = finite_orbit_census(&two)
            .orbits
            .unwrap()
            .iter()
            .map(|o| o.size)
            .collect();
        assert_eq!(sizes, vec![3, 3]);
        let rot = sampled_orbit_census(&SampledSystem::golden_rotation(0));
        assert!(!rot.all_positive_mass_orbits_finite);
        assert_eq!(rot.structure, Some(OrbitStructure::InfiniteByConstruction));
    }
}
