use std::collections::VecDeque;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{Action, PointSet, SystemError};
use crate::exact::{ratio_string, serialize_ratio};
use crate::group::{Factor, Group, GroupElement};

/// A permutation with its cycle decomposition, so powers cost O(1).
#[derive(Clone, Debug)]
struct Permutation {
    image: Vec<usize>,
    cycle_of: Vec<u32>,
    pos: Vec<u32>,
    cycles: Vec<Vec<u32>>,
}

impl Permutation {
    fn new(image: Vec<usize>) -> Option<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &y in &image {
            if y >= n || seen[y] {
                return None;
            }
            seen[y] = true;
        }
        let mut cycle_of = vec![u32::MAX; n];
        let mut pos = vec![0u32; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if cycle_of[start] != u32::MAX {
                continue;
            }
            let id = cycles.len() as u32;
            let mut cycle = Vec::new();
            let mut x = start;
            loop {
                cycle_of[x] = id;
                pos[x] = cycle.len() as u32;
                cycle.push(x as u32);
                x = image[x];
                if x == start {
                    break;
                }
            }
            cycles.push(cycle);
        }
        Some(Permutation {
            image,
            cycle_of,
            pos,
            cycles,
        })
    }

    fn power(&self, x: usize, k: i64) -> usize {
        let cycle = &self.cycles[self.cycle_of[x] as usize];
        let len = cycle.len() as i64;
        let p = (self.pos[x] as i64 + k.rem_euclid(len)) % len;
        cycle[p as usize] as usize
    }

    fn max_cycle_len(&self) -> usize {
        self.cycles.iter().map(Vec::len).max().unwrap_or(1)
    }
}

/// Orbit listing used by the census report.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OrbitSummary {
    pub representative: usize,
    pub size: usize,
    #[serde(serialize_with = "serialize_ratio")]
    pub mass: BigRational,
}

/// A finite probability space with a group acting by permutations.
///
/// One permutation per group factor: factor `i` of the group element acts
/// through the `i`-th generator. Masses must be invariant under every
/// generator and sum to exactly 1.
#[derive(Clone, Debug)]
pub struct FiniteSystem {
    group: Group,
    masses: Vec<BigRational>,
    generators: Vec<Permutation>,
}

impl FiniteSystem {
    pub fn new(
        group: Group,
        masses: Vec<BigRational>,
        generators: Vec<Vec<usize>>,
    ) -> Result<Self, SystemError> {
        let n = masses.len();
        if n == 0 {
            return Err(SystemError::Empty);
        }
        if generators.len() != group.rank() {
            return Err(SystemError::GeneratorCount {
                group: group.to_string(),
                expected: group.rank(),
                found: generators.len(),
            });
        }
        if let Some(p) = masses.iter().position(|m| m.is_negative()) {
            return Err(SystemError::NegativeMass(p));
        }
        let total: BigRational = masses.iter().sum();
        if !total.is_one() {
            return Err(SystemError::MassSum(ratio_string(&total)));
        }
        let mut perms = Vec::with_capacity(generators.len());
        for (i, image) in generators.into_iter().enumerate() {
            if image.len() != n {
                return Err(SystemError::NotPermutation {
                    generator: i,
                    n_points: n,
                });
            }
            let perm = Permutation::new(image).ok_or(SystemError::NotPermutation {
                generator: i,
                n_points: n,
            })?;
            if let Some(x) = (0..n).find(|&x| masses[perm.image[x]] != masses[x]) {
                return Err(SystemError::MassNotPreserved {
                    generator: i,
                    point: x,
                });
            }
            perms.push(perm);
        }
        // Relations are checked on generators only.
        for a in 0..perms.len() {
            for b in a + 1..perms.len() {
                let commute = (0..n).all(|x| {
                    perms[a].image[perms[b].image[x]] == perms[b].image[perms[a].image[x]]
                });
                if !commute {
                    return Err(SystemError::NotCommuting { a, b });
                }
            }
        }
        for (i, f) in group.factors().iter().enumerate() {
            if let Factor::Cyclic(order) = f {
                if perms[i].cycles.iter().any(|c| order % c.len() as u64 != 0) {
                    return Err(SystemError::WrongOrder {
                        generator: i,
                        order: *order,
                    });
                }
            }
        }
        Ok(FiniteSystem {
            group,
            masses,
            generators: perms,
        })
    }

    /// Uniform masses `1/n`. Any permutation preserves them.
    pub fn uniform(group: Group, generators: Vec<Vec<usize>>) -> Result<Self, SystemError> {
        let n = generators.first().map(Vec::len).unwrap_or(1);
        let m = BigRational::new(1.into(), (n as i64).into());
        Self::new(group, vec![m; n], generators)
    }

    /// `Z` acting by `x -> x + 1 mod n` with uniform masses.
    pub fn cycle(n: usize) -> Self {
        Self::uniform(
            Group::integers(),
            vec![(0..n).map(|x| (x + 1) % n).collect()],
        )
        .expect("a single cycle is a valid system")
    }

    pub fn n_points(&self) -> usize {
        self.masses.len()
    }

    pub fn mass(&self, x: usize) -> &BigRational {
        &self.masses[x]
    }

    pub fn masses(&self) -> &[BigRational] {
        &self.masses
    }

    pub fn generator(&self, i: usize) -> &[usize] {
        &self.generators[i].image
    }

    /// Longest cycle of generator `i`.
    pub fn max_cycle_len(&self, i: usize) -> usize {
        self.generators[i].max_cycle_len()
    }

    pub fn check_point(&self, x: usize) -> Result<(), SystemError> {
        if x >= self.n_points() {
            return Err(SystemError::PointOutOfRange {
                point: x,
                n_points: self.n_points(),
            });
        }
        Ok(())
    }

    pub fn check_set(&self, set: &PointSet) -> Result<(), SystemError> {
        if set.universe() != self.n_points() {
            return Err(SystemError::SetMismatch(format!(
                "set over {} points, system has {}",
                set.universe(),
                self.n_points()
            )));
        }
        Ok(())
    }

    pub fn measure(&self, set: &PointSet) -> BigRational {
        set.iter().map(|p| &self.masses[p]).sum()
    }

    pub fn is_null(&self, x: usize) -> bool {
        self.masses[x].is_zero()
    }

    /// Points of positive mass.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_points()).filter(|&x| !self.is_null(x))
    }

    /// Closure of `{x}` under the generators and their inverses, sorted.
    pub fn orbit(&self, x: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n_points()];
        let mut queue = VecDeque::from([x]);
        seen[x] = true;
        let mut out = Vec::new();
        while let Some(y) = queue.pop_front() {
            out.push(y);
            for g in &self.generators {
                for z in [g.power(y, 1), g.power(y, -1)] {
                    if !seen[z] {
                        seen[z] = true;
                        queue.push_back(z);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Orbit label of every point; labels are numbered by smallest member.
    pub fn orbit_labels(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n_points()];
        let mut next = 0;
        for x in 0..self.n_points() {
            if label[x] == usize::MAX {
                for y in self.orbit(x) {
                    label[y] = next;
                }
                next += 1;
            }
        }
        label
    }

    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let labels = self.orbit_labels();
        let count = labels.iter().max().map_or(0, |m| m + 1);
        let mut out = vec![Vec::new(); count];
        for (x, &l) in labels.iter().enumerate() {
            out[l].push(x);
        }
        out
    }

    pub fn orbit_summaries(&self) -> Vec<OrbitSummary> {
        self.orbits()
            .into_iter()
            .map(|o| OrbitSummary {
                representative: o[0],
                size: o.len(),
                mass: o.iter().map(|&p| &self.masses[p]).sum(),
            })
            .collect()
    }

    /// Union of all translates of `set`: every orbit meeting it.
    pub fn saturation(&self, set: &PointSet) -> PointSet {
        let labels = self.orbit_labels();
        let count = labels.iter().max().map_or(0, |m| m + 1);
        let mut hit = vec![false; count];
        for p in set.iter() {
            hit[labels[p]] = true;
        }
        PointSet::from_mask(labels.iter().map(|&l| hit[l]).collect())
    }

    /// Every positive-mass orbit meets `set`.
    pub fn is_sweep_out(&self, set: &PointSet) -> bool {
        let sat = self.saturation(set);
        self.support().all(|x| sat.contains(x))
    }

    /// All positive mass lies on a single orbit.
    pub fn is_ergodic(&self) -> bool {
        let labels = self.orbit_labels();
        let mut carrying = self.support().map(|x| labels[x]);
        let first = carrying.next();
        first.is_some() && carrying.all(|l| Some(l) == first)
    }
}

impl Action for FiniteSystem {
    type Point = usize;
    type Set = PointSet;

    fn group(&self) -> &Group {
        &self.group
    }

    fn act(&self, g: &GroupElement, x: &usize) -> usize {
        g.coords().iter().zip(&self.generators).fold(
            *x,
            |y, (&k, perm)| if k == 0 { y } else { perm.power(y, k) },
        )
    }

    fn shift(&self, x: &usize, n: i64) -> usize {
        self.generators[0].power(*x, n)
    }

    fn point_index(&self, x: &usize) -> Option<usize> {
        Some(*x)
    }

    fn finite_size(&self) -> Option<usize> {
        Some(self.n_points())
    }

    fn point_at(&self, i: usize) -> Option<usize> {
        (i < self.n_points()).then_some(i)
    }

    fn validate_set(&self, set: &PointSet) -> Result<(), SystemError> {
        self.check_set(set)
    }

    fn sweeps_out(&self, set: &PointSet) -> Option<bool> {
        Some(self.is_sweep_out(set))
    }

    // On an orbit each generator acts with cycles of one common length at
    // most its longest cycle, so every hit reduces into that box.
    fn hit_search_radius_sq(&self) -> Option<i64> {
        Some(
            (0..self.generators.len())
                .map(|i| (self.max_cycle_len(i) as i64).pow(2))
                .sum(),
        )
    }
}
