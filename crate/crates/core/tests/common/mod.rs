//! Random instances and brute-force oracles shared by the integration tests.
//!
//! The oracles act with the raw generator permutations and never call the
//! library's allocation or cell code.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use kacbench::exact::ExtValue;
use kacbench::group::{Factor, Group};
use kacbench::system::{FiniteSystem, PointSet};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A finite system together with the raw data it was built from.
#[derive(Clone, Debug)]
pub struct Instance {
    pub group: Group,
    pub gens: Vec<Vec<usize>>,
    pub inverses: Vec<Vec<usize>>,
    pub masses: Vec<BigRational>,
    pub orbit_of: Vec<usize>,
    pub n_orbits: usize,
    pub system: FiniteSystem,
}

impl Instance {
    pub fn n(&self) -> usize {
        self.masses.len()
    }

    pub fn positive(&self, x: usize) -> bool {
        self.masses[x] > BigRational::from_integer(0.into())
    }

    /// `T_gamma(x)` by repeated generator steps.
    pub fn act(&self, coords: &[i64], x: usize) -> usize {
        let mut y = x;
        for (i, &c) in coords.iter().enumerate() {
            let step = if c >= 0 {
                &self.gens[i]
            } else {
                &self.inverses[i]
            };
            for _ in 0..c.unsigned_abs() {
                y = step[y];
            }
        }
        y
    }

    /// Every group element as coordinates, for finite groups, or the box
    /// `[-r, r]^d` for lattices.
    pub fn elements(&self, r: i64) -> Vec<Vec<i64>> {
        let ranges: Vec<Vec<i64>> = self
            .group
            .factors()
            .iter()
            .map(|f| match f {
                Factor::Integers => (-r..=r).collect(),
                Factor::Cyclic(n) => (0..*n as i64).collect(),
            })
            .collect();
        let mut out = vec![vec![]];
        for range in ranges {
            out = out
                .into_iter()
                .flat_map(|p| {
                    range.iter().map(move |&c| {
                        let mut q = p.clone();
                        q.push(c);
                        q
                    })
                })
                .collect();
        }
        out
    }

    /// Box radius that reaches every point of every orbit: the longest
    /// cycle of any generator.
    pub fn reach(&self) -> i64 {
        self.gens
            .iter()
            .map(|g| {
                (0..self.n())
                    .map(|x| {
                        let (mut y, mut len) = (g[x], 1);
                        while y != x {
                            y = g[y];
                            len += 1;
                        }
                        len
                    })
                    .max()
                    .unwrap_or(1)
            })
            .max()
            .unwrap_or(1)
    }

    /// Integral of `f` against the masses.
    pub fn integral(&self, f: &[ExtValue]) -> ExtValue {
        f.iter().zip(&self.masses).map(|(v, m)| v.weighted(m)).sum()
    }

    pub fn measure(&self, set: &PointSet) -> BigRational {
        set.iter().map(|x| self.masses[x].clone()).sum()
    }
}

/// Orbits of the group generated by `gens`, by breadth-first search.
fn orbits(gens: &[Vec<usize>], n: usize) -> (Vec<usize>, usize) {
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = count;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for g in gens {
                let inv = g.iter().position(|&y| y == x).unwrap();
                for y in [g[x], inv] {
                    if label[y] == usize::MAX {
                        label[y] = count;
                        queue.push_back(y);
                    }
                }
            }
        }
        count += 1;
    }
    (label, count)
}

/// Relabels points at random, assigns random orbit weights and builds the
/// system. With `ergodic`, exactly one orbit carries mass.
fn finish(rng: &mut impl Rng, group: Group, gens: Vec<Vec<usize>>, ergodic: bool) -> Instance {
    let n = gens[0].len();
    let mut relabel: Vec<usize> = (0..n).collect();
    relabel.shuffle(rng);
    let gens: Vec<Vec<usize>> = gens
        .iter()
        .map(|g| {
            let mut h = vec![0; n];
            for x in 0..n {
                h[relabel[x]] = relabel[g[x]];
            }
            h
        })
        .collect();
    let (orbit_of, n_orbits) = orbits(&gens, n);
    let mut weights: Vec<i64> = if ergodic {
        let mut w = vec![0; n_orbits];
        w[rng.random_range(0..n_orbits)] = 1;
        w
    } else {
        (0..n_orbits).map(|_| rng.random_range(0..6)).collect()
    };
    if weights.iter().all(|&w| w == 0) {
        weights[0] = 1;
    }
    let total: i64 = orbit_of.iter().map(|&o| weights[o]).sum();
    let masses: Vec<BigRational> = orbit_of.iter().map(|&o| q(weights[o], total)).collect();
    let system = FiniteSystem::new(group.clone(), masses.clone(), gens.clone())
        .expect("valid random system");
    let inverses = gens
        .iter()
        .map(|g| {
            let mut inv = vec![0; n];
            for (x, &y) in g.iter().enumerate() {
                inv[y] = x;
            }
            inv
        })
        .collect();
    Instance {
        group,
        gens,
        inverses,
        masses,
        orbit_of,
        n_orbits,
        system,
    }
}

/// `Z` acting by a random permutation on at most `max_points` points.
pub fn random_z(rng: &mut impl Rng, max_points: usize, ergodic: bool) -> Instance {
    let n = rng.random_range(1..=max_points);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut perm = vec![0; n];
    let mut start = 0;
    while start < n {
        let len = rng.random_range(1..=(n - start).min(24));
        for k in 0..len {
            perm[order[start + k]] = order[start + (k + 1) % len];
        }
        start += len;
    }
    finish(rng, Group::integers(), vec![perm], ergodic)
}

/// Disjoint blocks `Z_a x Z_b`, each generator translating by a vector.
fn translation_blocks(
    rng: &mut impl Rng,
    max_points: usize,
    mut block: impl FnMut(&mut dyn FnMut(i64) -> i64) -> (i64, i64, [i64; 2], [i64; 2]),
) -> Vec<Vec<usize>> {
    let mut gens = vec![Vec::new(), Vec::new()];
    let mut offset = 0usize;
    loop {
        let mut draw = |hi: i64| rng.random_range(0..hi);
        let (a, b, v1, v2) = block(&mut draw);
        let size = (a * b) as usize;
        if offset + size > max_points && offset > 0 {
            break;
        }
        let idx = |i: i64, j: i64| offset + (i.rem_euclid(a) * b + j.rem_euclid(b)) as usize;
        for i in 0..a {
            for j in 0..b {
                gens[0].push(idx(i + v1[0], j + v1[1]));
                gens[1].push(idx(i + v2[0], j + v2[1]));
            }
        }
        offset += size;
        if offset + 1 >= max_points || rng.random_bool(0.5) {
            break;
        }
    }
    gens
}

/// `Z^2` acting by commuting translations on blocks of a few tori.
pub fn random_z2(rng: &mut impl Rng, max_points: usize, ergodic: bool) -> Instance {
    let cap = max_points.max(4);
    let gens = translation_blocks(rng, cap, |draw| {
        let a = 1 + draw(6);
        let b = 1 + draw(6);
        (a, b, [draw(a), draw(b)], [draw(a), draw(b)])
    });
    finish(rng, Group::lattice(2), gens, ergodic)
}

/// `C_n x C_m` acting on blocks `Z_n' x Z_m'` with `n' | n`, `m' | m`.
pub fn random_product(rng: &mut impl Rng, max_points: usize, ergodic: bool) -> Instance {
    let choices = [(2i64, 3i64), (4, 2), (3, 3), (6, 4), (4, 6), (5, 2)];
    let (n, m) = choices[rng.random_range(0..choices.len())];
    let divisors = |k: i64| (1..=k).filter(move |d| k % d == 0).collect::<Vec<_>>();
    let (dn, dm) = (divisors(n), divisors(m));
    let gens = translation_blocks(rng, max_points.max((n * m) as usize), |draw| {
        let a = dn[draw(dn.len() as i64) as usize];
        let b = dm[draw(dm.len() as i64) as usize];
        (a, b, [draw(a), 0], [0, draw(b)])
    });
    let group = Group::new(&[Factor::Cyclic(n as u64), Factor::Cyclic(m as u64)]).unwrap();
    finish(rng, group, gens, ergodic)
}

/// A random set meeting every positive-mass orbit.
pub fn random_sweep_out(rng: &mut impl Rng, inst: &Instance) -> PointSet {
    let n = inst.n();
    let density = rng.random_range(0.0..0.5);
    let mut set = PointSet::empty(n);
    for x in 0..n {
        if rng.random_bool(density) {
            set.insert(x);
        }
    }
    for o in 0..inst.n_orbits {
        let members: Vec<usize> = (0..n).filter(|&x| inst.orbit_of[x] == o).collect();
        if inst.positive(members[0]) && !members.iter().any(|&x| set.contains(x)) {
            set.insert(*members.choose(rng).unwrap());
        }
    }
    set
}

/// Nonnegative rationals with an occasional `+inf`.
pub fn random_function(rng: &mut impl Rng, n: usize, allow_inf: bool) -> Vec<ExtValue> {
    (0..n)
        .map(|_| {
            if allow_inf && rng.random_bool(0.02) {
                ExtValue::Infinite
            } else {
                ExtValue::Finite(q(rng.random_range(0..30), rng.random_range(1..8)))
            }
        })
        .collect()
}

/// Least `n >= 1` with `T^n(x)` in `a`, stepping the raw permutation.
pub fn brute_return_time(inst: &Instance, a: &PointSet, x: usize) -> Option<u64> {
    let mut y = x;
    for n in 1..=inst.n() as u64 {
        y = inst.gens[0][y];
        if a.contains(y) {
            return Some(n);
        }
    }
    None
}

/// The sort key of `Z^d` vectors: squared norm, then coordinates.
pub fn norm_lex_key(v: &[i64]) -> (i64, Vec<i64>) {
    (v.iter().map(|c| c * c).sum(), v.to_vec())
}

/// Greedy allocation by scanning elements in norm-lex order (lattices) or
/// mixed-radix order (finite groups), independent of the library.
pub fn brute_greedy(inst: &Instance, a: &PointSet) -> Vec<Option<Vec<i64>>> {
    let mut elems = inst.elements(inst.reach());
    if inst.group.is_lattice() {
        elems.sort_by_key(|v| norm_lex_key(v));
    }
    (0..inst.n())
        .map(|x| elems.iter().find(|g| a.contains(inst.act(g, x))).cloned())
        .collect()
}

/// A random valid allocation: each point goes to a random target point of
/// its orbit, through a random element reaching it.
pub fn random_allocation(
    rng: &mut impl Rng,
    inst: &Instance,
    a: &PointSet,
) -> Vec<Option<Vec<i64>>> {
    let elems = inst.elements(inst.reach());
    (0..inst.n())
        .map(|x| {
            let hits: Vec<&Vec<i64>> = elems
                .iter()
                .filter(|g| a.contains(inst.act(g, x)))
                .collect();
            hits.choose(rng).map(|g| (*g).clone())
        })
        .collect()
}

/// `B(z) = {kappa(y) : T_kappa(y)(y) = z}` for every `z`.
pub fn brute_cells(inst: &Instance, kappa: &[Option<Vec<i64>>]) -> Vec<BTreeSet<Vec<i64>>> {
    let mut cells = vec![BTreeSet::new(); inst.n()];
    for (y, g) in kappa.iter().enumerate() {
        if let Some(g) = g {
            cells[inst.act(g, y)].insert(g.clone());
        }
    }
    cells
}

/// Integral over `a` of the transported function.
pub fn brute_transport_integral(
    inst: &Instance,
    kappa: &[Option<Vec<i64>>],
    f: &[ExtValue],
) -> ExtValue {
    let mut fk = vec![ExtValue::zero(); inst.n()];
    for (y, g) in kappa.iter().enumerate() {
        if let Some(g) = g {
            let z = inst.act(g, y);
            fk[z] = fk[z].clone() + &f[y];
        }
    }
    inst.integral(&fk)
}

/// Orientation of `(b - a) x (c - a)`.
fn cross(a: &[i64], b: &[i64], c: &[i64]) -> i128 {
    let (ux, uy) = ((b[0] - a[0]) as i128, (b[1] - a[1]) as i128);
    let (vx, vy) = ((c[0] - a[0]) as i128, (c[1] - a[1]) as i128);
    ux * vy - uy * vx
}

/// Whether every lattice point strictly inside the convex hull of a finite
/// planar set belongs to it. Brute force over the bounding box: a point is
/// interior iff it lies strictly left of every counter-clockwise hull edge,
/// with the hull found by checking all ordered pairs.
pub fn brute_almost_convex_2d(points: &BTreeSet<Vec<i64>>) -> bool {
    let pts: Vec<&Vec<i64>> = points.iter().collect();
    if pts.len() < 3 {
        return true;
    }
    let mut edges = Vec::new();
    for a in &pts {
        for b in &pts {
            if a == b {
                continue;
            }
            let all_left = pts.iter().all(|c| cross(a, b, c) >= 0);
            let any_strict = pts.iter().any(|c| cross(a, b, c) > 0);
            if all_left && any_strict {
                edges.push(((*a).clone(), (*b).clone()));
            }
        }
    }
    if edges.is_empty() {
        return true;
    }
    let (lo0, hi0) = (
        pts.iter().map(|p| p[0]).min().unwrap(),
        pts.iter().map(|p| p[0]).max().unwrap(),
    );
    let (lo1, hi1) = (
        pts.iter().map(|p| p[1]).min().unwrap(),
        pts.iter().map(|p| p[1]).max().unwrap(),
    );
    for x in lo0..=hi0 {
        for y in lo1..=hi1 {
            let v = vec![x, y];
            if edges.iter().all(|(a, b)| cross(a, b, &v) > 0) && !points.contains(&v) {
                return false;
            }
        }
    }
    true
}
