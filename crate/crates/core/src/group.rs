//! Abelian groups built from `Z` and finite cyclic factors, their elements,
//! and enumerations `n -> g(n)` starting at the identity.
//!
//! Lattice groups `Z^d` are enumerated by squared Euclidean norm with ties
//! broken lexicographically, so `n -> |g(n)|` is non-decreasing. Finite
//! groups use mixed-radix order or a caller-supplied list.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use smallvec::SmallVec;
use thiserror::Error;

pub type Coords = SmallVec<[i64; 4]>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("element belongs to group {found}, expected {expected}")]
    Mismatch { expected: GroupId, found: GroupId },
    #[error("expected {expected} coordinates, got {found}")]
    Rank { expected: usize, found: usize },
    #[error("index {index} out of range for a group of order {order}")]
    OutOfRange { index: u64, order: u64 },
    #[error("cyclic factor must have order >= 1")]
    ZeroOrder,
    #[error("{0} is not supported for this group")]
    Unsupported(&'static str),
    #[error("explicit enumeration is not a bijection onto the group: {0}")]
    NotBijective(String),
    #[error("cannot parse group `{0}`; expected forms like `Z`, `Z^2`, `C5`, `C3xC4`")]
    Parse(String),
    #[error("coordinate overflow")]
    Overflow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    Integers,
    Cyclic(u64),
}

/// Identifier of an ambient group, derived from its factor list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupId(u64);

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:016x}", self.0)
    }
}

impl GroupId {
    fn of(factors: &[Factor]) -> Self {
        // FNV-1a over the factor encoding.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        feed(factors.len() as u64);
        for f in factors {
            match f {
                Factor::Integers => feed(0),
                Factor::Cyclic(n) => feed(*n),
            }
        }
        GroupId(h)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Group {
    factors: SmallVec<[Factor; 4]>,
    id: GroupId,
}

/// An element of a [`Group`]; cyclic coordinates are kept in `0..order`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    group: GroupId,
    coords: Coords,
}

impl GroupElement {
    pub fn group_id(&self) -> GroupId {
        self.group
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn norm_squared(&self) -> i64 {
        norm_squared(&self.coords)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.len() == 1 {
            return write!(f, "{}", self.coords[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.coords.iter())
    }
}

pub(crate) fn norm_squared(v: &[i64]) -> i64 {
    v.iter().map(|c| c * c).sum()
}

impl Group {
    pub fn new(factors: &[Factor]) -> Result<Self, GroupError> {
        if factors.iter().any(|f| matches!(f, Factor::Cyclic(0))) {
            return Err(GroupError::ZeroOrder);
        }
        Ok(Group {
            factors: factors.iter().copied().collect(),
            id: GroupId::of(factors),
        })
    }

    pub fn integers() -> Self {
        Self::lattice(1)
    }

    pub fn lattice(rank: usize) -> Self {
        Self::new(&vec![Factor::Integers; rank]).expect("lattice factors are valid")
    }

    pub fn cyclic(order: u64) -> Result<Self, GroupError> {
        Self::new(&[Factor::Cyclic(order)])
    }

    pub fn id(&self) -> GroupId {
        self.id
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    /// `true` for `Z^d` (including the trivial `Z^0`).
    pub fn is_lattice(&self) -> bool {
        self.factors.iter().all(|f| *f == Factor::Integers)
    }

    pub fn is_integers(&self) -> bool {
        self.factors.as_slice() == [Factor::Integers]
    }

    /// Group order, or `None` for infinite groups.
    pub fn order(&self) -> Option<u64> {
        self.factors.iter().try_fold(1u64, |acc, f| match f {
            Factor::Integers => None,
            Factor::Cyclic(n) => acc.checked_mul(*n),
        })
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            group: self.id,
            coords: SmallVec::from_elem(0, self.rank()),
        }
    }

    /// Builds an element, reducing cyclic coordinates.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement, GroupError> {
        if coords.len() != self.rank() {
            return Err(GroupError::Rank {
                expected: self.rank(),
                found: coords.len(),
            });
        }
        let coords = coords
            .iter()
            .zip(&self.factors)
            .map(|(&c, f)| reduce(c, *f))
            .collect();
        Ok(GroupElement {
            group: self.id,
            coords,
        })
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        g.group == self.id && g.coords.len() == self.rank()
    }

    fn check(&self, g: &GroupElement) -> Result<(), GroupError> {
        if g.group != self.id {
            return Err(GroupError::Mismatch {
                expected: self.id,
                found: g.group,
            });
        }
        Ok(())
    }

    pub fn compose(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(a)?;
        self.check(b)?;
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .zip(&self.factors)
            .map(|((&x, &y), f)| match f {
                Factor::Integers => x.checked_add(y).ok_or(GroupError::Overflow),
                Factor::Cyclic(n) => Ok(((x as i128 + y as i128).rem_euclid(*n as i128)) as i64),
            })
            .collect::<Result<Coords, _>>()?;
        Ok(GroupElement {
            group: self.id,
            coords,
        })
    }

    pub fn invert(&self, a: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(a)?;
        let coords = a
            .coords
            .iter()
            .zip(&self.factors)
            .map(|(&x, f)| match f {
                Factor::Integers => x.checked_neg().ok_or(GroupError::Overflow),
                Factor::Cyclic(n) => Ok(reduce(-x, Factor::Cyclic(*n))),
            })
            .collect::<Result<Coords, _>>()?;
        Ok(GroupElement {
            group: self.id,
            coords,
        })
    }

    /// `a * b^-1`.
    pub fn difference(
        &self,
        a: &GroupElement,
        b: &GroupElement,
    ) -> Result<GroupElement, GroupError> {
        self.compose(a, &self.invert(b)?)
    }
}

fn reduce(c: i64, f: Factor) -> i64 {
    match f {
        Factor::Integers => c,
        Factor::Cyclic(n) => (c as i128).rem_euclid(n as i128) as i64,
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        if self.is_lattice() {
            return if self.rank() == 1 {
                write!(f, "Z")
            } else {
                write!(f, "Z^{}", self.rank())
            };
        }
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "x")?;
            }
            match factor {
                Factor::Integers => write!(f, "Z")?,
                Factor::Cyclic(n) => write!(f, "C{n}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for Group {
    type Err = GroupError;

    /// Accepts `Z`, `Z^d`, `Cn` and products joined by `x` or `*`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GroupError::Parse(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        let mut factors = Vec::new();
        for part in compact.split(['x', '*', '×']) {
            if let Some(rest) = part.strip_prefix('Z') {
                let count = match rest.strip_prefix('^') {
                    Some(exp) => exp.parse::<usize>().map_err(|_| bad())?,
                    None if rest.is_empty() => 1,
                    None => return Err(bad()),
                };
                factors.extend(std::iter::repeat_n(Factor::Integers, count));
            } else if let Some(rest) = part.strip_prefix('C') {
                let n = rest.parse::<u64>().map_err(|_| bad())?;
                factors.push(Factor::Cyclic(n));
            } else {
                return Err(bad());
            }
        }
        Group::new(&factors)
    }
}

#[derive(Clone, Debug)]
enum OrderRule {
    /// `Z^d` by (squared norm, lexicographic coordinates).
    NormLex,
    /// Finite groups, mixed radix with the last coordinate fastest.
    MixedRadix,
    /// Finite groups, caller-supplied order.
    Explicit {
        list: Vec<GroupElement>,
        index: HashMap<GroupElement, u64>,
    },
}

/// A bijection `g` from `{0, 1, 2, ...}` onto a group with `g(0) = 1`.
#[derive(Clone, Debug)]
pub struct Enumeration {
    group: Group,
    rule: OrderRule,
}

impl Enumeration {
    pub fn norm_lex(group: &Group) -> Result<Self, GroupError> {
        if !group.is_lattice() {
            return Err(GroupError::Unsupported("norm-lex enumeration"));
        }
        Ok(Enumeration {
            group: group.clone(),
            rule: OrderRule::NormLex,
        })
    }

    pub fn mixed_radix(group: &Group) -> Result<Self, GroupError> {
        if group.order().is_none() {
            return Err(GroupError::Unsupported("mixed-radix enumeration"));
        }
        Ok(Enumeration {
            group: group.clone(),
            rule: OrderRule::MixedRadix,
        })
    }

    /// An explicit order for a finite group; must list every element once,
    /// identity first.
    pub fn explicit(group: &Group, list: Vec<GroupElement>) -> Result<Self, GroupError> {
        let order = group.order().ok_or(GroupError::Unsupported(
            "explicit enumeration of an infinite group",
        ))?;
        if list.len() as u64 != order {
            return Err(GroupError::NotBijective(format!(
                "{} elements listed, group has {order}",
                list.len()
            )));
        }
        let mut index = HashMap::with_capacity(list.len());
        for (i, g) in list.iter().enumerate() {
            group.check(g)?;
            let canonical = group.element(g.coords())?;
            if canonical != *g {
                return Err(GroupError::NotBijective(format!("{g} is not reduced")));
            }
            if index.insert(g.clone(), i as u64).is_some() {
                return Err(GroupError::NotBijective(format!("{g} listed twice")));
            }
        }
        if !list[0].is_zero() {
            return Err(GroupError::NotBijective(
                "first element is not the identity".into(),
            ));
        }
        Ok(Enumeration {
            group: group.clone(),
            rule: OrderRule::Explicit { list, index },
        })
    }

    /// Norm-lex for lattices, mixed radix for finite groups.
    pub fn standard(group: &Group) -> Result<Self, GroupError> {
        if group.is_lattice() {
            Self::norm_lex(group)
        } else {
            Self::mixed_radix(group)
        }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn is_norm_lex(&self) -> bool {
        matches!(self.rule, OrderRule::NormLex)
    }

    /// Number of elements, `None` when infinite.
    pub fn len(&self) -> Option<u64> {
        self.group.order()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn element(&self, n: u64) -> Result<GroupElement, GroupError> {
        if let Some(order) = self.group.order() {
            if n >= order {
                return Err(GroupError::OutOfRange { index: n, order });
            }
        }
        match &self.rule {
            OrderRule::NormLex if self.group.rank() == 1 => {
                // 0, -1, 1, -2, 2, ...
                let k = n.div_ceil(2) as i64;
                let v = if n % 2 == 1 { -k } else { k };
                self.group.element(&[v])
            }
            OrderRule::NormLex => Ok(self
                .iter()
                .nth(n as usize)
                .expect("lattice enumeration is infinite")),
            OrderRule::MixedRadix => {
                let mut rest = n;
                let mut coords = SmallVec::<[i64; 4]>::from_elem(0, self.group.rank());
                for (slot, f) in coords.iter_mut().zip(&self.group.factors).rev() {
                    let Factor::Cyclic(m) = f else { unreachable!() };
                    *slot = (rest % m) as i64;
                    rest /= m;
                }
                self.group.element(&coords)
            }
            OrderRule::Explicit { list, .. } => Ok(list[n as usize].clone()),
        }
    }

    pub fn index_of(&self, g: &GroupElement) -> Result<u64, GroupError> {
        self.group.check(g)?;
        match &self.rule {
            OrderRule::NormLex if self.group.rank() == 1 => {
                let v = g.coords[0];
                Ok(if v < 0 {
                    (2 * (-v) - 1) as u64
                } else {
                    (2 * v) as u64
                })
            }
            OrderRule::NormLex => {
                let s = g.norm_squared();
                let below = count_ball_below(self.group.rank(), s);
                let mut shell = shell_points(self.group.rank(), s);
                shell.sort();
                let pos = shell
                    .iter()
                    .position(|p| p.as_slice() == g.coords())
                    .expect("element lies on its own shell");
                Ok(below + pos as u64)
            }
            OrderRule::MixedRadix => {
                Ok(g.coords
                    .iter()
                    .zip(&self.group.factors)
                    .fold(0u64, |acc, (&c, f)| {
                        let Factor::Cyclic(m) = f else { unreachable!() };
                        acc * m + c as u64
                    }))
            }
            OrderRule::Explicit { index, .. } => index
                .get(g)
                .copied()
                .ok_or_else(|| GroupError::NotBijective(format!("{g} not listed"))),
        }
    }

    /// Streams `g(0), g(1), ...` without materializing the whole order.
    pub fn iter(&self) -> EnumerationIter<'_> {
        EnumerationIter {
            enumeration: self,
            next_index: 0,
            block: Vec::new(),
            block_pos: 0,
            block_lo: 0,
        }
    }
}

pub struct EnumerationIter<'a> {
    enumeration: &'a Enumeration,
    next_index: u64,
    block: Vec<Coords>,
    block_pos: usize,
    /// Lower squared-norm bound of the next block to generate.
    block_lo: i64,
}

impl Iterator for EnumerationIter<'_> {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        let e = self.enumeration;
        match e.rule {
            OrderRule::NormLex if e.group.rank() >= 2 => {
                while self.block_pos >= self.block.len() {
                    // Squared-norm blocks [0,1), [1,2), [2,4), [4,8), ...
                    let lo = self.block_lo;
                    let hi = if lo == 0 { 1 } else { lo.checked_mul(2)? };
                    self.block = annulus_points(e.group.rank(), lo, hi);
                    self.block.sort_by(|a, b| {
                        norm_squared(a).cmp(&norm_squared(b)).then_with(|| a.cmp(b))
                    });
                    self.block_pos = 0;
                    self.block_lo = hi;
                }
                let coords = self.block[self.block_pos].clone();
                self.block_pos += 1;
                self.next_index += 1;
                Some(GroupElement {
                    group: e.group.id,
                    coords,
                })
            }
            _ => {
                if let Some(order) = e.len() {
                    if self.next_index >= order {
                        return None;
                    }
                }
                let g = e.element(self.next_index).ok()?;
                self.next_index += 1;
                Some(g)
            }
        }
    }
}

fn isqrt(n: i64) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Visits every point of the cube `[-r, r]^d`.
pub(crate) fn for_each_in_cube(d: usize, r: i64, mut visit: impl FnMut(&[i64])) {
    if d == 0 {
        visit(&[]);
        return;
    }
    let mut p = vec![-r; d];
    loop {
        visit(&p);
        let mut i = d;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if p[i] < r {
                p[i] += 1;
                break;
            }
            p[i] = -r;
        }
    }
}

/// Lattice points with `lo <= |v|^2 < hi`.
fn annulus_points(d: usize, lo: i64, hi: i64) -> Vec<Coords> {
    let r = isqrt(hi - 1);
    let mut out = Vec::new();
    for_each_in_cube(d, r, |p| {
        let s = norm_squared(p);
        if s >= lo && s < hi {
            out.push(Coords::from_slice(p));
        }
    });
    out
}

/// Lattice points with `|v|^2 <= radius_sq`, in enumeration order.
pub(crate) fn ball_points(d: usize, radius_sq: i64) -> Vec<Coords> {
    let mut pts = annulus_points(d, 0, radius_sq + 1);
    pts.sort_by(|a, b| norm_squared(a).cmp(&norm_squared(b)).then_with(|| a.cmp(b)));
    pts
}

fn shell_points(d: usize, s: i64) -> Vec<Coords> {
    annulus_points(d, s, s + 1)
}

fn count_ball_below(d: usize, s: i64) -> u64 {
    if s <= 0 {
        return 0;
    }
    let mut count = 0u64;
    for_each_in_cube(d, isqrt(s - 1), |p| {
        if norm_squared(p) < s {
            count += 1;
        }
    });
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn el(g: &Group, c: &[i64]) -> GroupElement {
        g.element(c).unwrap()
    }

    #[test]
    fn compose_and_invert_examples() {
        let z2 = Group::lattice(2);
        assert_eq!(
            z2.compose(&el(&z2, &[1, 2]), &el(&z2, &[3, -1])).unwrap(),
            el(&z2, &[4, 1])
        );
        let z = Group::integers();
        assert_eq!(z.invert(&el(&z, &[5])).unwrap(), el(&z, &[-5]));
        let c5 = Group::cyclic(5).unwrap();
        assert_eq!(
            c5.compose(&el(&c5, &[3]), &el(&c5, &[4])).unwrap(),
            el(&c5, &[2])
        );
        assert_eq!(el(&c5, &[-1]).coords(), &[4]);
    }

    #[test]
    fn mismatched_groups_are_rejected() {
        let z = Group::integers();
        let c5 = Group::cyclic(5).unwrap();
        let err = z.compose(&el(&z, &[1]), &el(&c5, &[1])).unwrap_err();
        assert!(matches!(err, GroupError::Mismatch { .. }));
        assert!(matches!(z.element(&[1, 2]), Err(GroupError::Rank { .. })));
    }

    #[test]
    fn integer_enumeration_prefix() {
        let e = Enumeration::norm_lex(&Group::integers()).unwrap();
        let got: Vec<i64> = (0..5).map(|n| e.element(n).unwrap().coords()[0]).collect();
        assert_eq!(got, vec![0, -1, 1, -2, 2]);
        let streamed: Vec<i64> = e.iter().take(5).map(|g| g.coords()[0]).collect();
        assert_eq!(streamed, got);
    }

    #[test]
    fn lattice_enumeration_prefix() {
        // Brute force: sort the ball of radius^2 <= 2 by (norm^2, lex).
        let mut brute = Vec::new();
        for x in -2i64..=2 {
            for y in -2i64..=2 {
                if x * x + y * y <= 2 {
                    brute.push(vec![x, y]);
                }
            }
        }
        brute.sort_by_key(|v| (v[0] * v[0] + v[1] * v[1], v.clone()));
        let e = Enumeration::norm_lex(&Group::lattice(2)).unwrap();
        let got: Vec<Vec<i64>> = e
            .iter()
            .take(brute.len())
            .map(|g| g.coords().to_vec())
            .collect();
        assert_eq!(got, brute);
        assert_eq!(
            got[..5],
            [vec![0, 0], vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]]
        );
    }

    #[test]
    fn finite_enumeration_bounds() {
        let g = Group::from_str("C3xC4").unwrap();
        let e = Enumeration::standard(&g).unwrap();
        assert_eq!(e.element(0).unwrap(), g.identity());
        assert_eq!(e.iter().count(), 12);
        assert!(matches!(e.element(12), Err(GroupError::OutOfRange { .. })));
        for n in 0..12 {
            assert_eq!(e.index_of(&e.element(n).unwrap()).unwrap(), n);
        }
    }

    #[test]
    fn explicit_enumeration_validation() {
        let c3 = Group::cyclic(3).unwrap();
        let ok =
            Enumeration::explicit(&c3, vec![el(&c3, &[0]), el(&c3, &[2]), el(&c3, &[1])]).unwrap();
        assert_eq!(ok.element(1).unwrap(), el(&c3, &[2]));
        assert_eq!(ok.index_of(&el(&c3, &[1])).unwrap(), 2);
        assert!(
            Enumeration::explicit(&c3, vec![el(&c3, &[1]), el(&c3, &[0]), el(&c3, &[2])]).is_err()
        );
        assert!(
            Enumeration::explicit(&c3, vec![el(&c3, &[0]), el(&c3, &[0]), el(&c3, &[2])]).is_err()
        );
    }

    #[test]
    fn group_parsing_and_display() {
        assert_eq!(Group::from_str("Z").unwrap(), Group::integers());
        assert_eq!(Group::from_str("Z^2").unwrap(), Group::lattice(2));
        assert_eq!(Group::from_str("C3 x C4").unwrap().to_string(), "C3xC4");
        assert_eq!(Group::from_str("ZxC5").unwrap().rank(), 2);
        assert!(Group::from_str("Q").is_err());
        assert!(Group::from_str("C0").is_err());
    }

    #[test]
    fn round_trip_first_ten_thousand() {
        for d in 1..=3 {
            let e = Enumeration::norm_lex(&Group::lattice(d)).unwrap();
            let mut prev = 0;
            let limit = if d == 1 { 10_001 } else { 2_000 };
            for (n, g) in e.iter().take(limit).enumerate() {
                assert!(g.norm_squared() >= prev, "norm decreased at {n} in Z^{d}");
                prev = g.norm_squared();
                if d == 1 || n % 97 == 0 {
                    assert_eq!(e.index_of(&g).unwrap(), n as u64);
                }
            }
        }
    }

    #[test]
    fn round_trip_z2_ten_thousand() {
        let e = Enumeration::norm_lex(&Group::lattice(2)).unwrap();
        let all: Vec<_> = e.iter().take(10_001).collect();
        for n in (0..all.len()).step_by(37).chain([10_000]) {
            assert_eq!(e.index_of(&all[n]).unwrap(), n as u64);
            assert_eq!(e.element(n as u64).unwrap(), all[n]);
        }
        assert!(all
            .windows(2)
            .all(|w| w[0].norm_squared() <= w[1].norm_squared()));
    }

    proptest! {
        #[test]
        fn group_axioms_hold(
            a in proptest::collection::vec(-50i64..50, 3),
            b in proptest::collection::vec(-50i64..50, 3),
            c in proptest::collection::vec(-50i64..50, 3),
        ) {
            for g in [Group::lattice(3), Group::from_str("ZxC4xC7").unwrap()] {
                let (a, b, c) = (el(&g, &a), el(&g, &b), el(&g, &c));
                let ab_c = g.compose(&g.compose(&a, &b).unwrap(), &c).unwrap();
                let a_bc = g.compose(&a, &g.compose(&b, &c).unwrap()).unwrap();
                prop_assert_eq!(ab_c, a_bc);
                prop_assert_eq!(g.compose(&a, &g.identity()).unwrap(), a.clone());
                prop_assert_eq!(g.compose(&g.invert(&a).unwrap(), &a).unwrap(), g.identity());
                prop_assert_eq!(g.compose(&a, &b).unwrap(), g.compose(&b, &a).unwrap());
            }
        }
    }
}
