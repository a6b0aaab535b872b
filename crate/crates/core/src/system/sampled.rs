use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use super::{Action, Region, SystemError};
use crate::exact::{parse_rational, ratio_string};
use crate::group::{Group, GroupElement};

/// `(sqrt(5) - 1) / 2` to 64 decimal places.
pub const GOLDEN_CONJUGATE: &str =
    "0.6180339887498948482045868343656381177203091798057628621354486227";

/// A point of the circle `R/Z` in 64-bit fixed point: `Turn(t)` is `t / 2^64`.
///
/// Rotations become wrapping additions, so `T_{m+n} = T_m T_n` holds exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Turn(pub u64);

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

impl Turn {
    /// `floor(frac(r) * 2^64)`.
    pub fn from_rational(r: &BigRational) -> Turn {
        let frac = r - r.floor();
        let scaled = (frac * BigRational::from_integer(BigInt::one() << 64u32)).floor();
        Turn(scaled.to_integer().to_u64().unwrap_or(u64::MAX))
    }

    /// Parses a decimal or fraction and keeps its fractional part.
    pub fn from_decimal(text: &str) -> Result<Turn, SystemError> {
        parse_rational(text)
            .map(|r| Turn::from_rational(&r))
            .map_err(|e| SystemError::Sampled(e.to_string()))
    }

    pub fn from_f64(x: f64) -> Turn {
        let frac = x - x.floor();
        Turn((frac * TWO_POW_64) as u64)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / TWO_POW_64
    }

    pub fn add_multiple(self, alpha: Turn, n: i64) -> Turn {
        Turn(self.0.wrapping_add(alpha.0.wrapping_mul(n as u64)))
    }
}

/// Fixed-point threshold `ceil(r * 2^64)` for `r` in `[0, 1]`.
fn threshold(r: &BigRational) -> u128 {
    let scaled = (r * BigRational::from_integer(BigInt::one() << 64u32)).ceil();
    scaled.to_integer().to_u128().unwrap_or(0)
}

/// Half-open arc `[lo, hi)` of the circle with rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: BigRational,
    hi: BigRational,
    lo_fixed: u128,
    hi_fixed: u128,
}

impl Interval {
    pub fn new(lo: BigRational, hi: BigRational) -> Result<Self, SystemError> {
        if lo.is_negative() || hi > BigRational::one() || lo > hi {
            return Err(SystemError::Sampled(format!(
                "interval [{}, {}) must satisfy 0 <= lo <= hi <= 1",
                ratio_string(&lo),
                ratio_string(&hi)
            )));
        }
        Ok(Interval {
            lo_fixed: threshold(&lo),
            hi_fixed: threshold(&hi),
            lo,
            hi,
        })
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn length(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, t: Turn) -> bool {
        let t = u128::from(t.0);
        t >= self.lo_fixed && t < self.hi_fixed
    }
}

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Interval", 2)?;
        st.serialize_field("lo", &ratio_string(&self.lo))?;
        st.serialize_field("hi", &ratio_string(&self.hi))?;
        st.end()
    }
}

/// A point of the dyadic odometer, the 2-adic integers with `T(x) = x + 1`.
///
/// Low digits are stored explicitly; higher digits are a pure function of
/// `tail_seed` and are materialized only when a carry reaches them.
#[derive(Clone, Debug)]
pub struct OdometerPoint {
    words: Vec<u64>,
    tail_seed: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl OdometerPoint {
    pub fn new(words: Vec<u64>, tail_seed: u64) -> Self {
        OdometerPoint { words, tail_seed }
    }

    fn word(&self, k: usize) -> u64 {
        match self.words.get(k) {
            Some(&w) => w,
            None => splitmix64(self.tail_seed ^ (k as u64).wrapping_mul(0xd1b5_4a32_d192_ed03)),
        }
    }

    /// Binary digit `i`, least significant first.
    pub fn digit(&self, i: usize) -> bool {
        self.word(i / 64) >> (i % 64) & 1 == 1
    }

    fn materialize(&mut self, k: usize) {
        while self.words.len() <= k {
            let w = self.word(self.words.len());
            self.words.push(w);
        }
    }

    pub fn add(&self, n: i64) -> OdometerPoint {
        let mut p = self.clone();
        let mut k = 0;
        if n >= 0 {
            let mut carry = n as u64;
            while carry != 0 {
                p.materialize(k);
                let (s, overflow) = p.words[k].overflowing_add(carry);
                p.words[k] = s;
                carry = u64::from(overflow);
                k += 1;
            }
        } else {
            let mut borrow = n.unsigned_abs();
            while borrow != 0 {
                p.materialize(k);
                let (s, underflow) = p.words[k].overflowing_sub(borrow);
                p.words[k] = s;
                borrow = u64::from(underflow);
                k += 1;
            }
        }
        p
    }
}

impl PartialEq for OdometerPoint {
    fn eq(&self, other: &Self) -> bool {
        let n = self.words.len().max(other.words.len());
        self.tail_seed == other.tail_seed && (0..n).all(|k| self.word(k) == other.word(k))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SampledKind {
    /// `x -> x + alpha` on the circle.
    Rotation { alpha: Turn },
    /// `Z^d` acting on the `d`-torus, generator `i` shifting coordinate `i`.
    Torus { alpha: Vec<Turn> },
    /// Adding machine on binary sequences; `depth` digits are drawn eagerly.
    Odometer { depth: u32 },
    /// `x -> x + 1 mod n` on `n` equally weighted points.
    Cyclic { n: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum SampledPoint {
    Circle(Turn),
    Torus(Vec<Turn>),
    Odometer(OdometerPoint),
    Cyclic(u64),
}

/// A measurable set with closed-form measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampledSet {
    Interval(Interval),
    Box(Vec<Interval>),
    /// Cylinder fixed by the first digits, least significant first.
    Cylinder(Vec<bool>),
    Residues {
        n: u64,
        members: Vec<u64>,
    },
    /// The whole space.
    Everything,
}

impl SampledSet {
    pub fn interval(lo: BigRational, hi: BigRational) -> Result<Self, SystemError> {
        Interval::new(lo, hi).map(SampledSet::Interval)
    }

    pub fn measure(&self) -> BigRational {
        match self {
            SampledSet::Interval(i) => i.length(),
            SampledSet::Box(sides) => sides.iter().map(Interval::length).product(),
            SampledSet::Cylinder(prefix) => {
                BigRational::new(BigInt::one(), BigInt::one() << prefix.len())
            }
            SampledSet::Residues { n, members } => {
                let mut m = members.clone();
                m.sort_unstable();
                m.dedup();
                BigRational::new(BigInt::from(m.len()), BigInt::from(*n))
            }
            SampledSet::Everything => BigRational::one(),
        }
    }
}

impl Region<SampledPoint> for SampledSet {
    fn contains(&self, p: &SampledPoint) -> bool {
        match (self, p) {
            (SampledSet::Everything, _) => true,
            (SampledSet::Interval(i), SampledPoint::Circle(t)) => i.contains(*t),
            (SampledSet::Box(sides), SampledPoint::Torus(x)) => {
                sides.len() == x.len() && sides.iter().zip(x).all(|(s, t)| s.contains(*t))
            }
            (SampledSet::Cylinder(prefix), SampledPoint::Odometer(x)) => {
                prefix.iter().enumerate().all(|(i, &d)| x.digit(i) == d)
            }
            (SampledSet::Residues { members, .. }, SampledPoint::Cyclic(x)) => members.contains(x),
            _ => false,
        }
    }
}

/// Orbit census entry for a sampled system.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "orbits")]
pub enum OrbitStructure {
    InfiniteByConstruction,
    Finite { size: u64 },
}

/// A generative ergodic system with reproducible sampling from its
/// invariant measure.
#[derive(Clone, Debug)]
pub struct SampledSystem {
    kind: SampledKind,
    group: Group,
    seed: u64,
}

impl SampledSystem {
    pub fn new(kind: SampledKind, seed: u64) -> Result<Self, SystemError> {
        let group = match &kind {
            SampledKind::Rotation { alpha } => {
                if alpha.0 == 0 {
                    return Err(SystemError::Sampled(
                        "rotation number must be non-zero".into(),
                    ));
                }
                Group::integers()
            }
            SampledKind::Torus { alpha } => {
                if alpha.is_empty() || alpha.iter().any(|a| a.0 == 0) {
                    return Err(SystemError::Sampled(
                        "torus needs at least one non-zero translation per axis".into(),
                    ));
                }
                Group::lattice(alpha.len())
            }
            SampledKind::Odometer { depth } => {
                if *depth == 0 {
                    return Err(SystemError::Sampled(
                        "odometer depth must be positive".into(),
                    ));
                }
                Group::integers()
            }
            SampledKind::Cyclic { n } => {
                if *n == 0 {
                    return Err(SystemError::Sampled("cycle length must be positive".into()));
                }
                Group::integers()
            }
        };
        Ok(SampledSystem { kind, group, seed })
    }

    pub fn rotation(alpha: Turn, seed: u64) -> Result<Self, SystemError> {
        Self::new(SampledKind::Rotation { alpha }, seed)
    }

    /// Rotation by `(sqrt(5) - 1) / 2`.
    pub fn golden_rotation(seed: u64) -> Self {
        let alpha = Turn::from_decimal(GOLDEN_CONJUGATE).expect("constant parses");
        Self::rotation(alpha, seed).expect("golden rotation is valid")
    }

    pub fn kind(&self) -> &SampledKind {
        &self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SampledSystem {
            seed,
            ..self.clone()
        }
    }

    fn odometer_words(depth: u32) -> usize {
        (depth as usize).div_ceil(64)
    }

    /// ChaCha words consumed by one draw; fixed per system so draw `i` of a
    /// stream can be reached by seeking.
    fn words_per_draw(&self) -> u128 {
        match &self.kind {
            SampledKind::Rotation { .. } | SampledKind::Cyclic { .. } => 2,
            SampledKind::Torus { alpha } => 2 * alpha.len() as u128,
            SampledKind::Odometer { depth } => 2 * (Self::odometer_words(*depth) as u128 + 1),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> SampledPoint {
        match &self.kind {
            SampledKind::Rotation { .. } => SampledPoint::Circle(Turn(rng.next_u64())),
            SampledKind::Torus { alpha } => {
                SampledPoint::Torus(alpha.iter().map(|_| Turn(rng.next_u64())).collect())
            }
            SampledKind::Odometer { depth } => {
                let words = (0..Self::odometer_words(*depth))
                    .map(|_| rng.next_u64())
                    .collect();
                SampledPoint::Odometer(OdometerPoint::new(words, rng.next_u64()))
            }
            SampledKind::Cyclic { n } => {
                // Multiply-shift reduction; bias at most n / 2^64.
                let x = ((u128::from(rng.next_u64()) * u128::from(*n)) >> 64) as u64;
                SampledPoint::Cyclic(x)
            }
        }
    }

    /// Draws starting at `start` of stream `stream` under `seed`.
    pub fn stream(&self, seed: u64, stream: u64, start: u64) -> SampleStream<'_> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng.set_word_pos(u128::from(start) * self.words_per_draw());
        SampleStream { system: self, rng }
    }

    /// Draw `index` of `stream` under the system's own seed.
    pub fn sample(&self, stream: u64, index: u64) -> SampledPoint {
        self.stream(self.seed, stream, index)
            .next()
            .expect("sample streams are infinite")
    }

    pub fn check_set(&self, set: &SampledSet) -> Result<(), SystemError> {
        let ok = match (&self.kind, set) {
            (_, SampledSet::Everything) => true,
            (SampledKind::Rotation { .. }, SampledSet::Interval(_)) => true,
            (SampledKind::Torus { alpha }, SampledSet::Box(sides)) => sides.len() == alpha.len(),
            (SampledKind::Odometer { .. }, SampledSet::Cylinder(_)) => true,
            (SampledKind::Cyclic { n }, SampledSet::Residues { n: m, members }) => {
                n == m && members.iter().all(|x| x < n)
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(SystemError::SetMismatch(format!(
                "{set:?} is not a set of the {:?} system",
                self.kind
            )))
        }
    }

    pub fn orbit_structure(&self) -> OrbitStructure {
        match &self.kind {
            SampledKind::Cyclic { n } => OrbitStructure::Finite { size: *n },
            _ => OrbitStructure::InfiniteByConstruction,
        }
    }
}

pub struct SampleStream<'a> {
    system: &'a SampledSystem,
    rng: ChaCha8Rng,
}

impl Iterator for SampleStream<'_> {
    type Item = SampledPoint;

    fn next(&mut self) -> Option<SampledPoint> {
        Some(self.system.draw(&mut self.rng))
    }
}

impl Action for SampledSystem {
    type Point = SampledPoint;
    type Set = SampledSet;

    fn group(&self) -> &Group {
        &self.group
    }

    fn act(&self, g: &GroupElement, x: &SampledPoint) -> SampledPoint {
        let c = g.coords();
        match (&self.kind, x) {
            (SampledKind::Rotation { alpha }, SampledPoint::Circle(t)) => {
                SampledPoint::Circle(t.add_multiple(*alpha, c[0]))
            }
            (SampledKind::Torus { alpha }, SampledPoint::Torus(t)) => SampledPoint::Torus(
                t.iter()
                    .zip(alpha)
                    .zip(c)
                    .map(|((t, a), &k)| t.add_multiple(*a, k))
                    .collect(),
            ),
            (SampledKind::Odometer { .. }, SampledPoint::Odometer(p)) => {
                SampledPoint::Odometer(p.add(c[0]))
            }
            (SampledKind::Cyclic { n }, SampledPoint::Cyclic(p)) => {
                let n = *n as i128;
                SampledPoint::Cyclic(((*p as i128 + c[0] as i128).rem_euclid(n)) as u64)
            }
            _ => panic!("point {x:?} does not belong to the {:?} system", self.kind),
        }
    }

    fn validate_set(&self, set: &SampledSet) -> Result<(), SystemError> {
        self.check_set(set)
    }

    // Every catalog system is ergodic.
    fn sweeps_out(&self, set: &SampledSet) -> Option<bool> {
        Some(set.measure() > BigRational::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn z(n: i64) -> GroupElement {
        Group::integers().element(&[n]).unwrap()
    }

    #[test]
    fn cyclic_apply() {
        let s = SampledSystem::new(SampledKind::Cyclic { n: 5 }, 1).unwrap();
        assert_eq!(
            s.act(&z(1), &SampledPoint::Cyclic(4)),
            SampledPoint::Cyclic(0)
        );
        assert_eq!(
            s.act(&z(-6), &SampledPoint::Cyclic(0)),
            SampledPoint::Cyclic(4)
        );
    }

    #[test]
    fn rotation_apply_matches_fractional_part() {
        let alpha = Turn::from_decimal(GOLDEN_CONJUGATE).unwrap();
        let s = SampledSystem::rotation(alpha, 0).unwrap();
        let t = Turn::from_f64(0.25);
        for n in [-1000i64, -3, 0, 1, 7, 12345] {
            let SampledPoint::Circle(got) = s.act(&z(n), &SampledPoint::Circle(t)) else {
                panic!()
            };
            let expected = (0.25 + n as f64 * alpha.to_f64()).rem_euclid(1.0);
            assert!((got.to_f64() - expected).abs() < 1e-9, "n = {n}");
        }
        // The group law is exact in fixed point.
        let x = SampledPoint::Circle(t);
        assert_eq!(s.act(&z(5), &s.act(&z(-2), &x)), s.act(&z(3), &x));
        assert_eq!(s.act(&z(0), &x), x);
    }

    #[test]
    fn torus_apply_example() {
        let a = Turn::from_decimal("0.3").unwrap();
        let s = SampledSystem::new(SampledKind::Torus { alpha: vec![a, a] }, 0).unwrap();
        let g = Group::lattice(2).element(&[1, 1]).unwrap();
        let x = SampledPoint::Torus(vec![
            Turn::from_decimal("0.2").unwrap(),
            Turn::from_decimal("0.9").unwrap(),
        ]);
        let SampledPoint::Torus(y) = s.act(&g, &x) else {
            panic!()
        };
        assert!((y[0].to_f64() - 0.5).abs() < 1e-15);
        assert!((y[1].to_f64() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn odometer_carries_into_lazy_digits() {
        let p = OdometerPoint::new(vec![u64::MAX], 77);
        let q = p.add(1);
        assert!(!q.digit(0) && !q.digit(63));
        assert_eq!(q.digit(64), !p.digit(64));
        assert_eq!(q.add(-1), p);
        let r = OdometerPoint::new(vec![5], 3);
        assert_eq!(r.add(10).add(-7).add(-3), r);
        // Cylinder [1]: odd numbers; T flips membership of digit 0.
        let odd = SampledSet::Cylinder(vec![true]);
        let x = SampledPoint::Odometer(r.clone());
        assert!(odd.contains(&x));
        let s = SampledSystem::new(SampledKind::Odometer { depth: 64 }, 0).unwrap();
        assert!(!odd.contains(&s.act(&z(1), &x)));
    }

    #[test]
    fn interval_membership_is_exact() {
        let i = Interval::new(ratio(0, 1), ratio(1, 3)).unwrap();
        assert!(i.contains(Turn(0)));
        assert!(!i.contains(Turn::from_rational(&ratio(1, 3)).add_multiple(Turn(1), 1)));
        assert!(i.contains(Turn(threshold(&ratio(1, 3)) as u64 - 1)));
        assert!(!i.contains(Turn(threshold(&ratio(1, 3)) as u64)));
        let full = Interval::new(ratio(0, 1), ratio(1, 1)).unwrap();
        assert!(full.contains(Turn(u64::MAX)));
        assert!(Interval::new(ratio(1, 2), ratio(1, 3)).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_seekable() {
        let s = SampledSystem::golden_rotation(42);
        let direct = s.sample(3, 10);
        let streamed = s.stream(42, 3, 0).nth(10).unwrap();
        assert_eq!(direct, streamed);
        assert_eq!(s.sample(3, 10), direct);
        assert_ne!(s.sample(4, 10), direct);
        let odo = SampledSystem::new(SampledKind::Odometer { depth: 100 }, 9).unwrap();
        assert_eq!(odo.sample(0, 5), odo.stream(9, 0, 2).nth(3).unwrap());
    }

    #[test]
    fn rotation_samples_are_uniform() {
        let s = SampledSystem::golden_rotation(7);
        let n = 1_000_000;
        let xs: Vec<f64> = s
            .stream(7, 0, 0)
            .take(n)
            .map(|p| match p {
                SampledPoint::Circle(t) => t.to_f64(),
                _ => unreachable!(),
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let stderr = (var / n as f64).sqrt();
        assert!(
            (mean - 0.5).abs() < 3.0 * stderr,
            "mean {mean} stderr {stderr}"
        );
    }

    #[test]
    fn torus_box_frequency() {
        let a = Turn::from_decimal("0.41421356237309504880").unwrap();
        let b = Turn::from_decimal("0.73205080756887729352").unwrap();
        let s = SampledSystem::new(SampledKind::Torus { alpha: vec![a, b] }, 11).unwrap();
        let half = Interval::new(ratio(0, 1), ratio(1, 2)).unwrap();
        let quarter = SampledSet::Box(vec![half.clone(), half]);
        assert_eq!(quarter.measure(), ratio(1, 4));
        let n = 1_000_000;
        let hits = s
            .stream(11, 0, 0)
            .take(n)
            .filter(|p| quarter.contains(p))
            .count();
        let p = hits as f64 / n as f64;
        let stderr = (p * (1.0 - p) / n as f64).sqrt();
        assert!((p - 0.25).abs() < 3.0 * stderr, "p {p} stderr {stderr}");
    }

    #[test]
    fn set_measures_and_checks() {
        assert_eq!(
            SampledSet::Cylinder(vec![true, false, true]).measure(),
            ratio(1, 8)
        );
        let res = SampledSet::Residues {
            n: 5,
            members: vec![0, 1, 1],
        };
        assert_eq!(res.measure(), ratio(2, 5));
        let cyc = SampledSystem::new(SampledKind::Cyclic { n: 5 }, 0).unwrap();
        assert!(cyc.check_set(&res).is_ok());
        assert!(cyc.check_set(&SampledSet::Cylinder(vec![true])).is_err());
        assert_eq!(cyc.orbit_structure(), OrbitStructure::Finite { size: 5 });
        assert_eq!(
            SampledSystem::golden_rotation(0).orbit_structure(),
            OrbitStructure::InfiniteByConstruction
        );
    }
}
