//! Monte Carlo integration over sampled systems.
//!
//! Samples are split into fixed-size chunks; chunk `k` reads stream `k` of
//! the ChaCha generator, and chunk summaries are merged in chunk order. The
//! result is therefore bit-identical whether chunks run on one thread or many.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::system::{SampledPoint, SampledSystem};

/// One integrand evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sample {
    /// A value in `[0, +inf]`.
    Value(f64),
    /// The evaluation ran out of budget.
    Abstain,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("at least 2 samples are required, got {0}")]
    TooFewSamples(u64),
    #[error(
        "{abstained} of {total} evaluations exceeded their budget (threshold fraction {threshold})"
    )]
    TooManyAbstentions {
        abstained: u64,
        total: u64,
        threshold: f64,
    },
    #[error("integrand returned {0}, expected a value in [0, +inf]")]
    InvalidValue(f64),
}

#[derive(Clone, Debug)]
pub struct McSettings {
    pub samples: u64,
    pub seed: u64,
    pub chunk_size: u64,
    /// Largest tolerated fraction of abstaining evaluations.
    pub max_abstain_fraction: f64,
    pub parallel: bool,
}

impl McSettings {
    pub fn new(samples: u64, seed: u64) -> Self {
        McSettings {
            samples,
            seed,
            chunk_size: 1 << 14,
            max_abstain_fraction: 1e-3,
            parallel: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub abstained: u64,
    pub abstain_fraction: f64,
}

impl Estimate {
    /// `|mean - target| <= k * stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }

    /// Whether the `k`-sigma bands of two estimates intersect.
    pub fn overlaps(&self, other: &Estimate, k: f64) -> bool {
        let (a_lo, a_hi) = (self.mean - k * self.stderr, self.mean + k * self.stderr);
        let (b_lo, b_hi) = (other.mean - k * other.stderr, other.mean + k * other.stderr);
        a_lo <= b_hi && b_lo <= a_hi
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Summary {
    count: u64,
    mean: f64,
    m2: f64,
    abstained: u64,
    infinite: bool,
}

impl Summary {
    fn push(&mut self, x: f64) {
        if x.is_infinite() {
            self.infinite = true;
            self.count += 1;
            return;
        }
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise merge.
    fn merge(self, other: Summary) -> Summary {
        if other.count == 0 {
            return Summary {
                abstained: self.abstained + other.abstained,
                ..self
            };
        }
        if self.count == 0 {
            return Summary {
                abstained: self.abstained + other.abstained,
                ..other
            };
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / n as f64;
        let m2 = self.m2
            + other.m2
            + delta * delta * (self.count as f64 * other.count as f64) / n as f64;
        Summary {
            count: n,
            mean,
            m2,
            abstained: self.abstained + other.abstained,
            infinite: self.infinite || other.infinite,
        }
    }
}

/// Estimates `integral f dmu` from `settings.samples` draws of the invariant
/// measure.
pub fn mc_estimate<F>(
    system: &SampledSystem,
    integrand: F,
    settings: &McSettings,
) -> Result<Estimate, EstimateError>
where
    F: Fn(&SampledPoint) -> Sample + Sync,
{
    let n = settings.samples;
    if n < 2 {
        return Err(EstimateError::TooFewSamples(n));
    }
    let chunk = settings.chunk_size.max(1);
    let chunks = n.div_ceil(chunk);
    let run_chunk = |k: u64| -> Result<Summary, EstimateError> {
        let len = chunk.min(n - k * chunk);
        let mut s = Summary::default();
        for p in system.stream(settings.seed, k, 0).take(len as usize) {
            match integrand(&p) {
                Sample::Value(v) if v >= 0.0 => s.push(v),
                Sample::Value(v) => return Err(EstimateError::InvalidValue(v)),
                Sample::Abstain => s.abstained += 1,
            }
        }
        Ok(s)
    };
    let summaries: Vec<Summary> = if settings.parallel {
        (0..chunks)
            .into_par_iter()
            .map(run_chunk)
            .collect::<Result<_, _>>()?
    } else {
        (0..chunks).map(run_chunk).collect::<Result<_, _>>()?
    };
    let total = summaries
        .into_iter()
        .fold(Summary::default(), Summary::merge);

    let abstain_fraction = total.abstained as f64 / n as f64;
    if abstain_fraction > settings.max_abstain_fraction || total.count < 2 {
        return Err(EstimateError::TooManyAbstentions {
            abstained: total.abstained,
            total: n,
            threshold: settings.max_abstain_fraction,
        });
    }
    let (mean, stderr) = if total.infinite {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let var = total.m2 / (total.count - 1) as f64;
        (total.mean, (var / total.count as f64).sqrt())
    };
    Ok(Estimate {
        mean,
        stderr,
        n_samples: total.count,
        ci95_low: mean - 1.96 * stderr,
        ci95_high: mean + 1.96 * stderr,
        abstained: total.abstained,
        abstain_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;
    use crate::system::{Region, SampledSet};

    #[test]
    fn constant_integrand_has_zero_error() {
        let s = SampledSystem::golden_rotation(1);
        let e = mc_estimate(&s, |_| Sample::Value(1.0), &McSettings::new(10_000, 1)).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
        assert_eq!(e.n_samples, 10_000);
        assert_eq!(e.ci95_low, e.ci95_high);
    }

    #[test]
    fn indicator_of_a_third() {
        let s = SampledSystem::golden_rotation(5);
        let a = SampledSet::interval(ratio(0, 1), ratio(1, 3)).unwrap();
        let e = mc_estimate(
            &s,
            |p| Sample::Value(if a.contains(p) { 1.0 } else { 0.0 }),
            &McSettings::new(1_000_000, 5),
        )
        .unwrap();
        assert!(e.within(1.0 / 3.0, 3.0), "{e:?}");
        assert!((e.ci95_high - e.mean - 1.96 * e.stderr).abs() < 1e-15);
    }

    #[test]
    fn parallel_matches_sequential_bitwise() {
        let s = SampledSystem::golden_rotation(9);
        let f = |p: &SampledPoint| match p {
            SampledPoint::Circle(t) => Sample::Value(t.to_f64().powi(2)),
            _ => unreachable!(),
        };
        let mut settings = McSettings::new(100_003, 9);
        settings.chunk_size = 1000;
        let par = mc_estimate(&s, f, &settings).unwrap();
        settings.parallel = false;
        let seq = mc_estimate(&s, f, &settings).unwrap();
        assert_eq!(par, seq);
        assert_eq!(mc_estimate(&s, f, &settings).unwrap(), seq);
    }

    #[test]
    fn abstentions_are_counted_and_limited() {
        let s = SampledSystem::golden_rotation(2);
        let half = SampledSet::interval(ratio(0, 1), ratio(1, 2)).unwrap();
        let f = |p: &SampledPoint| {
            if half.contains(p) {
                Sample::Abstain
            } else {
                Sample::Value(1.0)
            }
        };
        let err = mc_estimate(&s, f, &McSettings::new(1000, 2)).unwrap_err();
        assert!(matches!(err, EstimateError::TooManyAbstentions { .. }));
        let mut lenient = McSettings::new(1000, 2);
        lenient.max_abstain_fraction = 1.0;
        let e = mc_estimate(&s, f, &lenient).unwrap();
        assert_eq!(e.abstained + e.n_samples, 1000);
        assert!(e.abstain_fraction > 0.3);
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = SampledSystem::golden_rotation(2);
        assert!(matches!(
            mc_estimate(&s, |_| Sample::Value(1.0), &McSettings::new(1, 0)),
            Err(EstimateError::TooFewSamples(1))
        ));
        assert!(matches!(
            mc_estimate(&s, |_| Sample::Value(-1.0), &McSettings::new(10, 0)),
            Err(EstimateError::InvalidValue(_))
        ));
        let inf = mc_estimate(
            &s,
            |_| Sample::Value(f64::INFINITY),
            &McSettings::new(10, 0),
        )
        .unwrap();
        assert!(inf.mean.is_infinite());
    }
}
