//! Monte Carlo allocation identities on sampled systems.

use std::sync::Mutex;

use serde::Serialize;

use super::{return_time, Allocation, AllocationError, Result};
use crate::estimate::{mc_estimate, Estimate, McSettings, Sample};
use crate::system::{Region, SampledPoint, SampledSet, SampledSystem};

/// Width of the confidence bands compared by the overlap verdict.
pub const BAND_SIGMAS: f64 = 3.0;

/// Seed offset for the right-hand side, so both sides use independent draws.
const RHS_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimatedIdentity {
    pub lhs: Estimate,
    pub rhs: Estimate,
    /// Whether the 3-sigma bands of the two sides intersect.
    pub overlap: bool,
}

/// Runs `mc_estimate`, turning budget failures into abstentions and
/// reporting the first hard error.
fn estimate_with<F>(system: &SampledSystem, settings: &McSettings, eval: F) -> Result<Estimate>
where
    F: Fn(&SampledPoint) -> Result<f64> + Sync,
{
    let failure: Mutex<Option<AllocationError>> = Mutex::new(None);
    let estimate = mc_estimate(
        system,
        |p| match eval(p) {
            Ok(v) => Sample::Value(v),
            Err(e) if e.is_abstention() => Sample::Abstain,
            Err(e) => {
                failure.lock().expect("poisoned").get_or_insert(e);
                Sample::Abstain
            }
        },
        settings,
    );
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(estimate?)
}

/// Estimates both sides of `integral over A of f_kappa = integral of f`.
pub fn verify_allocation_identity_mc<F>(
    alloc: &Allocation<'_, SampledSystem>,
    f: F,
    settings: &McSettings,
) -> Result<EstimatedIdentity>
where
    F: Fn(&SampledPoint) -> f64 + Sync,
{
    let system = alloc.system;
    let lhs = estimate_with(system, settings, |x| alloc.transported(&f, x))?;
    let rhs_settings = McSettings {
        seed: settings.seed.wrapping_add(RHS_SEED_OFFSET),
        ..settings.clone()
    };
    let rhs = estimate_with(system, &rhs_settings, |x| Ok(f(x)))?;
    Ok(EstimatedIdentity {
        overlap: lhs.overlaps(&rhs, BAND_SIGMAS),
        lhs,
        rhs,
    })
}

/// Estimates `integral over A of r_A`.
pub fn classical_kac_mc(
    system: &SampledSystem,
    target: &SampledSet,
    settings: &McSettings,
    budget: u64,
) -> Result<Estimate> {
    system.check_set(target)?;
    estimate_with(system, settings, |x| {
        if target.contains(x) {
            Ok(return_time(system, target, x, budget)? as f64)
        } else {
            Ok(0.0)
        }
    })
}
