//! Meta-Immersion MI = R·(1 − E)·S and the smallest per-user bandwidth that
//! reaches a required MI.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covert::{ergodic_covert_rate, min_jamming_power, CovertLinkParams};
use crate::error::{domain, Error, Result};
use crate::numerics::{refine_root, Bracket};
use crate::uplink::{avg_ber, Modulation, UplinkParams};

/// Jamming power range (W) searched when a requirement asks for the jammer
/// to be re-adapted.
pub const JAMMER_SEARCH_W: (f64, f64) = (1e-6, 1e6);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImmersionInputs {
    pub rate_bps: f64,
    pub ber: f64,
    pub virtual_experience: f64,
}

pub fn meta_immersion(i: &ImmersionInputs) -> f64 {
    i.rate_bps * (1.0 - i.ber) * i.virtual_experience
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserRequirement {
    pub mi_min: f64,
    pub uplink: UplinkParams,
    pub modulation: Modulation,
    pub downlink: CovertLinkParams,
    pub s_k: f64,
    /// Solve for the covertness-constrained jamming power before sizing the
    /// bandwidth instead of using `downlink.p_j` as given.
    #[serde(default)]
    pub readapt_jammer: bool,
}

impl UserRequirement {
    /// Downlink parameters actually used for the rate.
    pub fn effective_downlink(&self) -> Result<CovertLinkParams> {
        if !self.readapt_jammer {
            return Ok(self.downlink);
        }
        // the warden link does not depend on B_k, so one solve covers every candidate
        let p_j = min_jamming_power(&self.downlink, Bracket::new(JAMMER_SEARCH_W.0, JAMMER_SEARCH_W.1)?)?;
        Ok(self.downlink.with_jamming(p_j))
    }
}

/// Smallest bandwidth (Hz) in `bracket` whose MI reaches `req.mi_min`.
pub fn basic_bandwidth(req: &UserRequirement, bracket: Bracket) -> Result<f64> {
    if !(req.mi_min > 0.0) {
        return Err(domain(format!("mi_min must be > 0, got {}", req.mi_min)));
    }
    if bracket.lo < 0.0 {
        return Err(domain("bandwidth bracket must be nonnegative"));
    }
    let ber = avg_ber(&req.uplink, req.modulation)?;
    let factor = (1.0 - ber) * req.s_k;
    if !(factor > 0.0) {
        return Err(Error::Infeasible(format!(
            "(1 - BER)·S = {factor}; no bandwidth yields positive immersion"
        )));
    }
    let downlink = req.effective_downlink()?;
    let shortfall = |b: f64| -> Result<f64> { Ok(ergodic_covert_rate(&downlink, b)? * factor - req.mi_min) };
    if shortfall(bracket.lo)? >= 0.0 {
        return Ok(bracket.lo);
    }
    let at_hi = shortfall(bracket.hi)?;
    if at_hi < 0.0 {
        return Err(Error::Infeasible(format!(
            "immersion {} at the largest bandwidth {} Hz is below the requirement {}",
            at_hi + req.mi_min,
            bracket.hi,
            req.mi_min
        )));
    }
    let r = refine_root(|b| shortfall(b).unwrap_or(f64::NAN), bracket, 1e-12 * bracket.hi)?;
    Ok(r.hi_side)
}

/// Σ basic_bandwidth over users, solved in parallel. Errors name the first
/// failing user by index.
pub fn total_basic_bandwidth(reqs: &[UserRequirement], bracket: Bracket) -> Result<f64> {
    let per_user = per_user_bandwidth(reqs, bracket)?;
    Ok(per_user.iter().sum())
}

/// Per-user basic bandwidths in input order.
pub fn per_user_bandwidth(reqs: &[UserRequirement], bracket: Bracket) -> Result<Vec<f64>> {
    let results: Vec<Result<f64>> = reqs.par_iter().map(|r| basic_bandwidth(r, bracket)).collect();
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| match e {
                Error::Infeasible(msg) => Error::Infeasible(format!("user {i}: {msg}")),
                Error::Domain(msg) => Error::Domain(format!("user {i}: {msg}")),
                other => other,
            })
        })
        .collect()
}
