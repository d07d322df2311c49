//! Warden detection error, jammer power adaptation and the ergodic covert
//! downlink rate.
//!
//! The warden runs a radiometer: it compares received power against a
//! threshold ε. Under the null hypothesis it sees jamming plus noise
//! (`p_j·|h_jw|² + σ²_aw`); under the alternative the access point's signal
//! `p_a·|h_aw|²` is added. The detection error probability is the sum of the
//! false-alarm and miss-detection probabilities, each computed from its
//! defining probability integral.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fading::{AlphaMuParams, FisherFParams};
use crate::numerics::{
    integrate_interval, integrate_semi_infinite, minimize_scalar, refine_root, Bracket,
    QuadratureSpec,
};
use crate::units::THERMAL_NOISE_DBM_PER_HZ;

/// Points in the coarse threshold scan that seeds the golden-section refine.
const THRESHOLD_GRID: usize = 96;
/// Relative width at which the threshold refine stops.
const THRESHOLD_REL_TOL: f64 = 1e-9;
/// Relative tolerance on the jamming power root.
const JAMMER_REL_TOL: f64 = 1e-9;

const DEP_QUADRATURE: QuadratureSpec = QuadratureSpec {
    abs_tol: 1e-12,
    rel_tol: 1e-10,
    max_subdivisions: 2000,
};
const RATE_INNER_QUADRATURE: QuadratureSpec = QuadratureSpec {
    abs_tol: 1e-14,
    rel_tol: 1e-10,
    max_subdivisions: 2000,
};
const RATE_OUTER_QUADRATURE: QuadratureSpec = QuadratureSpec {
    abs_tol: 1e-13,
    rel_tol: 1e-9,
    max_subdivisions: 2000,
};

/// Downlink and warden link parameters. Powers are linear watts;
/// `sigma2_ak_per_hz` is a spectral density in W/Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovertLinkParams {
    pub p_a: f64,
    pub p_j: f64,
    pub sigma2_aw: f64,
    pub sigma2_ak_per_hz: f64,
    pub h_jw: AlphaMuParams,
    pub h_aw: FisherFParams,
    pub h_jk: AlphaMuParams,
    pub h_ak: FisherFParams,
    pub delta: f64,
}

impl CovertLinkParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(domain(format!("{name} must be finite and >= 0, got {v}")))
            }
        };
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(domain(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        nonneg("p_a", self.p_a)?;
        nonneg("p_j", self.p_j)?;
        pos("sigma2_aw", self.sigma2_aw)?;
        pos("sigma2_ak_per_hz", self.sigma2_ak_per_hz)?;
        self.h_jw.validate()?;
        self.h_aw.validate()?;
        self.h_jk.validate()?;
        self.h_ak.validate()?;
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(domain(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }

    pub fn with_jamming(&self, p_j: f64) -> Self {
        Self { p_j, ..*self }
    }

    /// Upper end of the warden's threshold search:
    /// σ²_aw + 20·(p_a·κ̄_aw + p_j·γ̄_jw).
    pub fn default_search_hi(&self) -> f64 {
        self.sigma2_aw + 20.0 * (self.p_a * self.h_aw.mean + self.p_j * self.h_jw.mean)
    }
}

/// False alarm, miss detection and their sum at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionOutcome {
    pub false_alarm: f64,
    pub miss_detection: f64,
    /// FA + MD; lies in [0, 2] in general, at most 1 at the warden optimum.
    pub dep: f64,
    pub epsilon: f64,
}

/// CDF of the jamming power p_j·|h_jw|² at `y`.
fn jamming_power_cdf(p: &CovertLinkParams, y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if p.p_j == 0.0 {
        1.0
    } else {
        p.h_jw.cdf_raw(y / p.p_j)
    }
}

/// Pr(p_j·|h_jw|² + σ²_aw > ε).
pub fn false_alarm_prob(p: &CovertLinkParams, epsilon: f64) -> f64 {
    let y = epsilon - p.sigma2_aw;
    if y <= 0.0 {
        return 1.0;
    }
    1.0 - jamming_power_cdf(p, y)
}

/// Pr(p_a·|h_aw|² + p_j·|h_jw|² + σ²_aw < ε), by the convolution
/// F_Y2(y) = ∫₀^{y/p_a} F_Y1(y − p_a·u) f_aw(u) du.
pub fn miss_detection_prob(p: &CovertLinkParams, epsilon: f64) -> Result<f64> {
    let y = epsilon - p.sigma2_aw;
    if y <= 0.0 {
        return Ok(0.0);
    }
    if p.p_a == 0.0 {
        return Ok(jamming_power_cdf(p, y));
    }
    if p.p_j == 0.0 {
        return p.h_aw.cdf(y / p.p_a);
    }
    let upper = y / p.p_a;
    let scale = p.h_aw.mean;
    let integrand = |u: f64| {
        let f = p.h_aw.pdf_raw(u);
        if f == 0.0 {
            0.0
        } else {
            jamming_power_cdf(p, y - p.p_a * u) * f
        }
    };
    // decade breakpoints keep the bulk of f_aw resolved when y/p_a is huge
    let mut total = 0.0;
    let mut a = 0.0;
    let mut b = scale;
    while a < upper {
        let end = b.min(upper);
        total += integrate_interval(integrand, a, end, &DEP_QUADRATURE)?.value;
        a = end;
        b *= 10.0;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Detection error probability at threshold `epsilon`.
pub fn dep(p: &CovertLinkParams, epsilon: f64) -> Result<DetectionOutcome> {
    let false_alarm = false_alarm_prob(p, epsilon);
    if !false_alarm.is_finite() {
        return Err(Error::NonFinite("false alarm probability"));
    }
    let miss_detection = miss_detection_prob(p, epsilon)?;
    Ok(DetectionOutcome {
        false_alarm,
        miss_detection,
        dep: false_alarm + miss_detection,
        epsilon,
    })
}

/// The warden's best threshold on [σ²_aw, `search_hi`]: a uniform scan
/// locates the basin, golden-section search refines inside it.
pub fn optimal_threshold(p: &CovertLinkParams, search_hi: f64) -> Result<DetectionOutcome> {
    if p.p_a == 0.0 {
        // blind warden: FA and MD complement each other at every threshold
        return dep(p, p.sigma2_aw);
    }
    if !(search_hi > p.sigma2_aw) || !search_hi.is_finite() {
        return Err(domain(format!(
            "threshold search upper bound {search_hi} must exceed sigma2_aw = {}",
            p.sigma2_aw
        )));
    }
    let lo = p.sigma2_aw;
    let step = (search_hi - lo) / THRESHOLD_GRID as f64;
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 0..=THRESHOLD_GRID {
        let d = dep(p, lo + step * i as f64)?.dep;
        if d < best {
            best = d;
            best_i = i;
        }
    }
    let a = lo + step * best_i.saturating_sub(1) as f64;
    let b = lo + step * (best_i + 1).min(THRESHOLD_GRID) as f64;
    // NaN here would only come from a failed quadrature; surface it below
    let objective = |eps: f64| dep(p, eps).map(|o| o.dep).unwrap_or(f64::NAN);
    let m = minimize_scalar(objective, Bracket::new(a, b)?, THRESHOLD_REL_TOL * (search_hi - lo))?;
    let refined = dep(p, m.x)?;
    if refined.dep <= best {
        Ok(refined)
    } else {
        dep(p, lo + step * best_i as f64)
    }
}

/// Warden-optimal outcome using [`CovertLinkParams::default_search_hi`].
pub fn warden_optimum(p: &CovertLinkParams) -> Result<DetectionOutcome> {
    optimal_threshold(p, p.default_search_hi())
}

/// Smallest jamming power within `bracket` for which the warden's optimal
/// detection error stays at or above 1 − δ. The returned power always lies on
/// the satisfied side of the constraint.
pub fn min_jamming_power(p: &CovertLinkParams, bracket: Bracket) -> Result<f64> {
    if bracket.lo < 0.0 {
        return Err(domain("jamming power bracket must be nonnegative"));
    }
    let target = 1.0 - p.delta;
    let slack = |p_j: f64| -> Result<f64> {
        Ok(warden_optimum(&p.with_jamming(p_j))?.dep - target)
    };
    if slack(bracket.lo)? >= 0.0 {
        return Ok(bracket.lo);
    }
    let hi_slack = slack(bracket.hi)?;
    if hi_slack < 0.0 {
        return Err(Error::NoSignChange {
            lo: bracket.lo,
            hi: bracket.hi,
            f_lo: slack(bracket.lo)?,
            f_hi: hi_slack,
        });
    }
    let eval = |p_j: f64| slack(p_j).unwrap_or(f64::NAN);
    if bracket.lo > 0.0 {
        // the slack varies roughly with log p_j
        let r = refine_root(
            |t: f64| eval(t.exp()),
            Bracket::new(bracket.lo.ln(), bracket.hi.ln())?,
            JAMMER_REL_TOL,
        )?;
        Ok(r.hi_side.exp())
    } else {
        let r = refine_root(eval, bracket, JAMMER_REL_TOL * bracket.hi)?;
        Ok(r.hi_side)
    }
}

/// E[log₂(1 + c·Z)] for Z with the law `h`.
fn mean_log_gain(h: &FisherFParams, c: f64) -> Result<f64> {
    if c == 0.0 {
        return Ok(0.0);
    }
    let scale = h.mean;
    let integrand = |s: f64| {
        let f = h.pdf_raw(scale * s);
        if f == 0.0 {
            0.0
        } else {
            (c * scale * s).ln_1p() * f * scale
        }
    };
    let r = integrate_semi_infinite(integrand, &RATE_INNER_QUADRATURE)?;
    Ok(r.value / std::f64::consts::LN_2)
}

/// Ergodic covert rate per unit bandwidth, bit/s/Hz.
pub fn ergodic_covert_rate_per_hz(p: &CovertLinkParams, bandwidth_hz: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) || !bandwidth_hz.is_finite() {
        return Err(domain(format!("bandwidth must be finite and > 0, got {bandwidth_hz}")));
    }
    if p.p_a == 0.0 {
        return Ok(0.0);
    }
    let noise = bandwidth_hz * p.sigma2_ak_per_hz;
    if p.p_j == 0.0 {
        return mean_log_gain(&p.h_ak, p.p_a / noise);
    }
    let scale = p.h_jk.mean;
    let failed = std::cell::Cell::new(None);
    let outer = |s: f64| {
        let f = p.h_jk.pdf_raw(scale * s);
        if f == 0.0 {
            return 0.0;
        }
        let c = p.p_a / (noise + p.p_j * scale * s);
        match mean_log_gain(&p.h_ak, c) {
            Ok(v) => v * f * scale,
            Err(e) => {
                failed.set(Some(e));
                f64::NAN
            }
        }
    };
    let r = integrate_semi_infinite(outer, &RATE_OUTER_QUADRATURE);
    if let Some(e) = failed.take() {
        return Err(e);
    }
    Ok(r?.value)
}

/// B·E[log₂(1 + p_a|h_ak|² / (B·σ²_ak + p_j|h_jk|²))] in bit/s.
pub fn ergodic_covert_rate(p: &CovertLinkParams, bandwidth_hz: f64) -> Result<f64> {
    if bandwidth_hz == 0.0 || p.p_a == 0.0 {
        if bandwidth_hz < 0.0 {
            return Err(domain("bandwidth must be >= 0"));
        }
        return Ok(0.0);
    }
    Ok(bandwidth_hz * ergodic_covert_rate_per_hz(p, bandwidth_hz)?)
}

/// Thermal noise power over `bandwidth_hz`, dBm.
pub fn noise_power_dbm(bandwidth_hz: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) || !bandwidth_hz.is_finite() {
        return Err(domain(format!("bandwidth must be finite and > 0, got {bandwidth_hz}")));
    }
    Ok(THERMAL_NOISE_DBM_PER_HZ + 10.0 * bandwidth_hz.log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_jammer_params() -> CovertLinkParams {
        CovertLinkParams {
            p_a: 1.0,
            p_j: 1.0,
            sigma2_aw: 0.1,
            sigma2_ak_per_hz: 1.0,
            h_jw: AlphaMuParams::new(2.0, 1.0, 1.0).unwrap(),
            h_aw: FisherFParams::new(3.0, 2.0, 1.0).unwrap(),
            h_jk: AlphaMuParams::new(2.0, 2.0, 1.0).unwrap(),
            h_ak: FisherFParams::new(1.0, 2.0, 1.0).unwrap(),
            delta: 0.03,
        }
    }

    /// Warden example with a Nakagami-2 jammer, frozen against a
    /// 10⁷-sample simulation and an independent adaptive quadrature.
    fn reference_params() -> CovertLinkParams {
        CovertLinkParams {
            p_a: 1.0,
            p_j: 10.0,
            h_jw: AlphaMuParams::new(2.0, 2.0, 3.162).unwrap(),
            h_aw: FisherFParams::new(3.0, 2.0, 1.0).unwrap(),
            ..exp_jammer_params()
        }
    }

    #[test]
    fn below_noise_floor() {
        let p = exp_jammer_params();
        let o = dep(&p, 0.05).unwrap();
        assert_eq!((o.false_alarm, o.miss_detection, o.dep), (1.0, 0.0, 1.0));
        assert_eq!(false_alarm_prob(&p, 0.1), 1.0);
        assert_eq!(miss_detection_prob(&p, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn exponential_jammer_false_alarm() {
        let p = exp_jammer_params();
        assert!((false_alarm_prob(&p, 1.1) - (-1.0f64).exp()).abs() < 1e-14);
        let silent = p.with_jamming(0.0);
        assert_eq!(false_alarm_prob(&silent, 0.11), 0.0);
    }

    #[test]
    fn silent_transmitter_miss_detection() {
        let p = CovertLinkParams { p_a: 0.0, ..exp_jammer_params() };
        let md = miss_detection_prob(&p, 1.1).unwrap();
        assert!((md - (1.0 - (-1.0f64).exp())).abs() < 1e-14);
        // p_a → 0 through the convolution path
        let tiny = CovertLinkParams { p_a: 1e-9, ..exp_jammer_params() };
        assert!((miss_detection_prob(&tiny, 1.1).unwrap() - md).abs() < 1e-8);
        for eps in [0.2, 0.7, 3.0] {
            assert!((dep(&p, eps).unwrap().dep - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn miss_detection_reference_value() {
        // independent adaptive quadrature: 0.028645646199703667;
        // 10⁷-sample simulation: 0.028593 ± 5.3e-5
        let md = miss_detection_prob(&reference_params(), 5.0).unwrap();
        assert!((md - 0.028_645_646_199_703_667).abs() < 1e-9, "{md}");
        let fa = false_alarm_prob(&reference_params(), 5.0);
        assert!((fa - 0.960_831_330_872_978_3).abs() < 1e-12);
    }

    #[test]
    fn dep_is_exact_sum() {
        let p = reference_params();
        for eps in [0.5, 2.0, 9.0, 40.0] {
            let o = dep(&p, eps).unwrap();
            assert_eq!(o.dep, o.false_alarm + o.miss_detection);
            assert!((0.0..=1.0).contains(&o.false_alarm));
            assert!((0.0..=1.0).contains(&o.miss_detection));
        }
    }

    #[test]
    fn blind_warden_optimum_is_one() {
        let p = CovertLinkParams { p_a: 0.0, ..reference_params() };
        let o = warden_optimum(&p).unwrap();
        assert_eq!(o.dep, 1.0);
    }

    #[test]
    fn heavy_jamming_masks_signal() {
        let p = reference_params().with_jamming(1000.0);
        assert!(warden_optimum(&p).unwrap().dep >= 0.99);
    }

    #[test]
    fn no_jamming_is_detectable() {
        let p = CovertLinkParams {
            p_a: 100.0,
            p_j: 0.0,
            h_aw: FisherFParams::new(8.0, 8.0, 1.0).unwrap(),
            ..reference_params()
        };
        assert!(warden_optimum(&p).unwrap().dep < 0.01);
    }

    #[test]
    fn threshold_search_bound_checked() {
        let p = reference_params();
        assert!(optimal_threshold(&p, p.sigma2_aw).is_err());
    }

    #[test]
    fn jamming_power_trivial_cases() {
        let b = Bracket::new(0.0, 1e4).unwrap();
        let loud = Bracket::new(1e4, 1e5).unwrap();
        assert_eq!(min_jamming_power(&reference_params(), loud).unwrap(), 1e4);
        let silent = CovertLinkParams { p_a: 0.0, ..reference_params() };
        assert_eq!(min_jamming_power(&silent, b).unwrap(), 0.0);
        let tiny = Bracket::new(0.0, 1e-3).unwrap();
        assert!(matches!(
            min_jamming_power(&reference_params(), tiny),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn rate_trivial_cases() {
        let p = exp_jammer_params();
        assert_eq!(ergodic_covert_rate(&p, 0.0).unwrap(), 0.0);
        let silent = CovertLinkParams { p_a: 0.0, ..p };
        assert_eq!(ergodic_covert_rate(&silent, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn rate_without_jamming_closed_form() {
        // f(z) = 2/(1+z)³ gives E[ln(1+Z)] = 1/2
        let p = exp_jammer_params().with_jamming(0.0);
        let r = ergodic_covert_rate(&p, 1.0).unwrap();
        assert!((r - 0.5 / std::f64::consts::LN_2).abs() < 1e-9, "{r}");
    }

    #[test]
    fn noise_power_values() {
        assert_eq!(noise_power_dbm(1.0).unwrap(), -174.0);
        assert!((noise_power_dbm(1e6).unwrap() + 114.0).abs() < 1e-12);
        assert!((noise_power_dbm(1e8).unwrap() + 94.0).abs() < 1e-12);
        assert!(noise_power_dbm(0.0).is_err());
    }

    fn fig_defaults() -> CovertLinkParams {
        CovertLinkParams {
            p_a: 10.0,
            p_j: 0.0,
            sigma2_aw: 0.1,
            sigma2_ak_per_hz: crate::units::dbm_to_watts(THERMAL_NOISE_DBM_PER_HZ),
            h_jw: AlphaMuParams::new(2.0, 2.0, 10f64.powf(0.5)).unwrap(),
            h_aw: FisherFParams::new(3.0, 2.0, 1.0).unwrap(),
            h_jk: AlphaMuParams::new(2.0, 2.0, 1.0).unwrap(),
            h_ak: FisherFParams::new(2.0, 3.0, 1.0).unwrap(),
            delta: 0.03,
        }
    }

    #[test]
    fn jamming_power_reference() {
        // independent threshold optimisation gives 71.90762 W
        let p = fig_defaults();
        let pj = min_jamming_power(&p, Bracket::new(1e-3, 1e5).unwrap()).unwrap();
        assert!((pj / 71.907_62 - 1.0).abs() < 1e-5, "{pj}");
        assert!(warden_optimum(&p.with_jamming(pj)).unwrap().dep >= 0.97);
        let under = warden_optimum(&p.with_jamming(0.95 * pj)).unwrap().dep;
        assert!((under - 0.968_526).abs() < 1e-5, "{under}");
    }

    #[test]
    fn rate_grows_with_bandwidth_and_falls_with_jamming() {
        let p = fig_defaults().with_jamming(50.0);
        let r1 = ergodic_covert_rate(&p, 1e6).unwrap();
        let r2 = ergodic_covert_rate(&p, 2e6).unwrap();
        assert!(r2 > r1 && r1 > 0.0);
        let r3 = ergodic_covert_rate(&p.with_jamming(100.0), 1e6).unwrap();
        assert!(r3 < r1);
    }
}
