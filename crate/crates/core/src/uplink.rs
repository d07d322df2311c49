//! Uplink SNR over Fisher-Snedecor F fading, average BER for four binary
//! schemes, and inversion of the BER for the required transmit power.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fading::FisherFParams;
use crate::numerics::{
    gamma, integrate_semi_infinite, refine_root, upper_incomplete_gamma_reg, Bracket,
    QuadratureSpec,
};
use crate::units::db_to_linear;

// BER targets go down to ~1e-8, so the absolute floor must sit far below that.
const BER_QUADRATURE: QuadratureSpec = QuadratureSpec {
    abs_tol: 1e-30,
    rel_tol: 1e-11,
    max_subdivisions: 4000,
};

/// Default power search range for [`required_power`], dBW.
pub const DEFAULT_POWER_BRACKET_DBW: (f64, f64) = (-20.0, 40.0);

/// Binary modulation/detection pairs. The conditional bit error probability
/// is Γ(τ₂, τ₁γ) / (2Γ(τ₂)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Modulation {
    /// Orthogonal coherent BFSK.
    Cbfsk,
    /// Antipodal coherent BPSK.
    Cbpsk,
    /// Orthogonal non-coherent BFSK.
    Ncbfsk,
    /// Antipodal differentially coherent BPSK.
    Dpsk,
}

impl Modulation {
    pub const ALL: [Modulation; 4] = [Self::Cbfsk, Self::Cbpsk, Self::Ncbfsk, Self::Dpsk];

    pub fn tau1(self) -> f64 {
        match self {
            Self::Cbfsk | Self::Ncbfsk => 0.5,
            Self::Cbpsk | Self::Dpsk => 1.0,
        }
    }

    pub fn tau2(self) -> f64 {
        match self {
            Self::Cbfsk | Self::Cbpsk => 0.5,
            Self::Ncbfsk | Self::Dpsk => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Cbfsk => "CBFSK",
            Self::Cbpsk => "CBPSK",
            Self::Ncbfsk => "NCBFSK",
            Self::Dpsk => "DPSK",
        }
    }

    /// Bit error probability at instantaneous SNR `gamma`.
    pub fn conditional_bep(self, gamma: f64) -> f64 {
        if gamma <= 0.0 {
            return 0.5;
        }
        match upper_incomplete_gamma_reg(self.tau2(), self.tau1() * gamma) {
            Ok(q) => 0.5 * q,
            Err(_) => f64::NAN,
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| domain(format!("unknown modulation {s:?}; expected CBFSK, CBPSK, NCBFSK or DPSK")))
    }
}

/// Looks up a modulation by name (case-insensitive).
pub fn modulation_params(name: &str) -> Result<Modulation> {
    name.parse()
}

/// HMD-to-EAP link: transmit power and noise in linear watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UplinkParams {
    pub p_k: f64,
    pub sigma2_ka: f64,
    pub h_ka: FisherFParams,
}

impl UplinkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_k >= 0.0 && self.p_k.is_finite()) {
            return Err(domain(format!("p_k must be finite and >= 0, got {}", self.p_k)));
        }
        if !(self.sigma2_ka > 0.0 && self.sigma2_ka.is_finite()) {
            return Err(domain(format!("sigma2_ka must be finite and > 0, got {}", self.sigma2_ka)));
        }
        self.h_ka.validate()
    }

    pub fn with_power(&self, p_k: f64) -> Self {
        Self { p_k, ..*self }
    }

    /// Mean received SNR p_k·κ̄_ka/σ²_ka.
    pub fn mean_snr(&self) -> f64 {
        self.p_k * self.h_ka.mean / self.sigma2_ka
    }

    /// The SNR law: an F variate with mean [`Self::mean_snr`].
    fn snr_law(&self) -> FisherFParams {
        FisherFParams { mean: self.mean_snr(), ..self.h_ka }
    }
}

/// CDF of the SNR p_k·|h_ka|²/σ²_ka.
pub fn snr_cdf(p: &UplinkParams, gamma: f64) -> Result<f64> {
    if !(p.p_k > 0.0) {
        return Err(domain("SNR distribution needs p_k > 0"));
    }
    if gamma <= 0.0 {
        return Ok(0.0);
    }
    p.h_ka.cdf(gamma * p.sigma2_ka / p.p_k)
}

/// Average BER as (τ₁^τ₂ / 2Γ(τ₂))·∫ x^(τ₂−1) e^(−τ₁x) F_γ(x) dx, evaluated
/// after the change of variable t = τ₁x.
pub fn avg_ber(p: &UplinkParams, modulation: Modulation) -> Result<f64> {
    if p.p_k == 0.0 {
        return Ok(0.5);
    }
    let law = p.snr_law();
    let (tau1, tau2) = (modulation.tau1(), modulation.tau2());
    let integrand = |t: f64| {
        let w = (tau2 - 1.0) * t.ln() - t;
        if w < -745.0 {
            return 0.0;
        }
        law.cdf_raw(t / tau1) * w.exp()
    };
    let r = integrate_semi_infinite(integrand, &BER_QUADRATURE)?;
    let ber = r.value / (2.0 * gamma(tau2));
    if !ber.is_finite() {
        return Err(Error::NonFinite("average BER"));
    }
    Ok(ber.clamp(0.0, 0.5))
}

/// Average BER as the conditional error probability averaged over the SNR
/// density. Same quantity as [`avg_ber`], kept as an independent check.
pub fn avg_ber_conditional(p: &UplinkParams, modulation: Modulation) -> Result<f64> {
    if p.p_k == 0.0 {
        return Ok(0.5);
    }
    let law = p.snr_law();
    let scale = law.mean;
    let integrand = |s: f64| {
        let f = law.pdf_raw(scale * s);
        if f == 0.0 {
            0.0
        } else {
            modulation.conditional_bep(scale * s) * f * scale
        }
    };
    let r = integrate_semi_infinite(integrand, &BER_QUADRATURE)?;
    Ok(r.value.clamp(0.0, 0.5))
}

/// Transmit power (W) at which the average BER equals `target_ber`,
/// searched over `bracket_dbw` (defaults to [`DEFAULT_POWER_BRACKET_DBW`]).
/// Returns the lower end of the range if the target already holds there.
pub fn required_power(
    p: &UplinkParams,
    modulation: Modulation,
    target_ber: f64,
    bracket_dbw: Option<Bracket>,
) -> Result<f64> {
    if !(target_ber > 0.0 && target_ber < 0.5) {
        return Err(domain(format!("target BER must lie in (0, 0.5), got {target_ber}")));
    }
    let bracket = match bracket_dbw {
        Some(b) => b,
        None => Bracket::new(DEFAULT_POWER_BRACKET_DBW.0, DEFAULT_POWER_BRACKET_DBW.1)?,
    };
    let ln_target = target_ber.ln();
    let g = |dbw: f64| match avg_ber(&p.with_power(db_to_linear(dbw)), modulation) {
        Ok(b) if b > 0.0 => b.ln() - ln_target,
        Ok(_) => f64::NEG_INFINITY,
        Err(_) => f64::NAN,
    };
    if g(bracket.lo) <= 0.0 {
        return Ok(db_to_linear(bracket.lo));
    }
    let r = refine_root(g, bracket, 1e-10)?;
    Ok(db_to_linear(r.root))
}
