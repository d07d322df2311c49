//! Optimal targeted advertising for selling acceleration bandwidth.
//!
//! The normalized market share x(t) = B(t)/M follows
//! ẋ = η₁·a·√(1−x) − η₂·x. Under the budget multiplier C₂ the optimal
//! feedback control keeps the adjoint at a constant λ̄₁, and x(t) relaxes
//! exponentially to the stationary share x̄.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::{integrate_interval, refine_root, Bracket, QuadratureSpec};

const SPEND_QUADRATURE: QuadratureSpec = QuadratureSpec {
    abs_tol: 1e-14,
    rel_tol: 1e-12,
    max_subdivisions: 2000,
};
/// Doublings allowed while looking for a multiplier that meets the budget.
const C2_EXPANSIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvertParams {
    /// Maximum sales revenue rate π.
    pub pi: f64,
    /// Marginal advertising cost h_a.
    pub h_a: f64,
    /// Response constant η₁ (= c₁/M).
    pub eta1: f64,
    /// Decay constant η₂.
    pub eta2: f64,
    pub x0: f64,
    /// Planning horizon T₁.
    pub t1: f64,
    /// Total budget N.
    pub n_budget: f64,
    /// Unit bandwidth price p_l.
    pub p_l: f64,
    /// Purchased bandwidth B_T, in units of M's bandwidth unit.
    pub b_total: f64,
    /// Saturation level M.
    pub m_saturation: f64,
}

impl AdvertParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("pi", self.pi),
            ("h_a", self.h_a),
            ("eta1", self.eta1),
            ("eta2", self.eta2),
            ("t1", self.t1),
            ("n_budget", self.n_budget),
            ("m_saturation", self.m_saturation),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        for (name, v) in [("p_l", self.p_l), ("b_total", self.b_total)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.x0) {
            return Err(domain(format!("x0 must lie in [0, 1], got {}", self.x0)));
        }
        if !(self.advertising_budget() > 0.0) {
            return Err(Error::Infeasible(format!(
                "advertising budget N - p_l*B_T = {} is not positive",
                self.advertising_budget()
            )));
        }
        Ok(())
    }

    /// Money left for advertising after buying bandwidth: N − p_l·B_T.
    pub fn advertising_budget(&self) -> f64 {
        self.n_budget - self.p_l * self.b_total
    }
}

/// Stationary solution for a given budget multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub lambda1_bar: f64,
    pub x_bar: f64,
    /// Λ = λ̄₁η₁² / ((1+C₂)h_a).
    pub capital_lambda: f64,
    pub c2: f64,
}

impl Equilibrium {
    fn effective_cost(&self, p: &AdvertParams) -> f64 {
        (1.0 + self.c2) * p.h_a
    }

    /// Relaxation rate of x(t); equals Λ/x̄ = Λ + η₂.
    pub fn relaxation_rate(&self, p: &AdvertParams) -> f64 {
        self.capital_lambda + p.eta2
    }

    /// Closed-form share x(t).
    pub fn share_at(&self, p: &AdvertParams, t: f64) -> f64 {
        self.x_bar + (p.x0 - self.x_bar) * (-self.relaxation_rate(p) * t).exp()
    }

    /// ∫₀ᵀ x(t) dt.
    pub fn share_integral(&self, p: &AdvertParams, horizon: f64) -> f64 {
        let r = self.relaxation_rate(p);
        self.x_bar * horizon + (p.x0 - self.x_bar) * (-(-r * horizon).exp_m1()) / r
    }

    /// Spend rate (h_a/2)·a*(x)² written as K·(1 − x).
    fn spend_coefficient(&self, p: &AdvertParams) -> f64 {
        let h = self.effective_cost(p);
        0.5 * p.h_a * (self.lambda1_bar * p.eta1 / h).powi(2)
    }
}

/// Stationary adjoint and share for multiplier `c2`.
pub fn equilibrium(p: &AdvertParams, c2: f64) -> Result<Equilibrium> {
    if !(c2 >= 0.0 && c2.is_finite()) {
        return Err(domain(format!("C2 must be finite and >= 0, got {c2}")));
    }
    let h = (1.0 + c2) * p.h_a;
    let e1sq = p.eta1 * p.eta1;
    // rationalized root of λ²η₁²/(2H) + η₂λ − π = 0; no cancellation as π → 0
    let lambda1_bar = 2.0 * p.pi / (p.eta2 + (p.eta2 * p.eta2 + 2.0 * p.pi * e1sq / h).sqrt());
    let gain = lambda1_bar * e1sq;
    let x_bar = gain / (gain + p.eta2 * h);
    let capital_lambda = gain / h;
    if !(lambda1_bar.is_finite() && x_bar.is_finite()) {
        return Err(Error::NonFinite("advertising equilibrium"));
    }
    Ok(Equilibrium { lambda1_bar, x_bar, capital_lambda, c2 })
}

/// Optimal advertising effort a*(x) = λ̄₁η₁√(1−x) / ((1+C₂)h_a).
pub fn control_feedback(eq: &Equilibrium, p: &AdvertParams, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(domain(format!("share must lie in [0, 1], got {x}")));
    }
    Ok(eq.lambda1_bar * p.eta1 * (1.0 - x).sqrt() / eq.effective_cost(p))
}

/// Hamiltonian terms that depend on the control, for a given share and
/// adjoint: λ₁η₁a√(1−x) − (1+C₂)(h_a/2)a².
pub fn control_hamiltonian(eq: &Equilibrium, p: &AdvertParams, x: f64, a: f64) -> f64 {
    eq.lambda1_bar * p.eta1 * a * (1.0 - x).sqrt() - 0.5 * eq.effective_cost(p) * a * a
}

/// Right-hand side of the share dynamics.
pub fn state_rate(p: &AdvertParams, x: f64, a: f64) -> f64 {
    p.eta1 * a * (1.0 - x).sqrt() - p.eta2 * x
}

/// Right-hand side of the adjoint equation for λ₁.
pub fn adjoint_rate(p: &AdvertParams, x: f64, lambda1: f64, a: f64) -> f64 {
    -p.pi + lambda1 * p.eta1 * a / (2.0 * (1.0 - x).sqrt()) + lambda1 * p.eta2
}

/// Sampled optimal path on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub a_star: Vec<f64>,
    /// Cumulative spend ∫(h_a/2)a*² by the trapezoid rule.
    pub spend_cum: Vec<f64>,
    /// Remaining advertising budget G(t).
    pub g: Vec<f64>,
    pub lambda1: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Bandwidth sold B(t) = M·x(t).
    pub fn bandwidth_sold(&self, p: &AdvertParams) -> Vec<f64> {
        self.x.iter().map(|x| p.m_saturation * x).collect()
    }

    /// Fills a* , spend, G and λ₁ from the share samples.
    pub(crate) fn from_shares(eq: &Equilibrium, p: &AdvertParams, times: Vec<f64>, x: Vec<f64>) -> Self {
        let a_star: Vec<f64> = x
            .iter()
            .map(|&xi| eq.lambda1_bar * p.eta1 * (1.0 - xi.clamp(0.0, 1.0)).sqrt() / eq.effective_cost(p))
            .collect();
        let rate: Vec<f64> = a_star.iter().map(|a| 0.5 * p.h_a * a * a).collect();
        let mut spend_cum = Vec::with_capacity(times.len());
        let mut acc = 0.0;
        spend_cum.push(0.0);
        for i in 1..times.len() {
            acc += 0.5 * (rate[i] + rate[i - 1]) * (times[i] - times[i - 1]);
            spend_cum.push(acc);
        }
        let g0 = p.advertising_budget();
        let g = spend_cum.iter().map(|s| g0 - s).collect();
        let lambda1 = vec![eq.lambda1_bar; times.len()];
        Self { times, x, a_star, spend_cum, g, lambda1 }
    }
}

fn uniform_grid(horizon: f64, steps: usize) -> Result<Vec<f64>> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(domain(format!("horizon must be finite and > 0, got {horizon}")));
    }
    if steps < 2 {
        return Err(domain("trajectory needs at least 2 steps"));
    }
    Ok((0..=steps).map(|i| horizon * i as f64 / steps as f64).collect())
}

/// Closed-form optimal path over [0, horizon] with `steps` intervals.
pub fn state_trajectory(eq: &Equilibrium, p: &AdvertParams, horizon: f64, steps: usize) -> Result<Trajectory> {
    let times = uniform_grid(horizon, steps)?;
    let x = times.iter().map(|&t| eq.share_at(p, t)).collect();
    Ok(Trajectory::from_shares(eq, p, times, x))
}

/// ∫₀ᵀ (h_a/2)·a*(t)² dt by adaptive quadrature.
pub fn ad_spend(eq: &Equilibrium, p: &AdvertParams, horizon: f64) -> Result<f64> {
    if !(horizon >= 0.0) {
        return Err(domain(format!("horizon must be >= 0, got {horizon}")));
    }
    let k = eq.spend_coefficient(p);
    let r = integrate_interval(|t| k * (1.0 - eq.share_at(p, t)), 0.0, horizon, &SPEND_QUADRATURE)?;
    Ok(r.value)
}

/// Budget multiplier C₂ and its equilibrium. Zero when the unconstrained
/// plan already fits the advertising budget; otherwise the multiplier at
/// which spend over `horizon` meets the budget, taken on the affordable side.
pub fn find_c2(p: &AdvertParams, horizon: f64) -> Result<Equilibrium> {
    let budget = p.advertising_budget();
    if !(budget > 0.0) {
        return Err(Error::Infeasible(format!("advertising budget {budget} is not positive")));
    }
    let free = equilibrium(p, 0.0)?;
    if ad_spend(&free, p, horizon)? <= budget {
        return Ok(free);
    }
    let excess = |c2: f64| -> f64 {
        equilibrium(p, c2)
            .and_then(|eq| ad_spend(&eq, p, horizon))
            .map(|s| s - budget)
            .unwrap_or(f64::NAN)
    };
    let mut hi = 1.0;
    let mut expansions = 0;
    while excess(hi) > 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > C2_EXPANSIONS {
            return Err(Error::Infeasible("no budget multiplier meets the advertising budget".into()));
        }
    }
    let r = refine_root(excess, Bracket::new(0.0, hi)?, 1e-13 * hi)?;
    equilibrium(p, r.hi_side)
}

/// Profit from advertising over `horizon`, with and without the bandwidth
/// purchase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profit {
    /// Revenue minus advertising spend.
    pub j_star: f64,
    /// Same integral with the multiplier entering as (1 + C₂²); equals
    /// `j_star` at C₂ = 0.
    pub j_star_alt: f64,
    /// J* − p_l·B_T.
    pub total_profit: f64,
}

/// Closed-form optimal profit.
pub fn optimal_profit(eq: &Equilibrium, p: &AdvertParams, horizon: f64) -> Result<Profit> {
    if !(horizon >= 0.0) {
        return Err(domain(format!("horizon must be >= 0, got {horizon}")));
    }
    let share = eq.share_integral(p, horizon);
    let k = eq.capital_lambda * eq.lambda1_bar / (2.0 * (1.0 + eq.c2));
    let j_star = (p.pi + k) * share - k * horizon;
    let k_alt = (eq.lambda1_bar * p.eta1).powi(2) / (2.0 * (1.0 + eq.c2 * eq.c2) * p.h_a);
    let j_star_alt = (p.pi + k_alt) * share - k_alt * horizon;
    Ok(Profit { j_star, j_star_alt, total_profit: j_star - p.p_l * p.b_total })
}

/// Bandwidth-exhaustion horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonBound {
    pub t2: f64,
    /// min(T₁, T₂).
    pub effective_horizon: f64,
    pub diagnostic: Option<String>,
}

/// Largest T₂ for which cumulative sold bandwidth M·∫x dt fits in the
/// acceleration bandwidth B_T − ΣB_k (same unit as M).
pub fn solve_t2(eq: &Equilibrium, p: &AdvertParams, total_basic_bw: f64) -> Result<HorizonBound> {
    if !(total_basic_bw >= 0.0) {
        return Err(domain(format!("total basic bandwidth must be >= 0, got {total_basic_bw}")));
    }
    let bound = |t2: f64, diagnostic| HorizonBound { t2, effective_horizon: t2.min(p.t1), diagnostic };
    let spare = p.b_total - total_basic_bw;
    if spare < 0.0 {
        return Ok(bound(
            0.0,
            Some(format!(
                "basic bandwidth {total_basic_bw} exceeds purchased bandwidth {}; no acceleration bandwidth left",
                p.b_total
            )),
        ));
    }
    if spare == 0.0 {
        return Ok(bound(0.0, None));
    }
    if eq.x_bar == 0.0 {
        return Ok(bound(f64::INFINITY, None));
    }
    let lead = (p.x0 - eq.x_bar) / eq.capital_lambda;
    let rate = eq.relaxation_rate(p);
    let rhs = spare / (eq.x_bar * p.m_saturation) - lead;
    let f = |t: f64| t - lead * (-rate * t).exp() - rhs;
    let hi = rhs + lead.abs();
    if !(hi > 0.0) || !hi.is_finite() {
        return Err(Error::NonFinite("bandwidth horizon bracket"));
    }
    let r = refine_root(f, Bracket::new(0.0, hi)?, 1e-12 * hi.max(1.0))?;
    // lo side keeps the sold bandwidth within the limit
    Ok(bound(r.lo_side, None))
}

/// Competitor's detector for covert advertising: it compares the observed
/// mix δ₁·a + δ₂·e against its threshold j.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvertCovertness {
    pub delta1: f64,
    pub delta2: f64,
    pub j_threshold: f64,
    pub noise_effort: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub miss_detection: bool,
    pub false_judgement: bool,
}

pub fn advert_detectability(a: &AdvertCovertness, actual_effort: f64) -> Judgment {
    let noise = a.delta2 * a.noise_effort;
    Judgment {
        miss_detection: a.delta1 * actual_effort + noise < a.j_threshold,
        false_judgement: noise > a.j_threshold,
    }
}

/// Noise effort j/δ₂·(1 + margin) at which the detector always fires.
pub fn min_noise_effort(delta2: f64, j_threshold: f64, margin: f64) -> Result<f64> {
    if !(delta2 > 0.0) || !(j_threshold > 0.0) || !(margin >= 0.0) {
        return Err(domain("min_noise_effort needs delta2 > 0, j > 0 and margin >= 0"));
    }
    Ok(j_threshold / delta2 * (1.0 + margin))
}
