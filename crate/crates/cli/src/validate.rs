//! Analytic results against their independent oracles.

use covad_core::advertising::{ad_spend, find_c2, optimal_profit, state_trajectory, AdvertParams, Equilibrium};
use covad_core::covert::{ergodic_covert_rate, warden_optimum};
use covad_core::numerics::{integrate_interval, QuadratureSpec};
use covad_core::oracle::{integrate_state, mc_ber, mc_dep, mc_rate, McEstimate};
use covad_core::uplink::avg_ber;
use serde::Serialize;

use crate::commands::{resolve_jammer, Context};
use crate::output::{write_json, Meta};
use crate::CliError;

pub const MIN_VALIDATE_SAMPLES: u64 = 100_000;
const BUDGET_STEPS: usize = 1_000_000;
const RK4_STEPS: usize = 10_000;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub analytic: f64,
    pub oracle: f64,
    /// Absolute, relative or z-score discrepancy, per `metric`.
    pub discrepancy: f64,
    pub metric: &'static str,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: String, analytic: f64, oracle: f64, discrepancy: f64, metric: &'static str, tolerance: f64) -> Self {
        Self { name, analytic, oracle, discrepancy, metric, tolerance, pass: discrepancy <= tolerance }
    }

    fn z(name: String, analytic: f64, mc: &McEstimate, tol: f64) -> Self {
        Self::new(name, analytic, mc.mean, mc.z_score(analytic), "z", tol)
    }

    fn rel(name: String, analytic: f64, oracle: f64, tol: f64) -> Self {
        let d = (analytic - oracle).abs() / oracle.abs().max(f64::MIN_POSITIVE);
        Self::new(name, analytic, oracle, d, "rel", tol)
    }
}

#[derive(Serialize)]
struct Report<'a> {
    meta: &'a Meta,
    samples: u64,
    checks: &'a [Check],
    all_pass: bool,
}

fn profit_by_quadrature(eq: &Equilibrium, p: &AdvertParams, horizon: f64) -> Result<f64, CliError> {
    let k = 0.5 * p.h_a * (eq.lambda1_bar * p.eta1 / ((1.0 + eq.c2) * p.h_a)).powi(2);
    let spec = QuadratureSpec::new(1e-14, 1e-13, 2000)?;
    let r = integrate_interval(
        |t| {
            let x = eq.share_at(p, t);
            p.pi * x - k * (1.0 - x)
        },
        0.0,
        horizon,
        &spec,
    )?;
    Ok(r.value)
}

pub fn run_checks(ctx: &Context, samples: u64) -> Result<Vec<Check>, CliError> {
    let cfg = &ctx.cfg;
    let tol = &cfg.validation;
    let seed = cfg.run.seed;
    let mut checks = Vec::new();

    // downlink: detection error at the warden optimum, with and without the full jamming power
    let jam = resolve_jammer(cfg)?;
    for (i, (label, p_j)) in [("p_j_star", jam.p_j_w), ("half_p_j_star", 0.5 * jam.p_j_w)].into_iter().enumerate() {
        let p = cfg.downlink_params(p_j)?;
        let opt = warden_optimum(&p)?;
        let mc = mc_dep(&p, opt.epsilon, samples, seed.wrapping_add(i as u64))?;
        checks.push(Check::z(format!("dep_mc_{label}"), opt.dep, &mc, tol.z_max));
    }

    let p = cfg.downlink_params(jam.p_j_w)?;
    let range = cfg.downlink.bandwidth_sweep_hz;
    let b = 0.5 * (range.lo + range.hi);
    let rate = ergodic_covert_rate(&p, b)?;
    let mc = mc_rate(&p, b, samples, seed.wrapping_add(10))?;
    checks.push(Check::rel("rate_mc".into(), rate, mc.mean, tol.rate_rel_tol));

    let up = cfg.uplink_params()?;
    let ber = avg_ber(&up, cfg.uplink.modulation)?;
    let mc = mc_ber(&up, cfg.uplink.modulation, samples, seed.wrapping_add(20))?;
    checks.push(Check::z("ber_mc".into(), ber, &mc, tol.z_max));

    // advertising
    let horizon = cfg.advertising.t1;
    for &eta in &cfg.advertising.eta1_series {
        let ap = cfg.advert_params(eta)?;
        let eq = find_c2(&ap, horizon)?;
        let rk = integrate_state(&ap, &eq, horizon, RK4_STEPS)?;
        let dev = rk
            .trajectory
            .times
            .iter()
            .zip(&rk.trajectory.x)
            .map(|(&t, &x)| (x - eq.share_at(&ap, t)).abs())
            .fold(0.0, f64::max);
        let last = *rk.trajectory.x.last().expect("non-empty");
        checks.push(Check::new(
            format!("state_rk4_eta1_{eta}"),
            eq.share_at(&ap, horizon),
            last,
            dev,
            "abs",
            tol.rk4_abs_tol,
        ));

        let j = optimal_profit(&eq, &ap, horizon)?.j_star;
        checks.push(Check::rel(format!("j_star_eta1_{eta}"), j, profit_by_quadrature(&eq, &ap, horizon)?, tol.j_star_rel_tol));

        let spend = ad_spend(&eq, &ap, horizon)?;
        let tr = state_trajectory(&eq, &ap, horizon, BUDGET_STEPS)?;
        let used = tr.g[0] - tr.g[tr.len() - 1];
        checks.push(Check::rel(format!("budget_identity_eta1_{eta}"), spend, used, tol.budget_rel_tol));

        let budget = ap.advertising_budget();
        let slack = eq.c2 * (budget - spend) / budget;
        let over = ((spend - budget) / budget).max(0.0);
        checks.push(Check::new(
            format!("complementary_slackness_eta1_{eta}"),
            spend,
            budget,
            slack.abs().max(over),
            "abs",
            tol.slackness_tol,
        ));
    }
    Ok(checks)
}

/// Runs all checks, writes `validate.json`, prints one line per check and
/// returns whether every check passed.
pub fn validate(ctx: &Context, samples: u64) -> Result<bool, CliError> {
    if samples < MIN_VALIDATE_SAMPLES {
        return Err(CliError::Config(format!("validate needs --samples >= {MIN_VALIDATE_SAMPLES}, got {samples}")));
    }
    let checks = run_checks(ctx, samples)?;
    let all_pass = checks.iter().all(|c| c.pass);
    for c in &checks {
        println!(
            "{} {}: {} {:.3e} <= {:.3e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.metric,
            c.discrepancy,
            c.tolerance
        );
    }
    write_json(&ctx.out_dir.join("validate.json"), &Report { meta: &ctx.meta, samples, checks: &checks, all_pass })?;
    Ok(all_pass)
}
