use std::path::PathBuf;

use covad_core::advertising::{
    ad_spend, advert_detectability, find_c2, min_noise_effort, optimal_profit, solve_t2, state_trajectory,
    Judgment, Trajectory,
};
use covad_core::covert::{
    ergodic_covert_rate, min_jamming_power, noise_power_dbm, warden_optimum, CovertLinkParams,
};
use covad_core::fading::FisherFParams;
use covad_core::immersion::{per_user_bandwidth, UserRequirement};
use covad_core::units::{db_to_linear, linear_to_db};
use covad_core::uplink::{avg_ber, required_power, Modulation, UplinkParams};
use covad_core::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ChannelPair, RangeConfig, ScenarioConfig};
use crate::output::{write_json, Cell, Meta, SweepResult};
use crate::CliError;

/// Resolved configuration plus where and how to write results.
pub struct Context {
    pub cfg: ScenarioConfig,
    pub out_dir: PathBuf,
    pub meta: Meta,
}

impl Context {
    pub fn new(cfg: ScenarioConfig, out_dir: PathBuf) -> Self {
        let meta = Meta::new(cfg.hash(), cfg.run.seed);
        Self { cfg, out_dir, meta }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

fn label(x: f64) -> String {
    x.to_string()
}

// ---------------------------------------------------------------- advertising

#[derive(Debug, Serialize)]
struct AdvertRun {
    eta1: f64,
    lambda1_bar: f64,
    x_bar: f64,
    capital_lambda: f64,
    c2: f64,
    ad_spend: f64,
    advertising_budget: f64,
    j_star: f64,
    j_star_alt: f64,
    total_profit: f64,
    t2: f64,
    effective_horizon: f64,
    t2_diagnostic: Option<String>,
    min_noise_effort: f64,
    judgment_at_start: Judgment,
}

#[derive(Debug, Serialize)]
struct AdvertSummary<'a> {
    meta: &'a Meta,
    horizon: f64,
    runs: Vec<AdvertRun>,
}

fn advert_run(ctx: &Context, eta1: f64, horizon: f64) -> Result<(AdvertRun, Trajectory), CliError> {
    let cfg = &ctx.cfg;
    let p = cfg.advert_params(eta1)?;
    let eq = find_c2(&p, horizon)?;
    let traj = state_trajectory(&eq, &p, horizon, cfg.advertising.trajectory_steps)?;
    let profit = optimal_profit(&eq, &p, horizon)?;
    let bound = solve_t2(&eq, &p, cfg.advertising.basic_bandwidth_units)?;
    let c = &cfg.advertising.covertness;
    let effort = min_noise_effort(c.delta2, c.j_threshold, c.noise_margin)?;
    let judgment = advert_detectability(&cfg.advert_covertness(effort), traj.a_star[0]);
    let run = AdvertRun {
        eta1,
        lambda1_bar: eq.lambda1_bar,
        x_bar: eq.x_bar,
        capital_lambda: eq.capital_lambda,
        c2: eq.c2,
        ad_spend: ad_spend(&eq, &p, horizon)?,
        advertising_budget: p.advertising_budget(),
        j_star: profit.j_star,
        j_star_alt: profit.j_star_alt,
        total_profit: profit.total_profit,
        t2: bound.t2,
        effective_horizon: bound.effective_horizon,
        t2_diagnostic: bound.diagnostic,
        min_noise_effort: effort,
        judgment_at_start: judgment,
    };
    Ok((run, traj))
}

pub fn advert(ctx: &Context, eta1: Option<Vec<f64>>, horizon: Option<f64>) -> Result<(), CliError> {
    let horizon = horizon.unwrap_or(ctx.cfg.advertising.t1);
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(CliError::Config(format!("--horizon must be finite and > 0, got {horizon}")));
    }
    let etas = eta1.unwrap_or_else(|| ctx.cfg.advertising.eta1_series.clone());
    if etas.is_empty() || etas.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(CliError::Config("--eta1 values must be finite and > 0".into()));
    }
    let mut runs = Vec::new();
    for &eta in &etas {
        let (run, traj) = advert_run(ctx, eta, horizon)?;
        let mut table = SweepResult::new(
            "t",
            ["x", "a_star", "spend_cum", "g"].map(String::from).to_vec(),
        );
        for i in 0..traj.len() {
            table.push(
                traj.times[i],
                vec![traj.x[i].into(), traj.a_star[i].into(), traj.spend_cum[i].into(), traj.g[i].into()],
            );
        }
        table.write_csv(&ctx.path(&format!("advert_eta1_{}.csv", label(eta))), &ctx.meta)?;
        runs.push(run);
    }
    write_json(&ctx.path("advert_summary.json"), &AdvertSummary { meta: &ctx.meta, horizon, runs })
}

/// Fig.-1 data: trajectories for every η₁ side by side over [0, T₁].
pub fn fig1_table(ctx: &Context) -> Result<SweepResult, CliError> {
    let etas = &ctx.cfg.advertising.eta1_series;
    let mut columns = Vec::new();
    let mut trajs = Vec::new();
    for &eta in etas {
        for name in ["x", "a_star", "spend_cum", "g"] {
            columns.push(format!("{name}_eta1_{}", label(eta)));
        }
        trajs.push(advert_run(ctx, eta, ctx.cfg.advertising.t1)?.1);
    }
    let mut table = SweepResult::new("t", columns);
    if let Some(first) = trajs.first() {
        for i in 0..first.len() {
            let mut cells = Vec::new();
            for tr in &trajs {
                cells.extend([tr.x[i], tr.a_star[i], tr.spend_cum[i], tr.g[i]].map(Cell::from));
            }
            table.push(first.times[i], cells);
        }
    }
    Ok(table)
}

// ------------------------------------------------------------------- downlink

#[derive(Debug, Clone, Serialize)]
pub struct JammerSolution {
    pub p_j_w: f64,
    pub dep_at_opt_threshold: f64,
    pub epsilon_opt_w: f64,
    /// Warden-optimal DEP with 5% less jamming.
    pub dep_at_95_percent: f64,
    pub status: String,
}

/// Jamming power used on the downlink: the configured value, or the
/// covertness-constrained minimum. The warden link does not involve the
/// user's bandwidth, so one solve serves every bandwidth.
pub fn resolve_jammer(cfg: &ScenarioConfig) -> Result<JammerSolution, CliError> {
    let base = cfg.downlink_params(0.0)?;
    let (p_j, status) = match cfg.downlink.p_j_w {
        Some(v) => (v, "fixed".to_string()),
        None => match min_jamming_power(&base, cfg.jammer_bracket()?) {
            Ok(v) => (v, "ok".to_string()),
            Err(Error::NoSignChange { hi, .. }) => (hi, "infeasible_jamming".to_string()),
            Err(e) => return Err(e.into()),
        },
    };
    let opt = warden_optimum(&base.with_jamming(p_j))?;
    let reduced = warden_optimum(&base.with_jamming(0.95 * p_j))?;
    Ok(JammerSolution {
        p_j_w: p_j,
        dep_at_opt_threshold: opt.dep,
        epsilon_opt_w: opt.epsilon,
        dep_at_95_percent: reduced.dep,
        status,
    })
}

fn with_kappa_ak(p: &CovertLinkParams, kappa_db: f64) -> CovertLinkParams {
    CovertLinkParams { h_ak: FisherFParams { mean: db_to_linear(kappa_db), ..p.h_ak }, ..*p }
}

pub fn downlink_table(cfg: &ScenarioConfig, range: RangeConfig) -> Result<(SweepResult, JammerSolution), CliError> {
    range.validate("--bandwidth-range")?;
    if !(range.lo > 0.0) {
        return Err(CliError::Config("bandwidth range must start above 0 Hz".into()));
    }
    let jam = resolve_jammer(cfg)?;
    let p = cfg.downlink_params(jam.p_j_w)?;
    let extras = cfg.downlink.extra_kappa_ak_db.clone();
    let mut columns: Vec<String> = [
        "covert_rate_bps",
        "covert_rate_bps_per_hz",
        "noise_dbm",
        "p_j_star_w",
        "dep_at_opt_threshold",
        "status",
    ]
    .map(String::from)
    .to_vec();
    columns.extend(extras.iter().map(|k| format!("covert_rate_bps_kappa_ak_{}db", label(*k))));

    let points = range.points();
    let rows: Vec<Result<Vec<Cell>, CliError>> = points
        .par_iter()
        .map(|&b| {
            let rate = ergodic_covert_rate(&p, b)?;
            let mut cells: Vec<Cell> = vec![
                rate.into(),
                (rate / b).into(),
                noise_power_dbm(b)?.into(),
                jam.p_j_w.into(),
                jam.dep_at_opt_threshold.into(),
                jam.status.as_str().into(),
            ];
            for k in &extras {
                cells.push(ergodic_covert_rate(&with_kappa_ak(&p, *k), b)?.into());
            }
            Ok(cells)
        })
        .collect();
    let mut table = SweepResult::new("bandwidth_hz", columns);
    for (b, row) in points.into_iter().zip(rows) {
        table.push(b, row?);
    }
    Ok((table, jam))
}

#[derive(Serialize)]
struct DownlinkSummary<'a> {
    meta: &'a Meta,
    jammer: JammerSolution,
    delta: f64,
}

pub fn downlink_sweep(ctx: &Context, range: Option<RangeConfig>) -> Result<(), CliError> {
    let range = range.unwrap_or(ctx.cfg.downlink.bandwidth_sweep_hz);
    let (table, jam) = downlink_table(&ctx.cfg, range)?;
    table.write_csv(&ctx.path("downlink_sweep.csv"), &ctx.meta)?;
    write_json(
        &ctx.path("downlink_summary.json"),
        &DownlinkSummary { meta: &ctx.meta, jammer: jam, delta: ctx.cfg.downlink.delta },
    )
}

// --------------------------------------------------------------------- uplink

fn channel_link(base: &UplinkParams, ch: ChannelPair) -> Result<UplinkParams, CliError> {
    let h_ka = FisherFParams::new(ch.m, ch.m_s, base.h_ka.mean)?;
    Ok(UplinkParams { h_ka, ..*base })
}

fn ber_column(m: Modulation, ch: ChannelPair) -> String {
    format!("ber_{}_m{}_ms{}", m.name(), label(ch.m), label(ch.m_s))
}

pub fn uplink_table(
    cfg: &ScenarioConfig,
    range: RangeConfig,
    mods: &[Modulation],
    channels: &[ChannelPair],
) -> Result<SweepResult, CliError> {
    range.validate("--power-range-dbw")?;
    let base = cfg.uplink_params()?;
    let combos: Vec<(Modulation, ChannelPair)> =
        channels.iter().flat_map(|&ch| mods.iter().map(move |&m| (m, ch))).collect();
    let links: Vec<UplinkParams> = channels.iter().map(|&ch| channel_link(&base, ch)).collect::<Result<_, _>>()?;
    let columns = combos.iter().map(|&(m, ch)| ber_column(m, ch)).collect();
    let points = range.points();
    let rows: Vec<Result<Vec<Cell>, CliError>> = points
        .par_iter()
        .map(|&dbw| {
            let mut cells = Vec::with_capacity(combos.len());
            for (ci, _) in channels.iter().enumerate() {
                let link = links[ci].with_power(db_to_linear(dbw));
                for &m in mods {
                    cells.push(avg_ber(&link, m)?.into());
                }
            }
            Ok(cells)
        })
        .collect();
    let mut table = SweepResult::new("p_k_dbw", columns);
    for (x, row) in points.into_iter().zip(rows) {
        table.push(x, row?);
    }
    Ok(table)
}

#[derive(Debug, Serialize)]
struct RequiredPower {
    modulation: Modulation,
    m: f64,
    m_s: f64,
    required_power_dbw: Option<f64>,
    status: String,
}

#[derive(Serialize)]
struct UplinkSummary<'a> {
    meta: &'a Meta,
    target_ber: f64,
    required_powers: Vec<RequiredPower>,
}

pub fn uplink_sweep(
    ctx: &Context,
    range: Option<RangeConfig>,
    mods: Option<Vec<Modulation>>,
    channels: Option<Vec<ChannelPair>>,
) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let range = range.unwrap_or(cfg.uplink.power_sweep_dbw);
    let mods = mods.unwrap_or_else(|| cfg.uplink.modulations.clone());
    let channels = channels.unwrap_or_else(|| cfg.uplink.channels.clone());
    if mods.is_empty() || channels.is_empty() {
        return Err(CliError::Config("need at least one modulation and one channel".into()));
    }
    for ch in &channels {
        FisherFParams::new(ch.m, ch.m_s, 1.0).map_err(|e| CliError::field("--channels", e))?;
    }
    let table = uplink_table(cfg, range, &mods, &channels)?;
    table.write_csv(&ctx.path("uplink_sweep.csv"), &ctx.meta)?;

    let base = cfg.uplink_params()?;
    let bracket = cfg.power_bracket()?;
    let combos: Vec<(Modulation, ChannelPair)> =
        channels.iter().flat_map(|&ch| mods.iter().map(move |&m| (m, ch))).collect();
    let required: Vec<Result<RequiredPower, CliError>> = combos
        .par_iter()
        .map(|&(m, ch)| {
            let link = channel_link(&base, ch)?;
            let (power, status) = match required_power(&link, m, cfg.uplink.target_ber, Some(bracket)) {
                Ok(w) => (Some(linear_to_db(w)), "ok".to_string()),
                Err(Error::NoSignChange { .. }) => (None, "unreachable_in_bracket".to_string()),
                Err(e) => return Err(e.into()),
            };
            Ok(RequiredPower { modulation: m, m: ch.m, m_s: ch.m_s, required_power_dbw: power, status })
        })
        .collect();
    let required_powers = required.into_iter().collect::<Result<Vec<_>, _>>()?;
    write_json(
        &ctx.path("uplink_summary.json"),
        &UplinkSummary { meta: &ctx.meta, target_ber: cfg.uplink.target_ber, required_powers },
    )
}

// ------------------------------------------------------------------ immersion

#[derive(Debug, Serialize)]
struct UserReport {
    index: usize,
    mi_min_bps: f64,
    s_k: f64,
    basic_bandwidth_hz: f64,
}

#[derive(Serialize)]
struct ImmersionReport<'a> {
    meta: &'a Meta,
    uplink_ber: f64,
    p_j_w: f64,
    users: Vec<UserReport>,
    total_basic_bandwidth_hz: f64,
    total_basic_bandwidth_units: f64,
    acceleration_bandwidth_units: f64,
    t2: f64,
    effective_horizon: f64,
    t2_diagnostic: Option<String>,
}

pub fn immersion(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let jam = resolve_jammer(cfg)?;
    let downlink = cfg.downlink_params(jam.p_j_w)?;
    let uplink = cfg.uplink_params()?;
    let reqs: Vec<UserRequirement> = cfg
        .immersion
        .users
        .iter()
        .map(|u| UserRequirement {
            mi_min: u.mi_min_bps,
            uplink,
            modulation: cfg.uplink.modulation,
            downlink,
            s_k: u.s_k,
            readapt_jammer: false,
        })
        .collect();
    let bw = per_user_bandwidth(&reqs, cfg.bandwidth_bracket()?)
        .map_err(|e| CliError::Failure(format!("immersion infeasible: {e}")))?;
    let total_hz: f64 = bw.iter().sum();
    let unit = cfg.advertising.bandwidth_unit_hz;
    let total_units = total_hz / unit;
    let p = cfg.advert_params(cfg.advertising.eta1)?;
    let eq = find_c2(&p, p.t1)?;
    let bound = solve_t2(&eq, &p, total_units)?;
    let users = cfg
        .immersion
        .users
        .iter()
        .zip(&bw)
        .enumerate()
        .map(|(index, (u, &b))| UserReport { index, mi_min_bps: u.mi_min_bps, s_k: u.s_k, basic_bandwidth_hz: b })
        .collect();
    let report = ImmersionReport {
        meta: &ctx.meta,
        uplink_ber: avg_ber(&uplink, cfg.uplink.modulation)?,
        p_j_w: jam.p_j_w,
        users,
        total_basic_bandwidth_hz: total_hz,
        total_basic_bandwidth_units: total_units,
        acceleration_bandwidth_units: p.b_total - total_units,
        t2: bound.t2,
        effective_horizon: bound.effective_horizon,
        t2_diagnostic: bound.diagnostic,
    };
    write_json(&ctx.path("immersion.json"), &report)
}

// -------------------------------------------------------------------- figures

pub fn figures(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    fig1_table(ctx)?.write_csv(&ctx.path("fig1.csv"), &ctx.meta)?;
    let (fig2, _) = downlink_table(cfg, cfg.downlink.bandwidth_sweep_hz)?;
    fig2.write_csv(&ctx.path("fig2.csv"), &ctx.meta)?;
    let fig3 = uplink_table(cfg, cfg.uplink.power_sweep_dbw, &cfg.uplink.modulations, &cfg.uplink.channels)?;
    fig3.write_csv(&ctx.path("fig3.csv"), &ctx.meta)
}
