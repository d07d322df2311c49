//! Scenario configuration: a single JSON document with unit-suffixed keys.
//! Every field has a default, so `{}` is a complete configuration.

use std::path::{Path, PathBuf};

use covad_core::advertising::{AdvertCovertness, AdvertParams};
use covad_core::covert::CovertLinkParams;
use covad_core::fading::{AlphaMuParams, FisherFParams};
use covad_core::numerics::Bracket;
use covad_core::uplink::{Modulation, UplinkParams};
use covad_core::units::{db_to_linear, dbm_to_watts};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub advertising: AdvertisingConfig,
    pub downlink: DownlinkConfig,
    pub uplink: UplinkConfig,
    pub immersion: ImmersionConfig,
    pub validation: ValidationConfig,
    pub run: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdvertisingConfig {
    pub pi: f64,
    pub h_a: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub x0: f64,
    pub t1: f64,
    pub n_budget: f64,
    pub p_l: f64,
    /// Purchased bandwidth B_T in bandwidth units.
    pub b_total_units: f64,
    /// Saturation level M in bandwidth units.
    pub m_saturation_units: f64,
    pub bandwidth_unit_hz: f64,
    /// ΣB_k used by `advert` when computing T₂.
    pub basic_bandwidth_units: f64,
    pub eta1_series: Vec<f64>,
    pub trajectory_steps: usize,
    pub covertness: CovertnessConfig,
}

impl Default for AdvertisingConfig {
    fn default() -> Self {
        Self {
            pi: 10.0,
            h_a: 3.0,
            eta1: 2.0,
            eta2: 1.3,
            x0: 0.3,
            t1: 5.0,
            n_budget: 20.0,
            p_l: 0.4,
            b_total_units: 10.0,
            m_saturation_units: 2.0,
            bandwidth_unit_hz: 1e7,
            basic_bandwidth_units: 0.0,
            eta1_series: vec![2.0, 0.4],
            trajectory_steps: 500,
            covertness: CovertnessConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CovertnessConfig {
    pub delta1: f64,
    pub delta2: f64,
    pub j_threshold: f64,
    pub noise_margin: f64,
}

impl Default for CovertnessConfig {
    fn default() -> Self {
        Self { delta1: 1.0, delta2: 2.0, j_threshold: 10.0, noise_margin: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaMuConfig {
    pub alpha: f64,
    pub mu: f64,
    pub mean_db: f64,
}

impl AlphaMuConfig {
    fn to_params(self, path: &str) -> Result<AlphaMuParams, CliError> {
        AlphaMuParams::new(self.alpha, self.mu, db_to_linear(self.mean_db)).map_err(|e| CliError::field(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FisherConfig {
    pub m: f64,
    pub m_s: f64,
    pub mean_db: f64,
}

impl FisherConfig {
    fn to_params(self, path: &str) -> Result<FisherFParams, CliError> {
        FisherFParams::new(self.m, self.m_s, db_to_linear(self.mean_db)).map_err(|e| CliError::field(path, e))
    }
}

/// Inclusive linear grid with `steps` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl RangeConfig {
    pub fn validate(&self, path: &str) -> Result<(), CliError> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) || self.steps < 2 {
            return Err(CliError::Config(format!(
                "{path}: need finite lo < hi and steps >= 2, got {}:{}:{}",
                self.lo, self.hi, self.steps
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..self.steps)
            .map(|i| if i == n { self.hi } else { self.lo + (self.hi - self.lo) * i as f64 / n as f64 })
            .collect()
    }
}

impl std::str::FromStr for RangeConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected lo:hi:steps, got {s:?}"));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        Ok(Self {
            lo: num(parts[0])?,
            hi: num(parts[1])?,
            steps: parts[2].trim().parse().map_err(|e| format!("{:?}: {e}", parts[2]))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DownlinkConfig {
    pub p_a_dbw: f64,
    /// Fixed jamming power; when absent the covertness-constrained minimum is
    /// solved for.
    pub p_j_w: Option<f64>,
    pub sigma2_aw_w: f64,
    pub sigma2_ak_dbm_per_hz: f64,
    pub h_jw: AlphaMuConfig,
    pub h_aw: FisherConfig,
    pub h_jk: AlphaMuConfig,
    pub h_ak: FisherConfig,
    pub delta: f64,
    pub jammer_search_w: [f64; 2],
    pub bandwidth_sweep_hz: RangeConfig,
    /// Extra κ̄_ak values (dB) reported as additional rate columns.
    pub extra_kappa_ak_db: Vec<f64>,
}

impl Default for DownlinkConfig {
    fn default() -> Self {
        Self {
            p_a_dbw: 10.0,
            p_j_w: None,
            sigma2_aw_w: 0.1,
            sigma2_ak_dbm_per_hz: -174.0,
            h_jw: AlphaMuConfig { alpha: 2.0, mu: 2.0, mean_db: 5.0 },
            h_aw: FisherConfig { m: 3.0, m_s: 2.0, mean_db: 0.0 },
            h_jk: AlphaMuConfig { alpha: 2.0, mu: 2.0, mean_db: 5.0 },
            h_ak: FisherConfig { m: 3.0, m_s: 2.0, mean_db: 0.0 },
            delta: 0.03,
            jammer_search_w: [1e-3, 1e5],
            bandwidth_sweep_hz: RangeConfig { lo: 1e6, hi: 1e8, steps: 12 },
            extra_kappa_ak_db: vec![5.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelPair {
    pub m: f64,
    pub m_s: f64,
}

impl std::str::FromStr for ChannelPair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (m, ms) = s.split_once(':').ok_or_else(|| format!("expected m:m_s, got {s:?}"))?;
        Ok(Self {
            m: m.trim().parse().map_err(|e| format!("{m:?}: {e}"))?,
            m_s: ms.trim().parse().map_err(|e| format!("{ms:?}: {e}"))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UplinkConfig {
    pub p_k_dbw: f64,
    pub sigma2_ka_dbw: f64,
    pub h_ka: FisherConfig,
    pub modulation: Modulation,
    pub power_sweep_dbw: RangeConfig,
    pub modulations: Vec<Modulation>,
    pub channels: Vec<ChannelPair>,
    pub target_ber: f64,
    pub power_search_dbw: [f64; 2],
}

impl Default for UplinkConfig {
    fn default() -> Self {
        Self {
            p_k_dbw: 10.0,
            sigma2_ka_dbw: 1.0,
            h_ka: FisherConfig { m: 4.0, m_s: 4.0, mean_db: 10.0 },
            modulation: Modulation::Dpsk,
            power_sweep_dbw: RangeConfig { lo: -10.0, hi: 30.0, steps: 41 },
            modulations: Modulation::ALL.to_vec(),
            channels: vec![
                ChannelPair { m: 2.0, m_s: 3.0 },
                ChannelPair { m: 3.0, m_s: 4.0 },
                ChannelPair { m: 4.0, m_s: 4.0 },
            ],
            target_ber: 1e-5,
            power_search_dbw: [-20.0, 40.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserConfig {
    pub mi_min_bps: f64,
    pub s_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImmersionConfig {
    pub users: Vec<UserConfig>,
    pub bandwidth_search_hz: [f64; 2],
}

impl Default for ImmersionConfig {
    fn default() -> Self {
        Self {
            users: vec![
                UserConfig { mi_min_bps: 1e6, s_k: 1.0 },
                UserConfig { mi_min_bps: 2e6, s_k: 0.8 },
            ],
            bandwidth_search_hz: [0.0, 1e10],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationConfig {
    /// Allowed |analytic − MC| in MC standard errors.
    pub z_max: f64,
    pub rate_rel_tol: f64,
    pub rk4_abs_tol: f64,
    pub j_star_rel_tol: f64,
    pub budget_rel_tol: f64,
    pub slackness_tol: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            z_max: 3.0,
            rate_rel_tol: 0.01,
            rk4_abs_tol: 1e-6,
            j_star_rel_tol: 1e-6,
            budget_rel_tol: 1e-9,
            slackness_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub mc_samples: u64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { seed: 1, mc_samples: 1_000_000, output_dir: PathBuf::from("covad-out") }
    }
}

fn check(ok: bool, path: &str, msg: impl std::fmt::Display) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!("{path}: {msg}")))
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("{path}: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Short SHA-256 of the configuration, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut normalized = self.clone();
        normalized.run.output_dir = PathBuf::new();
        let digest = Sha256::digest(serde_json::to_vec(&normalized).expect("config serializes"));
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Checks every module invariant, reporting the first failure by field path.
    pub fn validate(&self) -> Result<(), CliError> {
        let a = &self.advertising;
        self.advert_params(a.eta1)?;
        for (i, e) in a.eta1_series.iter().enumerate() {
            check(*e > 0.0 && e.is_finite(), &format!("advertising.eta1_series[{i}]"), "must be > 0")?;
        }
        check(a.bandwidth_unit_hz > 0.0 && a.bandwidth_unit_hz.is_finite(), "advertising.bandwidth_unit_hz", "must be > 0")?;
        check(a.basic_bandwidth_units >= 0.0, "advertising.basic_bandwidth_units", "must be >= 0")?;
        check(a.trajectory_steps >= 2, "advertising.trajectory_steps", "must be >= 2")?;
        let c = &a.covertness;
        check(c.delta1 > 0.0, "advertising.covertness.delta1", "must be > 0")?;
        check(c.delta2 > 0.0, "advertising.covertness.delta2", "must be > 0")?;
        check(c.j_threshold > 0.0, "advertising.covertness.j_threshold", "must be > 0")?;
        check(c.noise_margin >= 0.0, "advertising.covertness.noise_margin", "must be >= 0")?;

        let d = &self.downlink;
        self.downlink_params(d.p_j_w.unwrap_or(0.0))?;
        if let Some(p) = d.p_j_w {
            check(p >= 0.0 && p.is_finite(), "downlink.p_j_w", "must be >= 0")?;
        }
        self.jammer_bracket()?;
        d.bandwidth_sweep_hz.validate("downlink.bandwidth_sweep_hz")?;
        check(d.bandwidth_sweep_hz.lo > 0.0, "downlink.bandwidth_sweep_hz.lo", "must be > 0")?;

        let u = &self.uplink;
        self.uplink_params()?;
        u.power_sweep_dbw.validate("uplink.power_sweep_dbw")?;
        for (i, ch) in u.channels.iter().enumerate() {
            FisherFParams::new(ch.m, ch.m_s, 1.0).map_err(|e| CliError::field(&format!("uplink.channels[{i}]"), e))?;
        }
        check(!u.modulations.is_empty(), "uplink.modulations", "must not be empty")?;
        check(!u.channels.is_empty(), "uplink.channels", "must not be empty")?;
        check(u.target_ber > 0.0 && u.target_ber < 0.5, "uplink.target_ber", "must lie in (0, 0.5)")?;
        self.power_bracket()?;

        for (i, user) in self.immersion.users.iter().enumerate() {
            check(user.mi_min_bps > 0.0, &format!("immersion.users[{i}].mi_min_bps"), "must be > 0")?;
            check(user.s_k > 0.0, &format!("immersion.users[{i}].s_k"), "must be > 0")?;
        }
        let [lo, hi] = self.immersion.bandwidth_search_hz;
        check(lo >= 0.0 && lo < hi && hi.is_finite(), "immersion.bandwidth_search_hz", "need 0 <= lo < hi")?;

        let v = &self.validation;
        for (name, x) in [
            ("z_max", v.z_max),
            ("rate_rel_tol", v.rate_rel_tol),
            ("rk4_abs_tol", v.rk4_abs_tol),
            ("j_star_rel_tol", v.j_star_rel_tol),
            ("budget_rel_tol", v.budget_rel_tol),
            ("slackness_tol", v.slackness_tol),
        ] {
            check(x >= 0.0 && x.is_finite(), &format!("validation.{name}"), "must be finite and >= 0")?;
        }
        check(self.run.mc_samples >= covad_core::oracle::MIN_SAMPLES, "run.mc_samples", "must be >= 10000")?;
        Ok(())
    }

    pub fn advert_params(&self, eta1: f64) -> Result<AdvertParams, CliError> {
        let a = &self.advertising;
        let p = AdvertParams {
            pi: a.pi,
            h_a: a.h_a,
            eta1,
            eta2: a.eta2,
            x0: a.x0,
            t1: a.t1,
            n_budget: a.n_budget,
            p_l: a.p_l,
            b_total: a.b_total_units,
            m_saturation: a.m_saturation_units,
        };
        p.validate().map_err(|e| CliError::field("advertising", e))?;
        Ok(p)
    }

    pub fn advert_covertness(&self, noise_effort: f64) -> AdvertCovertness {
        let c = &self.advertising.covertness;
        AdvertCovertness { delta1: c.delta1, delta2: c.delta2, j_threshold: c.j_threshold, noise_effort }
    }

    pub fn downlink_params(&self, p_j: f64) -> Result<CovertLinkParams, CliError> {
        let d = &self.downlink;
        let p = CovertLinkParams {
            p_a: db_to_linear(d.p_a_dbw),
            p_j,
            sigma2_aw: d.sigma2_aw_w,
            sigma2_ak_per_hz: dbm_to_watts(d.sigma2_ak_dbm_per_hz),
            h_jw: d.h_jw.to_params("downlink.h_jw")?,
            h_aw: d.h_aw.to_params("downlink.h_aw")?,
            h_jk: d.h_jk.to_params("downlink.h_jk")?,
            h_ak: d.h_ak.to_params("downlink.h_ak")?,
            delta: d.delta,
        };
        p.validate().map_err(|e| CliError::field("downlink", e))?;
        Ok(p)
    }

    pub fn jammer_bracket(&self) -> Result<Bracket, CliError> {
        let [lo, hi] = self.downlink.jammer_search_w;
        check(lo >= 0.0, "downlink.jammer_search_w", "lower end must be >= 0")?;
        Bracket::new(lo, hi).map_err(|e| CliError::field("downlink.jammer_search_w", e))
    }

    pub fn uplink_params(&self) -> Result<UplinkParams, CliError> {
        let u = &self.uplink;
        let p = UplinkParams {
            p_k: db_to_linear(u.p_k_dbw),
            sigma2_ka: db_to_linear(u.sigma2_ka_dbw),
            h_ka: u.h_ka.to_params("uplink.h_ka")?,
        };
        p.validate().map_err(|e| CliError::field("uplink", e))?;
        Ok(p)
    }

    pub fn power_bracket(&self) -> Result<Bracket, CliError> {
        let [lo, hi] = self.uplink.power_search_dbw;
        Bracket::new(lo, hi).map_err(|e| CliError::field("uplink.power_search_dbw", e))
    }

    pub fn bandwidth_bracket(&self) -> Result<Bracket, CliError> {
        let [lo, hi] = self.immersion.bandwidth_search_hz;
        Bracket::new(lo, hi).map_err(|e| CliError::field("immersion.bandwidth_search_hz", e))
    }
}
