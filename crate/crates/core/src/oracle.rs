//! Independent checks for the analytic paths: Monte Carlo estimators for the
//! detection error, covert rate and BER, and a fixed-step RK4 integrator for
//! the market-share dynamics.
//!
//! Samples are drawn in fixed-size chunks. Chunk `i` uses a ChaCha8 generator
//! seeded from the master seed on stream `i`, and chunk statistics are merged
//! in index order, so estimates do not depend on the number of worker threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::advertising::{AdvertParams, Equilibrium, Trajectory};
use crate::covert::CovertLinkParams;
use crate::error::{domain, Result};
use crate::uplink::{Modulation, UplinkParams};

/// Samples per independent random stream.
pub const CHUNK_SAMPLES: u64 = 1 << 16;
pub const MIN_SAMPLES: u64 = 10_000;
/// Local RK4 error above which [`integrate_state`] reports a warning.
pub const RK4_WARN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// |value − mean| in units of the standard error (∞ if the estimate has
    /// no spread and differs from `value`).
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (value - self.mean).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

/// Count, mean and sum of squared deviations; merged with Chan's update.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64);
        Moments { n, mean, m2 }
    }
}

/// Generator for chunk `index` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn check_samples(samples: u64) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(domain(format!("Monte Carlo needs at least {MIN_SAMPLES} samples, got {samples}")));
    }
    Ok(())
}

/// Mean of `draw` over `samples` draws, chunked as described above.
fn chunked_mean<F>(samples: u64, seed: u64, draw: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks = samples.div_ceil(CHUNK_SAMPLES);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let len = CHUNK_SAMPLES.min(samples - i * CHUNK_SAMPLES);
            let mut rng = chunk_rng(seed, i);
            let mut m = Moments::default();
            for _ in 0..len {
                m.push(draw(&mut rng));
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = if total.n > 1 { total.m2 / (total.n - 1) as f64 } else { 0.0 };
    McEstimate {
        mean: total.mean,
        std_error: (var / total.n as f64).sqrt(),
        samples,
        seed,
    }
}

fn exact(value: f64, samples: u64, seed: u64) -> McEstimate {
    McEstimate { mean: value, std_error: 0.0, samples, seed }
}

/// Simulated FA + MD at threshold `epsilon`. Each draw evaluates both
/// hypotheses on the same channel realisation; the two events are disjoint,
/// so their sum is a single Bernoulli indicator.
pub fn mc_dep(p: &CovertLinkParams, epsilon: f64, samples: u64, seed: u64) -> Result<McEstimate> {
    check_samples(samples)?;
    if epsilon <= p.sigma2_aw {
        return Ok(exact(1.0, samples, seed));
    }
    let y = epsilon - p.sigma2_aw;
    Ok(chunked_mean(samples, seed, |rng| {
        let jam = p.p_j * p.h_jw.sample(rng);
        let sig = p.p_a * p.h_aw.sample(rng);
        let false_alarm = jam > y;
        let miss = jam + sig < y;
        f64::from(u8::from(false_alarm || miss))
    }))
}

/// Simulated false-alarm and miss-detection probabilities separately.
pub fn mc_detection_components(
    p: &CovertLinkParams,
    epsilon: f64,
    samples: u64,
    seed: u64,
) -> Result<(McEstimate, McEstimate)> {
    check_samples(samples)?;
    if epsilon <= p.sigma2_aw {
        return Ok((exact(1.0, samples, seed), exact(0.0, samples, seed)));
    }
    let y = epsilon - p.sigma2_aw;
    let fa = chunked_mean(samples, seed, |rng| {
        let jam = p.p_j * p.h_jw.sample(rng);
        let _ = p.h_aw.sample(rng);
        f64::from(u8::from(jam > y))
    });
    let md = chunked_mean(samples, seed, |rng| {
        let jam = p.p_j * p.h_jw.sample(rng);
        let sig = p.p_a * p.h_aw.sample(rng);
        f64::from(u8::from(jam + sig < y))
    });
    Ok((fa, md))
}

/// Simulated B·log₂(1 + p_a·Z / (B·σ²_ak + p_j·Υ)), bit/s.
pub fn mc_rate(p: &CovertLinkParams, bandwidth_hz: f64, samples: u64, seed: u64) -> Result<McEstimate> {
    check_samples(samples)?;
    if !(bandwidth_hz >= 0.0) {
        return Err(domain("bandwidth must be >= 0"));
    }
    if bandwidth_hz == 0.0 {
        return Ok(exact(0.0, samples, seed));
    }
    let noise = bandwidth_hz * p.sigma2_ak_per_hz;
    Ok(chunked_mean(samples, seed, |rng| {
        let z = p.h_ak.sample(rng);
        let u = p.h_jk.sample(rng);
        bandwidth_hz * (p.p_a * z / (noise + p.p_j * u)).ln_1p() / std::f64::consts::LN_2
    }))
}

/// Conditional bit error probability averaged over simulated SNRs.
pub fn mc_ber(p: &UplinkParams, modulation: Modulation, samples: u64, seed: u64) -> Result<McEstimate> {
    check_samples(samples)?;
    if p.p_k == 0.0 {
        return Ok(exact(0.5, samples, seed));
    }
    let scale = p.p_k / p.sigma2_ka;
    Ok(chunked_mean(samples, seed, |rng| {
        let g = scale * p.h_ka.sample(rng);
        modulation.conditional_bep(g)
    }))
}

/// RK4 path with its step-doubling error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateIntegration {
    pub trajectory: Trajectory,
    /// Largest per-step error estimate, |x_full − x_two_halves| / 15.
    pub max_local_error: f64,
    pub warning: Option<String>,
}

/// Fixed-step RK4 for ẋ = η₁·a*(x)·√(1−x) − η₂·x from x(0) = x₀.
pub fn integrate_state(p: &AdvertParams, eq: &Equilibrium, horizon: f64, steps: usize) -> Result<StateIntegration> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(domain(format!("horizon must be finite and > 0, got {horizon}")));
    }
    if steps < 100 {
        return Err(domain(format!("integrate_state needs at least 100 steps, got {steps}")));
    }
    let gain = eq.lambda1_bar * p.eta1 / ((1.0 + eq.c2) * p.h_a);
    let rhs = |x: f64| {
        let room = (1.0 - x).max(0.0).sqrt();
        p.eta1 * (gain * room) * room - p.eta2 * x
    };
    let rk4 = |x: f64, h: f64| {
        let k1 = rhs(x);
        let k2 = rhs(x + 0.5 * h * k1);
        let k3 = rhs(x + 0.5 * h * k2);
        let k4 = rhs(x + h * k3);
        x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let h = horizon / steps as f64;
    let mut times = Vec::with_capacity(steps + 1);
    let mut xs = Vec::with_capacity(steps + 1);
    let mut x = p.x0;
    let mut max_local_error = 0.0f64;
    times.push(0.0);
    xs.push(x);
    for i in 1..=steps {
        let full = rk4(x, h);
        let halves = rk4(rk4(x, 0.5 * h), 0.5 * h);
        max_local_error = max_local_error.max((full - halves).abs() / 15.0);
        x = full;
        times.push(h * i as f64);
        xs.push(x);
    }
    let warning = (max_local_error > RK4_WARN_TOL).then(|| {
        format!("RK4 local error estimate {max_local_error:.3e} exceeds {RK4_WARN_TOL:e}; use more steps")
    });
    Ok(StateIntegration {
        trajectory: Trajectory::from_shares(eq, p, times, xs),
        max_local_error,
        warning,
    })
}

/// Draws `n` standard uniforms from chunk 0 of `seed`; handy for seeding
/// randomized parameter sweeps reproducibly.
pub fn uniform_draws(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = chunk_rng(seed, 0);
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::advertising::equilibrium;
    use crate::fading::{AlphaMuParams, FisherFParams};

    fn downlink() -> CovertLinkParams {
        CovertLinkParams {
            p_a: 1.0,
            p_j: 10.0,
            sigma2_aw: 0.1,
            sigma2_ak_per_hz: 1.0,
            h_jw: AlphaMuParams::new(2.0, 2.0, 3.162).unwrap(),
            h_aw: FisherFParams::new(3.0, 2.0, 1.0).unwrap(),
            h_jk: AlphaMuParams::new(2.0, 2.0, 1.0).unwrap(),
            h_ak: FisherFParams::new(1.0, 2.0, 1.0).unwrap(),
            delta: 0.03,
        }
    }

    fn advert() -> AdvertParams {
        AdvertParams {
            pi: 10.0,
            h_a: 3.0,
            eta1: 2.0,
            eta2: 1.3,
            x0: 0.3,
            t1: 5.0,
            n_budget: 36.0,
            p_l: 2.0,
            b_total: 10.0,
            m_saturation: 2.0,
        }
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert_eq!(merged.n, whole.n);
        assert!((merged.mean - whole.mean).abs() < 1e-12);
        assert!((merged.m2 - whole.m2).abs() < 1e-8 * whole.m2);
    }

    #[test]
    fn degenerate_cases_are_exact() {
        let p = downlink();
        let e = mc_dep(&p, 0.05, 20_000, 1).unwrap();
        assert_eq!((e.mean, e.std_error), (1.0, 0.0));
        assert_eq!(mc_rate(&p, 0.0, 20_000, 1).unwrap().mean, 0.0);
        let up = UplinkParams { p_k: 0.0, sigma2_ka: 1.0, h_ka: FisherFParams::new(2.0, 3.0, 1.0).unwrap() };
        assert_eq!(mc_ber(&up, Modulation::Dpsk, 20_000, 1).unwrap().mean, 0.5);
        assert!(mc_dep(&p, 1.0, 10, 1).is_err());
    }

    #[test]
    fn blind_warden_sim() {
        let p = CovertLinkParams { p_a: 0.0, ..downlink() };
        let e = mc_dep(&p, 3.0, 50_000, 7).unwrap();
        assert_eq!(e.mean, 1.0);
    }

    #[test]
    fn reproducible_and_worker_independent() {
        let p = downlink();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_dep(&p, 5.0, 300_000, 42).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(4));
        assert_eq!(one, run(3));
        assert_ne!(one.mean, mc_dep(&p, 5.0, 300_000, 43).unwrap().mean);
    }

    #[test]
    fn components_sum_to_dep() {
        let p = downlink();
        let (fa, md) = mc_detection_components(&p, 5.0, 200_000, 9).unwrap();
        let d = mc_dep(&p, 5.0, 200_000, 9).unwrap();
        assert!((fa.mean + md.mean - d.mean).abs() < 1e-12);
    }

    #[test]
    fn rk4_matches_closed_form() {
        let p = advert();
        let eq = equilibrium(&p, 0.0).unwrap();
        let run = integrate_state(&p, &eq, 5.0, 10_000).unwrap();
        assert!(run.warning.is_none());
        for (t, x) in run.trajectory.times.iter().zip(&run.trajectory.x) {
            assert!((x - eq.share_at(&p, *t)).abs() < 1e-10);
        }
        let coarse = integrate_state(&p, &eq, 500.0, 100).unwrap();
        assert!(coarse.warning.is_some());
    }

    #[test]
    fn rk4_special_paths() {
        // no response: pure decay
        let p = AdvertParams { eta1: 0.0, ..advert() };
        let eq = equilibrium(&p, 0.0).unwrap();
        let run = integrate_state(&p, &eq, 2.0, 1000).unwrap();
        let last = *run.trajectory.x.last().unwrap();
        assert!((last - 0.3 * (-1.3f64 * 2.0).exp()).abs() < 1e-12);
        // start at the fixed point
        let p = advert();
        let eq = equilibrium(&p, 0.0).unwrap();
        let still = AdvertParams { x0: eq.x_bar, ..p };
        let run = integrate_state(&still, &eq, 5.0, 500).unwrap();
        assert!(run.trajectory.x.iter().all(|x| (x - eq.x_bar).abs() < 1e-14));
    }
}
