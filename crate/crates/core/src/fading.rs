//! Squared-envelope fading laws: α-μ for the jamming links and
//! Fisher-Snedecor F for the data links.
//!
//! Both samplers are built on [`gamma_variate`] (Marsaglia–Tsang), so a given
//! rng stream produces the same draws on every platform.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numerics::{gauss_2f1, ln_beta, ln_gamma, reg_lower_gamma};

/// α-μ distributed channel power gain with nonlinearity `alpha`, cluster
/// count `mu` and average power `mean` (linear).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaMuParams {
    pub alpha: f64,
    pub mu: f64,
    pub mean: f64,
}

/// Fisher-Snedecor F distributed channel power gain with multipath severity
/// `m`, shadowing severity `m_s` and average power `mean` (linear).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherFParams {
    pub m: f64,
    pub m_s: f64,
    pub mean: f64,
}

/// Either fading law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum FadingModel {
    AlphaMu(AlphaMuParams),
    FisherF(FisherFParams),
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn check_point(v: f64) -> Result<()> {
    if v >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!("channel gain argument must be >= 0, got {v}")))
    }
}

/// Gamma(shape, 1) variate by Marsaglia–Tsang squeeze; shapes below one use
/// the G(a+1)·U^(1/a) boost.
pub fn gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        let u: f64 = 1.0 - rng.gen::<f64>();
        return gamma_variate(shape + 1.0, rng) * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u: f64 = 1.0 - rng.gen::<f64>();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

impl AlphaMuParams {
    pub fn new(alpha: f64, mu: f64, mean: f64) -> Result<Self> {
        let p = Self { alpha, mu, mean };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("alpha", self.alpha)?;
        positive("mu", self.mu)?;
        positive("mean", self.mean)
    }

    /// Scale β = mean·Γ(μ)/Γ(μ + 2/α), chosen so the law has the stated mean.
    pub fn beta(&self) -> f64 {
        self.mean * (ln_gamma(self.mu) - ln_gamma(self.mu + 2.0 / self.alpha)).exp()
    }

    /// Same law with the mean multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            mean: self.mean * factor,
            ..*self
        }
    }

    pub fn pdf(&self, gamma: f64) -> Result<f64> {
        check_point(gamma)?;
        Ok(self.pdf_raw(gamma))
    }

    pub(crate) fn pdf_raw(&self, gamma: f64) -> f64 {
        let (a, mu) = (self.alpha, self.mu);
        let beta = self.beta();
        let k = a * mu / 2.0;
        if gamma == 0.0 {
            return match k.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Less) => f64::INFINITY,
                Some(std::cmp::Ordering::Equal) => a / (2.0 * beta * (ln_gamma(mu)).exp()),
                _ => 0.0,
            };
        }
        let ratio = gamma / beta;
        let ln = a.ln() + (k - 1.0) * gamma.ln() - (2f64).ln() - k * beta.ln() - ln_gamma(mu)
            - ratio.powf(a / 2.0);
        ln.exp()
    }

    pub fn cdf(&self, gamma: f64) -> Result<f64> {
        check_point(gamma)?;
        if gamma == 0.0 {
            return Ok(0.0);
        }
        reg_lower_gamma(self.mu, (gamma / self.beta()).powf(self.alpha / 2.0))
    }

    /// CDF for internal integrands; NaN signals a numerical failure so the
    /// surrounding quadrature reports it.
    pub(crate) fn cdf_raw(&self, gamma: f64) -> f64 {
        if gamma <= 0.0 {
            return 0.0;
        }
        self.cdf(gamma).unwrap_or(f64::NAN)
    }

    /// Draws β·G^(2/α) with G ~ Gamma(μ, 1).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.beta() * gamma_variate(self.mu, rng).powf(2.0 / self.alpha)
    }
}

impl FisherFParams {
    pub fn new(m: f64, m_s: f64, mean: f64) -> Result<Self> {
        let p = Self { m, m_s, mean };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("m", self.m)?;
        positive("mean", self.mean)?;
        if !(self.m_s > 1.0 && self.m_s.is_finite()) {
            return Err(domain(format!("m_s must be > 1 for a finite mean, got {}", self.m_s)));
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            mean: self.mean * factor,
            ..*self
        }
    }

    /// (m_s − 1)·mean, the scale shared by the PDF and CDF.
    fn shadow_scale(&self) -> f64 {
        (self.m_s - 1.0) * self.mean
    }

    /// Density at `z`. At z = 0 with m < 1 the density is unbounded and
    /// +∞ is returned.
    pub fn pdf(&self, z: f64) -> Result<f64> {
        check_point(z)?;
        Ok(self.pdf_raw(z))
    }

    pub(crate) fn pdf_raw(&self, z: f64) -> f64 {
        let (m, ms) = (self.m, self.m_s);
        let c = self.shadow_scale();
        if z == 0.0 {
            return match m.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Less) => f64::INFINITY,
                Some(std::cmp::Ordering::Equal) => (-ln_beta(m, ms) - c.ln()).exp(),
                _ => 0.0,
            };
        }
        let ln = m * m.ln() + ms * c.ln() + (m - 1.0) * z.ln()
            - ln_beta(m, ms)
            - (m + ms) * (m * z + c).ln();
        ln.exp()
    }

    pub fn cdf(&self, z: f64) -> Result<f64> {
        check_point(z)?;
        if z == 0.0 {
            return Ok(0.0);
        }
        if z.is_infinite() {
            return Ok(1.0);
        }
        let (m, ms) = (self.m, self.m_s);
        let u = m * z / self.shadow_scale();
        let lb = ln_beta(m, ms);
        // 1 − F(z) ~ u^(−m_s)/(m_s·B); past this point the CDF is 1 in f64
        if -ms * u.ln() - ms.ln() - lb < -40.0 {
            return Ok(1.0);
        }
        let h = gauss_2f1(m, m + ms, m + 1.0, -u)?;
        Ok(((m * u.ln() - m.ln() - lb).exp() * h).clamp(0.0, 1.0))
    }

    pub(crate) fn cdf_raw(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        self.cdf(z).unwrap_or(f64::NAN)
    }

    /// Draws (m_s − 1)·mean·G₁/(m·G₂) with G₁ ~ Gamma(m, 1), G₂ ~ Gamma(m_s, 1).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g1 = gamma_variate(self.m, rng);
        let g2 = gamma_variate(self.m_s, rng);
        self.shadow_scale() * g1 / (self.m * g2)
    }
}

impl FadingModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            FadingModel::AlphaMu(p) => p.validate(),
            FadingModel::FisherF(p) => p.validate(),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            FadingModel::AlphaMu(p) => p.mean,
            FadingModel::FisherF(p) => p.mean,
        }
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        match self {
            FadingModel::AlphaMu(p) => p.pdf(x),
            FadingModel::FisherF(p) => p.pdf(x),
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        match self {
            FadingModel::AlphaMu(p) => p.cdf(x),
            FadingModel::FisherF(p) => p.cdf(x),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            FadingModel::AlphaMu(p) => p.sample(rng),
            FadingModel::FisherF(p) => p.sample(rng),
        }
    }
}

impl From<AlphaMuParams> for FadingModel {
    fn from(p: AlphaMuParams) -> Self {
        FadingModel::AlphaMu(p)
    }
}

impl From<FisherFParams> for FadingModel {
    fn from(p: FisherFParams) -> Self {
        FadingModel::FisherF(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_semi_infinite, QuadratureSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn am(alpha: f64, mu: f64, mean: f64) -> AlphaMuParams {
        AlphaMuParams::new(alpha, mu, mean).unwrap()
    }

    fn ff(m: f64, m_s: f64, mean: f64) -> FisherFParams {
        FisherFParams::new(m, m_s, mean).unwrap()
    }

    #[test]
    fn alpha_mu_exponential_reduction() {
        let p = am(2.0, 1.0, 1.0);
        assert!((p.beta() - 1.0).abs() < 1e-14);
        assert!((p.pdf(1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-14);
        assert!((p.pdf(0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((p.cdf(1.0).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-14);
        assert_eq!(p.cdf(0.0).unwrap(), 0.0);
    }

    #[test]
    fn alpha_mu_nakagami_two() {
        let p = am(2.0, 2.0, 1.0);
        assert!((p.beta() - 0.5).abs() < 1e-14);
        assert!((p.pdf(1.0).unwrap() - 4.0 * (-2.0f64).exp()).abs() < 1e-13);
        assert!((p.cdf(1.0).unwrap() - (1.0 - 3.0 * (-2.0f64).exp())).abs() < 1e-13);
        // the same value by quadrature of the density
        let spec = QuadratureSpec::default();
        let q = crate::numerics::integrate_interval(|g| p.pdf_raw(g), 0.0, 1.0, &spec).unwrap();
        assert!((q.value - p.cdf(1.0).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn negative_arguments_rejected() {
        assert!(am(2.0, 1.0, 1.0).pdf(-1.0).is_err());
        assert!(am(2.0, 1.0, 1.0).cdf(-1e-9).is_err());
        assert!(ff(1.0, 2.0, 1.0).pdf(-1.0).is_err());
        assert!(ff(1.0, 2.0, 1.0).cdf(-1.0).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(AlphaMuParams::new(0.0, 1.0, 1.0).is_err());
        assert!(AlphaMuParams::new(2.0, -1.0, 1.0).is_err());
        assert!(FisherFParams::new(1.0, 1.0, 1.0).is_err());
        assert!(FisherFParams::new(1.0, 0.5, 1.0).is_err());
        assert!(FisherFParams::new(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn fisher_f_simple_case() {
        // m = 1, m_s = 2, mean = 1: f(z) = 2/(1+z)^3, F(z) = 1 − (1+z)^−2
        let p = ff(1.0, 2.0, 1.0);
        assert!((p.pdf(0.0).unwrap() - 2.0).abs() < 1e-13);
        assert!((p.pdf(1.0).unwrap() - 0.25).abs() < 1e-14);
        assert!((p.cdf(1.0).unwrap() - 0.75).abs() < 1e-13);
        assert!((p.cdf(3.0).unwrap() - 0.9375).abs() < 1e-13);
        assert_eq!(p.cdf(0.0).unwrap(), 0.0);
    }

    #[test]
    fn fisher_f_singular_origin() {
        assert_eq!(ff(0.6, 3.0, 1.0).pdf(0.0).unwrap(), f64::INFINITY);
        assert_eq!(ff(1.5, 3.0, 1.0).pdf(0.0).unwrap(), 0.0);
    }

    #[test]
    fn fisher_f_mean_by_quadrature() {
        let p = ff(2.5, 3.0, 4.0);
        let spec = QuadratureSpec::default();
        let q = integrate_semi_infinite(|z| z * p.pdf_raw(z), &spec).unwrap();
        assert!((q.value - 4.0).abs() < 1e-6, "{q:?}");
    }

    #[test]
    fn fisher_f_cdf_against_incomplete_beta() {
        // frozen regularized incomplete beta values I_{mz/(mz+c)}(m, m_s)
        let cases = [
            ((2.5, 1.7, 2.0), 0.01, 0.000_103_797_643_045_573_25),
            ((2.5, 1.7, 2.0), 0.3, 0.150_907_209_214_182_33),
            ((2.5, 1.7, 2.0), 3.0, 0.860_677_022_131_141),
            ((2.5, 1.7, 2.0), 50.0, 0.998_229_523_975_739_2),
            ((2.5, 1.7, 2.0), 1e4, 0.999_999_776_614_296_1),
            ((0.7, 3.3, 1.0), 0.01, 0.042_389_238_681_032_71),
            ((0.7, 3.3, 1.0), 3.0, 0.928_091_294_388_082_5),
            ((0.7, 3.3, 1.0), 1e4, 0.999_999_999_998_332_4),
            ((4.0, 4.0, 10.0), 0.01, 1.096_780_515_428_436e-10),
            ((4.0, 4.0, 10.0), 3.0, 0.108_273_642_056_334_6),
            ((4.0, 4.0, 10.0), 50.0, 0.992_708_746_046_916),
        ];
        for ((m, ms, k), z, want) in cases {
            let got = ff(m, ms, k).cdf(z).unwrap();
            assert!(
                (got - want).abs() <= 1e-10 * want.max(1e-3),
                "F({m},{ms},{k}) at {z}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn fisher_scale_family_draws() {
        let base = ff(1.7, 2.4, 1.0);
        let doubled = base.scaled(2.0);
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let a = base.sample(&mut r1);
            let b = doubled.sample(&mut r2);
            assert!((b - 2.0 * a).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn gamma_variate_positive_and_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for shape in [0.3, 1.0, 4.5] {
            let n = 200_000;
            let mut sum = 0.0;
            for _ in 0..n {
                let g = gamma_variate(shape, &mut rng);
                assert!(g > 0.0);
                sum += g;
            }
            let mean = sum / n as f64;
            // mean = shape, sd of the mean = sqrt(shape / n)
            assert!((mean - shape).abs() < 4.0 * (shape / n as f64).sqrt(), "{shape}: {mean}");
        }
    }
}
