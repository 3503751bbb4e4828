//! Credibility of a submitted limit under a reference posterior: flat prior
//! on `s >= 0` and independent gamma priors on `b` and `eps`, updated by the
//! subsidiary counts.
//!
//! Integrating the main-count likelihood over `s` in closed form,
//!
//! ```text
//! ∫_0^R Pois(n; eps*s + b) ds = (P(n+1, b + eps*R) - P(n+1, b)) / eps
//! ```
//!
//! so `P(S <= R | data)` is a ratio of two expectations over the posterior of
//! `(b, eps)` given `(y, z)`, which is a product of gammas.

use crate::ds_limits::ChannelObservation;
use crate::error::{Error, Result};
use crate::sampling::RngHandle;
use crate::specfun::{gamma_pq, gamma_quantile, gauss_legendre};

/// A gamma prior given by its mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPrior {
    pub mean: f64,
    pub sd: f64,
}

impl GammaPrior {
    pub fn shape(&self) -> f64 {
        (self.mean / self.sd).powi(2)
    }

    pub fn scale(&self) -> f64 {
        self.sd * self.sd / self.mean
    }

    /// Posterior `(shape, scale)` after observing `k ~ Pois(exposure * rate)`.
    pub fn posterior(&self, k: u64, exposure: f64) -> (f64, f64) {
        let scale = self.scale();
        (self.shape() + k as f64, scale / (1.0 + exposure * scale))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CredibilityConfig {
    pub b_prior: GammaPrior,
    pub e_prior: GammaPrior,
}

impl CredibilityConfig {
    pub fn new(b_prior: GammaPrior, e_prior: GammaPrior) -> Result<Self> {
        let cfg = Self { b_prior, e_prior };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for g in [self.b_prior, self.e_prior] {
            if !(g.mean > 0.0 && g.sd > 0.0) || !g.mean.is_finite() || !g.sd.is_finite() {
                return Err(Error::InvalidConfig(format!("gamma prior needs positive mean and sd, got {g:?}")));
            }
        }
        Ok(())
    }

    /// `b`: mean 3, sd 0.3; `eps`: mean 1, sd 0.1.
    pub fn task1a() -> Self {
        Self { b_prior: GammaPrior { mean: 3.0, sd: 0.3 }, e_prior: GammaPrior { mean: 1.0, sd: 0.1 } }
    }

    /// `b`: mean 0.31, sd 0.1; `eps`: mean 0.1, sd 0.03.
    pub fn task1b() -> Self {
        Self { b_prior: GammaPrior { mean: 0.31, sd: 0.1 }, e_prior: GammaPrior { mean: 0.1, sd: 0.03 } }
    }

    /// [`Self::task1b`] with the background mean at the coverage study's 0.3.
    pub fn task1b_coverage_mean() -> Self {
        Self { b_prior: GammaPrior { mean: 0.3, sd: 0.1 }, ..Self::task1b() }
    }

    fn posteriors(&self, ch: &ChannelObservation) -> ((f64, f64), (f64, f64)) {
        (self.b_prior.posterior(ch.y, ch.t), self.e_prior.posterior(ch.z, ch.u))
    }
}

/// Likelihood mass `∫_0^R Pois(n; eps*s + b) ds` for one `(b, eps)`.
fn mass_below(n: u64, b: f64, eps: f64, r: f64) -> f64 {
    let a = n as f64 + 1.0;
    if r.is_infinite() {
        return gamma_pq(a, b).1 / eps;
    }
    let hi = b + eps * r;
    // difference of whichever tail is small, to avoid cancellation
    if b < a {
        (gamma_pq(a, hi).0 - gamma_pq(a, b).0) / eps
    } else {
        (gamma_pq(a, b).1 - gamma_pq(a, hi).1) / eps
    }
}

/// `Pois(n; b + eps*R)`, the derivative of [`mass_below`] in `R`.
fn density_at(n: u64, b: f64, eps: f64, r: f64) -> f64 {
    use crate::specfun::ln_gamma_unchecked;
    let lam = b + eps * r;
    if lam == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    (nf * lam.ln() - lam - ln_gamma_unchecked(nf + 1.0)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CredibilityEstimate {
    pub value: f64,
    pub std_err: f64,
    pub n_samples: usize,
}

fn draw_nuisance(ch: &ChannelObservation, cfg: &CredibilityConfig, n_samples: usize, rng: &mut RngHandle) -> Vec<(f64, f64)> {
    let ((kb, sb), (ke, se)) = cfg.posteriors(ch);
    (0..n_samples).map(|_| (rng.gamma(kb, sb), rng.gamma(ke, se))).collect()
}

fn ratio_estimate(num: &[f64], den: &[f64]) -> Result<CredibilityEstimate> {
    let n = num.len() as f64;
    let mean_num = num.iter().sum::<f64>() / n;
    let mean_den = den.iter().sum::<f64>() / n;
    if !(mean_den > 0.0) || !mean_den.is_finite() {
        return Err(Error::NoPosteriorMass(format!("posterior normalization is {mean_den}")));
    }
    let ratio = mean_num / mean_den;
    // delta method for a ratio of means
    let var = if num.len() > 1 {
        num.iter().zip(den).map(|(a, d)| (a - ratio * d).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(CredibilityEstimate { value: ratio.clamp(0.0, 1.0), std_err: (var / n).sqrt() / mean_den, n_samples: num.len() })
}

/// `P(S <= limit | n, y, z)` by Monte Carlo over the nuisance posterior.
pub fn credibility(
    limit: f64,
    ch: &ChannelObservation,
    cfg: &CredibilityConfig,
    n_samples: usize,
    rng: &mut RngHandle,
) -> Result<CredibilityEstimate> {
    Ok(credibility_curve(&[limit], ch, cfg, n_samples, rng)?[0])
}

/// Credibilities of several limits from one shared nuisance sample, so the
/// values are nondecreasing in the limit.
pub fn credibility_curve(
    limits: &[f64],
    ch: &ChannelObservation,
    cfg: &CredibilityConfig,
    n_samples: usize,
    rng: &mut RngHandle,
) -> Result<Vec<CredibilityEstimate>> {
    cfg.validate()?;
    ch.validate()?;
    if n_samples == 0 {
        return Err(Error::InvalidConfig("need at least one sample".into()));
    }
    if let Some(l) = limits.iter().find(|l| !(**l >= 0.0)) {
        return Err(Error::domain("credibility", format!("limit {l} must be >= 0")));
    }
    let draws = draw_nuisance(ch, cfg, n_samples, rng);
    let den: Vec<f64> = draws.iter().map(|&(b, e)| mass_below(ch.n, b, e, f64::INFINITY)).collect();
    limits
        .iter()
        .map(|&r| {
            let num: Vec<f64> = draws.iter().map(|&(b, e)| mass_below(ch.n, b, e, r)).collect();
            ratio_estimate(&num, &den)
        })
        .collect()
}

/// Cross-check that also samples `s`: given `(b, eps)`, `eps*s + b` is a
/// Gamma(n+1) variate truncated to `[b, inf)`, and each draw is weighted by
/// the likelihood mass `(1 - P(n+1, b)) / eps`.
pub fn credibility_by_sampling(
    limit: f64,
    ch: &ChannelObservation,
    cfg: &CredibilityConfig,
    n_samples: usize,
    rng: &mut RngHandle,
) -> Result<CredibilityEstimate> {
    cfg.validate()?;
    let draws = draw_nuisance(ch, cfg, n_samples, rng);
    let a = ch.n as f64 + 1.0;
    let mut num = Vec::with_capacity(n_samples);
    let mut den = Vec::with_capacity(n_samples);
    for (b, e) in draws {
        let w = mass_below(ch.n, b, e, f64::INFINITY);
        // inverse-CDF draw from the truncated gamma
        let q_b = gamma_pq(a, b).1;
        let u = rng.uniform();
        let p = 1.0 - q_b * (1.0 - u);
        let lam = if p >= 1.0 || p <= 0.0 { b } else { gamma_quantile(a, 1.0, p)?.max(b) };
        let s = (lam - b) / e;
        num.push(if s <= limit { w } else { 0.0 });
        den.push(w);
    }
    ratio_estimate(&num, &den)
}

/// Nodes and weights integrating against Gamma(shape, scale).
///
/// For `shape >= 1` the density is smooth, so Gauss-Legendre runs over the
/// central `1 - 2e-14` of its mass with density weights. Below that the
/// density is singular at 0 and the rule runs on the probability scale.
fn gamma_rule(shape: f64, scale: f64, nodes: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    use crate::specfun::ln_gamma_unchecked;
    let (us, ws) = gauss_legendre(nodes);
    if shape < 1.0 {
        let xs = us.iter().map(|&p| gamma_quantile(shape, scale, p)).collect::<Result<_>>()?;
        return Ok((xs, ws));
    }
    const TAIL: f64 = 1e-14;
    let lo = gamma_quantile(shape, scale, TAIL)?;
    let hi = gamma_quantile(shape, scale, 1.0 - TAIL)?;
    let ln_norm = ln_gamma_unchecked(shape) + shape * scale.ln();
    let xs: Vec<f64> = us.iter().map(|&v| lo + v * (hi - lo)).collect();
    let wx = xs
        .iter()
        .zip(&ws)
        .map(|(&x, &w)| w * (hi - lo) * ((shape - 1.0) * x.ln() - x / scale - ln_norm).exp())
        .collect();
    Ok((xs, wx))
}

/// The reference posterior of `s` by tensor Gauss-Legendre quadrature over
/// the two nuisance posteriors.
#[derive(Debug, Clone)]
pub struct ReferencePosterior {
    n: u64,
    nodes: Vec<(f64, f64, f64)>,
    total: f64,
}

impl ReferencePosterior {
    pub const DEFAULT_NODES: usize = 64;

    pub fn new(ch: &ChannelObservation, cfg: &CredibilityConfig, nodes: usize) -> Result<Self> {
        cfg.validate()?;
        ch.validate()?;
        if nodes == 0 {
            return Err(Error::InvalidConfig("need at least one node".into()));
        }
        let ((kb, sb), (ke, se)) = cfg.posteriors(ch);
        let (bs, wbs) = gamma_rule(kb, sb, nodes)?;
        let (es, wes) = gamma_rule(ke, se, nodes)?;
        let mut grid = Vec::with_capacity(nodes * nodes);
        for (b, wb) in bs.iter().zip(&wbs) {
            for (e, we) in es.iter().zip(&wes) {
                grid.push((*b, *e, wb * we));
            }
        }
        let total: f64 = grid.iter().map(|&(b, e, w)| w * mass_below(ch.n, b, e, f64::INFINITY)).sum();
        if !(total > 0.0) {
            return Err(Error::NoPosteriorMass(format!("reference posterior normalization is {total}")));
        }
        Ok(Self { n: ch.n, nodes: grid, total })
    }

    pub fn cdf(&self, r: f64) -> f64 {
        let m: f64 = self.nodes.iter().map(|&(b, e, w)| w * mass_below(self.n, b, e, r)).sum();
        (m / self.total).clamp(0.0, 1.0)
    }

    pub fn pdf(&self, r: f64) -> f64 {
        self.nodes.iter().map(|&(b, e, w)| w * density_at(self.n, b, e, r)).sum::<f64>() / self.total
    }

    /// Root of `cdf(r) = q` by Newton steps inside a shrinking bracket.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain("reference quantile", format!("q = {q} must be in (0, 1)")));
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        while self.cdf(hi) < q {
            lo = hi;
            hi *= 2.0;
            if hi > 1e15 {
                return Err(Error::UnboundedLimit { reason: format!("reference quantile {q} beyond 1e15") });
            }
        }
        let mut r = 0.5 * (lo + hi);
        for _ in 0..200 {
            let f = self.cdf(r) - q;
            if f < 0.0 {
                lo = r;
            } else {
                hi = r;
            }
            let d = self.pdf(r);
            let step = if d > 0.0 { r - f / d } else { f64::NAN };
            let next = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
            if (next - r).abs() <= 1e-12 * r.max(1e-12) || hi - lo <= 1e-12 * hi {
                return Ok(next);
            }
            r = next;
        }
        Ok(r)
    }
}

/// Upper limit at probability `q` under the reference posterior.
pub fn reference_upper_limit(ch: &ChannelObservation, cfg: &CredibilityConfig, q: f64) -> Result<f64> {
    ReferencePosterior::new(ch, cfg, ReferencePosterior::DEFAULT_NODES)?.quantile(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(n: u64, y: u64, z: u64, t: f64, u: f64) -> ChannelObservation {
        ChannelObservation::new(n, y, z, t, u).unwrap()
    }

    #[test]
    fn moment_matching() {
        let g = GammaPrior { mean: 3.0, sd: 0.3 };
        assert!((g.shape() - 100.0).abs() < 1e-12);
        assert!((g.scale() - 0.03).abs() < 1e-15);
        let (k, s) = g.posterior(10, 33.0);
        assert_eq!(k, 110.0);
        assert!((s - 0.03 / 1.99).abs() < 1e-15);
    }

    #[test]
    fn endpoints() {
        let c = ch(4, 95, 101, 33.0, 100.0);
        let cfg = CredibilityConfig::task1a();
        let mut rng = RngHandle::new(41, 0);
        let v = credibility_curve(&[0.0, f64::INFINITY], &c, &cfg, 2000, &mut rng).unwrap();
        assert_eq!(v[0].value, 0.0);
        assert_eq!(v[1].value, 1.0);
        assert!(credibility(-1.0, &c, &cfg, 10, &mut rng).is_err());
    }

    #[test]
    fn nondecreasing_in_limit() {
        let c = ch(3, 1, 12, 3.3, 10.0);
        let mut rng = RngHandle::new(42, 0);
        let limits: Vec<f64> = (0..60).map(|i| i as f64).collect();
        let v = credibility_curve(&limits, &c, &CredibilityConfig::task1b(), 5000, &mut rng).unwrap();
        assert!(v.windows(2).all(|w| w[0].value <= w[1].value));
    }

    #[test]
    fn closed_form_agrees_with_sampling_s() {
        for (c, cfg) in [(ch(30, 99, 101, 33.0, 100.0), CredibilityConfig::task1a()), (ch(2, 1, 1, 3.3, 10.0), CredibilityConfig::task1b())] {
            let rp = ReferencePosterior::new(&c, &cfg, 48).unwrap();
            for q in [0.3, 0.9] {
                let r = rp.quantile(q).unwrap();
                let a = credibility(r, &c, &cfg, 200_000, &mut RngHandle::new(43, 0)).unwrap();
                let b = credibility_by_sampling(r, &c, &cfg, 200_000, &mut RngHandle::new(44, 0)).unwrap();
                let se = (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
                assert!((a.value - b.value).abs() <= 4.0 * se, "{a:?} vs {b:?}");
                assert!((a.value - q).abs() <= 4.0 * a.std_err, "closed form {a:?} vs q = {q}");
            }
        }
    }

    #[test]
    fn reference_quadrature_converged() {
        let c = ch(5, 2, 1, 3.3, 10.0);
        let cfg = CredibilityConfig::task1b();
        let coarse = ReferencePosterior::new(&c, &cfg, 48).unwrap();
        let fine = ReferencePosterior::new(&c, &cfg, 96).unwrap();
        for r in [1.0, 10.0, 40.0, 120.0] {
            assert!((coarse.cdf(r) - fine.cdf(r)).abs() < 1e-10, "r={r}");
        }
        let q = fine.quantile(0.99).unwrap();
        assert!((fine.cdf(q) - 0.99).abs() < 1e-10);
    }
}
