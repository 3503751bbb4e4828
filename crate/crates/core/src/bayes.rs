//! Bayesian comparator: conjugate gamma posteriors on the three Poisson
//! rates of one channel and the induced posterior of the signal.
//!
//! With `L_n = eps*s + b`, `L_b = t*b` and `L_e = u*eps` given independent
//! gamma posteriors `G(k_n, w_n)`, `G(k_b, w_b)`, `G(k_e, w_e)`, the signal
//! is `S = (L_n - L_b/t) / (L_e/u)` restricted to `S >= 0`. Rescaling each
//! rate to unit scale turns `P(S > x)` into the same excess event as the DS
//! channel CDFs:
//!
//! ```text
//! P(S > x) = P(A > B/t' + x C/u'),   t' = w_n / w_b,   u' = w_n / w_e
//! ```
//!
//! with `A, B, C` unit gammas of shapes `k_n, k_b, k_e`. Here `w_b` and
//! `w_e` are the posterior scales of `b` and `eps` themselves (`1/t`, `1/u`).

use crate::ds_limits::{CdfRoute, ChannelObservation, ExcessEvent};
use crate::error::{Error, Result};

/// Gamma prior shapes on `(eps*s + b, t*b, u*eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorConfig {
    pub a_n: f64,
    pub a_b: f64,
    pub a_e: f64,
    pub name: String,
    /// Use proper-prior conjugate scales (halved) instead of unit scale on
    /// the latent rates. The signal posterior is unchanged because only
    /// scale ratios enter it.
    pub textbook: bool,
}

impl PriorConfig {
    pub fn new(a_n: f64, a_b: f64, a_e: f64, name: impl Into<String>) -> Result<Self> {
        let p = Self { a_n, a_b, a_e, name: name.into(), textbook: false };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for v in [self.a_n, self.a_b, self.a_e] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("prior shapes must be positive, got {v}")));
            }
        }
        Ok(())
    }

    fn preset(a_n: f64, a_b: f64, a_e: f64, name: &str) -> Self {
        Self { a_n, a_b, a_e, name: name.into(), textbook: false }
    }

    pub fn b1() -> Self {
        Self::preset(1.0, 1.0, 1.0, "B1")
    }

    pub fn b2() -> Self {
        Self::preset(2.0, 2.0, 2.0, "B2")
    }

    /// Extra unit of shape on the main-count rate: longer limits.
    pub fn upper() -> Self {
        Self::preset(2.0, 1.0, 1.0, "upper")
    }

    /// Extra unit of shape on the two subsidiary rates: shorter limits.
    pub fn lower() -> Self {
        Self::preset(1.0, 2.0, 2.0, "lower")
    }

    pub fn presets() -> [Self; 4] {
        [Self::b1(), Self::b2(), Self::upper(), Self::lower()]
    }

    /// Looks up a preset by name, case-insensitively.
    pub fn by_name(name: &str) -> Result<Self> {
        Self::presets()
            .into_iter()
            .find(|p| p.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown prior '{name}' (expected B1, B2, upper or lower)")))
    }

    pub fn with_textbook(mut self, on: bool) -> Self {
        self.textbook = on;
        self
    }
}

/// A gamma law as `(shape, scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaLaw {
    pub shape: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPosteriors {
    pub ln: GammaLaw,
    pub lb: GammaLaw,
    pub le: GammaLaw,
}

impl GammaPosteriors {
    pub fn validate(&self) -> Result<()> {
        for g in [self.ln, self.lb, self.le] {
            if !(g.shape > 0.0 && g.scale > 0.0) || !g.shape.is_finite() || !g.scale.is_finite() {
                return Err(Error::domain("GammaPosteriors", format!("invalid gamma law {g:?}")));
            }
        }
        Ok(())
    }

    fn event(&self) -> Result<ExcessEvent> {
        self.validate()?;
        ExcessEvent::new(
            self.ln.shape,
            self.lb.shape,
            self.le.shape,
            self.ln.scale / self.lb.scale,
            self.ln.scale / self.le.scale,
        )
    }
}

/// Shapes `count + prior shape`; scales `1`, `1/t`, `1/u` (halved under the
/// textbook flag).
pub fn conjugate_posteriors(ch: &ChannelObservation, prior: &PriorConfig) -> Result<GammaPosteriors> {
    ch.validate()?;
    prior.validate()?;
    let f = if prior.textbook { 0.5 } else { 1.0 };
    Ok(GammaPosteriors {
        ln: GammaLaw { shape: ch.n as f64 + prior.a_n, scale: f },
        lb: GammaLaw { shape: ch.y as f64 + prior.a_b, scale: f / ch.t },
        le: GammaLaw { shape: ch.z as f64 + prior.a_e, scale: f / ch.u },
    })
}

/// Posterior CDF of the signal, evaluated repeatedly without rebuilding
/// the beta laws.
#[derive(Debug, Clone)]
pub struct PosteriorCdf {
    event: ExcessEvent,
    mass: f64,
    route: CdfRoute,
}

impl PosteriorCdf {
    pub fn new(post: &GammaPosteriors, route: CdfRoute) -> Result<Self> {
        let event = post.event()?;
        let mass = event.prob(0.0, &route)?;
        if !(mass > 0.0) {
            return Err(Error::NoPosteriorMass(format!("P(S >= 0) underflows for {post:?}")));
        }
        Ok(Self { event, mass, route })
    }

    /// Posterior probability that the signal is nonnegative.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn sf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain("bayes_posterior_cdf", format!("x = {x} must be >= 0")));
        }
        Ok((self.event.prob(x, &self.route)? / self.mass).clamp(0.0, 1.0))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(1.0 - self.sf(x)?)
    }

    /// Root of `cdf(x) = q`: doubling bracket, then bisection to a relative
    /// width of `1e-8`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain("bayes_upper_limit", format!("q = {q} must be in (0, 1)")));
        }
        let target = 1.0 - q;
        let mut hi = 1.0;
        while self.sf(hi)? > target {
            hi *= 2.0;
            if hi > 1e15 {
                return Err(Error::UnboundedLimit { reason: format!("posterior quantile {q} beyond 1e15") });
            }
        }
        let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
        while hi - lo > 1e-8 * hi {
            let mid = 0.5 * (lo + hi);
            if self.sf(mid)? > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// `P(S <= x | S >= 0)` under the gamma posteriors.
pub fn bayes_posterior_cdf(post: &GammaPosteriors, x: f64) -> Result<f64> {
    PosteriorCdf::new(post, CdfRoute::default())?.cdf(x)
}

/// Upper limit at posterior probability `q`.
pub fn bayes_upper_limit(ch: &ChannelObservation, prior: &PriorConfig, q: f64) -> Result<f64> {
    let post = conjugate_posteriors(ch, prior)?;
    PosteriorCdf::new(&post, CdfRoute::default())?.quantile(q)
}

/// Several quantiles from one posterior.
pub fn bayes_upper_limits(ch: &ChannelObservation, prior: &PriorConfig, qs: &[f64], route: CdfRoute) -> Result<Vec<f64>> {
    let post = conjugate_posteriors(ch, prior)?;
    let cdf = PosteriorCdf::new(&post, route)?;
    qs.iter().map(|&q| cdf.quantile(q)).collect()
}
