//! Tail probabilities of the form `P(A > B/t + x C/u)` for independent
//! unit-scale gammas `A ~ Gamma(a)`, `B ~ Gamma(b)`, `C ~ Gamma(c)`.
//!
//! Both the DS channel CDFs and the Bayesian posterior CDF reduce to ratios
//! of this one quantity, so it is evaluated in one place, by either of two
//! independent routes:
//!
//! * [`CdfRoute::BetaIntegral`]: with `G = C/(A+C) ~ Beta(c, a)` and
//!   `alpha = u/(u+x)`,
//!   `P = ∫_0^alpha [1 - I_{1/(1+t(1-g/alpha))}(a+c, b)] dB(g; c, a) dg`,
//!   integrated numerically. Folding `pB(alpha; c, a)` into the integrand
//!   keeps small tail values relative-accurate.
//! * [`CdfRoute::NegativeBinomialSum`]: for integer `a`, `P(A > W)` is
//!   `P(Pois(W) < a)`; mixing the Poisson over `W` gives
//!   `P(K + M < a)` with `K ~ NB(b, t/(t+1))` and `M ~ NB(c, alpha)`, a finite
//!   sum of positive terms.

use crate::error::{Error, Result};
use crate::specfun::{integrate, Beta, QuadratureConfig};

/// How channel and posterior CDFs are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CdfRoute {
    /// Beta-CDF form with numerical quadrature over the inner integral.
    BetaIntegral(QuadratureConfig),
    /// Exact finite negative-binomial sum; needs an integer first shape.
    NegativeBinomialSum,
    /// The exact sum when the first shape is an integer, the beta integral
    /// otherwise. Roughly 300 times faster than quadrature for DS limits.
    Auto(QuadratureConfig),
}

impl Default for CdfRoute {
    fn default() -> Self {
        CdfRoute::Auto(QuadratureConfig::default())
    }
}

impl CdfRoute {
    /// The quadrature route with default tolerances.
    pub fn quadrature() -> Self {
        CdfRoute::BetaIntegral(QuadratureConfig::default())
    }

    fn resolve(&self, a: f64) -> CdfRoute {
        match *self {
            CdfRoute::Auto(cfg) if a.fract() != 0.0 => CdfRoute::BetaIntegral(cfg),
            CdfRoute::Auto(_) => CdfRoute::NegativeBinomialSum,
            other => other,
        }
    }
}

/// The event `A > B/t + x C/u` with shapes `(a, b, c)` and scales `(t, u)`.
#[derive(Debug, Clone, Copy)]
pub struct ExcessEvent {
    a: f64,
    b: f64,
    c: f64,
    t: f64,
    u: f64,
    g_law: Option<Beta>,
    inner_law: Option<Beta>,
}

impl ExcessEvent {
    pub fn new(a: f64, b: f64, c: f64, t: f64, u: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain("ExcessEvent", format!("shape {name} = {v} must be >= 0")));
            }
        }
        if !(t > 0.0 && u > 0.0) || !t.is_finite() || !u.is_finite() {
            return Err(Error::domain("ExcessEvent", format!("scales t = {t}, u = {u} must be positive")));
        }
        let g_law = if a > 0.0 && c > 0.0 { Some(Beta::new(c, a)?) } else { None };
        let inner_law = if a > 0.0 && c > 0.0 { Some(Beta::new(a + c, b)?) } else { None };
        Ok(Self { a, b, c, t, u, g_law, inner_law })
    }

    pub fn shapes(&self) -> (f64, f64, f64) {
        (self.a, self.b, self.c)
    }

    /// `P(A > B/t + x C/u)`.
    pub fn prob(&self, x: f64, route: &CdfRoute) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain("ExcessEvent::prob", format!("x = {x} must be >= 0")));
        }
        if self.a == 0.0 {
            return Ok(0.0);
        }
        if x.is_infinite() {
            return Ok(if self.c == 0.0 { self.prob_no_c() } else { 0.0 });
        }
        match route.resolve(self.a) {
            CdfRoute::BetaIntegral(cfg) => self.prob_beta_integral(x, &cfg),
            _ => self.prob_negative_binomial(x),
        }
    }

    /// `self.prob(x) - other.prob(x)`.
    ///
    /// On the quadrature route, when both events need the inner integral,
    /// the difference of the two integrands is integrated in one pass so the
    /// result carries a tolerance relative to the difference rather than to
    /// either term.
    pub fn prob_minus(&self, other: &ExcessEvent, x: f64, route: &CdfRoute) -> Result<f64> {
        let (ra, rb) = (route.resolve(self.a), route.resolve(other.a));
        if let (CdfRoute::BetaIntegral(cfg), CdfRoute::BetaIntegral(_)) = (ra, rb) {
            if let (Some(f), Some(g)) = (self.integrand(x), other.integrand(x)) {
                return integrate(|v| f(v) - g(v), 0.0, 1.0, &cfg);
            }
        }
        Ok(self.prob(x, route)? - other.prob(x, route)?)
    }

    /// The `[0, 1]` integrand of the quadrature route, when it is needed and
    /// `c >= 1` (no endpoint singularity).
    fn integrand(&self, x: f64) -> Option<impl Fn(f64) -> f64> {
        if self.a == 0.0 || self.c < 1.0 || x == 0.0 || !x.is_finite() {
            return None;
        }
        let alpha = self.u / (self.u + x);
        let g_law = self.g_law?;
        let inner = self.inner_law?;
        let t = self.t;
        Some(move |v: f64| alpha * g_law.pdf(alpha * v) * inner.sf(1.0 / (1.0 + t * (1.0 - v))))
    }

    /// `P(A > B/t)`, the value when the `C` term vanishes.
    fn prob_no_c(&self) -> f64 {
        // B / (A + B) ~ Beta(b, a); B < tA  <=>  B/(A+B) < t/(1+t)
        match Beta::new(self.b, self.a) {
            Ok(d) => d.cdf(self.t / (1.0 + self.t)),
            Err(_) => 1.0,
        }
    }

    fn prob_beta_integral(&self, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
        if self.c == 0.0 || x == 0.0 {
            return Ok(self.prob_no_c());
        }
        let alpha = self.u / (self.u + x);
        let g_law = self.g_law.expect("a, c > 0");
        if self.b == 0.0 {
            // B = 0: P(A > xC/u) = P(G < alpha)
            return Ok(g_law.cdf(alpha));
        }
        let inner = self.inner_law.expect("a, c > 0");
        let t = self.t;
        let (a, c) = (self.a, self.c);
        // h(v) = 1 / (1 + t (1 - v)) with v = g / alpha does not depend on x.
        let tail = move |v: f64| inner.sf(1.0 / (1.0 + t * (1.0 - v)));
        if let Some(f) = self.integrand(x) {
            integrate(f, 0.0, 1.0, cfg)
        } else {
            // v = w^{1/c} absorbs the g^{c-1} singularity at 0.
            let ln_front = c * alpha.ln() - c.ln() - ln_beta(c, a);
            let front = ln_front.exp();
            let f = |w: f64| {
                let v = w.powf(1.0 / c);
                front * (1.0 - alpha * v).powf(a - 1.0) * tail(v)
            };
            integrate(f, 0.0, 1.0, cfg)
        }
    }

    fn prob_negative_binomial(&self, x: f64) -> Result<f64> {
        if self.a.fract() != 0.0 {
            return Err(Error::domain(
                "ExcessEvent::prob",
                format!("negative-binomial route needs an integer shape a, got {}", self.a),
            ));
        }
        let terms = self.a as usize;
        let p_k = self.t / (1.0 + self.t);
        let k_pmf = negative_binomial_pmf(self.b, p_k, terms);
        let m_pmf = if self.c == 0.0 || x == 0.0 {
            let mut v = vec![0.0; terms];
            v[0] = 1.0;
            v
        } else {
            negative_binomial_pmf(self.c, self.u / (self.u + x), terms)
        };
        let mut m_cdf = m_pmf;
        for i in 1..terms {
            m_cdf[i] += m_cdf[i - 1];
        }
        let total: f64 = (0..terms).map(|k| k_pmf[k] * m_cdf[terms - 1 - k]).sum();
        Ok(total.min(1.0))
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    use crate::specfun::ln_gamma_unchecked as lg;
    lg(a) + lg(b) - lg(a + b)
}

/// First `terms` probabilities of NB(size, p): `(size)_k / k! p^size (1-p)^k`.
fn negative_binomial_pmf(size: f64, p: f64, terms: usize) -> Vec<f64> {
    let mut out = vec![0.0; terms];
    if terms == 0 {
        return out;
    }
    if size == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ln_q = (-p).ln_1p();
    let mut ln_term = size * p.ln();
    for (k, slot) in out.iter_mut().enumerate() {
        if k > 0 {
            let kf = k as f64;
            ln_term += ((size + kf - 1.0) / kf).ln() + ln_q;
        }
        *slot = ln_term.exp();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::RngHandle;
    use crate::specfun::QuadratureRule;

    fn routes() -> [CdfRoute; 3] {
        let q = QuadratureConfig::default();
        [
            CdfRoute::BetaIntegral(q),
            CdfRoute::BetaIntegral(q.with_rule(QuadratureRule::GaussKronrod)),
            CdfRoute::NegativeBinomialSum,
        ]
    }

    #[test]
    fn routes_agree_across_shapes() {
        let shapes = [
            (5.0, 11.0, 101.0, 33.0, 100.0),
            (6.0, 10.0, 100.0, 33.0, 100.0),
            (1.0, 1.0, 1.0, 3.3, 10.0),
            (13.0, 1.0, 26.0, 3.3, 10.0),
            (50.0, 21.0, 31.0, 3.3, 10.0),
            (3.0, 0.0, 4.0, 2.0, 5.0),
            (4.0, 2.0, 0.0, 2.0, 5.0),
            (2.0, 3.0, 0.5, 1.5, 2.0),
        ];
        for (a, b, c, t, u) in shapes {
            let ev = ExcessEvent::new(a, b, c, t, u).unwrap();
            for &x in &[0.0, 0.1, 0.5, 2.0, 8.0, 40.0, 300.0, 1e4] {
                let vals: Vec<f64> = routes().iter().map(|r| ev.prob(x, r).unwrap()).collect();
                let scale = vals[2].max(1e-300);
                for v in &vals {
                    let rel = (v - vals[2]).abs() / scale;
                    assert!(
                        rel < 1e-7 || (v - vals[2]).abs() < 1e-12,
                        "shapes {:?} x={x}: {vals:?}",
                        (a, b, c, t, u)
                    );
                }
            }
        }
    }

    #[test]
    fn degenerate_shapes() {
        let ev = ExcessEvent::new(0.0, 3.0, 2.0, 1.0, 1.0).unwrap();
        for r in routes() {
            assert_eq!(ev.prob(1.0, &r).unwrap(), 0.0);
        }
        // b = 0 and c = 0: P(A > 0) = 1
        let ev = ExcessEvent::new(2.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        for r in routes() {
            assert!((ev.prob(5.0, &r).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn against_direct_sampling() {
        let ev = ExcessEvent::new(5.0, 11.0, 101.0, 33.0, 100.0).unwrap();
        let mut rng = RngHandle::new(21, 0);
        let n = 1_000_000;
        let draws: Vec<(f64, f64, f64)> = (0..n).map(|_| (rng.gamma(5.0, 1.0), rng.gamma(11.0, 1.0), rng.gamma(101.0, 1.0))).collect();
        for &x in &[0.5, 2.0, 4.0] {
            let exact = ev.prob(x, &CdfRoute::default()).unwrap();
            let freq = draws.iter().filter(|(a, b, c)| *a > b / 33.0 + x * c / 100.0).count() as f64 / n as f64;
            let se = (exact * (1.0 - exact) / n as f64).sqrt();
            assert!((freq - exact).abs() < 4.0 * se, "x={x}: {freq} vs {exact}");
        }
    }

    #[test]
    fn difference_matches_subtraction() {
        let up = ExcessEvent::new(8.0, 10.0, 100.0, 33.0, 100.0).unwrap();
        let lo = ExcessEvent::new(7.0, 11.0, 101.0, 33.0, 100.0).unwrap();
        for &x in &[0.0, 0.01, 1.0, 5.0, 30.0] {
            let exact = up.prob(x, &CdfRoute::NegativeBinomialSum).unwrap() - lo.prob(x, &CdfRoute::NegativeBinomialSum).unwrap();
            let quad = up.prob_minus(&lo, x, &CdfRoute::quadrature()).unwrap();
            assert!((quad - exact).abs() < 1e-9 * exact.abs().max(1e-3), "x={x}: {quad} vs {exact}");
        }
    }

    #[test]
    fn auto_route_falls_back_for_fractional_shapes() {
        let ev = ExcessEvent::new(2.5, 3.0, 4.0, 1.0, 2.0).unwrap();
        assert!(ev.prob(1.0, &CdfRoute::NegativeBinomialSum).is_err());
        let a = ev.prob(1.0, &CdfRoute::default()).unwrap();
        let b = ev.prob(1.0, &CdfRoute::quadrature()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn decreasing_in_x() {
        let ev = ExcessEvent::new(12.0, 1.0, 25.0, 3.3, 10.0).unwrap();
        let mut prev = 1.0;
        for i in 0..200 {
            let p = ev.prob(i as f64 * 0.5, &CdfRoute::NegativeBinomialSum).unwrap();
            assert!(p <= prev + 1e-15);
            prev = p;
        }
    }
}
