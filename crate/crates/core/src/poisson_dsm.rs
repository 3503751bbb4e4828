//! The Poisson Dempster-Shafer model.
//!
//! Observing a count `k` from a Poisson process bounds its rate by the
//! a-random interval `(V_k, V_{k+1})` of successive unit-rate arrival times,
//! with `V_0 = 0`. The lower end is Gamma(k), the gap is an independent unit
//! exponential. A count observed through `Pois(t * rate)` bounds the rate by
//! the same interval divided by `t`, which is carried here as `scale = 1/t`.

use crate::error::{Error, Result};
use crate::sampling::RngHandle;
use crate::specfun::{gamma_cdf, ln_gamma_unchecked};

/// Law of the a-random interval bounding a Poisson rate after observing
/// `count` events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ARandomIntervalLaw {
    count: u64,
    scale: f64,
}

impl ARandomIntervalLaw {
    pub fn new(count: u64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::domain("ARandomIntervalLaw", format!("scale = {scale} must be positive")));
        }
        Ok(Self { count, scale })
    }

    /// Unit-scale law for a plain Poisson count.
    pub fn unscaled(count: u64) -> Self {
        Self { count, scale: 1.0 }
    }

    /// Law bounding `rate` when `count ~ Pois(exposure * rate)`.
    pub fn with_exposure(count: u64, exposure: f64) -> Result<Self> {
        if !(exposure > 0.0) {
            return Err(Error::domain("ARandomIntervalLaw", format!("exposure = {exposure} must be positive")));
        }
        Self::new(count, 1.0 / exposure)
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// CDF of the lower end `V_k` (a point mass at 0 when `k = 0`).
    pub fn lower_cdf(&self, x: f64) -> Result<f64> {
        gamma_cdf(self.count as f64, self.scale, x)
    }

    /// CDF of the upper end `V_{k+1}`.
    pub fn upper_cdf(&self, x: f64) -> Result<f64> {
        gamma_cdf(self.count as f64 + 1.0, self.scale, x)
    }

    /// `P(V_k <= lo, V_{k+1} >= hi) = (lo/scale)^k exp(-hi/scale) / k!`,
    /// the commonality of the interval `[lo, hi]`.
    pub fn commonality(&self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo >= 0.0) || !(hi >= lo) {
            return Err(Error::domain("commonality", format!("need 0 <= lo <= hi, got [{lo}, {hi}]")));
        }
        let k = self.count as f64;
        let hi_s = hi / self.scale;
        if self.count == 0 {
            return Ok((-hi_s).exp());
        }
        if lo == 0.0 {
            return Ok(0.0);
        }
        let ln_c = k * (lo / self.scale).ln() - ln_gamma_unchecked(k + 1.0) - hi_s;
        Ok(ln_c.exp().min(1.0))
    }

    /// Plausibility of the singleton `{lambda}`, i.e. `F_{V_k} - F_{V_{k+1}}`
    /// evaluated through the commonality of the degenerate interval.
    pub fn singleton_plausibility(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return Err(Error::domain("singleton_plausibility", format!("lambda = {lambda} must be >= 0")));
        }
        self.commonality(lambda, lambda)
    }

    /// Draws one interval `(lo, hi)`.
    pub fn sample_interval(&self, rng: &mut RngHandle) -> (f64, f64) {
        let lo = rng.gamma(self.count as f64, self.scale);
        let hi = lo + rng.exponential(self.scale);
        (lo, hi)
    }
}

pub fn commonality(law: &ARandomIntervalLaw, lo: f64, hi: f64) -> Result<f64> {
    law.commonality(lo, hi)
}

pub fn singleton_plausibility(law: &ARandomIntervalLaw, lambda: f64) -> Result<f64> {
    law.singleton_plausibility(lambda)
}

pub fn sample_interval(law: &ARandomIntervalLaw, rng: &mut RngHandle) -> (f64, f64) {
    law.sample_interval(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{integrate, QuadratureConfig};
    use proptest::prelude::*;

    #[test]
    fn commonality_examples() {
        let c = ARandomIntervalLaw::unscaled(0).commonality(0.7, 2.0).unwrap();
        assert!((c - (-2f64).exp()).abs() < 1e-15);
        let c = ARandomIntervalLaw::unscaled(2).commonality(1.0, 2.0).unwrap();
        assert!((c - 0.5 * (-2f64).exp()).abs() < 1e-15);
        assert!(ARandomIntervalLaw::unscaled(2).commonality(2.0, 1.0).is_err());
    }

    #[test]
    fn commonality_against_interval_sampling() {
        // k = 3, (lo, hi) = (2, 2.5): closed form 2^3 e^{-2.5} / 6
        let law = ARandomIntervalLaw::unscaled(3);
        let exact = law.commonality(2.0, 2.5).unwrap();
        assert!((exact - 8.0 * (-2.5f64).exp() / 6.0).abs() < 1e-15);
        let mut rng = RngHandle::new(11, 0);
        let n = 10_000_000u64;
        let hits = (0..n)
            .filter(|_| {
                let (lo, hi) = law.sample_interval(&mut rng);
                lo <= 2.0 && hi >= 2.5
            })
            .count() as f64;
        let p = hits / n as f64;
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!((p - exact).abs() < 4.0 * se, "{p} vs {exact}");
    }

    #[test]
    fn plausibility_examples() {
        let p = ARandomIntervalLaw::unscaled(0).singleton_plausibility(1.0).unwrap();
        assert!((p - (-1f64).exp()).abs() < 1e-15);
        for k in 1..6 {
            assert_eq!(ARandomIntervalLaw::unscaled(k).singleton_plausibility(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn plausibility_equals_cdf_difference() {
        for k in 0..40u64 {
            let law = ARandomIntervalLaw::new(k, 0.37).unwrap();
            for &lam in &[0.01, 0.3, 1.0, 4.0, 11.0, 25.0] {
                let pl = law.singleton_plausibility(lam).unwrap();
                let diff = law.lower_cdf(lam).unwrap() - law.upper_cdf(lam).unwrap();
                assert!((pl - diff).abs() < 1e-13, "k={k} lam={lam}: {pl} vs {diff}");
                assert_eq!(pl, law.commonality(lam, lam).unwrap());
            }
        }
    }

    #[test]
    fn plausibility_against_interval_sampling() {
        let law = ARandomIntervalLaw::unscaled(3);
        let n = 10_000_000u64;
        let mut rng = RngHandle::new(12, 0);
        let hits = (0..n)
            .filter(|_| {
                let (lo, hi) = law.sample_interval(&mut rng);
                lo <= 2.0 && 2.0 <= hi
            })
            .count() as f64;
        let exact = law.singleton_plausibility(2.0).unwrap();
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!((hits / n as f64 - exact).abs() < 4.0 * se);
    }

    #[test]
    fn plausibility_curve_against_sampling_on_a_grid() {
        for (k, scale) in [(0u64, 1.0), (4, 1.0), (7, 0.25)] {
            let law = ARandomIntervalLaw::new(k, scale).unwrap();
            let n = 1_000_000usize;
            let mut rng = RngHandle::new(13, k);
            let draws: Vec<(f64, f64)> = (0..n).map(|_| law.sample_interval(&mut rng)).collect();
            for i in 0..20 {
                let lam = (i as f64 + 0.5) * (k as f64 + 3.0) * scale / 10.0;
                let exact = law.singleton_plausibility(lam).unwrap();
                let freq = draws.iter().filter(|(lo, hi)| *lo <= lam && lam <= *hi).count() as f64 / n as f64;
                let se = (exact * (1.0 - exact) / n as f64).sqrt().max(1e-7);
                assert!((freq - exact).abs() <= 4.0 * se, "k={k} lam={lam}: {freq} vs {exact}");
            }
        }
    }

    #[test]
    fn plausibility_integrates_to_scale() {
        let cfg = QuadratureConfig::default();
        for (k, scale) in [(0u64, 1.0), (1, 1.0), (5, 1.0), (20, 1.0), (3, 1.0 / 33.0), (12, 0.1)] {
            let law = ARandomIntervalLaw::new(k, scale).unwrap();
            let hi = (k as f64 + 60.0) * scale;
            let mass = integrate(|l| law.singleton_plausibility(l).unwrap(), 0.0, hi, &cfg).unwrap();
            assert!((mass - scale).abs() < 1e-8 * scale.max(1.0), "k={k}: {mass}");
        }
    }

    #[test]
    fn sample_interval_examples() {
        let mut rng = RngHandle::new(14, 0);
        let zero = ARandomIntervalLaw::unscaled(0);
        for _ in 0..1000 {
            let (lo, hi) = zero.sample_interval(&mut rng);
            assert_eq!(lo, 0.0);
            assert!(hi >= lo);
        }
        let n = 1_000_000;
        let law = ARandomIntervalLaw::unscaled(4);
        let m: f64 = (0..n).map(|_| law.sample_interval(&mut rng).0).sum::<f64>() / n as f64;
        assert!((m - 4.0).abs() < 0.02);
        let law = ARandomIntervalLaw::new(4, 0.5).unwrap();
        let gap: f64 = (0..n)
            .map(|_| {
                let (lo, hi) = law.sample_interval(&mut rng);
                hi - lo
            })
            .sum::<f64>()
            / n as f64;
        assert!((gap - 0.5).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn scaling_consistency(k in 0u64..200, t in 0.01f64..500.0, lam in 0.0f64..50.0) {
            let scaled = ARandomIntervalLaw::with_exposure(k, t).unwrap();
            let unit = ARandomIntervalLaw::unscaled(k);
            let a = scaled.singleton_plausibility(lam).unwrap();
            let b = unit.singleton_plausibility(t * lam).unwrap();
            prop_assert!((a - b).abs() <= 1e-13, "{} vs {}", a, b);
        }

        #[test]
        fn commonality_bounded_and_monotone(k in 0u64..50, lo in 0.0f64..30.0, gap in 0.0f64..10.0, d in 0.0f64..1.0) {
            let law = ARandomIntervalLaw::unscaled(k);
            let c = law.commonality(lo, lo + gap).unwrap();
            prop_assert!((0.0..=1.0).contains(&c));
            // shrinking the interval cannot lower commonality
            prop_assert!(law.commonality(lo, lo + gap + d).unwrap() <= c + 1e-16);
        }
    }
}
