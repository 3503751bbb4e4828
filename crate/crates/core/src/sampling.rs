//! Seed-splittable random variates.
//!
//! Every work item in the harness draws from its own [`RngHandle`], whose
//! stream id is a hash of (task kind, dataset index, channel index). Results
//! therefore do not depend on how work is scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::specfun::ln_gamma_unchecked;

pub const DEFAULT_SEED: u64 = 20_090_201;

/// The kinds of work that get their own family of streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskKind {
    Coverage,
    Credibility,
    Simulation,
    Oracle,
    Custom(u32),
}

impl TaskKind {
    fn tag(self) -> u64 {
        match self {
            TaskKind::Coverage => 1,
            TaskKind::Credibility => 2,
            TaskKind::Simulation => 3,
            TaskKind::Oracle => 4,
            TaskKind::Custom(c) => 0x1_0000_0000 | c as u64,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream id for one work item.
pub fn stream_id(kind: TaskKind, dataset: u64, channel: u64) -> u64 {
    let mut h = splitmix64(kind.tag());
    h = splitmix64(h ^ dataset);
    splitmix64(h ^ channel.rotate_left(32))
}

/// A single-owner random stream identified by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngHandle {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngHandle {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn for_task(seed: u64, kind: TaskKind, dataset: u64, channel: u64) -> Self {
        Self::new(seed, stream_id(kind, dataset, channel))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn exponential(&mut self, scale: f64) -> f64 {
        let e: f64 = Exp1.sample(&mut self.rng);
        e * scale
    }

    pub fn gamma(&mut self, shape: f64, scale: f64) -> f64 {
        if shape == 0.0 {
            return 0.0;
        }
        if shape == 1.0 {
            return self.exponential(scale);
        }
        Gamma::new(shape, scale)
            .expect("gamma parameters validated by caller")
            .sample(&mut self.rng)
    }

    pub fn poisson(&mut self, rate: f64) -> u64 {
        if rate <= 0.0 {
            0
        } else if rate < POISSON_INVERSION_LIMIT {
            self.poisson_inversion(rate)
        } else {
            self.poisson_ptrs(rate)
        }
    }

    fn poisson_inversion(&mut self, rate: f64) -> u64 {
        let p0 = (-rate).exp();
        'draw: loop {
            let u = self.uniform();
            let mut p = p0;
            let mut cdf = p;
            let mut k = 0u64;
            while u > cdf {
                k += 1;
                p *= rate / k as f64;
                cdf += p;
                if p == 0.0 && k as f64 > rate {
                    // u fell into the rounding gap below 1; redraw.
                    continue 'draw;
                }
            }
            return k;
        }
    }

    /// Hörmann's transformed rejection with squeeze (PTRS). Exact.
    fn poisson_ptrs(&mut self, rate: f64) -> u64 {
        let slam = rate.sqrt();
        let loglam = rate.ln();
        let b = 0.931 + 2.53 * slam;
        let a = -0.059 + 0.02483 * b;
        let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        let vr = 0.9277 - 3.6224 / (b - 2.0);
        loop {
            let u = self.uniform() - 0.5;
            let v = self.uniform();
            let us = 0.5 - u.abs();
            let k = ((2.0 * a / us + b) * u + rate + 0.43).floor();
            if us >= 0.07 && v <= vr {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
            let rhs = -rate + k * loglam - ln_gamma_unchecked(k + 1.0);
            if lhs <= rhs {
                return k as u64;
            }
        }
    }
}

const POISSON_INVERSION_LIMIT: f64 = 30.0;

pub fn sample_exponential(rng: &mut RngHandle, scale: f64) -> f64 {
    rng.exponential(scale)
}

/// Gamma(shape, scale); shape 0 returns exactly 0.
pub fn sample_gamma(rng: &mut RngHandle, shape: f64, scale: f64) -> f64 {
    rng.gamma(shape, scale)
}

/// Pois(rate); rate 0 returns 0. Sequential inversion below rate 30 and
/// exact transformed rejection above.
pub fn sample_poisson(rng: &mut RngHandle, rate: f64) -> u64 {
    rng.poisson(rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn exponential_moments() {
        let mut rng = RngHandle::new(1, 1);
        let xs: Vec<f64> = (0..1_000_000).map(|_| sample_exponential(&mut rng, 1.0)).collect();
        let (m, _) = mean_var(&xs);
        assert!((m - 1.0).abs() < 0.01, "{m}");
        let tail = xs.iter().filter(|&&x| x > 3.0).count() as f64 / xs.len() as f64;
        assert!((tail - (-3f64).exp()).abs() < 0.002, "{tail}");
        let xs: Vec<f64> = (0..1_000_000).map(|_| sample_exponential(&mut rng, 2.0)).collect();
        assert!((mean_var(&xs).0 - 2.0).abs() < 0.02);
    }

    #[test]
    fn gamma_shape_zero_and_mean() {
        let mut rng = RngHandle::new(2, 7);
        for _ in 0..100 {
            assert_eq!(sample_gamma(&mut rng, 0.0, 3.0), 0.0);
        }
        let xs: Vec<f64> = (0..1_000_000).map(|_| sample_gamma(&mut rng, 3.0, 1.0)).collect();
        assert!((mean_var(&xs).0 - 3.0).abs() < 0.02);
    }

    fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    }

    #[test]
    fn gamma_matches_exponential_sum() {
        let n = 100_000;
        let mut r1 = RngHandle::new(3, 0);
        let mut r2 = RngHandle::new(3, 1);
        let g: Vec<f64> = (0..n).map(|_| sample_gamma(&mut r1, 3.0, 1.0)).collect();
        let e: Vec<f64> = (0..n)
            .map(|_| (0..3).map(|_| sample_exponential(&mut r2, 1.0)).sum())
            .collect();
        let d = ks_two_sample(g, e);
        // 0.1% two-sample critical value: 1.949 * sqrt(2/n)
        let crit = 1.949 * (2.0 / n as f64).sqrt();
        assert!(d < crit, "KS {d} >= {crit}");
    }

    #[test]
    fn poisson_moments() {
        let mut rng = RngHandle::new(4, 0);
        assert_eq!(sample_poisson(&mut rng, 0.0), 0);
        let xs: Vec<f64> = (0..1_000_000).map(|_| sample_poisson(&mut rng, 3.0) as f64).collect();
        assert!((mean_var(&xs).0 - 3.0).abs() < 0.02);
        let xs: Vec<f64> = (0..1_000_000).map(|_| sample_poisson(&mut rng, 36.0) as f64).collect();
        let (m, v) = mean_var(&xs);
        assert!((m - 36.0).abs() < 0.05, "{m}");
        assert!((v - 36.0).abs() < 0.5, "{v}");
    }

    #[test]
    fn poisson_rejection_matches_pmf() {
        // chi-square style check of the PTRS branch against exact pmf at rate 99
        let rate = 99.0;
        let n = 400_000;
        let mut rng = RngHandle::new(5, 0);
        let mut counts = vec![0u64; 250];
        for _ in 0..n {
            let k = sample_poisson(&mut rng, rate) as usize;
            counts[k.min(249)] += 1;
        }
        for k in 80..120usize {
            let lp = -rate + k as f64 * rate.ln() - ln_gamma_unchecked(k as f64 + 1.0);
            let expect = n as f64 * lp.exp();
            let got = counts[k] as f64;
            assert!((got - expect).abs() < 5.0 * expect.sqrt(), "k={k}: {got} vs {expect}");
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = RngHandle::for_task(9, TaskKind::Simulation, 12, 0);
        let mut b = RngHandle::for_task(9, TaskKind::Simulation, 12, 0);
        let mut c = RngHandle::for_task(9, TaskKind::Simulation, 13, 0);
        let xa: Vec<u64> = (0..50).map(|_| a.uniform().to_bits()).collect();
        let xb: Vec<u64> = (0..50).map(|_| b.uniform().to_bits()).collect();
        let xc: Vec<u64> = (0..50).map(|_| c.uniform().to_bits()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        assert_ne!(stream_id(TaskKind::Coverage, 1, 0), stream_id(TaskKind::Coverage, 0, 1));
    }
}
