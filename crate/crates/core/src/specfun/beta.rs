//! Beta density and regularized incomplete beta.
//!
//! A zero parameter is a point mass: `a = 0` puts all mass at 0 and `b = 0`
//! all mass at 1. With those conventions the zero-count cases of the channel
//! CDFs need no special handling by callers.

use super::gamma::ln_gamma_unchecked;
use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAX_ITER: usize = 100_000;

/// A Beta(a, b) law with its log normalizer cached, for repeated evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Beta {
    a: f64,
    b: f64,
    ln_beta: f64,
}

impl Beta {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::domain("beta", format!("a = {a}, b = {b} must be finite and >= 0")));
        }
        if a == 0.0 && b == 0.0 {
            return Err(Error::domain("beta", "a and b are both zero"));
        }
        let ln_beta = if a > 0.0 && b > 0.0 {
            ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b)
        } else {
            0.0
        };
        Ok(Self { a, b, ln_beta })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Density on the open unit interval. Degenerate laws report 0 away from
    /// their atom and +inf on it.
    pub fn pdf(&self, x: f64) -> f64 {
        if self.a == 0.0 {
            return if x == 0.0 { f64::INFINITY } else { 0.0 };
        }
        if self.b == 0.0 {
            return if x == 1.0 { f64::INFINITY } else { 0.0 };
        }
        if x <= 0.0 {
            return match self.a {
                a if a < 1.0 => f64::INFINITY,
                a if a == 1.0 => self.b,
                _ => 0.0,
            };
        }
        if x >= 1.0 {
            return match self.b {
                b if b < 1.0 => f64::INFINITY,
                b if b == 1.0 => self.a,
                _ => 0.0,
            };
        }
        ((self.a - 1.0) * x.ln() + (self.b - 1.0) * (-x).ln_1p() - self.ln_beta).exp()
    }

    /// `(I_x(a, b), 1 - I_x(a, b))`, each computed without cancellation.
    pub fn cdf_sf(&self, x: f64) -> (f64, f64) {
        if self.a == 0.0 {
            return (1.0, 0.0);
        }
        if self.b == 0.0 {
            return if x >= 1.0 { (1.0, 0.0) } else { (0.0, 1.0) };
        }
        if x <= 0.0 {
            return (0.0, 1.0);
        }
        if x >= 1.0 {
            return (1.0, 0.0);
        }
        let (a, b) = (self.a, self.b);
        let ln_front = a * x.ln() + b * (-x).ln_1p() - self.ln_beta;
        if x < (a + 1.0) / (a + b + 2.0) {
            let lower = (ln_front + continued_fraction(a, b, x).ln()).exp() / a;
            let lower = lower.min(1.0);
            (lower, 1.0 - lower)
        } else {
            let upper = (ln_front + continued_fraction(b, a, 1.0 - x).ln()).exp() / b;
            let upper = upper.min(1.0);
            (1.0 - upper, upper)
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_sf(x).0
    }

    pub fn sf(&self, x: f64) -> f64 {
        self.cdf_sf(x).1
    }
}

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

fn check_unit(func: &'static str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(func, format!("x = {x} is outside [0, 1]")));
    }
    Ok(())
}

/// Beta(a, b) density at `x`.
pub fn beta_pdf(x: f64, a: f64, b: f64) -> Result<f64> {
    check_unit("beta_pdf", x)?;
    Ok(Beta::new(a, b)?.pdf(x))
}

/// Regularized incomplete beta I_x(a, b).
pub fn beta_cdf(x: f64, a: f64, b: f64) -> Result<f64> {
    check_unit("beta_cdf", x)?;
    Ok(Beta::new(a, b)?.cdf(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// I_x(a, b) = sum_{j=a}^{a+b-1} C(a+b-1, j) x^j (1-x)^{a+b-1-j}, integer a, b >= 1.
    fn binomial_sum_oracle(x: f64, a: u32, b: u32) -> f64 {
        let m = a + b - 1;
        let mut total = 0.0;
        for j in a..=m {
            let mut c = 1.0;
            for i in 0..j {
                c = c * (m - i) as f64 / (i + 1) as f64;
            }
            total += c * x.powi(j as i32) * (1.0 - x).powi((m - j) as i32);
        }
        total
    }

    #[test]
    fn uniform_and_symmetric_cases() {
        for &x in &[0.0, 0.25, 1.0] {
            assert!((beta_cdf(x, 1.0, 1.0).unwrap() - x).abs() < 1e-15);
        }
        assert!((beta_cdf(0.5, 2.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn binomial_sum_oracle_value() {
        // Frozen from the oracle: sum_{j=3}^{7} C(7, j) 0.3^j 0.7^{7-j}
        let oracle = binomial_sum_oracle(0.3, 3, 5);
        assert!((oracle - 0.352_930_5).abs() < 1e-12);
        assert!((beta_cdf(0.3, 3.0, 5.0).unwrap() - oracle).abs() < 1e-14);
        for a in 1..30 {
            for b in 1..30 {
                for &x in &[0.01, 0.2, 0.5, 0.77, 0.99] {
                    let got = beta_cdf(x, a as f64, b as f64).unwrap();
                    let want = binomial_sum_oracle(x, a, b);
                    assert!((got - want).abs() < 1e-12, "a={a} b={b} x={x}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn degenerate_parameters() {
        // a = 0: point mass at 0
        assert_eq!(beta_cdf(0.0, 0.0, 3.0).unwrap(), 1.0);
        assert_eq!(beta_cdf(0.4, 0.0, 3.0).unwrap(), 1.0);
        // b = 0: point mass at 1
        assert_eq!(beta_cdf(0.999, 4.0, 0.0).unwrap(), 0.0);
        assert_eq!(beta_cdf(1.0, 4.0, 0.0).unwrap(), 1.0);
        assert!(beta_cdf(0.5, 0.0, 0.0).is_err());
        assert!(beta_cdf(1.5, 1.0, 1.0).is_err());
        assert!(beta_pdf(0.5, -1.0, 1.0).is_err());
    }

    #[test]
    fn pdf_matches_closed_forms() {
        // Beta(2, 3): 12 x (1-x)^2
        for &x in &[0.1, 0.5, 0.9] {
            let want = 12.0 * x * (1.0 - x) * (1.0 - x);
            assert!((beta_pdf(x, 2.0, 3.0).unwrap() - want).abs() < 1e-13);
        }
        assert_eq!(beta_pdf(0.0, 1.0, 3.0).unwrap(), 3.0);
        assert_eq!(beta_pdf(1.0, 3.0, 1.0).unwrap(), 3.0);
    }

    #[test]
    fn small_tail_values_keep_relative_accuracy() {
        // I_x(1, b) = 1 - (1-x)^b, so sf = (1-x)^b
        let b = Beta::new(1.0, 200.0).unwrap();
        let sf = b.sf(0.2);
        assert!((sf / 0.8f64.powi(200) - 1.0).abs() < 1e-11);
    }

    proptest! {
        #[test]
        fn reflection_symmetry(a in 1.0f64..200.0, b in 1.0f64..200.0, x in 0.0f64..1.0) {
            let lhs = beta_cdf(x, a, b).unwrap();
            let rhs = 1.0 - beta_cdf(1.0 - x, b, a).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-13, "{} vs {}", lhs, rhs);
        }

        #[test]
        fn cdf_nondecreasing(a in 0.5f64..150.0, b in 0.5f64..150.0, x in 0.0f64..0.999, dx in 0.0f64..0.001) {
            let d = Beta::new(a, b).unwrap();
            prop_assert!(d.cdf(x) <= d.cdf(x + dx) + 1e-15);
        }
    }
}
