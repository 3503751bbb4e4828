//! One-dimensional quadrature.
//!
//! The default rule is adaptive composite Simpson with Richardson
//! extrapolation. A fixed midpoint (rectangle) rule and an adaptive
//! Gauss-Kronrod 7/15 rule are available through [`QuadratureRule`].

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureRule {
    AdaptiveSimpson,
    /// Fixed midpoint rule with the given number of equal panels.
    Rectangle { panels: usize },
    /// Globally adaptive Gauss-Kronrod (7-point Gauss, 15-point Kronrod).
    GaussKronrod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub rule: QuadratureRule,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 1 << 16,
            rule: QuadratureRule::AdaptiveSimpson,
        }
    }
}

impl QuadratureConfig {
    pub fn with_rule(mut self, rule: QuadratureRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) || self.max_subdivisions < 1 {
            return Err(Error::InvalidConfig(format!(
                "quadrature tolerances must be positive and max_subdivisions >= 1 (got {self:?})"
            )));
        }
        if let QuadratureRule::Rectangle { panels } = self.rule {
            if panels == 0 {
                return Err(Error::InvalidConfig("rectangle rule needs at least one panel".into()));
            }
        }
        Ok(())
    }
}

/// Integrates `f` over `[lo, hi]`.
///
/// Adaptive rules stop when the estimated error is below
/// `max(abs_tol, rel_tol * |result|)` and fail with
/// [`Error::QuadratureNonConvergence`] if `max_subdivisions` runs out first.
/// The result is a deterministic function of the inputs.
pub fn integrate<F>(f: F, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain("integrate", format!("bad interval [{lo}, {hi}]")));
    }
    if lo == hi {
        return Ok(0.0);
    }
    match cfg.rule {
        QuadratureRule::AdaptiveSimpson => adaptive_simpson(&f, lo, hi, cfg),
        QuadratureRule::Rectangle { panels } => Ok(midpoint(&f, lo, hi, panels)),
        QuadratureRule::GaussKronrod => gauss_kronrod(&f, lo, hi, cfg),
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi's initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn midpoint<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    (0..panels).map(|i| f(lo + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

const SIMPSON_SEED_PANELS: usize = 16;
const SIMPSON_MIN_DEPTH: u32 = 2;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    depth: u32,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<f64> {
    // Seed with a uniform composite rule; its value sets the tolerance scale.
    let n = SIMPSON_SEED_PANELS;
    let h = (hi - lo) / n as f64;
    let xs: Vec<f64> = (0..=2 * n).map(|i| if i == 2 * n { hi } else { lo + i as f64 * h / 2.0 }).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut stack: Vec<Panel> = (0..n)
        .rev()
        .map(|i| {
            let (a, b) = (xs[2 * i], xs[2 * i + 2]);
            let (fa, fm, fb) = (fs[2 * i], fs[2 * i + 1], fs[2 * i + 2]);
            Panel { a, b, fa, fm, fb, whole: simpson(a, b, fa, fm, fb), depth: 0 }
        })
        .collect();
    let seed: f64 = stack.iter().map(|p| p.whole).sum();
    if !seed.is_finite() {
        return Err(Error::domain("integrate", "integrand is not finite on the interval"));
    }
    let tol = cfg.abs_tol.max(cfg.rel_tol * seed.abs());
    let width = hi - lo;

    let mut total = 0.0;
    let mut err_total = 0.0;
    let mut splits = 0usize;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        let local_tol = tol * (p.b - p.a) / width;
        if (p.depth >= SIMPSON_MIN_DEPTH && delta.abs() <= 15.0 * local_tol) || m <= p.a || m >= p.b {
            total += left + right + delta / 15.0;
            err_total += delta.abs() / 15.0;
            continue;
        }
        splits += 1;
        if splits > cfg.max_subdivisions {
            return Err(Error::QuadratureNonConvergence {
                subdivisions: splits,
                estimate: total,
                error: err_total,
            });
        }
        let depth = p.depth + 1;
        stack.push(Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right, depth });
        stack.push(Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left, depth });
    }
    if !total.is_finite() {
        return Err(Error::domain("integrate", "integrand is not finite on the interval"));
    }
    Ok(total)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        // Gauss nodes are the odd-indexed Kronrod nodes.
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let (v, e) = kronrod15(f, lo, hi);
    // (a, b, value, error); bisect the worst panel until the budget is met.
    let mut panels = vec![(lo, hi, v, e)];
    let mut splits = 0usize;
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::domain("integrate", "integrand is not finite on the interval"));
        }
        if err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
            return Ok(total);
        }
        if splits >= cfg.max_subdivisions {
            return Err(Error::QuadratureNonConvergence { subdivisions: splits, estimate: total, error: err });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let (a, b, _, _) = panels[worst];
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Ok(total);
        }
        let (lv, le) = kronrod15(f, a, m);
        let (rv, re) = kronrod15(f, m, b);
        panels[worst] = (a, m, lv, le);
        panels.insert(worst + 1, (m, b, rv, re));
        splits += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::Beta;

    fn all_rules() -> Vec<QuadratureConfig> {
        let base = QuadratureConfig::default();
        vec![base, base.with_rule(QuadratureRule::GaussKronrod)]
    }

    #[test]
    fn trivial_integrals() {
        for cfg in all_rules() {
            assert!((integrate(|_| 1.0, 0.0, 1.0, &cfg).unwrap() - 1.0).abs() < 1e-14);
            assert!((integrate(|x| x, 0.0, 2.0, &cfg).unwrap() - 2.0).abs() < 1e-14);
            assert_eq!(integrate(|x| x, 3.0, 3.0, &cfg).unwrap(), 0.0);
        }
    }

    #[test]
    fn beta_density_normalizes() {
        for cfg in all_rules() {
            let d = Beta::new(3.0, 4.0).unwrap();
            let v = integrate(|x| d.pdf(x), 0.0, 1.0, &cfg).unwrap();
            assert!((v - 1.0).abs() < 1e-9);
            for a in [1.0, 2.0, 7.0, 33.0, 100.0] {
                for b in [1.0, 5.0, 50.0, 100.0] {
                    let d = Beta::new(a, b).unwrap();
                    let v = integrate(|x| d.pdf(x), 0.0, 1.0, &cfg).unwrap();
                    assert!((v - 1.0).abs() < 1e-8, "a={a} b={b}: {v} ({:?})", cfg.rule);
                }
            }
        }
    }

    #[test]
    fn kronrod_is_exact_for_degree_22_polynomials() {
        let cfg = QuadratureConfig::default().with_rule(QuadratureRule::GaussKronrod);
        for k in 0..=22 {
            let (v, _) = kronrod15(&|x: f64| x.powi(k), -1.0, 1.0);
            let want = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((v - want).abs() < 1e-14, "degree {k}: {v}");
        }
        let v = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, &cfg).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_rule() {
        for n in [1usize, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            // exact for degree 2n - 1
            let deg = 2 * n - 1;
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn rectangle_rule() {
        let cfg = QuadratureConfig::default().with_rule(QuadratureRule::Rectangle { panels: 100 });
        // midpoint rule is exact for linear integrands
        assert!((integrate(|x| 3.0 * x + 1.0, 0.0, 2.0, &cfg).unwrap() - 8.0).abs() < 1e-12);
        let v = integrate(|x| x * x, 0.0, 1.0, &cfg).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn deterministic() {
        let cfg = QuadratureConfig::default();
        let f = |x: f64| (x * 13.0).sin().exp();
        let a = integrate(f, 0.0, 3.0, &cfg).unwrap();
        let b = integrate(f, 0.0, 3.0, &cfg).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn reports_non_convergence() {
        let cfg = QuadratureConfig { max_subdivisions: 4, ..QuadratureConfig::default() };
        let r = integrate(|x| (1.0 / (x + 1e-4)).sin(), 0.0, 1.0, &cfg);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = QuadratureConfig::default();
        assert!(integrate(|x| x, 1.0, 0.0, &cfg).is_err());
        let bad = QuadratureConfig { rel_tol: 0.0, ..cfg };
        assert!(integrate(|x| x, 0.0, 1.0, &bad).is_err());
    }
}
