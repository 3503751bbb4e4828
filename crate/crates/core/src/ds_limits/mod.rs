//! Dempster-Shafer upper limits for the three-Poisson model
//!
//! ```text
//! n ~ Pois(eps * s + b),   y ~ Pois(t * b),   z ~ Pois(u * eps)
//! ```
//!
//! Each channel bounds `s` by an a-random interval `(S_l, S_u)` built from the
//! Poisson DSM intervals of the three rates, conditioned on `S_u >= 0`. The
//! channel's commonality of the singleton `{x}` is
//! `r(x) = F_{S_l}(x) - F_{S_u}(x)`; channels combine by multiplying `r`, and
//! the plausibility transform normalizes the product into a density for `s`.
//!
//! Writing `N, Y, Z` for the interval ends of the three rates,
//!
//! ```text
//! F_{S_l}(x) = 1 - P(N_l > Y_u/t + x Z_u/u) / P(N_u > Y_l/t)
//! F_{S_u}(x) = 1 - P(N_u > Y_l/t + x Z_l/u) / P(N_u > Y_l/t)
//! ```
//!
//! and each probability is an [`ExcessEvent`]. Zero counts follow from the
//! point-mass conventions: `n = 0` gives `F_{S_l} = 1`, `y = 0` makes the
//! denominator 1, and `z = 0` gives `F_{S_u} = 0` (an improper channel).

mod excess;

pub use excess::{CdfRoute, ExcessEvent};

use crate::error::{Error, Result};

/// One channel's counts and known scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelObservation {
    pub n: u64,
    pub y: u64,
    pub z: u64,
    pub t: f64,
    pub u: f64,
}

impl ChannelObservation {
    pub fn new(n: u64, y: u64, z: u64, t: f64, u: f64) -> Result<Self> {
        let ch = Self { n, y, z, t, u };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0) || !self.t.is_finite() || !(self.u > 0.0) || !self.u.is_finite() {
            return Err(Error::domain(
                "ChannelObservation",
                format!("scales must be positive and finite (t = {}, u = {})", self.t, self.u),
            ));
        }
        Ok(())
    }
}

/// An ordered set of channels sharing one signal rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub channels: Vec<ChannelObservation>,
    pub label: String,
}

impl Dataset {
    pub fn new(channels: Vec<ChannelObservation>, label: impl Into<String>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::domain("Dataset", "a dataset needs at least one channel"));
        }
        for ch in &channels {
            ch.validate()?;
        }
        Ok(Self { channels, label: label.into() })
    }

    pub fn single(ch: ChannelObservation) -> Self {
        Self { channels: vec![ch], label: String::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub points: usize,
    pub tail_eps: f64,
    pub hard_cap: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { points: 512, tail_eps: 1e-8, hard_cap: 1e12 }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.points < 16 {
            return Err(Error::InvalidConfig(format!("grid needs at least 16 points, got {}", self.points)));
        }
        if !(self.tail_eps > 0.0 && self.tail_eps < 1e-3) {
            return Err(Error::InvalidConfig(format!("tail_eps = {} must be in (0, 1e-3)", self.tail_eps)));
        }
        if !(self.hard_cap > 0.0) {
            return Err(Error::InvalidConfig("hard_cap must be positive".into()));
        }
        Ok(())
    }
}

/// Values within this distance outside [0, 1] are rounding and get clamped.
const CLAMP_TOL: f64 = 1e-9;

fn clamp_unit(v: f64) -> Result<f64> {
    if v.is_nan() || v < -CLAMP_TOL || v > 1.0 + CLAMP_TOL {
        return Err(Error::CdfOutOfRange { value: v });
    }
    Ok(v.clamp(0.0, 1.0))
}

/// The closed-form CDFs of one channel's interval ends.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    obs: ChannelObservation,
    lower: ExcessEvent,
    upper: ExcessEvent,
    denom: f64,
    route: CdfRoute,
}

impl ChannelModel {
    pub fn new(obs: ChannelObservation, route: CdfRoute) -> Result<Self> {
        obs.validate()?;
        let (n, y, z) = (obs.n as f64, obs.y as f64, obs.z as f64);
        let lower = ExcessEvent::new(n, y + 1.0, z + 1.0, obs.t, obs.u)?;
        let upper = ExcessEvent::new(n + 1.0, y, z, obs.t, obs.u)?;
        // P(N_u > Y_l / t) = pB(t/(t+1); y, n+1)
        let denom = upper.prob(0.0, &route)?;
        if !(denom > 0.0) {
            return Err(Error::NoPosteriorMass(format!("P(S_u >= 0) underflows for {obs:?}")));
        }
        Ok(Self { obs, lower, upper, denom, route })
    }

    pub fn observation(&self) -> &ChannelObservation {
        &self.obs
    }

    /// True when the upper end is infinite with probability one (`z = 0`).
    pub fn is_improper(&self) -> bool {
        self.obs.z == 0
    }

    /// Probability that the interval meets `[0, inf)`.
    pub fn conditioning_mass(&self) -> f64 {
        self.denom
    }

    fn check_x(x: f64) -> Result<()> {
        if !(x >= 0.0) {
            return Err(Error::domain("channel cdf", format!("x = {x} must be >= 0")));
        }
        Ok(())
    }

    /// `1 - F_{S_l}(x)`, without cancellation.
    pub fn lower_sf(&self, x: f64) -> Result<f64> {
        Self::check_x(x)?;
        Ok(self.lower.prob(x, &self.route)? / self.denom)
    }

    /// `1 - F_{S_u}(x)`, without cancellation.
    pub fn upper_sf(&self, x: f64) -> Result<f64> {
        Self::check_x(x)?;
        Ok(self.upper.prob(x, &self.route)? / self.denom)
    }

    pub fn cdf_lower(&self, x: f64) -> Result<f64> {
        clamp_unit(1.0 - self.lower_sf(x)?)
    }

    pub fn cdf_upper(&self, x: f64) -> Result<f64> {
        if self.is_improper() && x.is_finite() {
            return Ok(0.0);
        }
        clamp_unit(1.0 - self.upper_sf(x)?)
    }

    /// `(F_{S_l}(x), F_{S_u}(x), r(x))` with `r` formed from the survival
    /// functions so it stays accurate in the far tail.
    pub fn evaluate(&self, x: f64) -> Result<(f64, f64, f64)> {
        let sl = self.lower_sf(x)?;
        let (su, r) = if self.is_improper() {
            (1.0, 1.0 - sl)
        } else {
            let su = self.upper_sf(x)?;
            (su, self.upper.prob_minus(&self.lower, x, &self.route)? / self.denom)
        };
        let fl = clamp_unit(1.0 - sl)?;
        let fu = clamp_unit(1.0 - su)?;
        if r < -CLAMP_TOL {
            return Err(Error::CdfOutOfRange { value: r });
        }
        Ok((fl, fu.min(fl), r.clamp(0.0, fl - fu.min(fl))))
    }
}

/// `F_{S_l}(x)` for one channel with the default route.
pub fn channel_cdf_lower(ch: &ChannelObservation, x: f64) -> Result<f64> {
    ChannelModel::new(*ch, CdfRoute::default())?.cdf_lower(x)
}

/// `F_{S_u}(x)` for one channel with the default route.
pub fn channel_cdf_upper(ch: &ChannelObservation, x: f64) -> Result<f64> {
    ChannelModel::new(*ch, CdfRoute::default())?.cdf_upper(x)
}

/// Per-channel curves on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelCurves {
    pub xs: Vec<f64>,
    pub f_lower: Vec<f64>,
    pub f_upper: Vec<f64>,
    pub r: Vec<f64>,
    pub improper: bool,
    /// `r(x)` decays like `x^-tail_order` (the efficiency count `z`).
    pub tail_order: u64,
}

/// The normalized plausibility-transform density of `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlausibilityDensity {
    pub xs: Vec<f64>,
    pub pdf: Vec<f64>,
    pub cdf: Vec<f64>,
    pub normalization: f64,
}

/// Knots for a dataset: 0, then half linear and half log spaced on
/// `(0, x_max]`, where `x_max` is the first power-of-two multiple at which
/// every proper channel has `1 - F_{S_u}(x_max) <= tail_eps`.
pub fn dataset_grid(models: &[ChannelModel], grid: &GridConfig) -> Result<Vec<f64>> {
    grid.validate()?;
    let x_max = find_x_max(models, grid)?;
    Ok(knots(x_max, grid.points))
}

const LOG_SPAN_DECADES: f64 = 6.0;

fn knots(x_max: f64, points: usize) -> Vec<f64> {
    let n_lin = points / 2;
    let n_log = points - n_lin;
    let mut xs = Vec::with_capacity(points + 1);
    xs.push(0.0);
    xs.extend((1..=n_lin).map(|i| x_max * i as f64 / n_lin as f64));
    xs.extend((0..n_log).map(|j| {
        let frac = j as f64 / (n_log - 1) as f64;
        x_max * 10f64.powf(-LOG_SPAN_DECADES * (1.0 - frac))
    }));
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
    xs
}

fn find_x_max(models: &[ChannelModel], grid: &GridConfig) -> Result<f64> {
    let proper: Vec<&ChannelModel> = models.iter().filter(|m| !m.is_improper()).collect();
    // With no proper channel, size the grid from the lower ends instead so
    // the curves still cover the region where r changes.
    let settled = |x: f64| -> Result<bool> {
        if proper.is_empty() {
            for m in models {
                if m.lower_sf(x)? > grid.tail_eps {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        for m in &proper {
            if m.upper_sf(x)? > grid.tail_eps {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut x = 1.0f64;
    if settled(x)? {
        while x > 1e-12 && settled(x / 2.0)? {
            x /= 2.0;
        }
        return Ok(x);
    }
    while !settled(x)? {
        x *= 2.0;
        if x >= grid.hard_cap {
            return Ok(grid.hard_cap);
        }
    }
    Ok(x)
}

/// Evaluates one channel's curves on the given knots.
pub fn channel_curves_on(model: &ChannelModel, xs: &[f64]) -> Result<ChannelCurves> {
    let mut f_lower = Vec::with_capacity(xs.len());
    let mut f_upper = Vec::with_capacity(xs.len());
    let mut r = Vec::with_capacity(xs.len());
    for &x in xs {
        let (fl, fu, rx) = model.evaluate(x)?;
        f_lower.push(fl);
        f_upper.push(fu);
        r.push(rx);
    }
    // Enforce monotonicity against quadrature noise.
    for i in 1..xs.len() {
        f_lower[i] = f_lower[i].max(f_lower[i - 1]);
        f_upper[i] = f_upper[i].max(f_upper[i - 1]);
    }
    Ok(ChannelCurves {
        xs: xs.to_vec(),
        f_lower,
        f_upper,
        r,
        improper: model.is_improper(),
        tail_order: model.observation().z,
    })
}

/// Curves for a single channel on its own grid.
pub fn channel_curves(ch: &ChannelObservation, grid: &GridConfig) -> Result<ChannelCurves> {
    let model = ChannelModel::new(*ch, CdfRoute::default())?;
    let xs = dataset_grid(std::slice::from_ref(&model), grid)?;
    channel_curves_on(&model, &xs)
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    match xs.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(i) => ys[i],
        Err(0) => ys[0],
        Err(i) if i >= xs.len() => ys[xs.len() - 1],
        Err(i) => {
            let w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            ys[i - 1] + w * (ys[i] - ys[i - 1])
        }
    }
}

/// Multiplies the channels' `r` curves and normalizes the product by the
/// trapezoid rule.
///
/// Curves on a common grid are combined exactly at the knots; otherwise each
/// curve is linearly interpolated onto the union of the grids. The result is
/// [`Error::UnboundedLimit`] when the product is not integrable: its tail
/// decays like `x^-(sum of z)`, so the sum of efficiency counts must be at
/// least 2, and the product must have fallen below `tail_eps` at the last
/// knot.
pub fn combine_channels(curves: &[ChannelCurves], grid: &GridConfig) -> Result<PlausibilityDensity> {
    if curves.is_empty() {
        return Err(Error::domain("combine_channels", "no channels"));
    }
    let tail_order: u64 = curves.iter().map(|c| c.tail_order).sum();
    if curves.iter().all(|c| c.improper) {
        return Err(Error::UnboundedLimit {
            reason: "every channel has z = 0, so every s is plausible".into(),
        });
    }
    if tail_order <= 1 {
        return Err(Error::UnboundedLimit {
            reason: format!("plausibility decays like x^-{tail_order}, which is not integrable"),
        });
    }
    let same_grid = curves.iter().all(|c| c.xs == curves[0].xs);
    let xs: Vec<f64> = if same_grid {
        curves[0].xs.clone()
    } else {
        let mut all: Vec<f64> = curves.iter().flat_map(|c| c.xs.iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        all
    };
    let mut product = vec![1.0; xs.len()];
    for c in curves {
        if same_grid {
            for (p, r) in product.iter_mut().zip(&c.r) {
                *p *= r;
            }
        } else {
            for (p, &x) in product.iter_mut().zip(&xs) {
                *p *= interpolate(&c.xs, &c.r, x);
            }
        }
    }
    let last = *product.last().expect("non-empty grid");
    if last > grid.tail_eps {
        return Err(Error::UnboundedLimit {
            reason: format!(
                "combined plausibility is still {last:e} at x = {:e}",
                xs.last().copied().unwrap_or(0.0)
            ),
        });
    }
    let mut cdf = vec![0.0; xs.len()];
    for i in 1..xs.len() {
        cdf[i] = cdf[i - 1] + 0.5 * (product[i] + product[i - 1]) * (xs[i] - xs[i - 1]);
    }
    let normalization = cdf[xs.len() - 1];
    if !(normalization > 0.0) || !normalization.is_finite() {
        return Err(Error::NoPosteriorMass(format!("plausibility integral is {normalization}")));
    }
    let pdf = product.iter().map(|p| p / normalization).collect();
    for c in cdf.iter_mut() {
        *c = (*c / normalization).min(1.0);
    }
    *cdf.last_mut().expect("non-empty") = 1.0;
    Ok(PlausibilityDensity { xs, pdf, cdf, normalization })
}

/// Smallest `s` with `F_S(s) = q`, by linear interpolation between knots.
pub fn upper_limit(density: &PlausibilityDensity, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain("upper_limit", format!("q = {q} must be in (0, 1)")));
    }
    let cdf = &density.cdf;
    let j = cdf.partition_point(|&c| c < q);
    if j == 0 {
        return Ok(density.xs[0]);
    }
    if j >= cdf.len() {
        return Ok(*density.xs.last().expect("non-empty"));
    }
    let (c0, c1) = (cdf[j - 1], cdf[j]);
    let (x0, x1) = (density.xs[j - 1], density.xs[j]);
    Ok(x0 + (q - c0) / (c1 - c0) * (x1 - x0))
}

/// Limits and DS machinery bundled with a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DsConfig {
    pub grid: GridConfig,
    pub route: CdfRoute,
}

impl DsConfig {
    pub fn models(&self, dataset: &Dataset) -> Result<Vec<ChannelModel>> {
        dataset.channels.iter().map(|ch| ChannelModel::new(*ch, self.route)).collect()
    }

    /// Channel curves on the dataset's shared grid.
    pub fn curves(&self, dataset: &Dataset) -> Result<Vec<ChannelCurves>> {
        let models = self.models(dataset)?;
        let xs = dataset_grid(&models, &self.grid)?;
        models.iter().map(|m| channel_curves_on(m, &xs)).collect()
    }

    pub fn density(&self, dataset: &Dataset) -> Result<PlausibilityDensity> {
        let curves = self.curves(dataset)?;
        combine_channels(&curves, &self.grid)
    }

    /// Upper limits at each quantile; `+inf` when the limit is unbounded.
    pub fn upper_limits(&self, dataset: &Dataset, quantiles: &[f64]) -> Result<Vec<f64>> {
        let models = self.models(dataset)?;
        let improper = models.iter().all(|m| m.is_improper());
        let tail_order: u64 = dataset.channels.iter().map(|c| c.z).sum();
        if improper || tail_order <= 1 {
            return Ok(vec![f64::INFINITY; quantiles.len()]);
        }
        let xs = dataset_grid(&models, &self.grid)?;
        let curves: Vec<ChannelCurves> = models.iter().map(|m| channel_curves_on(m, &xs)).collect::<Result<_>>()?;
        match combine_channels(&curves, &self.grid) {
            Ok(d) => quantiles.iter().map(|&q| upper_limit(&d, q)).collect(),
            Err(Error::UnboundedLimit { .. }) => Ok(vec![f64::INFINITY; quantiles.len()]),
            Err(e) => Err(e),
        }
    }
}

#[cfg(test)]
mod tests;
