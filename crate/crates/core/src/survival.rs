//! Closed-form first-passage survival under a curved safety barrier, and its
//! scenario mixtures.
//!
//! The firm value `V` is lognormal with volatility `σ(t)`; default is the
//! first time `V` falls to the barrier
//! `Ĥ(t) = H·exp(−∫₀ᵗ (q − r + (1+2β)σ²/2) ds)`. Along this barrier the
//! log-distance `ln(V/Ĥ)` is a Brownian motion with drift `β·σ²` in
//! variance time, so survival depends only on `H/V₀`, `β` and the
//! integrated variance.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::marketdata::{DiscountCurve, DividendCurve};
use crate::math::normal_cdf;

/// Piecewise-constant volatility: `sigma` applies on `(previous end, end]`,
/// the last value is extrapolated flat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolSegment {
    pub end: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<VolSegment>", into = "Vec<VolSegment>")]
pub struct PiecewiseVol {
    segments: Vec<VolSegment>,
}

impl TryFrom<Vec<VolSegment>> for PiecewiseVol {
    type Error = Error;
    fn try_from(segments: Vec<VolSegment>) -> Result<Self> {
        Self::new(segments)
    }
}

impl From<PiecewiseVol> for Vec<VolSegment> {
    fn from(v: PiecewiseVol) -> Self {
        v.segments
    }
}

impl PiecewiseVol {
    pub fn new(segments: Vec<VolSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(invalid("volatility needs at least one segment"));
        }
        let mut prev = 0.0;
        for s in &segments {
            if !(s.end > prev) || !s.end.is_finite() {
                return Err(invalid(format!("volatility breakpoints must be positive and strictly increasing (at {})", s.end)));
            }
            if !(s.sigma > 0.0) || !s.sigma.is_finite() {
                return Err(invalid(format!("volatility must be positive, got {}", s.sigma)));
            }
            prev = s.end;
        }
        Ok(Self { segments })
    }

    /// Constant volatility (stored as one segment ending at 1y, extrapolated flat).
    pub fn flat(sigma: f64) -> Result<Self> {
        Self::new(vec![VolSegment { end: 1.0, sigma }])
    }

    /// Builds from `(breakpoint, sigma)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(end, sigma)| VolSegment { end, sigma }).collect())
    }

    pub fn segments(&self) -> &[VolSegment] {
        &self.segments
    }

    /// Copy with one more segment appended.
    pub fn with_segment(&self, end: f64, sigma: f64) -> Result<Self> {
        let mut segments = self.segments.clone();
        segments.push(VolSegment { end, sigma });
        Self::new(segments)
    }

    /// Volatility in force just after time `t` (right-continuous lookup of the
    /// left-open segments, so `sigma_at(end_k)` is the next segment's value).
    pub fn sigma_at(&self, t: f64) -> f64 {
        let i = self.segments.partition_point(|s| s.end <= t);
        self.segments[i.min(self.segments.len() - 1)].sigma
    }

    /// Times in `(0, horizon)` at which the volatility changes.
    pub fn breakpoints_before(&self, horizon: f64) -> Vec<f64> {
        self.segments
            .windows(2)
            .filter(|w| w[0].sigma != w[1].sigma)
            .map(|w| w[0].end)
            .filter(|&t| t < horizon)
            .collect()
    }

    /// `∫₀ᵀ σ(s)² ds`, exact over the constant pieces.
    pub fn integrated_variance(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let last = self.segments.len() - 1;
        let mut prev = 0.0;
        let mut acc = 0.0;
        for (k, s) in self.segments.iter().enumerate() {
            let hi = if k == last { f64::INFINITY } else { s.end };
            let len = t.min(hi) - prev;
            if len <= 0.0 {
                break;
            }
            acc += s.sigma * s.sigma * len;
            prev = hi;
        }
        acc
    }
}

/// One firm's dynamics, normalized by `V₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFirm")]
pub struct FirmDynamics {
    /// Barrier reference level `H/V₀`.
    pub h_ratio: f64,
    /// Barrier shape parameter.
    pub beta: f64,
    pub vol: PiecewiseVol,
}

#[derive(Deserialize)]
struct RawFirm {
    h_ratio: f64,
    beta: f64,
    vol: PiecewiseVol,
}

impl TryFrom<RawFirm> for FirmDynamics {
    type Error = Error;
    fn try_from(r: RawFirm) -> Result<Self> {
        Self::new(r.h_ratio, r.beta, r.vol)
    }
}

impl FirmDynamics {
    pub fn new(h_ratio: f64, beta: f64, vol: PiecewiseVol) -> Result<Self> {
        if !(h_ratio > 0.0 && h_ratio < 1.0) {
            return Err(invalid(format!("barrier ratio H/V0 must lie in (0,1), got {h_ratio}")));
        }
        if !beta.is_finite() {
            return Err(invalid("beta must be finite"));
        }
        Ok(Self { h_ratio, beta, vol })
    }

    pub fn with_flat_vol(h_ratio: f64, beta: f64, sigma: f64) -> Result<Self> {
        Self::new(h_ratio, beta, PiecewiseVol::flat(sigma)?)
    }

    pub fn integrated_variance(&self, t: f64) -> f64 {
        self.vol.integrated_variance(t)
    }

    /// `Q(τ > T)`.
    pub fn survival_probability(&self, t: f64) -> f64 {
        survival_from_variance(self.h_ratio, self.beta, self.integrated_variance(t))
    }

    /// Safety barrier `Ĥ(t)` as a fraction of `V₀`.
    pub fn barrier_level(&self, discount: &DiscountCurve, dividends: &DividendCurve, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(domain(format!("barrier requested at negative time {t}")));
        }
        let exponent = dividends.integrated_yield(t) - discount.integrated_rate(t)
            + 0.5 * (1.0 + 2.0 * self.beta) * self.integrated_variance(t);
        Ok(self.h_ratio * (-exponent).exp())
    }
}

/// First-passage survival for log-distance `ln(1/h)` and drift `β` per unit
/// of integrated variance `variance`.
pub fn survival_from_variance(h_ratio: f64, beta: f64, variance: f64) -> f64 {
    if variance <= 0.0 {
        return 1.0;
    }
    let s = variance.sqrt();
    let ln_h = h_ratio.ln();
    let q = normal_cdf((-ln_h + beta * variance) / s)
        - h_ratio.powf(2.0 * beta) * normal_cdf((ln_h + beta * variance) / s);
    q.clamp(0.0, 1.0)
}

pub fn integrated_variance(firm: &FirmDynamics, t: f64) -> f64 {
    firm.integrated_variance(t)
}

pub fn survival_probability(firm: &FirmDynamics, t: f64) -> f64 {
    firm.survival_probability(t)
}

pub fn barrier_level(firm: &FirmDynamics, discount: &DiscountCurve, dividends: &DividendCurve, t: f64) -> Result<f64> {
    firm.barrier_level(discount, dividends, t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub firm: FirmDynamics,
    pub probability: f64,
}

/// Barrier/volatility scenarios drawn independently of the firm's Brownian driver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Scenario>", into = "Vec<Scenario>")]
pub struct ScenarioSet {
    scenarios: Vec<Scenario>,
}

impl TryFrom<Vec<Scenario>> for ScenarioSet {
    type Error = Error;
    fn try_from(s: Vec<Scenario>) -> Result<Self> {
        Self::new(s)
    }
}

impl From<ScenarioSet> for Vec<Scenario> {
    fn from(s: ScenarioSet) -> Self {
        s.scenarios
    }
}

impl ScenarioSet {
    pub fn new(scenarios: Vec<Scenario>) -> Result<Self> {
        if scenarios.is_empty() {
            return Err(invalid("scenario set needs at least one scenario"));
        }
        if let Some(s) = scenarios.iter().find(|s| !(0.0..=1.0).contains(&s.probability)) {
            return Err(invalid(format!("scenario probability {} outside [0,1]", s.probability)));
        }
        let total: f64 = scenarios.iter().map(|s| s.probability).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("scenario probabilities sum to {total}, expected 1")));
        }
        Ok(Self { scenarios })
    }

    pub fn single(firm: FirmDynamics) -> Self {
        Self { scenarios: vec![Scenario { firm, probability: 1.0 }] }
    }

    /// Scenarios sharing `beta` and a constant volatility per scenario, from
    /// `(h_ratio, sigma, probability)` triples.
    pub fn from_triples(beta: f64, triples: &[(f64, f64, f64)]) -> Result<Self> {
        let scenarios = triples
            .iter()
            .map(|&(h, sigma, p)| Ok(Scenario { firm: FirmDynamics::with_flat_vol(h, beta, sigma)?, probability: p }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(scenarios)
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    /// `Σ p_i Q_i(τ > T)`.
    pub fn mixture_survival(&self, t: f64) -> f64 {
        self.scenarios.iter().map(|s| s.probability * s.firm.survival_probability(t)).sum()
    }

    /// Probability-weighted barrier ratio `E[H]`.
    pub fn expected_barrier(&self) -> f64 {
        self.scenarios.iter().map(|s| s.probability * s.firm.h_ratio).sum()
    }
}

pub fn mixture_survival(scenarios: &ScenarioSet, t: f64) -> f64 {
    scenarios.mixture_survival(t)
}

/// Anything that yields survival probabilities `t ↦ Q(τ > t)`.
pub trait SurvivalModel: Send + Sync {
    fn survival(&self, t: f64) -> f64;
}

impl SurvivalModel for FirmDynamics {
    fn survival(&self, t: f64) -> f64 {
        self.survival_probability(t)
    }
}

impl SurvivalModel for ScenarioSet {
    fn survival(&self, t: f64) -> f64 {
        self.mixture_survival(t)
    }
}

impl<M: SurvivalModel + ?Sized> SurvivalModel for Arc<M> {
    fn survival(&self, t: f64) -> f64 {
        (**self).survival(t)
    }
}

/// A survival model together with a sampling grid used for Stieltjes
/// integration of `dQ`.
#[derive(Clone)]
pub struct SurvivalCurve {
    model: Arc<dyn SurvivalModel>,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl std::fmt::Debug for SurvivalCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SurvivalCurve").field("times", &self.times).field("values", &self.values).finish()
    }
}

impl SurvivalCurve {
    /// Samples `model` at the given increasing times (the first must be 0).
    pub fn on_times(model: Arc<dyn SurvivalModel>, times: Vec<f64>) -> Result<Self> {
        if times.first() != Some(&0.0) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain("survival grid must start at 0 and increase strictly"));
        }
        let values = times.iter().map(|&t| if t == 0.0 { 1.0 } else { model.survival(t) }).collect();
        Ok(Self { model, times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Largest spacing of the sampling grid.
    pub fn max_step(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// `Q(τ > t)`, from the cached grid when `t` is a grid point.
    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.times.partition_point(|&s| s < t - 1e-12);
        if i < self.times.len() && (self.times[i] - t).abs() <= 1e-12 {
            self.values[i]
        } else if t <= 0.0 {
            1.0
        } else {
            self.model.survival(t)
        }
    }

    pub fn model(&self) -> &Arc<dyn SurvivalModel> {
        &self.model
    }

    /// CSV rows `time_years,survival`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_years,survival\n");
        for (t, q) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{t},{q}\n"));
        }
        out
    }
}

/// Uniform grid `0, step, 2·step, …, horizon` (the horizon is always included).
pub fn uniform_times(horizon: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(horizon >= step - 1e-12) {
        return Err(domain(format!("survival grid needs step > 0 and horizon >= step (step {step}, horizon {horizon})")));
    }
    let n = ((horizon / step) - 1e-9).ceil().max(1.0) as usize;
    let mut times: Vec<f64> = (0..n).map(|k| k as f64 * step).collect();
    times.push(horizon);
    Ok(times)
}

/// Samples a survival model on a uniform grid.
pub fn survival_grid<M: SurvivalModel + 'static>(source: M, horizon: f64, step: f64) -> Result<SurvivalCurve> {
    SurvivalCurve::on_times(Arc::new(source), uniform_times(horizon, step)?)
}
