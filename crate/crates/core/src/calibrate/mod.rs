//! Calibration of AT1P, SBAT1P and SVBAT1P to CDS quotes.
//!
//! * [`calibrate_at1p_cascade`]: one volatility segment per maturity, solved
//!   in increasing tenor order.
//! * [`sbat1p_kernel_calibrate`]: one free barrier chosen so the scenario CDS
//!   matrix is singular; probabilities from its null space.
//! * [`sbat1p_optimize`] / [`svbat1p_optimize`]: weighted least squares on
//!   mixture CDS values with multistart simplex search.

mod cascade;
mod kernel;
mod optimize;
mod report;

pub use cascade::calibrate_at1p_cascade;
pub use kernel::{sbat1p_kernel_calibrate, KernelSolution, DEFAULT_KERNEL_BRACKET};
pub use optimize::{sbat1p_optimize, svbat1p_optimize};
pub use report::{merge_scenarios, residual_report, CalibrationReport, ModelKind};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::marketdata::CdsQuote;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub multistart_count: usize,
    /// Iteration budget per start.
    pub max_iterations: usize,
    /// Convergence tolerance on the objective (bps²).
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { multistart_count: 16, max_iterations: 4000, tolerance: 1e-12 }
    }
}

/// Open parameter box for barriers and volatilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub h: (f64, f64),
    pub sigma: (f64, f64),
}

impl Default for Bounds {
    fn default() -> Self {
        Self { h: (0.01, 0.99), sigma: (0.01, 1.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    pub beta: f64,
    #[serde(default)]
    pub fixed_h: Option<Vec<f64>>,
    pub scenario_count: usize,
    /// Volatility shared by all scenarios; free when absent.
    #[serde(default)]
    pub common_sigma: Option<f64>,
    /// One positive weight per quote; unweighted when absent.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub bounds: Bounds,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            beta: 0.5,
            fixed_h: None,
            scenario_count: 2,
            common_sigma: None,
            weights: None,
            optimizer: OptimizerConfig::default(),
            bounds: Bounds::default(),
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scenario_count == 0 {
            return Err(invalid("scenario_count must be at least 1"));
        }
        if !self.beta.is_finite() {
            return Err(invalid("beta must be finite"));
        }
        if let Some(w) = &self.weights {
            if w.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(invalid("weights must be positive"));
            }
        }
        if let Some(s) = self.common_sigma {
            if !(s > 0.0) {
                return Err(invalid("common_sigma must be positive"));
            }
        }
        let (hl, hh) = self.bounds.h;
        let (sl, sh) = self.bounds.sigma;
        if !(0.0 < hl && hl < hh && hh < 1.0) || !(0.0 < sl && sl < sh) {
            return Err(invalid("invalid parameter bounds"));
        }
        if self.optimizer.multistart_count == 0 || self.optimizer.max_iterations == 0 {
            return Err(invalid("optimizer needs at least one start and one iteration"));
        }
        Ok(())
    }
}

/// Weights inversely proportional to each quote's bid-ask width.
pub fn bid_ask_weights(quotes: &[CdsQuote]) -> Result<Vec<f64>> {
    quotes
        .iter()
        .map(|q| {
            let width = q.ask - q.bid;
            if width > 0.0 {
                Ok(1.0 / width)
            } else {
                Err(invalid(format!("zero bid-ask width at tenor {}y", q.tenor)))
            }
        })
        .collect()
}

/// Rescales weights to mean one; all-equal weights become exactly one, so
/// they reproduce the unweighted objective bit for bit.
pub fn normalize_weights(weights: Option<&[f64]>, count: usize) -> Result<Vec<f64>> {
    match weights {
        None => Ok(vec![1.0; count]),
        Some(w) if w.len() != count => Err(invalid(format!("{} weights for {count} quotes", w.len()))),
        Some(w) if w.iter().all(|&x| x == w[0]) => Ok(vec![1.0; count]),
        Some(w) => {
            let mean = w.iter().sum::<f64>() / count as f64;
            Ok(w.iter().map(|&x| x / mean).collect())
        }
    }
}
