//! Monte Carlo valuation of counterparty risk in an equity return swap.
//!
//! The counterparty's default is a first passage of its firm value below a
//! (scenario) safety barrier. In log-distance coordinates the barrier is flat
//! at zero, so default times are simulated without reference to the equity.
//! Per default the simulator keeps `τ`, the firm's Brownian motion at `τ` and
//! an independent Gaussian with variance `τ`; the equity at default follows
//! for any correlation `ρ`. One simulation therefore serves every `ρ` and
//! every spread `X` with common random numbers.

mod npv;
mod pricing;
mod simulate;

pub use npv::{npv_at_default, npv_coefficients, FixingConvention};
pub use pricing::{ers_price, fair_ers_spread, McEstimate};
pub use simulate::{simulate_default_and_equity, simulate_defaults, step_grid, DefaultSample, DefaultSimulation, PathDetail, BLOCK_SIZE};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::marketdata::PaymentSchedule;

/// Lognormal equity with constant volatility and dividend yield.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquityDynamics {
    pub s0: f64,
    pub sigma_s: f64,
    pub dividend_yield: f64,
}

impl EquityDynamics {
    pub fn validate(&self) -> Result<()> {
        if !(self.s0 > 0.0) || !(self.sigma_s > 0.0) || !self.dividend_yield.is_finite() {
            return Err(invalid("equity needs s0 > 0, sigma_s > 0 and a finite dividend yield"));
        }
        Ok(())
    }
}

/// Equity return swap: the investor receives dividends and the final price
/// change on `K` shares against floating plus spread `X` on `K·S₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErsContract {
    pub stock_count: f64,
    pub s0: f64,
    /// Spread over the floating rate, bps per annum.
    pub spread: f64,
    pub schedule: PaymentSchedule,
    pub counterparty_recovery: f64,
    #[serde(default)]
    pub fixing: FixingConvention,
}

impl ErsContract {
    /// Contract starting today with `frequency` payments per year.
    pub fn new(stock_count: f64, s0: f64, spread: f64, maturity: f64, frequency: u32, counterparty_recovery: f64) -> Result<Self> {
        let c = Self {
            stock_count,
            s0,
            spread,
            schedule: PaymentSchedule::build(0.0, maturity, frequency)?,
            counterparty_recovery,
            fixing: FixingConvention::default(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.stock_count > 0.0) || !(self.s0 > 0.0) {
            return Err(invalid("contract needs K > 0 and S0 > 0"));
        }
        if !self.spread.is_finite() {
            return Err(invalid("spread must be finite"));
        }
        if !(0.0..=1.0).contains(&self.counterparty_recovery) {
            return Err(invalid("counterparty recovery must lie in [0,1]"));
        }
        Ok(())
    }

    pub fn maturity(&self) -> f64 {
        self.schedule.maturity()
    }

    pub fn lgd(&self) -> f64 {
        1.0 - self.counterparty_recovery
    }

    pub fn with_spread(&self, spread: f64) -> Self {
        Self { spread, ..self.clone() }
    }

    pub fn notional(&self) -> f64 {
        self.stock_count * self.s0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub paths: usize,
    pub steps_per_year: usize,
    pub seed: u64,
    pub rho: f64,
    pub control_variate: bool,
    pub brownian_bridge: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { paths: 200_000, steps_per_year: 250, seed: 2004, rho: 0.5, control_variate: true, brownian_bridge: true }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(invalid("paths must be at least 1"));
        }
        if self.steps_per_year < 12 {
            return Err(invalid("steps_per_year must be at least 12"));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(invalid(format!("correlation {} outside [-1,1]", self.rho)));
        }
        Ok(())
    }
}
