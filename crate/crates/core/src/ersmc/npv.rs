use serde::{Deserialize, Serialize};

use super::{ErsContract, EquityDynamics};
use crate::error::{domain, Result};
use crate::marketdata::DiscountCurve;

/// Floating rate of the period in progress at default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixingConvention {
    /// Fixed at the period start from today's curve.
    #[default]
    PeriodStart,
    /// Forward from `τ` to the period end, paid with the full accrual.
    ForwardAtDefault,
}

/// `NPV(τ) = a + b·X` with `X` in decimal: returns `(a, b)`.
///
/// Remaining floating leg `S₀ Σ_{T_i>τ} P(τ,T_i) α_i (L_i + X)`, dividends
/// `S_τ (1 − e^{−q(T−τ)})`, terminal exchange `S₀ P(τ,T) − S_τ e^{−q(T−τ)}`,
/// all scaled by `K`.
pub fn npv_coefficients(contract: &ErsContract, equity: &EquityDynamics, tau: f64, s_tau: f64, discount: &DiscountCurve) -> Result<(f64, f64)> {
    let schedule = &contract.schedule;
    let maturity = schedule.maturity();
    if tau > maturity + 1e-12 {
        return Err(domain(format!("default time {tau} after maturity {maturity}")));
    }
    if tau < 0.0 {
        return Err(domain(format!("negative default time {tau}")));
    }
    let tau = tau.min(maturity);
    let df_tau = discount.df(tau);
    let first = schedule.next_index(tau);
    let dates = schedule.dates();
    let accruals = schedule.accruals();
    let mut float = 0.0;
    let mut annuity = 0.0;
    for i in first..dates.len() {
        let p = discount.df(dates[i]) / df_tau;
        let start = if i == 0 { schedule.start() } else { dates[i - 1] };
        let rate = match contract.fixing {
            FixingConvention::ForwardAtDefault if i == first && tau > start => discount.forward_simple_rate(tau, dates[i], dates[i] - tau)?,
            _ => discount.forward_simple_rate(start, dates[i], accruals[i])?,
        };
        float += p * accruals[i] * rate;
        annuity += p * accruals[i];
    }
    let carry = (-equity.dividend_yield * (maturity - tau)).exp();
    let dividends = s_tau * (1.0 - carry);
    let terminal = contract.s0 * discount.df(maturity) / df_tau - s_tau * carry;
    let k = contract.stock_count;
    Ok((k * (contract.s0 * float - dividends + terminal), k * contract.s0 * annuity))
}

/// Residual value of the swap at the counterparty's default time `τ`.
pub fn npv_at_default(contract: &ErsContract, equity: &EquityDynamics, tau: f64, s_tau: f64, discount: &DiscountCurve) -> Result<f64> {
    let (a, b) = npv_coefficients(contract, equity, tau, s_tau, discount)?;
    Ok(a + b * contract.spread * 1e-4)
}
