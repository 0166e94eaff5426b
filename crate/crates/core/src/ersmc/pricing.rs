use serde::{Deserialize, Serialize};

use super::npv::npv_coefficients;
use super::simulate::{simulate_defaults, DefaultSimulation};
use super::{EquityDynamics, ErsContract, McConfig};
use crate::error::{invalid, Error, Result};
use crate::marketdata::DiscountCurve;
use crate::math::roots::{brent, RootOptions};
use crate::survival::ScenarioSet;

/// Price estimate. `value` and `std_error` are the swap value in currency
/// times 10 000 (for `K = 1` this is the payoff per share in units of
/// 1e-4); the `_bps` fields express the same numbers in bps of `K·S₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub value_bps: f64,
    pub std_error_bps: f64,
    /// Estimate and error without the control variate.
    pub plain_value: f64,
    pub plain_std_error: f64,
    pub paths_used: usize,
    pub defaults: usize,
    pub cv_beta: f64,
    pub control_variate: bool,
    pub spread: f64,
    pub rho: f64,
}

/// Per-default discounted exposure `D(0,τ)·(a + b·X)`, tabulated for one `ρ`.
struct Exposures {
    items: Vec<(f64, f64, f64)>,
    paths: f64,
    default_mean: f64,
    annuity_value: f64,
    lgd: f64,
}

struct Moments {
    mean: f64,
    var: f64,
    cov: f64,
    mean_c: f64,
    var_c: f64,
}

impl Exposures {
    fn new(sim: &DefaultSimulation, contract: &ErsContract, equity: &EquityDynamics, discount: &DiscountCurve, rho: f64) -> Result<Self> {
        let maturity = contract.maturity();
        if (sim.horizon - maturity).abs() > 1e-9 {
            return Err(invalid(format!("simulation horizon {} differs from contract maturity {maturity}", sim.horizon)));
        }
        let drift = equity.dividend_yield + 0.5 * equity.sigma_s * equity.sigma_s;
        let items = sim
            .defaults
            .iter()
            .map(|d| {
                let df = discount.df(d.tau);
                let s_tau = equity.s0 / df * (-drift * d.tau + equity.sigma_s * d.w_s(rho)).exp();
                let (a, b) = npv_coefficients(contract, equity, d.tau, s_tau, discount)?;
                Ok((df, a, b))
            })
            .collect::<Result<Vec<_>>>()?;
        let annuity: f64 = contract.schedule.dates().iter().zip(contract.schedule.accruals()).map(|(&t, &a)| a * discount.df(t)).sum();
        Ok(Self {
            items,
            paths: sim.paths as f64,
            default_mean: 1.0 - sim.scenarios.mixture_survival(maturity),
            annuity_value: contract.notional() * annuity,
            lgd: contract.lgd(),
        })
    }

    /// Sample moments of `Y = D(0,τ) NPV(τ)⁺` and `C = 1{τ ≤ T}` over all paths
    /// (survivors contribute zeros), with `n − 1` denominators.
    fn moments(&self, x: f64) -> Moments {
        let n = self.paths;
        let (mut s1, mut s2) = (0.0, 0.0);
        for &(df, a, b) in &self.items {
            let y = df * (a + b * x).max(0.0);
            s1 += y;
            s2 += y * y;
        }
        let k = self.items.len() as f64;
        let mean = s1 / n;
        let mean_c = k / n;
        let denom = (n - 1.0).max(1.0);
        Moments {
            mean,
            var: ((s2 - n * mean * mean) / denom).max(0.0),
            cov: (s1 - n * mean * mean_c) / denom,
            mean_c,
            var_c: ((k - n * mean_c * mean_c) / denom).max(0.0),
        }
    }

    /// Price in currency with and without the control variate; returns
    /// `(cv value, cv se, plain value, plain se, beta)`.
    fn price(&self, x: f64) -> (f64, f64, f64, f64, f64) {
        let m = self.moments(x);
        let beta = if m.var_c > 0.0 { m.cov / m.var_c } else { 0.0 };
        let cv_mean = m.mean - beta * (m.mean_c - self.default_mean);
        let cv_var = (m.var - beta * m.cov).max(0.0);
        let fixed = self.annuity_value * x;
        (
            fixed - self.lgd * cv_mean,
            self.lgd * (cv_var / self.paths).sqrt(),
            fixed - self.lgd * m.mean,
            self.lgd * (m.var / self.paths).sqrt(),
            beta,
        )
    }

    fn value(&self, x: f64, control_variate: bool) -> f64 {
        let p = self.price(x);
        if control_variate {
            p.0
        } else {
            p.2
        }
    }
}

impl DefaultSimulation {
    /// Swap value at the contract's spread for correlation `rho`.
    pub fn price(&self, contract: &ErsContract, equity: &EquityDynamics, discount: &DiscountCurve, rho: f64, control_variate: bool) -> Result<McEstimate> {
        contract.validate()?;
        equity.validate()?;
        check_s0(contract, equity)?;
        let exp = Exposures::new(self, contract, equity, discount, rho)?;
        let (cv, cv_se, plain, plain_se, beta) = exp.price(contract.spread * 1e-4);
        let (value, se) = if control_variate { (cv, cv_se) } else { (plain, plain_se) };
        let to_bps = 1e4 / contract.notional();
        Ok(McEstimate {
            value: value * 1e4,
            std_error: se * 1e4,
            value_bps: value * to_bps,
            std_error_bps: se * to_bps,
            plain_value: plain * 1e4,
            plain_std_error: plain_se * 1e4,
            paths_used: self.paths,
            defaults: self.defaults.len(),
            cv_beta: if control_variate { beta } else { 0.0 },
            control_variate,
            spread: contract.spread,
            rho,
        })
    }

    /// Spread (bps) at which the swap is worth zero, on these paths.
    pub fn fair_spread(&self, contract: &ErsContract, equity: &EquityDynamics, discount: &DiscountCurve, rho: f64, control_variate: bool) -> Result<f64> {
        contract.validate()?;
        equity.validate()?;
        check_s0(contract, equity)?;
        let exp = Exposures::new(self, contract, equity, discount, rho)?;
        let f = |x_bps: f64| exp.value(x_bps * 1e-4, control_variate);
        let f0 = f(0.0);
        if f0 == 0.0 {
            return Ok(0.0);
        }
        let dir = if f0 < 0.0 { 1.0 } else { -1.0 };
        let mut far = 10.0 * dir;
        while (f(far) < 0.0) == (f0 < 0.0) {
            far *= 2.0;
            if far.abs() > 1e5 {
                return Err(Error::Calibration { tenor: contract.maturity(), message: "fair spread not bracketed within 1e5 bps".into() });
            }
        }
        let (lo, hi) = if dir > 0.0 { (0.0, far) } else { (far, 0.0) };
        Ok(brent(f, lo, hi, RootOptions { x_tol: 1e-10, f_tol: 0.0, max_iter: 500 })?)
    }
}

fn check_s0(contract: &ErsContract, equity: &EquityDynamics) -> Result<()> {
    if (contract.s0 - equity.s0).abs() > 1e-12 * contract.s0 {
        return Err(invalid(format!("contract S0 {} differs from equity S0 {}", contract.s0, equity.s0)));
    }
    Ok(())
}

fn simulate_for(contract: &ErsContract, scenarios: &ScenarioSet, config: &McConfig) -> Result<DefaultSimulation> {
    simulate_defaults(scenarios, contract.maturity(), contract.schedule.dates(), config)
}

/// `ERS(0) = K S₀ X Σ α_i P(0,T_i) − LGD·E[1{τ≤T} D(0,τ) NPV(τ)⁺]`.
pub fn ers_price(contract: &ErsContract, scenarios: &ScenarioSet, equity: &EquityDynamics, discount: &DiscountCurve, config: &McConfig) -> Result<McEstimate> {
    let sim = simulate_for(contract, scenarios, config)?;
    sim.price(contract, equity, discount, config.rho, config.control_variate)
}

/// Spread making the swap fair, found on one set of simulated paths.
pub fn fair_ers_spread(contract: &ErsContract, scenarios: &ScenarioSet, equity: &EquityDynamics, discount: &DiscountCurve, config: &McConfig) -> Result<f64> {
    let sim = simulate_for(contract, scenarios, config)?;
    sim.fair_spread(contract, equity, discount, config.rho, config.control_variate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survival::FirmDynamics;

    fn setup() -> (ErsContract, ScenarioSet, EquityDynamics, DiscountCurve, McConfig) {
        (
            ErsContract::new(1.0, 20.0, 14.2, 5.0, 2, 0.4).unwrap(),
            ScenarioSet::single(FirmDynamics::with_flat_vol(0.6, 0.5, 0.25).unwrap()),
            EquityDynamics { s0: 20.0, sigma_s: 0.2, dividend_yield: 0.008 },
            DiscountCurve::flat(0.03),
            McConfig { paths: 20_000, steps_per_year: 50, ..McConfig::default() },
        )
    }

    #[test]
    fn full_recovery_leaves_annuity_only() {
        let (c, s, e, d, cfg) = setup();
        let c = ErsContract { counterparty_recovery: 1.0, ..c };
        let est = ers_price(&c, &s, &e, &d, &cfg).unwrap();
        let annuity: f64 = c.schedule.dates().iter().zip(c.schedule.accruals()).map(|(&t, &a)| a * d.df(t)).sum();
        assert!((est.value - 20.0 * 14.2e-4 * annuity * 1e4).abs() < 1e-9);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(fair_ers_spread(&c, &s, &e, &d, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn fair_spread_zeroes_price() {
        let (c, s, e, d, cfg) = setup();
        let sim = simulate_defaults(&s, 5.0, c.schedule.dates(), &cfg).unwrap();
        let x = sim.fair_spread(&c, &e, &d, 0.5, true).unwrap();
        assert!(x > 0.0);
        let p = sim.price(&c.with_spread(x), &e, &d, 0.5, true).unwrap();
        assert!(p.value.abs() < 1e-6, "{p:?}");
    }

    #[test]
    fn control_variate_reduces_error() {
        let (c, s, e, d, cfg) = setup();
        let est = ers_price(&c, &s, &e, &d, &cfg).unwrap();
        assert!(est.std_error < est.plain_std_error);
        assert!(est.std_error_bps > 0.0);
    }

    #[test]
    fn mismatched_s0_rejected() {
        let (c, s, e, d, cfg) = setup();
        let e = EquityDynamics { s0: 21.0, ..e };
        assert!(ers_price(&c, &s, &e, &d, &cfg).is_err());
    }
}
