//! Running-CDS valuation from any survival curve.
//!
//! Amounts are in basis points of notional and reported from the protection
//! buyer's side: `pv = protection − premium − accrual-on-default`.
//! The default legs are Stieltjes sums over the survival grid with each
//! decrement `Q(t_{j−1}) − Q(t_j)` discounted at the interval midpoint.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::marketdata::{CdsQuote, DiscountCurve, PaymentSchedule};
use crate::survival::{ScenarioSet, SurvivalCurve, SurvivalModel};

/// Weekly integration step.
pub const DEFAULT_GRID_STEP: f64 = 1.0 / 52.0;
/// Coarsest grid accepted by the pricer.
pub const MAX_GRID_STEP: f64 = 1.0 / 12.0;

const BPS: f64 = 1e4;
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdsPricingResult {
    /// Protection buyer's value, bps of notional.
    pub pv: f64,
    pub premium_leg: f64,
    pub accrual_on_default_leg: f64,
    pub protection_leg: f64,
    pub fair_spread: f64,
}

/// Rate-independent leg values per unit notional.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CdsLegs {
    /// `Σ α_i P(0,T_i) Q(T_i)`.
    pub annuity: f64,
    /// `Σ (t_mid − T_{β−1}) P(0,t_mid) ΔQ`.
    pub accrual_annuity: f64,
    /// `Σ P(0,t_mid) ΔQ`.
    pub default_leg: f64,
}

impl CdsLegs {
    /// Buyer's value in bps for running rate `rate` (bps).
    pub fn pv(&self, rate: f64, lgd: f64) -> f64 {
        lgd * self.default_leg * BPS - rate * (self.annuity + self.accrual_annuity)
    }

    pub fn fair_spread(&self, lgd: f64) -> Result<f64> {
        let denom = self.annuity + self.accrual_annuity;
        if !(denom > 0.0) {
            return Err(domain("zero premium annuity"));
        }
        if self.default_leg <= 0.0 {
            return Ok(0.0);
        }
        Ok(lgd * self.default_leg * BPS / denom)
    }

    pub fn result(&self, rate: f64, lgd: f64) -> Result<CdsPricingResult> {
        Ok(CdsPricingResult {
            pv: self.pv(rate, lgd),
            premium_leg: rate * self.annuity,
            accrual_on_default_leg: rate * self.accrual_annuity,
            protection_leg: lgd * self.default_leg * BPS,
            fair_spread: self.fair_spread(lgd)?,
        })
    }
}

/// Integration times for a schedule: `start`, every `step` after it, and all
/// payment dates (uniform points within `1e-9` of a payment date are dropped).
pub fn integration_grid(schedule: &PaymentSchedule, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || step > MAX_GRID_STEP + 1e-12 {
        return Err(domain(format!("integration step {step} outside (0, 1/12]")));
    }
    let dates = schedule.dates();
    let maturity = schedule.maturity();
    let mut times = vec![schedule.start()];
    times.extend_from_slice(dates);
    let mut k = 1usize;
    loop {
        let t = schedule.start() + k as f64 * step;
        if t >= maturity - TIME_EPS {
            break;
        }
        let i = dates.partition_point(|&d| d < t);
        let near = |j: usize| dates.get(j).is_some_and(|&d| (d - t).abs() <= TIME_EPS);
        if !near(i) && !(i > 0 && near(i - 1)) {
            times.push(t);
        }
        k += 1;
    }
    times.sort_by(f64::total_cmp);
    Ok(times)
}

/// Leg values on explicit `(times, survival values)` with `times` covering
/// `[schedule.start, maturity]`; `premium_q[i]` is `Q(T_i)`.
fn legs_on_grid(schedule: &PaymentSchedule, times: &[f64], q: &[f64], premium_q: &[f64], discount: &DiscountCurve) -> CdsLegs {
    let annuity = schedule
        .dates()
        .iter()
        .zip(schedule.accruals())
        .zip(premium_q)
        .map(|((&t, &a), &qt)| a * discount.df(t) * qt)
        .sum();
    let mut accrual_annuity = 0.0;
    let mut default_leg = 0.0;
    for j in 1..times.len() {
        let mid = 0.5 * (times[j - 1] + times[j]);
        let dq = q[j - 1] - q[j];
        let df = discount.df(mid);
        default_leg += df * dq;
        accrual_annuity += (mid - schedule.period_start(mid)) * df * dq;
    }
    CdsLegs { annuity, accrual_annuity, default_leg }
}

/// Leg values of a schedule priced off a sampled survival curve.
pub fn cds_legs(schedule: &PaymentSchedule, survival: &SurvivalCurve, discount: &DiscountCurve) -> Result<CdsLegs> {
    let maturity = schedule.maturity();
    if survival.horizon() < maturity - TIME_EPS {
        return Err(domain(format!("survival grid ends at {} before maturity {maturity}", survival.horizon())));
    }
    if survival.max_step() > MAX_GRID_STEP + 1e-12 {
        return Err(domain(format!("survival grid step {} coarser than 1/12 year", survival.max_step())));
    }
    let start = schedule.start();
    let mut times = vec![start];
    let mut q = vec![survival.value_at(start)];
    for (&t, &v) in survival.times().iter().zip(survival.values()) {
        if t > start + TIME_EPS && t < maturity - TIME_EPS {
            times.push(t);
            q.push(v);
        }
    }
    times.push(maturity);
    q.push(survival.value_at(maturity));
    let premium_q: Vec<f64> = schedule.dates().iter().map(|&t| survival.value_at(t)).collect();
    Ok(legs_on_grid(schedule, &times, &q, &premium_q, discount))
}

/// Full CDS valuation at running rate `rate` (bps).
pub fn cds_pv(schedule: &PaymentSchedule, rate: f64, lgd: f64, survival: &SurvivalCurve, discount: &DiscountCurve) -> Result<CdsPricingResult> {
    cds_legs(schedule, survival, discount)?.result(rate, lgd)
}

/// Running rate (bps) that zeroes the CDS value.
pub fn fair_spread(schedule: &PaymentSchedule, lgd: f64, survival: &SurvivalCurve, discount: &DiscountCurve) -> Result<f64> {
    cds_legs(schedule, survival, discount)?.fair_spread(lgd)
}

/// Samples `model` on the schedule's weekly integration grid.
pub fn curve_for_schedule(model: Arc<dyn SurvivalModel>, schedule: &PaymentSchedule) -> Result<SurvivalCurve> {
    SurvivalCurve::on_times(model, integration_grid(schedule, DEFAULT_GRID_STEP)?)
}

/// Mixture value `Σ p_i CDS(H_i, σ_i)`, each scenario priced separately.
pub fn scenario_cds_pv(schedule: &PaymentSchedule, rate: f64, lgd: f64, scenarios: &ScenarioSet, discount: &DiscountCurve) -> Result<f64> {
    let times = integration_grid(schedule, DEFAULT_GRID_STEP)?;
    let mut total = 0.0;
    for s in scenarios.scenarios() {
        let curve = SurvivalCurve::on_times(Arc::new(s.firm.clone()), times.clone())?;
        total += s.probability * cds_pv(schedule, rate, lgd, &curve, discount)?.pv;
    }
    Ok(total)
}

/// Same value priced once off the mixture survival curve.
pub fn mixture_curve_cds_pv(schedule: &PaymentSchedule, rate: f64, lgd: f64, scenarios: &ScenarioSet, discount: &DiscountCurve) -> Result<f64> {
    let curve = curve_for_schedule(Arc::new(scenarios.clone()), schedule)?;
    Ok(cds_pv(schedule, rate, lgd, &curve, discount)?.pv)
}

/// Value of `quote` at running rate `rate` under `model`.
pub fn quote_pv(quote: &CdsQuote, rate: f64, model: &dyn SurvivalModel, discount: &DiscountCurve) -> Result<f64> {
    let book = CdsBook::new(std::slice::from_ref(quote), discount)?;
    let q = book.survival_values(model);
    Ok(book.pv(0, rate, &q))
}

#[derive(Debug, Clone)]
struct StepWeight {
    from: usize,
    to: usize,
    df: f64,
    accrued: f64,
}

#[derive(Debug, Clone)]
struct BookEntry {
    pay: Vec<(usize, f64)>,
    steps: Vec<StepWeight>,
    lgd: f64,
}

/// A set of quotes with discount weights precomputed on a shared time grid,
/// for repeated pricing under many survival models.
#[derive(Debug, Clone)]
pub struct CdsBook {
    quotes: Vec<CdsQuote>,
    times: Vec<f64>,
    entries: Vec<BookEntry>,
}

impl CdsBook {
    pub fn new(quotes: &[CdsQuote], discount: &DiscountCurve) -> Result<Self> {
        Self::with_step(quotes, discount, DEFAULT_GRID_STEP)
    }

    pub fn with_step(quotes: &[CdsQuote], discount: &DiscountCurve, step: f64) -> Result<Self> {
        let mut grids = Vec::with_capacity(quotes.len());
        let mut schedules = Vec::with_capacity(quotes.len());
        for quote in quotes {
            let schedule = quote.schedule()?;
            grids.push(integration_grid(&schedule, step)?);
            schedules.push(schedule);
        }
        let mut times: Vec<f64> = grids.iter().flatten().copied().collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let index = |t: f64| times.binary_search_by(|x| x.total_cmp(&t)).expect("grid point present");
        let entries = quotes
            .iter()
            .zip(&grids)
            .zip(&schedules)
            .map(|((quote, grid), schedule)| {
                let pay = schedule
                    .dates()
                    .iter()
                    .zip(schedule.accruals())
                    .map(|(&t, &a)| (index(t), a * discount.df(t)))
                    .collect();
                let steps = grid
                    .windows(2)
                    .map(|w| {
                        let mid = 0.5 * (w[0] + w[1]);
                        StepWeight { from: index(w[0]), to: index(w[1]), df: discount.df(mid), accrued: mid - schedule.period_start(mid) }
                    })
                    .collect();
                BookEntry { pay, steps, lgd: quote.lgd() }
            })
            .collect();
        Ok(Self { quotes: quotes.to_vec(), times, entries })
    }

    pub fn quotes(&self) -> &[CdsQuote] {
        &self.quotes
    }

    pub fn len(&self) -> usize {
        self.quotes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotes.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `Q` at every grid time of the book.
    pub fn survival_values(&self, model: &dyn SurvivalModel) -> Vec<f64> {
        self.times.iter().map(|&t| if t <= 0.0 { 1.0 } else { model.survival(t) }).collect()
    }

    pub fn legs(&self, k: usize, q: &[f64]) -> CdsLegs {
        let e = &self.entries[k];
        let annuity = e.pay.iter().map(|&(i, w)| w * q[i]).sum();
        let mut accrual_annuity = 0.0;
        let mut default_leg = 0.0;
        for s in &e.steps {
            let dq = q[s.from] - q[s.to];
            default_leg += s.df * dq;
            accrual_annuity += s.accrued * s.df * dq;
        }
        CdsLegs { annuity, accrual_annuity, default_leg }
    }

    /// Buyer's value of quote `k` at rate `rate` given survival values `q`.
    pub fn pv(&self, k: usize, rate: f64, q: &[f64]) -> f64 {
        self.legs(k, q).pv(rate, self.entries[k].lgd)
    }

    /// Values of every quote at its mid rate.
    pub fn mid_pvs(&self, q: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|k| self.pv(k, self.quotes[k].mid, q)).collect()
    }

    pub fn fair_spread(&self, k: usize, q: &[f64]) -> Result<f64> {
        self.legs(k, q).fair_spread(self.entries[k].lgd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intensity::HazardCurve;
    use crate::marketdata::vodafone_quotes;
    use crate::survival::{survival_grid, FirmDynamics};
    use approx::assert_abs_diff_eq;

    struct NoDefault;
    impl SurvivalModel for NoDefault {
        fn survival(&self, _t: f64) -> f64 {
            1.0
        }
    }

    #[test]
    fn grid_contains_dates_and_respects_step() {
        let s = PaymentSchedule::build(0.0, 1.1, 4).unwrap();
        let g = integration_grid(&s, DEFAULT_GRID_STEP).unwrap();
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 1.1);
        for d in s.dates() {
            assert!(g.contains(d));
        }
        assert!(g.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= DEFAULT_GRID_STEP + 1e-12));
        assert!(integration_grid(&s, 0.1).is_err());
    }

    #[test]
    fn fair_spread_zeroes_value() {
        let firm = FirmDynamics::with_flat_vol(0.4, 0.5, 0.25).unwrap();
        let schedule = PaymentSchedule::build(0.0, 5.0, 4).unwrap();
        let curve = survival_grid(firm, 5.0, DEFAULT_GRID_STEP).unwrap();
        let disc = DiscountCurve::flat(0.03);
        let r = fair_spread(&schedule, 0.6, &curve, &disc).unwrap();
        assert!(r > 0.0);
        let res = cds_pv(&schedule, r, 0.6, &curve, &disc).unwrap();
        assert!(res.pv.abs() < 1e-9, "{res:?}");
        assert_abs_diff_eq!(res.pv, res.protection_leg - res.premium_leg - res.accrual_on_default_leg, epsilon = 1e-12);
    }

    #[test]
    fn zero_rate_zero_lgd_is_worthless() {
        let firm = FirmDynamics::with_flat_vol(0.5, 0.0, 0.3).unwrap();
        let schedule = PaymentSchedule::build(0.0, 3.0, 4).unwrap();
        let curve = survival_grid(firm, 3.0, DEFAULT_GRID_STEP).unwrap();
        let res = cds_pv(&schedule, 0.0, 0.0, &curve, &DiscountCurve::flat(0.03)).unwrap();
        assert_eq!(res.pv, 0.0);
    }

    #[test]
    fn no_default_risk_means_zero_spread() {
        let schedule = PaymentSchedule::build(0.0, 5.0, 4).unwrap();
        let curve = survival_grid(NoDefault, 5.0, DEFAULT_GRID_STEP).unwrap();
        assert_eq!(fair_spread(&schedule, 0.6, &curve, &DiscountCurve::flat(0.03)).unwrap(), 0.0);
    }

    #[test]
    fn credit_triangle_for_flat_hazard() {
        let hazard = HazardCurve::flat(0.01).unwrap();
        let disc = DiscountCurve::flat(0.03);
        for &(t, f) in &[(1.0, 4), (5.0, 4), (10.0, 2), (3.0, 12)] {
            let schedule = PaymentSchedule::build(0.0, t, f).unwrap();
            let curve = survival_grid(hazard.clone(), t, DEFAULT_GRID_STEP).unwrap();
            let r = fair_spread(&schedule, 0.6, &curve, &disc).unwrap();
            assert!((r / 60.0 - 1.0).abs() < 0.02, "tenor {t}: {r}");
        }
    }

    #[test]
    fn refuses_coarse_or_short_grids() {
        let firm = FirmDynamics::with_flat_vol(0.4, 0.5, 0.25).unwrap();
        let schedule = PaymentSchedule::build(0.0, 5.0, 4).unwrap();
        let disc = DiscountCurve::flat(0.03);
        let coarse = survival_grid(firm.clone(), 5.0, 0.25).unwrap();
        assert!(cds_pv(&schedule, 40.0, 0.6, &coarse, &disc).is_err());
        let short = survival_grid(firm, 3.0, DEFAULT_GRID_STEP).unwrap();
        assert!(cds_pv(&schedule, 40.0, 0.6, &short, &disc).is_err());
    }

    #[test]
    fn book_matches_curve_pricing() {
        let firm = FirmDynamics::with_flat_vol(0.4, 0.5, 0.22).unwrap();
        let disc = DiscountCurve::flat(0.03);
        let quotes = vodafone_quotes();
        let book = CdsBook::new(&quotes, &disc).unwrap();
        let q = book.survival_values(&firm);
        for (k, quote) in quotes.iter().enumerate() {
            let schedule = quote.schedule().unwrap();
            let curve = curve_for_schedule(Arc::new(firm.clone()), &schedule).unwrap();
            let direct = cds_pv(&schedule, quote.mid, quote.lgd(), &curve, &disc).unwrap().pv;
            assert_abs_diff_eq!(book.pv(k, quote.mid, &q), direct, epsilon = 1e-10);
        }
    }

    #[test]
    fn scenario_and_mixture_paths_agree() {
        let set = ScenarioSet::from_triples(0.5, &[(0.3188, 0.24, 0.9483), (0.6592, 0.24, 0.0517)]).unwrap();
        let disc = DiscountCurve::flat(0.03);
        for quote in vodafone_quotes() {
            let s = quote.schedule().unwrap();
            let a = scenario_cds_pv(&s, quote.mid, quote.lgd(), &set, &disc).unwrap();
            let b = mixture_curve_cds_pv(&s, quote.mid, quote.lgd(), &set, &disc).unwrap();
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}
