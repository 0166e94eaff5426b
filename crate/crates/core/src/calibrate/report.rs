use serde::{Deserialize, Serialize};

use super::{normalize_weights, CalibrationConfig};
use crate::cdspricer::CdsBook;
use crate::error::Result;
use crate::intensity::{pv_windows, strip_hazard};
use crate::marketdata::{CdsQuote, DiscountCurve};
use crate::survival::{ScenarioSet, VolSegment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    At1p,
    Sbat1p,
    Svbat1p,
}

impl ModelKind {
    /// Narrowest model that describes `set`.
    pub fn of(set: &ScenarioSet) -> Self {
        let first = &set.scenarios()[0].firm.vol;
        if set.len() == 1 {
            ModelKind::At1p
        } else if set.scenarios().iter().all(|s| &s.firm.vol == first) {
            ModelKind::Sbat1p
        } else {
            ModelKind::Svbat1p
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::At1p => "AT1P",
            ModelKind::Sbat1p => "SBAT1P",
            ModelKind::Svbat1p => "SVBAT1P",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuoteResidual {
    pub tenor: f64,
    pub mid: f64,
    /// Buyer's value at the mid quote, bps.
    pub pv: f64,
    /// Deterministic-intensity values at the ask and at the bid, bps.
    pub window: (f64, f64),
    pub in_window: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergedScenario {
    pub h_ratio: f64,
    pub vol: Vec<VolSegment>,
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub initial_objective: f64,
    pub final_objective: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub model: ModelKind,
    pub method: String,
    pub parameters: ScenarioSet,
    /// `Σ w_k r_k²` in bps² (weights normalized to mean one).
    pub objective: f64,
    pub unweighted_objective: f64,
    pub weights: Vec<f64>,
    pub residuals: Vec<QuoteResidual>,
    pub expected_barrier: f64,
    pub merged_scenarios: Vec<MergedScenario>,
    pub converged: bool,
    pub evaluations: usize,
    /// Longest quoted maturity; survival beyond it is extrapolation.
    pub valid_to: f64,
    #[serde(default)]
    pub multistart: Vec<StartSummary>,
    #[serde(default)]
    pub config: Option<CalibrationConfig>,
}

impl CalibrationReport {
    pub fn residual_values(&self) -> Vec<f64> {
        self.residuals.iter().map(|r| r.pv).collect()
    }
}

fn same_vol(a: &[VolSegment], b: &[VolSegment]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.end == y.end && (x.sigma - y.sigma).abs() < 1e-3)
}

/// Collapses scenarios whose barriers and volatilities agree within `1e-3`,
/// summing their probabilities.
pub fn merge_scenarios(set: &ScenarioSet) -> Vec<MergedScenario> {
    let mut out: Vec<MergedScenario> = Vec::new();
    for s in set.scenarios() {
        let vol = s.firm.vol.segments();
        match out.iter_mut().find(|m| (m.h_ratio - s.firm.h_ratio).abs() < 1e-3 && same_vol(&m.vol, vol)) {
            Some(m) => m.probability += s.probability,
            None => out.push(MergedScenario { h_ratio: s.firm.h_ratio, vol: vol.to_vec(), probability: s.probability }),
        }
    }
    out
}

/// Mixture CDS values at the mid quotes (priced per scenario then mixed).
pub(crate) fn mixture_mid_pvs(book: &CdsBook, set: &ScenarioSet) -> Vec<f64> {
    let mut total = vec![0.0; book.len()];
    for s in set.scenarios() {
        let q = book.survival_values(&s.firm);
        for (t, pv) in total.iter_mut().zip(book.mid_pvs(&q)) {
            *t += s.probability * pv;
        }
    }
    total
}

/// Residuals of `parameters` against `quotes`, with bid/ask windows taken
/// from the stripped deterministic-intensity curve.
pub fn residual_report(parameters: &ScenarioSet, quotes: &[CdsQuote], discount: &DiscountCurve, weights: Option<&[f64]>) -> Result<CalibrationReport> {
    let weights = normalize_weights(weights, quotes.len())?;
    let book = CdsBook::new(quotes, discount)?;
    let pvs = mixture_mid_pvs(&book, parameters);
    let windows = if quotes.is_empty() {
        Vec::new()
    } else {
        let hazard = strip_hazard(quotes, discount)?;
        pv_windows(quotes, &hazard, discount)?
    };
    let residuals = quotes
        .iter()
        .zip(&pvs)
        .zip(windows)
        .map(|((q, &pv), (bid_pv, ask_pv))| QuoteResidual {
            tenor: q.tenor,
            mid: q.mid,
            pv,
            window: (ask_pv, bid_pv),
            in_window: ask_pv <= pv && pv <= bid_pv,
        })
        .collect();
    Ok(CalibrationReport {
        model: ModelKind::of(parameters),
        method: "repricing".into(),
        parameters: parameters.clone(),
        objective: pvs.iter().zip(&weights).map(|(r, w)| w * r * r).sum(),
        unweighted_objective: pvs.iter().map(|r| r * r).sum(),
        weights,
        residuals,
        expected_barrier: parameters.expected_barrier(),
        merged_scenarios: merge_scenarios(parameters),
        converged: true,
        evaluations: 0,
        valid_to: quotes.iter().map(|q| q.tenor).fold(0.0, f64::max),
        multistart: Vec::new(),
        config: None,
    })
}
