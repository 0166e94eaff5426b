//! Deterministic-intensity benchmark: piecewise-linear hazard rates stripped
//! from CDS quotes.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cdspricer::CdsBook;
use crate::error::{invalid, Error, Result};
use crate::marketdata::{CdsQuote, DiscountCurve};
use crate::math::roots::{brent, RootOptions};
use crate::survival::SurvivalModel;

/// Hazard rate `λ(t)`, linear between nodes and flat outside them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct HazardCurve {
    nodes: Vec<(f64, f64)>,
    /// `∫₀^{t_i} λ` at each node.
    cumulative: Vec<f64>,
}

impl TryFrom<Vec<(f64, f64)>> for HazardCurve {
    type Error = Error;
    fn try_from(nodes: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(nodes)
    }
}

impl From<HazardCurve> for Vec<(f64, f64)> {
    fn from(c: HazardCurve) -> Self {
        c.nodes
    }
}

impl HazardCurve {
    pub fn new(nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(invalid("hazard curve needs at least one node"));
        }
        if nodes[0].0 < 0.0 || nodes.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(invalid("hazard node times must be non-negative and strictly increasing"));
        }
        if nodes.iter().any(|&(_, l)| !(l >= 0.0) || !l.is_finite()) {
            return Err(invalid("hazard intensities must be finite and non-negative"));
        }
        let mut cumulative = Vec::with_capacity(nodes.len());
        cumulative.push(nodes[0].1 * nodes[0].0);
        for w in nodes.windows(2) {
            let prev = cumulative[cumulative.len() - 1];
            cumulative.push(prev + 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0));
        }
        Ok(Self { nodes, cumulative })
    }

    pub fn flat(intensity: f64) -> Result<Self> {
        Self::new(vec![(0.0, intensity)])
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn intensity(&self, t: f64) -> f64 {
        let i = self.nodes.partition_point(|&(s, _)| s < t);
        if i == 0 {
            self.nodes[0].1
        } else if i == self.nodes.len() {
            self.nodes[i - 1].1
        } else {
            let (t0, l0) = self.nodes[i - 1];
            let (t1, l1) = self.nodes[i];
            l0 + (l1 - l0) * (t - t0) / (t1 - t0)
        }
    }

    /// `∫₀ᵗ λ(s) ds`, exact on the linear pieces.
    pub fn cumulative_hazard(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let i = self.nodes.partition_point(|&(s, _)| s < t);
        if i == 0 {
            self.nodes[0].1 * t
        } else {
            let (t0, l0) = self.nodes[i - 1];
            self.cumulative[i - 1] + 0.5 * (l0 + self.intensity(t)) * (t - t0)
        }
    }

    /// `Q(τ > t) = exp(−∫₀ᵗ λ)`.
    pub fn survival_probability(&self, t: f64) -> f64 {
        (-self.cumulative_hazard(t)).exp()
    }

    /// CSV rows `time_years,intensity`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["time_years", "intensity"])?;
        for &(t, l) in &self.nodes {
            w.write_record([t.to_string(), l.to_string()])?;
        }
        w.flush().map_err(|e| Error::Io { path: "<csv>".into(), source: e })?;
        Ok(())
    }
}

impl SurvivalModel for HazardCurve {
    fn survival(&self, t: f64) -> f64 {
        self.survival_probability(t)
    }
}

pub fn hazard_survival(curve: &HazardCurve, t: f64) -> f64 {
    curve.survival_probability(t)
}

/// Bootstraps one node per quote (at its tenor) so that each CDS has zero
/// value at its mid quote. Earlier nodes are never revisited.
pub fn strip_hazard(quotes: &[CdsQuote], discount: &DiscountCurve) -> Result<HazardCurve> {
    if quotes.is_empty() {
        return Err(invalid("no quotes to strip"));
    }
    let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(quotes.len());
    for quote in quotes {
        if nodes.last().is_some_and(|&(t, _)| quote.tenor <= t) {
            return Err(invalid("quotes must be sorted by increasing tenor"));
        }
        let book = CdsBook::new(std::slice::from_ref(quote), discount)?;
        let pv = |lambda: f64| {
            let mut trial = nodes.clone();
            trial.push((quote.tenor, lambda));
            let curve = HazardCurve::new(trial).expect("valid trial nodes");
            book.pv(0, quote.mid, &book.survival_values(&curve))
        };
        let lambda = brent(pv, 0.0, 10.0, RootOptions::with_f_tol(1e-12))
            .map_err(|e| Error::Calibration { tenor: quote.tenor, message: format!("hazard bootstrap: {e}") })?;
        nodes.push((quote.tenor, lambda));
    }
    HazardCurve::new(nodes)
}

/// Buyer's values `(at bid, at ask)` of each quote under `model`; the
/// interval `[ask value, bid value]` is the quote's admissible PV window.
pub fn pv_windows(quotes: &[CdsQuote], model: &dyn SurvivalModel, discount: &DiscountCurve) -> Result<Vec<(f64, f64)>> {
    let book = CdsBook::new(quotes, discount)?;
    let q = book.survival_values(model);
    Ok(quotes.iter().enumerate().map(|(k, quote)| (book.pv(k, quote.bid, &q), book.pv(k, quote.ask, &q))).collect())
}
