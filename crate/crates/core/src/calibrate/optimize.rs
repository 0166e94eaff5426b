use rayon::prelude::*;

use super::report::{residual_report, StartSummary};
use super::{normalize_weights, CalibrationConfig, CalibrationReport, ModelKind};
use crate::cdspricer::CdsBook;
use crate::error::{invalid, Result};
use crate::marketdata::{CdsQuote, DiscountCurve};
use crate::math::simplex::{minimize, SimplexOptions};
use crate::math::{halton_points, logistic, logit};
use crate::survival::{survival_from_variance, ScenarioSet};

#[derive(Debug, Clone, Copy)]
enum SigmaMode {
    Fixed(f64),
    Common,
    PerScenario,
}

/// Unconstrained coordinates: `n` barrier logits, the free volatility
/// logits, then `n−1` probability logits (the last scenario's logit is 0).
struct Layout {
    n: usize,
    sigma: SigmaMode,
    h_bounds: (f64, f64),
    s_bounds: (f64, f64),
}

struct Decoded {
    h: Vec<f64>,
    sigma: Vec<f64>,
    p: Vec<f64>,
}

fn squash(u: f64, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * logistic(u)
}

impl Layout {
    fn sigma_dims(&self) -> usize {
        match self.sigma {
            SigmaMode::Fixed(_) => 0,
            SigmaMode::Common => 1,
            SigmaMode::PerScenario => self.n,
        }
    }

    fn dim(&self) -> usize {
        self.n + self.sigma_dims() + self.n - 1
    }

    fn decode(&self, x: &[f64]) -> Decoded {
        let n = self.n;
        let h = x[..n].iter().map(|&u| squash(u, self.h_bounds)).collect();
        let sd = self.sigma_dims();
        let sigma = match self.sigma {
            SigmaMode::Fixed(s) => vec![s; n],
            SigmaMode::Common => vec![squash(x[n], self.s_bounds); n],
            SigmaMode::PerScenario => x[n..2 * n].iter().map(|&u| squash(u, self.s_bounds)).collect(),
        };
        let logits = &x[n + sd..];
        let m = logits.iter().fold(0.0f64, |a, &b| a.max(b));
        let mut e: Vec<f64> = logits.iter().map(|&l| (l - m).exp()).collect();
        e.push((-m).exp());
        let total: f64 = e.iter().sum();
        let p = e.iter().map(|v| v / total).collect();
        Decoded { h, sigma, p }
    }

    /// Start point whose decoded barriers/volatilities sit at the box
    /// fractions given by `u`, with probability logits spread over ±3.
    fn start(&self, u: &[f64]) -> Vec<f64> {
        let sd = self.sigma_dims();
        u.iter()
            .enumerate()
            .map(|(i, &c)| if i < self.n + sd { logit(c) } else { 6.0 * (c - 0.5) })
            .collect()
    }
}

struct Problem<'a> {
    book: &'a CdsBook,
    weights: &'a [f64],
    beta: f64,
    layout: Layout,
}

impl Problem<'_> {
    fn residuals(&self, d: &Decoded) -> Vec<f64> {
        let times = self.book.times();
        let mut total = vec![0.0; self.book.len()];
        let mut q = vec![0.0; times.len()];
        for i in 0..self.layout.n {
            let s2 = d.sigma[i] * d.sigma[i];
            for (qj, &t) in q.iter_mut().zip(times) {
                *qj = survival_from_variance(d.h[i], self.beta, s2 * t);
            }
            for (k, r) in total.iter_mut().enumerate() {
                *r += d.p[i] * self.book.pv(k, self.book.quotes()[k].mid, &q);
            }
        }
        total
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let r = self.residuals(&self.layout.decode(x));
        r.iter().zip(self.weights).map(|(r, w)| w * r * r).sum()
    }
}

fn run(quotes: &[CdsQuote], config: &CalibrationConfig, discount: &DiscountCurve, sigma: SigmaMode, model: ModelKind) -> Result<CalibrationReport> {
    config.validate()?;
    if quotes.is_empty() {
        return Err(invalid("no quotes to calibrate"));
    }
    let weights = normalize_weights(config.weights.as_deref(), quotes.len())?;
    let book = CdsBook::new(quotes, discount)?;
    let layout = Layout { n: config.scenario_count, sigma, h_bounds: config.bounds.h, s_bounds: config.bounds.sigma };
    let dim = layout.dim();
    let problem = Problem { book: &book, weights: &weights, beta: config.beta, layout };
    let opts = SimplexOptions {
        max_iterations: config.optimizer.max_iterations,
        f_tol: config.optimizer.tolerance,
        ..SimplexOptions::default()
    };
    let starts: Vec<Vec<f64>> = halton_points(config.optimizer.multistart_count, dim).iter().map(|u| problem.layout.start(u)).collect();
    let results: Vec<_> = starts
        .par_iter()
        .map(|x0| {
            let initial = problem.objective(x0);
            (initial, minimize(|x| problem.objective(x), x0, opts))
        })
        .collect();

    let mut best = 0;
    for (i, (_, r)) in results.iter().enumerate() {
        if r.value < results[best].1.value {
            best = i;
        }
    }
    let winner = &results[best].1;
    let d = problem.layout.decode(&winner.x);
    let triples: Vec<_> = (0..d.h.len()).map(|i| (d.h[i], d.sigma[i], d.p[i])).collect();
    let set = ScenarioSet::from_triples(config.beta, &triples)?;

    let mut report = residual_report(&set, quotes, discount, config.weights.as_deref())?;
    report.model = model;
    report.method = "optimize".into();
    report.converged = winner.converged;
    report.evaluations = results.iter().map(|(_, r)| r.evaluations).sum();
    report.multistart = results
        .iter()
        .map(|(initial, r)| StartSummary { initial_objective: *initial, final_objective: r.value, converged: r.converged })
        .collect();
    report.config = Some(config.clone());
    log::info!("{model} calibration: objective {:.6e} bps² after {} evaluations", report.objective, report.evaluations);
    Ok(report)
}

/// Barrier scenarios sharing one volatility (fixed by `common_sigma`, or
/// free when it is absent).
pub fn sbat1p_optimize(quotes: &[CdsQuote], config: &CalibrationConfig, discount: &DiscountCurve) -> Result<CalibrationReport> {
    let mode = config.common_sigma.map_or(SigmaMode::Common, SigmaMode::Fixed);
    run(quotes, config, discount, mode, ModelKind::Sbat1p)
}

/// Joint barrier and volatility scenarios.
pub fn svbat1p_optimize(quotes: &[CdsQuote], config: &CalibrationConfig, discount: &DiscountCurve) -> Result<CalibrationReport> {
    run(quotes, config, discount, SigmaMode::PerScenario, ModelKind::Svbat1p)
}
