use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{EquityDynamics, McConfig};
use crate::error::{invalid, Result};
use crate::marketdata::DiscountCurve;
use crate::survival::ScenarioSet;

/// Paths per independently seeded work unit.
pub const BLOCK_SIZE: usize = 65_536;

/// Below this exponent the bridge crossing probability is under 1e-15 and
/// no uniform is drawn.
const BRIDGE_CUTOFF: f64 = -36.0;

/// Simulation times: `0`, the key times inside `(0, horizon)` and `horizon`,
/// each interval split into `ceil(length · steps_per_year)` equal steps.
pub fn step_grid(key_times: &[f64], horizon: f64, steps_per_year: usize) -> Vec<f64> {
    let mut keys: Vec<f64> = key_times.iter().copied().filter(|&t| t > 1e-12 && t < horizon - 1e-9).collect();
    keys.push(0.0);
    keys.push(horizon);
    keys.sort_by(f64::total_cmp);
    keys.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
    let mut times = vec![0.0];
    for w in keys.windows(2) {
        let n = ((w[1] - w[0]) * steps_per_year as f64 - 1e-9).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / n as f64;
        times.extend((1..n).map(|k| w[0] + k as f64 * h));
        times.push(w[1]);
    }
    times
}

/// What a default leaves behind: its time, the firm's Brownian motion at that
/// time, an independent `N(0, τ)` draw (the equity's idiosyncratic driver)
/// and the scenario index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefaultSample {
    pub tau: f64,
    pub w_v: f64,
    pub z_orth: f64,
    pub scenario: u32,
}

impl DefaultSample {
    /// Equity Brownian motion at default for correlation `rho`.
    pub fn w_s(&self, rho: f64) -> f64 {
        rho * self.w_v + (1.0 - rho * rho).max(0.0).sqrt() * self.z_orth
    }
}

#[derive(Debug, Clone)]
pub struct DefaultSimulation {
    pub scenarios: ScenarioSet,
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
    pub steps_per_year: usize,
    pub brownian_bridge: bool,
    /// Defaults in block order, then path order within a block.
    pub defaults: Vec<DefaultSample>,
}

impl DefaultSimulation {
    /// Fraction of paths defaulted by `t`, with its standard error.
    pub fn default_fraction(&self, t: f64) -> (f64, f64) {
        let n = self.defaults.iter().filter(|d| d.tau <= t).count() as f64;
        let m = self.paths as f64;
        let p = n / m;
        let var = if self.paths > 1 { (n - m * p * p) / (m - 1.0) } else { 0.0 };
        (p, (var.max(0.0) / m).sqrt())
    }
}

struct StepData {
    t0: f64,
    dt: f64,
    sqrt_dt: f64,
}

struct ScenarioSteps {
    x0: f64,
    beta: f64,
    sigma: Vec<f64>,
    drift: Vec<f64>,
    sd: Vec<f64>,
    /// `2 / (σ² Δt)`.
    bridge_scale: Vec<f64>,
}

struct Plan {
    steps: Vec<StepData>,
    scenarios: Vec<ScenarioSteps>,
    cumulative: Vec<f64>,
    bridge: bool,
}

impl Plan {
    fn new(set: &ScenarioSet, horizon: f64, key_times: &[f64], config: &McConfig) -> Self {
        let mut keys = key_times.to_vec();
        for s in set.scenarios() {
            keys.extend(s.firm.vol.breakpoints_before(horizon));
        }
        let times = step_grid(&keys, horizon, config.steps_per_year);
        let steps: Vec<StepData> = times.windows(2).map(|w| StepData { t0: w[0], dt: w[1] - w[0], sqrt_dt: (w[1] - w[0]).sqrt() }).collect();
        let scenarios = set
            .scenarios()
            .iter()
            .map(|s| {
                let sigma: Vec<f64> = steps.iter().map(|st| s.firm.vol.sigma_at(st.t0 + 0.5 * st.dt)).collect();
                ScenarioSteps {
                    x0: -s.firm.h_ratio.ln(),
                    beta: s.firm.beta,
                    drift: sigma.iter().zip(&steps).map(|(v, st)| s.firm.beta * v * v * st.dt).collect(),
                    sd: sigma.iter().zip(&steps).map(|(v, st)| v * st.sqrt_dt).collect(),
                    bridge_scale: sigma.iter().zip(&steps).map(|(v, st)| 2.0 / (v * v * st.dt)).collect(),
                    sigma,
                }
            })
            .collect();
        let mut acc = 0.0;
        let cumulative = set
            .scenarios()
            .iter()
            .map(|s| {
                acc += s.probability;
                acc
            })
            .collect();
        Self { steps, scenarios, cumulative, bridge: config.brownian_bridge }
    }

    fn pick_scenario(&self, u: f64) -> usize {
        self.cumulative.iter().position(|&c| u < c).unwrap_or(self.cumulative.len() - 1)
    }

    /// Locates the crossing inside step `j`, given the start state `(x, w)`
    /// and end state `(x1, w1)`; returns `(τ, W^V(τ))`.
    fn crossing<R: Rng>(&self, sc: &ScenarioSteps, j: usize, x: f64, w: f64, w1: f64, rng: &mut R) -> (f64, f64) {
        let st = &self.steps[j];
        if self.bridge {
            let s = rng.random::<f64>() * st.dt;
            let sigma = sc.sigma[j];
            (st.t0 + s, w + (-x - sc.beta * sigma * sigma * s) / sigma)
        } else {
            (st.t0 + st.dt, w1)
        }
    }

    /// Advances one step; `Some((τ, W^V(τ)))` when the barrier is hit.
    fn step<R: Rng>(&self, sc: &ScenarioSteps, j: usize, x: &mut f64, w: &mut f64, z: f64, rng: &mut R) -> Option<(f64, f64)> {
        let x1 = *x + sc.drift[j] + sc.sd[j] * z;
        let w1 = *w + self.steps[j].sqrt_dt * z;
        let hit = x1 <= 0.0 || (self.bridge && {
            let e = -sc.bridge_scale[j] * *x * x1;
            e > BRIDGE_CUTOFF && rng.random::<f64>() < e.exp()
        });
        if hit {
            return Some(self.crossing(sc, j, *x, *w, w1, rng));
        }
        *x = x1;
        *w = w1;
        None
    }

    fn run_block(&self, seed: u64, block: usize, count: usize) -> Vec<DefaultSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(2 * block as u64);
        let mut out = Vec::new();
        for _ in 0..count {
            let i = self.pick_scenario(rng.random::<f64>());
            let sc = &self.scenarios[i];
            let (mut x, mut w) = (sc.x0, 0.0);
            for j in 0..self.steps.len() {
                let z: f64 = rng.sample(StandardNormal);
                if let Some((tau, w_v)) = self.step(sc, j, &mut x, &mut w, z, &mut rng) {
                    let g: f64 = rng.sample(StandardNormal);
                    out.push(DefaultSample { tau, w_v, z_orth: g * tau.sqrt(), scenario: i as u32 });
                    break;
                }
            }
        }
        out
    }
}

fn block_sizes(paths: usize) -> Vec<usize> {
    (0..paths.div_ceil(BLOCK_SIZE)).map(|b| BLOCK_SIZE.min(paths - b * BLOCK_SIZE)).collect()
}

/// Simulates first-passage defaults up to `horizon`.
///
/// `key_times` (e.g. payment dates) are included in the step grid. Results
/// depend only on the inputs and `config.seed`, never on the thread count.
pub fn simulate_defaults(scenarios: &ScenarioSet, horizon: f64, key_times: &[f64], config: &McConfig) -> Result<DefaultSimulation> {
    config.validate()?;
    if !(horizon > 0.0) {
        return Err(invalid("simulation horizon must be positive"));
    }
    let plan = Plan::new(scenarios, horizon, key_times, config);
    let sizes = block_sizes(config.paths);
    let blocks: Vec<Vec<DefaultSample>> = sizes.par_iter().enumerate().map(|(b, &n)| plan.run_block(config.seed, b, n)).collect();
    Ok(DefaultSimulation {
        scenarios: scenarios.clone(),
        horizon,
        paths: config.paths,
        seed: config.seed,
        steps_per_year: config.steps_per_year,
        brownian_bridge: config.brownian_bridge,
        defaults: blocks.into_iter().flatten().collect(),
    })
}

/// A fully simulated path (for inspection; the pricer does not need it).
#[derive(Debug, Clone, PartialEq)]
pub struct PathDetail {
    pub scenario: usize,
    pub default_time: Option<f64>,
    /// Grid times up to the last step completed before default (or the horizon).
    pub times: Vec<f64>,
    /// `ln(V/Ĥ)` at `times`.
    pub log_distance: Vec<f64>,
    pub log_equity: Vec<f64>,
    pub equity_at_default: Option<f64>,
}

/// Joint firm/equity paths with correlation `config.rho`, sharing the
/// default-detection rules of [`simulate_defaults`].
pub fn simulate_default_and_equity(
    scenarios: &ScenarioSet,
    equity: &EquityDynamics,
    discount: &DiscountCurve,
    horizon: f64,
    key_times: &[f64],
    config: &McConfig,
) -> Result<Vec<PathDetail>> {
    config.validate()?;
    equity.validate()?;
    let plan = Plan::new(scenarios, horizon, key_times, config);
    let rho = config.rho;
    let rho_c = (1.0 - rho * rho).max(0.0).sqrt();
    let log_s = |t: f64, w_s: f64| {
        equity.s0.ln() - discount.df(t).ln() - (equity.dividend_yield + 0.5 * equity.sigma_s * equity.sigma_s) * t + equity.sigma_s * w_s
    };
    let sizes = block_sizes(config.paths);
    let blocks: Vec<Vec<PathDetail>> = sizes
        .par_iter()
        .enumerate()
        .map(|(b, &n)| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(2 * b as u64 + 1);
            (0..n)
                .map(|_| {
                    let i = plan.pick_scenario(rng.random::<f64>());
                    let sc = &plan.scenarios[i];
                    let (mut x, mut w, mut zo) = (sc.x0, 0.0, 0.0);
                    let mut path = PathDetail {
                        scenario: i,
                        default_time: None,
                        times: vec![0.0],
                        log_distance: vec![x],
                        log_equity: vec![log_s(0.0, 0.0)],
                        equity_at_default: None,
                    };
                    for j in 0..plan.steps.len() {
                        let z: f64 = rng.sample(StandardNormal);
                        let g: f64 = rng.sample(StandardNormal);
                        let st = &plan.steps[j];
                        let zo1 = zo + st.sqrt_dt * g;
                        if let Some((tau, w_v)) = plan.step(sc, j, &mut x, &mut w, z, &mut rng) {
                            let f = (tau - st.t0) / st.dt;
                            let b: f64 = rng.sample(StandardNormal);
                            let zo_tau = zo + f * (zo1 - zo) + (f * (1.0 - f) * st.dt).max(0.0).sqrt() * b;
                            path.default_time = Some(tau);
                            path.equity_at_default = Some(log_s(tau, rho * w_v + rho_c * zo_tau).exp());
                            break;
                        }
                        zo = zo1;
                        let t = st.t0 + st.dt;
                        path.times.push(t);
                        path.log_distance.push(x);
                        path.log_equity.push(log_s(t, rho * w + rho_c * zo));
                    }
                    path
                })
                .collect()
        })
        .collect();
    Ok(blocks.into_iter().flatten().collect())
}
