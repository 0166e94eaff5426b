use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use fpc_core::calibrate::{
    bid_ask_weights, calibrate_at1p_cascade, residual_report, sbat1p_kernel_calibrate, sbat1p_optimize, svbat1p_optimize, CalibrationConfig,
    CalibrationReport, ModelKind, DEFAULT_KERNEL_BRACKET,
};
use fpc_core::cdspricer::quote_pv;
use fpc_core::ersmc::{simulate_defaults, EquityDynamics, ErsContract, FixingConvention, McConfig, McEstimate};
use fpc_core::intensity::{pv_windows, strip_hazard};
use fpc_core::marketdata::CdsQuote;
use fpc_core::survival::{survival_grid, uniform_times, ScenarioSet, SurvivalModel};

use crate::inputs::{self, write_output};
use crate::table::{fixed, pct, Table};
use crate::{Failure, Outcome};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModelArg {
    At1p,
    Sbat1p,
    Svbat1p,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MethodArg {
    Optimize,
    Kernel,
}

#[derive(Args)]
pub struct CalibrateArgs {
    /// CDS quotes CSV (`tenor_years,bid_bps,ask_bps,mid_bps,recovery`).
    #[arg(long)]
    quotes: PathBuf,
    /// Zero curve CSV (`time_years,zero_rate`); flat 3% when omitted.
    #[arg(long)]
    curve: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: ModelArg,
    /// SBAT1P only: least-squares fit or exact kernel calibration.
    #[arg(long, value_enum, default_value = "optimize")]
    method: MethodArg,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// AT1P barrier ratio H/V0.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    scenarios: Option<usize>,
    /// Volatility shared by all scenarios (SBAT1P); free when omitted.
    #[arg(long)]
    sigma: Option<f64>,
    /// Kernel method: the N-1 fixed barriers, comma separated.
    #[arg(long, value_delimiter = ',')]
    fixed_h: Option<Vec<f64>>,
    /// Use only the first n quotes.
    #[arg(long)]
    first: Option<usize>,
    /// `none`, `bidask` or `file:<path>` (one weight per quote).
    #[arg(long, default_value = "none")]
    weights: String,
    #[arg(long)]
    multistarts: Option<usize>,
    /// Calibration settings as JSON; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of the table.
    #[arg(long)]
    json: bool,
}

fn read_weights(spec: &str, quotes: &[CdsQuote]) -> Result<Option<Vec<f64>>, Failure> {
    match spec {
        "none" => Ok(None),
        "bidask" => Ok(Some(bid_ask_weights(quotes)?)),
        s => match s.strip_prefix("file:") {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading weights {p}"))?;
                let w = text
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|x| !x.is_empty())
                    .map(|x| x.parse::<f64>().with_context(|| format!("weights {p}: {x:?} is not a number")))
                    .collect::<anyhow::Result<Vec<f64>>>()?;
                Ok(Some(w))
            }
            None => Err(Failure::Input(anyhow!("--weights must be none, bidask or file:<path>, got {s:?}"))),
        },
    }
}

pub fn calibrate(a: CalibrateArgs) -> Result<Outcome, Failure> {
    let quotes = inputs::quotes(&a.quotes, a.first)?;
    let curve = inputs::curve(a.curve.as_deref())?;
    let mut config: CalibrationConfig = match &a.config {
        Some(p) => inputs::json_file(p)?,
        None => CalibrationConfig::default(),
    };
    if let Some(b) = a.beta {
        config.beta = b;
    }
    if let Some(n) = a.scenarios {
        config.scenario_count = n;
    }
    if let Some(s) = a.sigma {
        config.common_sigma = Some(s);
    }
    if let Some(f) = a.fixed_h.clone() {
        config.fixed_h = Some(f);
    }
    if let Some(m) = a.multistarts {
        config.optimizer.multistart_count = m;
    }
    if let Some(w) = read_weights(&a.weights, &quotes)? {
        config.weights = Some(w);
    }
    config.validate()?;
    if quotes.is_empty() {
        return Err(Failure::Input(anyhow!("{} contains no quotes", a.quotes.display())));
    }
    let weights = config.weights.as_deref();

    let (mut report, extra) = match (a.model, a.method) {
        (ModelArg::At1p, _) => {
            let h = a.h.ok_or_else(|| anyhow!("AT1P calibration needs --h"))?;
            let firm = calibrate_at1p_cascade(&quotes, h, config.beta, &curve)?;
            let mut r = residual_report(&ScenarioSet::single(firm), &quotes, &curve, weights)?;
            r.method = "cascade".into();
            (r, String::new())
        }
        (ModelArg::Sbat1p, MethodArg::Kernel) => {
            let fixed_h = config.fixed_h.clone().ok_or_else(|| anyhow!("kernel calibration needs --fixed-h"))?;
            let sigma = config.common_sigma.ok_or_else(|| anyhow!("kernel calibration needs --sigma"))?;
            let sol = sbat1p_kernel_calibrate(&quotes, &fixed_h, sigma, config.beta, &curve, DEFAULT_KERNEL_BRACKET)?;
            let mut r = residual_report(&sol.scenarios()?, &quotes, &curve, weights)?;
            r.method = "kernel".into();
            let extra = format!(
                "free barrier {:.4}   det C {:.3e}   |C p|/|C| {:.3e}\n",
                sol.free_barrier, sol.determinant, sol.relative_residual
            );
            (r, extra)
        }
        (ModelArg::Sbat1p, MethodArg::Optimize) => (sbat1p_optimize(&quotes, &config, &curve)?, String::new()),
        (ModelArg::Svbat1p, MethodArg::Optimize) => (svbat1p_optimize(&quotes, &config, &curve)?, String::new()),
        (ModelArg::Svbat1p, MethodArg::Kernel) => bail_input("kernel calibration is only defined for SBAT1P")?,
    };
    report.config = Some(config);

    let json = serde_json::to_string_pretty(&report).context("serializing report")? + "\n";
    if let Some(p) = &a.out {
        write_output(Some(p), &json)?;
    }
    if a.json {
        print!("{json}");
    } else {
        print!("{}{extra}", render_report(&report));
    }
    Ok(if report.converged { Outcome::Done } else { Outcome::NotConverged })
}

fn bail_input<T>(msg: &str) -> Result<T, Failure> {
    Err(Failure::Input(anyhow!(msg.to_string())))
}

fn render_report(r: &CalibrationReport) -> String {
    let mut out = format!("{} calibration ({})\n\n", r.model, r.method);
    if r.model == ModelKind::At1p {
        let firm = &r.parameters.scenarios()[0].firm;
        out.push_str(&format!("H/V0 = {}   beta = {}\n\n", firm.h_ratio, firm.beta));
        let mut t = Table::new(&["T_i", "mid", "sigma_i", "Q(tau>T_i)", "PV (bps)"]);
        for (seg, res) in firm.vol.segments().iter().zip(&r.residuals) {
            t.row(vec![
                fixed(seg.end, 2),
                fixed(res.mid, 2),
                pct(seg.sigma),
                pct(firm.survival_probability(seg.end)),
                fixed(res.pv, 4),
            ]);
        }
        out.push_str(&t.render());
    } else {
        let mut t = Table::new(&["scenario", "H/V0", "sigma", "probability"]);
        for (i, s) in r.parameters.scenarios().iter().enumerate() {
            let sig: Vec<String> = s.firm.vol.segments().iter().map(|v| pct(v.sigma)).collect();
            t.row(vec![(i + 1).to_string(), fixed(s.firm.h_ratio, 4), sig.join("/"), pct(s.probability)]);
        }
        out.push_str(&t.render());
        out.push_str(&format!("\nE[H] = {:.4}   beta = {}\n", r.expected_barrier, r.parameters.scenarios()[0].firm.beta));
        if r.merged_scenarios.len() < r.parameters.len() {
            out.push_str(&format!("{} distinct scenarios after merging\n", r.merged_scenarios.len()));
        }
        out.push('\n');
        let mut t = Table::new(&["T_i", "mid", "PV (bps)", "window", "in window"]);
        for res in &r.residuals {
            t.row(vec![
                fixed(res.tenor, 2),
                fixed(res.mid, 2),
                fixed(res.pv, 4),
                format!("[{:.2}, {:.2}]", res.window.0, res.window.1),
                if res.in_window { "yes" } else { "no" }.into(),
            ]);
        }
        out.push_str(&t.render());
    }
    out.push_str(&format!(
        "\nobjective {:.6e} bps^2 (unweighted {:.6e})   evaluations {}   converged {}\n",
        r.objective, r.unweighted_objective, r.evaluations, r.converged
    ));
    out.push_str("PV: protection buyer's value at the mid quote, bps of notional\n");
    out
}

/// Accepts decimals or fractions such as `1/12`.
fn parse_years(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
            let d: f64 = d.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
            n / d
        }
        None => s.trim().parse().map_err(|e| format!("{s:?}: {e}"))?,
    };
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{s:?} is not a positive number of years"))
    }
}

#[derive(Args)]
pub struct SurvivalArgs {
    /// Calibration report JSON or a bare scenario set.
    #[arg(long)]
    params: PathBuf,
    /// Second model: emit `params − diff` pointwise.
    #[arg(long)]
    diff: Option<PathBuf>,
    /// Last grid time in years; defaults to the calibrated range.
    #[arg(long, value_parser = parse_years)]
    horizon: Option<f64>,
    #[arg(long, value_parser = parse_years, default_value = "1/12")]
    step: f64,
    /// Allow a horizon beyond the calibrated range.
    #[arg(long)]
    extrapolate: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn survival(a: SurvivalArgs) -> Result<Outcome, Failure> {
    let first = inputs::params(&a.params)?;
    let second = a.diff.as_deref().map(inputs::params).transpose()?;
    let valid_to = match &second {
        Some(s) => first.valid_to.max(s.valid_to),
        None => first.valid_to,
    };
    let horizon = match a.horizon {
        Some(h) => h,
        None if valid_to.is_finite() => valid_to,
        None => bail_input("--horizon is required when the parameters carry no calibrated range")?,
    };
    if horizon > valid_to + 1e-9 && !a.extrapolate {
        return Err(Failure::Input(anyhow!(
            "horizon {horizon}y exceeds the calibrated range ({valid_to}y); pass --extrapolate to allow it"
        )));
    }
    let csv = match second {
        None => survival_grid(first.scenarios, horizon, a.step)?.to_csv(),
        Some(other) => {
            let mut out = String::from("time_years,survival_difference\n");
            for t in uniform_times(horizon, a.step)? {
                let d = if t == 0.0 { 0.0 } else { first.scenarios.survival(t) - other.scenarios.survival(t) };
                out.push_str(&format!("{t},{d}\n"));
            }
            out
        }
    };
    write_output(a.out.as_deref(), &csv)?;
    Ok(Outcome::Done)
}

#[derive(Args)]
pub struct PriceCdsArgs {
    #[arg(long)]
    quotes: PathBuf,
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Model parameters; the stripped intensity curve when omitted.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct CdsRow {
    tenor: f64,
    pv_bid: f64,
    pv_mid: f64,
    pv_ask: f64,
    window: (f64, f64),
    mid_in_window: bool,
}

pub fn price_cds(a: PriceCdsArgs) -> Result<Outcome, Failure> {
    let quotes = inputs::quotes(&a.quotes, None)?;
    let curve = inputs::curve(a.curve.as_deref())?;
    let params = a.params.as_deref().map(inputs::params).transpose()?;
    let mut rows = Vec::with_capacity(quotes.len());
    if !quotes.is_empty() {
        let hazard = strip_hazard(&quotes, &curve)?;
        let windows = pv_windows(&quotes, &hazard, &curve)?;
        let model: &dyn SurvivalModel = match &params {
            Some(p) => &p.scenarios,
            None => &hazard,
        };
        for (q, (bid_pv, ask_pv)) in quotes.iter().zip(windows) {
            let pv_mid = quote_pv(q, q.mid, model, &curve)?;
            rows.push(CdsRow {
                tenor: q.tenor,
                pv_bid: quote_pv(q, q.bid, model, &curve)?,
                pv_mid,
                pv_ask: quote_pv(q, q.ask, model, &curve)?,
                window: (ask_pv, bid_pv),
                mid_in_window: ask_pv <= pv_mid && pv_mid <= bid_pv,
            });
        }
    }
    let text = if a.json {
        serde_json::to_string_pretty(&rows).context("serializing prices")? + "\n"
    } else {
        let mut t = Table::new(&["T_i", "PV@bid", "PV@mid", "PV@ask", "window", "in window"]);
        for r in &rows {
            t.row(vec![
                fixed(r.tenor, 2),
                fixed(r.pv_bid, 4),
                fixed(r.pv_mid, 4),
                fixed(r.pv_ask, 4),
                format!("[{:.2}, {:.2}]", r.window.0, r.window.1),
                if r.mid_in_window { "yes" } else { "no" }.into(),
            ]);
        }
        t.render() + "PV: protection buyer's value, bps of notional\n"
    };
    write_output(a.out.as_deref(), &text)?;
    Ok(Outcome::Done)
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FixingArg {
    PeriodStart,
    ForwardAtDefault,
}

#[derive(Args)]
pub struct ErsArgs {
    /// Counterparty model parameters.
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Correlations between the counterparty and the equity, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    rho: Option<Vec<f64>>,
    #[arg(long)]
    paths: Option<usize>,
    /// Monitoring steps per year.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Solve for the spread that makes the swap fair (default).
    #[arg(long, conflicts_with = "price")]
    fair_spread: bool,
    /// Price the swap at `--spread`.
    #[arg(long, requires = "spread")]
    price: bool,
    /// Spread over floating, bps.
    #[arg(long, allow_hyphen_values = true)]
    spread: Option<f64>,
    #[arg(long)]
    s0: Option<f64>,
    #[arg(long)]
    equity_vol: Option<f64>,
    #[arg(long)]
    dividend_yield: Option<f64>,
    #[arg(long)]
    stocks: Option<f64>,
    #[arg(long)]
    maturity: Option<f64>,
    /// Payments per year.
    #[arg(long)]
    frequency: Option<u32>,
    /// Counterparty recovery rate.
    #[arg(long)]
    recovery: Option<f64>,
    #[arg(long, value_enum)]
    fixing: Option<FixingArg>,
    /// Run settings as JSON; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    no_cv: bool,
    #[arg(long)]
    no_bridge: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractSpec {
    pub stock_count: f64,
    pub spread: f64,
    pub maturity: f64,
    pub frequency: u32,
    pub recovery: f64,
    #[serde(default)]
    pub fixing: FixingConvention,
}

impl Default for ContractSpec {
    fn default() -> Self {
        Self { stock_count: 1.0, spread: 0.0, maturity: 5.0, frequency: 2, recovery: 0.4, fixing: FixingConvention::PeriodStart }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErsRunConfig {
    #[serde(default = "default_equity")]
    pub equity: EquityDynamics,
    #[serde(default)]
    pub contract: ContractSpec,
    #[serde(default)]
    pub monte_carlo: McConfig,
    #[serde(default = "default_rhos")]
    pub rho: Vec<f64>,
}

fn default_equity() -> EquityDynamics {
    EquityDynamics { s0: 20.0, sigma_s: 0.2, dividend_yield: 0.008 }
}

fn default_rhos() -> Vec<f64> {
    vec![-1.0, -0.2, 0.0, 0.5, 1.0]
}

impl Default for ErsRunConfig {
    fn default() -> Self {
        Self { equity: default_equity(), contract: ContractSpec::default(), monte_carlo: McConfig::default(), rho: default_rhos() }
    }
}

#[derive(Serialize)]
struct FairSpreadRow {
    rho: f64,
    spread_bps: f64,
    /// Estimate at the fair spread (value near zero) with its errors.
    estimate: McEstimate,
}

#[derive(Serialize)]
struct ErsOutput<T: Serialize> {
    mode: &'static str,
    seed: u64,
    paths: usize,
    defaults: usize,
    results: Vec<T>,
    config_echo: ErsRunConfig,
    scenarios: ScenarioSet,
}

pub fn ers(a: ErsArgs) -> Result<Outcome, Failure> {
    let params = inputs::params(&a.params)?;
    let curve = inputs::curve(a.curve.as_deref())?;
    let mut cfg: ErsRunConfig = match &a.config {
        Some(p) => inputs::json_file(p)?,
        None => ErsRunConfig::default(),
    };
    let mc = &mut cfg.monte_carlo;
    a.paths.inspect(|&v| mc.paths = v);
    a.steps.inspect(|&v| mc.steps_per_year = v);
    a.seed.inspect(|&v| mc.seed = v);
    if a.no_cv {
        mc.control_variate = false;
    }
    if a.no_bridge {
        mc.brownian_bridge = false;
    }
    let eq = &mut cfg.equity;
    a.s0.inspect(|&v| eq.s0 = v);
    a.equity_vol.inspect(|&v| eq.sigma_s = v);
    a.dividend_yield.inspect(|&v| eq.dividend_yield = v);
    let c = &mut cfg.contract;
    a.stocks.inspect(|&v| c.stock_count = v);
    a.spread.inspect(|&v| c.spread = v);
    a.maturity.inspect(|&v| c.maturity = v);
    a.frequency.inspect(|&v| c.frequency = v);
    a.recovery.inspect(|&v| c.recovery = v);
    if let Some(f) = a.fixing {
        c.fixing = match f {
            FixingArg::PeriodStart => FixingConvention::PeriodStart,
            FixingArg::ForwardAtDefault => FixingConvention::ForwardAtDefault,
        };
    }
    if let Some(r) = a.rho.clone() {
        cfg.rho = r;
    }
    if cfg.rho.is_empty() {
        bail_input("at least one correlation is required")?;
    }
    for &r in &cfg.rho {
        McConfig { rho: r, ..cfg.monte_carlo }.validate()?;
    }
    cfg.equity.validate()?;
    let spec = &cfg.contract;
    let mut contract = ErsContract::new(spec.stock_count, cfg.equity.s0, spec.spread, spec.maturity, spec.frequency, spec.recovery)?;
    contract.fixing = spec.fixing;
    if contract.maturity() > params.valid_to + 1e-9 {
        log::warn!("contract maturity {}y beyond the calibrated range {}y", contract.maturity(), params.valid_to);
    }

    let sim = simulate_defaults(&params.scenarios, contract.maturity(), contract.schedule.dates(), &cfg.monte_carlo)?;
    let cv = cfg.monte_carlo.control_variate;
    let json = if a.price {
        let results = cfg.rho.iter().map(|&r| sim.price(&contract, &cfg.equity, &curve, r, cv)).collect::<fpc_core::Result<Vec<_>>>()?;
        let out = ErsOutput { mode: "price", seed: sim.seed, paths: sim.paths, defaults: sim.defaults.len(), results, config_echo: cfg.clone(), scenarios: params.scenarios };
        serde_json::to_string_pretty(&out)
    } else {
        let results = cfg
            .rho
            .iter()
            .map(|&r| {
                let x = sim.fair_spread(&contract, &cfg.equity, &curve, r, cv)?;
                let estimate = sim.price(&contract.with_spread(x), &cfg.equity, &curve, r, cv)?;
                Ok(FairSpreadRow { rho: r, spread_bps: x, estimate })
            })
            .collect::<fpc_core::Result<Vec<_>>>()?;
        let out = ErsOutput { mode: "fair_spread", seed: sim.seed, paths: sim.paths, defaults: sim.defaults.len(), results, config_echo: cfg.clone(), scenarios: params.scenarios };
        serde_json::to_string_pretty(&out)
    }
    .context("serializing results")?;
    write_output(a.out.as_deref(), &(json + "\n"))?;
    Ok(Outcome::Done)
}
