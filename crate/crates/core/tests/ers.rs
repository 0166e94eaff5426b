use std::sync::OnceLock;

use fpc_core::calibrate::calibrate_at1p_cascade;
use fpc_core::ersmc::{
    npv_at_default, simulate_default_and_equity, simulate_defaults, DefaultSimulation, EquityDynamics, ErsContract, McConfig,
};
use fpc_core::marketdata::{vodafone_quotes, DiscountCurve};
use fpc_core::survival::ScenarioSet;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

fn curve() -> DiscountCurve {
    DiscountCurve::flat(0.03)
}

fn equity() -> EquityDynamics {
    EquityDynamics { s0: 20.0, sigma_s: 0.2, dividend_yield: 0.008 }
}

fn contract() -> ErsContract {
    ErsContract::new(1.0, 20.0, 14.2, 5.0, 2, 0.4).unwrap()
}

fn firm() -> ScenarioSet {
    ScenarioSet::single(calibrate_at1p_cascade(&vodafone_quotes(), 0.4, 0.5, &curve()).unwrap())
}

fn config() -> McConfig {
    McConfig { paths: 200_000, steps_per_year: 250, seed: 11, ..McConfig::default() }
}

fn shared() -> &'static DefaultSimulation {
    static S: OnceLock<DefaultSimulation> = OnceLock::new();
    S.get_or_init(|| simulate_defaults(&firm(), 5.0, contract().schedule.dates(), &config()).unwrap())
}

#[test]
fn default_rate_matches_closed_form() {
    let sim = shared();
    for t in [1.0, 3.0, 5.0] {
        let (p, se) = sim.default_fraction(t);
        let exact = 1.0 - sim.scenarios.mixture_survival(t);
        assert!((p - exact).abs() <= 3.0 * se, "T={t}: {p} ± {se} vs {exact}");
    }
}

#[test]
fn discrete_monitoring_converges_from_below() {
    let set = firm();
    let dates = contract().schedule.dates().to_vec();
    let fraction = |steps: usize| {
        let cfg = McConfig { paths: 100_000, steps_per_year: steps, brownian_bridge: false, ..config() };
        simulate_defaults(&set, 5.0, &dates, &cfg).unwrap().default_fraction(5.0).0
    };
    let (coarse, fine) = (fraction(12), fraction(250));
    let exact = 1.0 - set.mixture_survival(5.0);
    assert!(coarse < fine && fine < exact, "{coarse} {fine} {exact}");
}

#[test]
fn full_recovery_makes_fair_spread_zero() {
    let c = ErsContract { counterparty_recovery: 1.0, ..contract() };
    assert_eq!(shared().fair_spread(&c, &equity(), &curve(), 0.5, true).unwrap(), 0.0);
}

#[test]
fn control_variate_is_unbiased() {
    for rho in [-0.2, 0.5, 1.0] {
        let on = shared().price(&contract(), &equity(), &curve(), rho, true).unwrap();
        let off = shared().price(&contract(), &equity(), &curve(), rho, false).unwrap();
        let combined = (on.std_error.powi(2) + off.std_error.powi(2)).sqrt();
        assert!((on.value - off.value).abs() <= 3.0 * combined, "rho={rho}: {on:?} {off:?}");
        assert!(on.std_error < off.std_error);
    }
}

#[test]
fn price_is_concave_in_spread() {
    let sim = shared();
    let p = |x: f64| sim.price(&contract().with_spread(x), &equity(), &curve(), 0.5, false).unwrap().value;
    for x in [0.0, 5.0, 14.2, 30.0] {
        let d = 2.0;
        assert!(p(x - d) + p(x + d) - 2.0 * p(x) <= 1e-9, "x={x}");
    }
}

#[test]
fn fair_spread_increases_with_correlation() {
    let sim = shared();
    let xs: Vec<f64> = [-1.0, -0.2, 0.0, 0.5, 1.0].iter().map(|&r| sim.fair_spread(&contract(), &equity(), &curve(), r, true).unwrap()).collect();
    assert!(xs[0].abs() < 0.05, "{xs:?}");
    assert!(xs.windows(2).all(|w| w[1] >= w[0]), "{xs:?}");
}

#[test]
fn perfectly_correlated_paths_move_together() {
    let cfg = McConfig { paths: 200, rho: 1.0, ..config() };
    let set = firm();
    let vol = &set.scenarios()[0].firm.vol;
    let paths = simulate_default_and_equity(&set, &equity(), &curve(), 5.0, contract().schedule.dates(), &cfg).unwrap();
    let mut checked = 0;
    for p in &paths {
        for i in 1..p.times.len() {
            let dt = p.times[i] - p.times[i - 1];
            let sigma = vol.sigma_at(p.times[i - 1] + 0.5 * dt);
            // Brownian increments implied by each coordinate once drifts are removed
            let dw_firm = (p.log_distance[i] - p.log_distance[i - 1] - 0.5 * sigma * sigma * dt) / sigma;
            let dw_equity = (p.log_equity[i] - p.log_equity[i - 1] - (0.03 - 0.008 - 0.02) * dt) / 0.2;
            assert!((dw_firm - dw_equity).abs() < 1e-9, "t={}: {dw_firm} vs {dw_equity}", p.times[i]);
            checked += 1;
        }
    }
    assert!(checked > 100_000);
}

#[test]
fn closed_form_npv_matches_nested_simulation() {
    let c = contract();
    let e = equity();
    let d = curve();
    let (tau, s_tau) = (1.7, 18.5);
    let remaining = 5.0 - tau;
    let mut rng = StdRng::seed_from_u64(3);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let steps = 100;
    let h = remaining / steps as f64;
    let n = 20_000;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..n {
        let mut s = s_tau;
        let mut dividends = 0.0;
        for k in 0..steps {
            let s_next = s * ((0.03 - e.dividend_yield - 0.5 * e.sigma_s * e.sigma_s) * h + e.sigma_s * h.sqrt() * normal.sample(&mut rng)).exp();
            dividends += e.dividend_yield * 0.5 * (s + s_next) * h * (-0.03 * (k as f64 + 0.5) * h).exp();
            s = s_next;
        }
        let equity_leg = dividends + (-0.03 * remaining).exp() * (s - c.s0);
        sum += equity_leg;
        sum2 += equity_leg * equity_leg;
    }
    let mean = sum / n as f64;
    let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
    let mut floating = 0.0;
    let mut prev = 0.0;
    for &t in c.schedule.dates() {
        if t > tau {
            let libor = ((0.03 * (t - prev)).exp() - 1.0) / (t - prev);
            floating += c.s0 * (t - prev) * (libor + c.spread * 1e-4) * (-0.03 * (t - tau)).exp();
        }
        prev = t;
    }
    let oracle = floating - mean;
    let npv = npv_at_default(&c, &e, tau, s_tau, &d).unwrap();
    assert!((npv - oracle).abs() < 3.0 * se + 1e-3, "{npv} vs {oracle} ± {se}");
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let cfg = McConfig { paths: 150_000, steps_per_year: 50, ..config() };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| simulate_defaults(&firm(), 5.0, contract().schedule.dates(), &cfg).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.defaults, b.defaults);
    let pa = a.price(&contract(), &equity(), &curve(), 0.5, true).unwrap();
    let pb = b.price(&contract(), &equity(), &curve(), 0.5, true).unwrap();
    assert_eq!(pa, pb);
}
