//! Closed-form survival against a direct first-passage simulation of the
//! log-distance to the barrier, written independently of `ersmc`.

use fpc_core::survival::{FirmDynamics, PiecewiseVol};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

/// `X = ln(V/Ĥ)` is a Brownian motion with drift `β σ²` and volatility `σ`
/// started at `−ln h`. Within a step of constant `σ` the bridge crossing
/// probability of a drifted Brownian motion is `exp(−2 x₀ x₁ / (σ² Δt))`,
/// so the estimate is exact up to sampling error.
fn simulated_default_probability(firm: &FirmDynamics, horizon: f64, steps: usize, paths: usize, seed: u64) -> f64 {
    let mut rng = StdRng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut grid: Vec<f64> = (0..=steps).map(|k| horizon * k as f64 / steps as f64).collect();
    for s in firm.vol.segments() {
        if s.end < horizon {
            grid.push(s.end);
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut defaults = 0usize;
    for _ in 0..paths {
        let mut x = -firm.h_ratio.ln();
        for w in grid.windows(2) {
            let dt = w[1] - w[0];
            let sigma = firm.vol.sigma_at(0.5 * (w[0] + w[1]));
            let x1 = x + firm.beta * sigma * sigma * dt + sigma * dt.sqrt() * normal.sample(&mut rng);
            if x1 <= 0.0 || rng.random::<f64>() < (-2.0 * x * x1 / (sigma * sigma * dt)).exp() {
                defaults += 1;
                break;
            }
            x = x1;
        }
    }
    defaults as f64 / paths as f64
}

/// Binomial standard error of a frequency over `paths` draws at probability `p`.
fn binomial_se(p: f64, paths: usize) -> f64 {
    (p * (1.0 - p) / paths as f64).sqrt()
}

#[test]
fn random_firms_match_simulation() {
    let mut draws = StdRng::seed_from_u64(17);
    for i in 0..20 {
        let h = draws.random_range(0.2..0.8);
        let beta = draws.random_range(0.0..1.0);
        let sigma = draws.random_range(0.1..0.4);
        let firm = FirmDynamics::with_flat_vol(h, beta, sigma).unwrap();
        for &t in &[1.0, 5.0] {
            let p = simulated_default_probability(&firm, t, 20, 40_000, 1000 + i);
            let exact = 1.0 - firm.survival_probability(t);
            let se = binomial_se(exact, 40_000);
            assert!((p - exact).abs() <= 4.0 * se, "h={h} beta={beta} sigma={sigma} T={t}: mc {p} ± {se}, closed form {exact}");
        }
    }
}

#[test]
fn driftless_reference_case_at_one_million_paths() {
    let firm = FirmDynamics::with_flat_vol(0.5, 0.0, 0.2).unwrap();
    let p = simulated_default_probability(&firm, 1.0, 1, 1_000_000, 5);
    let exact = 1.0 - firm.survival_probability(1.0);
    let se = binomial_se(exact, 1_000_000);
    assert!((p - exact).abs() <= 3.0 * se, "mc {p} ± {se}, closed form {exact}");
}

#[test]
fn piecewise_volatility_matches_simulation() {
    let vol = PiecewiseVol::from_pairs(&[(1.0, 0.35), (3.0, 0.17), (5.0, 0.25)]).unwrap();
    let firm = FirmDynamics::new(0.45, 0.5, vol).unwrap();
    let p = simulated_default_probability(&firm, 5.0, 10, 200_000, 9);
    let exact = 1.0 - firm.survival_probability(5.0);
    let se = binomial_se(exact, 200_000);
    assert!((p - exact).abs() <= 4.0 * se, "mc {p} ± {se}, closed form {exact}");
}
