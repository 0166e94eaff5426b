//! Numerical building blocks: the normal CDF, a bracketed root finder,
//! a Nelder–Mead simplex search and a low-discrepancy start generator.

pub mod roots;
pub mod simplex;

use libm::erfc;

/// Standard normal cumulative distribution function.
///
/// Evaluated through `erfc`, which keeps full relative precision in the
/// lower tail (absolute error well below 1e-15 everywhere).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Radical inverse of `index` in the given prime `base`.
fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let mut factor = inv_base;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * factor;
        index /= base;
        factor *= inv_base;
    }
    value
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Halton points in the open unit cube, skipping the origin.
///
/// Used to spread optimizer multistarts over a parameter box.
pub fn halton_points(count: usize, dim: usize) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len(), "halton_points supports up to {} dimensions", PRIMES.len());
    (1..=count as u64)
        .map(|i| PRIMES[..dim].iter().map(|&b| radical_inverse(i, b)).collect())
        .collect()
}

/// Logistic map ℝ → (0, 1).
pub(crate) fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Inverse of [`logistic`], clamped away from the endpoints.
pub(crate) fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    (p / (1.0 - p)).ln()
}
