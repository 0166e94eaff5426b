use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cdspricer::CdsBook;
use crate::error::{invalid, Error, Result};
use crate::marketdata::{CdsQuote, DiscountCurve};
use crate::math::roots::{brent, RootOptions};
use crate::survival::{survival_from_variance, ScenarioSet};

pub const DEFAULT_KERNEL_BRACKET: (f64, f64) = (0.05, 0.95);

const EXCLUSION: f64 = 0.01;
const SCAN_STEP: f64 = 0.0025;
const NEGATIVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSolution {
    pub free_barrier: f64,
    /// All barriers, ascending.
    pub barriers: Vec<f64>,
    /// Probabilities aligned with `barriers`.
    pub probabilities: Vec<f64>,
    pub sigma: f64,
    pub beta: f64,
    /// `det C` at the returned barrier.
    pub determinant: f64,
    /// `‖C·p‖ / ‖C‖` (Frobenius).
    pub relative_residual: f64,
}

impl KernelSolution {
    pub fn scenarios(&self) -> Result<ScenarioSet> {
        let triples: Vec<_> = self.barriers.iter().zip(&self.probabilities).map(|(&h, &p)| (h, self.sigma, p)).collect();
        ScenarioSet::from_triples(self.beta, &triples)
    }

    pub fn expected_barrier(&self) -> f64 {
        self.barriers.iter().zip(&self.probabilities).map(|(h, p)| h * p).sum()
    }
}

struct KernelProblem<'a> {
    book: CdsBook,
    fixed_columns: Vec<Vec<f64>>,
    sigma: f64,
    beta: f64,
    quotes: &'a [CdsQuote],
}

impl KernelProblem<'_> {
    fn column(&self, h: f64) -> Vec<f64> {
        let s2 = self.sigma * self.sigma;
        let q: Vec<f64> = self.book.times().iter().map(|&t| survival_from_variance(h, self.beta, s2 * t)).collect();
        (0..self.quotes.len()).map(|k| self.book.pv(k, self.quotes[k].mid, &q)).collect()
    }

    /// Columns ordered as (free, fixed…).
    fn matrix(&self, h: f64) -> DMatrix<f64> {
        let n = self.quotes.len();
        let free = self.column(h);
        DMatrix::from_fn(n, n, |k, i| if i == 0 { free[k] } else { self.fixed_columns[i - 1][k] })
    }

    fn det(&self, h: f64) -> f64 {
        self.matrix(h).lu().determinant()
    }
}

/// Null-space direction of `c` (right singular vector of the smallest singular value).
fn null_vector(c: &DMatrix<f64>) -> DVector<f64> {
    let svd = c.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &s)| if s < best.1 { (i, s) } else { best });
    v_t.row(imin).transpose()
}

/// Splits `(lo, hi)` into pieces that avoid `fixed ± EXCLUSION`.
fn admissible_intervals(bracket: (f64, f64), fixed: &[f64]) -> Vec<(f64, f64)> {
    let mut holes: Vec<(f64, f64)> = fixed.iter().map(|&h| (h - EXCLUSION, h + EXCLUSION)).collect();
    holes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    let mut lo = bracket.0;
    for (a, b) in holes {
        if a > lo {
            out.push((lo, a.min(bracket.1)));
        }
        lo = lo.max(b);
        if lo >= bracket.1 {
            break;
        }
    }
    if lo < bracket.1 {
        out.push((lo, bracket.1));
    }
    out.retain(|&(a, b)| b > a);
    out
}

/// SBAT1P calibration with `N` quotes and `N` barrier scenarios sharing
/// volatility `sigma`: `N−1` barriers are fixed, the free one is the lowest
/// root in `bracket` of `det C(H) = 0` whose null vector is a valid
/// probability vector.
pub fn sbat1p_kernel_calibrate(
    quotes: &[CdsQuote],
    fixed: &[f64],
    sigma: f64,
    beta: f64,
    discount: &DiscountCurve,
    bracket: (f64, f64),
) -> Result<KernelSolution> {
    let n = quotes.len();
    if n == 0 || fixed.len() + 1 != n {
        return Err(invalid(format!("kernel calibration needs N quotes and N-1 fixed barriers (got {n} and {})", fixed.len())));
    }
    if fixed.iter().any(|&h| !(h > 0.0 && h < 1.0)) {
        return Err(invalid("fixed barriers must lie in (0,1)"));
    }
    for (i, a) in fixed.iter().enumerate() {
        if fixed[..i].contains(a) {
            return Err(invalid("fixed barriers must be distinct"));
        }
    }
    if !(sigma > 0.0) || !(0.0 < bracket.0 && bracket.0 < bracket.1 && bracket.1 < 1.0) {
        return Err(invalid("kernel calibration needs sigma > 0 and a bracket inside (0,1)"));
    }
    let book = CdsBook::new(quotes, discount)?;
    let mut problem = KernelProblem { book, fixed_columns: Vec::new(), sigma, beta, quotes };
    problem.fixed_columns = fixed.iter().map(|&h| problem.column(h)).collect();

    let mut first_negative = None;
    for (lo, hi) in admissible_intervals(bracket, fixed) {
        let steps = ((hi - lo) / SCAN_STEP).ceil().max(1.0) as usize;
        let xs: Vec<f64> = (0..=steps).map(|i| if i == steps { hi } else { lo + i as f64 * (hi - lo) / steps as f64 }).collect();
        let dets: Vec<f64> = xs.iter().map(|&x| problem.det(x)).collect();
        for j in 1..xs.len() {
            if (dets[j - 1] > 0.0) == (dets[j] > 0.0) && dets[j] != 0.0 {
                continue;
            }
            let root = brent(|h| problem.det(h), xs[j - 1], xs[j], RootOptions::default())?;
            match solution_at(&problem, fixed, root) {
                Ok(sol) => return Ok(sol),
                Err(e @ Error::NegativeProbability { .. }) => {
                    log::debug!("kernel root {root} rejected: {e}");
                    first_negative.get_or_insert(e);
                }
                Err(e) => return Err(e),
            }
        }
    }
    Err(first_negative.unwrap_or(Error::NoAdmissibleBarrier))
}

fn solution_at(problem: &KernelProblem<'_>, fixed: &[f64], h: f64) -> Result<KernelSolution> {
    let c = problem.matrix(h);
    let v = null_vector(&c);
    let sum = v.sum();
    let mut p: Vec<f64> = v.iter().map(|&x| x / sum).collect();
    if let Some(&worst) = p.iter().find(|x| !x.is_finite() || **x < -NEGATIVE_TOL) {
        return Err(Error::NegativeProbability { barrier: h, value: worst });
    }
    for x in &mut p {
        *x = x.max(0.0);
    }
    let total: f64 = p.iter().sum();
    for x in &mut p {
        *x /= total;
    }
    let pv = DVector::from_column_slice(&p);
    let relative_residual = (&c * &pv).norm() / c.norm();
    let mut pairs: Vec<(f64, f64)> = std::iter::once(h).chain(fixed.iter().copied()).zip(p).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(KernelSolution {
        free_barrier: h,
        barriers: pairs.iter().map(|x| x.0).collect(),
        probabilities: pairs.iter().map(|x| x.1).collect(),
        sigma: problem.sigma,
        beta: problem.beta,
        determinant: c.lu().determinant(),
        relative_residual,
    })
}
