//! Nelder–Mead downhill simplex with restarts.

/// Stopping and restart controls for [`minimize`].
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Total iteration budget across all restarts.
    pub max_iterations: usize,
    /// Absolute spread of objective values across the simplex at convergence.
    pub f_tol: f64,
    /// Largest vertex distance from the best vertex at convergence.
    pub x_tol: f64,
    /// Edge length of the initial (and every restarted) simplex.
    pub initial_step: f64,
    /// Number of restarts from the incumbent once a run has converged.
    pub restarts: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { max_iterations: 4000, f_tol: 1e-12, x_tol: 1e-9, initial_step: 0.5, restarts: 3 }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best objective value after every iteration (nonincreasing).
    pub trace: Vec<f64>,
}

struct Vertex {
    x: Vec<f64>,
    f: f64,
}

fn eval<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64], evals: &mut usize) -> f64 {
    *evals += 1;
    let v = f(x);
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn build_simplex<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    x0: &[f64],
    f0: f64,
    step: f64,
    evals: &mut usize,
) -> Vec<Vertex> {
    let mut simplex = vec![Vertex { x: x0.to_vec(), f: f0 }];
    for i in 0..x0.len() {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = eval(f, &x, evals);
        simplex.push(Vertex { x, f: fx });
    }
    simplex
}

/// Minimizes `f` starting from `x0`.
///
/// Ties are broken by vertex order, so results are bit-reproducible.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert!(n >= 1, "simplex search needs at least one dimension");
    let mut evals = 0;
    let f0 = eval(&mut f, x0, &mut evals);
    let mut simplex = build_simplex(&mut f, x0, f0, opts.initial_step, &mut evals);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut restarts_left = opts.restarts;
    let mut last_converged_value = f64::INFINITY;
    let mut converged = false;

    while iterations < opts.max_iterations {
        simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
        let best = simplex[0].f;
        let worst = simplex[n].f;
        let size = simplex[1..]
            .iter()
            .map(|v| v.x.iter().zip(&simplex[0].x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);

        if (worst - best <= opts.f_tol && size <= opts.x_tol) || size <= 1e-14 {
            let improved = last_converged_value - best > opts.f_tol;
            if restarts_left == 0 || !improved {
                converged = true;
                break;
            }
            restarts_left -= 1;
            last_converged_value = best;
            let x_best = simplex[0].x.clone();
            simplex = build_simplex(&mut f, &x_best, best, opts.initial_step, &mut evals);
            continue;
        }

        iterations += 1;
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v.x[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64, worst: &[f64]| -> Vec<f64> {
            centroid.iter().zip(worst).map(|(c, w)| c + t * (c - w)).collect()
        };

        let xr = along(1.0, &simplex[n].x);
        let fr = eval(&mut f, &xr, &mut evals);
        if fr < simplex[0].f {
            let xe = along(2.0, &simplex[n].x);
            let fe = eval(&mut f, &xe, &mut evals);
            simplex[n] = if fe < fr { Vertex { x: xe, f: fe } } else { Vertex { x: xr, f: fr } };
        } else if fr < simplex[n - 1].f {
            simplex[n] = Vertex { x: xr, f: fr };
        } else {
            let (xc, fc) = if fr < simplex[n].f {
                let xc = along(0.5, &simplex[n].x);
                let fc = eval(&mut f, &xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(-0.5, &simplex[n].x);
                let fc = eval(&mut f, &xc, &mut evals);
                (xc, fc)
            };
            if fc < fr.min(simplex[n].f) {
                simplex[n] = Vertex { x: xc, f: fc };
            } else {
                let x_best = simplex[0].x.clone();
                for v in simplex.iter_mut().skip(1) {
                    for (xi, bi) in v.x.iter_mut().zip(&x_best) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    v.f = eval(&mut f, &v.x, &mut evals);
                }
            }
        }
        let best_now = simplex.iter().map(|v| v.f).fold(f64::INFINITY, f64::min);
        trace.push(best_now);
    }

    simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
    let best = simplex.swap_remove(0);
    SimplexResult { x: best.x, value: best.f, iterations, evaluations: evals, converged, trace }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn minimizes_rosenbrock() {
        let res = minimize(rosenbrock, &[-1.2, 1.0], SimplexOptions::default());
        assert!(res.converged);
        assert!((res.x[0] - 1.0).abs() < 1e-5 && (res.x[1] - 1.0).abs() < 1e-5, "{:?}", res.x);
        assert!(res.value < 1e-10);
    }

    #[test]
    fn trace_is_nonincreasing() {
        let res = minimize(rosenbrock, &[0.0, 3.0], SimplexOptions::default());
        assert!(res.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn one_dimensional_quadratic() {
        let res = minimize(|x| (x[0] - 3.0).powi(2), &[0.0], SimplexOptions::default());
        assert!((res.x[0] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = SimplexOptions { max_iterations: 5, ..SimplexOptions::default() };
        let res = minimize(rosenbrock, &[-1.2, 1.0], opts);
        assert!(!res.converged);
        assert_eq!(res.iterations, 5);
    }
}
