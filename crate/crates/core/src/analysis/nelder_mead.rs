//! Downhill simplex, with standard or dimension-adapted coefficients.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Stop when the simplex spread in f and x both fall below these.
    pub f_tol: f64,
    pub x_tol: f64,
    pub initial_step: f64,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Rebuild the simplex around the best point after convergence, up to
    /// this many times (iterations count against `max_iter`).
    pub restarts: usize,
    /// Replace the four coefficients by the dimension-dependent ones of
    /// Gao and Han, which keep the simplex from collapsing in 10+ dimensions.
    pub adaptive: bool,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_iter: 2000,
            f_tol: 1e-12,
            x_tol: 1e-7,
            initial_step: 1.0,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            restarts: 3,
            adaptive: true,
        }
    }
}

impl NelderMeadOptions {
    /// `(reflection, expansion, contraction, shrink)` used in dimension `n`.
    pub fn coefficients(&self, n: usize) -> (f64, f64, f64, f64) {
        if self.adaptive && n > 0 {
            let n = n as f64;
            (1.0, 1.0 + 2.0 / n, 0.75 - 0.5 / n, 1.0 - 1.0 / n)
        } else {
            (
                self.reflection,
                self.expansion,
                self.contraction,
                self.shrink,
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Best value after each iteration; nonincreasing.
    pub history: Vec<f64>,
    pub converged: bool,
}

/// Minimize `f` from `x0`. Non-finite values count as `+∞`, so the result is
/// always the best finite iterate seen (or `x0`).
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let (reflection, expansion, contraction, shrink) = opts.coefficients(n);
    let mut evals = 0;
    let mut eval = |x: &[f64]| {
        evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut best_x = x0.to_vec();
    let mut best_f = eval(x0);
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut step = opts.initial_step;
    for _round in 0..=opts.restarts {
        let mut simplex: Vec<(Vec<f64>, f64)> = vec![(best_x.clone(), best_f)];
        for i in 0..n {
            let mut x = best_x.clone();
            x[i] += step;
            let v = eval(&x);
            simplex.push((x, v));
        }
        converged = false;
        while iterations < opts.max_iter {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let f_spread = simplex[n].1 - simplex[0].1;
            let x_spread = simplex[1..]
                .iter()
                .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if f_spread.abs() <= opts.f_tol && x_spread <= opts.x_tol {
                converged = true;
                break;
            }
            iterations += 1;
            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, v) in centroid.iter_mut().zip(x) {
                    *c += v / n as f64;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };
            let xr = along(reflection);
            let fr = eval(&xr);
            if fr < simplex[0].1 {
                let xe = along(reflection * expansion);
                let fe = eval(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let xc = along(reflection * contraction);
                    let fc = eval(&xc);
                    (xc, fc)
                } else {
                    let xc = along(-contraction);
                    let fc = eval(&xc);
                    (xc, fc)
                };
                if fc < fr.min(simplex[n].1) {
                    simplex[n] = (xc, fc);
                } else {
                    let x0 = simplex[0].0.clone();
                    for (x, v) in simplex.iter_mut().skip(1) {
                        for (xi, bi) in x.iter_mut().zip(&x0) {
                            *xi = bi + shrink * (*xi - bi);
                        }
                        *v = eval(x);
                    }
                }
            }
            let (bx, bf) = simplex
                .iter()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("simplex is non-empty");
            if *bf < best_f {
                best_f = *bf;
                best_x = bx.clone();
            }
            history.push(best_f);
        }
        if iterations >= opts.max_iter {
            break;
        }
        step = (step * 0.1).max(opts.x_tol * 10.0);
    }
    NelderMeadResult {
        x: best_x,
        f: best_f,
        iterations,
        evaluations: evals,
        history,
        converged,
    }
}

/// Maximize `f`; the returned `f` is the maximum value.
pub fn maximize<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let mut r = minimize(|x| -f(x), x0, opts);
    r.f = -r.f;
    r.history.iter_mut().for_each(|v| *v = -*v);
    r
}
