//! Derivative-free and gradient-based minimizers.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::{central_difference_gradient, HybridError, ObjectiveFunction};

pub const OPTIMIZERS: &[&str] = &["nelder-mead", "adam"];

/// Outcome of a minimization: the best point seen.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultsBuffer {
    pub opt_val: f64,
    pub opt_params: Vec<f64>,
    pub n_evals: usize,
}

pub type ObjectiveFn<'a> = dyn FnMut(&[f64]) -> Result<f64, HybridError> + 'a;

pub trait Optimizer: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn minimize(&self, f: &mut ObjectiveFn<'_>, x0: &[f64]) -> Result<ResultsBuffer, HybridError>;
}

/// Wraps an objective and remembers the best value it has returned.
struct Tracker<'f, 'a> {
    f: &'f mut ObjectiveFn<'a>,
    best: Option<(f64, Vec<f64>)>,
    evals: usize,
}

impl<'f, 'a> Tracker<'f, 'a> {
    fn new(f: &'f mut ObjectiveFn<'a>) -> Self {
        Self { f, best: None, evals: 0 }
    }

    fn eval(&mut self, x: &[f64]) -> Result<f64, HybridError> {
        let v = (self.f)(x)?;
        self.evals += 1;
        if self.best.as_ref().is_none_or(|(b, _)| v < *b) {
            self.best = Some((v, x.to_vec()));
        }
        Ok(v)
    }

    fn finish(self) -> Result<ResultsBuffer, HybridError> {
        let (opt_val, opt_params) = self
            .best
            .ok_or_else(|| HybridError::ObjectiveEvaluation("objective returned no comparable value".into()))?;
        Ok(ResultsBuffer { opt_val, opt_params, n_evals: self.evals })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMead {
    /// Offset of each initial simplex vertex from the start point.
    pub step: f64,
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_iters: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { step: 0.1, f_tol: 1e-6, x_tol: 1e-6, max_iters: 500 }
    }
}

impl Optimizer for NelderMead {
    fn name(&self) -> &str {
        "nelder-mead"
    }

    fn minimize(&self, f: &mut ObjectiveFn<'_>, x0: &[f64]) -> Result<ResultsBuffer, HybridError> {
        let mut t = Tracker::new(f);
        let n = x0.len();
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), t.eval(x0)?));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += self.step;
            let v = t.eval(&x)?;
            simplex.push((x, v));
        }
        if n == 0 {
            return t.finish();
        }
        let lerp = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> { a.iter().zip(b).map(|(a, b)| a + s * (b - a)).collect() };

        for _ in 0..self.max_iters {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let (best, worst) = (simplex[0].1, simplex[n].1);
            let spread = simplex[1..]
                .iter()
                .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if (worst - best).abs() <= self.f_tol && spread <= self.x_tol {
                break;
            }
            let centroid: Vec<f64> =
                (0..n).map(|d| simplex[..n].iter().map(|(x, _)| x[d]).sum::<f64>() / n as f64).collect();
            let xw = simplex[n].0.clone();
            // Points along the line from the worst vertex through the centroid.
            let xr = lerp(&centroid, &xw, -1.0);
            let fr = t.eval(&xr)?;
            if fr < best {
                let xe = lerp(&centroid, &xw, -2.0);
                let fe = t.eval(&xe)?;
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < worst {
                let xc = lerp(&centroid, &xr, 0.5);
                let fc = t.eval(&xc)?;
                (xc, fc)
            } else {
                let xc = lerp(&centroid, &xw, 0.5);
                let fc = t.eval(&xc)?;
                (xc, fc)
            };
            if fc < worst.min(fr) {
                simplex[n] = (xc, fc);
                continue;
            }
            let x_best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let x = lerp(&x_best, &vertex.0, 0.5);
                let v = t.eval(&x)?;
                *vertex = (x, v);
            }
        }
        t.finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_iters: usize,
    /// Central-difference step.
    pub h: f64,
    /// Stops early once the gradient norm falls below this.
    pub g_tol: f64,
}

impl Default for Adam {
    fn default() -> Self {
        Self { learning_rate: 0.05, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, max_iters: 200, h: 1e-4, g_tol: 1e-8 }
    }
}

impl Optimizer for Adam {
    fn name(&self) -> &str {
        "adam"
    }

    fn minimize(&self, f: &mut ObjectiveFn<'_>, x0: &[f64]) -> Result<ResultsBuffer, HybridError> {
        let mut t = Tracker::new(f);
        let mut x = x0.to_vec();
        t.eval(&x)?;
        let (mut m, mut v) = (vec![0.0; x.len()], vec![0.0; x.len()]);
        for k in 1..=self.max_iters {
            if x.is_empty() {
                break;
            }
            let g = central_difference_gradient(&mut |p: &[f64]| t.eval(p), &x, self.h)?;
            if g.iter().map(|g| g * g).sum::<f64>().sqrt() < self.g_tol {
                break;
            }
            let (c1, c2) = (1.0 - self.beta1.powi(k as i32), 1.0 - self.beta2.powi(k as i32));
            for i in 0..x.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                x[i] -= self.learning_rate * (m[i] / c1) / ((v[i] / c2).sqrt() + self.epsilon);
            }
            t.eval(&x)?;
        }
        t.finish()
    }
}

/// Optimizer by registry name, with default settings.
pub fn create_optimizer(name: &str) -> Result<Arc<dyn Optimizer>, HybridError> {
    match name {
        "nelder-mead" => Ok(Arc::new(NelderMead::default())),
        "adam" => Ok(Arc::new(Adam::default())),
        other => Err(HybridError::UnknownOptimizer(other.to_string())),
    }
}

/// Minimizes `objective` from the zero vector.
pub fn optimize(optimizer: &dyn Optimizer, objective: &ObjectiveFunction) -> Result<ResultsBuffer, HybridError> {
    optimize_from(optimizer, objective, &vec![0.0; objective.n_params()])
}

pub fn optimize_from(optimizer: &dyn Optimizer, objective: &ObjectiveFunction, x0: &[f64]) -> Result<ResultsBuffer, HybridError> {
    optimizer.minimize(&mut |x: &[f64]| objective.evaluate(x), x0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(x: &[f64]) -> Result<f64, HybridError> {
        Ok((x[0] - 1.0).powi(2))
    }

    #[test]
    fn nelder_mead_quadratic() {
        let r = NelderMead::default().minimize(&mut quadratic, &[0.0]).unwrap();
        assert!(r.opt_val < 1e-8, "{r:?}");
        assert!((r.opt_params[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let mut f = |x: &[f64]| -> Result<f64, HybridError> { Ok((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)) };
        let nm = NelderMead { max_iters: 2000, ..NelderMead::default() };
        let r = nm.minimize(&mut f, &[-1.0, 1.0]).unwrap();
        assert!(r.opt_val < 1e-6, "{r:?}");
    }

    #[test]
    fn adam_quadratic() {
        let r = Adam::default().minimize(&mut quadratic, &[0.0]).unwrap();
        assert!(r.opt_val < 1e-3, "{r:?}");
    }

    #[test]
    fn best_seen_even_at_cap() {
        let mut seen = Vec::new();
        let mut f = |x: &[f64]| -> Result<f64, HybridError> {
            let v = (x[0] - 3.0).powi(2);
            seen.push(v);
            Ok(v)
        };
        let r = NelderMead { max_iters: 3, ..NelderMead::default() }.minimize(&mut f, &[0.0]).unwrap();
        assert_eq!(r.opt_val, seen.iter().cloned().fold(f64::INFINITY, f64::min));
        assert_eq!(r.n_evals, seen.len());
    }

    #[test]
    fn errors_propagate() {
        let mut f = |_: &[f64]| -> Result<f64, HybridError> { Err(HybridError::ObjectiveEvaluation("boom".into())) };
        assert!(NelderMead::default().minimize(&mut f, &[0.0]).is_err());
        assert_eq!(create_optimizer("cobyla").unwrap_err(), HybridError::UnknownOptimizer("cobyla".into()));
        assert_eq!(create_optimizer("adam").unwrap().name(), "adam");
    }
}
