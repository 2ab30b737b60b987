//! Nelder–Mead downhill simplex.

use crate::{Error, Result};

/// Simplex coefficients and stopping rules.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NelderMeadParams {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Offset of the initial simplex vertices along each coordinate.
    pub initial_step: f64,
    pub max_evaluations: usize,
    /// Converged once every vertex lies within this distance (max norm)
    /// of the best one.
    pub tolerance: f64,
}

impl Default for NelderMeadParams {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            initial_step: 0.1,
            max_evaluations: 800,
            tolerance: 1e-7,
        }
    }
}

impl NelderMeadParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.reflection > 0.0
            && self.expansion > 1.0
            && self.expansion > self.reflection
            && self.contraction > 0.0
            && self.contraction < 1.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.initial_step > 0.0
            && self.tolerance > 0.0
            && self.max_evaluations > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x_best: Vec<f64>,
    pub cost_best: f64,
    pub evaluations: usize,
    /// Simplex shrank below the tolerance (otherwise the budget ran out).
    pub converged: bool,
    /// Every cost value in call order.
    pub history: Vec<f64>,
}

struct Counted<F> {
    cost: F,
    history: Vec<f64>,
    budget: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn call(&mut self, x: &[f64]) -> f64 {
        let value = (self.cost)(x);
        self.history.push(value);
        if value.is_nan() {
            f64::INFINITY
        } else {
            value
        }
    }

    fn exhausted(&self) -> bool {
        self.history.len() >= self.budget
    }
}

fn combine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b - a)
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Minimizes `cost` from `x0`. NaN costs are ranked as `+∞`. Budget
/// exhaustion is a normal return with `converged = false`.
pub fn nelder_mead<F>(cost: F, x0: &[f64], params: &NelderMeadParams) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut f = Counted {
        cost,
        history: Vec::new(),
        budget: params.max_evaluations,
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = f.call(x0);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        if f.exhausted() {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += params.initial_step;
        let v = f.call(&x);
        simplex.push((x, v));
    }

    let mut converged = false;
    while simplex.len() == n + 1 {
        // stable: ties keep the earlier vertex first
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].0.clone();
        let size = simplex
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if size < params.tolerance {
            converged = true;
            break;
        }
        if f.exhausted() {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let (worst, f_worst) = simplex[n].clone();
        let f_best = simplex[0].1;
        let f_second = simplex[n - 1].1;

        let reflected = combine(&centroid, &worst, -params.reflection);
        let f_reflected = f.call(&reflected);

        if f_reflected < f_best {
            if f.exhausted() {
                simplex[n] = (reflected, f_reflected);
                continue;
            }
            let expanded = combine(&centroid, &worst, -params.expansion);
            let f_expanded = f.call(&expanded);
            simplex[n] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
            continue;
        }
        if f_reflected < f_second {
            simplex[n] = (reflected, f_reflected);
            continue;
        }
        if f.exhausted() {
            if f_reflected < f_worst {
                simplex[n] = (reflected, f_reflected);
            }
            continue;
        }

        let (contracted, outside) = if f_reflected < f_worst {
            (combine(&centroid, &reflected, params.contraction), true)
        } else {
            (combine(&centroid, &worst, params.contraction), false)
        };
        let f_contracted = f.call(&contracted);
        let accept = if outside {
            f_contracted <= f_reflected
        } else {
            f_contracted < f_worst
        };
        if accept {
            simplex[n] = (contracted, f_contracted);
            continue;
        }

        for vertex in simplex.iter_mut().skip(1) {
            if f.exhausted() {
                break;
            }
            let x = combine(&best, &vertex.0, params.shrink);
            let v = f.call(&x);
            *vertex = (x, v);
        }
    }

    let (x_best, cost_best) = simplex
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("simplex has at least one vertex");
    NelderMeadResult {
        x_best,
        cost_best,
        evaluations: f.history.len(),
        converged,
        history: f.history,
    }
}
