use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LmOptions {
    pub lambda_init: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    pub max_iterations: usize,
    pub relative_cost_tolerance: f64,
    pub step_tolerance: f64,
    /// Relative forward-difference step for the Jacobian.
    pub jacobian_step: f64,
    pub central_differences: bool,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            lambda_init: 1e-3,
            lambda_up: 10.0,
            lambda_down: 10.0,
            max_iterations: 200,
            relative_cost_tolerance: 1e-8,
            step_tolerance: 1e-10,
            jacobian_step: 1e-6,
            central_differences: false,
        }
    }
}

impl LmOptions {
    fn validate(&self) -> Result<()> {
        let positive = [
            self.lambda_init,
            self.lambda_up,
            self.lambda_down,
            self.relative_cost_tolerance,
            self.step_tolerance,
            self.jacobian_step,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) || self.max_iterations == 0 {
            return Err(Error::InvalidParameter("LM options must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    CostTolerance,
    StepTolerance,
    ZeroCost,
    MaxIterations,
    /// Damping grew without finding a decreasing step.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Half the sum of squared residuals at the returned point.
    pub final_cost: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Cost at the start and after every accepted step.
    pub cost_trace: Vec<f64>,
    pub residual_count: usize,
}

impl FitReport {
    pub fn rmse(&self) -> f64 {
        if self.residual_count == 0 {
            0.0
        } else {
            (2.0 * self.final_cost / self.residual_count as f64).sqrt()
        }
    }
}

fn cost_of(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

fn all_finite(r: &[f64]) -> bool {
    r.iter().all(|v| v.is_finite())
}

/// Finite-difference Jacobian of `f` at `x`, rows = residuals, columns = parameters.
pub fn finite_difference_jacobian<F>(f: &mut F, x: &[f64], r0: &[f64], rel_step: f64, central: bool) -> DMatrix<f64>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let m = r0.len();
    let n = x.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = rel_step * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        let rp = f(&xp);
        if central {
            xp[j] = x[j] - h;
            let rm = f(&xp);
            if all_finite(&rp) && all_finite(&rm) && rp.len() == m && rm.len() == m {
                for i in 0..m {
                    jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
                }
            }
        } else if all_finite(&rp) && rp.len() == m {
            for i in 0..m {
                jac[(i, j)] = (rp[i] - r0[i]) / h;
            }
        } else {
            // try the backward side before giving up on this column
            xp[j] = x[j] - h;
            let rm = f(&xp);
            if all_finite(&rm) && rm.len() == m {
                for i in 0..m {
                    jac[(i, j)] = (r0[i] - rm[i]) / h;
                }
            }
        }
        xp[j] = x[j];
    }
    jac
}

fn solve_damped(a: &DMatrix<f64>, g: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let n = a.nrows();
    let max_diag = (0..n).map(|i| a[(i, i)]).fold(0.0f64, f64::max);
    let floor = 1e-12 * max_diag.max(1e-300);
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] += lambda * a[(i, i)].max(floor);
    }
    let rhs = -g;
    if let Some(chol) = m.clone().cholesky() {
        let d = chol.solve(&rhs);
        if d.iter().all(|v| v.is_finite()) {
            return Some(d);
        }
    }
    let d = m.svd(true, true).solve(&rhs, 1e-14 * max_diag.max(1e-300)).ok()?;
    d.iter().all(|v| v.is_finite()).then_some(d)
}

/// Minimizes `0.5 * |r(x)|^2` by damped Gauss-Newton. Steps are accepted only when
/// the cost decreases; rejected or non-finite trial points raise the damping.
pub fn levenberg_marquardt<F>(mut residual_fn: F, x0: &[f64], opts: &LmOptions) -> Result<(Vec<f64>, FitReport)>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    opts.validate()?;
    let mut x = x0.to_vec();
    let mut r = residual_fn(&x);
    if !all_finite(&r) || !all_finite(&x) {
        return Err(Error::Numeric("residuals are not finite at the initial point".into()));
    }
    let m = r.len();
    let mut cost = cost_of(&r);
    let mut trace = vec![cost];
    let mut lambda = opts.lambda_init;
    let mut iterations = 0;
    let mut termination = Termination::MaxIterations;

    if cost == 0.0 {
        termination = Termination::ZeroCost;
    } else {
        'outer: while iterations < opts.max_iterations {
            iterations += 1;
            let jac = finite_difference_jacobian(&mut residual_fn, &x, &r, opts.jacobian_step, opts.central_differences);
            let rv = DVector::from_column_slice(&r);
            let a = jac.transpose() * &jac;
            let g = jac.transpose() * rv;
            loop {
                let Some(delta) = solve_damped(&a, &g, lambda) else {
                    lambda *= opts.lambda_up;
                    if lambda > 1e20 {
                        termination = Termination::Stalled;
                        break 'outer;
                    }
                    continue;
                };
                let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if delta.norm() <= opts.step_tolerance * (xnorm + opts.step_tolerance) {
                    termination = Termination::StepTolerance;
                    break 'outer;
                }
                let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
                let rt = residual_fn(&trial);
                let ct = if all_finite(&rt) && rt.len() == m { cost_of(&rt) } else { f64::INFINITY };
                if ct < cost {
                    let drop = cost - ct;
                    // reduction predicted by the local quadratic model
                    let predicted = -(g.dot(&delta) + 0.5 * delta.dot(&(&a * &delta)));
                    x = trial;
                    r = rt;
                    cost = ct;
                    trace.push(cost);
                    // a model that predicts the drop almost exactly earns a much
                    // smaller damping, so linear problems finish in Gauss-Newton steps
                    let gain = drop / predicted;
                    let shrink = if (gain - 1.0).abs() < 1e-3 { opts.lambda_down.powi(3) } else { opts.lambda_down };
                    lambda = (lambda / shrink).max(1e-15);
                    if cost == 0.0 {
                        termination = Termination::ZeroCost;
                        break 'outer;
                    }
                    if drop <= opts.relative_cost_tolerance * (cost + drop) {
                        termination = Termination::CostTolerance;
                        break 'outer;
                    }
                    break;
                }
                lambda *= opts.lambda_up;
                if lambda > 1e20 {
                    termination = Termination::Stalled;
                    break 'outer;
                }
            }
        }
    }

    let converged = !matches!(termination, Termination::MaxIterations);
    Ok((
        x,
        FitReport {
            final_cost: cost,
            iterations,
            converged,
            termination,
            cost_trace: trace,
            residual_count: m,
        },
    ))
}
