//! Quasi-Newton minimization with backtracking line search, plus the
//! finite-difference helpers used for gradients, Hessians, and standard
//! errors.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Options for [`minimize`].
#[derive(Debug, Clone)]
pub struct OptimOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub step_tol: f64,
    /// Number of jittered restarts attempted when a run fails to converge.
    pub restarts: usize,
    pub jitter_scale: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        OptimOptions {
            max_iter: 500,
            grad_tol: 1e-6,
            step_tol: 1e-12,
            restarts: 3,
            jitter_scale: 0.5,
        }
    }
}

/// Result of a minimization run.
#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value per iteration.
    pub trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// BFGS with Armijo backtracking. `grad` may be `None`, in which case central
/// finite differences of `f` are used.
fn bfgs_once<F, G>(f: &F, grad: &Option<G>, x0: &[f64], opts: &OptimOptions) -> OptimResult
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let eval_grad = |x: &[f64]| -> Vec<f64> {
        match grad {
            Some(g) => g(x),
            None => numeric_gradient(f, x),
        }
    };
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut g = eval_grad(&x);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut trace = vec![fx];
    let mut converged = false;
    let mut iter = 0;
    if !fx.is_finite() {
        return OptimResult {
            x,
            f: fx,
            grad_norm: f64::INFINITY,
            iterations: 0,
            converged: false,
            trace,
        };
    }
    while iter < opts.max_iter {
        iter += 1;
        if inf_norm(&g) < opts.grad_tol * fx.abs().max(1.0) {
            converged = true;
            break;
        }
        // direction d = -H g
        let gv = nalgebra::DVector::from_column_slice(&g);
        let dv = -(&h * &gv);
        let mut d: Vec<f64> = dv.iter().copied().collect();
        let mut slope = dot(&d, &g);
        if !(slope < 0.0) || !slope.is_finite() {
            // reset to steepest descent when curvature info degenerates
            h = DMatrix::identity(n, n);
            d = g.iter().map(|v| -v).collect();
            slope = dot(&d, &g);
        }
        // backtracking Armijo search
        let mut step = 1.0;
        let mut x_new;
        let mut f_new;
        let mut ok = false;
        loop {
            x_new = x
                .iter()
                .zip(&d)
                .map(|(xi, di)| xi + step * di)
                .collect::<Vec<_>>();
            f_new = f(&x_new);
            if f_new.is_finite() && f_new <= fx + 1e-4 * step * slope {
                ok = true;
                break;
            }
            step *= 0.5;
            if step < 1e-20 {
                break;
            }
        }
        if !ok {
            break;
        }
        let g_new = eval_grad(&x_new);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * inf_norm(&s) * inf_norm(&y).max(1e-300) {
            // BFGS update: H <- (I - s y'/sy) H (I - y s'/sy) + s s'/sy
            let sv = nalgebra::DVector::from_column_slice(&s);
            let yv = nalgebra::DVector::from_column_slice(&y);
            let rho = 1.0 / sy;
            let i = DMatrix::<f64>::identity(n, n);
            let a = &i - rho * (&sv * yv.transpose());
            h = &a * h * a.transpose() + rho * (&sv * sv.transpose());
        }
        let step_inf = inf_norm(&s);
        x = x_new;
        fx = f_new;
        g = g_new;
        trace.push(fx);
        if step_inf < opts.step_tol * inf_norm(&x).max(1.0) {
            converged = inf_norm(&g) < 1e-3 * fx.abs().max(1.0);
            break;
        }
    }
    if !converged && inf_norm(&g) < opts.grad_tol * fx.abs().max(1.0) {
        converged = true;
    }
    OptimResult {
        x,
        f: fx,
        grad_norm: inf_norm(&g),
        iterations: iter,
        converged,
        trace,
    }
}

/// Minimize `f` from `x0`, retrying from jittered starts when a run fails to
/// converge. Returns the best converged result, or `NonConvergence` carrying
/// the trace of the best attempt.
pub fn minimize<F, G>(f: F, grad: Option<G>, x0: &[f64], opts: &OptimOptions) -> Result<OptimResult>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let mut best: Option<OptimResult> = None;
    // deterministic jitter offsets; first attempt is the caller's start
    let mut starts = vec![x0.to_vec()];
    for r in 0..opts.restarts {
        let jitter: Vec<f64> = x0
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let u = (((r * 37 + i * 101 + 17) % 97) as f64 / 96.0 - 0.5) * 2.0;
                v + opts.jitter_scale * u
            })
            .collect();
        starts.push(jitter);
    }
    for s in &starts {
        let res = bfgs_once(&f, &grad, s, opts);
        let better = match &best {
            None => true,
            Some(b) => {
                (res.converged && !b.converged) || (res.converged == b.converged && res.f < b.f)
            }
        };
        if better {
            best = Some(res);
        }
        if best.as_ref().map(|b| b.converged).unwrap_or(false) {
            break;
        }
    }
    let best = best.expect("at least one start");
    if best.converged {
        Ok(best)
    } else {
        Err(Error::NonConvergence {
            iterations: best.iterations,
            grad_norm: best.grad_norm,
            trace: best.trace,
        })
    }
}

/// Central finite-difference gradient with relative step 1e-6.
pub fn numeric_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-6 * x[i].abs().max(1.0);
        xp[i] = x[i] + h;
        let up = f(&xp);
        xp[i] = x[i] - h;
        let dn = f(&xp);
        xp[i] = x[i];
        g[i] = (up - dn) / (2.0 * h);
    }
    g
}

/// Central finite-difference Hessian with step max(1e-5, 1e-4·|xᵢ|).
pub fn numeric_hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let h: Vec<f64> = x.iter().map(|v| (1e-4 * v.abs()).max(1e-5)).collect();
    let mut out = vec![vec![0.0; n]; n];
    let f0 = f(x);
    let mut xp = x.to_vec();
    for i in 0..n {
        // diagonal: (f(x+h) - 2 f(x) + f(x-h)) / h^2
        xp[i] = x[i] + h[i];
        let up = f(&xp);
        xp[i] = x[i] - h[i];
        let dn = f(&xp);
        xp[i] = x[i];
        out[i][i] = (up - 2.0 * f0 + dn) / (h[i] * h[i]);
        for j in (i + 1)..n {
            xp[i] = x[i] + h[i];
            xp[j] = x[j] + h[j];
            let pp = f(&xp);
            xp[j] = x[j] - h[j];
            let pm = f(&xp);
            xp[i] = x[i] - h[i];
            xp[j] = x[j] + h[j];
            let mp = f(&xp);
            xp[j] = x[j] - h[j];
            let mm = f(&xp);
            xp[i] = x[i];
            xp[j] = x[j];
            let v = (pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

/// Inverse of a small dense matrix; `None` when singular.
pub fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let dm = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    dm.try_inverse().map(|inv| {
        (0..n)
            .map(|i| (0..n).map(|j| inv[(i, j)]).collect())
            .collect()
    })
}

/// Standard errors from the observed information: sqrt of the diagonal of the
/// inverse Hessian of the negative log-likelihood at the optimum.
pub fn standard_errors(hessian: &[Vec<f64>]) -> Option<Vec<f64>> {
    invert(hessian).map(|inv| {
        inv.iter()
            .enumerate()
            .map(|(i, row)| row[i].max(0.0).sqrt())
            .collect()
    })
}
