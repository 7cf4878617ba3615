//! Quasi-Newton minimization with finite-difference gradients.
//!
//! BFGS on the inverse Hessian with a backtracking Armijo line search.
//! Gradients are central differences (no analytic derivatives anywhere in
//! the crate), so objectives only need to be evaluable. Non-finite
//! objective values are treated as +inf, which lets callers encode
//! constraint violations as NaN without special-casing the optimizer.
//!
//! Convergence is declared when the relative improvement of the objective
//! falls below `rel_tol` or the gradient max-norm falls below `grad_tol`.
//! Callers that need a certified optimum should re-check the returned
//! gradient against their own tolerance.

use nalgebra::{DMatrix, DVector};

/// Cube root of machine epsilon: near-optimal step for central first
/// differences of a twice-differentiable objective.
const STEP_GRAD: f64 = 6.055454452393343e-6;
/// Fourth root of machine epsilon: step for central second differences.
const STEP_HESS: f64 = 1.220703125e-4;

#[derive(Debug, Clone, Copy)]
pub struct OptimOptions {
    pub max_iter: usize,
    /// Stop when (f_prev - f) <= rel_tol * (|f_prev| + 1e-12).
    pub rel_tol: f64,
    /// Stop when the gradient max-norm is below this.
    pub grad_tol: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        OptimOptions { max_iter: 400, rel_tol: 1e-9, grad_tol: 1e-7 }
    }
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_max_norm: f64,
    pub iterations: usize,
    /// True when an improvement- or gradient-based stop fired (as opposed
    /// to hitting max_iter or a failed line search from a fresh Hessian).
    pub converged: bool,
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// Central-difference gradient with per-coordinate relative steps.
pub fn central_gradient(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = STEP_GRAD * x[i].abs().max(1.0);
        let orig = xp[i];
        xp[i] = orig + h;
        let fp = finite_or_inf(f(&xp));
        xp[i] = orig - h;
        let fm = finite_or_inf(f(&xp));
        xp[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Central-difference Hessian (symmetric 4-point stencil off-diagonal).
///
/// `scale_floor` guards the relative step for parameters sitting near
/// zero, e.g. a leverage coefficient estimated at the boundary.
pub fn central_hessian(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x: &[f64],
    scale_floor: f64,
) -> DMatrix<f64> {
    let n = x.len();
    let f0 = finite_or_inf(f(x));
    let h: Vec<f64> = x.iter().map(|v| STEP_HESS * v.abs().max(scale_floor)).collect();
    let mut hess = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for i in 0..n {
        xp[i] = x[i] + h[i];
        let fp = finite_or_inf(f(&xp));
        xp[i] = x[i] - h[i];
        let fm = finite_or_inf(f(&xp));
        xp[i] = x[i];
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            xp[i] = x[i] + h[i];
            xp[j] = x[j] + h[j];
            let fpp = finite_or_inf(f(&xp));
            xp[j] = x[j] - h[j];
            let fpm = finite_or_inf(f(&xp));
            xp[i] = x[i] - h[i];
            let fmm = finite_or_inf(f(&xp));
            xp[j] = x[j] + h[j];
            let fmp = finite_or_inf(f(&xp));
            xp[i] = x[i];
            xp[j] = x[j];
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}

/// Minimize `f` from `x0` by BFGS. The objective is evaluated as-is; NaN
/// and infinities are treated as +inf (rejected by the line search).
pub fn minimize(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: &OptimOptions,
) -> OptimResult {
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut fx = finite_or_inf(f(x.as_slice()));
    if n == 0 || !fx.is_finite() {
        // nothing to optimize or infeasible start; report as-is
        return OptimResult {
            x: x0.to_vec(),
            f: fx,
            grad_max_norm: f64::INFINITY,
            iterations: 0,
            converged: n == 0,
        };
    }

    let mut hinv = DMatrix::<f64>::identity(n, n);
    let mut g = DVector::from_vec(central_gradient(f, x.as_slice()));
    let mut converged = false;
    let mut iterations = 0;
    let mut fresh_hessian = true; // identity scaling in effect

    for iter in 0..opts.max_iter {
        iterations = iter + 1;
        let gnorm = g.amax();
        if gnorm <= opts.grad_tol {
            converged = true;
            break;
        }

        let mut dir = -(&hinv * &g);
        let mut slope = dir.dot(&g);
        if slope >= 0.0 || !slope.is_finite() {
            // curvature information went bad; restart from steepest descent
            hinv = DMatrix::identity(n, n);
            fresh_hessian = true;
            dir = -g.clone();
            slope = dir.dot(&g);
        }

        // backtracking Armijo search
        let mut step = 1.0;
        let mut x_new = &x + &dir * step;
        let mut f_new = finite_or_inf(f(x_new.as_slice()));
        let c1 = 1e-4;
        let mut ok = false;
        for _ in 0..60 {
            if f_new <= fx + c1 * step * slope {
                ok = true;
                break;
            }
            step *= 0.5;
            x_new = &x + &dir * step;
            f_new = finite_or_inf(f(x_new.as_slice()));
        }
        if !ok {
            if fresh_hessian {
                // no progress possible even along -g: treat as converged
                // if the improvement test would fire, otherwise give up
                converged = gnorm <= opts.grad_tol * 10.0;
                break;
            }
            hinv = DMatrix::identity(n, n);
            fresh_hessian = true;
            continue;
        }

        let g_new = DVector::from_vec(central_gradient(f, x_new.as_slice()));
        let s = &x_new - &x;
        let yv = &g_new - &g;
        let sy = s.dot(&yv);
        if sy > 1e-12 * s.norm() * yv.norm() {
            if fresh_hessian {
                // scale initial inverse Hessian (Nocedal & Wright 6.20)
                let scale = sy / yv.dot(&yv);
                if scale.is_finite() && scale > 0.0 {
                    hinv = DMatrix::identity(n, n) * scale;
                }
            }
            let rho = 1.0 / sy;
            // H <- (I - rho s y') H (I - rho y s') + rho s s'
            let hy = &hinv * &yv;
            let yhy = yv.dot(&hy);
            // expanded form avoids building the rank-one projectors
            let ss = &s * s.transpose();
            let hys = &hy * s.transpose();
            hinv = &hinv - (&hys + hys.transpose()) * rho + &ss * (rho * rho * yhy + rho);
            fresh_hessian = false;
        }

        let improvement = fx - f_new;
        x = x_new;
        g = g_new;
        fx = f_new;
        if improvement <= opts.rel_tol * (fx.abs() + 1e-12) {
            converged = true;
            break;
        }
    }

    OptimResult {
        grad_max_norm: g.amax(),
        x: x.as_slice().to_vec(),
        f: fx,
        iterations,
        converged,
    }
}
