//! BFGS ascent with a backtracking (Armijo) line search.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

#[derive(Debug, Clone)]
pub(crate) struct AscentOptions {
    pub max_iter: usize,
    /// Converged when max |∇f| is below this ...
    pub grad_tol: f64,
    /// ... and the last accepted step changed f by less than this, relative.
    pub rel_change_tol: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct AscentOutcome {
    pub theta: Vec<f64>,
    pub value: f64,
    pub grad: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;
/// Relative gains below this count as no progress ...
const STALL_REL_GAIN: f64 = 1e-12;
/// ... and this many in a row end the quasi-Newton phase.
const STALL_ITERS: usize = 3;
/// Loss in f a polishing step may incur, relative to max(1, |f|). Sums of
/// many large log-gamma terms carry round-off far above machine epsilon.
const POLISH_F_SLACK: f64 = 1e-8;

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Maximizes `f`. `f(θ, grad)` returns f(θ) and writes ∇f(θ) into `grad`.
/// `curvature(θ)` may supply an approximation of (−∇²f)⁻¹ used to (re)start
/// the inverse Hessian; when it returns `None` a scaled identity is used.
pub(crate) fn maximize<F, C>(mut f: F, mut curvature: C, theta0: Vec<f64>, opts: &AscentOptions) -> AscentOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
    C: FnMut(&[f64]) -> Option<DMatrix<f64>>,
{
    let n = theta0.len();
    let mut x = DVector::from_vec(theta0);
    let mut g = vec![0.0; n];
    let mut fx = f(x.as_slice(), &mut g);
    let mut h = restart(&mut curvature, x.as_slice(), &g);
    let mut g_new = vec![0.0; n];
    let mut last_change = f64::INFINITY;
    let mut fresh_restart = true;
    let mut stalled = 0;

    for iter in 0..opts.max_iter {
        if max_abs(&g) < opts.grad_tol && last_change <= opts.rel_change_tol {
            return AscentOutcome {
                theta: x.as_slice().to_vec(),
                value: fx,
                grad: g,
                iterations: iter,
                converged: true,
            };
        }
        let gv = DVector::from_column_slice(&g);
        let mut dir = &h * &gv;
        let mut slope = gv.dot(&dir);
        if !(slope > 0.0) {
            h = identity_scaled(&g);
            dir = &h * &gv;
            slope = gv.dot(&dir);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial = &x + &dir * step;
            let ft = f(trial.as_slice(), &mut g_new);
            if ft.is_finite() && g_new.iter().all(|v| v.is_finite()) && ft >= fx + ARMIJO_C1 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }

        let Some((x_new, f_new)) = accepted else {
            if fresh_restart {
                // No ascent possible even along a fresh curvature model:
                // we are at the floating-point resolution of f.
                let converged = max_abs(&g) < opts.grad_tol;
                return AscentOutcome {
                    theta: x.as_slice().to_vec(),
                    value: fx,
                    grad: g,
                    iterations: iter,
                    converged,
                };
            }
            h = restart(&mut curvature, x.as_slice(), &g);
            fresh_restart = true;
            continue;
        };
        fresh_restart = false;

        let s = &x_new - &x;
        // gradient of −f changes by −(g_new − g)
        let yv = DVector::from_iterator(n, g.iter().zip(&g_new).map(|(a, b)| a - b));
        let sy = s.dot(&yv);
        if sy > 1e-12 * s.norm() * yv.norm() {
            let rho = 1.0 / sy;
            let hy = &h * &yv;
            let yhy = yv.dot(&hy);
            // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ, expanded
            h += (&s * s.transpose()) * (rho * rho * yhy + rho);
            h -= (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }

        last_change = (f_new - fx).abs() / fx.abs().max(1.0);
        stalled = if (f_new - fx) / fx.abs().max(1.0) < STALL_REL_GAIN { stalled + 1 } else { 0 };
        x = x_new;
        fx = f_new;
        core::mem::swap(&mut g, &mut g_new);
        if stalled >= STALL_ITERS {
            let converged = max_abs(&g) < opts.grad_tol && last_change <= opts.rel_change_tol;
            return AscentOutcome {
                theta: x.as_slice().to_vec(),
                value: fx,
                grad: g,
                iterations: iter + 1,
                converged,
            };
        }
    }

    let converged = max_abs(&g) < opts.grad_tol && last_change <= opts.rel_change_tol;
    AscentOutcome {
        theta: x.as_slice().to_vec(),
        value: fx,
        grad: g,
        iterations: opts.max_iter,
        converged,
    }
}

/// Newton iterations θ ← θ + (−∇²f)⁻¹∇f judged by the gradient, for the
/// last digits where f itself no longer resolves progress. A step is kept
/// if it shrinks max |∇f| without lowering f by more than round-off.
pub(crate) fn newton_polish<F, I>(mut f: F, mut inv_curvature: I, start: AscentOutcome, opts: &AscentOptions) -> AscentOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
    I: FnMut(&[f64]) -> Option<DMatrix<f64>>,
{
    const POLISH_STEPS: usize = 25;
    let mut cur = start;
    let mut g_new = vec![0.0; cur.theta.len()];
    for _ in 0..POLISH_STEPS {
        if max_abs(&cur.grad) < opts.grad_tol {
            cur.converged = true;
            return cur;
        }
        if cur.iterations >= opts.max_iter {
            break;
        }
        let Some(h) = inv_curvature(&cur.theta) else {
            return cur;
        };
        let dir = &h * DVector::from_column_slice(&cur.grad);
        let noise = POLISH_F_SLACK * cur.value.abs().max(1.0);
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let trial: Vec<f64> = cur.theta.iter().zip(dir.iter()).map(|(t, d)| t + step * d).collect();
            let ft = f(&trial, &mut g_new);
            if ft.is_finite() && ft >= cur.value - noise && max_abs(&g_new) < max_abs(&cur.grad) {
                cur.theta = trial;
                cur.value = ft;
                core::mem::swap(&mut cur.grad, &mut g_new);
                cur.iterations += 1;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            return cur;
        }
    }
    cur.converged = max_abs(&cur.grad) < opts.grad_tol;
    cur
}

fn restart<C>(curvature: &mut C, x: &[f64], g: &[f64]) -> DMatrix<f64>
where
    C: FnMut(&[f64]) -> Option<DMatrix<f64>>,
{
    curvature(x).unwrap_or_else(|| identity_scaled(g))
}

fn identity_scaled(g: &[f64]) -> DMatrix<f64> {
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    DMatrix::identity(g.len(), g.len()) / norm.max(1.0)
}
