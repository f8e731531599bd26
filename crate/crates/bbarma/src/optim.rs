//! Dense BFGS minimizer with a strong-Wolfe line search.
//!
//! The objective returns `None` for non-finite values (clamped means, extreme
//! precision); the line search treats those points as +∞ and backs off, which
//! keeps iterates inside the valid region without hard constraints.

use nalgebra::{DMatrix, DVector};

const ARMIJO_C1: f64 = 1e-4;
const CURVATURE_C2: f64 = 0.9;
const STEP_TOL: f64 = 1e-10;

pub struct BfgsResult {
    pub x: DVector<f64>,
    pub value: f64,
    pub grad: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
}

struct Probe {
    step: f64,
    value: f64,
    slope: f64,
    x: DVector<f64>,
    grad: DVector<f64>,
}

/// Minimize `objective` from `x0`.
///
/// `objective` returns (value, gradient) or `None` outside the domain.
/// `accept` decides convergence from (x, value, gradient); it is checked after
/// every iterate so that callers can apply problem-specific gradient scales.
/// `scale0` sets the initial inverse Hessian to `scale0 * I`.
pub fn minimize<F, A>(
    mut objective: F,
    x0: DVector<f64>,
    scale0: f64,
    max_iters: usize,
    mut accept: A,
) -> BfgsResult
where
    F: FnMut(&DVector<f64>) -> Option<(f64, DVector<f64>)>,
    A: FnMut(&DVector<f64>, f64, &DVector<f64>) -> bool,
{
    let dim = x0.len();
    let (mut value, mut grad) = match objective(&x0) {
        Some(fg) => fg,
        None => {
            return BfgsResult {
                x: x0,
                value: f64::INFINITY,
                grad: DVector::zeros(dim),
                iterations: 0,
                converged: false,
            }
        }
    };
    let mut x = x0;
    let mut inv_hessian = DMatrix::identity(dim, dim) * scale0;
    let mut just_reset = true;

    for iter in 0..max_iters {
        if accept(&x, value, &grad) {
            return BfgsResult {
                x,
                value,
                grad,
                iterations: iter,
                converged: true,
            };
        }
        let mut direction = -(&inv_hessian * &grad);
        let mut slope = grad.dot(&direction);
        if !slope.is_finite() || slope >= 0.0 {
            // Stale curvature; fall back to steepest descent.
            inv_hessian = DMatrix::identity(dim, dim) * scale0;
            direction = -grad.clone() * scale0;
            slope = grad.dot(&direction);
            just_reset = true;
            if slope >= 0.0 {
                break;
            }
        }

        match line_search(&mut objective, &x, &direction, value, slope) {
            Some(probe) => {
                let step_vec = &probe.x - &x;
                let grad_diff = &probe.grad - &grad;
                let sy = step_vec.dot(&grad_diff);
                let step_norm = step_vec.norm();
                x = probe.x;
                value = probe.value;
                grad = probe.grad;
                if sy > 1e-12 * step_vec.norm() * grad_diff.norm() {
                    if just_reset {
                        // Scale the seed matrix before the first update
                        // (Nocedal & Wright eq. 6.20).
                        let scale = sy / grad_diff.dot(&grad_diff);
                        if scale.is_finite() && scale > 0.0 {
                            inv_hessian = DMatrix::identity(dim, dim) * scale;
                        }
                        just_reset = false;
                    }
                    bfgs_update(&mut inv_hessian, &step_vec, &grad_diff, sy);
                }
                if step_norm <= STEP_TOL {
                    return BfgsResult {
                        x,
                        value,
                        grad,
                        iterations: iter + 1,
                        converged: true,
                    };
                }
            }
            None => {
                if just_reset {
                    // Even steepest descent cannot improve; give up.
                    break;
                }
                inv_hessian = DMatrix::identity(dim, dim) * scale0;
                just_reset = true;
            }
        }
    }
    let converged = accept(&x, value, &grad);
    BfgsResult {
        x,
        value,
        grad,
        iterations: max_iters,
        converged,
    }
}

fn bfgs_update(inv_hessian: &mut DMatrix<f64>, s: &DVector<f64>, y: &DVector<f64>, sy: f64) {
    let rho = 1.0 / sy;
    let hy = &*inv_hessian * y;
    let yhy = y.dot(&hy);
    // H <- (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ, expanded to rank-two form.
    let c = rho * rho * yhy + rho;
    inv_hessian.ger(c, s, s, 1.0);
    inv_hessian.ger(-rho, &hy, s, 1.0);
    inv_hessian.ger(-rho, s, &hy, 1.0);
}

/// Strong-Wolfe line search (Nocedal & Wright alg. 3.5/3.6) with bisection
/// safeguards; non-finite trial values shrink the bracket.
fn line_search<F>(
    objective: &mut F,
    x: &DVector<f64>,
    direction: &DVector<f64>,
    f0: f64,
    slope0: f64,
) -> Option<Probe>
where
    F: FnMut(&DVector<f64>) -> Option<(f64, DVector<f64>)>,
{
    let eval = |objective: &mut F, step: f64| -> Option<Probe> {
        let xt = x + direction * step;
        objective(&xt).map(|(value, grad)| {
            let slope = grad.dot(direction);
            Probe {
                step,
                value,
                slope,
                x: xt,
                grad,
            }
        })
    };

    let mut prev_step = 0.0;
    let mut prev_value = f0;
    let mut step = 1.0;
    let mut lo: Option<Probe> = None;
    let mut hi_step = f64::INFINITY;

    for _ in 0..30 {
        match eval(objective, step) {
            None => {
                // Out of domain: shrink toward the last valid point.
                hi_step = step;
                step = 0.5 * (prev_step + step);
                if step <= STEP_TOL {
                    return None;
                }
            }
            Some(probe) => {
                if probe.value > f0 + ARMIJO_C1 * probe.step * slope0 || probe.value >= prev_value && prev_step > 0.0 {
                    let lo_probe = match lo.take() {
                        Some(p) if p.step == prev_step => p,
                        _ => match eval(objective, prev_step) {
                            Some(p) => p,
                            None => return None,
                        },
                    };
                    return zoom(objective, eval, f0, slope0, lo_probe, probe);
                }
                if probe.slope.abs() <= -CURVATURE_C2 * slope0 {
                    return Some(probe);
                }
                if probe.slope >= 0.0 {
                    let lo_probe = match lo.take() {
                        Some(p) if p.step == prev_step => p,
                        _ => match eval(objective, prev_step) {
                            Some(p) => p,
                            None => return None,
                        },
                    };
                    return zoom(objective, eval, f0, slope0, probe, lo_probe);
                }
                prev_step = probe.step;
                prev_value = probe.value;
                lo = Some(probe);
                let next = (step * 2.0).min(0.5 * (step + hi_step));
                if !next.is_finite() || next <= step {
                    break;
                }
                step = next;
            }
        }
    }
    lo.filter(|p| p.value < f0)
}

fn zoom<F, E>(
    objective: &mut F,
    eval: E,
    f0: f64,
    slope0: f64,
    mut lo: Probe,
    mut hi: Probe,
) -> Option<Probe>
where
    F: FnMut(&DVector<f64>) -> Option<(f64, DVector<f64>)>,
    E: Fn(&mut F, f64) -> Option<Probe>,
{
    for _ in 0..40 {
        let step = if (hi.step - lo.step).abs() < 1e-14 {
            return if lo.value < f0 { Some(lo) } else { None };
        } else {
            // Quadratic interpolation using lo's value/slope and hi's value,
            // safeguarded toward bisection.
            let d = hi.step - lo.step;
            let denom = hi.value - lo.value - lo.slope * d;
            let quad = if denom.abs() > 1e-300 {
                lo.step - 0.5 * lo.slope * d * d / denom
            } else {
                f64::NAN
            };
            let mid = 0.5 * (lo.step + hi.step);
            let lo_s = lo.step.min(hi.step);
            let hi_s = lo.step.max(hi.step);
            let margin = 0.1 * (hi_s - lo_s);
            if quad.is_finite() && quad > lo_s + margin && quad < hi_s - margin {
                quad
            } else {
                mid
            }
        };
        match eval(objective, step) {
            None => {
                hi = Probe {
                    step,
                    value: f64::INFINITY,
                    slope: 0.0,
                    x: lo.x.clone(),
                    grad: lo.grad.clone(),
                };
            }
            Some(probe) => {
                if probe.value > f0 + ARMIJO_C1 * probe.step * slope0 || probe.value >= lo.value {
                    hi = probe;
                } else {
                    if probe.slope.abs() <= -CURVATURE_C2 * slope0 {
                        return Some(probe);
                    }
                    if probe.slope * (hi.step - lo.step) >= 0.0 {
                        hi = Probe {
                            step: lo.step,
                            value: lo.value,
                            slope: lo.slope,
                            x: lo.x.clone(),
                            grad: lo.grad.clone(),
                        };
                    }
                    lo = probe;
                }
            }
        }
    }
    if lo.value < f0 {
        Some(lo)
    } else {
        None
    }
}
