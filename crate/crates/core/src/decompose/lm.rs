//! Damped Gauss–Newton over the labeled objective with per-point projective
//! gauge fixing.

use nalgebra::{DMatrix, DVector};

use super::objective::{Layout, Model};
use super::NLSConfig;
use crate::algebra::ComplexScalar;
use crate::Result;

/// Relative residual at which iteration stops early.
const POLISH_TOL: f64 = 1e-14;
const LAMBDA_MAX: f64 = 1e16;
const LAMBDA_MIN: f64 = 1e-15;
const STALL_WINDOW: usize = 40;

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub x: Vec<f64>,
    pub relative: f64,
    pub iterations: usize,
    /// Residual norm after each accepted step, preceded by the initial one.
    pub history: Vec<f64>,
}

/// Pivot coordinate for every point, in parameter order (real points, then pairs).
fn pivots(lay: &Layout, x: &[f64]) -> Vec<usize> {
    let mut out = Vec::with_capacity(lay.a + lay.b);
    for i in 0..lay.b {
        let s = lay.real_point(i);
        out.push(argmax((0..lay.nv).map(|k| x[s + k].abs())));
    }
    for j in 0..lay.a {
        let s = lay.pair_point(j);
        out.push(argmax((0..lay.nv).map(|k| x[s + k].hypot(x[s + lay.nv + k]))));
    }
    out
}

fn argmax(it: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in it.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Rescales every point so its largest coordinate is exactly one, moving the
/// scale into the coefficient. The model is unchanged.
pub(crate) fn gauge(lay: &Layout, d: usize, x: &mut [f64]) -> Vec<usize> {
    let piv = pivots(lay, x);
    for i in 0..lay.b {
        let s = lay.real_point(i);
        let c = x[s + piv[i]];
        for k in 0..lay.nv {
            x[s + k] /= c;
        }
        x[s + piv[i]] = 1.0;
        x[lay.real_coeff(i)] *= c.powi(d as i32);
    }
    for j in 0..lay.a {
        let s = lay.pair_point(j);
        let k0 = piv[lay.b + j];
        let c = ComplexScalar::new(x[s + k0], x[s + lay.nv + k0]);
        let inv = c.inv();
        for k in 0..lay.nv {
            let z = ComplexScalar::new(x[s + k], x[s + lay.nv + k]) * inv;
            x[s + k] = z.re;
            x[s + lay.nv + k] = z.im;
        }
        x[s + k0] = 1.0;
        x[s + lay.nv + k0] = 0.0;
        let cc = lay.pair_coeff(j);
        let mu = ComplexScalar::new(x[cc], x[cc + 1]) * c.powu(d as u32);
        x[cc] = mu.re;
        x[cc + 1] = mu.im;
    }
    piv
}

fn free_indices(lay: &Layout, piv: &[usize]) -> Vec<usize> {
    let mut frozen = vec![false; lay.len()];
    for i in 0..lay.b {
        frozen[lay.real_point(i) + piv[i]] = true;
    }
    for j in 0..lay.a {
        let s = lay.pair_point(j);
        frozen[s + piv[lay.b + j]] = true;
        frozen[s + lay.nv + piv[lay.b + j]] = true;
    }
    (0..lay.len()).filter(|&i| !frozen[i]).collect()
}

fn needs_regauge(lay: &Layout, x: &[f64], piv: &[usize]) -> bool {
    let now = pivots(lay, x);
    now.iter().zip(piv).enumerate().any(|(p, (&new, &old))| {
        if new == old {
            return false;
        }
        let (s, im) = if p < lay.b { (lay.real_point(p), None) } else { (lay.pair_point(p - lay.b), Some(lay.nv)) };
        let modulus = |k: usize| match im {
            None => x[s + k].abs(),
            Some(off) => x[s + k].hypot(x[s + off + k]),
        };
        modulus(new) > 1.5 * modulus(old)
    })
}

/// Replaces the coefficient block by the linear least-squares optimum for
/// the current points.
pub(crate) fn fit_coefficients<M: Model>(obj: &M, x: &mut [f64]) -> Result<()> {
    let lay = obj.layout();
    let range = lay.coeff_range();
    for i in range.clone() {
        x[i] = 0.0;
    }
    let (r0, jac) = obj.residual_and_jacobian(x)?;
    let a = jac.columns(range.start, range.len()).into_owned();
    let (c, _) = crate::algebra::least_squares(&a, &(-r0), 1e-13);
    for (i, v) in range.zip(c.iter()) {
        x[i] = *v;
    }
    Ok(())
}

pub fn levenberg_marquardt<M: Model>(obj: &M, x0: Vec<f64>, cfg: &NLSConfig) -> Result<LmOutcome> {
    let lay = obj.layout();
    let d = obj.d();
    let mut x = x0;
    let mut piv = gauge(&lay, d, &mut x);
    let mut free = free_indices(&lay, &piv);
    let (mut r, mut jac) = obj.residual_and_jacobian(&x)?;
    let mut norm = r.norm();
    let scale = obj.target_norm();
    let mut lambda = cfg.lambda_init;
    let mut history = vec![norm];
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        if norm / scale <= POLISH_TOL {
            break;
        }
        iterations += 1;
        let jf = DMatrix::from_fn(jac.nrows(), free.len(), |i, c| jac[(i, free[c])]);
        let g: DVector<f64> = jf.transpose() * &r;
        if g.amax() <= cfg.gradient_tol * scale * scale {
            break;
        }
        let a = jf.transpose() * &jf;
        let dmax = a.diagonal().max().max(f64::MIN_POSITIVE);
        let mut accepted = false;
        while lambda <= LAMBDA_MAX {
            let mut m = a.clone();
            for i in 0..m.nrows() {
                m[(i, i)] += lambda * a[(i, i)].max(1e-12 * dmax);
            }
            let Some(chol) = m.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let mut trial = x.clone();
            for (c, &idx) in free.iter().enumerate() {
                trial[idx] += step[c];
            }
            let r_new = match obj.residual(&trial) {
                Ok(r) => r,
                Err(_) => {
                    lambda *= 4.0;
                    continue;
                }
            };
            if r_new.norm() < norm {
                x = trial;
                lambda = (lambda / 3.0).max(LAMBDA_MIN);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            break;
        }
        if needs_regauge(&lay, &x, &piv) {
            piv = gauge(&lay, d, &mut x);
            free = free_indices(&lay, &piv);
        }
        let (r_new, jac_new) = obj.residual_and_jacobian(&x)?;
        r = r_new;
        jac = jac_new;
        norm = r.norm();
        history.push(norm);
        if history.len() > STALL_WINDOW {
            let past = history[history.len() - 1 - STALL_WINDOW];
            if norm > 0.9 * past && norm / scale > cfg.residual_tol {
                break;
            }
        }
    }
    gauge(&lay, d, &mut x);
    let relative = obj.residual(&x)?.norm() / scale;
    Ok(LmOutcome { x, relative, iterations, history })
}
