//! Residual and analytic Jacobian of the labeled Waring objective
//! `f - Σ λ_i ℓ_{p_i}^d - Σ 2 Re(μ_j ℓ_{q_j}^d)` in the Bombieri-scaled
//! coefficient basis.
//!
//! Parameter layout, all real:
//!
//! | block | length |
//! |---|---|
//! | real point coordinates | `b (n+1)` |
//! | pair points, `Re` coords then `Im` coords per pair | `2a (n+1)` |
//! | real coefficients `λ_i` | `b` |
//! | pair coefficients `(Re μ_j, Im μ_j)` | `2a` |

use nalgebra::{DMatrix, DVector};

use crate::algebra::{multinomial, ComplexScalar, HomogeneousForm, MonomialBasis};
use crate::labels::Label;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Objective {
    n: usize,
    d: usize,
    template: Label,
    exps: Vec<Vec<u32>>,
    sqrt_m: Vec<f64>,
    target: Vec<f64>,
    target_norm: f64,
}

/// Index arithmetic for the parameter vector.
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub nv: usize,
    pub a: usize,
    pub b: usize,
}

impl Layout {
    pub fn new(nv: usize, template: Label) -> Self {
        Self { nv, a: template.a(), b: template.b() }
    }

    pub fn len(&self) -> usize {
        self.b * self.nv + 2 * self.a * self.nv + self.b + 2 * self.a
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn real_point(&self, i: usize) -> usize {
        i * self.nv
    }

    /// Start of the real parts of pair `j`; imaginary parts follow at `+ nv`.
    pub fn pair_point(&self, j: usize) -> usize {
        self.b * self.nv + 2 * j * self.nv
    }

    pub fn real_coeff(&self, i: usize) -> usize {
        self.b * self.nv + 2 * self.a * self.nv + i
    }

    pub fn pair_coeff(&self, j: usize) -> usize {
        self.real_coeff(self.b) + 2 * j
    }

    pub fn coeff_range(&self) -> std::ops::Range<usize> {
        self.real_coeff(0)..self.len()
    }
}

/// `x_k^e` for `e = 0..=d`, per coordinate.
fn power_table(x: &[ComplexScalar], d: usize) -> Vec<Vec<ComplexScalar>> {
    x.iter()
        .map(|&xk| {
            let mut row = Vec::with_capacity(d + 1);
            let mut acc = ComplexScalar::new(1.0, 0.0);
            for _ in 0..=d {
                row.push(acc);
                acc *= xk;
            }
            row
        })
        .collect()
}

/// Monomial value and its partial derivatives in every coordinate.
fn monomial_and_grad(pw: &[Vec<ComplexScalar>], alpha: &[u32], grad: &mut [ComplexScalar]) -> ComplexScalar {
    let mut value = ComplexScalar::new(1.0, 0.0);
    for (k, &e) in alpha.iter().enumerate() {
        value *= pw[k][e as usize];
    }
    for (k, g) in grad.iter_mut().enumerate() {
        let e = alpha[k] as usize;
        if e == 0 {
            *g = ComplexScalar::new(0.0, 0.0);
            continue;
        }
        let mut acc = pw[k][e - 1] * e as f64;
        for (m, &em) in alpha.iter().enumerate() {
            if m != k {
                acc *= pw[m][em as usize];
            }
        }
        *g = acc;
    }
    value
}

impl Objective {
    pub fn new(f: &HomogeneousForm, template: Label) -> Result<Self> {
        let coeffs = f.real_coeffs().ok_or_else(|| Error::Invalid("target form must be real".into()))?;
        Ok(Self::with_target(f.n(), f.d(), template, &coeffs))
    }

    /// Objective against the given monomial coefficients, which may be zero.
    pub(crate) fn with_target(n: usize, d: usize, template: Label, coeffs: &[f64]) -> Self {
        let basis = MonomialBasis::new(n + 1, d);
        let exps = basis.exponents().to_vec();
        let sqrt_m: Vec<f64> = exps.iter().map(|a| multinomial(a).sqrt()).collect();
        let target: Vec<f64> = coeffs.iter().zip(&sqrt_m).map(|(c, s)| c / s).collect();
        let target_norm = target.iter().map(|x| x * x).sum::<f64>().sqrt();
        Self { n, d, template, exps, sqrt_m, target, target_norm }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn template(&self) -> Label {
        self.template
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.n + 1, self.template)
    }

    pub fn residual_count(&self) -> usize {
        self.exps.len()
    }

    /// Bombieri norm of the target.
    pub fn target_norm(&self) -> f64 {
        self.target_norm
    }

    fn check(&self, x: &[f64]) -> Result<Layout> {
        let lay = self.layout();
        if x.len() != lay.len() {
            return Err(Error::ShapeMismatch { expected: lay.len(), found: x.len() });
        }
        Ok(lay)
    }

    pub(crate) fn pair_coords(&self, x: &[f64], j: usize) -> Vec<ComplexScalar> {
        let lay = self.layout();
        let s = lay.pair_point(j);
        (0..lay.nv).map(|k| ComplexScalar::new(x[s + k], x[s + lay.nv + k])).collect()
    }

    pub(crate) fn real_coords(&self, x: &[f64], i: usize) -> Vec<ComplexScalar> {
        let lay = self.layout();
        let s = lay.real_point(i);
        (0..lay.nv).map(|k| ComplexScalar::new(x[s + k], 0.0)).collect()
    }

    pub fn residual(&self, x: &[f64]) -> Result<DVector<f64>> {
        Ok(self.evaluate(x, false)?.0)
    }

    /// Residual `model - f` and its Jacobian with respect to every parameter.
    pub fn residual_and_jacobian(&self, x: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let (r, j) = self.evaluate(x, true)?;
        Ok((r, j.expect("jacobian requested")))
    }

    fn evaluate(&self, x: &[f64], want_jac: bool) -> Result<(DVector<f64>, Option<DMatrix<f64>>)> {
        let lay = self.check(x)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("parameters"));
        }
        let rows = self.exps.len();
        let mut r = DVector::from_iterator(rows, self.target.iter().map(|t| -t));
        let mut jac = want_jac.then(|| DMatrix::<f64>::zeros(rows, lay.len()));
        let mut grad = vec![ComplexScalar::new(0.0, 0.0); lay.nv];

        for i in 0..lay.b {
            let pw = power_table(&self.real_coords(x, i), self.d);
            let lam = x[lay.real_coeff(i)];
            let p0 = lay.real_point(i);
            for (row, alpha) in self.exps.iter().enumerate() {
                let s = self.sqrt_m[row];
                let v = monomial_and_grad(&pw, alpha, &mut grad).re;
                r[row] += s * lam * v;
                if let Some(jac) = jac.as_mut() {
                    jac[(row, lay.real_coeff(i))] = s * v;
                    for k in 0..lay.nv {
                        jac[(row, p0 + k)] = s * lam * grad[k].re;
                    }
                }
            }
        }
        for j in 0..lay.a {
            let pw = power_table(&self.pair_coords(x, j), self.d);
            let c0 = lay.pair_coeff(j);
            let mu = ComplexScalar::new(x[c0], x[c0 + 1]);
            let p0 = lay.pair_point(j);
            for (row, alpha) in self.exps.iter().enumerate() {
                let s = self.sqrt_m[row];
                let v = monomial_and_grad(&pw, alpha, &mut grad);
                r[row] += 2.0 * s * (mu * v).re;
                if let Some(jac) = jac.as_mut() {
                    jac[(row, c0)] = 2.0 * s * v.re;
                    jac[(row, c0 + 1)] = -2.0 * s * v.im;
                    for k in 0..lay.nv {
                        let w = mu * grad[k];
                        jac[(row, p0 + k)] = 2.0 * s * w.re;
                        jac[(row, p0 + lay.nv + k)] = -2.0 * s * w.im;
                    }
                }
            }
        }
        Ok((r, jac))
    }

    /// Relative residual `‖r‖ / ‖f‖`.
    pub fn relative(&self, r: &DVector<f64>) -> f64 {
        r.norm() / self.target_norm
    }
}

/// Interface the damped Gauss–Newton driver needs from a model.
pub trait Model {
    fn layout(&self) -> Layout;
    fn d(&self) -> usize;
    fn target_norm(&self) -> f64;
    fn residual(&self, x: &[f64]) -> Result<DVector<f64>>;
    fn residual_and_jacobian(&self, x: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)>;
}

impl Model for Objective {
    fn layout(&self) -> Layout {
        Objective::layout(self)
    }
    fn d(&self) -> usize {
        self.d
    }
    fn target_norm(&self) -> f64 {
        self.target_norm
    }
    fn residual(&self, x: &[f64]) -> Result<DVector<f64>> {
        Objective::residual(self, x)
    }
    fn residual_and_jacobian(&self, x: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        Objective::residual_and_jacobian(self, x)
    }
}

/// Unstructured complex model `Σ c_j ℓ_{q_j}^d` with `k` complex points and
/// complex coefficients. It shares the pair layout of label `(k, 0)`;
/// residual rows are the real parts followed by the imaginary parts.
#[derive(Debug, Clone)]
pub struct ComplexObjective {
    inner: Objective,
}

impl ComplexObjective {
    pub fn new(f: &HomogeneousForm, k: usize) -> Result<Self> {
        Ok(Self { inner: Objective::new(f, Label::new(k, 0)?)? })
    }

    pub fn points(&self, x: &[f64]) -> Vec<Vec<ComplexScalar>> {
        (0..self.inner.template.a()).map(|j| self.inner.pair_coords(x, j)).collect()
    }

    fn evaluate(&self, x: &[f64], want_jac: bool) -> Result<(DVector<f64>, Option<DMatrix<f64>>)> {
        let o = &self.inner;
        let lay = o.check(x)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("parameters"));
        }
        let rows = o.exps.len();
        let mut r = DVector::zeros(2 * rows);
        for (i, t) in o.target.iter().enumerate() {
            r[i] = -t;
        }
        let mut jac = want_jac.then(|| DMatrix::<f64>::zeros(2 * rows, lay.len()));
        let mut grad = vec![ComplexScalar::new(0.0, 0.0); lay.nv];
        for j in 0..lay.a {
            let pw = power_table(&o.pair_coords(x, j), o.d);
            let c0 = lay.pair_coeff(j);
            let c = ComplexScalar::new(x[c0], x[c0 + 1]);
            let p0 = lay.pair_point(j);
            for (row, alpha) in o.exps.iter().enumerate() {
                let s = o.sqrt_m[row];
                let v = monomial_and_grad(&pw, alpha, &mut grad) * s;
                let m = c * v;
                r[row] += m.re;
                r[rows + row] += m.im;
                if let Some(jac) = jac.as_mut() {
                    jac[(row, c0)] = v.re;
                    jac[(rows + row, c0)] = v.im;
                    jac[(row, c0 + 1)] = -v.im;
                    jac[(rows + row, c0 + 1)] = v.re;
                    for k in 0..lay.nv {
                        let w = c * grad[k] * s;
                        jac[(row, p0 + k)] = w.re;
                        jac[(rows + row, p0 + k)] = w.im;
                        jac[(row, p0 + lay.nv + k)] = -w.im;
                        jac[(rows + row, p0 + lay.nv + k)] = w.re;
                    }
                }
            }
        }
        Ok((r, jac))
    }
}

impl Model for ComplexObjective {
    fn layout(&self) -> Layout {
        self.inner.layout()
    }
    fn d(&self) -> usize {
        self.inner.d
    }
    fn target_norm(&self) -> f64 {
        self.inner.target_norm
    }
    fn residual(&self, x: &[f64]) -> Result<DVector<f64>> {
        Ok(self.evaluate(x, false)?.0)
    }
    fn residual_and_jacobian(&self, x: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let (r, j) = self.evaluate(x, true)?;
        Ok((r, j.expect("jacobian requested")))
    }
}

/// Free-function form: residual vector and Jacobian of `model - f`.
pub fn residual_and_gradient(
    f: &HomogeneousForm,
    template: Label,
    params: &[f64],
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    Objective::new(f, template)?.residual_and_jacobian(params)
}
