use std::collections::HashMap;

use super::point::{check_finite, ComplexScalar, ProjectivePoint};
use crate::{Error, Result};

/// Exponent vectors of a fixed degree in graded-lexicographic order
/// (`x0^d` first, `x_n^d` last). For two variables index `j` is `x^{d-j} y^j`.
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    nvars: usize,
    degree: usize,
    exps: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

fn push_exponents(nvars: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == nvars {
        prefix.push(remaining);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for e in (0..=remaining).rev() {
        prefix.push(e);
        push_exponents(nvars, remaining - e, prefix, out);
        prefix.pop();
    }
}

impl MonomialBasis {
    pub fn new(nvars: usize, degree: usize) -> Self {
        assert!(nvars >= 1);
        let mut exps = Vec::new();
        push_exponents(nvars, degree as u32, &mut Vec::with_capacity(nvars), &mut exps);
        let index = exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        Self { nvars, degree, exps, index }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exps
    }

    pub fn index_of(&self, alpha: &[u32]) -> Option<usize> {
        self.index.get(alpha).copied()
    }
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// `d! / (α_0! ⋯ α_n!)`.
pub fn multinomial(alpha: &[u32]) -> f64 {
    let mut total = 0usize;
    let mut acc = 1.0;
    for &a in alpha {
        for i in 1..=a as usize {
            total += 1;
            acc *= total as f64 / i as f64;
        }
    }
    acc.round()
}

/// `∏ x_i^{α_i}`.
pub fn monomial_value(x: &[ComplexScalar], alpha: &[u32]) -> ComplexScalar {
    x.iter().zip(alpha).fold(ComplexScalar::new(1.0, 0.0), |acc, (xi, &a)| acc * xi.powu(a))
}

/// A homogeneous form of degree `d` in `n + 1` variables.
///
/// Coefficients are stored densely against [`MonomialBasis`]; `c_α` is the
/// coefficient of the monomial `x^α` itself (no multinomial scaling).
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousForm {
    n: usize,
    d: usize,
    coeffs: Vec<ComplexScalar>,
    real: bool,
}

impl HomogeneousForm {
    /// Dense constructor against `MonomialBasis::new(n + 1, d)`.
    pub fn from_dense(n: usize, d: usize, coeffs: Vec<ComplexScalar>) -> Result<Self> {
        if d == 0 {
            return Err(Error::DegreeOutOfRange { k: 0, lo: 1, hi: usize::MAX });
        }
        let expected = binomial(n + d, n) as usize;
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: coeffs.len() });
        }
        check_finite(&coeffs, "form coefficients")?;
        if coeffs.iter().all(|c| *c == ComplexScalar::new(0.0, 0.0)) {
            return Err(Error::ZeroForm);
        }
        let real = coeffs.iter().all(|c| c.im == 0.0);
        Ok(Self { n, d, coeffs, real })
    }

    pub fn from_real_dense(n: usize, d: usize, coeffs: &[f64]) -> Result<Self> {
        Self::from_dense(n, d, coeffs.iter().map(|&x| ComplexScalar::new(x, 0.0)).collect())
    }

    /// Sparse constructor; repeated exponent vectors are summed.
    pub fn from_terms<I>(n: usize, d: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, ComplexScalar)>,
    {
        let basis = MonomialBasis::new(n + 1, d);
        let mut coeffs = vec![ComplexScalar::new(0.0, 0.0); basis.len()];
        for (alpha, c) in terms {
            let i = basis.index_of(&alpha).filter(|_| alpha.len() == n + 1).ok_or_else(|| Error::InvalidExponent {
                alpha: alpha.clone(),
                nvars: n + 1,
                degree: d,
            })?;
            coeffs[i] += c;
        }
        Self::from_dense(n, d, coeffs)
    }

    /// Binary form from scaled coefficients: `f = Σ C(d,i) a_i x^{d-i} y^i`.
    pub fn binary_from_scaled(a: &[f64]) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::DegreeOutOfRange { k: 0, lo: 1, hi: usize::MAX });
        }
        let d = a.len() - 1;
        let coeffs: Vec<f64> = a.iter().enumerate().map(|(i, &ai)| binomial(d, i) * ai).collect();
        Self::from_real_dense(1, d, &coeffs)
    }

    /// `(Σ ℓ_i x_i)^d` for a raw coefficient vector `ℓ`.
    pub fn linear_power(ell: &[ComplexScalar], d: usize) -> Result<Self> {
        check_finite(ell, "linear form")?;
        if ell.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        let basis = MonomialBasis::new(ell.len(), d);
        let coeffs = basis.exponents().iter().map(|alpha| monomial_value(ell, alpha) * multinomial(alpha)).collect();
        Self::from_dense(ell.len() - 1, d, coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn nvars(&self) -> usize {
        self.n + 1
    }

    pub fn basis(&self) -> MonomialBasis {
        MonomialBasis::new(self.n + 1, self.d)
    }

    pub fn coeffs(&self) -> &[ComplexScalar] {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: &[u32]) -> ComplexScalar {
        self.basis().index_of(alpha).map_or(ComplexScalar::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn real_coeffs(&self) -> Option<Vec<f64>> {
        self.real.then(|| self.coeffs.iter().map(|c| c.re).collect())
    }

    /// Evaluates at the canonical representative of `p`.
    pub fn evaluate(&self, p: &ProjectivePoint) -> Result<ComplexScalar> {
        self.evaluate_raw(p.coords())
    }

    pub fn evaluate_raw(&self, x: &[ComplexScalar]) -> Result<ComplexScalar> {
        if x.len() != self.nvars() {
            return Err(Error::DimensionMismatch { expected: self.nvars(), found: x.len() });
        }
        let basis = self.basis();
        Ok(basis.exponents().iter().zip(&self.coeffs).map(|(alpha, c)| c * monomial_value(x, alpha)).sum())
    }

    /// Coefficients divided by `sqrt(multinomial)`; the Euclidean norm of
    /// this vector is the Bombieri norm.
    pub fn bombieri_coeffs(&self) -> Vec<ComplexScalar> {
        self.basis().exponents().iter().zip(&self.coeffs).map(|(alpha, c)| c / multinomial(alpha).sqrt()).collect()
    }

    pub fn bombieri_norm(&self) -> f64 {
        self.bombieri_coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Binary forms only: the `a_i` with `f = Σ C(d,i) a_i x^{d-i} y^i`.
    pub fn binary_scaled(&self) -> Option<Vec<ComplexScalar>> {
        (self.n == 1).then(|| self.coeffs.iter().enumerate().map(|(i, c)| c / binomial(self.d, i)).collect())
    }

    pub fn scale(&self, s: f64) -> Result<Self> {
        Self::from_dense(self.n, self.d, self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Bombieri distance to another form of the same shape, relative to `self`.
    pub fn relative_distance(&self, other: &Self) -> f64 {
        assert_eq!((self.n, self.d), (other.n, other.d), "shape mismatch");
        let diff: f64 = self
            .bombieri_coeffs()
            .iter()
            .zip(other.bombieri_coeffs())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        diff / self.bombieri_norm()
    }
}

/// `ℓ^d` for the canonical representative of `ell`. Real iff `ell` is real.
pub fn power_of_linear_form(ell: &ProjectivePoint, d: usize) -> Result<HomogeneousForm> {
    if d == 0 {
        return Err(Error::DegreeOutOfRange { k: 0, lo: 1, hi: usize::MAX });
    }
    HomogeneousForm::linear_power(ell.coords(), d)
}
