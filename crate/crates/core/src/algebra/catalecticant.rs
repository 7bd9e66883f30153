use nalgebra::{ComplexField, DMatrix, DVector};

use super::form::{binomial, factorial, HomogeneousForm, MonomialBasis};
use super::point::ComplexScalar;
use crate::{Error, Result};

const REFINE_STEPS: usize = 3;

/// Apolarity pairing matrix of a form in bidegree `(d - k, k)`.
///
/// Rows are indexed by degree `d - k` monomials and columns by degree `k`
/// monomials, both in graded-lex order. Binary forms use the Hankel matrix
/// `M[i][j] = a_{i+j}` of scaled coefficients; forms in three or more
/// variables use `c_{β+γ} (β+γ)! / (β! γ!)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalecticantMatrix {
    k: usize,
    matrix: DMatrix<ComplexScalar>,
}

impl CatalecticantMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> &DMatrix<ComplexScalar> {
        &self.matrix
    }

    pub fn shape(&self) -> (usize, usize) {
        self.matrix.shape()
    }

    /// The real part, when every entry is exactly real.
    pub fn real_matrix(&self) -> Option<DMatrix<f64>> {
        self.matrix.iter().all(|z| z.im == 0.0).then(|| self.matrix.map(|z| z.re))
    }

    pub fn numeric_rank(&self, tol: f64) -> usize {
        match self.real_matrix() {
            Some(m) => numeric_rank(&m, tol),
            None => numeric_rank(&self.matrix, tol),
        }
    }
}

pub fn catalecticant(f: &HomogeneousForm, k: usize) -> Result<CatalecticantMatrix> {
    if k == 0 || k >= f.d() {
        return Err(Error::DegreeOutOfRange { k, lo: 1, hi: f.d().saturating_sub(1) });
    }
    Ok(catalecticant_any(f, k))
}

/// Like [`catalecticant`] but admits the degenerate bidegrees `k = 0` and `k = d`.
pub(crate) fn catalecticant_any(f: &HomogeneousForm, k: usize) -> CatalecticantMatrix {
    let d = f.d();
    assert!(k <= d);
    let matrix = if f.n() == 1 {
        let a = f.binary_scaled().expect("binary form");
        DMatrix::from_fn(d - k + 1, k + 1, |i, j| a[i + j])
    } else {
        let nv = f.nvars();
        let full = f.basis();
        let rows = MonomialBasis::new(nv, d - k);
        let cols = MonomialBasis::new(nv, k);
        let fact = |e: &[u32]| e.iter().map(|&x| factorial(x)).product::<f64>();
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
            let beta = &rows.exponents()[i];
            let gamma = &cols.exponents()[j];
            let sum: Vec<u32> = beta.iter().zip(gamma).map(|(a, b)| a + b).collect();
            let c = f.coeffs()[full.index_of(&sum).expect("exponent of degree d")];
            c * (fact(&sum) / (fact(beta) * fact(gamma)))
        })
    };
    CatalecticantMatrix { k, matrix }
}

/// Dimensions `C(n+d-k, n) × C(n+k, n)`.
pub fn catalecticant_shape(n: usize, d: usize, k: usize) -> (usize, usize) {
    (binomial(n + d - k, n) as usize, binomial(n + k, n) as usize)
}

/// Number of singular values above `tol` times the largest one.
pub fn numeric_rank<T>(m: &DMatrix<T>, tol: f64) -> usize
where
    T: ComplexField<RealField = f64>,
{
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * max).count()
}

/// Orthonormal basis of the right kernel of a real matrix, as columns.
///
/// Directions whose singular value is at most `tol` times the largest count
/// as kernel. Wide matrices are padded with zero rows so the full right
/// singular basis is available.
pub fn real_kernel(m: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let (r, c) = m.shape();
    if c == 0 {
        return Vec::new();
    }
    let padded = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut out = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if max == 0.0 || s <= tol * max {
            out.push(v_t.row(i).transpose());
        }
    }
    out
}

/// Least-squares solution of `a x ≈ b` through the SVD, followed by a few
/// steps of iterative refinement against the original matrix.
///
/// Returns the minimum-norm solution and whether `a` was numerically rank
/// deficient at `rank_tol`.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>, rank_tol: f64) -> (DVector<f64>, bool) {
    if a.ncols() == 0 {
        return (DVector::zeros(0), false);
    }
    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let rank = svd.singular_values.iter().filter(|&&s| s > rank_tol * max).count();
    let cutoff = (max * 1e-13).max(f64::MIN_POSITIVE);
    let mut x = svd.solve(b, cutoff).expect("U and V^T were computed");
    let normal = |x: &DVector<f64>| (a.transpose() * (b - a * x)).norm();
    let mut best = normal(&x);
    for _ in 0..REFINE_STEPS {
        if best == 0.0 {
            break;
        }
        let r = b - a * &x;
        let dx = svd.solve(&r, cutoff).expect("U and V^T were computed");
        let trial = &x + dx;
        let g = normal(&trial);
        if g.is_nan() || g >= best {
            break;
        }
        x = trial;
        best = g;
    }
    (x, rank < a.ncols())
}
