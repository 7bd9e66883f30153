//! Algebraic starting points for ternary forms of odd degree `d = 2m+1`.
//!
//! The Koszul flattening `Y_f : S^m V* ⊗ V → S^m V ⊗ Λ²V` sends
//! `∂^β ⊗ e_k` to `Σ_j ∂_j ∂^β f ⊗ e_j ∧ e_k`. A power `ℓ^d` gives a map of
//! rank two whose kernel is the set of degree-`m` vector fields `φ` with
//! `φ(ℓ) ∥ ℓ`. For a general weight-`w` decomposition the kernel of `Y_f`
//! therefore consists of vector fields having all `w` points as
//! eigenvectors, and the minors `x_a φ_b - x_b φ_a` cut out the points.
//! The points are read off from the eigenvectors of multiplication
//! operators on the quotient ring in degrees `m+1` and `m+2`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{ComplexScalar, HomogeneousForm, MonomialBasis};

const GAP_TOL: f64 = 1e-8;

fn falling(top: &[u32], bottom: &[u32]) -> f64 {
    top.iter().zip(bottom).map(|(&t, &b)| ((b + 1)..=t).map(f64::from).product::<f64>()).product()
}

/// The Koszul flattening as a dense real matrix, or `None` when `f` is not
/// a real ternary form of odd degree at least 3.
pub fn koszul_flattening(f: &HomogeneousForm) -> Option<DMatrix<f64>> {
    let d = f.d();
    if f.n() != 2 || d < 3 || d.is_multiple_of(2) {
        return None;
    }
    let coeffs = f.real_coeffs()?;
    let m = (d - 1) / 2;
    let full = f.basis();
    let sm = MonomialBasis::new(3, m);
    let nm = sm.len();
    let mut y = DMatrix::zeros(3 * nm, 3 * nm);
    for (bi, beta) in sm.exponents().iter().enumerate() {
        for k in 0..3 {
            let col = 3 * bi + k;
            for j in 0..3 {
                if j == k {
                    continue;
                }
                let row_pair = match (j.min(k), j.max(k)) {
                    (0, 1) => 0,
                    (0, 2) => 1,
                    _ => 2,
                };
                let sign = if j < k { 1.0 } else { -1.0 };
                for (gi, gamma) in sm.exponents().iter().enumerate() {
                    let mut alpha: Vec<u32> = gamma.iter().zip(beta).map(|(g, b)| g + b).collect();
                    alpha[j] += 1;
                    let Some(idx) = full.index_of(&alpha) else { continue };
                    let c = coeffs[idx];
                    if c != 0.0 {
                        y[(3 * gi + row_pair, col)] += sign * c * falling(&alpha, gamma);
                    }
                }
            }
        }
    }
    Some(y)
}

/// Singular values in decreasing order together with the matching columns
/// of `U`, after padding `a` with zero columns so `U` is square.
fn sorted_left_svd(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (r, c) = a.shape();
    let padded = if c < r {
        let mut p = DMatrix::zeros(r, r);
        p.view_mut((0, 0), (r, c)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(true, false);
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u = DMatrix::from_fn(r, order.len().min(r), |i, c| u[(i, order[c])]);
    (s, u)
}

fn has_rank(s: &[f64], rank: usize) -> bool {
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 || rank == 0 || rank > s.len() {
        return false;
    }
    s[rank - 1] > GAP_TOL * top && s.get(rank).is_none_or(|&v| v <= GAP_TOL * top)
}

/// Multiplication by the linear form `h` from degree `t` to degree `t+1`.
fn multiply(h: &[f64], from: &MonomialBasis, to: &MonomialBasis) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(to.len(), from.len());
    for (c, alpha) in from.exponents().iter().enumerate() {
        for (k, &hk) in h.iter().enumerate() {
            let mut beta = alpha.clone();
            beta[k] += 1;
            if let Some(r) = to.index_of(&beta) {
                m[(r, c)] += hk;
            }
        }
    }
    m
}

/// Candidate decomposition points of weight `w`, or `None` when the
/// flattening does not exhibit a clean weight-`w` structure.
pub fn flattening_points(f: &HomogeneousForm, w: usize, rng: &mut impl Rng) -> Option<Vec<Vec<ComplexScalar>>> {
    let y = koszul_flattening(f)?;
    let size = y.nrows();
    let m = (f.d() - 1) / 2;
    if w == 0 || 2 * w >= size || w > m * m + m + 1 {
        return None;
    }
    let svd = y.svd(false, true);
    let v_t = svd.v_t?;
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let s: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    if !has_rank(&s, 2 * w) {
        return None;
    }
    let kernel: Vec<DVector<f64>> = order[2 * w..].iter().map(|&i| v_t.row(i).transpose()).collect();

    let t = m + 1;
    let sm = MonomialBasis::new(3, m);
    let st = MonomialBasis::new(3, t);
    let st1 = MonomialBasis::new(3, t + 1);
    if st.len() <= w {
        return None;
    }
    let mut minors = DMatrix::zeros(st.len(), 3 * kernel.len());
    for (ki, phi) in kernel.iter().enumerate() {
        for (pi, &(a, b)) in [(0usize, 1usize), (0, 2), (1, 2)].iter().enumerate() {
            let col = 3 * ki + pi;
            for (bi, beta) in sm.exponents().iter().enumerate() {
                let mut up_a = beta.clone();
                up_a[a] += 1;
                let mut up_b = beta.clone();
                up_b[b] += 1;
                minors[(st.index_of(&up_a)?, col)] += phi[3 * bi + b];
                minors[(st.index_of(&up_b)?, col)] -= phi[3 * bi + a];
            }
        }
    }
    let (s_t, u_t) = sorted_left_svd(&minors);
    let r_t = st.len() - w;
    if !has_rank(&s_t, r_t) {
        return None;
    }
    let ideal_t = u_t.columns(0, r_t).into_owned();
    let q_t = u_t.columns(r_t, w).into_owned();

    let mut next = DMatrix::zeros(st1.len(), 3 * r_t);
    for k in 0..3 {
        let mut e = [0.0; 3];
        e[k] = 1.0;
        let block = multiply(&e, &st, &st1) * &ideal_t;
        next.columns_mut(k * r_t, r_t).copy_from(&block);
    }
    let (s_t1, u_t1) = sorted_left_svd(&next);
    let r_t1 = st1.len() - w;
    if !has_rank(&s_t1, r_t1) {
        return None;
    }
    let q_t1 = u_t1.columns(r_t1, w).into_owned();

    let op = |h: &[f64]| q_t1.transpose() * multiply(h, &st, &st1) * &q_t;
    let h0: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
    let g: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
    let a0 = op(&h0).lu();
    let tg = a0.solve(&op(&g))?;
    let coords: Vec<DMatrix<ComplexScalar>> = (0..3)
        .map(|k| {
            let mut e = [0.0; 3];
            e[k] = 1.0;
            a0.solve(&op(&e)).map(|t| t.map(|v| ComplexScalar::new(v, 0.0)))
        })
        .collect::<Option<_>>()?;

    let eig = tg.clone().schur().complex_eigenvalues();
    let tgc = tg.map(|v| ComplexScalar::new(v, 0.0));
    let scale = eig.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    for i in 0..w {
        for j in (i + 1)..w {
            if (eig[i] - eig[j]).norm() <= 1e-8 * scale {
                return None;
            }
        }
    }
    let mut points = Vec::with_capacity(w);
    for lambda in eig.iter() {
        let shifted = &tgc - DMatrix::<ComplexScalar>::identity(w, w) * *lambda;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t?;
        let smallest = (0..w).min_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]))?;
        let v: DVector<ComplexScalar> = v_t.row(smallest).adjoint();
        let denom = v.dotc(&v);
        let p: Vec<ComplexScalar> = coords.iter().map(|t| v.dotc(&(t * &v)) / denom).collect();
        if p.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return None;
        }
        points.push(p);
    }
    Some(points)
}
