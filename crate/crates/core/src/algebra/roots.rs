use std::f64::consts::PI;

use nalgebra::{linalg::balancing::balance_parlett_reinsch, DMatrix, Schur};

use super::point::ComplexScalar;
use crate::labels::Label;
use crate::{Error, Result};

/// Evaluates `Σ c_i z^i` (ascending coefficients) and its derivative.
fn horner(c: &[f64], z: ComplexScalar) -> (ComplexScalar, ComplexScalar) {
    let mut p = ComplexScalar::new(0.0, 0.0);
    let mut dp = ComplexScalar::new(0.0, 0.0);
    for &ci in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ci;
    }
    (p, dp)
}

/// `|p(z)| / Σ |c_i| |z|^i`, the componentwise backward error of a root.
pub fn root_backward_error(c: &[f64], z: ComplexScalar) -> f64 {
    let (p, _) = horner(c, z);
    let r = z.norm();
    let scale: f64 = c.iter().rev().fold(0.0, |acc, ci| acc * r + ci.abs());
    if scale == 0.0 {
        0.0
    } else {
        p.norm() / scale
    }
}

/// All complex roots of `c[0] + c[1] t + … + c[m] t^m`, with multiplicity.
///
/// Exact zeros at the top are trimmed; a nonzero constant has no roots.
/// Roots are eigenvalues of the balanced companion matrix, each followed by
/// one Newton step that is kept only if it lowers `|p|`.
pub fn univariate_roots(c: &[f64]) -> Result<Vec<ComplexScalar>> {
    if c.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("polynomial coefficients"));
    }
    let m = match c.iter().rposition(|&x| x != 0.0) {
        None => return Err(Error::ZeroPolynomial),
        Some(m) => m,
    };
    let c = &c[..=m];
    if m == 0 {
        return Ok(Vec::new());
    }
    if m == 1 {
        return Ok(vec![ComplexScalar::new(-c[0] / c[1], 0.0)]);
    }
    let lead = c[m];
    let mut companion = DMatrix::<f64>::zeros(m, m);
    for i in 1..m {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..m {
        companion[(i, m - 1)] = -c[i] / lead;
    }
    balance_parlett_reinsch(&mut companion);
    let schur = Schur::try_new(companion, f64::EPSILON, 10_000).ok_or(Error::EigenFailure)?;
    let roots = schur
        .complex_eigenvalues()
        .iter()
        .map(|&z| {
            let (p, dp) = horner(c, z);
            if dp.norm() == 0.0 {
                return z;
            }
            let z1 = z - p / dp;
            if horner(c, z1).0.norm() < p.norm() {
                z1
            } else {
                z
            }
        })
        .collect();
    Ok(roots)
}

/// Real roots and conjugate pairs of a real polynomial's root multiset.
#[derive(Debug, Clone, PartialEq)]
pub struct RootPartition {
    pub real: Vec<f64>,
    /// One member of each pair, the one with positive imaginary part.
    pub pairs: Vec<ComplexScalar>,
    pub label: Label,
}

/// Splits roots of a real polynomial into real roots and conjugate pairs.
///
/// A root is real when `|im| ≤ tau_real (1 + |z|)`. Every other root is
/// greedily matched with the nearest unmatched root to its conjugate; a
/// partner farther than `tau_pair (1 + |z|)` is a [`Error::PairingFailure`].
pub fn pair_conjugate_roots(roots: &[ComplexScalar], tau_real: f64, tau_pair: f64) -> Result<RootPartition> {
    let mut real = Vec::new();
    let mut complex = Vec::new();
    for &z in roots {
        if z.im.abs() <= tau_real * (1.0 + z.norm()) {
            real.push(z.re);
        } else {
            complex.push(z);
        }
    }
    let mut used = vec![false; complex.len()];
    let mut pairs = Vec::new();
    for i in 0..complex.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let z = complex[i];
        let target = z.conj();
        let best = (0..complex.len())
            .filter(|&j| !used[j])
            .map(|j| (j, (complex[j] - target).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((j, dist)) if dist <= tau_pair * (1.0 + z.norm()) => {
                used[j] = true;
                // Symmetrize: average z with the conjugate of its partner.
                let rep = (z + complex[j].conj()) * 0.5;
                pairs.push(if rep.im > 0.0 { rep } else { rep.conj() });
            }
            Some((_, dist)) => return Err(Error::PairingFailure { distance: dist }),
            None => return Err(Error::PairingFailure { distance: f64::INFINITY }),
        }
    }
    let label = Label::new(pairs.len(), real.len())?;
    Ok(RootPartition { real, pairs, label })
}

fn binary_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Roots of a real binary form, computed in a rotated affine chart.
///
/// The chart is `(x, y) = (c t - s, s t + c)` for a real rotation chosen so
/// that no root sits at infinity. Because the rotation is real, conjugate
/// pairs of chart roots correspond to conjugate pairs of points.
#[derive(Debug, Clone)]
pub struct BinaryRoots {
    pub chart_roots: Vec<ComplexScalar>,
    pub cos: f64,
    pub sin: f64,
}

impl BinaryRoots {
    /// Homogeneous coordinates of the point at chart parameter `t`.
    pub fn point(&self, t: ComplexScalar) -> [ComplexScalar; 2] {
        [t * self.cos - self.sin, t * self.sin + self.cos]
    }

    pub fn real_point(&self, t: f64) -> [f64; 2] {
        [t * self.cos - self.sin, t * self.sin + self.cos]
    }
}

/// Evaluates `Σ g_j x^{k-j} y^j`.
pub fn eval_binary(g: &[f64], x: f64, y: f64) -> f64 {
    let k = g.len() - 1;
    g.iter().enumerate().map(|(j, gj)| gj * x.powi((k - j) as i32) * y.powi(j as i32)).sum()
}

/// Roots of the binary form `Σ g_j X^{k-j} Y^j` (`g.len() = k + 1`).
pub fn binary_roots(g: &[f64]) -> Result<BinaryRoots> {
    if g.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroPolynomial);
    }
    let k = g.len() - 1;
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    // Identity chart unless the leading coefficient is small.
    let theta = if eval_binary(g, 1.0, 0.0).abs() >= 0.1 * norm {
        0.0
    } else {
        let samples = 4 * k + 3;
        (0..samples)
            .map(|m| PI * m as f64 / samples as f64)
            .map(|t| (t, eval_binary(g, t.cos(), t.sin()).abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(t, _)| t)
            .unwrap_or(0.0)
    };
    let (sin, cos) = theta.sin_cos();
    let rotated = if theta == 0.0 {
        g.to_vec()
    } else {
        let mut acc = vec![0.0; k + 1];
        for (j, &gj) in g.iter().enumerate() {
            if gj == 0.0 {
                continue;
            }
            let mut term = vec![gj];
            for _ in 0..(k - j) {
                term = binary_mul(&term, &[cos, -sin]);
            }
            for _ in 0..j {
                term = binary_mul(&term, &[sin, cos]);
            }
            for (a, t) in acc.iter_mut().zip(term) {
                *a += t;
            }
        }
        acc
    };
    // X' = t, Y' = 1: coefficient of t^{k-j} is rotated[j].
    let ascending: Vec<f64> = rotated.iter().rev().cloned().collect();
    let chart_roots = univariate_roots(&ascending)?;
    Ok(BinaryRoots { chart_roots, cos, sin })
}
