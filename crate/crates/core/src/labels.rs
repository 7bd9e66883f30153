//! Labels of conjugation-invariant point sets and real-span certificates.
//!
//! A finite set `S` closed under complex conjugation with `a` conjugate pairs
//! and `b` real points has label `(a, b)` and weight `2a + b = |S|`. A real
//! target lies in the real span of `S` when it is a combination with real
//! coefficients on the real points and conjugate coefficients on each pair;
//! storing one complex coefficient per pair makes the combination real by
//! construction.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{power_of_linear_form, ComplexScalar, HomogeneousForm, ProjectivePoint};
use crate::config::Tolerances;
use crate::{Error, Result};

/// Points closer than this (chordal distance) are the same point.
pub const DISTINCT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    a: usize,
    b: usize,
}

impl Label {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == 0 && b == 0 {
            return Err(Error::InvalidLabel(0, 0));
        }
        Ok(Self { a, b })
    }

    /// Number of conjugate pairs.
    pub fn a(&self) -> usize {
        self.a
    }

    /// Number of real points.
    pub fn b(&self) -> usize {
        self.b
    }

    pub fn weight(&self) -> usize {
        weight(*self)
    }
}

pub fn weight(label: Label) -> usize {
    2 * label.a + label.b
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.a, self.b].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [a, b] = <[usize; 2]>::deserialize(d)?;
        Label::new(a, b).map_err(serde::de::Error::custom)
    }
}

/// A conjugation-invariant finite point set, split into real points and one
/// representative per conjugate pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    real_points: Vec<ProjectivePoint>,
    pairs: Vec<ProjectivePoint>,
    label: Label,
}

impl LabeledSet {
    /// Checks that the points are distinct and that each one lies on the
    /// expected side of the real locus.
    pub fn new(real_points: Vec<ProjectivePoint>, pairs: Vec<ProjectivePoint>) -> Result<Self> {
        let label = Label::new(pairs.len(), real_points.len())?;
        if real_points.iter().any(|p| !p.is_real()) || pairs.iter().any(|p| p.is_real()) {
            return Err(Error::NotSigmaInvariant);
        }
        let dim = real_points.first().or(pairs.first()).map(|p| p.dim()).unwrap_or(0);
        if let Some(p) = real_points.iter().chain(&pairs).find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim + 1, found: p.dim() + 1 });
        }
        let set = Self { real_points, pairs, label };
        let all = set.flatten();
        for i in 0..all.len() {
            for j in (i + 1)..all.len() {
                if all[i].distance(&all[j]) <= DISTINCT_TOL {
                    return Err(Error::DuplicatePoint(i, j));
                }
            }
        }
        Ok(set)
    }

    pub fn real_points(&self) -> &[ProjectivePoint] {
        &self.real_points
    }

    pub fn pairs(&self) -> &[ProjectivePoint] {
        &self.pairs
    }

    pub fn label(&self) -> Label {
        self.label
    }

    /// Ambient projective dimension.
    pub fn dim(&self) -> usize {
        self.real_points.first().or(self.pairs.first()).map(|p| p.dim()).unwrap_or(0)
    }

    /// Every point of the set: real points, then each pair followed by its conjugate.
    pub fn flatten(&self) -> Vec<ProjectivePoint> {
        let mut out = self.real_points.clone();
        for p in &self.pairs {
            out.push(p.clone());
            out.push(p.conjugate());
        }
        out
    }

    pub fn len(&self) -> usize {
        self.label.weight()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LabeledSetDoc {
    label: Label,
    real_points: Vec<Vec<f64>>,
    pairs: Vec<Vec<ComplexScalar>>,
}

impl Serialize for LabeledSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LabeledSetDoc {
            label: self.label,
            real_points: self.real_points.iter().map(|p| p.coords().iter().map(|z| z.re).collect()).collect(),
            pairs: self.pairs.iter().map(|p| p.coords().to_vec()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LabeledSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = LabeledSetDoc::deserialize(d)?;
        let real = doc.real_points.iter().map(|c| ProjectivePoint::real(c)).collect::<Result<Vec<_>>>();
        let pairs = doc.pairs.into_iter().map(ProjectivePoint::new).collect::<Result<Vec<_>>>();
        let set = LabeledSet::new(real.map_err(D::Error::custom)?, pairs.map_err(D::Error::custom)?)
            .map_err(D::Error::custom)?;
        if set.label != doc.label {
            return Err(D::Error::custom(format!("label {} does not match the points ({})", doc.label, set.label)));
        }
        Ok(set)
    }
}

/// Classifies a finite point set into real points and conjugate pairs.
pub fn label_of(points: &[ProjectivePoint], tau_real: f64, tau_pair: f64) -> Result<LabeledSet> {
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if points[i].distance(&points[j]) <= DISTINCT_TOL {
                return Err(Error::DuplicatePoint(i, j));
            }
        }
    }
    let mut real = Vec::new();
    let mut complex = Vec::new();
    for p in points {
        if p.max_imag() <= tau_real {
            real.push(ProjectivePoint::with_tolerance(p.coords().to_vec(), tau_real)?);
        } else {
            complex.push(p);
        }
    }
    let mut used = vec![false; complex.len()];
    let mut pairs = Vec::new();
    for i in 0..complex.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let conj = complex[i].conjugate();
        let partner = (0..complex.len())
            .filter(|&j| !used[j])
            .map(|j| (j, conj.distance(complex[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match partner {
            Some((j, dist)) if dist <= tau_pair => {
                used[j] = true;
                let p = ProjectivePoint::with_tolerance(complex[i].coords().to_vec(), tau_real)?;
                pairs.push(p.pair_representative(tau_real));
            }
            _ => return Err(Error::NotSigmaInvariant),
        }
    }
    LabeledSet::new(real, pairs)
}

/// Coefficients exhibiting a real target in the real span of a labeled set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanCertificate {
    /// One coefficient per real point; signs are free.
    pub real_coeffs: Vec<f64>,
    /// One coefficient `μ` per pair; the partner implicitly carries `conj(μ)`.
    pub pair_coeffs: Vec<ComplexScalar>,
    /// Relative residual of the reconstruction.
    pub residual: f64,
    /// Set when the spanning vectors were numerically dependent.
    #[serde(default)]
    pub degenerate: bool,
}

/// Assembles the real system whose columns are the real-point vectors
/// followed by `(2 Re v, -2 Im v)` for each pair vector `v`, and solves it.
fn solve_membership(
    real_cols: &[Vec<f64>],
    pair_cols: &[Vec<ComplexScalar>],
    target: &[f64],
    tol: &Tolerances,
) -> Result<SpanCertificate> {
    let rows = target.len();
    let ncols = real_cols.len() + 2 * pair_cols.len();
    let mut a = DMatrix::<f64>::zeros(rows, ncols);
    for (j, col) in real_cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            a[(i, j)] = v;
        }
    }
    let off = real_cols.len();
    for (j, col) in pair_cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            a[(i, off + 2 * j)] = 2.0 * v.re;
            a[(i, off + 2 * j + 1)] = -2.0 * v.im;
        }
    }
    let b = DVector::from_column_slice(target);
    let (x, degenerate) = crate::algebra::least_squares(&a, &b, tol.rank_tol);
    let resid = (&a * &x - &b).norm();
    let scale = b.norm();
    let residual = if scale > 0.0 { resid / scale } else { resid };
    if residual.is_nan() || residual > tol.residual_tol {
        return Err(Error::NotInSpan { residual });
    }
    Ok(SpanCertificate {
        real_coeffs: x.iter().take(off).cloned().collect(),
        pair_coeffs: (0..pair_cols.len()).map(|j| ComplexScalar::new(x[off + 2 * j], x[off + 2 * j + 1])).collect(),
        residual,
        degenerate,
    })
}

fn scaled_power(p: &ProjectivePoint, d: usize) -> Result<Vec<ComplexScalar>> {
    Ok(power_of_linear_form(p, d)?.bombieri_coeffs())
}

/// Decides whether a real form lies in the real span of `{ℓ_p^d : p ∈ S}`.
///
/// Solves a least-squares problem in the Bombieri-scaled coefficient basis
/// with unknowns `(λ_i, Re μ_j, Im μ_j)` and accepts when the relative
/// residual is at most `tol.residual_tol`.
pub fn span_membership(target: &HomogeneousForm, set: &LabeledSet, tol: &Tolerances) -> Result<SpanCertificate> {
    if !target.is_real() {
        return Err(Error::Invalid("span membership needs a real target".into()));
    }
    if set.dim() != target.n() {
        return Err(Error::DimensionMismatch { expected: target.nvars(), found: set.dim() + 1 });
    }
    let d = target.d();
    let real_cols = set
        .real_points()
        .iter()
        .map(|p| Ok(scaled_power(p, d)?.iter().map(|z| z.re).collect()))
        .collect::<Result<Vec<_>>>()?;
    let pair_cols = set.pairs().iter().map(|p| scaled_power(p, d)).collect::<Result<Vec<_>>>()?;
    let t: Vec<f64> = target.bombieri_coeffs().iter().map(|z| z.re).collect();
    solve_membership(&real_cols, &pair_cols, &t, tol)
}

/// Decides whether the canonical representative of a real point `q` lies in
/// the real span of the representatives of `S`.
pub fn span_membership_point(q: &ProjectivePoint, set: &LabeledSet, tol: &Tolerances) -> Result<SpanCertificate> {
    let target = q.real_coords().ok_or_else(|| Error::Invalid("span membership needs a real point".into()))?;
    if set.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: q.dim() + 1, found: set.dim() + 1 });
    }
    let real_cols: Vec<Vec<f64>> =
        set.real_points().iter().map(|p| p.coords().iter().map(|z| z.re).collect()).collect();
    let pair_cols: Vec<Vec<ComplexScalar>> = set.pairs().iter().map(|p| p.coords().to_vec()).collect();
    solve_membership(&real_cols, &pair_cols, &target, tol)
}

fn check_shapes(set: &LabeledSet, cert: &SpanCertificate) -> Result<()> {
    if cert.real_coeffs.len() != set.real_points().len() {
        return Err(Error::ShapeMismatch { expected: set.real_points().len(), found: cert.real_coeffs.len() });
    }
    if cert.pair_coeffs.len() != set.pairs().len() {
        return Err(Error::ShapeMismatch { expected: set.pairs().len(), found: cert.pair_coeffs.len() });
    }
    Ok(())
}

/// `Σ λ_i ℓ_{p_i}^d + Σ 2 Re(μ_j ℓ_{q_j}^d)`, exactly real by construction.
pub fn reconstruct(set: &LabeledSet, cert: &SpanCertificate, d: usize) -> Result<HomogeneousForm> {
    check_shapes(set, cert)?;
    let n = set.dim();
    let len = crate::algebra::binomial(n + d, n) as usize;
    let mut acc = vec![0.0; len];
    for (p, &lam) in set.real_points().iter().zip(&cert.real_coeffs) {
        for (a, c) in acc.iter_mut().zip(power_of_linear_form(p, d)?.coeffs()) {
            *a += lam * c.re;
        }
    }
    for (p, &mu) in set.pairs().iter().zip(&cert.pair_coeffs) {
        for (a, c) in acc.iter_mut().zip(power_of_linear_form(p, d)?.coeffs()) {
            *a += 2.0 * (mu * c).re;
        }
    }
    HomogeneousForm::from_real_dense(n, d, &acc)
}

/// Point analogue of [`reconstruct`]: `Σ λ_i p_i + Σ 2 Re(μ_j q_j)`.
pub fn reconstruct_point(set: &LabeledSet, cert: &SpanCertificate) -> Result<Vec<f64>> {
    check_shapes(set, cert)?;
    let mut acc = vec![0.0; set.dim() + 1];
    for (p, &lam) in set.real_points().iter().zip(&cert.real_coeffs) {
        for (a, c) in acc.iter_mut().zip(p.coords()) {
            *a += lam * c.re;
        }
    }
    for (p, &mu) in set.pairs().iter().zip(&cert.pair_coeffs) {
        for (a, c) in acc.iter_mut().zip(p.coords()) {
            *a += 2.0 * (mu * c).re;
        }
    }
    Ok(acc)
}
