//! Weight-two labels for real points relative to a real hypersurface.
//!
//! A real line through `q` meets the hypersurface in `d` points counted with
//! multiplicity. The real polynomial cut out on the line has its roots
//! closed under conjugation, so either two of them are real or one
//! conjugate pair exists, and in both cases `q` is in the real span of the
//! chosen pair of points.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{binary_roots, monomial_value, pair_conjugate_roots, ComplexScalar};
use crate::algebra::{HomogeneousForm, ProjectivePoint};
use crate::config::Tolerances;
use crate::labels::{span_membership_point, LabeledSet, SpanCertificate};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HypersurfaceInstance {
    surface: HomogeneousForm,
    point: ProjectivePoint,
}

impl HypersurfaceInstance {
    pub fn new(surface: HomogeneousForm, point: ProjectivePoint) -> Result<Self> {
        if !surface.is_real() {
            return Err(Error::Invalid("hypersurface equation must be real".into()));
        }
        if surface.d() < 2 {
            return Err(Error::Invalid("hypersurface must have degree at least 2".into()));
        }
        if !point.is_real() {
            return Err(Error::Invalid("point must be real".into()));
        }
        if point.dim() != surface.n() {
            return Err(Error::DimensionMismatch { expected: surface.nvars(), found: point.dim() + 1 });
        }
        Ok(Self { surface, point })
    }

    pub fn surface(&self) -> &HomogeneousForm {
        &self.surface
    }

    pub fn point(&self) -> &ProjectivePoint {
        &self.point
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HypersurfaceOptions {
    pub max_retries: usize,
    /// Return a conjugate pair even when two real intersection points exist.
    pub prefer_pair: bool,
}

impl Default for HypersurfaceOptions {
    fn default() -> Self {
        Self { max_retries: 20, prefer_pair: false }
    }
}

#[derive(Debug, Clone)]
pub struct HypersurfaceLabel {
    pub set: LabeledSet,
    pub certificate: SpanCertificate,
    /// Line directions drawn, including the successful one; zero when `q` is on the surface.
    pub attempts: usize,
}

fn mul_binary(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients `h_j` of `F(t q + s v) = Σ h_j t^{d-j} s^j`.
pub fn restrict_to_line(surface: &HomogeneousForm, q: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let coeffs = surface.real_coeffs().ok_or_else(|| Error::Invalid("hypersurface equation must be real".into()))?;
    let nv = surface.nvars();
    if q.len() != nv || v.len() != nv {
        return Err(Error::DimensionMismatch { expected: nv, found: q.len().min(v.len()) });
    }
    let d = surface.d();
    let mut out = vec![0.0; d + 1];
    for (alpha, c) in surface.basis().exponents().iter().zip(coeffs) {
        if c == 0.0 {
            continue;
        }
        let mut term = vec![c];
        for (i, &e) in alpha.iter().enumerate() {
            for _ in 0..e {
                term = mul_binary(&term, &[q[i], v[i]]);
            }
        }
        for (o, t) in out.iter_mut().zip(term) {
            *o += t;
        }
    }
    Ok(out)
}

/// `|F(p)| / (‖F‖ ‖p‖^d)` with the Bombieri norm, which bounds `|F(p)|` by `‖F‖ ‖p‖^d`.
pub fn on_surface_residual(surface: &HomogeneousForm, p: &ProjectivePoint) -> f64 {
    let val: ComplexScalar =
        surface.basis().exponents().iter().zip(surface.coeffs()).map(|(a, c)| c * monomial_value(p.coords(), a)).sum();
    val.norm() / (surface.bombieri_norm() * p.norm().powi(surface.d() as i32))
}

fn random_direction<R: Rng + ?Sized>(q: &[f64], rng: &mut R) -> Option<Vec<f64>> {
    let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut v: Vec<f64> = q.iter().map(|_| rng.sample(StandardNormal)).collect();
    let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum::<f64>() / (qn * qn);
    for (vi, qi) in v.iter_mut().zip(q) {
        *vi -= dot * qi;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 1e-6).then(|| v.into_iter().map(|x| x / norm).collect())
}

fn line_point(q: &[f64], v: &[f64], xy: [ComplexScalar; 2], tau_real: f64) -> Result<ProjectivePoint> {
    let coords = q.iter().zip(v).map(|(a, b)| xy[0] * a + xy[1] * b).collect();
    ProjectivePoint::with_tolerance(coords, tau_real)
}

fn min_separation(points: &[ProjectivePoint]) -> f64 {
    let mut sep = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            sep = sep.min(points[i].distance(&points[j]));
        }
    }
    sep
}

/// One attempt along direction `v`; `None` when the line is not transversal.
fn try_line(
    inst: &HypersurfaceInstance,
    q: &[f64],
    v: &[f64],
    opts: &HypersurfaceOptions,
    tol: &Tolerances,
) -> Option<(LabeledSet, SpanCertificate)> {
    let h = restrict_to_line(&inst.surface, q, v).ok()?;
    let roots = binary_roots(&h).ok()?;
    let part = pair_conjugate_roots(&roots.chart_roots, tol.tau_real, tol.tau_pair).ok()?;
    let real: Vec<ProjectivePoint> = part
        .real
        .iter()
        .map(|&t| line_point(q, v, roots.point(ComplexScalar::new(t, 0.0)), tol.tau_real))
        .collect::<Result<_>>()
        .ok()?;
    let pairs: Vec<ProjectivePoint> = part
        .pairs
        .iter()
        .map(|&t| line_point(q, v, roots.point(t), tol.tau_real).map(|p| p.pair_representative(tol.tau_real)))
        .collect::<Result<_>>()
        .ok()?;
    let mut all = real.clone();
    for p in &pairs {
        if p.is_real() {
            return None;
        }
        all.push(p.clone());
        all.push(p.conjugate());
    }
    if min_separation(&all) <= tol.tau_sep {
        return None;
    }
    let use_real = real.len() >= 2 && (pairs.is_empty() || !opts.prefer_pair);
    let set = if use_real {
        let mut best = (0, 1, f64::NEG_INFINITY);
        for i in 0..real.len() {
            for j in (i + 1)..real.len() {
                let d = real[i].distance(&real[j]);
                if d > best.2 {
                    best = (i, j, d);
                }
            }
        }
        LabeledSet::new(vec![real[best.0].clone(), real[best.1].clone()], vec![])
    } else {
        let p = pairs.iter().max_by(|a, b| a.distance(&a.conjugate()).total_cmp(&b.distance(&b.conjugate())))?;
        LabeledSet::new(vec![], vec![p.clone()])
    }
    .ok()?;
    let on_surface = set.flatten().iter().all(|p| on_surface_residual(&inst.surface, p) <= tol.residual_tol);
    if !on_surface {
        return None;
    }
    let cert = span_membership_point(&inst.point, &set, tol).ok()?;
    Some((set, cert))
}

/// Finds a labeled set of weight at most two whose real span contains `q`.
///
/// Returns `{q}` with label (0,1) when `q` lies on the hypersurface.
/// Otherwise draws real directions until the line through `q` meets the
/// hypersurface in `d` distinct points and returns two real intersection
/// points, label (0,2), or one conjugate pair, label (1,0).
pub fn find_label_hypersurface<R: Rng + ?Sized>(
    inst: &HypersurfaceInstance,
    rng: &mut R,
    opts: &HypersurfaceOptions,
    tol: &Tolerances,
) -> Result<HypersurfaceLabel> {
    let q = inst.point.real_coords().expect("validated real point");
    if on_surface_residual(&inst.surface, &inst.point) <= tol.residual_tol {
        let set = LabeledSet::new(vec![inst.point.clone()], vec![])?;
        let certificate = span_membership_point(&inst.point, &set, tol)?;
        return Ok(HypersurfaceLabel { set, certificate, attempts: 0 });
    }
    for attempt in 1..=opts.max_retries {
        let Some(v) = random_direction(&q, rng) else { continue };
        if let Some((set, certificate)) = try_line(inst, &q, &v, opts, tol) {
            return Ok(HypersurfaceLabel { set, certificate, attempts: attempt });
        }
    }
    Err(Error::RetriesExhausted { retries: opts.max_retries })
}
