//! Sylvester's algorithm for real binary forms.
//!
//! Kernel vectors of the Hankel catalecticant are binary forms whose roots,
//! when square-free, are the points of a Waring decomposition. A kernel
//! vector `g = Σ g_j X^{k-j} Y^j` vanishing at `(α, β)` contributes the
//! linear form `α x + β y`.

use serde::{Deserialize, Serialize};

use crate::algebra::{binary_roots, catalecticant_any, pair_conjugate_roots, real_kernel};
use crate::algebra::{HomogeneousForm, ProjectivePoint, RootPartition};
use crate::config::Tolerances;
use crate::decompose::polish_decomposition;
use crate::labels::{span_membership, LabeledSet, SpanCertificate};
use crate::{Error, Result};

/// Samples tried in a multidimensional kernel before moving to the next degree.
pub const DEFAULT_KERNEL_BUDGET: usize = 256;

/// Kernel samples this well separated are accepted without further search.
const GOOD_SEPARATION: f64 = 0.05;

fn require_real_binary(f: &HomogeneousForm) -> Result<Vec<f64>> {
    if f.n() != 1 {
        return Err(Error::Invalid(format!("expected a binary form, got {} variables", f.nvars())));
    }
    f.real_coeffs().ok_or_else(|| Error::Invalid("expected a real form".into()))
}

/// Orthonormal basis of the kernel of the degree-`k` catalecticant, each
/// vector read as the coefficients `g_j` of `Σ g_j X^{k-j} Y^j`.
pub fn apolar_kernel(f: &HomogeneousForm, k: usize, tol: &Tolerances) -> Result<Vec<Vec<f64>>> {
    require_real_binary(f)?;
    if k == 0 || k > f.d() {
        return Err(Error::DegreeOutOfRange { k, lo: 1, hi: f.d() });
    }
    let cat = catalecticant_any(f, k).real_matrix().expect("real form");
    Ok(real_kernel(&cat, tol.rank_tol).into_iter().map(|v| v.iter().cloned().collect()).collect())
}

/// A kernel element with its roots split into real roots and conjugate pairs.
#[derive(Debug, Clone)]
pub struct Generator {
    pub coeffs: Vec<f64>,
    pub real_points: Vec<ProjectivePoint>,
    pub pair_points: Vec<ProjectivePoint>,
    pub partition: RootPartition,
    /// Minimum chordal distance between distinct roots (including conjugates).
    pub separation: f64,
}

impl Generator {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn labeled_set(&self) -> Result<LabeledSet> {
        LabeledSet::new(self.real_points.clone(), self.pair_points.clone())
    }
}

fn analyze(g: &[f64], tol: &Tolerances) -> Result<Generator> {
    let roots = binary_roots(g)?;
    let partition = pair_conjugate_roots(&roots.chart_roots, tol.tau_real, tol.tau_pair)?;
    let real_points =
        partition.real.iter().map(|&t| ProjectivePoint::real(&roots.real_point(t))).collect::<Result<Vec<_>>>()?;
    let pair_points = partition
        .pairs
        .iter()
        .map(|&t| {
            let p = ProjectivePoint::with_tolerance(roots.point(t).to_vec(), tol.tau_real)?;
            Ok(p.pair_representative(tol.tau_real))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut all: Vec<ProjectivePoint> = real_points.clone();
    for p in &pair_points {
        all.push(p.clone());
        all.push(p.conjugate());
    }
    let mut separation = f64::INFINITY;
    for i in 0..all.len() {
        for j in (i + 1)..all.len() {
            separation = separation.min(all[i].distance(&all[j]));
        }
    }
    Ok(Generator { coeffs: g.to_vec(), real_points, pair_points, partition, separation })
}

/// Weyl-sequence direction in the span of `basis`, deterministic in `index`.
fn kernel_sample(basis: &[Vec<f64>], index: usize) -> Vec<f64> {
    const IRRATIONALS: [f64; 8] = [
        0.414_213_562_373_095_1,
        0.732_050_807_568_877_2,
        0.236_067_977_499_789_7,
        0.645_751_311_064_590_6,
        0.316_624_790_355_4,
        0.605_551_275_463_989_3,
        0.123_105_625_617_660_5,
        0.358_898_943_540_673_6,
    ];
    let len = basis[0].len();
    let mut out = vec![0.0; len];
    for (i, v) in basis.iter().enumerate() {
        let w = ((index + 1) as f64 * IRRATIONALS[i % IRRATIONALS.len()] * (1 + i / IRRATIONALS.len()) as f64).fract()
            - 0.5;
        for (o, x) in out.iter_mut().zip(v) {
            *o += w * x;
        }
    }
    let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        out.iter_mut().for_each(|x| *x /= norm);
    }
    out
}

/// Square-free kernel elements at degree `k`, best separated first.
fn square_free_candidates(f: &HomogeneousForm, k: usize, tol: &Tolerances, budget: usize) -> Result<Vec<Generator>> {
    let kernel = apolar_kernel(f, k, tol)?;
    let mut found: Vec<Generator> = Vec::new();
    match kernel.len() {
        0 => {}
        1 => {
            if let Ok(g) = analyze(&kernel[0], tol) {
                if g.separation > tol.tau_sep {
                    found.push(g);
                }
            }
        }
        _ => {
            for s in 0..budget.max(1) {
                let v = kernel_sample(&kernel, s);
                if let Ok(g) = analyze(&v, tol) {
                    if g.separation > tol.tau_sep {
                        let good = g.separation >= GOOD_SEPARATION;
                        found.push(g);
                        if good {
                            break;
                        }
                    }
                }
            }
        }
    }
    found.sort_by(|a, b| b.separation.total_cmp(&a.separation));
    Ok(found)
}

/// Complex Waring rank and a square-free apolar generator of that degree.
pub fn complex_rank_binary(f: &HomogeneousForm, tol: &Tolerances) -> Result<(usize, Vec<f64>)> {
    let d = require_real_binary(f)?.len() - 1;
    for k in 1..=d {
        if let Some(g) = square_free_candidates(f, k, tol, DEFAULT_KERNEL_BUDGET)?.into_iter().next() {
            return Ok((k, g.coeffs));
        }
    }
    Err(Error::RankSearchExhausted { max_degree: d })
}

/// Labeled Waring decomposition of minimal complex length.
///
/// The label weight equals the complex rank. The returned certificate
/// reconstructs `f` within `tol.residual_tol`.
pub fn sylvester_decompose(f: &HomogeneousForm, tol: &Tolerances) -> Result<(LabeledSet, SpanCertificate)> {
    let d = require_real_binary(f)?.len() - 1;
    for k in 1..=d {
        let candidates = square_free_candidates(f, k, tol, DEFAULT_KERNEL_BUDGET)?;
        if candidates.is_empty() {
            continue;
        }
        let mut last_err = None;
        for g in candidates.iter().take(4) {
            let set = match g.labeled_set() {
                Ok(set) => set,
                Err(e) => {
                    last_err = Some(e);
                    continue;
                }
            };
            match span_membership(f, &set, tol) {
                Ok(cert) => return Ok((set, cert)),
                Err(e) => {
                    if let Some(found) = polish_decomposition(f, &set, tol) {
                        return Ok(found);
                    }
                    last_err = Some(e);
                }
            }
        }
        return Err(last_err.expect("at least one candidate"));
    }
    Err(Error::RankSearchExhausted { max_degree: d })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CubicClass {
    /// Apolar quadratic with a conjugate pair of roots; label (1,0).
    PairClass,
    /// Apolar quadratic with two real roots; label (0,2).
    RealClass,
    /// Apolar quadratic not square-free: the cubic lies on the tangent developable.
    TangentDevelopable,
}

/// Discriminant `g1² - 4 g0 g2` of a binary quadratic.
pub fn quadratic_discriminant(g: &[f64]) -> f64 {
    g[1] * g[1] - 4.0 * g[0] * g[2]
}

/// Classifies a real binary cubic by the roots of its apolar quadratic.
pub fn classify_cubic(f: &HomogeneousForm, tol: &Tolerances) -> Result<CubicClass> {
    if require_real_binary(f)?.len() != 4 {
        return Err(Error::Invalid(format!("expected a cubic, got degree {}", f.d())));
    }
    let kernel = apolar_kernel(f, 2, tol)?;
    if kernel.len() != 1 {
        return Ok(CubicClass::TangentDevelopable);
    }
    let g = analyze(&kernel[0], tol)?;
    Ok(if g.separation <= tol.tau_sep {
        CubicClass::TangentDevelopable
    } else if g.partition.label.a() == 1 {
        CubicClass::PairClass
    } else {
        CubicClass::RealClass
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealRank {
    Exact(usize),
    /// The search ran out of budget at `lower_bound` without excluding it;
    /// `upper_bound` is the smallest real-rooted generator found above it.
    Unknown {
        lower_bound: usize,
        upper_bound: Option<usize>,
    },
}

/// Ranks real roots first, then closeness of the remaining roots to the real line.
fn realness_score(g: &[f64], tol: &Tolerances) -> Option<(usize, f64, bool)> {
    let roots = binary_roots(g).ok()?;
    let real = roots.chart_roots.iter().filter(|z| z.im.abs() <= tol.tau_real * (1.0 + z.norm())).count();
    let worst_im = roots.chart_roots.iter().map(|z| z.im.abs() / (1.0 + z.norm())).fold(0.0, f64::max);
    let certified = real == g.len() - 1
        && analyze(g, tol).map(|a| a.separation > tol.tau_sep && a.partition.label.a() == 0).unwrap_or(false);
    Some((real, -worst_im, certified))
}

fn better(a: (usize, f64, bool), b: (usize, f64, bool)) -> bool {
    (a.0, a.1) > (b.0, b.1)
}

/// Searches the degree-`k` kernel for a square-free, real-rooted element.
fn find_real_rooted(kernel: &[Vec<f64>], tol: &Tolerances, budget: usize) -> Option<Vec<f64>> {
    let mut best: Option<(Vec<f64>, (usize, f64, bool))> = None;
    let samples = if kernel.len() == 1 { 1 } else { (budget * 3 / 4).max(1) };
    for s in 0..samples {
        let v = if kernel.len() == 1 { kernel[0].clone() } else { kernel_sample(kernel, s) };
        if let Some(score) = realness_score(&v, tol) {
            if score.2 {
                return Some(v);
            }
            if best.as_ref().is_none_or(|(_, b)| better(score, *b)) {
                best = Some((v, score));
            }
        }
    }
    if kernel.len() == 1 {
        return None;
    }
    // Local refinement: shrinking random-direction hill climb in kernel coordinates.
    let (mut v, mut score) = best?;
    let mut step = 0.2;
    let refine = budget - samples;
    for s in 0..refine {
        let dir = kernel_sample(kernel, samples + s);
        let trial: Vec<f64> = v.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
        let norm = trial.iter().map(|x| x * x).sum::<f64>().sqrt();
        let trial: Vec<f64> = trial.iter().map(|x| x / norm).collect();
        match realness_score(&trial, tol) {
            Some(sc) if sc.2 => return Some(trial),
            Some(sc) if better(sc, score) => {
                v = trial;
                score = sc;
            }
            _ => step *= 0.9,
        }
    }
    None
}

/// Real Waring rank by search over real-rooted apolar generators.
///
/// Levels whose kernel is at most one-dimensional are decided exactly; a
/// multidimensional level that yields no certificate within `budget`
/// samples makes the answer [`RealRank::Unknown`].
pub fn real_rank_binary(f: &HomogeneousForm, budget: usize, tol: &Tolerances) -> Result<RealRank> {
    let d = require_real_binary(f)?.len() - 1;
    let (crank, _) = complex_rank_binary(f, tol)?;
    let mut lower_bound: Option<usize> = None;
    for k in crank..=d {
        let kernel = apolar_kernel(f, k, tol)?;
        if kernel.is_empty() {
            continue;
        }
        if let Some(g) = find_real_rooted(&kernel, tol, budget) {
            let certified =
                analyze(&g, tol).and_then(|a| a.labeled_set()).and_then(|s| span_membership(f, &s, tol)).is_ok();
            if certified {
                return Ok(match lower_bound {
                    None => RealRank::Exact(k),
                    Some(lb) => RealRank::Unknown { lower_bound: lb, upper_bound: Some(k) },
                });
            }
        }
        if kernel.len() > 1 && lower_bound.is_none() {
            lower_bound = Some(k);
        }
    }
    Ok(RealRank::Unknown { lower_bound: lower_bound.unwrap_or(d), upper_bound: None })
}

/// The weight bound `⌊(r + 5) / 2⌋` for curves in `P^r`.
pub fn curve_weight_bound(r: usize) -> usize {
    (r + 5) / 2
}

/// True iff the Sylvester decomposition succeeds with weight within [`curve_weight_bound`].
pub fn within_weight_bound(f: &HomogeneousForm, tol: &Tolerances) -> bool {
    match sylvester_decompose(f, tol) {
        Ok((set, _)) => set.label().weight() <= curve_weight_bound(f.d()),
        Err(_) => false,
    }
}

/// Complex roots of the kernel element at one degree, for callers that want
/// to inspect the generator directly.
pub fn generator_roots(g: &[f64], tol: &Tolerances) -> Result<Generator> {
    analyze(g, tol)
}
