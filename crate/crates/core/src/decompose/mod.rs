//! Numerical labeled Waring decompositions of real forms in any number of
//! variables.
//!
//! The solver is a Levenberg–Marquardt iteration over a fixed label
//! template `(a, b)`: `b` real points with real coefficients and `a` complex
//! points whose conjugates carry conjugate coefficients, so every iterate is
//! a real form. Search strategies built on it enumerate the templates of a
//! given weight or grow a weight-`k-1` fit by one conjugate pair.

mod flattening;
mod lm;
mod objective;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{binomial, catalecticant, ComplexScalar, HomogeneousForm, ProjectivePoint};
use crate::labels::{label_of, span_membership, Label, LabeledSet, SpanCertificate};
use crate::rng::substream;
use crate::{Error, Result, Tolerances};

pub use flattening::{flattening_points, koszul_flattening};
pub use lm::{levenberg_marquardt, LmOutcome};
pub use objective::{residual_and_gradient, ComplexObjective, Layout, Model, Objective};

/// A label `(a, b)` used as the shape of a search.
pub type LabelTemplate = Label;

/// A weighted summand whose contribution is below this fraction of `‖f‖`
/// is treated as absent and the fit is rejected as a template mismatch.
const NEGLIGIBLE_TERM: f64 = 1e-7;

/// Stream tags keeping the random draws of different searches apart.
const TAG_TEMPLATE: u64 = 1;
const TAG_JOIN: u64 = 2;
const TAG_SEED: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NLSConfig {
    pub max_iters: usize,
    pub lambda_init: f64,
    pub gradient_tol: f64,
    pub residual_tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for NLSConfig {
    fn default() -> Self {
        Self { max_iters: 300, lambda_init: 1e-3, gradient_tol: 1e-15, residual_tol: 1e-6, restarts: 8, seed: 0 }
    }
}

impl NLSConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if self.max_iters == 0 || self.restarts == 0 {
            return Err(Error::Invalid("max_iters and restarts must be positive".into()));
        }
        if !positive(self.lambda_init) || !positive(self.gradient_tol) || !positive(self.residual_tol) {
            return Err(Error::Invalid("NLS tolerances must be positive and finite".into()));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone)]
pub struct DecompositionProblem {
    pub f: HomogeneousForm,
    pub template: LabelTemplate,
    pub config: NLSConfig,
}

impl DecompositionProblem {
    pub fn new(f: HomogeneousForm, template: LabelTemplate, config: NLSConfig) -> Result<Self> {
        if !f.is_real() {
            return Err(Error::Invalid("decomposition target must be a real form".into()));
        }
        if f.bombieri_norm() == 0.0 {
            return Err(Error::ZeroForm);
        }
        config.validate()?;
        Ok(Self { f, template, config })
    }
}

/// A successful search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Decomposition {
    pub set: LabeledSet,
    pub certificate: SpanCertificate,
    pub template: LabelTemplate,
    /// Index of the restart that produced the result.
    pub restart: usize,
    pub iterations: usize,
    /// Caveats about the inputs, such as parameters outside the usual range.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

/// Diagnostics for an unsuccessful search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureReport {
    /// Smallest relative residual seen over all restarts and templates.
    pub best_residual: f64,
    pub best_template: Option<LabelTemplate>,
    /// Parameter vector of the best iterate, laid out as in [`Objective`].
    pub best_iterate: Vec<f64>,
    pub templates_tried: Vec<LabelTemplate>,
    /// Templates rejected up front by the catalecticant rank filter.
    pub filtered: Vec<LabelTemplate>,
    pub restarts: usize,
}

impl FailureReport {
    fn empty() -> Self {
        Self {
            best_residual: 1.0,
            best_template: None,
            best_iterate: Vec::new(),
            templates_tried: Vec::new(),
            filtered: Vec::new(),
            restarts: 0,
        }
    }

    fn absorb(&mut self, other: FailureReport) {
        if other.best_residual < self.best_residual || self.best_template.is_none() && other.best_template.is_some() {
            self.best_residual = other.best_residual;
            self.best_template = other.best_template;
            self.best_iterate = other.best_iterate;
        }
        self.templates_tried.extend(other.templates_tried);
        self.filtered.extend(other.filtered);
        self.restarts += other.restarts;
    }

    fn into_error(self) -> Error {
        Error::Decomposition(Box::new(self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenericRankFlag {
    /// `n < 1` or `d < 3`.
    OutsideHypotheses,
    /// `(n, d)` is one of `(2,6)`, `(3,4)`, `(5,3)`.
    ListedException,
    /// A defective Veronese variety: `σ_g` does not fill the ambient space.
    Defective,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenericRank {
    pub n: usize,
    pub d: usize,
    pub g: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<GenericRankFlag>,
}

/// `⌈C(n+d, n) / (n+1)⌉` with flags for parameters where the formula needs care.
pub fn generic_rank(n: usize, d: usize) -> GenericRank {
    let dim = binomial(n + d, n) as usize;
    let g = dim.div_ceil(n + 1);
    let mut flags = Vec::new();
    if n < 1 || d < 3 {
        flags.push(GenericRankFlag::OutsideHypotheses);
    }
    if matches!((n, d), (2, 6) | (3, 4) | (5, 3)) {
        flags.push(GenericRankFlag::ListedException);
    }
    if matches!((n, d), (2, 4) | (3, 4) | (4, 4) | (4, 3)) || (n >= 2 && d == 2) {
        flags.push(GenericRankFlag::Defective);
    }
    GenericRank { n, d, g, flags }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecantFilter {
    Possible,
    Impossible,
}

/// Necessary condition for `f ∈ σ_k`: every catalecticant has rank at most `k`.
pub fn secant_membership_filter(f: &HomogeneousForm, k: usize, tol: &Tolerances) -> SecantFilter {
    for j in 1..f.d() {
        let Ok(cat) = catalecticant(f, j) else { continue };
        let (r, c) = cat.shape();
        if k >= r.min(c) {
            continue;
        }
        if cat.numeric_rank(tol.rank_tol) > k {
            return SecantFilter::Impossible;
        }
    }
    SecantFilter::Possible
}

/// Templates of weight `w` in order of decreasing number of real points.
pub fn templates_for_weight(w: usize, skip_all_real: bool) -> Vec<LabelTemplate> {
    (0..=w / 2).filter(|&a| !(skip_all_real && a == 0)).filter_map(|a| Label::new(a, w - 2 * a).ok()).collect()
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Random points; coefficients are left at zero.
fn random_points(lay: &Layout, rng: &mut impl Rng) -> Vec<f64> {
    let mut x = vec![0.0; lay.len()];
    for i in 0..lay.b {
        let s = lay.real_point(i);
        for k in 0..lay.nv {
            x[s + k] = gaussian(rng);
        }
    }
    for j in 0..lay.a {
        let s = lay.pair_point(j);
        for k in 0..2 * lay.nv {
            x[s + k] = gaussian(rng);
        }
    }
    x
}

fn random_start(obj: &Objective, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let mut x = random_points(&obj.layout(), rng);
    lm::fit_coefficients(obj, &mut x)?;
    Ok(x)
}

/// Parameter vector realizing `template` from approximate points, when the
/// points split into that many real points and conjugate pairs.
fn seeded_start(obj: &Objective, points: &[Vec<ComplexScalar>], tol: &Tolerances) -> Option<Vec<f64>> {
    let loose = tol.tau_pair;
    let pts =
        points.iter().map(|c| ProjectivePoint::with_tolerance(c.clone(), loose)).collect::<Result<Vec<_>>>().ok()?;
    let set = label_of(&pts, loose, loose.sqrt()).ok()?;
    if set.label() != obj.template() {
        return None;
    }
    let lay = obj.layout();
    let mut x = vec![0.0; lay.len()];
    for (i, p) in set.real_points().iter().enumerate() {
        let s = lay.real_point(i);
        for (k, z) in p.coords().iter().enumerate() {
            x[s + k] = z.re;
        }
    }
    for (j, p) in set.pairs().iter().enumerate() {
        let s = lay.pair_point(j);
        for (k, z) in p.coords().iter().enumerate() {
            x[s + k] = z.re;
            x[s + lay.nv + k] = z.im;
        }
    }
    lm::fit_coefficients(obj, &mut x).ok()?;
    Some(x)
}

fn algebraic_points(f: &HomogeneousForm, w: usize, seed: u64) -> Option<Vec<Vec<ComplexScalar>>> {
    let mut rng = substream(seed, &[TAG_SEED, w as u64]);
    flattening_points(f, w, &mut rng)
}

/// Turns a converged parameter vector into a certified labeled set, or
/// rejects it when the points do not realize the template.
fn certify(
    obj: &Objective,
    f: &HomogeneousForm,
    x: &[f64],
    cfg: &NLSConfig,
    tol: &Tolerances,
) -> Option<(LabeledSet, SpanCertificate)> {
    let lay = obj.layout();
    let mut points = Vec::with_capacity(lay.b + 2 * lay.a);
    for i in 0..lay.b {
        points.push(ProjectivePoint::with_tolerance(obj.real_coords(x, i), tol.tau_real).ok()?);
    }
    for j in 0..lay.a {
        let q = ProjectivePoint::with_tolerance(obj.pair_coords(x, j), tol.tau_real).ok()?;
        if q.is_real() {
            return None;
        }
        points.push(q.conjugate());
        points.push(q);
    }
    let set = label_of(&points, tol.tau_real, tol.tau_pair).ok()?;
    if set.label() != obj.template() {
        return None;
    }
    let local = Tolerances { residual_tol: cfg.residual_tol, ..*tol };
    let cert = span_membership(f, &set, &local).ok()?;
    let d = obj.d() as i32;
    let fnorm = obj.target_norm();
    let term = |c: f64, p: &ProjectivePoint| c * p.norm().powi(d) / fnorm;
    let negligible = set.real_points().iter().zip(&cert.real_coeffs).any(|(p, c)| term(c.abs(), p) < NEGLIGIBLE_TERM)
        || set.pairs().iter().zip(&cert.pair_coeffs).any(|(p, c)| term(c.norm(), p) < NEGLIGIBLE_TERM);
    if negligible {
        return None;
    }
    Some((set, cert))
}

/// Refines an approximate labeled decomposition of `f` by damped
/// Gauss-Newton from its own points and returns it if the refined set keeps
/// the label and reconstructs `f` within `tol.residual_tol`.
pub fn polish_decomposition(
    f: &HomogeneousForm,
    set: &LabeledSet,
    tol: &Tolerances,
) -> Option<(LabeledSet, SpanCertificate)> {
    let obj = Objective::new(f, set.label()).ok()?;
    let points: Vec<Vec<ComplexScalar>> = set.real_points().iter().map(|p| p.coords().to_vec()).collect();
    let lay = obj.layout();
    let mut x = vec![0.0; lay.len()];
    for (i, c) in points.iter().enumerate() {
        for (k, z) in c.iter().enumerate() {
            x[lay.real_point(i) + k] = z.re;
        }
    }
    for (j, p) in set.pairs().iter().enumerate() {
        let s = lay.pair_point(j);
        for (k, z) in p.coords().iter().enumerate() {
            x[s + k] = z.re;
            x[s + lay.nv + k] = z.im;
        }
    }
    lm::fit_coefficients(&obj, &mut x).ok()?;
    let cfg = NLSConfig { max_iters: 50, residual_tol: tol.residual_tol, ..NLSConfig::default() };
    let out = levenberg_marquardt(&obj, x, &cfg).ok()?;
    certify(&obj, f, &out.x, &cfg, tol)
}

struct Attempt {
    relative: f64,
    x: Vec<f64>,
    iterations: usize,
    success: Option<(LabeledSet, SpanCertificate)>,
}

fn attempt_from(obj: &Objective, f: &HomogeneousForm, x0: Vec<f64>, cfg: &NLSConfig, tol: &Tolerances) -> Attempt {
    match levenberg_marquardt(obj, x0, cfg) {
        Ok(out) => {
            let success = if out.relative <= cfg.residual_tol { certify(obj, f, &out.x, cfg, tol) } else { None };
            Attempt { relative: out.relative, x: out.x, iterations: out.iterations, success }
        }
        Err(_) => Attempt { relative: f64::INFINITY, x: Vec::new(), iterations: 0, success: None },
    }
}

/// Runs `count` restarts in parallel batches and returns the successful
/// restart with the lowest index, so the outcome is independent of the
/// number of threads.
fn run_restarts<F>(
    count: usize,
    template: LabelTemplate,
    attempt: F,
) -> std::result::Result<Decomposition, FailureReport>
where
    F: Fn(usize) -> Attempt + Sync,
{
    let batch = rayon::current_num_threads().max(1);
    let mut report = FailureReport::empty();
    report.templates_tried.push(template);
    let mut start = 0;
    while start < count {
        let end = (start + batch).min(count);
        let results: Vec<Attempt> = (start..end).into_par_iter().map(&attempt).collect();
        for (offset, res) in results.into_iter().enumerate() {
            report.restarts += 1;
            if let Some((set, certificate)) = res.success {
                return Ok(Decomposition {
                    set,
                    certificate,
                    template,
                    restart: start + offset,
                    iterations: res.iterations,
                    flags: Vec::new(),
                });
            }
            if res.relative < report.best_residual || report.best_template.is_none() {
                report.best_residual = res.relative.min(report.best_residual);
                report.best_template = Some(template);
                report.best_iterate = res.x;
            }
        }
        start = end;
    }
    Err(report)
}

fn template_path(tag: u64, template: LabelTemplate) -> [u64; 3] {
    [tag, template.a() as u64, template.b() as u64]
}

fn filtered_failure(template: LabelTemplate) -> Error {
    let mut report = FailureReport::empty();
    report.filtered.push(template);
    report.into_error()
}

/// Fits `problem.f` with exactly the problem's label template.
pub fn decompose_with_template(problem: &DecompositionProblem, tol: &Tolerances) -> Result<Decomposition> {
    let DecompositionProblem { f, template, config } = problem;
    tol.validate()?;
    config.validate()?;
    if secant_membership_filter(f, template.weight(), tol) == SecantFilter::Impossible {
        return Err(filtered_failure(*template));
    }
    let obj = Objective::new(f, *template)?;
    let path = template_path(TAG_TEMPLATE, *template);
    let seeded = algebraic_points(f, template.weight(), config.seed).and_then(|p| seeded_start(&obj, &p, tol));
    run_restarts(config.restarts, *template, |r| {
        let mut rng = substream(config.seed, &[path[0], path[1], path[2], r as u64]);
        let x0 = match (&seeded, r) {
            (Some(x), 0) => Ok(x.clone()),
            _ => random_start(&obj, &mut rng),
        };
        match x0 {
            Ok(x0) => attempt_from(&obj, f, x0, config, tol),
            Err(_) => Attempt { relative: f64::INFINITY, x: Vec::new(), iterations: 0, success: None },
        }
    })
    .map_err(FailureReport::into_error)
}

/// Tries every template of weight `w`, most real points first, and returns
/// the first success.
pub fn decompose_weight(
    f: &HomogeneousForm,
    w: usize,
    skip_all_real: bool,
    config: &NLSConfig,
    tol: &Tolerances,
) -> Result<Decomposition> {
    if w == 0 {
        return Err(Error::Invalid("weight must be at least 1".into()));
    }
    let templates = templates_for_weight(w, skip_all_real);
    if templates.is_empty() {
        return Err(Error::Invalid(format!("no template of weight {w} without real points only")));
    }
    if secant_membership_filter(f, w, tol) == SecantFilter::Impossible {
        let mut report = FailureReport::empty();
        report.filtered = templates;
        return Err(report.into_error());
    }
    let mut report = FailureReport::empty();
    for template in templates {
        let problem = DecompositionProblem::new(f.clone(), template, config.clone())?;
        match decompose_with_template(&problem, tol) {
            Ok(dec) => return Ok(dec),
            Err(Error::Decomposition(r)) => report.absorb(*r),
            Err(e) => return Err(e),
        }
    }
    Err(report.into_error())
}

/// Weight-`k+1` labels of the form `(a+1, b)` obtained by adjoining a
/// conjugate pair to a weight-`k-1` configuration `(a, b)`.
pub fn join_templates(k: usize) -> Vec<(LabelTemplate, LabelTemplate)> {
    templates_for_weight(k - 1, false)
        .into_iter()
        .filter_map(|t| Label::new(t.a() + 1, t.b()).ok().map(|big| (t, big)))
        .collect()
}

/// Searches for a weight-`k+1` label with at least one conjugate pair.
///
/// When `f` already has a weight-`k-1` label that one is returned instead.
/// Otherwise even restarts first fit a weight-`k-1` template, then adjoin a
/// random conjugate pair and refit at weight `k+1`; odd restarts start from
/// scratch. For ternary forms of odd degree restart 0 starts from the
/// flattening points instead.
pub fn join_decompose(f: &HomogeneousForm, k: usize, config: &NLSConfig, tol: &Tolerances) -> Result<Decomposition> {
    if k < 2 {
        return Err(Error::Invalid("join search needs k >= 2".into()));
    }
    tol.validate()?;
    config.validate()?;
    let mut report = FailureReport::empty();
    if secant_membership_filter(f, k - 1, tol) == SecantFilter::Possible {
        match decompose_weight(f, k - 1, false, config, tol) {
            Ok(dec) => return Ok(dec),
            Err(Error::Decomposition(r)) => report.absorb(*r),
            Err(e) => return Err(e),
        }
    }
    let points = algebraic_points(f, k + 1, config.seed);
    for (small, big) in join_templates(k) {
        if secant_membership_filter(f, big.weight(), tol) == SecantFilter::Impossible {
            report.filtered.push(big);
            continue;
        }
        let obj_small = Objective::new(f, small)?;
        let obj = Objective::new(f, big)?;
        let path = template_path(TAG_JOIN, big);
        let warm_cfg = NLSConfig { max_iters: (config.max_iters / 4).max(1), ..config.clone() };
        let seeded = points.as_ref().and_then(|p| seeded_start(&obj, p, tol));
        let res = run_restarts(config.restarts, big, |r| {
            let mut rng = substream(config.seed, &[path[0], path[1], path[2], r as u64]);
            let x0 = match (&seeded, r) {
                (Some(x), 0) => Ok(x.clone()),
                _ if r % 2 == 0 => warm_join_start(&obj_small, &obj, &mut rng, &warm_cfg),
                _ => random_start(&obj, &mut rng),
            };
            match x0 {
                Ok(x0) => attempt_from(&obj, f, x0, config, tol),
                Err(_) => Attempt { relative: f64::INFINITY, x: Vec::new(), iterations: 0, success: None },
            }
        });
        match res {
            Ok(dec) => return Ok(dec),
            Err(r) => report.absorb(r),
        }
    }
    Err(report.into_error())
}

fn warm_join_start(small: &Objective, big: &Objective, rng: &mut impl Rng, warm_cfg: &NLSConfig) -> Result<Vec<f64>> {
    let x_small = levenberg_marquardt(small, random_start(small, rng)?, warm_cfg)?.x;
    let ls = small.layout();
    let lb = big.layout();
    let mut x = random_points(&lb, rng);
    for i in 0..ls.b {
        let (s, t) = (ls.real_point(i), lb.real_point(i));
        x[t..t + lb.nv].copy_from_slice(&x_small[s..s + ls.nv]);
    }
    for j in 0..ls.a {
        let (s, t) = (ls.pair_point(j), lb.pair_point(j));
        x[t..t + 2 * lb.nv].copy_from_slice(&x_small[s..s + 2 * ls.nv]);
    }
    lm::fit_coefficients(big, &mut x)?;
    Ok(x)
}

/// Searches for a label `(k/2 + 1, 0)`, made of conjugate pairs only.
///
/// Values `k < 4` are accepted and flagged.
pub fn conjugate_only_decompose(
    f: &HomogeneousForm,
    k_even: usize,
    config: &NLSConfig,
    tol: &Tolerances,
) -> Result<Decomposition> {
    if k_even < 2 || !k_even.is_multiple_of(2) {
        return Err(Error::Invalid(format!("conjugate-only search needs an even k >= 2, got {k_even}")));
    }
    let template = Label::new(k_even / 2 + 1, 0)?;
    let problem = DecompositionProblem::new(f.clone(), template, config.clone())?;
    let mut dec = decompose_with_template(&problem, tol)?;
    if k_even < 4 {
        dec.flags.push(format!("k = {k_even} is below 4"));
    }
    Ok(dec)
}

/// Builds `Σ λ_i ℓ_{p_i}^d + Σ 2 Re(μ_j ℓ_{q_j}^d)` from raw parameters, for
/// planting known decompositions.
pub fn form_from_parameters(n: usize, d: usize, template: LabelTemplate, x: &[f64]) -> Result<HomogeneousForm> {
    let len = binomial(n + d, n) as usize;
    let obj = Objective::with_target(n, d, template, &vec![0.0; len]);
    let r = obj.residual(x)?;
    let basis = crate::algebra::MonomialBasis::new(n + 1, d);
    let coeffs: Vec<ComplexScalar> = r
        .iter()
        .zip(basis.exponents())
        .map(|(v, alpha)| ComplexScalar::new(v * crate::algebra::multinomial(alpha).sqrt(), 0.0))
        .collect();
    HomogeneousForm::from_dense(n, d, coeffs)
}

#[cfg(test)]
mod tests;
