//! Monte Carlo label statistics over random real forms and random real points.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{multinomial, HomogeneousForm, MonomialBasis, ProjectivePoint};
use crate::binary::sylvester_decompose;
use crate::decompose::{decompose_weight, generic_rank, GenericRank, NLSConfig};
use crate::hypersurface::{find_label_hypersurface, HypersurfaceInstance, HypersurfaceOptions};
use crate::io::FormDoc;
use crate::rng::{derive_seed, substream};
use crate::{Error, Label, Result, Tolerances};

const TAG_FORM: u64 = 11;
const TAG_POINT: u64 = 12;
const TAG_ENGINE: u64 = 13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    Binary { d: usize },
    Veronese { n: usize, d: usize },
    Hypersurface { surface: FormDoc },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    /// Independent standard normal monomial coefficients.
    GaussianMonomial,
    /// The coefficient of `x^α` has variance `multinomial(α)`.
    GaussianBombieri,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub geometry: Geometry,
    pub distribution: Distribution,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub nls: NLSConfig,
    #[serde(default)]
    pub hypersurface: HypersurfaceOptions,
}

impl EnsembleSpec {
    pub fn new(geometry: Geometry, distribution: Distribution, trials: usize, seed: u64) -> Self {
        Self {
            geometry,
            distribution,
            trials,
            seed,
            tolerances: Tolerances::default(),
            nls: NLSConfig::default(),
            hypersurface: HypersurfaceOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Invalid("trials must be at least 1".into()));
        }
        self.tolerances.validate()?;
        self.nls.validate()?;
        match &self.geometry {
            Geometry::Binary { d } if *d < 1 => Err(Error::Invalid("binary degree must be at least 1".into())),
            Geometry::Veronese { n, d } if *n < 1 || *d < 1 => {
                Err(Error::Invalid("veronese needs n >= 1 and d >= 1".into()))
            }
            Geometry::Hypersurface { surface } => {
                let f = surface.to_form()?;
                if !f.is_real() {
                    return Err(Error::Invalid("hypersurface must be real".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn form_shape(&self) -> Option<(usize, usize)> {
        match self.geometry {
            Geometry::Binary { d } => Some((1, d)),
            Geometry::Veronese { n, d } => Some((n, d)),
            Geometry::Hypersurface { .. } => None,
        }
    }
}

/// A random real form of the given shape.
pub fn sample_form<R: Rng + ?Sized>(n: usize, d: usize, distribution: Distribution, rng: &mut R) -> HomogeneousForm {
    let basis = MonomialBasis::new(n + 1, d);
    loop {
        let coeffs: Vec<f64> = basis
            .exponents()
            .iter()
            .map(|alpha| {
                let z: f64 = rng.sample(StandardNormal);
                match distribution {
                    Distribution::GaussianMonomial => z,
                    Distribution::GaussianBombieri => z * multinomial(alpha).sqrt(),
                }
            })
            .collect();
        if let Ok(f) = HomogeneousForm::from_real_dense(n, d, &coeffs) {
            return f;
        }
    }
}

/// The form drawn for trial `index`. For hypersurface ensembles this is the
/// fixed surface.
pub fn sample_random_form(spec: &EnsembleSpec, index: u64) -> Result<HomogeneousForm> {
    spec.validate()?;
    match (&spec.geometry, spec.form_shape()) {
        (Geometry::Hypersurface { surface }, _) => surface.to_form(),
        (_, Some((n, d))) => Ok(sample_form(n, d, spec.distribution, &mut substream(spec.seed, &[TAG_FORM, index]))),
        _ => unreachable!(),
    }
}

/// A random real point with independent standard normal coordinates.
pub fn sample_real_point<R: Rng + ?Sized>(nvars: usize, rng: &mut R) -> ProjectivePoint {
    loop {
        let c: Vec<f64> = (0..nvars).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(p) = ProjectivePoint::real(&c) {
            return p;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelCount {
    pub label: Label,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyMetadata {
    pub spec: EnsembleSpec,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generic_rank: Option<GenericRank>,
    /// Label weight every trial aims at.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_weight: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelHistogram {
    pub trials: usize,
    pub counts: Vec<LabelCount>,
    pub failures: usize,
    /// Failure count per error kind.
    pub failure_kinds: BTreeMap<String, usize>,
    pub metadata: SurveyMetadata,
}

impl LabelHistogram {
    pub fn count(&self, label: Label) -> usize {
        self.counts.iter().find(|c| c.label == label).map_or(0, |c| c.count)
    }

    pub fn max_weight(&self) -> Option<usize> {
        self.counts.iter().map(|c| c.label.weight()).max()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,weight,count\n");
        for c in &self.counts {
            out += &format!("{},{},{},{}\n", c.label.a(), c.label.b(), c.label.weight(), c.count);
        }
        out += &format!("failure,,,{}\n", self.failures);
        out
    }
}

fn error_kind(e: &Error) -> String {
    let name = match e {
        Error::RetriesExhausted { .. } => "retries_exhausted",
        Error::Decomposition(_) => "decomposition",
        Error::RankSearchExhausted { .. } => "rank_search_exhausted",
        Error::PairingFailure { .. } => "pairing_failure",
        Error::DuplicatePoint(..) => "duplicate_point",
        Error::NotInSpan { .. } => "not_in_span",
        Error::EigenFailure => "eigen_failure",
        _ => "other",
    };
    name.to_string()
}

fn target_weight(spec: &EnsembleSpec) -> Option<usize> {
    match spec.geometry {
        Geometry::Veronese { n, d } => Some(generic_rank(n, d).g + 1),
        _ => None,
    }
}

/// Runs the engine for one trial and returns the achieved label.
pub fn run_trial(spec: &EnsembleSpec, surface: Option<&HomogeneousForm>, index: u64) -> Result<Label> {
    let tol = &spec.tolerances;
    match &spec.geometry {
        Geometry::Binary { d } => {
            let f = sample_form(1, *d, spec.distribution, &mut substream(spec.seed, &[TAG_FORM, index]));
            Ok(sylvester_decompose(&f, tol)?.0.label())
        }
        Geometry::Veronese { n, d } => {
            let f = sample_form(*n, *d, spec.distribution, &mut substream(spec.seed, &[TAG_FORM, index]));
            let w = target_weight(spec).expect("veronese");
            let cfg = spec.nls.clone().with_seed(derive_seed(spec.seed, &[TAG_ENGINE, index]));
            Ok(decompose_weight(&f, w, true, &cfg, tol)?.set.label())
        }
        Geometry::Hypersurface { .. } => {
            let surface = surface.expect("surface parsed");
            let q = sample_real_point(surface.nvars(), &mut substream(spec.seed, &[TAG_POINT, index]));
            let inst = HypersurfaceInstance::new(surface.clone(), q)?;
            let mut rng = substream(spec.seed, &[TAG_ENGINE, index]);
            Ok(find_label_hypersurface(&inst, &mut rng, &spec.hypersurface, tol)?.set.label())
        }
    }
}

/// Runs every trial on the current rayon pool and tallies the labels.
pub fn survey_labels(spec: &EnsembleSpec) -> Result<LabelHistogram> {
    spec.validate()?;
    let surface = match &spec.geometry {
        Geometry::Hypersurface { surface } => Some(surface.to_form()?),
        _ => None,
    };
    let outcomes: Vec<Result<Label>> =
        (0..spec.trials as u64).into_par_iter().map(|i| run_trial(spec, surface.as_ref(), i)).collect();

    let mut counts: BTreeMap<Label, usize> = BTreeMap::new();
    let mut failure_kinds: BTreeMap<String, usize> = BTreeMap::new();
    let mut failures = 0;
    for outcome in outcomes {
        match outcome {
            Ok(label) => *counts.entry(label).or_default() += 1,
            Err(e) => {
                failures += 1;
                *failure_kinds.entry(error_kind(&e)).or_default() += 1;
            }
        }
    }
    let generic = match spec.geometry {
        Geometry::Veronese { n, d } => Some(generic_rank(n, d)),
        _ => None,
    };
    Ok(LabelHistogram {
        trials: spec.trials,
        counts: counts.into_iter().map(|(label, count)| LabelCount { label, count }).collect(),
        failures,
        failure_kinds,
        metadata: SurveyMetadata {
            spec: spec.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            generic_rank: generic,
            target_weight: target_weight(spec),
        },
    })
}

/// [`survey_labels`] on a dedicated pool with `threads` workers.
pub fn survey_labels_with_threads(spec: &EnsembleSpec, threads: usize) -> Result<LabelHistogram> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    pool.install(|| survey_labels(spec))
}
