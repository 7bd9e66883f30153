//! The `waring-labels` command line.
//!
//! Every invocation prints one JSON document on standard output. The document
//! echoes the resolved configuration and the argument vector; rerunning the
//! echoed command reproduces it byte for byte.
//! Diagnostics go to standard error.
//!
//! Exit codes: 0 success, 1 usage or schema error, 2 retries exhausted,
//! 3 decomposition failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use waring_labels::algebra::{HomogeneousForm, ProjectivePoint};
use waring_labels::binary::{complex_rank_binary, real_rank_binary, sylvester_decompose, RealRank};
use waring_labels::decompose::{
    conjugate_only_decompose, decompose_weight, decompose_with_template, generic_rank, join_decompose, Decomposition,
    DecompositionProblem, FailureReport, GenericRank, NLSConfig,
};
use waring_labels::hypersurface::{
    find_label_hypersurface, on_surface_residual, HypersurfaceInstance, HypersurfaceOptions,
};
use waring_labels::io::{parse_form, parse_json};
use waring_labels::rng::substream;
use waring_labels::survey::{survey_labels, survey_labels_with_threads, EnsembleSpec, LabelHistogram};
use waring_labels::{Error, Label, LabeledSet, SpanCertificate, Tolerances};

pub const SEED_ENV: &str = "WARING_LABELS_SEED";
pub const PROGRAM: &str = "waring-labels";

const TAG_HYPERSURFACE: u64 = 21;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RETRIES: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlobalConfig {
    pub tolerances: Tolerances,
    pub seed: u64,
    /// Line draws allowed per hypersurface instance.
    pub max_retries: usize,
    pub nls: NLSConfig,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        Self { tolerances: Tolerances::default(), seed: 0, max_retries: 20, nls: NLSConfig::default() }
    }
}

impl GlobalConfig {
    pub fn validate(&self) -> waring_labels::Result<()> {
        self.tolerances.validate()?;
        self.nls.validate()?;
        if self.max_retries == 0 {
            return Err(Error::Invalid("max_retries must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorDoc {
    pub kind: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<FailureReport>,
}

/// The envelope around every result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDoc<T> {
    pub command: String,
    pub version: String,
    pub argv: Vec<String>,
    pub seed: u64,
    pub config: GlobalConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinaryResult {
    pub label: Label,
    pub complex_rank: usize,
    pub set: LabeledSet,
    pub certificate: SpanCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypersurfaceResult {
    pub label: Label,
    pub attempts: usize,
    pub set: LabeledSet,
    pub certificate: SpanCertificate,
    /// `|F(p)|` relative to the coefficient scale, per listed point.
    pub on_surface_residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VeroneseResult {
    pub label: Label,
    pub generic_rank: GenericRank,
    pub decomposition: Decomposition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RealRankDoc {
    Exact(usize),
    Bounds { lower_bound: usize, upper_bound: Option<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankResult {
    pub complex_rank: usize,
    pub real_rank: RealRankDoc,
}

#[derive(Parser, Debug)]
#[command(name = PROGRAM, version, about = "Labeled Waring decompositions of real forms and real points")]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; takes precedence over the environment and the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sylvester decomposition of a real binary form.
    DecomposeBinary(FormArgs),
    /// Label of a real point with respect to a real hypersurface.
    LabelHypersurface(HypersurfaceArgs),
    /// Numerical labeled decomposition of a real form in any number of variables.
    DecomposeVeronese(VeroneseArgs),
    /// Complex and real rank of a real binary form.
    Rank(RankArgs),
    /// Label histogram over a random ensemble.
    Survey(SurveyArgs),
}

#[derive(Args, Debug)]
struct FormArgs {
    /// Form document (JSON).
    #[arg(long, value_name = "PATH")]
    form: PathBuf,
}

#[derive(Args, Debug)]
struct HypersurfaceArgs {
    /// Hypersurface equation (JSON form document).
    #[arg(long, value_name = "PATH")]
    form: PathBuf,
    /// Homogeneous coordinates of the real point, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true, num_args = 1..)]
    point: Vec<f64>,
    /// Return a conjugate pair even when two real points are available.
    #[arg(long)]
    prefer_pair: bool,
    /// Overrides `max_retries` from the configuration.
    #[arg(long)]
    max_retries: Option<usize>,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["weight", "template", "join", "conjugate_only"])))]
struct VeroneseArgs {
    /// Form document (JSON).
    #[arg(long, value_name = "PATH")]
    form: PathBuf,
    /// Try every template of this weight, most real points first.
    #[arg(long)]
    weight: Option<usize>,
    /// Skip the all-real template when searching by weight.
    #[arg(long, requires = "weight")]
    skip_all_real: bool,
    /// A single template `a,b`: `a` conjugate pairs and `b` real points.
    #[arg(long, value_parser = parse_template, value_name = "A,B")]
    template: Option<Label>,
    /// Weight `k+1` search obtained by adjoining a conjugate pair to a weight `k-1` fit.
    #[arg(long, value_name = "K")]
    join: Option<usize>,
    /// Conjugate pairs only, `k/2 + 1` of them, for even `k`.
    #[arg(long, value_name = "K")]
    conjugate_only: Option<usize>,
}

#[derive(Args, Debug)]
struct RankArgs {
    /// Form document (JSON).
    #[arg(long, value_name = "PATH")]
    form: PathBuf,
    /// Largest generator degree searched for the real rank (default: the form's degree).
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args, Debug)]
struct SurveyArgs {
    /// Ensemble specification (JSON).
    #[arg(long, value_name = "PATH")]
    spec: PathBuf,
    /// Worker threads; the output does not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Also write the histogram as CSV to this path.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

fn parse_template(s: &str) -> Result<Label, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b] = parts.as_slice() else {
        return Err(format!("expected `a,b`, got `{s}`"));
    };
    let a: usize = a.parse().map_err(|e| format!("bad pair count `{a}`: {e}"))?;
    let b: usize = b.parse().map_err(|e| format!("bad real count `{b}`: {e}"))?;
    Label::new(a, b).map_err(|e| e.to_string())
}

/// Runs the command line and returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<String> = argv.into_iter().map(|a| a.into().to_string_lossy().into_owned()).collect();
    let env_seed = std::env::var(SEED_ENV).ok();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(&argv, env_seed.as_deref(), &mut stdout.lock(), &mut stderr.lock())
}

/// [`dispatch`] with explicit streams and environment, for embedding and tests.
pub fn run(argv: &[String], env_seed: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    EXIT_USAGE
                }
            };
        }
    };
    let mut echo = vec![PROGRAM.to_string()];
    echo.extend(argv.iter().skip(1).cloned());
    match execute(cli, echo, env_seed, out) {
        Ok(code) => code,
        Err(Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

struct Usage(String);

impl From<Error> for Usage {
    fn from(e: Error) -> Self {
        Usage(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Usage> {
    std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_form(path: &Path) -> Result<HomogeneousForm, Usage> {
    parse_form(&read(path)?).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn resolve_config(cli: &Cli, env_seed: Option<&str>) -> Result<(GlobalConfig, bool), Usage> {
    let mut config = match &cli.config {
        Some(path) => {
            parse_json::<GlobalConfig>(&read(path)?).map_err(|e| Usage(format!("{}: {e}", path.display())))?
        }
        None => GlobalConfig::default(),
    };
    let mut explicit = false;
    if let Some(s) = env_seed {
        config.seed = s.trim().parse().map_err(|e| Usage(format!("{SEED_ENV}={s} is not an unsigned integer: {e}")))?;
        explicit = true;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
        explicit = true;
    }
    config.nls.seed = config.seed;
    config.validate()?;
    Ok((config, explicit))
}

/// Engine errors that are reported as data; everything else is a usage error.
fn engine_exit(e: &Error) -> Option<(i32, &'static str)> {
    match e {
        Error::RetriesExhausted { .. } => Some((EXIT_RETRIES, "retries_exhausted")),
        Error::Decomposition(_) => Some((EXIT_FAILURE, "decomposition")),
        Error::RankSearchExhausted { .. } => Some((EXIT_FAILURE, "rank_search_exhausted")),
        Error::PairingFailure { .. } => Some((EXIT_FAILURE, "pairing_failure")),
        Error::NotInSpan { .. } => Some((EXIT_FAILURE, "not_in_span")),
        Error::EigenFailure => Some((EXIT_FAILURE, "eigen_failure")),
        Error::DuplicatePoint(..) => Some((EXIT_FAILURE, "duplicate_point")),
        Error::NotSigmaInvariant => Some((EXIT_FAILURE, "not_sigma_invariant")),
        _ => None,
    }
}

struct Envelope {
    command: &'static str,
    argv: Vec<String>,
    config: GlobalConfig,
    seed: u64,
}

impl Envelope {
    fn emit<T: Serialize>(self, out: &mut dyn Write, outcome: waring_labels::Result<T>) -> Result<i32, Usage> {
        let (result, error, code) = match outcome {
            Ok(r) => (Some(r), None, EXIT_OK),
            Err(e) => {
                let Some((code, kind)) = engine_exit(&e) else { return Err(e.into()) };
                let report = match &e {
                    Error::Decomposition(r) => Some((**r).clone()),
                    _ => None,
                };
                (None, Some(ErrorDoc { kind: kind.into(), message: e.to_string(), report }), code)
            }
        };
        let doc = OutputDoc {
            command: self.command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            argv: self.argv,
            seed: self.seed,
            config: self.config,
            result,
            error,
        };
        let text = serde_json::to_string_pretty(&doc).expect("output serializes");
        writeln!(out, "{text}").map_err(|e| Usage(format!("cannot write output: {e}")))?;
        Ok(code)
    }
}

fn execute(cli: Cli, argv: Vec<String>, env_seed: Option<&str>, out: &mut dyn Write) -> Result<i32, Usage> {
    let (config, explicit_seed) = resolve_config(&cli, env_seed)?;
    let tol = config.tolerances;
    let mut env = Envelope { command: "", argv, config: config.clone(), seed: config.seed };
    match cli.command {
        Command::DecomposeBinary(args) => {
            env.command = "decompose-binary";
            let f = load_form(&args.form)?;
            let outcome = binary_result(&f, &tol);
            env.emit(out, outcome)
        }
        Command::Rank(args) => {
            env.command = "rank";
            let f = load_form(&args.form)?;
            let budget = args.budget.unwrap_or(f.d());
            let outcome = complex_rank_binary(&f, &tol).and_then(|(complex_rank, _)| {
                let real_rank = match real_rank_binary(&f, budget, &tol)? {
                    RealRank::Exact(r) => RealRankDoc::Exact(r),
                    RealRank::Unknown { lower_bound, upper_bound } => RealRankDoc::Bounds { lower_bound, upper_bound },
                };
                Ok(RankResult { complex_rank, real_rank })
            });
            env.emit(out, outcome)
        }
        Command::LabelHypersurface(args) => {
            env.command = "label-hypersurface";
            let surface = load_form(&args.form)?;
            let point = ProjectivePoint::real(&args.point)?;
            let inst = HypersurfaceInstance::new(surface, point)?;
            let opts = HypersurfaceOptions {
                max_retries: args.max_retries.unwrap_or(config.max_retries),
                prefer_pair: args.prefer_pair,
            };
            if opts.max_retries == 0 {
                return Err(Usage("--max-retries must be at least 1".into()));
            }
            env.config.max_retries = opts.max_retries;
            let mut rng = substream(config.seed, &[TAG_HYPERSURFACE]);
            let outcome = find_label_hypersurface(&inst, &mut rng, &opts, &tol).map(|found| {
                let on_surface_residuals =
                    found.set.flatten().iter().map(|p| on_surface_residual(inst.surface(), p)).collect();
                HypersurfaceResult {
                    label: found.set.label(),
                    attempts: found.attempts,
                    set: found.set,
                    certificate: found.certificate,
                    on_surface_residuals,
                }
            });
            env.emit(out, outcome)
        }
        Command::DecomposeVeronese(args) => {
            env.command = "decompose-veronese";
            let f = load_form(&args.form)?;
            let nls = &config.nls;
            let outcome = if let Some(w) = args.weight {
                decompose_weight(&f, w, args.skip_all_real, nls, &tol)
            } else if let Some(t) = args.template {
                DecompositionProblem::new(f.clone(), t, nls.clone()).and_then(|p| decompose_with_template(&p, &tol))
            } else if let Some(k) = args.join {
                join_decompose(&f, k, nls, &tol)
            } else if let Some(k) = args.conjugate_only {
                conjugate_only_decompose(&f, k, nls, &tol)
            } else {
                unreachable!("clap enforces one mode")
            };
            let outcome = outcome.map(|decomposition| VeroneseResult {
                label: decomposition.set.label(),
                generic_rank: generic_rank(f.n(), f.d()),
                decomposition,
            });
            env.emit(out, outcome)
        }
        Command::Survey(args) => {
            env.command = "survey";
            let mut spec: EnsembleSpec =
                parse_json(&read(&args.spec)?).map_err(|e| Usage(format!("{}: {e}", args.spec.display())))?;
            if explicit_seed {
                spec.seed = config.seed;
            }
            env.seed = spec.seed;
            let histogram: LabelHistogram = match args.threads {
                Some(0) => return Err(Usage("--threads must be at least 1".into())),
                Some(t) => survey_labels_with_threads(&spec, t)?,
                None => survey_labels(&spec)?,
            };
            if let Some(path) = &args.csv {
                std::fs::write(path, histogram.to_csv())
                    .map_err(|e| Usage(format!("cannot write {}: {e}", path.display())))?;
            }
            env.emit(out, Ok(histogram))
        }
    }
}

fn binary_result(f: &HomogeneousForm, tol: &Tolerances) -> waring_labels::Result<BinaryResult> {
    let (complex_rank, _) = complex_rank_binary(f, tol)?;
    let (set, certificate) = sylvester_decompose(f, tol)?;
    Ok(BinaryResult { label: set.label(), complex_rank, set, certificate })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_argument() {
        assert_eq!(parse_template("2,3").unwrap(), Label::new(2, 3).unwrap());
        assert_eq!(parse_template(" 1 , 0 ").unwrap(), Label::new(1, 0).unwrap());
        assert!(parse_template("1").is_err());
        assert!(parse_template("0,0").is_err());
        assert!(parse_template("a,1").is_err());
    }

    #[test]
    fn default_config_is_valid() {
        GlobalConfig::default().validate().unwrap();
    }

    #[test]
    fn real_rank_doc_shapes() {
        assert_eq!(serde_json::to_string(&RealRankDoc::Exact(2)).unwrap(), "2");
        let b = RealRankDoc::Bounds { lower_bound: 3, upper_bound: None };
        assert_eq!(serde_json::to_string(&b).unwrap(), r#"{"lower_bound":3,"upper_bound":null}"#);
    }
}
