//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use waring_labels::algebra::{power_of_linear_form, ComplexScalar, HomogeneousForm, ProjectivePoint};
use waring_labels::binary::{classify_cubic, complex_rank_binary, curve_weight_bound, sylvester_decompose, CubicClass};
use waring_labels::decompose::{decompose_with_template, join_decompose, DecompositionProblem, NLSConfig, Objective};
use waring_labels::hypersurface::{
    find_label_hypersurface, on_surface_residual, HypersurfaceInstance, HypersurfaceOptions,
};
use waring_labels::labels::{label_of, reconstruct};
use waring_labels::rng::substream;
use waring_labels::{Label, LabeledSet, Tolerances};

struct Outcome {
    pass: bool,
    detail: String,
    /// Per-trial records, compared byte for byte across thread counts.
    json: String,
}

fn outcome<T: Serialize>(pass: bool, detail: String, records: &T) -> Outcome {
    Outcome { pass, detail, json: serde_json::to_string(records).expect("records serialize") }
}

fn gaussian_form(n: usize, d: usize, rng: &mut ChaCha8Rng) -> HomogeneousForm {
    let len = waring_labels::algebra::binomial(n + d, n) as usize;
    let c: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
    HomogeneousForm::from_real_dense(n, d, &c).expect("nonzero")
}

fn gaussian_point(nvars: usize, rng: &mut ChaCha8Rng) -> ProjectivePoint {
    let c: Vec<f64> = (0..nvars).map(|_| rng.sample(StandardNormal)).collect();
    ProjectivePoint::real(&c).expect("nonzero")
}

fn label(a: usize, b: usize) -> Label {
    Label::new(a, b).unwrap()
}

/// The set read back through the generic classifier has the claimed label.
fn sigma_invariant(set: &LabeledSet, tol: &Tolerances) -> bool {
    label_of(&set.flatten(), tol.tau_real, tol.tau_pair).is_ok_and(|s| s.label() == set.label())
}

#[derive(Serialize)]
struct LabelRecord {
    label: Option<Label>,
    residual: f64,
    worst_on_surface: f64,
    attempts: usize,
}

fn criterion_1() -> Outcome {
    let tol = Tolerances::default();
    let opts = HypersurfaceOptions::default();
    let allowed = [label(1, 0), label(0, 2), label(0, 1)];
    let records: Vec<LabelRecord> = (0..100u64 * 100)
        .into_par_iter()
        .map(|t| {
            let (c, p) = (t / 100, t % 100);
            let d = 2 + (c % 5) as usize;
            let curve = gaussian_form(2, d, &mut substream(101, &[c]));
            let q = gaussian_point(3, &mut substream(101, &[c, p, 1]));
            let inst = HypersurfaceInstance::new(curve.clone(), q).unwrap();
            match find_label_hypersurface(&inst, &mut substream(101, &[c, p, 2]), &opts, &tol) {
                Ok(found) => LabelRecord {
                    label: Some(found.set.label()),
                    residual: found.certificate.residual,
                    worst_on_surface: found
                        .set
                        .flatten()
                        .iter()
                        .map(|x| on_surface_residual(&curve, x))
                        .fold(0.0, f64::max),
                    attempts: found.attempts,
                },
                Err(_) => {
                    LabelRecord { label: None, residual: f64::INFINITY, worst_on_surface: f64::INFINITY, attempts: 0 }
                }
            }
        })
        .collect();
    let good = records
        .iter()
        .filter(|r| {
            r.label.is_some_and(|l| allowed.contains(&l))
                && r.residual <= 1e-8
                && r.worst_on_surface <= 1e-8
                && r.attempts <= opts.max_retries
        })
        .count();
    let max_attempts = records.iter().map(|r| r.attempts).max().unwrap_or(0);
    let detail = format!("{good}/{} instances certified, max retries used {max_attempts}", records.len());
    outcome(good == records.len(), detail, &records)
}

fn criterion_2() -> Outcome {
    let tol = Tolerances::default();
    let conic = HomogeneousForm::from_terms(
        2,
        2,
        [[2, 0, 0], [0, 2, 0], [0, 0, 2]].map(|a| (a.to_vec(), ComplexScalar::new(1.0, 0.0))),
    )
    .unwrap();
    let records: Vec<LabelRecord> = (0..1000u64)
        .into_par_iter()
        .map(|t| {
            let q = gaussian_point(3, &mut substream(202, &[t, 1]));
            let inst = HypersurfaceInstance::new(conic.clone(), q).unwrap();
            match find_label_hypersurface(&inst, &mut substream(202, &[t, 2]), &HypersurfaceOptions::default(), &tol) {
                Ok(found) => LabelRecord {
                    label: Some(found.set.label()),
                    residual: found.certificate.residual,
                    worst_on_surface: found
                        .set
                        .flatten()
                        .iter()
                        .map(|x| on_surface_residual(&conic, x))
                        .fold(0.0, f64::max),
                    attempts: found.attempts,
                },
                Err(_) => {
                    LabelRecord { label: None, residual: f64::INFINITY, worst_on_surface: f64::INFINITY, attempts: 0 }
                }
            }
        })
        .collect();
    let good = records.iter().filter(|r| r.label == Some(label(1, 0)) && r.residual <= 1e-10).count();
    outcome(good == records.len(), format!("{good}/{} points labeled (1,0)", records.len()), &records)
}

/// Discriminant of `a x³ + b x²y + c xy² + d y³`: positive for three distinct
/// real roots, negative for one real root and a conjugate pair.
fn cubic_discriminant(f: &HomogeneousForm) -> f64 {
    let c = f.real_coeffs().unwrap();
    let (a, b, c, d) = (c[0], c[1], c[2], c[3]);
    b * b * c * c - 4.0 * a * c * c * c - 4.0 * b * b * b * d - 27.0 * a * a * d * d + 18.0 * a * b * c * d
}

#[derive(Serialize)]
struct CubicRecord {
    class: Option<CubicClass>,
    label: Option<Label>,
    discriminant_positive: bool,
}

fn criterion_3() -> Outcome {
    let tol = Tolerances { tau_sep: 1e-6, ..Tolerances::default() };
    let records: Vec<CubicRecord> = (0..10_000u64)
        .into_par_iter()
        .map(|t| {
            let f = gaussian_form(1, 3, &mut substream(303, &[t]));
            CubicRecord {
                class: classify_cubic(&f, &tol).ok(),
                label: sylvester_decompose(&f, &tol).ok().map(|(s, _)| s.label()),
                discriminant_positive: cubic_discriminant(&f) > 0.0,
            }
        })
        .collect();
    let n = records.len();
    let pair = records.iter().filter(|r| r.class == Some(CubicClass::PairClass)).count();
    let real = records.iter().filter(|r| r.class == Some(CubicClass::RealClass)).count();
    let tangent = records.iter().filter(|r| r.class == Some(CubicClass::TangentDevelopable)).count();
    let agree = records
        .iter()
        .filter(|r| {
            let (want_class, want_label) = if r.discriminant_positive {
                (CubicClass::PairClass, label(1, 0))
            } else {
                (CubicClass::RealClass, label(0, 2))
            };
            r.class == Some(want_class) && r.label == Some(want_label)
        })
        .count();
    let pass = pair * 20 >= n && real * 20 >= n && tangent == 0 && agree == n;
    let detail = format!(
        "pair {:.1}%, real {:.1}%, tangent {tangent}, oracle agreement {agree}/{n}",
        100.0 * pair as f64 / n as f64,
        100.0 * real as f64 / n as f64
    );
    outcome(pass, detail, &records)
}

#[derive(Serialize)]
struct SylvesterRecord {
    d: usize,
    rank: Option<usize>,
    label: Option<Label>,
    reconstruction: f64,
    invariant: bool,
}

fn sylvester_trials(seed: u64, degrees: std::ops::RangeInclusive<usize>) -> Vec<SylvesterRecord> {
    let tol = Tolerances::default();
    let degrees: Vec<usize> = degrees.collect();
    (0..degrees.len() as u64 * 1000)
        .into_par_iter()
        .map(|t| {
            let d = degrees[(t / 1000) as usize];
            let f = gaussian_form(1, d, &mut substream(seed, &[d as u64, t % 1000]));
            let rank = complex_rank_binary(&f, &tol).ok().map(|(r, _)| r);
            match sylvester_decompose(&f, &tol) {
                Ok((set, cert)) => SylvesterRecord {
                    d,
                    rank,
                    label: Some(set.label()),
                    reconstruction: reconstruct(&set, &cert, d).map_or(f64::INFINITY, |g| f.relative_distance(&g)),
                    invariant: sigma_invariant(&set, &tol),
                },
                Err(_) => SylvesterRecord { d, rank, label: None, reconstruction: f64::INFINITY, invariant: false },
            }
        })
        .collect()
}

fn criterion_4() -> Outcome {
    let records = sylvester_trials(404, 3..=8);
    let good = records
        .iter()
        .filter(|r| {
            let generic = (r.d + 2) / 2;
            r.rank == Some(generic)
                && r.label.is_some_and(|l| l.weight() == generic)
                && r.reconstruction <= 1e-8
                && r.invariant
        })
        .count();
    let worst = records.iter().map(|r| r.reconstruction).fold(0.0, f64::max);
    let detail = format!("{good}/{} forms, worst reconstruction {worst:.2e}", records.len());
    outcome(good == records.len(), detail, &records)
}

fn criterion_5() -> Outcome {
    let records = sylvester_trials(505, 3..=10);
    let good = records.iter().filter(|r| r.label.is_some_and(|l| l.weight() <= curve_weight_bound(r.d))).count();
    let failures = records.iter().filter(|r| r.label.is_none()).count();
    let max_excess = records
        .iter()
        .filter_map(|r| r.label.map(|l| l.weight() as i64 - curve_weight_bound(r.d) as i64))
        .max()
        .unwrap_or(0);
    let detail =
        format!("{good}/{} within bound, {failures} failures, max weight minus bound {max_excess}", records.len());
    outcome(good == records.len(), detail, &records)
}

#[derive(Serialize)]
struct JacobianRecord {
    n: usize,
    d: usize,
    relative_error: f64,
}

fn criterion_6() -> Outcome {
    let settings = [(1usize, 5usize, label(1, 2)), (2, 4, label(1, 2)), (2, 5, label(2, 3))];
    let records: Vec<JacobianRecord> = (0..settings.len() as u64 * 20)
        .into_par_iter()
        .map(|t| {
            let (n, d, template) = settings[(t / 20) as usize];
            let mut rng = substream(606, &[t]);
            let f = gaussian_form(n, d, &mut rng);
            let obj = Objective::new(&f, template).unwrap();
            let x: Vec<f64> = (0..obj.layout().len()).map(|_| rng.sample(StandardNormal)).collect();
            let (_, jac) = obj.residual_and_jacobian(&x).unwrap();
            let mut diff = 0.0;
            for k in 0..x.len() {
                let h = 1e-6 * x[k].abs().max(1.0);
                let mut plus = x.clone();
                let mut minus = x.clone();
                plus[k] += h;
                minus[k] -= h;
                let fd = (obj.residual(&plus).unwrap() - obj.residual(&minus).unwrap()) / (2.0 * h);
                diff += (fd - jac.column(k)).norm_squared();
            }
            JacobianRecord { n, d, relative_error: diff.sqrt() / jac.norm() }
        })
        .collect();
    let worst = records.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    outcome(worst <= 1e-5, format!("worst relative error {worst:.2e} over {} points", records.len()), &records)
}

/// `Σ λ_i ℓ_{p_i}^d + Σ 2 Re(μ_j ℓ_{q_j}^d)` with Gaussian points and coefficients.
fn planted(n: usize, d: usize, template: Label, rng: &mut ChaCha8Rng) -> HomogeneousForm {
    let len = waring_labels::algebra::binomial(n + d, n) as usize;
    let mut acc = vec![0.0; len];
    for _ in 0..template.b() {
        let p = gaussian_point(n + 1, rng);
        let lam: f64 = rng.sample(StandardNormal);
        for (a, c) in acc.iter_mut().zip(power_of_linear_form(&p, d).unwrap().coeffs()) {
            *a += lam * c.re;
        }
    }
    for _ in 0..template.a() {
        let c: Vec<ComplexScalar> =
            (0..=n).map(|_| ComplexScalar::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        let q = ProjectivePoint::new(c).unwrap();
        let mu = ComplexScalar::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        for (a, c) in acc.iter_mut().zip(power_of_linear_form(&q, d).unwrap().coeffs()) {
            *a += 2.0 * (mu * c).re;
        }
    }
    HomogeneousForm::from_real_dense(n, d, &acc).unwrap()
}

#[derive(Serialize)]
struct RecoveryRecord {
    template: Label,
    label: Option<Label>,
    residual: f64,
    restart: Option<usize>,
}

fn criterion_7() -> Outcome {
    let tol = Tolerances::default();
    let templates: Vec<Label> = (0..=3usize)
        .flat_map(|a| (0..=6usize).filter(move |&b| a + b > 0 && 2 * a + b <= 6).map(move |b| label(a, b)))
        .collect();
    let records: Vec<RecoveryRecord> = (0..100u64)
        .into_par_iter()
        .map(|t| {
            let template = templates[t as usize % templates.len()];
            let f = planted(2, 5, template, &mut substream(707, &[t]));
            let config = NLSConfig { restarts: 8, ..NLSConfig::default() }.with_seed(7070 + t);
            let problem = DecompositionProblem::new(f.clone(), template, config).unwrap();
            match decompose_with_template(&problem, &tol) {
                Ok(dec) => RecoveryRecord {
                    template,
                    label: label_of(&dec.set.flatten(), tol.tau_real, tol.tau_pair).ok().map(|s| s.label()),
                    residual: reconstruct(&dec.set, &dec.certificate, 5)
                        .map_or(f64::INFINITY, |g| f.relative_distance(&g)),
                    restart: Some(dec.restart),
                },
                Err(_) => RecoveryRecord { template, label: None, residual: f64::INFINITY, restart: None },
            }
        })
        .collect();
    let good = records.iter().filter(|r| r.label == Some(r.template) && r.residual <= 1e-6).count();
    outcome(good >= 95, format!("{good}/100 planted decompositions recovered"), &records)
}

#[derive(Serialize)]
struct JoinRecord {
    label: Option<Label>,
    residual: f64,
    checks: bool,
}

fn criterion_8() -> Outcome {
    let tol = Tolerances::default();
    let records: Vec<JoinRecord> = (0..50u64)
        .into_par_iter()
        .map(|t| {
            let f = gaussian_form(2, 5, &mut substream(808, &[t]));
            let config = NLSConfig::default().with_seed(8080 + t);
            match join_decompose(&f, 6, &config, &tol) {
                Ok(dec) => {
                    let residual =
                        reconstruct(&dec.set, &dec.certificate, 5).map_or(f64::INFINITY, |g| f.relative_distance(&g));
                    JoinRecord {
                        label: Some(dec.set.label()),
                        residual,
                        checks: sigma_invariant(&dec.set, &tol) && residual <= 1e-6,
                    }
                }
                Err(_) => JoinRecord { label: None, residual: f64::INFINITY, checks: false },
            }
        })
        .collect();
    let weight7 = records.iter().filter(|r| r.label.is_some_and(|l| l.weight() == 7) && r.residual <= 1e-6).count();
    let bad_successes = records.iter().filter(|r| r.label.is_some() && !r.checks).count();
    let pass = weight7 * 10 >= records.len() * 6 && bad_successes == 0;
    let detail = format!("{weight7}/{} weight-7 certificates, {bad_successes} successes failing checks", records.len());
    outcome(pass, detail, &records)
}

type Criterion = (&'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 8] = [
    ("plane curve labels lie in {(1,0),(0,2),(0,1)}", criterion_1),
    ("real-point-free conic gives (1,0)", criterion_2),
    ("binary cubic classes vs discriminant", criterion_3),
    ("binary forms: rank, residual, invariance", criterion_4),
    ("binary weight bound (d+5)/2", criterion_5),
    ("analytic vs finite-difference Jacobian", criterion_6),
    ("planted ternary quintic recovery", criterion_7),
    ("ternary quintics at weight 7 by joining", criterion_8),
];

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

fn main() {
    let mut passed = 0;
    let mut outputs = Vec::new();
    for (i, (name, run)) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("[{verdict}] {}. {name}: {} ({:.1}s)", i + 1, o.detail, start.elapsed().as_secs_f64());
        passed += usize::from(o.pass);
        outputs.push(o.json);
    }

    let start = Instant::now();
    let many = std::thread::available_parallelism().map_or(4, |n| n.get()).max(4);
    let mut mismatched = Vec::new();
    for threads in [1, many] {
        for (i, (_, run)) in CRITERIA.iter().enumerate() {
            if in_pool(threads, run).json != outputs[i] {
                mismatched.push(format!("{} at {threads} threads", i + 1));
            }
        }
    }
    let ok = mismatched.is_empty();
    let detail = if ok {
        format!("criteria 1-8 byte-identical at 1 and {many} threads")
    } else {
        format!("outputs differ: {}", mismatched.join(", "))
    };
    println!(
        "[{}] 9. determinism across thread counts: {detail} ({:.1}s)",
        if ok { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    passed += usize::from(ok);

    println!("{passed}/9 criteria passed");
    if passed != 9 {
        std::process::exit(1);
    }
}
