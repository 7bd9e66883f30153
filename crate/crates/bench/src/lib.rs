//! Fixed inputs for the benchmarks.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use waring_labels::algebra::{binomial, power_of_linear_form, ComplexScalar, HomogeneousForm, ProjectivePoint};
use waring_labels::rng::substream;
use waring_labels::Label;

pub use waring_labels;

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_form(n: usize, d: usize, seed: u64) -> HomogeneousForm {
    let mut rng = substream(seed, &[n as u64, d as u64]);
    let c: Vec<f64> = (0..binomial(n + d, n) as usize).map(|_| gauss(&mut rng)).collect();
    HomogeneousForm::from_real_dense(n, d, &c).expect("nonzero")
}

pub fn gaussian_point(nvars: usize, seed: u64) -> ProjectivePoint {
    let mut rng = substream(seed, &[nvars as u64]);
    let c: Vec<f64> = (0..nvars).map(|_| gauss(&mut rng)).collect();
    ProjectivePoint::real(&c).expect("nonzero")
}

/// A real form with a known decomposition of the given label.
pub fn planted_form(n: usize, d: usize, label: Label, seed: u64) -> HomogeneousForm {
    let mut rng = substream(seed, &[label.a() as u64, label.b() as u64]);
    let mut acc = vec![0.0; binomial(n + d, n) as usize];
    for _ in 0..label.b() {
        let c: Vec<f64> = (0..=n).map(|_| gauss(&mut rng)).collect();
        let lam = gauss(&mut rng);
        let p = ProjectivePoint::real(&c).expect("nonzero");
        for (a, z) in acc.iter_mut().zip(power_of_linear_form(&p, d).expect("valid").coeffs()) {
            *a += lam * z.re;
        }
    }
    for _ in 0..label.a() {
        let c: Vec<ComplexScalar> = (0..=n).map(|_| ComplexScalar::new(gauss(&mut rng), gauss(&mut rng))).collect();
        let mu = ComplexScalar::new(gauss(&mut rng), gauss(&mut rng));
        let q = ProjectivePoint::new(c).expect("nonzero");
        for (a, z) in acc.iter_mut().zip(power_of_linear_form(&q, d).expect("valid").coeffs()) {
            *a += 2.0 * (mu * z).re;
        }
    }
    HomogeneousForm::from_real_dense(n, d, &acc).expect("nonzero")
}
