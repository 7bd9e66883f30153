use num_complex::Complex64;

use crate::{Error, Result};

/// Scalars of the complex field. Public operations reject NaN and infinities.
pub type ComplexScalar = Complex64;

/// Moduli within this relative gap of the maximum count as tied for the pivot.
const PIVOT_TIE: f64 = 1e-12;

/// Default threshold below which imaginary parts are treated as zero.
pub const DEFAULT_TAU_REAL: f64 = 1e-8;

/// A point of complex projective space, stored as its canonical representative.
///
/// The representative has its largest-modulus coordinate equal to `1` (lowest
/// index wins ties). Points whose imaginary parts are all below `tau_real`
/// after normalization are flagged real and have their imaginary parts
/// snapped to exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    coords: Vec<ComplexScalar>,
    is_real: bool,
}

pub(crate) fn check_finite(values: &[ComplexScalar], what: &'static str) -> Result<()> {
    if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn pivot_index(coords: &[ComplexScalar]) -> Option<usize> {
    let max = coords.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    if max == 0.0 {
        return None;
    }
    coords.iter().position(|z| z.norm() >= max * (1.0 - PIVOT_TIE))
}

impl ProjectivePoint {
    pub fn new(coords: Vec<ComplexScalar>) -> Result<Self> {
        Self::with_tolerance(coords, DEFAULT_TAU_REAL)
    }

    pub fn with_tolerance(mut coords: Vec<ComplexScalar>, tau_real: f64) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        check_finite(&coords, "point coordinates")?;
        let pivot = pivot_index(&coords).ok_or(Error::ZeroPoint)?;
        if coords[pivot] != ComplexScalar::new(1.0, 0.0) {
            let scale = coords[pivot].inv();
            for z in coords.iter_mut() {
                *z *= scale;
            }
            coords[pivot] = ComplexScalar::new(1.0, 0.0);
        }
        let is_real = coords.iter().all(|z| z.im.abs() <= tau_real);
        if is_real {
            for z in coords.iter_mut() {
                z.im = 0.0;
            }
        }
        Ok(Self { coords, is_real })
    }

    pub fn real(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| ComplexScalar::new(x, 0.0)).collect())
    }

    /// Builds a point from `(re, im)` coordinate pairs.
    pub fn from_parts(parts: &[(f64, f64)]) -> Result<Self> {
        Self::new(parts.iter().map(|&(re, im)| ComplexScalar::new(re, im)).collect())
    }

    /// Ambient projective dimension (number of coordinates minus one).
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[ComplexScalar] {
        &self.coords
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn real_coords(&self) -> Option<Vec<f64>> {
        self.is_real.then(|| self.coords.iter().map(|z| z.re).collect())
    }

    /// Complex conjugation σ, re-normalized. Real points are fixed.
    pub fn conjugate(&self) -> Self {
        if self.is_real {
            return self.clone();
        }
        let coords: Vec<_> = self.coords.iter().map(|z| z.conj()).collect();
        // Conjugation preserves moduli, so the pivot is unchanged and the
        // representative is already canonical.
        Self { coords, is_real: false }
    }

    /// Phase-invariant chordal distance between the lines spanned by two points.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.coords.len(), other.coords.len(), "dimension mismatch");
        let na = self.coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nb = other.coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let inner: ComplexScalar = other.coords.iter().zip(&self.coords).map(|(b, a)| b.conj() * a).sum();
        let phase = if inner.norm() > 0.0 { inner / inner.norm() } else { ComplexScalar::new(1.0, 0.0) };
        self.coords.iter().zip(&other.coords).map(|(a, b)| (a / na - phase * b / nb).norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest imaginary part of the canonical representative.
    pub fn max_imag(&self) -> f64 {
        self.coords.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Index of the coordinate fixed to one.
    pub fn pivot(&self) -> usize {
        pivot_index(&self.coords).unwrap_or(0)
    }

    /// Picks between `self` and its conjugate the one whose first clearly
    /// non-real coordinate has positive imaginary part.
    pub(crate) fn pair_representative(self, tau_real: f64) -> Self {
        match self.coords.iter().find(|z| z.im.abs() > tau_real) {
            Some(z) if z.im < 0.0 => self.conjugate(),
            _ => self,
        }
    }
}

pub fn conjugate_point(p: &ProjectivePoint) -> ProjectivePoint {
    p.conjugate()
}
