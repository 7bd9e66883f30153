//! Conjugation-invariant ("labeled") additive decompositions of real forms
//! and of real points relative to real hypersurfaces.

pub mod algebra;
pub mod binary;
pub mod config;
pub mod decompose;
mod error;
pub mod hypersurface;
pub mod io;
pub mod labels;
pub mod rng;
pub mod survey;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use labels::{Label, LabeledSet, SpanCertificate};
