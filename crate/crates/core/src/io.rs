//! JSON documents for forms and points.
//!
//! A form is written as
//! `{"n": 1, "d": 3, "coeffs": [{"alpha": [3, 0], "re": 1.0, "im": 0.0}, ...]}`.
//! With `"basis": "scaled"` each listed value is multiplied by the
//! multinomial coefficient of its exponent before use.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::algebra::{multinomial, ComplexScalar, HomogeneousForm};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    #[default]
    Monomial,
    Scaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub alpha: Vec<u32>,
    pub re: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub im: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormDoc {
    pub n: usize,
    pub d: usize,
    #[serde(default, skip_serializing_if = "is_monomial")]
    pub basis: Basis,
    pub coeffs: Vec<TermDoc>,
}

fn is_monomial(b: &Basis) -> bool {
    *b == Basis::Monomial
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema { path: path.into(), message: message.into() }
}

impl FormDoc {
    /// Lists the nonzero monomial coefficients of `f`.
    pub fn from_form(f: &HomogeneousForm) -> Self {
        let coeffs = f
            .basis()
            .exponents()
            .iter()
            .zip(f.coeffs())
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .map(|(alpha, c)| TermDoc { alpha: alpha.clone(), re: c.re, im: c.im })
            .collect();
        Self { n: f.n(), d: f.d(), basis: Basis::Monomial, coeffs }
    }

    pub fn to_form(&self) -> Result<HomogeneousForm> {
        if self.d == 0 {
            return Err(schema("d", "degree must be at least 1"));
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut terms = Vec::with_capacity(self.coeffs.len());
        for (i, t) in self.coeffs.iter().enumerate() {
            let total: u64 = t.alpha.iter().map(|&e| u64::from(e)).sum();
            if t.alpha.len() != self.n + 1 || total != self.d as u64 {
                return Err(schema(
                    format!("coeffs[{i}].alpha"),
                    format!("expected {} exponents summing to {}, got {:?}", self.n + 1, self.d, t.alpha),
                ));
            }
            if !seen.insert(t.alpha.clone()) {
                return Err(schema(format!("coeffs[{i}].alpha"), "repeated exponent vector"));
            }
            for (field, v) in [("re", t.re), ("im", t.im)] {
                if !v.is_finite() {
                    return Err(schema(format!("coeffs[{i}].{field}"), "value must be finite"));
                }
            }
            let w = match self.basis {
                Basis::Monomial => 1.0,
                Basis::Scaled => multinomial(&t.alpha),
            };
            terms.push((t.alpha.clone(), ComplexScalar::new(t.re * w, t.im * w)));
        }
        HomogeneousForm::from_terms(self.n, self.d, terms).map_err(|e| match e {
            Error::ZeroForm => schema("coeffs", "form has no nonzero coefficient"),
            other => other,
        })
    }
}

/// Parses JSON, reporting the path of the first offending element.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "$".to_string() } else { path };
        schema(path, e.into_inner().to_string())
    })
}

pub fn parse_form(text: &str) -> Result<HomogeneousForm> {
    parse_json::<FormDoc>(text)?.to_form()
}
