//! JSON shapes shared by the library and the command-line front end.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characters::ProductCharacter;
use crate::error::{Error, Result};
use crate::funcspace::{LimitPeriodicSeries, RawProductPoly, SolenoidPoly, SolenoidTerm};
use crate::rationals::{Rational, RationalAngle};

/// `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexJson {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexJson> for Complex64 {
    fn from(z: ComplexJson) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// One term of a function spec. Solenoid terms give `q`; a raw product
/// term on ℝ×Ẑ gives `lambda` and `rho` instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub coeff: ComplexJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<RationalAngle>,
}

/// `{"terms": [...], "majorant": [B_1, B_2, ...]?}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub terms: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub majorant: Option<Vec<f64>>,
}

/// A parsed spec: invariant polynomial, or raw terms that may not descend.
#[derive(Debug, Clone)]
pub enum SpecFunction {
    Poly(SolenoidPoly),
    Raw(RawProductPoly),
}

impl FunctionSpec {
    pub fn from_poly(phi: &SolenoidPoly) -> Self {
        Self {
            terms: phi
                .pairs()
                .map(|(q, c)| TermJson {
                    coeff: (*c).into(),
                    q: Some(q.clone()),
                    lambda: None,
                    rho: None,
                })
                .collect(),
            majorant: None,
        }
    }

    fn product_terms(&self) -> Result<Vec<(ProductCharacter, Complex64)>> {
        self.terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let ch = match (&t.q, &t.lambda, &t.rho) {
                    (Some(q), None, None) => ProductCharacter::new(q.clone(), q.frac()),
                    (None, Some(l), Some(r)) => ProductCharacter::new(l.clone(), r.clone()),
                    _ => {
                        return Err(Error::Domain(format!(
                            "/terms/{i}: give either \"q\" or both \"lambda\" and \"rho\""
                        )))
                    }
                };
                let c: Complex64 = t.coeff.into();
                if !(c.re.is_finite() && c.im.is_finite()) {
                    return Err(Error::Domain(format!("/terms/{i}/coeff: non-finite")));
                }
                Ok((ch, c))
            })
            .collect()
    }

    /// Descends to a [`SolenoidPoly`] when every term does, else stays raw.
    pub fn function(&self) -> Result<SpecFunction> {
        let raw = RawProductPoly::from_terms(self.product_terms()?);
        Ok(match raw.descend() {
            Ok(p) => SpecFunction::Poly(p),
            Err(_) => SpecFunction::Raw(raw),
        })
    }

    /// The spec as a series with the given majorant; terms in file order.
    pub fn series(&self) -> Result<LimitPeriodicSeries> {
        let majorant = self
            .majorant
            .clone()
            .ok_or_else(|| Error::Domain("/majorant: series input needs a majorant".into()))?;
        let terms = self
            .product_terms()?
            .into_iter()
            .map(|(ch, c)| {
                ch.descend()
                    .map(|s| SolenoidTerm::new(c, s.q))
                    .ok_or_else(|| Error::Domain(format!("series term {ch:?} does not descend")))
            })
            .collect::<Result<Vec<_>>>()?;
        LimitPeriodicSeries::finite(terms, majorant)
    }
}
