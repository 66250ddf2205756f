//! Perturbations `theta(z, Im w)` of the model and the weighted rescaling
//! `r_t = t^{-d} r o Lambda_t`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypersurface::DefiningFunction;
use crate::model::ModelHypersurface;
use crate::poly::{weighted, Exponent, Poly, HERMITIAN_TOL};

/// Monomial of a coefficient function `r_{JKl}(z, conj z, s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientMonomial {
    #[serde(rename = "J")]
    pub j: Vec<u32>,
    #[serde(rename = "K")]
    pub k: Vec<u32>,
    #[serde(default)]
    pub l: u32,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// One term `z^J conj(z)^K s^l r_{JKl}` of a perturbation. The coefficient
/// function is the constant `re + i im` plus the listed monomials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationTerm {
    #[serde(rename = "J")]
    pub j: Vec<u32>,
    #[serde(rename = "K")]
    pub k: Vec<u32>,
    #[serde(default)]
    pub l: u32,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    #[serde(default)]
    pub coefficient: Vec<CoefficientMonomial>,
}

/// JSON form of a perturbation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationSpec {
    pub terms: Vec<DeformationTerm>,
    #[serde(default = "unit_scale")]
    pub scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

impl DeformationSpec {
    pub fn zero() -> Self {
        Self {
            terms: Vec::new(),
            scale: 1.0,
        }
    }
}

/// `r = -Re w + P(z) + theta(z, Im w)`, optionally rescaled by `t`.
#[derive(Clone, Debug)]
pub struct PerturbedHypersurface {
    model: ModelHypersurface,
    spec: DeformationSpec,
    theta: Poly,
    t: f64,
    defining: DefiningFunction,
}

impl PerturbedHypersurface {
    pub fn unperturbed(model: ModelHypersurface) -> Self {
        let theta = Poly::new(model.polynomial().n());
        let defining = model.defining().clone();
        Self {
            model,
            spec: DeformationSpec::zero(),
            theta,
            t: 1.0,
            defining,
        }
    }

    /// Validates every term against the allowed deformation classes and
    /// checks that the flattened perturbation is real-valued.
    pub fn new(model: ModelHypersurface, spec: DeformationSpec) -> Result<Self> {
        let p = model.polynomial();
        let n = p.n();
        let m = p.weights().as_slice();
        let d = p.degree();
        if !(spec.scale > 0.0) || !spec.scale.is_finite() {
            return Err(Error::InvalidDeformation(format!(
                "scale must be positive, got {}",
                spec.scale
            )));
        }
        let mut theta = Poly::new(n);
        for (idx, term) in spec.terms.iter().enumerate() {
            if term.j.len() != n || term.k.len() != n {
                return Err(Error::InvalidDeformation(format!(
                    "term {idx}: exponent vectors must have length {n}"
                )));
            }
            let wd = weighted(&term.j, m) + weighted(&term.k, m);
            let class_ok = (term.l == 0 && wd == d + 1) || (term.l >= 1 && term.l <= d && wd + term.l == d);
            if !class_ok {
                return Err(Error::InvalidDeformation(format!(
                    "term {idx}: weighted degree {wd} with s-power {} is not an allowed deformation",
                    term.l
                )));
            }
            let mut coeffs: Vec<(Exponent, C64)> = Vec::new();
            if term.re != 0.0 || term.im != 0.0 {
                coeffs.push((Exponent::new(vec![0; n], vec![0; n], 0), C64::new(term.re, term.im)));
            }
            for mono in &term.coefficient {
                if mono.j.len() != n || mono.k.len() != n {
                    return Err(Error::InvalidDeformation(format!(
                        "term {idx}: coefficient exponents must have length {n}"
                    )));
                }
                if term.l == 0 && mono.l != 0 {
                    return Err(Error::InvalidDeformation(format!(
                        "term {idx}: coefficients of s-free terms must not depend on s"
                    )));
                }
                coeffs.push((
                    Exponent::new(mono.j.clone(), mono.k.clone(), mono.l),
                    C64::new(mono.re, mono.im),
                ));
            }
            for (e, c) in coeffs {
                let flat = Exponent::new(
                    term.j.iter().zip(&e.j).map(|(a, b)| a + b).collect(),
                    term.k.iter().zip(&e.k).map(|(a, b)| a + b).collect(),
                    term.l + e.l,
                );
                theta.add_term(flat, c)?;
            }
        }
        for (e, _) in theta.terms() {
            let wd = weighted(&e.j, m) + weighted(&e.k, m);
            let allowed = if e.l == 0 { wd > d } else { wd + e.l >= d };
            if !allowed {
                return Err(Error::InvalidDeformation(format!(
                    "monomial z^{:?} zbar^{:?} s^{} has weighted order below d",
                    e.j, e.k, e.l
                )));
            }
        }
        let defect = theta.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidDeformation(format!(
                "perturbation is not real-valued (defect {defect:.3e})"
            )));
        }
        let t = spec.scale;
        let scaled = scale_theta(&theta, m, d, t);
        let defining = DefiningFunction::new(p, scaled);
        Ok(Self {
            model,
            spec,
            theta,
            t,
            defining,
        })
    }

    pub fn from_json(model: ModelHypersurface, text: &str) -> Result<Self> {
        let spec: DeformationSpec = serde_json::from_str(text)?;
        Self::new(model, spec)
    }

    /// `t^{-d} r o Lambda_t` relative to the unscaled perturbation.
    pub fn rescaled(&self, t: f64) -> Result<Self> {
        let mut spec = self.spec.clone();
        spec.scale = t;
        Self::new(self.model.clone(), spec)
    }

    pub fn model(&self) -> &ModelHypersurface {
        &self.model
    }

    pub fn spec(&self) -> &DeformationSpec {
        &self.spec
    }

    /// Unscaled perturbation.
    pub fn theta(&self) -> &Poly {
        &self.theta
    }

    pub fn scale(&self) -> f64 {
        self.t
    }

    pub fn defining(&self) -> &DefiningFunction {
        &self.defining
    }

    pub fn is_model(&self) -> bool {
        self.theta.is_empty()
    }
}

/// Coefficient of `z^J conj(z)^K s^l` scaled by `t^{M(J+K) + d l - d}`.
fn scale_theta(theta: &Poly, m: &[u32], d: u32, t: f64) -> Poly {
    let mut out = Poly::new(theta.n());
    for (e, &c) in theta.terms() {
        let exp = (weighted(&e.j, m) + weighted(&e.k, m) + d * e.l) as i32 - d as i32;
        out.add_term(e.clone(), c * t.powi(exp))
            .expect("exponent lengths already validated");
    }
    out
}
