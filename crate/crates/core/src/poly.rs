//! Polynomials in `(z, conj z, s)` and validated weighted homogeneous
//! Hermitian model polynomials.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circle::CircleFunction;
use crate::error::{Error, Result};

/// Relative tolerance for Hermitian symmetry of coefficients.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Exponents of `z^J conj(z)^K s^l`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Exponent {
    pub j: Vec<u32>,
    pub k: Vec<u32>,
    pub l: u32,
}

impl Exponent {
    pub fn new(j: Vec<u32>, k: Vec<u32>, l: u32) -> Self {
        Self { j, k, l }
    }

    /// Exponent of the complex-conjugate monomial.
    pub fn conjugate(&self) -> Self {
        Self {
            j: self.k.clone(),
            k: self.j.clone(),
            l: self.l,
        }
    }
}

/// Differentiation variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    Z(usize),
    ZBar(usize),
    S,
}

/// Complex-coefficient polynomial in `z`, `conj z` and a real variable `s`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    n: usize,
    terms: BTreeMap<Exponent, C64>,
}

impl Poly {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, e: &Exponent) -> C64 {
        self.terms.get(e).copied().unwrap_or_default()
    }

    /// Adds `c` to the coefficient of `e`, dropping exact zeros.
    pub fn add_term(&mut self, e: Exponent, c: C64) -> Result<()> {
        if e.j.len() != self.n || e.k.len() != self.n {
            return Err(Error::Dimension(format!(
                "exponent lengths {}/{} for n = {}",
                e.j.len(),
                e.k.len(),
                self.n
            )));
        }
        let entry = self.terms.entry(e).or_default();
        *entry += c;
        if *entry == C64::default() {
            self.terms.retain(|_, v| *v != C64::default());
        }
        Ok(())
    }

    pub fn add(&self, other: &Poly) -> Result<Poly> {
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e.clone(), *c)?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: C64) -> Poly {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out.terms.retain(|_, v| *v != C64::default());
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Formal partial derivative (Wirtinger in `z`, `conj z`).
    pub fn derivative(&self, var: Var) -> Poly {
        let mut out = Poly::new(self.n);
        for (e, &c) in &self.terms {
            let mut e2 = e.clone();
            let power = match var {
                Var::Z(i) => &mut e2.j[i],
                Var::ZBar(i) => &mut e2.k[i],
                Var::S => &mut e2.l,
            };
            if *power == 0 {
                continue;
            }
            let factor = *power as f64;
            *power -= 1;
            *out.terms.entry(e2).or_default() += c * factor;
        }
        out.terms.retain(|_, v| *v != C64::default());
        out
    }

    /// Value at `(z, conj z, s)`.
    pub fn eval(&self, z: &[C64], s: f64) -> C64 {
        self.terms
            .iter()
            .map(|(e, &c)| c * monomial_value(e, z, s))
            .sum()
    }

    /// Sum of the moduli of the individual term values, a cancellation scale.
    pub fn eval_magnitude(&self, z: &[C64], s: f64) -> f64 {
        self.terms
            .iter()
            .map(|(e, &c)| (c * monomial_value(e, z, s)).norm())
            .sum()
    }

    /// Largest relative mismatch between a coefficient and the conjugate of
    /// its mirror coefficient; zero exactly when the polynomial is real-valued.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs_coeff().max(f64::MIN_POSITIVE);
        self.terms
            .iter()
            .map(|(e, &c)| (c - self.coefficient(&e.conjugate()).conj()).norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// Substitutes the disc `z_i = (1 - zeta)^{m_i} v_i` (with `s = 0`) and
    /// multiplies by `zeta^shift`, exactly in Laurent coefficients.
    pub fn on_disc(&self, v: &[C64], weights: &[u32], shift: i64, nf: usize) -> Result<CircleFunction> {
        if v.len() != self.n || weights.len() != self.n {
            return Err(Error::Dimension(format!(
                "disc direction has length {}, expected {}",
                v.len(),
                self.n
            )));
        }
        let mut acc: BTreeMap<i64, C64> = BTreeMap::new();
        for (e, &c) in &self.terms {
            if e.l != 0 {
                return Err(Error::InvalidArgument(
                    "disc substitution requires a polynomial free of s".into(),
                ));
            }
            let a = weighted(&e.j, weights);
            let b = weighted(&e.k, weights);
            let mut coef = c;
            for i in 0..self.n {
                coef *= v[i].powu(e.j[i]) * v[i].conj().powu(e.k[i]);
            }
            if coef == C64::default() {
                continue;
            }
            // (1 - zeta)^a (1 - 1/zeta)^b = sum_p sum_q C(a,p)C(b,q)(-1)^{p+q} zeta^{p-q}
            for p in 0..=a {
                let cp = binomial(a, p) * sign(p);
                for q in 0..=b {
                    let cq = binomial(b, q) * sign(q);
                    *acc.entry(p as i64 - q as i64 + shift).or_default() += coef * (cp * cq);
                }
            }
        }
        let mut f = CircleFunction::zero(nf);
        for (k, c) in acc {
            if c != C64::default() {
                f.set(k, c)?;
            }
        }
        Ok(f)
    }
}

fn sign(p: u32) -> f64 {
    if p % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Binomial coefficient as a float.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `M . J`.
pub fn weighted(exps: &[u32], weights: &[u32]) -> u32 {
    exps.iter().zip(weights).map(|(a, b)| a * b).sum()
}

fn monomial_value(e: &Exponent, z: &[C64], s: f64) -> C64 {
    let mut v = C64::new(s.powi(e.l as i32), 0.0);
    for (i, zi) in z.iter().enumerate() {
        if e.j[i] > 0 {
            v *= zi.powu(e.j[i]);
        }
        if e.k[i] > 0 {
            v *= zi.conj().powu(e.k[i]);
        }
    }
    v
}

/// Weight vector `M = (m_1, ..., m_n)`, either all even or all one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct WeightVector(Vec<u32>);

impl WeightVector {
    pub fn new(m: Vec<u32>) -> Result<Self> {
        let all_one = m.iter().all(|&w| w == 1);
        let all_even = m.iter().all(|&w| w > 0 && w % 2 == 0);
        if m.is_empty() || !(all_one || all_even) {
            return Err(Error::UnsupportedWeights(m));
        }
        Ok(Self(m))
    }

    pub fn unit(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True for the homogeneous regime `M = (1, ..., 1)`.
    pub fn is_unit(&self) -> bool {
        self.0.iter().all(|&w| w == 1)
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl TryFrom<Vec<u32>> for WeightVector {
    type Error = Error;
    fn try_from(m: Vec<u32>) -> Result<Self> {
        Self::new(m)
    }
}

impl From<WeightVector> for Vec<u32> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// JSON form of a single monomial `re + i im` times `z^J conj(z)^K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    #[serde(rename = "J")]
    pub j: Vec<u32>,
    #[serde(rename = "K")]
    pub k: Vec<u32>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// JSON form of a model polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub n: usize,
    pub weights: Vec<u32>,
    pub degree: u32,
    pub terms: Vec<TermSpec>,
}

/// Weighted homogeneous real-valued polynomial `P` of weighted degree `d`
/// without pluriharmonic terms of top antiholomorphic weight.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianPolynomial {
    poly: Poly,
    weights: WeightVector,
    degree: u32,
    k0: u32,
}

impl HermitianPolynomial {
    pub fn new(poly: Poly, weights: WeightVector, degree: u32) -> Result<Self> {
        let n = poly.n();
        if weights.len() != n {
            return Err(Error::Dimension(format!(
                "{} weights for n = {n}",
                weights.len()
            )));
        }
        if poly.is_empty() {
            return Err(Error::InvalidPolynomial("polynomial is zero".into()));
        }
        let m = weights.as_slice();
        for (e, _) in poly.terms() {
            if e.l != 0 {
                return Err(Error::InvalidPolynomial(
                    "model polynomial must not depend on s".into(),
                ));
            }
            let wd = weighted(&e.j, m) + weighted(&e.k, m);
            if wd != degree {
                return Err(Error::InvalidPolynomial(format!(
                    "term z^{:?} zbar^{:?} has weighted degree {wd}, expected {degree}",
                    e.j, e.k
                )));
            }
        }
        let defect = poly.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidPolynomial(format!(
                "coefficients are not Hermitian symmetric (defect {defect:.3e})"
            )));
        }
        let k0 = poly
            .terms()
            .map(|(e, _)| weighted(&e.k, m))
            .max()
            .unwrap_or(0);
        if 2 * k0 < degree || k0 + 1 > degree {
            return Err(Error::DegreeConstraint(format!(
                "k0 = {k0} must satisfy d/2 <= k0 <= d-1 for d = {degree}"
            )));
        }
        Ok(Self {
            poly,
            weights,
            degree,
            k0,
        })
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        let weights = WeightVector::new(spec.weights.clone())?;
        if weights.len() != spec.n {
            return Err(Error::Dimension(format!(
                "{} weights for n = {}",
                weights.len(),
                spec.n
            )));
        }
        let mut poly = Poly::new(spec.n);
        for t in &spec.terms {
            poly.add_term(
                Exponent::new(t.j.clone(), t.k.clone(), 0),
                C64::new(t.re, t.im),
            )?;
        }
        Self::new(poly, weights, spec.degree)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text)?;
        Self::from_spec(&spec)
    }

    pub fn to_spec(&self) -> ModelSpec {
        ModelSpec {
            n: self.n(),
            weights: self.weights.as_slice().to_vec(),
            degree: self.degree,
            terms: self
                .poly
                .terms()
                .map(|(e, c)| TermSpec {
                    j: e.j.clone(),
                    k: e.k.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.poly.n()
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn k0(&self) -> u32 {
        self.k0
    }

    /// Real value `P(z, conj z)`; fails if the imaginary part is not
    /// negligible relative to the term magnitudes.
    pub fn eval(&self, z: &[C64]) -> Result<f64> {
        if z.len() != self.n() {
            return Err(Error::Dimension(format!(
                "point of length {} for n = {}",
                z.len(),
                self.n()
            )));
        }
        let v = self.poly.eval(z, 0.0);
        let scale = self.poly.eval_magnitude(z, 0.0);
        if v.im.abs() > HERMITIAN_TOL * scale.max(1.0) * 10.0 {
            return Err(Error::Consistency(format!(
                "P evaluated to non-real value {v}"
            )));
        }
        Ok(v.re)
    }

    /// Sum of terms whose antiholomorphic weight `M.K` equals `ell`.
    pub fn bihomogeneous_component(&self, ell: u32) -> Result<Poly> {
        if ell > self.degree {
            return Err(Error::InvalidArgument(format!(
                "antiholomorphic weight {ell} exceeds d = {}",
                self.degree
            )));
        }
        let m = self.weights.as_slice();
        let mut out = Poly::new(self.n());
        for (e, &c) in self.poly.terms() {
            if weighted(&e.k, m) == ell {
                out.add_term(e.clone(), c)?;
            }
        }
        Ok(out)
    }

    pub fn partial_derivative(&self, var: Var) -> Poly {
        self.poly.derivative(var)
    }

    /// True when `P` splits as a sum over disjoint blocks of variables.
    /// Returns the blocks (sorted variable indices).
    pub fn variable_blocks(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for (e, _) in self.poly.terms() {
            let vars: Vec<usize> = (0..n).filter(|&i| e.j[i] + e.k[i] > 0).collect();
            for w in vars.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                parent[a] = b;
            }
        }
        let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            blocks.entry(r).or_default().push(i);
        }
        let mut out: Vec<Vec<usize>> = blocks.into_values().collect();
        out.sort();
        out
    }

    /// Restriction of `P` to the variables in `block`.
    pub fn restrict(&self, block: &[usize]) -> Result<HermitianPolynomial> {
        let mut poly = Poly::new(block.len());
        for (e, &c) in self.poly.terms() {
            let outside = (0..self.n()).any(|i| !block.contains(&i) && e.j[i] + e.k[i] > 0);
            if outside {
                continue;
            }
            let j = block.iter().map(|&i| e.j[i]).collect();
            let k = block.iter().map(|&i| e.k[i]).collect();
            poly.add_term(Exponent::new(j, k, 0), c)?;
        }
        let weights = WeightVector::new(block.iter().map(|&i| self.weights.as_slice()[i]).collect())?;
        HermitianPolynomial::new(poly, weights, self.degree)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn quartic() -> HermitianPolynomial {
        HermitianPolynomial::from_json(
            r#"{"n":1,"weights":[1],"degree":4,"terms":[{"J":[2],"K":[2],"re":1.0,"im":0.0}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn quartic_has_k0_two() {
        let p = quartic();
        assert_eq!(p.k0(), 2);
        let v = p.eval(&[C64::new(0.6, 0.8)]).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_mixed_degree() {
        let r = HermitianPolynomial::from_json(
            r#"{"n":1,"weights":[1],"degree":4,"terms":[{"J":[2],"K":[2],"re":1.0},{"J":[1],"K":[1],"re":1.0}]}"#,
        );
        assert!(matches!(r, Err(Error::InvalidPolynomial(_))));
    }

    #[test]
    fn rejects_non_hermitian() {
        let r = HermitianPolynomial::from_json(
            r#"{"n":1,"weights":[1],"degree":4,"terms":[{"J":[2],"K":[2],"re":1.0},{"J":[3],"K":[1],"re":1.0}]}"#,
        );
        assert!(matches!(r, Err(Error::InvalidPolynomial(_))));
    }

    #[test]
    fn rejects_pluriharmonic_top_weight() {
        let r = HermitianPolynomial::from_json(
            r#"{"n":1,"weights":[1],"degree":4,"terms":[{"J":[2],"K":[2],"re":1.0},{"J":[4],"K":[0],"re":1.0},{"J":[0],"K":[4],"re":1.0}]}"#,
        );
        assert!(matches!(r, Err(Error::DegreeConstraint(_))));
    }

    #[test]
    fn rejects_odd_mixed_weights() {
        assert!(matches!(
            WeightVector::new(vec![1, 2]),
            Err(Error::UnsupportedWeights(_))
        ));
        assert!(WeightVector::new(vec![2, 4]).is_ok());
    }

    #[test]
    fn derivative_of_quartic() {
        let p = quartic();
        let pz = p.partial_derivative(Var::Z(0));
        let z = C64::new(0.3, -0.4);
        let expected = 2.0 * z * z.conj() * z.conj();
        assert!((pz.eval(&[z], 0.0) - expected).norm() < 1e-14);
    }

    #[test]
    fn disc_substitution_of_quartic() {
        // |1-zeta|^4 = zeta^-2 (1-zeta)^4 * ... check pointwise.
        let p = quartic();
        let f = p.poly().on_disc(&[C64::new(1.0, 0.0)], &[1], 0, 8).unwrap();
        let zeta = C64::from_polar(1.0, 0.7);
        assert!((f.eval(zeta) - (C64::new(1.0, 0.0) - zeta).norm().powi(4)).norm() < 1e-13);
    }

    #[test]
    fn blocks_of_decoupled_sum() {
        let p = HermitianPolynomial::from_json(
            r#"{"n":2,"weights":[1,1],"degree":4,"terms":[{"J":[2,0],"K":[2,0],"re":1.0},{"J":[0,2],"K":[0,2],"re":1.0}]}"#,
        )
        .unwrap();
        assert_eq!(p.variable_blocks(), vec![vec![0], vec![1]]);
        let q = p.restrict(&[1]).unwrap();
        assert_eq!(q.k0(), 2);
    }
}
