//! Truncated Fourier representations of functions on the unit circle.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;

/// Coefficient magnitude below which negative modes count as absent.
pub const HOLOMORPHIC_TOL: f64 = 1e-10;
/// Relative remainder tolerance for exact division by `(1 - zeta)`.
pub const DIVISIBILITY_TOL: f64 = 1e-9;
/// Samples used for winding numbers.
pub const WINDING_SAMPLES: usize = 4096;
/// Absolute floor on `|f|` below which a winding number is undefined.
pub const VANISHING_TOL: f64 = 1e-8;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Laurent polynomial `sum_{|k| <= nf} c_k zeta^k` on the unit circle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleFunction {
    nf: usize,
    coeffs: Vec<C64>,
}

impl CircleFunction {
    pub fn zero(nf: usize) -> Self {
        Self {
            nf,
            coeffs: vec![ZERO; 2 * nf + 1],
        }
    }

    pub fn constant(nf: usize, c: C64) -> Self {
        let mut f = Self::zero(nf);
        f.coeffs[nf] = c;
        f
    }

    /// `c * zeta^k`.
    pub fn monomial(nf: usize, k: i64, c: C64) -> Result<Self> {
        let mut f = Self::zero(nf);
        f.set(k, c)?;
        Ok(f)
    }

    /// Builds from coefficients of `zeta^lowest, zeta^(lowest+1), ...`.
    pub fn from_laurent(nf: usize, lowest: i64, coeffs: &[C64]) -> Result<Self> {
        let mut f = Self::zero(nf);
        for (i, &c) in coeffs.iter().enumerate() {
            if c != ZERO {
                f.set(lowest + i as i64, c)?;
            }
        }
        Ok(f)
    }

    /// Builds from the full coefficient vector indexed `k + nf`.
    pub fn from_coeffs(nf: usize, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != 2 * nf + 1 {
            return Err(Error::Dimension(format!(
                "expected {} coefficients, got {}",
                2 * nf + 1,
                coeffs.len()
            )));
        }
        Ok(Self { nf, coeffs })
    }

    /// Interpolates samples on the grid `exp(2 pi i (j + offset) / m)`.
    pub fn from_samples(nf: usize, values: &[C64], offset: f64) -> Result<Self> {
        if values.len() <= 2 * nf {
            return Err(Error::Resolution(format!(
                "{} samples cannot resolve {} modes",
                values.len(),
                2 * nf + 1
            )));
        }
        Ok(Self {
            nf,
            coeffs: fft::coefficients_from_grid(values, nf, offset),
        })
    }

    pub fn nf(&self) -> usize {
        self.nf
    }

    /// Coefficients indexed `k + nf`.
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Coefficient of `zeta^k`, zero outside the truncation.
    pub fn coeff(&self, k: i64) -> C64 {
        let idx = k + self.nf as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            ZERO
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn set(&mut self, k: i64, c: C64) -> Result<()> {
        if k.unsigned_abs() as usize > self.nf {
            return Err(Error::Truncation(format!(
                "mode {k} exceeds truncation N_F = {}",
                self.nf
            )));
        }
        self.coeffs[(k + self.nf as i64) as usize] = c;
        Ok(())
    }

    /// Lowest and highest modes with a nonzero coefficient.
    pub fn support(&self) -> Option<(i64, i64)> {
        let lo = self.coeffs.iter().position(|c| *c != ZERO)?;
        let hi = self.coeffs.iter().rposition(|c| *c != ZERO)?;
        Some((lo as i64 - self.nf as i64, hi as i64 - self.nf as i64))
    }

    /// Highest mode whose coefficient exceeds `tol` in modulus.
    pub fn degree(&self, tol: f64) -> Option<i64> {
        self.coeffs
            .iter()
            .rposition(|c| c.norm() > tol)
            .map(|i| i as i64 - self.nf as i64)
    }

    /// Lowest mode whose coefficient exceeds `tol` in modulus.
    pub fn valuation(&self, tol: f64) -> Option<i64> {
        self.coeffs
            .iter()
            .position(|c| c.norm() > tol)
            .map(|i| i as i64 - self.nf as i64)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sum of coefficient moduli; bounds the sup norm on the circle.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// Re-truncates to `nf`, failing if nonzero modes would be dropped.
    pub fn with_nf(&self, nf: usize) -> Result<Self> {
        let mut out = Self::zero(nf);
        for k in -(self.nf as i64)..=self.nf as i64 {
            let c = self.coeff(k);
            if c != ZERO {
                out.set(k, c)?;
            }
        }
        Ok(out)
    }

    pub fn eval(&self, zeta: C64) -> C64 {
        // Horner in zeta over the nonnegative part, in 1/zeta over the rest.
        let nf = self.nf;
        let mut pos = ZERO;
        for c in self.coeffs[nf..].iter().rev() {
            pos = pos * zeta + c;
        }
        if nf == 0 {
            return pos;
        }
        let inv = zeta.inv();
        let mut neg = ZERO;
        for c in self.coeffs[..nf].iter() {
            neg = neg * inv + c;
        }
        pos + neg * inv
    }

    /// Values at `exp(2 pi i j / m)`, `j = 0..m`.
    pub fn sample(&self, m: usize) -> Vec<C64> {
        self.sample_shifted(m, 0.0)
    }

    /// Values at `exp(2 pi i (j + offset) / m)`.
    pub fn sample_shifted(&self, m: usize, offset: f64) -> Vec<C64> {
        fft::evaluate_on_grid(-(self.nf as i64), &self.coeffs, m, offset)
    }

    /// `f(zeta) -> conj(f(zeta))` on the circle: `c_k -> conj(c_{-k})`.
    pub fn conj_reflect(&self) -> Self {
        let coeffs = self.coeffs.iter().rev().map(|c| c.conj()).collect();
        Self {
            nf: self.nf,
            coeffs,
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            nf: self.nf,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Exact Laurent product; fails if the product leaves the truncation.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let nf = self.nf.max(other.nf);
        let mut out = Self::zero(nf);
        let (Some((alo, ahi)), Some((blo, bhi))) = (self.support(), other.support()) else {
            return Ok(out);
        };
        if alo + blo < -(nf as i64) || ahi + bhi > nf as i64 {
            return Err(Error::Truncation(format!(
                "product support [{}, {}] exceeds N_F = {nf}",
                alo + blo,
                ahi + bhi
            )));
        }
        for a in alo..=ahi {
            let ca = self.coeff(a);
            if ca == ZERO {
                continue;
            }
            for b in blo..=bhi {
                let cb = other.coeff(b);
                if cb != ZERO {
                    out.coeffs[(a + b + nf as i64) as usize] += ca * cb;
                }
            }
        }
        Ok(out)
    }

    /// Multiplication by `zeta^p`.
    pub fn shift(&self, p: i64) -> Result<Self> {
        let mut out = Self::zero(self.nf);
        if let Some((lo, hi)) = self.support() {
            for k in lo..=hi {
                let c = self.coeff(k);
                if c != ZERO {
                    out.set(k + p, c).map_err(|_| {
                        Error::Truncation(format!("shift by {p} moves mode {k} out of range"))
                    })?;
                }
            }
        }
        Ok(out)
    }

    /// Multiplication by `(1 - zeta)^m`.
    pub fn mul_one_minus_zeta_pow(&self, m: u32) -> Result<Self> {
        let mut out = self.clone();
        for _ in 0..m {
            let shifted = out.shift(1)?;
            out = &out - &shifted;
        }
        Ok(out)
    }

    /// Exact division by `(1 - zeta)^m` in coefficient space.
    ///
    /// Each round performs synthetic division; the remainder `f(1)` must be
    /// below `DIVISIBILITY_TOL` times the coefficient l1 norm.
    pub fn divide_one_minus_zeta(&self, m: u32) -> Result<Self> {
        let mut cur = self.clone();
        for _ in 0..m {
            let Some((lo, hi)) = cur.support() else {
                return Ok(cur);
            };
            let norm = cur.l1_norm();
            let mut q = Self::zero(cur.nf);
            let mut acc = ZERO;
            for k in lo..hi {
                acc += cur.coeff(k);
                q.set(k, acc)?;
            }
            acc += cur.coeff(hi);
            if acc.norm() > DIVISIBILITY_TOL * norm {
                return Err(Error::NotDivisible {
                    order: m,
                    remainder: acc.norm() / norm,
                });
            }
            cur = q;
        }
        Ok(cur)
    }

    /// Largest coefficient modulus among negative modes.
    pub fn antiholomorphic_mass(&self) -> f64 {
        self.coeffs[..self.nf]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_holomorphic(&self) -> bool {
        self.antiholomorphic_mass() <= HOLOMORPHIC_TOL * self.max_abs_coeff().max(1.0)
    }

    /// Drops negative modes after checking they are negligible.
    pub fn into_holomorphic(mut self) -> Result<Self> {
        if !self.is_holomorphic() {
            return Err(Error::Consistency(format!(
                "expected a holomorphic function, negative modes reach {:.3e}",
                self.antiholomorphic_mass()
            )));
        }
        for c in &mut self.coeffs[..self.nf] {
            *c = ZERO;
        }
        Ok(self)
    }

    /// Splits `f = f_plus + f_minus` with `f_plus` holding modes `k >= 0`.
    pub fn riesz_split(&self) -> (Self, Self) {
        let mut plus = self.clone();
        let mut minus = self.clone();
        for c in &mut plus.coeffs[..self.nf] {
            *c = ZERO;
        }
        for c in &mut minus.coeffs[self.nf..] {
            *c = ZERO;
        }
        (plus, minus)
    }

    /// Deviation from real-valuedness on the circle, relative to the scale.
    pub fn reality_defect(&self) -> f64 {
        let scale = self.max_abs_coeff().max(1e-300);
        let nf = self.nf as i64;
        (0..=nf)
            .map(|k| (self.coeff(-k) - self.coeff(k).conj()).norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// Holomorphic `g` with `Re g = self` on the circle and `Im g(anchor) = 0`.
    pub fn harmonic_extension(&self, anchor: C64) -> Result<Self> {
        let defect = self.reality_defect();
        if defect > 1e-10 {
            return Err(Error::NotReal(format!(
                "conjugate-symmetry defect {defect:.3e}"
            )));
        }
        let mut g = Self::zero(self.nf);
        g.coeffs[self.nf] = C64::new(self.coeff(0).re, 0.0);
        for k in 1..=self.nf {
            g.coeffs[self.nf + k] = self.coeffs[self.nf + k] * 2.0;
        }
        let im = g.eval(anchor).im;
        g.coeffs[self.nf] -= C64::new(0.0, im);
        Ok(g)
    }

    /// Membership in `R_m = { f : f = (-1)^m zeta^(-m) conj(f) }`.
    pub fn in_r_m(&self, m: i64) -> bool {
        let samples = 1024.max(2 * (self.nf + m.unsigned_abs() as usize) + 1);
        let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let vals = self.sample(samples);
        let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        vals.iter().enumerate().all(|(j, &f)| {
            let zeta = C64::from_polar(1.0, TAU * j as f64 / samples as f64);
            (f - zeta.powi(-(m as i32)) * f.conj() * sign).norm() < 1e-9 * scale
        })
    }

    /// Winding number about the origin along the unit circle.
    pub fn winding_number(&self) -> Result<i64> {
        let mut m = WINDING_SAMPLES;
        loop {
            match winding_from_samples(&self.sample(m)) {
                Err(Error::Resolution(_)) if m < (1 << 18) => m *= 4,
                other => return other,
            }
        }
    }

    /// Minimum of `|f|` on the circle: grid search followed by
    /// golden-section refinement around every sampled local minimum.
    pub fn min_modulus(&self) -> CircleMinimum {
        min_modulus(|zeta| self.eval(zeta), &self.sample(WINDING_SAMPLES))
    }

    /// Sup of `|f|` over a sample grid fine enough to resolve all modes.
    pub fn sup_norm(&self) -> f64 {
        let m = (4 * self.nf + 8).max(256);
        self.sample(m).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Location and value of the minimum of a modulus on the circle.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CircleMinimum {
    pub value: f64,
    pub angle: f64,
    pub max_value: f64,
}

/// Minimizes `|f|` given its values on the uniform grid.
pub fn min_modulus(f: impl Fn(C64) -> C64, samples: &[C64]) -> CircleMinimum {
    let m = samples.len();
    let h = TAU / m as f64;
    let abs: Vec<f64> = samples.iter().map(|v| v.norm()).collect();
    let max_value = abs.iter().copied().fold(0.0, f64::max);
    let mut best = CircleMinimum {
        value: f64::INFINITY,
        angle: 0.0,
        max_value,
    };
    let at = |t: f64| f(C64::from_polar(1.0, t)).norm();
    for j in 0..m {
        let prev = abs[(j + m - 1) % m];
        let next = abs[(j + 1) % m];
        if abs[j] > prev || abs[j] > next {
            continue;
        }
        let center = h * j as f64;
        let (mut a, mut b) = (center - h, center + h);
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - ratio * (b - a);
        let mut d = a + ratio * (b - a);
        let (mut fc, mut fd) = (at(c), at(d));
        for _ in 0..80 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                fc = at(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                fd = at(d);
            }
        }
        let (t, v) = if fc < fd { (c, fc) } else { (d, fd) };
        let (t, v) = if abs[j] <= v { (center, abs[j]) } else { (t, v) };
        if v < best.value {
            best.value = v;
            best.angle = t.rem_euclid(TAU);
        }
    }
    best
}

/// Winding number from values on a uniform grid covering the circle once.
pub fn winding_from_samples(values: &[C64]) -> Result<i64> {
    let min = values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if !(min > VANISHING_TOL) {
        return Err(Error::IndexUndefined(min));
    }
    let m = values.len();
    let mut total = 0.0;
    for j in 0..m {
        let step = (values[(j + 1) % m] / values[j]).arg();
        if step.abs() > PI / 2.0 {
            return Err(Error::Resolution(format!(
                "phase step {step:.3} between consecutive samples of {m}"
            )));
        }
        total += step;
    }
    let turns = total / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.1 {
        return Err(Error::Resolution(format!(
            "accumulated phase {turns:.4} turns is not an integer"
        )));
    }
    Ok(rounded as i64)
}

impl Add for &CircleFunction {
    type Output = CircleFunction;
    fn add(self, rhs: &CircleFunction) -> CircleFunction {
        let nf = self.nf.max(rhs.nf);
        let coeffs = (-(nf as i64)..=nf as i64)
            .map(|k| self.coeff(k) + rhs.coeff(k))
            .collect();
        CircleFunction { nf, coeffs }
    }
}

impl Sub for &CircleFunction {
    type Output = CircleFunction;
    fn sub(self, rhs: &CircleFunction) -> CircleFunction {
        let nf = self.nf.max(rhs.nf);
        let coeffs = (-(nf as i64)..=nf as i64)
            .map(|k| self.coeff(k) - rhs.coeff(k))
            .collect();
        CircleFunction { nf, coeffs }
    }
}

impl Neg for &CircleFunction {
    type Output = CircleFunction;
    fn neg(self) -> CircleFunction {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul<C64> for &CircleFunction {
    type Output = CircleFunction;
    fn mul(self, rhs: C64) -> CircleFunction {
        self.scale(rhs)
    }
}
