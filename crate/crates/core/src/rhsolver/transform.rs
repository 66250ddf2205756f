//! Symmetries acting on lifts: Möbius reparametrizations fixing `zeta = 1`,
//! weighted dilations and coordinate rotations.

use num_complex::Complex64 as C64;

use crate::circle::CircleFunction;
use crate::error::{Error, Result};
use crate::model::DiscLift;
use crate::poly::{HermitianPolynomial, Poly};

const ONE: C64 = C64::new(1.0, 0.0);

/// The automorphism `phi_a(zeta) = lambda (zeta - a) / (1 - conj(a) zeta)` with
/// `lambda = (1 - conj(a)) / (1 - a)`, so that `phi_a(1) = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: C64,
    pub lambda: C64,
}

impl Mobius {
    pub fn new(a: C64) -> Result<Self> {
        if !(a.norm() < 1.0) {
            return Err(Error::InvalidArgument(format!("|a| = {} is not < 1", a.norm())));
        }
        Ok(Self {
            a,
            lambda: (ONE - a.conj()) / (ONE - a),
        })
    }

    pub fn eval(&self, zeta: C64) -> C64 {
        self.lambda * (zeta - self.a) / (ONE - self.a.conj() * zeta)
    }

    /// `phi_a^{-1} = phi_{-lambda a}`.
    pub fn inverse(&self) -> Self {
        Self::new(-self.lambda * self.a).expect("|lambda a| = |a| < 1")
    }

    /// `u` with `1 - phi_a(zeta) = (1 - zeta) u(zeta)`.
    fn u(&self, zeta: C64) -> C64 {
        (ONE + self.lambda * self.a) / (ONE - self.a.conj() * zeta)
    }

    /// Factor restoring the twisted conormal condition for `k0`:
    /// `q (phi / zeta)^{k0}` is real and positive on the circle, and the
    /// factors of `phi_a` and its inverse multiply to 1.
    fn cotangent_factor(&self, zeta: C64, k0: u32) -> C64 {
        let b = ONE - self.a.conj() * zeta;
        (self.lambda.conj() * b * b / (1.0 - self.a.norm_sqr())).powu(k0)
    }
}

/// The lift of `f o phi_a`, with cotangent components rescaled so the result
/// is again a lift; the truncation is kept and the dropped tail checked.
pub fn reparametrize(lift: &DiscLift, a: C64) -> Result<DiscLift> {
    let phi = Mobius::new(a)?;
    let n = lift.n();
    let nf = lift.nf();
    let m = 4 * nf.max(8) + 4;
    let quotients = lift.quotients()?;
    let grid: Vec<C64> = (0..m)
        .map(|j| C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / m as f64))
        .collect();
    let mut comps = Vec::with_capacity(quotients.len());
    for (c, q) in quotients.iter().enumerate() {
        let mu = lift.orders()[c];
        let cotangent = c > n;
        let values: Vec<C64> = grid
            .iter()
            .map(|&z| {
                let mut v = q.eval(phi.eval(z)) * phi.u(z).powu(mu);
                if cotangent {
                    v *= phi.cotangent_factor(z, lift.k0());
                }
                v
            })
            .collect();
        let wide = CircleFunction::from_samples(2 * nf, &values, 0.0)?;
        let top = (nf - mu as usize) as i64;
        let tail = (-(2 * nf as i64)..=2 * nf as i64)
            .filter(|&k| k < 0 || k > top)
            .map(|k| wide.coeff(k).norm())
            .fold(0.0, f64::max);
        if tail > 1e-10 * wide.max_abs_coeff().max(1.0) {
            return Err(Error::Truncation(format!(
                "reparametrized component {c} leaves N_F = {nf} (tail {tail:.3e}); reduce |a| or raise N_F"
            )));
        }
        let coeffs: Vec<C64> = (0..=top).map(|k| wide.coeff(k)).collect();
        comps.push(CircleFunction::from_laurent(nf, 0, &coeffs)?);
    }
    DiscLift::from_quotients(n, lift.k0(), lift.orders().to_vec(), &comps)
}

/// `f(phi_a(0))` restricted to the disc components `(h, g)`.
pub fn center(lift: &DiscLift, a: C64) -> Result<Vec<C64>> {
    let phi = Mobius::new(a)?;
    let p = phi.eval(C64::new(0.0, 0.0));
    Ok(lift.components()[..=lift.n()].iter().map(|c| c.eval(p)).collect())
}

/// Real Jacobian determinant at `a = 0` of `a -> g(phi_a(0))`, which is
/// `|g'(0)|^2` because `phi_a(0) = -a + O(|a|^2)`.
pub fn center_jacobian(lift: &DiscLift) -> f64 {
    lift.g().coeff(1).norm_sqr()
}

/// Image of a lift under `Lambda_t(z, w) = (t^{m} z, t^d w)`; cotangent
/// components pick up `t^{d - m_i}` on `h~` and nothing on `g~`. A lift
/// attached to `r_s` is mapped to one attached to `r_{s/t}`.
pub fn scale_model_automorphism(lift: &DiscLift, p: &HermitianPolynomial, t: f64) -> Result<DiscLift> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("scaling factor must be positive, got {t}")));
    }
    let n = lift.n();
    if p.n() != n {
        return Err(Error::Dimension("polynomial and lift dimensions differ".into()));
    }
    let m = p.weights().as_slice();
    let d = p.degree() as i32;
    let mut factors: Vec<f64> = m.iter().map(|&mi| t.powi(mi as i32)).collect();
    factors.push(t.powi(d));
    factors.extend(m.iter().map(|&mi| t.powi(d - mi as i32)));
    factors.push(1.0);
    let comps = lift
        .components()
        .iter()
        .zip(&factors)
        .map(|(c, &f)| c.scale(C64::new(f, 0.0)))
        .collect();
    DiscLift::new(n, lift.k0(), lift.orders().to_vec(), comps)
}

/// True when `z_j -> exp(i phi_j) z_j` leaves every monomial of `poly`
/// unchanged (up to `tol` in the phase factor).
pub fn is_rotation_invariant(poly: &Poly, phases: &[f64], tol: f64) -> bool {
    poly.terms().all(|(e, _)| {
        let angle: f64 = e
            .j
            .iter()
            .zip(&e.k)
            .zip(phases)
            .map(|((&j, &k), &ph)| (j as f64 - k as f64) * ph)
            .sum();
        (C64::from_polar(1.0, angle) - ONE).norm() < tol
    })
}

/// Image under `z_j -> exp(i phi_j) z_j`: `h_j` rotates forward and `h~_j`
/// backward, `g` and `g~` are unchanged.
pub fn rotate(lift: &DiscLift, phases: &[f64]) -> Result<DiscLift> {
    let n = lift.n();
    if phases.len() != n {
        return Err(Error::Dimension(format!("{} phases for n = {n}", phases.len())));
    }
    let comps = lift
        .components()
        .iter()
        .enumerate()
        .map(|(c, f)| match c {
            c if c < n => f.scale(C64::from_polar(1.0, phases[c])),
            c if c > n && c <= 2 * n => f.scale(C64::from_polar(1.0, -phases[c - n - 1])),
            _ => f.clone(),
        })
        .collect();
    DiscLift::new(n, lift.k0(), lift.orders().to_vec(), comps)
}
