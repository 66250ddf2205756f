//! The explicit disc family of the model hypersurface `Re w = P(z)`:
//! boundary discs `h^v(zeta) = ((1 - zeta)^{m_i} v_i)`, their Levi
//! coefficients, admissibility and the stationary lift.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::circle::{CircleFunction, CircleMinimum};
use crate::error::{Error, Result};
use crate::hypersurface::{DefiningFunction, LiftPoint};
use crate::poly::{binomial, HermitianPolynomial, Poly, Var};

/// Default relative tolerance for admissibility of a direction `v`.
pub const ADMISSIBILITY_TOL: f64 = 1e-6;
/// Residual tolerance for the explicit lift of the model.
pub const LIFT_RESIDUAL_TOL: f64 = 1e-10;
/// Samples used to check boundary residuals.
pub const RESIDUAL_SAMPLES: usize = 1024;

const ONE: C64 = C64::new(1.0, 0.0);

/// Model hypersurface `r = -Re w + P(z)`.
#[derive(Clone, Debug)]
pub struct ModelHypersurface {
    p: HermitianPolynomial,
    defining: DefiningFunction,
}

impl ModelHypersurface {
    pub fn new(p: HermitianPolynomial) -> Self {
        let defining = DefiningFunction::model(&p);
        Self { p, defining }
    }

    pub fn polynomial(&self) -> &HermitianPolynomial {
        &self.p
    }

    pub fn defining(&self) -> &DefiningFunction {
        &self.defining
    }
}

/// Exponents `mu_c` such that component `c` of a lift vanishes to order
/// `mu_c` at `zeta = 1`: `(m_1..m_n, 1, d - m_1..d - m_n, 0)`.
pub fn vanishing_orders(p: &HermitianPolynomial) -> Vec<u32> {
    let m = p.weights().as_slice();
    let d = p.degree();
    let mut orders: Vec<u32> = m.to_vec();
    orders.push(1);
    orders.extend(m.iter().map(|mi| d - mi));
    orders.push(0);
    orders
}

/// Lift `(h, g, h~, g~)` of a disc, stored as `2n + 2` circle functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscLift {
    n: usize,
    k0: u32,
    orders: Vec<u32>,
    components: Vec<CircleFunction>,
}

impl DiscLift {
    pub fn new(n: usize, k0: u32, orders: Vec<u32>, components: Vec<CircleFunction>) -> Result<Self> {
        if components.len() != 2 * n + 2 || orders.len() != 2 * n + 2 {
            return Err(Error::Dimension(format!(
                "a lift for n = {n} has {} components",
                2 * n + 2
            )));
        }
        let nf = components[0].nf();
        if components.iter().any(|c| c.nf() != nf) {
            return Err(Error::Dimension("components have different truncations".into()));
        }
        Ok(Self {
            n,
            k0,
            orders,
            components,
        })
    }

    /// Rebuilds a lift from quotients `q_c` with `f_c = (1 - zeta)^{mu_c} q_c`.
    pub fn from_quotients(n: usize, k0: u32, orders: Vec<u32>, quotients: &[CircleFunction]) -> Result<Self> {
        let components = quotients
            .iter()
            .zip(&orders)
            .map(|(q, &mu)| q.mul_one_minus_zeta_pow(mu))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, k0, orders, components)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k0(&self) -> u32 {
        self.k0
    }

    pub fn nf(&self) -> usize {
        self.components[0].nf()
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn components(&self) -> &[CircleFunction] {
        &self.components
    }

    pub fn h(&self, i: usize) -> &CircleFunction {
        &self.components[i]
    }

    pub fn g(&self) -> &CircleFunction {
        &self.components[self.n]
    }

    pub fn h_tilde(&self, i: usize) -> &CircleFunction {
        &self.components[self.n + 1 + i]
    }

    pub fn g_tilde(&self) -> &CircleFunction {
        &self.components[2 * self.n + 1]
    }

    /// Re-truncates every component.
    pub fn with_nf(&self, nf: usize) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|c| c.with_nf(nf))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.n, self.k0, self.orders.clone(), components)
    }

    /// Quotients by `(1 - zeta)^{mu_c}`; fails if a component is not divisible.
    pub fn quotients(&self) -> Result<Vec<CircleFunction>> {
        self.components
            .iter()
            .zip(&self.orders)
            .map(|(c, &mu)| c.divide_one_minus_zeta(mu))
            .collect()
    }

    pub fn is_holomorphic(&self) -> bool {
        self.components.iter().all(|c| c.is_holomorphic())
    }

    /// Largest coefficient difference to `other`.
    pub fn distance(&self, other: &DiscLift) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| (a - b).max_abs_coeff())
            .fold(0.0, f64::max)
    }

    pub fn point_at(&self, zeta: C64) -> LiftPoint {
        let vals: Vec<C64> = self.components.iter().map(|c| c.eval(zeta)).collect();
        LiftPoint::from_components(self.n, &vals)
    }

    /// Values of all components on the `m`-point grid, `[sample][component]`.
    pub fn sample(&self, m: usize) -> Vec<Vec<C64>> {
        let cols: Vec<Vec<C64>> = self.components.iter().map(|c| c.sample(m)).collect();
        (0..m)
            .map(|j| cols.iter().map(|col| col[j]).collect())
            .collect()
    }

    /// Sup over `m` samples of the boundary residuals for `defining`.
    pub fn residual(&self, defining: &DefiningFunction, m: usize) -> f64 {
        let samples = self.sample(m);
        samples
            .iter()
            .enumerate()
            .map(|(j, x)| {
                let zeta = C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / m as f64);
                defining
                    .residual(zeta, &LiftPoint::from_components(self.n, x))
                    .into_iter()
                    .map(f64::abs)
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Levi data of `P` along the disc `h^v`.
#[derive(Clone, Debug, Serialize)]
pub struct LeviCoefficients {
    /// `Q_{ij}` with `zeta^{k0} P_{z_i zbar_j}(h) = (1-zeta)^{d-m_i-m_j} Q_{ij}`.
    pub q: Vec<Vec<CircleFunction>>,
    /// `S_{ij}` with `zeta^{k0} P_{z_i z_j}(h) = (1-zeta)^{d-m_i-m_j} S_{ij}`.
    pub s: Vec<Vec<CircleFunction>>,
    /// `Q'_{ij} = zeta^{-m_j} Q_{ij}`.
    pub q_prime: Vec<Vec<CircleFunction>>,
    /// `det Q`.
    pub det_q: CircleFunction,
    /// `det Q' = zeta^{-sum m} det Q`.
    pub det_q_prime: CircleFunction,
}

fn levi_nf(p: &HermitianPolynomial) -> usize {
    (p.degree() + p.k0()) as usize + 2
}

/// Computes `Q`, `S`, `det Q` exactly in Laurent coefficients and checks the
/// degree and divisibility constraints predicted by weighted homogeneity.
pub fn levi_coefficients(p: &HermitianPolynomial, v: &[C64]) -> Result<LeviCoefficients> {
    let n = p.n();
    if v.len() != n {
        return Err(Error::Dimension(format!("direction of length {} for n = {n}", v.len())));
    }
    let m = p.weights().as_slice();
    let d = p.degree() as i64;
    let k0 = p.k0() as i64;
    let nf = levi_nf(p);
    let mut q = vec![vec![CircleFunction::zero(nf); n]; n];
    let mut s = vec![vec![CircleFunction::zero(nf); n]; n];
    let mut q_prime = vec![vec![CircleFunction::zero(nf); n]; n];
    for i in 0..n {
        let pz = p.partial_derivative(Var::Z(i));
        for j in 0..n {
            let order = d - m[i] as i64 - m[j] as i64;
            for (second, target) in [
                (pz.derivative(Var::ZBar(j)), &mut q[i][j]),
                (pz.derivative(Var::Z(j)), &mut s[i][j]),
            ] {
                if second.is_empty() {
                    continue;
                }
                if order < 0 {
                    return Err(Error::NonGeneric(format!(
                        "negative vanishing order for entry ({i}, {j})"
                    )));
                }
                let x = second.on_disc(v, m, k0, nf)?;
                let x = x.into_holomorphic().map_err(|e| {
                    Error::NonGeneric(format!("Levi entry ({i}, {j}) is not holomorphic: {e}"))
                })?;
                *target = x.divide_one_minus_zeta(order as u32).map_err(|e| {
                    Error::NonGeneric(format!("Levi entry ({i}, {j}): {e}"))
                })?;
            }
            let tol = 1e-10 * q[i][j].max_abs_coeff().max(1e-300);
            let deg_bound = 2 * k0 - d + m[j] as i64;
            if let Some(deg) = q[i][j].degree(tol) {
                if deg > deg_bound {
                    return Err(Error::NonGeneric(format!(
                        "deg Q_({i},{j}) = {deg} exceeds {deg_bound}"
                    )));
                }
            }
            if let Some(val) = q[i][j].valuation(tol) {
                if val < m[j] as i64 {
                    return Err(Error::NonGeneric(format!(
                        "Q_({i},{j}) is not divisible by zeta^{}",
                        m[j]
                    )));
                }
            }
            let stol = 1e-10 * s[i][j].max_abs_coeff().max(1e-300);
            if let Some(deg) = s[i][j].degree(stol) {
                if deg > 2 * k0 - d {
                    return Err(Error::NonGeneric(format!(
                        "deg S_({i},{j}) = {deg} exceeds {}",
                        2 * k0 - d
                    )));
                }
            }
            q_prime[i][j] = q[i][j].shift(-(m[j] as i64))?;
        }
    }
    let det_q = laurent_det(&q)?;
    let det_q_prime = det_q.shift(-(p.weights().total() as i64))?;
    Ok(LeviCoefficients {
        q,
        s,
        q_prime,
        det_q,
        det_q_prime,
    })
}

/// Determinant of a small matrix of Laurent polynomials by cofactor expansion.
pub fn laurent_det(a: &[Vec<CircleFunction>]) -> Result<CircleFunction> {
    let n = a.len();
    let nf = a[0][0].nf();
    match n {
        0 => Ok(CircleFunction::constant(nf, ONE)),
        1 => Ok(a[0][0].clone()),
        _ => {
            let mut acc = CircleFunction::zero(nf);
            for j in 0..n {
                if a[0][j].support().is_none() {
                    continue;
                }
                let minor: Vec<Vec<CircleFunction>> = a[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != j)
                            .map(|(_, x)| x.clone())
                            .collect()
                    })
                    .collect();
                let term = a[0][j].mul(&laurent_det(&minor)?)?;
                acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            Ok(acc)
        }
    }
}

/// Evidence for or against admissibility of a direction `v`.
#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityCertificate {
    pub admissible: bool,
    /// Minimum of `|det Q|` on the circle (after local refinement).
    pub min_abs_det_q: f64,
    pub argmin_angle: f64,
    pub max_abs_det_q: f64,
    pub p_at_v: f64,
    pub reason: Option<String>,
}

impl AdmissibilityCertificate {
    /// `min |det Q| / max |det Q|`, the quantity thresholded by admissibility.
    pub fn margin(&self) -> f64 {
        if self.max_abs_det_q > 0.0 {
            self.min_abs_det_q / self.max_abs_det_q
        } else {
            0.0
        }
    }

    fn rejected(reason: String) -> Self {
        Self {
            admissible: false,
            min_abs_det_q: 0.0,
            argmin_angle: 0.0,
            max_abs_det_q: 0.0,
            p_at_v: 0.0,
            reason: Some(reason),
        }
    }
}

/// Checks that `det Q` has no zero on the circle and `P(v) != 0`.
pub fn is_admissible(p: &HermitianPolynomial, v: &[C64], tol: f64) -> AdmissibilityCertificate {
    if v.iter().all(|x| x.norm() == 0.0) {
        return AdmissibilityCertificate::rejected("v = 0".into());
    }
    let p_at_v = match p.eval(v) {
        Ok(x) => x,
        Err(e) => return AdmissibilityCertificate::rejected(e.to_string()),
    };
    let levi = match levi_coefficients(p, v) {
        Ok(l) => l,
        Err(e) => {
            let mut cert = AdmissibilityCertificate::rejected(e.to_string());
            cert.p_at_v = p_at_v;
            return cert;
        }
    };
    let CircleMinimum {
        value,
        angle,
        max_value,
    } = levi.det_q.min_modulus();
    let mut reason = None;
    if !(value > tol * max_value) {
        reason = Some(format!(
            "det Q nearly vanishes at angle {angle:.6} (|det Q| = {value:.3e})"
        ));
    } else if !(p_at_v.abs() > tol) {
        reason = Some(format!("P(v) = {p_at_v:.3e} is too small"));
    }
    AdmissibilityCertificate {
        admissible: reason.is_none(),
        min_abs_det_q: value,
        argmin_angle: angle,
        max_abs_det_q: max_value,
        p_at_v,
        reason,
    }
}

/// Uniformly distributed unit vector in `C^n` for trial `trial` of `seed`.
pub fn sphere_sample(n: usize, seed: u64, trial: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    loop {
        let raw: Vec<C64> = (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im)
            })
            .collect();
        let norm = raw.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return raw.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Outcome of a randomized search for an admissible direction.
#[derive(Clone, Debug, Serialize)]
pub struct AdmissibleSearch {
    pub found: bool,
    pub v: Vec<C64>,
    pub trial: u64,
    pub trials_used: u64,
    pub certificate: AdmissibilityCertificate,
}

/// Samples directions on the unit sphere until one is admissible; otherwise
/// reports the best candidate (largest margin) found.
pub fn find_admissible(p: &HermitianPolynomial, trials: u64, seed: u64, tol: f64) -> AdmissibleSearch {
    let mut best: Option<AdmissibleSearch> = None;
    for trial in 0..trials {
        let v = sphere_sample(p.n(), seed, trial);
        let certificate = is_admissible(p, &v, tol);
        let found = certificate.admissible;
        let candidate = AdmissibleSearch {
            found,
            v,
            trial,
            trials_used: trial + 1,
            certificate,
        };
        if found {
            return candidate;
        }
        let better = best
            .as_ref()
            .is_none_or(|b| candidate.certificate.margin() > b.certificate.margin());
        if better {
            best = Some(candidate);
        }
    }
    let mut out = best.unwrap_or(AdmissibleSearch {
        found: false,
        v: vec![C64::default(); p.n()],
        trial: 0,
        trials_used: 0,
        certificate: AdmissibilityCertificate::rejected("no trials".into()),
    });
    out.trials_used = trials;
    out
}

/// The disc `h^v` truncated at `nf`.
pub fn boundary_disc(p: &HermitianPolynomial, v: &[C64], nf: usize) -> Result<Vec<CircleFunction>> {
    p.weights()
        .as_slice()
        .iter()
        .zip(v)
        .map(|(&m, &vi)| CircleFunction::constant(nf, vi).mul_one_minus_zeta_pow(m))
        .collect()
}

/// Holomorphic `g` with `Re g = P(h^v)` on the circle and `g(1) = 0`.
pub fn solve_g(p: &HermitianPolynomial, v: &[C64], nf: usize) -> Result<CircleFunction> {
    let u = p.poly().on_disc(v, p.weights().as_slice(), 0, nf)?;
    u.harmonic_extension(ONE)
}

/// The stationary lift of `h^v`: `h~_i = zeta^{k0} P_{z_i}(h)` and
/// `g~ = -zeta^{k0} / 2`.
pub fn build_lift(p: &HermitianPolynomial, v: &[C64], nf: usize) -> Result<DiscLift> {
    let n = p.n();
    let d = p.degree();
    let k0 = p.k0();
    let needed = (d + k0) as usize;
    if nf < needed {
        return Err(Error::Truncation(format!(
            "the model lift needs N_F >= {needed}"
        )));
    }
    let m = p.weights().as_slice();
    let mut comps = boundary_disc(p, v, nf)?;
    let g = solve_g(p, v, nf)?;
    let scale = g.max_abs_coeff().max(1.0);
    if g.coeff(0).norm() > 1e-12 * scale && g.eval(ONE).norm() > 1e-12 * scale {
        return Err(Error::Consistency("g(1) != 0".into()));
    }
    comps.push(g);
    for (i, &mi) in m.iter().enumerate() {
        let pz: Poly = p.partial_derivative(Var::Z(i));
        let ht = pz.on_disc(v, m, k0 as i64, nf)?.into_holomorphic()?;
        ht.divide_one_minus_zeta(d - mi)?;
        comps.push(ht);
    }
    comps.push(CircleFunction::monomial(nf, k0 as i64, C64::new(-0.5, 0.0))?);
    let lift = DiscLift::new(n, k0, vanishing_orders(p), comps)?;
    let res = lift.residual(&DefiningFunction::model(p), RESIDUAL_SAMPLES);
    if res > LIFT_RESIDUAL_TOL * scale {
        return Err(Error::Consistency(format!(
            "model lift residual {res:.3e} exceeds tolerance"
        )));
    }
    Ok(lift)
}

/// Hermitian Levi matrix `P_{z zbar}` at a point.
pub fn levi_matrix(p: &HermitianPolynomial, z: &[C64]) -> DMatrix<C64> {
    let n = p.n();
    DMatrix::from_fn(n, n, |i, j| {
        p.partial_derivative(Var::Z(i))
            .derivative(Var::ZBar(j))
            .eval(z, 0.0)
    })
}

/// Closed form of `g^v` from the bihomogeneous decomposition: with
/// `u_e = (-1)^e sum_j sum_l C(j, e+l) C(d-j, l) P^{j,d-j}(v)` the Fourier
/// coefficients of `P(h^v)`, `g = u_0 + 2 sum_{e>0} u_e zeta^e` up to the
/// imaginary constant fixed by `g(1) = 0`.
pub fn closed_form_g(p: &HermitianPolynomial, v: &[C64], nf: usize) -> Result<CircleFunction> {
    let d = p.degree();
    if nf < d as usize {
        return Err(Error::Truncation(format!("closed-form g needs N_F >= {d}")));
    }
    let parts: Vec<(u32, C64)> = (0..=d)
        .map(|j| Ok((j, p.bihomogeneous_component(d - j)?.eval(v, 0.0))))
        .collect::<Result<_>>()?;
    let u = |e: u32| -> C64 {
        let sign = if e % 2 == 0 { 1.0 } else { -1.0 };
        parts
            .iter()
            .map(|&(j, pj)| {
                let c: f64 = (0..=d - j).map(|l| binomial(j, e + l) * binomial(d - j, l)).sum();
                pj * c
            })
            .sum::<C64>()
            * sign
    };
    let mut coeffs: Vec<C64> = (0..=d).map(|e| if e == 0 { u(0) } else { u(e) * 2.0 }).collect();
    let im_at_one: f64 = coeffs.iter().map(|c| c.im).sum();
    coeffs[0] -= C64::new(0.0, im_at_one);
    CircleFunction::from_laurent(nf, 0, &coeffs)
}

/// `(g^v)'(0) = -2 sum_j (sum_l C(j, 1+l) C(d-j, l)) P^{j,d-j}(v)`.
pub fn g_prime_zero_closed_form(p: &HermitianPolynomial, v: &[C64]) -> Result<C64> {
    Ok(closed_form_g(p, v, p.degree().max(1) as usize)?.coeff(1))
}

/// Monte-Carlo look at the degeneracy locus `det P_{z zbar} = 0` on the unit
/// weighted sphere. Advisory only.
#[derive(Clone, Debug, Serialize)]
pub struct DegeneracyReport {
    pub samples: usize,
    pub epsilons: Vec<f64>,
    /// Fraction of samples with `|det| < eps * max|det|`.
    pub fractions: Vec<f64>,
    /// Fraction of samples with `|det| / |grad det| < eps`, a proxy for the
    /// distance to the locus.
    pub distance_fractions: Vec<f64>,
    /// Tail exponent of the distance proxy near the locus; `None` when no
    /// sample comes close to it.
    pub codimension_estimate: Option<f64>,
    pub max_abs_det: f64,
}

pub const DEGENERACY_EPSILONS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Point of the weighted sphere `sum |z_i|^{2/m_i} = 1` along the ray of `z`.
fn weighted_normalize(z: &[C64], m: &[u32]) -> Vec<C64> {
    let s: f64 = z
        .iter()
        .zip(m)
        .map(|(zi, &mi)| zi.norm().powf(2.0 / mi as f64))
        .sum();
    let t = 1.0 / s.sqrt();
    z.iter().zip(m).map(|(zi, &mi)| zi * t.powi(mi as i32)).collect()
}

pub fn degeneracy_dimension_probe(p: &HermitianPolynomial, samples: usize, seed: u64) -> DegeneracyReport {
    let n = p.n();
    let m = p.weights().as_slice();
    let det = |z: &[C64]| levi_matrix(p, z).determinant().re;
    let points: Vec<Vec<C64>> = (0..samples as u64)
        .map(|t| weighted_normalize(&sphere_sample(n, seed, t), m))
        .collect();
    let h = 1e-6;
    let data: Vec<(f64, f64)> = points
        .iter()
        .map(|z| {
            let value = det(z);
            let mut grad2 = 0.0;
            for i in 0..n {
                for dir in [C64::new(h, 0.0), C64::new(0.0, h)] {
                    let mut plus = z.clone();
                    let mut minus = z.clone();
                    plus[i] += dir;
                    minus[i] -= dir;
                    let g = (det(&plus) - det(&minus)) / (2.0 * h);
                    grad2 += g * g;
                }
            }
            (value.abs(), grad2.sqrt())
        })
        .collect();
    let max_abs_det = data.iter().map(|d| d.0).fold(0.0, f64::max);
    let frac = |pred: &dyn Fn(&(f64, f64)) -> bool| {
        data.iter().filter(|d| pred(d)).count() as f64 / samples.max(1) as f64
    };
    let fractions: Vec<f64> = DEGENERACY_EPSILONS
        .iter()
        .map(|&e| frac(&|d| d.0 < e * max_abs_det))
        .collect();
    let distance_fractions: Vec<f64> = DEGENERACY_EPSILONS
        .iter()
        .map(|&e| frac(&|d| d.0 < e * d.1))
        .collect();
    // Hill estimator on the lower tail of the distance proxy: if
    // P(dist < r) ~ C r^c then c ~ k / sum_i ln(r_(k) / r_(i)).
    let mut dist: Vec<f64> = data
        .iter()
        .map(|d| if d.1 > 0.0 { d.0 / d.1 } else { f64::INFINITY })
        .filter(|x| x.is_finite())
        .collect();
    dist.sort_by(f64::total_cmp);
    let k = (samples / 100).max(10);
    let codimension_estimate = (dist.len() > k && dist[k] > 0.0 && dist[k] < 0.1).then(|| {
        let sum: f64 = dist[..k].iter().map(|&r| (dist[k] / r.max(f64::MIN_POSITIVE)).ln()).sum();
        k as f64 / sum
    });
    DegeneracyReport {
        samples,
        epsilons: DEGENERACY_EPSILONS.to_vec(),
        fractions,
        distance_fractions,
        codimension_estimate,
        max_abs_det,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic() -> HermitianPolynomial {
        HermitianPolynomial::from_json(
            r#"{"n":1,"weights":[1],"degree":4,"terms":[{"J":[2],"K":[2],"re":1.0}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn quartic_levi_data() {
        let p = quartic();
        let levi = levi_coefficients(&p, &[ONE]).unwrap();
        // Q = -4 zeta, S = 2.
        assert!((levi.q[0][0].coeff(1) + 4.0).norm() < 1e-13);
        assert!(levi.q[0][0].coeff(0).norm() < 1e-13);
        assert!((levi.s[0][0].coeff(0) - 2.0).norm() < 1e-13);
        assert_eq!(levi.det_q.winding_number().unwrap(), 1);
    }

    #[test]
    fn quartic_lift() {
        let p = quartic();
        let lift = build_lift(&p, &[ONE], 16).unwrap();
        // g = 6 - 8 zeta + 2 zeta^2
        let g = lift.g();
        assert!((g.coeff(0) - 6.0).norm() < 1e-13);
        assert!((g.coeff(1) + 8.0).norm() < 1e-13);
        assert!((g.coeff(2) - 2.0).norm() < 1e-13);
        // h~ = 2 (1 - zeta)^3
        let ht = lift.h_tilde(0).divide_one_minus_zeta(3).unwrap();
        assert!((ht.coeff(0) - 2.0).norm() < 1e-13);
    }

    #[test]
    fn degenerate_model_is_not_admissible_at_real_direction() {
        let p = HermitianPolynomial::from_json(
            r#"{"n":1,"weights":[1],"degree":4,"terms":[{"J":[3],"K":[1],"re":1.0},{"J":[1],"K":[3],"re":1.0}]}"#,
        )
        .unwrap();
        let cert = is_admissible(&p, &[ONE], ADMISSIBILITY_TOL);
        assert!(!cert.admissible);
        let search = find_admissible(&p, 8, 0, ADMISSIBILITY_TOL);
        assert!(!search.found);
    }

    #[test]
    fn sphere_samples_are_deterministic() {
        assert_eq!(sphere_sample(3, 7, 2), sphere_sample(3, 7, 2));
        assert_ne!(sphere_sample(3, 7, 2), sphere_sample(3, 7, 3));
        let v = sphere_sample(3, 1, 0);
        let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-14);
    }
    #[test]
    fn closed_form_g_matches_harmonic_extension() {
        let p = quartic();
        let v = [C64::new(0.6, -0.3)];
        let a = closed_form_g(&p, &v, 16).unwrap();
        let b = solve_g(&p, &v, 16).unwrap();
        assert!((&a - &b).max_abs_coeff() < 1e-13);
        let g1 = g_prime_zero_closed_form(&p, &[ONE]).unwrap();
        assert!((g1 + 8.0).norm() < 1e-13);
    }

    #[test]
    fn degeneracy_probe_on_quartic_and_decoupled() {
        let r = degeneracy_dimension_probe(&quartic(), 500, 3);
        assert!(r.fractions.iter().all(|&f| f == 0.0));
        let dec = HermitianPolynomial::from_json(
            r#"{"n":2,"weights":[1,1],"degree":4,"terms":[{"J":[2,0],"K":[2,0],"re":1.0},{"J":[0,2],"K":[0,2],"re":1.0}]}"#,
        )
        .unwrap();
        let r = degeneracy_dimension_probe(&dec, 20000, 3);
        assert!(r.fractions[0] > r.fractions[2]);
        let codim = r.codimension_estimate.unwrap();
        assert!((codim - 2.0).abs() < 0.5, "{codim}");
        let bad = HermitianPolynomial::from_json(
            r#"{"n":1,"weights":[1],"degree":4,"terms":[{"J":[3],"K":[1],"re":1.0},{"J":[1],"K":[3],"re":1.0}]}"#,
        )
        .unwrap();
        let r = degeneracy_dimension_probe(&bad, 20000, 3);
        let codim = r.codimension_estimate.unwrap();
        assert!((codim - 1.0).abs() < 0.5, "{codim}");
    }
}
