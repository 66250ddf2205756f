//! Fourier-collocation discretization of the boundary system and of its
//! linearization `f' -> 2 Re[conj(G) f']` on constrained lifts.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circle::CircleFunction;
use crate::error::{Error, Result};
use crate::hypersurface::{DefiningFunction, LiftPoint};
use crate::linalg::{self, RangeBasis, RankInfo};
use crate::model::DiscLift;
use crate::poly::HermitianPolynomial;
use crate::rhsolver::perturbed::PerturbedHypersurface;

/// Relative singular-value threshold for the kernel.
pub const KERNEL_RANK_TOL: f64 = 1e-8;
/// Smallest acceptable ratio between the last kept and first dropped
/// singular value.
pub const MIN_RANK_GAP: f64 = 10.0;
/// Relative residual below which a target counts as attained.
pub const SURJECTIVITY_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct LinearizeOptions {
    pub nf: usize,
    /// Random targets for the surjectivity test; 0 skips it.
    pub surjectivity_trials: usize,
    pub seed: u64,
}

impl Default for LinearizeOptions {
    fn default() -> Self {
        Self {
            nf: 128,
            surjectivity_trials: 0,
            seed: 0,
        }
    }
}

/// Real unknowns: real and imaginary parts of the quotient coefficients
/// `q_{c,k}`, `0 <= k <= nf - mu_c`, where `f_c = (1 - zeta)^{mu_c} q_c`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnknownLayout {
    n: usize,
    k0: u32,
    nf: usize,
    orders: Vec<u32>,
    offsets: Vec<usize>,
    len: usize,
}

impl UnknownLayout {
    pub fn new(n: usize, k0: u32, orders: Vec<u32>, nf: usize) -> Result<Self> {
        if orders.len() != 2 * n + 2 {
            return Err(Error::Dimension(format!("{} orders for n = {n}", orders.len())));
        }
        if orders.iter().any(|&mu| mu as usize > nf) {
            return Err(Error::Truncation(format!(
                "N_F = {nf} is below a vanishing order"
            )));
        }
        let mut offsets = Vec::with_capacity(orders.len());
        let mut len = 0;
        for &mu in &orders {
            offsets.push(len);
            len += 2 * (nf - mu as usize + 1);
        }
        Ok(Self {
            n,
            k0,
            nf,
            orders,
            offsets,
            len,
        })
    }

    pub fn for_lift(lift: &DiscLift, nf: usize) -> Result<Self> {
        Self::new(lift.n(), lift.k0(), lift.orders().to_vec(), nf)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn nf(&self) -> usize {
        self.nf
    }

    pub fn components(&self) -> usize {
        self.orders.len()
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    /// Number of complex quotient coefficients of component `c`.
    pub fn quotient_len(&self, c: usize) -> usize {
        self.nf - self.orders[c] as usize + 1
    }

    /// Index of the real part of `q_{c,k}`; the imaginary part follows it.
    pub fn index(&self, c: usize, k: usize) -> usize {
        self.offsets[c] + 2 * k
    }

    pub fn pack(&self, lift: &DiscLift) -> Result<DVector<f64>> {
        if lift.orders() != self.orders.as_slice() {
            return Err(Error::Dimension("lift orders differ from the layout".into()));
        }
        let quotients = lift.with_nf(self.nf.max(lift.nf()))?.quotients()?;
        let mut x = DVector::zeros(self.len);
        for (c, q) in quotients.iter().enumerate() {
            let top = self.quotient_len(c) as i64;
            let lost = q
                .coeffs()
                .iter()
                .enumerate()
                .map(|(i, v)| (i as i64 - q.nf() as i64, v))
                .filter(|(k, _)| *k < 0 || *k >= top)
                .map(|(_, v)| v.norm())
                .fold(0.0, f64::max);
            if lost > 1e-12 * q.max_abs_coeff().max(1.0) {
                return Err(Error::Truncation(format!(
                    "component {c} does not fit N_F = {} (dropped mass {lost:.3e})",
                    self.nf
                )));
            }
            for k in 0..top as usize {
                let v = q.coeff(k as i64);
                x[self.index(c, k)] = v.re;
                x[self.index(c, k) + 1] = v.im;
            }
        }
        Ok(x)
    }

    pub fn unpack(&self, x: &DVector<f64>) -> Result<DiscLift> {
        if x.len() != self.len {
            return Err(Error::Dimension(format!(
                "unknown vector has length {}, expected {}",
                x.len(),
                self.len
            )));
        }
        let quotients = (0..self.components())
            .map(|c| {
                let coeffs: Vec<C64> = (0..self.quotient_len(c))
                    .map(|k| C64::new(x[self.index(c, k)], x[self.index(c, k) + 1]))
                    .collect();
                CircleFunction::from_laurent(self.nf, 0, &coeffs)
            })
            .collect::<Result<Vec<_>>>()?;
        DiscLift::from_quotients(self.n, self.k0, self.orders.clone(), &quotients)
    }
}

/// Row weights `|1 - zeta|^{-kappa_i}` on the offset grid
/// `zeta_j = exp(2 pi i (j + 1/2) / M)`, `M = 4 N_F + 2`.
#[derive(Clone, Debug)]
pub struct Collocation {
    pub zeta: Vec<C64>,
    pub row_exponents: Vec<u32>,
    weights: Vec<Vec<f64>>,
}

impl Collocation {
    pub fn new(nf: usize, row_exponents: Vec<u32>) -> Self {
        let m = 4 * nf + 2;
        let zeta: Vec<C64> = (0..m)
            .map(|j| C64::from_polar(1.0, TAU * (j as f64 + 0.5) / m as f64))
            .collect();
        let weights = row_exponents
            .iter()
            .map(|&kappa| {
                zeta.iter()
                    .map(|z| (ONE - z).norm().powi(-(kappa as i32)))
                    .collect()
            })
            .collect();
        Self {
            zeta,
            row_exponents,
            weights,
        }
    }

    pub fn for_polynomial(p: &HermitianPolynomial, nf: usize) -> Self {
        Self::new(nf, row_exponents(p))
    }

    pub fn samples(&self) -> usize {
        self.zeta.len()
    }

    pub fn rows(&self) -> usize {
        self.samples() * self.row_exponents.len()
    }

    fn row(&self, i: usize, j: usize) -> usize {
        i * self.samples() + j
    }
}

const ONE: C64 = C64::new(1.0, 0.0);

/// Vanishing orders of the boundary equations at `zeta = 1`:
/// 1 for `r`, `d - m_l` for each conormal pair, 0 for the last equation.
pub fn row_exponents(p: &HermitianPolynomial) -> Vec<u32> {
    let d = p.degree();
    let mut out = vec![1];
    for &ml in p.weights().as_slice() {
        out.push(d - ml);
        out.push(d - ml);
    }
    out.push(0);
    out
}

fn lift_points(lift: &DiscLift, grid: &Collocation) -> Vec<LiftPoint> {
    let m = grid.samples();
    let cols: Vec<Vec<C64>> = lift
        .components()
        .iter()
        .map(|c| c.sample_shifted(m, 0.5))
        .collect();
    (0..m)
        .map(|j| {
            let x: Vec<C64> = cols.iter().map(|col| col[j]).collect();
            LiftPoint::from_components(lift.n(), &x)
        })
        .collect()
}

/// Weighted boundary residuals on the collocation grid.
pub fn residual_vector(defining: &DefiningFunction, lift: &DiscLift, grid: &Collocation) -> DVector<f64> {
    let mut out = DVector::zeros(grid.rows());
    for (j, pt) in lift_points(lift, grid).iter().enumerate() {
        for (i, r) in defining.residual(grid.zeta[j], pt).into_iter().enumerate() {
            out[grid.row(i, j)] = r * grid.weights[i][j];
        }
    }
    out
}

/// Weighted collocation matrix of `f' -> 2 Re[D f']` in the layout's unknowns.
pub fn jacobian_matrix(
    defining: &DefiningFunction,
    lift: &DiscLift,
    layout: &UnknownLayout,
    grid: &Collocation,
) -> DMatrix<f64> {
    let dim = layout.components();
    let mut out = DMatrix::zeros(grid.rows(), layout.len());
    for (j, pt) in lift_points(lift, grid).iter().enumerate() {
        let zeta = grid.zeta[j];
        let d = defining.jacobian(zeta, pt);
        for c in 0..dim {
            let mut basis = (ONE - zeta).powu(layout.orders()[c]);
            for k in 0..layout.quotient_len(c) {
                let col = layout.index(c, k);
                for i in 0..dim {
                    let z = d[(i, c)] * basis;
                    let w = 2.0 * grid.weights[i][j];
                    out[(grid.row(i, j), col)] = w * z.re;
                    out[(grid.row(i, j), col + 1)] = -w * z.im;
                }
                basis *= zeta;
            }
        }
    }
    out
}

/// Largest relative distance from random admissible targets to the range of
/// the collocation matrix.
#[derive(Clone, Debug, Serialize)]
pub struct SurjectivityReport {
    pub trials: usize,
    pub max_frequency: usize,
    pub max_relative_residual: f64,
    pub surjective: bool,
}

/// Discretized linear operator at a lift.
#[derive(Clone, Debug)]
pub struct LinearizedSystem {
    pub layout: UnknownLayout,
    pub collocation: Collocation,
    pub matrix: DMatrix<f64>,
    pub rank: RankInfo,
    /// Orthonormal kernel basis in the columns.
    pub kernel_basis: DMatrix<f64>,
    pub kernel_dim: usize,
    pub surjectivity: Option<SurjectivityReport>,
}

impl LinearizedSystem {
    /// Kernel element `j` as a lift (a tangent vector to the family).
    pub fn kernel_lift(&self, j: usize) -> Result<DiscLift> {
        self.layout.unpack(&self.kernel_basis.column(j).into_owned())
    }
}

/// Linearizes the boundary system of `r` at `lift`.
pub fn linearize(r: &PerturbedHypersurface, lift: &DiscLift, opts: &LinearizeOptions) -> Result<LinearizedSystem> {
    let p = r.model().polynomial();
    let layout = UnknownLayout::for_lift(lift, opts.nf)?;
    let lift = lift.with_nf(opts.nf.max(lift.nf()))?;
    let collocation = Collocation::for_polynomial(p, opts.nf);
    let matrix = jacobian_matrix(r.defining(), &lift, &layout, &collocation);
    let (kernel, range) = if opts.surjectivity_trials > 0 {
        let (k, r) = linalg::kernel_and_range(matrix.clone(), KERNEL_RANK_TOL);
        (k, Some(r))
    } else {
        (linalg::kernel(matrix.clone(), KERNEL_RANK_TOL), None)
    };
    if kernel.info.gap < MIN_RANK_GAP {
        return Err(Error::RankAmbiguous(format!(
            "singular-value gap {:.2} at rank {}",
            kernel.info.gap, kernel.info.rank
        )));
    }
    let surjectivity = match range {
        Some(range) => Some(surjectivity(&range, &kernel.info, &collocation, opts)?),
        None => None,
    };
    let kernel_dim = kernel.basis.ncols();
    Ok(LinearizedSystem {
        layout,
        collocation,
        matrix,
        rank: kernel.info,
        kernel_basis: kernel.basis,
        kernel_dim,
        surjectivity,
    })
}

/// Targets are real trigonometric polynomials in rows with even vanishing
/// order and half-integer-frequency functions `cos((k + 1/2) t + phi)` in rows
/// with odd order, matching the phase of `(1 - zeta)^kappa / |1 - zeta|^kappa`.
fn surjectivity(range: &RangeBasis, info: &RankInfo, grid: &Collocation, opts: &LinearizeOptions) -> Result<SurjectivityReport> {
    if info.gap < MIN_RANK_GAP {
        return Err(Error::RankAmbiguous(format!(
            "range rank {} has gap {:.2}",
            info.rank, info.gap
        )));
    }
    let max_frequency = (opts.nf / 8).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let m = grid.samples();
    let mut worst: f64 = 0.0;
    for _ in 0..opts.surjectivity_trials {
        let mut b = DVector::zeros(grid.rows());
        for (i, &kappa) in grid.row_exponents.iter().enumerate() {
            let half = if kappa % 2 == 1 { 0.5 } else { 0.0 };
            for k in 0..=max_frequency {
                let amp: f64 = rng.random_range(-1.0..1.0) / (1 + k) as f64;
                let phase: f64 = rng.random_range(0.0..2.0 * PI);
                let freq = k as f64 + half;
                for j in 0..m {
                    let t = TAU * (j as f64 + 0.5) / m as f64;
                    b[grid.row(i, j)] += amp * (freq * t + phase).cos();
                }
            }
        }
        worst = worst.max(range.relative_residual(&b));
    }
    Ok(SurjectivityReport {
        trials: opts.surjectivity_trials,
        max_frequency,
        max_relative_residual: worst,
        surjective: worst < SURJECTIVITY_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_lift, ModelHypersurface};

    fn quartic() -> HermitianPolynomial {
        HermitianPolynomial::from_json(
            r#"{"n":1,"weights":[1],"degree":4,"terms":[{"J":[2],"K":[2],"re":1.0}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn pack_unpack_round_trip() {
        let p = quartic();
        let lift = build_lift(&p, &[C64::new(0.6, 0.8)], 16).unwrap();
        let layout = UnknownLayout::for_lift(&lift, 16).unwrap();
        let x = layout.pack(&lift).unwrap();
        assert!(layout.unpack(&x).unwrap().distance(&lift) < 1e-14);
    }

    #[test]
    fn model_lift_has_zero_weighted_residual() {
        let p = quartic();
        let lift = build_lift(&p, &[ONE], 16).unwrap();
        let grid = Collocation::for_polynomial(&p, 16);
        let f = residual_vector(&DefiningFunction::model(&p), &lift, &grid);
        // Weights reach |1 - zeta|^{-3} next to zeta = 1.
        assert!(f.amax() < 1e-9, "{}", f.amax());
    }

    #[test]
    fn quartic_kernel_dimension() {
        let p = quartic();
        let lift = build_lift(&p, &[ONE], 32).unwrap();
        let r = PerturbedHypersurface::unperturbed(ModelHypersurface::new(p));
        let opts = LinearizeOptions {
            nf: 32,
            surjectivity_trials: 4,
            seed: 1,
        };
        let sys = linearize(&r, &lift, &opts).unwrap();
        // 2 k0 + 1 multipliers of the conormal lift plus ker L3 (= 2 ind Q);
        // pinning g(1) = 0 removes the imaginary translation in w.
        assert_eq!(sys.kernel_dim, 7);
        assert!(sys.rank.gap > 1e6);
        let s = sys.surjectivity.unwrap();
        assert!(s.surjective, "{}", s.max_relative_residual);
    }
}
