//! Matrix-valued loops on the circle, Maslov indices, partial indices and
//! Birkhoff factorization `L = B+ Lambda B-`.
//!
//! Partial indices are recovered from kernel dimensions: for the equation
//! `phi+(zeta) = zeta^{-s} L(zeta) phi-(zeta)` with `phi+` a polynomial and
//! `phi-` a polynomial in `1/zeta`, the solution space has complex dimension
//! `k(s) = sum_j max(kappa_j - s + 1, 0)`, so `k(s) - k(s+1)` counts the
//! indices `kappa_j >= s`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::circle::{winding_from_samples, CircleFunction, WINDING_SAMPLES};
use crate::error::{Error, Result};
use crate::linalg;

/// Relative singular-value threshold for kernel dimensions.
pub const KERNEL_RANK_TOL: f64 = 1e-8;
/// Default polynomial degree bound for index recovery.
pub const DEFAULT_INDEX_DEGREE: usize = 24;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Square matrix of circle functions, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixLoop {
    dim: usize,
    entries: Vec<CircleFunction>,
}

impl MatrixLoop {
    pub fn new(dim: usize, entries: Vec<CircleFunction>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "{} entries for a {dim}x{dim} loop",
                entries.len()
            )));
        }
        let nf = entries.first().map(|e| e.nf()).unwrap_or(0);
        let entries = entries
            .into_iter()
            .map(|e| if e.nf() == nf { Ok(e) } else { e.with_nf(nf) })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: Vec<Vec<CircleFunction>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("matrix loop must be square".into()));
        }
        let nf = rows
            .iter()
            .flatten()
            .map(|e| e.nf())
            .max()
            .unwrap_or(0);
        let entries = rows
            .into_iter()
            .flatten()
            .map(|e| e.with_nf(nf))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, entries)
    }

    pub fn identity(dim: usize, nf: usize) -> Self {
        Self::diagonal_monomials(nf, &vec![0; dim]).expect("zero exponents fit any truncation")
    }

    /// `diag(zeta^{k_1}, ..., zeta^{k_N})`.
    pub fn diagonal_monomials(nf: usize, exps: &[i64]) -> Result<Self> {
        let dim = exps.len();
        let mut entries = vec![CircleFunction::zero(nf); dim * dim];
        for (i, &k) in exps.iter().enumerate() {
            entries[i * dim + i] = CircleFunction::monomial(nf, k, ONE)?;
        }
        Ok(Self { dim, entries })
    }

    /// Interpolates matrix samples on the shifted grid.
    pub fn from_samples(nf: usize, samples: &[DMatrix<C64>], offset: f64) -> Result<Self> {
        let dim = samples.first().map(|s| s.nrows()).unwrap_or(0);
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let vals: Vec<C64> = samples.iter().map(|s| s[(i, j)]).collect();
                entries.push(CircleFunction::from_samples(nf, &vals, offset)?);
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nf(&self) -> usize {
        self.entries.first().map(|e| e.nf()).unwrap_or(0)
    }

    pub fn entry(&self, i: usize, j: usize) -> &CircleFunction {
        &self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[CircleFunction] {
        &self.entries
    }

    pub fn eval(&self, zeta: C64) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.entry(i, j).eval(zeta))
    }

    /// Values at `exp(2 pi i (j + offset) / m)`.
    pub fn sample_shifted(&self, m: usize, offset: f64) -> Vec<DMatrix<C64>> {
        let cols: Vec<Vec<C64>> = self
            .entries
            .iter()
            .map(|e| e.sample_shifted(m, offset))
            .collect();
        (0..m)
            .map(|t| DMatrix::from_fn(self.dim, self.dim, |i, j| cols[i * self.dim + j][t]))
            .collect()
    }

    pub fn sample(&self, m: usize) -> Vec<DMatrix<C64>> {
        self.sample_shifted(m, 0.0)
    }

    /// Entrywise `conj(L(zeta))` on the circle.
    pub fn conj_reflect(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e.conj_reflect()).collect(),
        }
    }

    /// Exact Laurent product.
    pub fn mul(&self, other: &MatrixLoop) -> Result<MatrixLoop> {
        let n = self.dim;
        let nf = self.nf().max(other.nf());
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = CircleFunction::zero(nf);
                for k in 0..n {
                    acc = &acc + &self.entry(i, k).mul(other.entry(k, j))?;
                }
                entries.push(acc);
            }
        }
        Ok(MatrixLoop { dim: n, entries })
    }

    /// Determinant values on an `m`-point grid.
    pub fn det_samples(&self, m: usize) -> Vec<C64> {
        self.sample(m).into_iter().map(|a| a.determinant()).collect()
    }

    /// Winding number of `det L`.
    pub fn maslov_index(&self) -> Result<i64> {
        let mut m = WINDING_SAMPLES.max(4 * self.nf() + 16);
        loop {
            match winding_from_samples(&self.det_samples(m)) {
                Err(Error::Resolution(_)) if m < (1 << 17) => m *= 4,
                other => return other,
            }
        }
    }

    /// Fails unless `min |det L| > 1e-8 max |det L|` on the circle.
    pub fn check_invertible(&self) -> Result<()> {
        let dets = self.det_samples(WINDING_SAMPLES.max(4 * self.nf() + 16));
        let max = dets.iter().map(|d| d.norm()).fold(0.0, f64::max);
        let min = dets.iter().map(|d| d.norm()).fold(f64::INFINITY, f64::min);
        if !(min > 1e-8 * max) {
            return Err(Error::Singular(format!(
                "min |det| = {min:.3e}, max |det| = {max:.3e}"
            )));
        }
        Ok(())
    }

    /// Max entrywise coefficient difference.
    pub fn distance(&self, other: &MatrixLoop) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).max_abs_coeff())
            .fold(0.0, f64::max)
    }

    /// Largest coefficient modulus among modes with `|k| > nf - band`; a
    /// truncation-quality indicator for interpolated loops.
    pub fn tail(&self, band: usize) -> f64 {
        let nf = self.nf() as i64;
        let lo = nf - band as i64;
        self.entries
            .iter()
            .flat_map(|e| (lo + 1..=nf).flat_map(move |k| [e.coeff(k).norm(), e.coeff(-k).norm()]))
            .fold(0.0, f64::max)
    }
}

/// The loop `-conj(G)^{-1} G`, interpolated at truncation `nf`.
pub fn symbol(g: &MatrixLoop, nf: usize) -> Result<MatrixLoop> {
    g.check_invertible()?;
    let m = 4 * nf + 4;
    let samples: Vec<DMatrix<C64>> = g
        .sample(m)
        .into_iter()
        .map(|a| {
            let inv = a
                .map(|x| x.conj())
                .try_inverse()
                .ok_or_else(|| Error::Singular("conj(G) not invertible at a sample".into()))?;
            Ok(-(inv * a))
        })
        .collect::<Result<Vec<_>>>()?;
    MatrixLoop::from_samples(nf, &samples, 0.0)
}

/// Kernel of `(phi+, phi-) -> phi+ - zeta^{-s} L phi-` with both sides of
/// degree at most `degree`; columns are `[phi+ coeffs; phi- coeffs]`, where
/// `phi-` coefficient `k` multiplies `zeta^{-k}`.
fn index_kernel(l: &MatrixLoop, s: i64, degree: usize) -> linalg::Kernel<C64> {
    let n = l.dim();
    let dp1 = degree as i64 + 1;
    let (lo, hi) = l
        .entries()
        .iter()
        .filter_map(|e| e.support())
        .fold((0i64, 0i64), |(a, b), (c, d)| (a.min(c), b.max(d)));
    let kmin = 0.min(lo - s - degree as i64);
    let kmax = (degree as i64).max(hi - s);
    let modes = (kmax - kmin + 1) as usize;
    let cols = 2 * n * dp1 as usize;
    let mut a = DMatrix::<C64>::zeros(n * modes, cols);
    let row = |comp: usize, k: i64| comp * modes + (k - kmin) as usize;
    for c in 0..n {
        for k in 0..dp1 {
            let col = c * dp1 as usize + k as usize;
            a[(row(c, k), col)] = ONE;
            let col_minus = n * dp1 as usize + col;
            for i in 0..n {
                let e = l.entry(i, c);
                if let Some((elo, ehi)) = e.support() {
                    for t in elo..=ehi {
                        let coef = e.coeff(t);
                        if coef != ZERO {
                            a[(row(i, t - s - k), col_minus)] -= coef;
                        }
                    }
                }
            }
        }
    }
    linalg::kernel(a, KERNEL_RANK_TOL)
}

/// Partial indices with the data used to derive them.
#[derive(Clone, Debug, Serialize)]
pub struct PartialIndices {
    /// Ascending.
    pub indices: Vec<i64>,
    pub maslov: i64,
    /// `(s, k(s))` pairs computed during the scan.
    pub kernel_dims: Vec<(i64, usize)>,
}

/// Partial indices of `L` with polynomial degree bound `degree`.
pub fn partial_indices(l: &MatrixLoop, degree: usize) -> Result<PartialIndices> {
    let n = l.dim();
    l.check_invertible()?;
    let maslov = l.maslov_index()?;
    let top = degree as i64;
    let k_top = index_kernel(l, top, degree).basis.ncols();
    if k_top > 0 {
        return Err(Error::IndexRecovery(format!(
            "an index reaches the degree bound {degree}"
        )));
    }
    let mut dims = vec![(top, 0usize)];
    let mut prev_k = 0usize;
    let mut prev_count = 0usize;
    let mut indices = Vec::new();
    let mut s = top - 1;
    while indices.len() < n {
        if s < -top {
            return Err(Error::IndexRecovery(format!(
                "only {} of {n} indices found above {}",
                indices.len(),
                -top
            )));
        }
        let k = index_kernel(l, s, degree).basis.ncols();
        dims.push((s, k));
        if k < prev_k {
            return Err(Error::IndexRecovery(format!("kernel dimension dropped at s = {s}")));
        }
        let count = k - prev_k;
        if count < prev_count || count > n {
            return Err(Error::IndexRecovery(format!(
                "inconsistent kernel growth {count} at s = {s}"
            )));
        }
        indices.extend(std::iter::repeat_n(s, count - prev_count));
        prev_k = k;
        prev_count = count;
        s -= 1;
    }
    indices.sort_unstable();
    let sum: i64 = indices.iter().sum();
    if sum != maslov {
        return Err(Error::IndexRecovery(format!(
            "indices {indices:?} sum to {sum}, Maslov index is {maslov}"
        )));
    }
    Ok(PartialIndices {
        indices,
        maslov,
        kernel_dims: dims,
    })
}

/// `L = B+ Lambda B-` with `B+` holomorphic in the disc, `B-` holomorphic
/// outside with `B-(inf)` invertible, and `Lambda = diag(zeta^{kappa_j})`.
#[derive(Clone, Debug, Serialize)]
pub struct BirkhoffFactorization {
    pub b_plus: MatrixLoop,
    /// Exponents on the diagonal of `Lambda`, in column order.
    pub lambda: Vec<i64>,
    pub b_minus: MatrixLoop,
    /// Sup of `|B+ Lambda B- - L|` over samples, relative to sup `|L|`.
    pub residual: f64,
    /// Whether `B-(inf) = I` was achieved.
    pub normalized: bool,
}

/// Birkhoff factorization of `L`.
pub fn factorize(l: &MatrixLoop, degree: usize) -> Result<BirkhoffFactorization> {
    if l.dim() == 1 {
        return factorize_scalar(l.entry(0, 0));
    }
    let n = l.dim();
    let pi = partial_indices(l, degree)?;
    let mut values: Vec<i64> = pi.indices.clone();
    values.dedup();
    values.reverse();
    let dp1 = degree + 1;
    let mut plus_cols: Vec<DVector<C64>> = Vec::new();
    let mut minus_cols: Vec<DVector<C64>> = Vec::new();
    let mut at_infinity: Vec<DVector<C64>> = Vec::new();
    let mut lambda = Vec::new();
    for &v in &values {
        let mult = pi.indices.iter().filter(|&&x| x == v).count();
        let ker = index_kernel(l, v, degree).basis;
        // phi-(inf) of every kernel vector: coefficient of zeta^0.
        let w = DMatrix::from_fn(n, ker.ncols(), |i, c| ker[(n * dp1 + i * dp1, c)]);
        let mut w_proj = w.clone();
        if !at_infinity.is_empty() {
            let e = linalg::orthonormal_columns(&DMatrix::from_columns(&at_infinity), 1e-12);
            w_proj -= &e * (e.adjoint() * &w);
        }
        let svd = w_proj.clone().svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        if order.len() < mult || svd.singular_values[order[mult - 1]] <= 1e-6 * smax.max(f64::MIN_POSITIVE) {
            return Err(Error::FactorizationUnstable(format!(
                "cannot select {mult} independent columns for index {v}"
            )));
        }
        for &r in order.iter().take(mult) {
            let coeffs = v_t.row(r).adjoint();
            let x = &ker * coeffs;
            plus_cols.push(x.rows(0, n * dp1).into_owned());
            minus_cols.push(x.rows(n * dp1, n * dp1).into_owned());
            at_infinity.push(&w * v_t.row(r).adjoint());
            lambda.push(v);
        }
    }
    let nf = l.nf().max(degree + lambda.iter().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0));
    let column_loop = |cols: &[DVector<C64>], sign: i64| -> Result<MatrixLoop> {
        let mut rows = vec![vec![CircleFunction::zero(nf); n]; n];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..n {
                let coeffs: Vec<C64> = (0..dp1).map(|k| col[i * dp1 + k]).collect();
                rows[i][j] = if sign > 0 {
                    CircleFunction::from_laurent(nf, 0, &coeffs)?
                } else {
                    let rev: Vec<C64> = coeffs.iter().rev().copied().collect();
                    CircleFunction::from_laurent(nf, -(degree as i64), &rev)?
                };
            }
        }
        MatrixLoop::from_rows(rows)
    };
    let mut x_plus = column_loop(&plus_cols, 1)?;
    let mut x_minus = column_loop(&minus_cols, -1)?;

    // Normalize X-(inf) = I when the required change of basis keeps B+
    // holomorphic, i.e. when X-(inf)^{-1} is block upper triangular.
    let x_inf = DMatrix::from_columns(&at_infinity);
    let c = x_inf
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::FactorizationUnstable("X-(inf) is singular".into()))?;
    let scale = c.norm().max(1.0);
    let admissible = (0..n).all(|i| (0..n).all(|j| lambda[i] >= lambda[j] || c[(i, j)].norm() <= 1e-12 * scale));
    if admissible {
        let m = 4 * nf + 4;
        let lam = MatrixLoop::diagonal_monomials(nf, &lambda)?;
        let xp: Vec<DMatrix<C64>> = x_plus
            .sample(m)
            .into_iter()
            .zip(lam.sample(m))
            .map(|(xp, lm)| {
                let lm_inv = lm.clone().try_inverse().expect("monomial diagonal");
                xp * (&lm * &c * lm_inv)
            })
            .collect();
        let xm: Vec<DMatrix<C64>> = x_minus.sample(m).into_iter().map(|xm| xm * &c).collect();
        x_plus = MatrixLoop::from_samples(nf, &xp, 0.0)?;
        x_minus = MatrixLoop::from_samples(nf, &xm, 0.0)?;
    }

    let m = 4 * nf + 4;
    let b_minus_samples = x_minus
        .sample(m)
        .into_iter()
        .map(|x| {
            x.try_inverse()
                .ok_or_else(|| Error::FactorizationUnstable("X- singular on the circle".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let b_minus = MatrixLoop::from_samples(nf, &b_minus_samples, 0.0)?;
    let lam = MatrixLoop::diagonal_monomials(nf, &lambda)?;
    let residual = factorization_residual(l, &x_plus, &lam, &b_minus);
    Ok(BirkhoffFactorization {
        b_plus: x_plus,
        lambda,
        b_minus,
        residual,
        normalized: admissible,
    })
}

fn factorization_residual(l: &MatrixLoop, bp: &MatrixLoop, lam: &MatrixLoop, bm: &MatrixLoop) -> f64 {
    let m = 4 * l.nf().max(bp.nf()).max(bm.nf()) + 64;
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (((lv, p), d), q) in l.sample(m).iter().zip(bp.sample(m)).zip(lam.sample(m)).zip(bm.sample(m)) {
        err = err.max((p * d * q - lv).camax());
        scale = scale.max(lv.camax());
    }
    err / scale.max(f64::MIN_POSITIVE)
}

fn factorize_scalar(f: &CircleFunction) -> Result<BirkhoffFactorization> {
    let kappa = f.winding_number()?;
    let nf = f.nf().max(16);
    let m = (4 * nf + 4).max(WINDING_SAMPLES);
    let vals = f.with_nf(nf)?.sample(m);
    let mut logs = Vec::with_capacity(m);
    let mut phase = 0.0;
    let mut prev: Option<C64> = None;
    for (j, v) in vals.iter().enumerate() {
        let zeta = C64::from_polar(1.0, TAU * j as f64 / m as f64);
        let x = v * zeta.powi(-(kappa as i32));
        phase = match prev {
            None => x.arg(),
            Some(p) => phase + (x / p).arg(),
        };
        prev = Some(x);
        logs.push(C64::new(x.norm().ln(), phase));
    }
    let log = CircleFunction::from_samples(nf, &logs, 0.0)?;
    let (plus, minus) = log.riesz_split();
    let exp_of = |g: &CircleFunction| -> Result<CircleFunction> {
        let s: Vec<C64> = g.sample(m).into_iter().map(|x| x.exp()).collect();
        CircleFunction::from_samples(nf, &s, 0.0)
    };
    let bp = MatrixLoop::new(1, vec![exp_of(&plus)?])?;
    let bm = MatrixLoop::new(1, vec![exp_of(&minus)?])?;
    let lam = MatrixLoop::diagonal_monomials(nf, &[kappa])?;
    let l = MatrixLoop::new(1, vec![f.with_nf(nf)?])?;
    let residual = factorization_residual(&l, &bp, &lam, &bm);
    Ok(BirkhoffFactorization {
        b_plus: bp,
        lambda: vec![kappa],
        b_minus: bm,
        residual,
        normalized: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(nf: usize, k: i64, c: f64) -> CircleFunction {
        CircleFunction::monomial(nf, k, C64::new(c, 0.0)).unwrap()
    }

    #[test]
    fn diagonal_indices() {
        let l = MatrixLoop::diagonal_monomials(8, &[2, -1]).unwrap();
        let pi = partial_indices(&l, 8).unwrap();
        assert_eq!(pi.indices, vec![-1, 2]);
        assert_eq!(pi.maslov, 1);
    }

    #[test]
    fn triangular_loop_factorization() {
        let nf = 8;
        let l = MatrixLoop::from_rows(vec![
            vec![mono(nf, 1, 1.0), mono(nf, 0, 1.0)],
            vec![CircleFunction::zero(nf), mono(nf, -1, 1.0)],
        ])
        .unwrap();
        let pi = partial_indices(&l, 8).unwrap();
        assert_eq!(pi.indices, vec![-1, 1]);
        let f = factorize(&l, 8).unwrap();
        assert!(f.residual < 1e-10, "{}", f.residual);
    }

    #[test]
    fn scalar_factorization() {
        // (2 + zeta) zeta^2 (1 + 0.3/zeta)
        let nf = 16;
        let a = CircleFunction::from_laurent(nf, 0, &[C64::new(2.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        let b = CircleFunction::from_laurent(nf, -1, &[C64::new(0.3, 0.0), C64::new(1.0, 0.0)]).unwrap();
        let f = a.mul(&b).unwrap().shift(2).unwrap();
        let fac = factorize(&MatrixLoop::new(1, vec![f]).unwrap(), 8).unwrap();
        assert_eq!(fac.lambda, vec![2]);
        assert!(fac.residual < 1e-10);
        assert!(fac.b_plus.entry(0, 0).is_holomorphic());
    }
}
