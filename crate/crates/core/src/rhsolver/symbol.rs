//! The matrices of the linearized boundary problem at the model disc:
//! `G` (holomorphic-derivative matrix, conjugated), the row/column reduced
//! `G2`, and the `2n x 2n` block `A` that governs surjectivity.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::birkhoff::MatrixLoop;
use crate::circle::CircleFunction;
use crate::error::{Error, Result};
use crate::hypersurface::DefiningFunction;
use crate::linalg::{self, RankInfo};
use crate::model::{levi_coefficients, DiscLift};
use crate::poly::{HermitianPolynomial, Var};

const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Samples used for the determinant identity check.
pub const DET_CHECK_SAMPLES: usize = 512;

fn g_nf(p: &HermitianPolynomial) -> usize {
    (p.degree() + p.k0()) as usize + 2
}

/// `G` at the model lift of `h^v`, assembled exactly from Laurent
/// substitutions of the first and second derivatives of `P`.
pub fn build_g(p: &HermitianPolynomial, v: &[C64]) -> Result<MatrixLoop> {
    levi_coefficients(p, v)?;
    let n = p.n();
    let dim = 2 * n + 2;
    let nf = g_nf(p);
    let m = p.weights().as_slice();
    let k0 = p.k0() as i64;
    let zero = CircleFunction::zero(nf);
    let mut rows = vec![vec![zero.clone(); dim]; dim];
    for j in 0..n {
        rows[0][j] = p.partial_derivative(Var::ZBar(j)).on_disc(v, m, 0, nf)?;
    }
    rows[0][n] = CircleFunction::constant(nf, C64::new(-0.5, 0.0));
    for l in 0..n {
        let pz = p.partial_derivative(Var::Z(l));
        let pzb = p.partial_derivative(Var::ZBar(l)).on_disc(v, m, 0, nf)?;
        for j in 0..n {
            let x = pz.derivative(Var::ZBar(j)).on_disc(v, m, k0, nf)?;
            let y = pz.derivative(Var::Z(j)).on_disc(v, m, k0, nf)?.conj_reflect();
            rows[1 + 2 * l][j] = -&(&x + &y);
            rows[2 + 2 * l][j] = (&x - &y).scale(-I);
        }
        rows[1 + 2 * l][n + 1 + l] = CircleFunction::constant(nf, ONE);
        rows[2 + 2 * l][n + 1 + l] = CircleFunction::constant(nf, -I);
        rows[1 + 2 * l][dim - 1] = pzb.scale(C64::new(2.0, 0.0));
        rows[2 + 2 * l][dim - 1] = pzb.scale(C64::new(0.0, -2.0));
    }
    rows[dim - 1][dim - 1] = CircleFunction::monomial(nf, k0, -I)?;
    MatrixLoop::from_rows(rows)
}

/// `conj(D)` of the boundary system along an arbitrary lift, interpolated
/// from samples at truncation `nf`.
pub fn g_from_jacobian(defining: &DefiningFunction, lift: &DiscLift, nf: usize) -> Result<MatrixLoop> {
    let m = 4 * nf + 4;
    let samples: Vec<DMatrix<C64>> = lift
        .sample(m)
        .into_iter()
        .enumerate()
        .map(|(j, x)| {
            let zeta = C64::from_polar(1.0, TAU * j as f64 / m as f64);
            let pt = crate::hypersurface::LiftPoint::from_components(lift.n(), &x);
            defining.jacobian(zeta, &pt).map(|c| c.conj())
        })
        .collect();
    MatrixLoop::from_samples(nf, &samples, 0.0)
}

/// Shift `s_l` applied to the conormal row pair `l`.
pub fn row_shift(p: &HermitianPolynomial, l: usize) -> Result<i64> {
    let d = p.degree() as i64;
    let ml = p.weights().as_slice()[l] as i64;
    let twice = if p.weights().is_unit() { d - 2 } else { d - ml };
    if twice % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "row shift ({twice})/2 is not an integer for d = {d}"
        )));
    }
    Ok(twice / 2)
}

/// Row divisors `(1 - zeta)^{kappa_r}` and shifts `zeta^{s_r}` that turn the
/// boundary operator into one with regular symbol.
pub fn row_reduction(p: &HermitianPolynomial) -> Result<Vec<(u32, i64)>> {
    let n = p.n();
    let d = p.degree();
    let m = p.weights().as_slice();
    let mut out = vec![(1, 0)];
    for l in 0..n {
        let kappa = if p.weights().is_unit() { d - 1 } else { d - m[l] };
        let s = row_shift(p, l)?;
        out.push((kappa, s));
        out.push((kappa, s));
    }
    out.push((0, 0));
    Ok(out)
}

/// `G2` with `conj(G2_rc) = zeta^{s_r} conj(G_rc) (1-zeta)^{mu_c} / (1-zeta)^{kappa_r}`,
/// every division exact in coefficient space.
pub fn reduced_g2(g: &MatrixLoop, p: &HermitianPolynomial) -> Result<MatrixLoop> {
    let dim = g.dim();
    let orders = crate::model::vanishing_orders(p);
    let rows = row_reduction(p)?;
    let nf = g.nf() + p.degree() as usize + 2;
    let mut out = vec![vec![CircleFunction::zero(nf); dim]; dim];
    for (r, &(kappa, s)) in rows.iter().enumerate() {
        for c in 0..dim {
            let entry = g.entry(r, c).with_nf(nf)?.conj_reflect();
            let t = entry
                .mul_one_minus_zeta_pow(orders[c])?
                .divide_one_minus_zeta(kappa)?
                .shift(s)?;
            out[r][c] = t.conj_reflect();
        }
    }
    MatrixLoop::from_rows(out)
}

/// The `2n x 2n` block acting on `(h~_1', -h_1', ..., h~_n', -h_n')`:
/// rows `(2l, 2l+1)` hold `zeta^{-s_l}`, `-i zeta^{-s_l}` in the `h~_l` column
/// and `Q'_{lj} zeta^{s_l} +- S̄_{lj} zeta^{-s_l}` (times `1`, `i`) in the `h_j`
/// column. `Q` and `S̄` are recovered from `G` by exact division.
pub fn reduce_to_a(g: &MatrixLoop, p: &HermitianPolynomial) -> Result<MatrixLoop> {
    let n = p.n();
    let d = p.degree();
    let m = p.weights().as_slice();
    if g.dim() != 2 * n + 2 {
        return Err(Error::Dimension(format!("G must be {0}x{0}", 2 * n + 2)));
    }
    let nf = g.nf() + d as usize + 2;
    let mut a = vec![vec![CircleFunction::zero(nf); 2 * n]; 2 * n];
    let mut q_prime = vec![vec![CircleFunction::zero(nf); n]; n];
    for l in 0..n {
        let s = row_shift(p, l)?;
        for lp in 0..n {
            let odd = g.entry(1 + 2 * l, n + 1 + lp);
            let even = g.entry(2 + 2 * l, n + 1 + lp);
            let expect = CircleFunction::constant(odd.nf(), if l == lp { ONE } else { C64::new(0.0, 0.0) });
            let off = (odd - &expect).max_abs_coeff().max((even - &expect.scale(-I)).max_abs_coeff());
            if off > 1e-9 {
                return Err(Error::Consistency(format!(
                    "G does not have the identity pattern in row pair {l}"
                )));
            }
        }
        a[2 * l][2 * l] = CircleFunction::monomial(nf, -s, ONE)?;
        a[2 * l + 1][2 * l] = CircleFunction::monomial(nf, -s, -I)?;
        for j in 0..n {
            let order = d - m[l] - m[j];
            let odd = g.entry(1 + 2 * l, j).with_nf(nf)?;
            let even = g.entry(2 + 2 * l, j).with_nf(nf)?;
            // odd - i even = -2 (1-zeta)^order Q;  odd + i even = -2 conj((1-zeta)^order S).
            let x = (&odd - &even.scale(I)).scale(C64::new(-0.5, 0.0));
            let y = (&odd + &even.scale(I)).scale(C64::new(-0.5, 0.0));
            let q = x.divide_one_minus_zeta(order)?;
            let s_bar = y.divide_one_minus_zeta(order)?.shift(order as i64)?;
            let qp = q.shift(-(m[j] as i64))?;
            let qs = qp.shift(s)?;
            let ss = s_bar.shift(-s)?;
            a[2 * l][2 * j + 1] = &qs + &ss;
            a[2 * l + 1][2 * j + 1] = (&qs - &ss).scale(I);
            q_prime[l][j] = qp;
        }
    }
    let a = MatrixLoop::from_rows(a)?;
    let det_qp = crate::model::laurent_det(&q_prime)?;
    let err = det_identity_error(&a, &det_qp, n);
    if !(err < 1e-8) {
        return Err(Error::Consistency(format!(
            "det A differs from (2i)^n Q' by {err:.3e} (relative)"
        )));
    }
    Ok(a)
}

/// Relative sup error of `det A - (2i)^n Q'` on `DET_CHECK_SAMPLES` points.
pub fn det_identity_error(a: &MatrixLoop, det_q_prime: &CircleFunction, n: usize) -> f64 {
    let factor = (C64::new(0.0, 2.0)).powi(n as i32);
    let dets = a.det_samples(DET_CHECK_SAMPLES);
    let q = det_q_prime.sample(DET_CHECK_SAMPLES);
    let scale = q.iter().map(|x| (x * factor).norm()).fold(0.0, f64::max);
    let err = dets
        .iter()
        .zip(&q)
        .map(|(d, x)| (d - x * factor).norm())
        .fold(0.0, f64::max);
    err / scale.max(f64::MIN_POSITIVE)
}

/// Real kernel data of `u -> 2 Re[conj(A) u]` on holomorphic polynomials.
#[derive(Clone, Debug, Serialize)]
pub struct BlockKernel {
    pub dim: usize,
    pub degree: usize,
    pub rank: RankInfo,
}

/// Kernel dimension of `u -> 2 Re[conj(A) u]` for `u` polynomial of degree
/// at most `degree`, by collocation.
pub fn l3_kernel(a: &MatrixLoop, degree: usize) -> Result<BlockKernel> {
    let n2 = a.dim();
    let span = a
        .entries()
        .iter()
        .filter_map(|e| e.support())
        .map(|(lo, hi)| lo.unsigned_abs().max(hi.unsigned_abs()) as usize)
        .max()
        .unwrap_or(0);
    let m = 2 * (degree + span) + 8;
    let samples = a.sample_shifted(m, 0.5);
    let cols = 2 * n2 * (degree + 1);
    let mut mat = DMatrix::<f64>::zeros(n2 * m, cols);
    for (t, at) in samples.iter().enumerate() {
        let zeta = C64::from_polar(1.0, TAU * (t as f64 + 0.5) / m as f64);
        let conj_a = at.map(|x| x.conj());
        for c in 0..n2 {
            let mut zk = ONE;
            for k in 0..=degree {
                for (part, unit) in [(0, ONE), (1, I)] {
                    let col = (c * (degree + 1) + k) * 2 + part;
                    for r in 0..n2 {
                        mat[(r * m + t, col)] = 2.0 * (conj_a[(r, c)] * zk * unit).re;
                    }
                }
                zk *= zeta;
            }
        }
    }
    let kernel = linalg::kernel(mat, 1e-8);
    Ok(BlockKernel {
        dim: kernel.basis.ncols(),
        degree,
        rank: kernel.info,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_lift;

    fn quartic() -> HermitianPolynomial {
        HermitianPolynomial::from_json(
            r#"{"n":1,"weights":[1],"degree":4,"terms":[{"J":[2],"K":[2],"re":1.0}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn exact_g_matches_jacobian() {
        let p = quartic();
        let v = [C64::new(0.8, -0.6)];
        let g = build_g(&p, &v).unwrap();
        let lift = build_lift(&p, &v, 32).unwrap();
        let gj = g_from_jacobian(&DefiningFunction::model(&p), &lift, 32).unwrap();
        let g32 = MatrixLoop::from_rows(
            (0..4)
                .map(|i| (0..4).map(|j| g.entry(i, j).with_nf(32).unwrap()).collect())
                .collect(),
        )
        .unwrap();
        assert!(g32.distance(&gj) < 1e-12, "{}", g32.distance(&gj));
        assert!((g.entry(0, 1).coeff(0) + 0.5).norm() < 1e-15);
        assert!((g.entry(3, 3).coeff(2) + I).norm() < 1e-15);
    }

    #[test]
    fn quartic_a_has_constant_determinant() {
        let p = quartic();
        let g = build_g(&p, &[ONE]).unwrap();
        let a = reduce_to_a(&g, &p).unwrap();
        let det = a.eval(C64::from_polar(1.0, 0.37)).determinant();
        assert!((det - C64::new(0.0, -8.0)).norm() < 1e-12, "{det}");
    }

    #[test]
    fn quartic_l3_kernel_is_two_dimensional() {
        let p = quartic();
        let g = build_g(&p, &[ONE]).unwrap();
        let a = reduce_to_a(&g, &p).unwrap();
        let k = l3_kernel(&a, 24).unwrap();
        assert_eq!(k.dim, 2);
    }
}
