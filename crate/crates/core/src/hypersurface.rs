//! Defining functions `r = -Re w + P(z) + theta(z, Im w)` and the boundary
//! system satisfied by lifts of stationary discs.
//!
//! Along a lift `(z, w, z~, w~)` the `2n + 2` real boundary functions are
//!
//! ```text
//! r~_0          = r
//! r~_{2l+1}     = 2 Re C_l,     C_l = z~_l E + 2 w~ r_{z_l},   E = 1 + i theta_s
//! r~_{2l+2}     = -2 Im C_l
//! r~_{2n+1}     = 2 Re (i w~ zeta^{-k0} conj E)
//! ```
//!
//! which is the condition that `zeta^{k0} (z~, w~)` is a real multiple of
//! the conormal `(r_z, r_w)` with `r_w = -E/2`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::poly::{HermitianPolynomial, Poly, Var};

const I: C64 = C64::new(0.0, 1.0);

/// Point of the cotangent lift at one boundary value.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftPoint {
    pub z: Vec<C64>,
    pub w: C64,
    pub zt: Vec<C64>,
    pub wt: C64,
}

impl LiftPoint {
    /// Values in component order `(z, w, z~, w~)`.
    pub fn from_components(n: usize, x: &[C64]) -> Self {
        Self {
            z: x[..n].to_vec(),
            w: x[n],
            zt: x[n + 1..2 * n + 1].to_vec(),
            wt: x[2 * n + 1],
        }
    }
}

/// Defining function with cached derivatives of `P` and `theta`.
#[derive(Clone, Debug)]
pub struct DefiningFunction {
    n: usize,
    k0: u32,
    p_z: Vec<Poly>,
    p_zz: Vec<Vec<Poly>>,
    p_zzb: Vec<Vec<Poly>>,
    p: Poly,
    theta: Poly,
    th_z: Vec<Poly>,
    th_zz: Vec<Vec<Poly>>,
    th_zzb: Vec<Vec<Poly>>,
    th_s: Poly,
    th_sz: Vec<Poly>,
    th_szb: Vec<Poly>,
    th_ss: Poly,
    perturbed: bool,
}

impl DefiningFunction {
    pub fn model(p: &HermitianPolynomial) -> Self {
        Self::new(p, Poly::new(p.n()))
    }

    /// `theta` must be real-valued; callers validate it.
    pub fn new(p: &HermitianPolynomial, theta: Poly) -> Self {
        let n = p.n();
        let poly = p.poly().clone();
        let p_z: Vec<Poly> = (0..n).map(|l| poly.derivative(Var::Z(l))).collect();
        let p_zz = (0..n)
            .map(|l| (0..n).map(|j| p_z[l].derivative(Var::Z(j))).collect())
            .collect();
        let p_zzb = (0..n)
            .map(|l| (0..n).map(|j| p_z[l].derivative(Var::ZBar(j))).collect())
            .collect();
        let th_z: Vec<Poly> = (0..n).map(|l| theta.derivative(Var::Z(l))).collect();
        let th_zz = (0..n)
            .map(|l| (0..n).map(|j| th_z[l].derivative(Var::Z(j))).collect())
            .collect();
        let th_zzb = (0..n)
            .map(|l| (0..n).map(|j| th_z[l].derivative(Var::ZBar(j))).collect())
            .collect();
        let th_s = theta.derivative(Var::S);
        let th_sz = (0..n).map(|j| th_s.derivative(Var::Z(j))).collect();
        let th_szb = (0..n).map(|j| th_s.derivative(Var::ZBar(j))).collect();
        let th_ss = th_s.derivative(Var::S);
        let perturbed = !theta.is_empty();
        Self {
            n,
            k0: p.k0(),
            p_z,
            p_zz,
            p_zzb,
            p: poly,
            theta,
            th_z,
            th_zz,
            th_zzb,
            th_s,
            th_sz,
            th_szb,
            th_ss,
            perturbed,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k0(&self) -> u32 {
        self.k0
    }

    pub fn theta(&self) -> &Poly {
        &self.theta
    }

    /// Value of `r` at `(z, w)`.
    pub fn value(&self, z: &[C64], w: C64) -> f64 {
        let s = w.im;
        let mut v = -w.re + self.p.eval(z, 0.0).re;
        if self.perturbed {
            v += self.theta.eval(z, s).re;
        }
        v
    }

    /// The `2n + 2` boundary functions at `zeta`.
    pub fn residual(&self, zeta: C64, pt: &LiftPoint) -> Vec<f64> {
        let n = self.n;
        let s = pt.w.im;
        let th_s = if self.perturbed {
            self.th_s.eval(&pt.z, s).re
        } else {
            0.0
        };
        let e = C64::new(1.0, th_s);
        let mut out = Vec::with_capacity(2 * n + 2);
        out.push(self.value(&pt.z, pt.w));
        for l in 0..n {
            let mut rz = self.p_z[l].eval(&pt.z, 0.0);
            if self.perturbed {
                rz += self.th_z[l].eval(&pt.z, s);
            }
            let c = pt.zt[l] * e + 2.0 * pt.wt * rz;
            out.push(2.0 * c.re);
            out.push(-2.0 * c.im);
        }
        let t = I * pt.wt * zeta.powi(-(self.k0 as i32)) * e.conj();
        out.push(2.0 * t.re);
        out
    }

    /// Holomorphic Wirtinger derivatives `D[i][c] = d r~_i / d x_c` where
    /// `x = (z, w, z~, w~)`. The real derivative of `r~_i` in direction `x'`
    /// is `2 Re sum_c D[i][c] x'_c`.
    pub fn jacobian(&self, zeta: C64, pt: &LiftPoint) -> DMatrix<C64> {
        let n = self.n;
        let dim = 2 * n + 2;
        let (zi, wi) = (n, 2 * n + 1);
        let s = pt.w.im;
        let z = &pt.z;
        let mut d = DMatrix::<C64>::zeros(dim, dim);
        let ev = |p: &Poly| if self.perturbed { p.eval(z, s) } else { C64::default() };
        let th_s = ev(&self.th_s).re;
        let th_ss = ev(&self.th_ss).re;
        let th_sz: Vec<C64> = self.th_sz.iter().map(ev).collect();
        let th_szb: Vec<C64> = self.th_szb.iter().map(ev).collect();
        let e = C64::new(1.0, th_s);
        // ds/dw = -i/2, ds/dwbar = i/2.
        let ds_dw = C64::new(0.0, -0.5);
        let ds_dwb = C64::new(0.0, 0.5);

        // Row 0: r.
        for j in 0..n {
            d[(0, j)] = self.p_z[j].eval(z, 0.0) + ev(&self.th_z[j]);
        }
        d[(0, zi)] = C64::new(-0.5, 0.0) + th_s * ds_dw;

        let zeta_k0 = zeta.powi(-(self.k0 as i32));
        for l in 0..n {
            let rz = self.p_z[l].eval(z, 0.0) + ev(&self.th_z[l]);
            let th_zs_l = th_sz[l];
            // Holomorphic and antiholomorphic derivatives of C_l.
            let mut c_x = vec![C64::default(); dim];
            let mut c_xb = vec![C64::default(); dim];
            for j in 0..n {
                let pzz = self.p_zz[l][j].eval(z, 0.0) + ev(&self.th_zz[l][j]);
                let pzzb = self.p_zzb[l][j].eval(z, 0.0) + ev(&self.th_zzb[l][j]);
                c_x[j] = pt.zt[l] * I * th_sz[j] + 2.0 * pt.wt * pzz;
                c_xb[j] = pt.zt[l] * I * th_szb[j] + 2.0 * pt.wt * pzzb;
            }
            let bracket = pt.zt[l] * I * th_ss + 2.0 * pt.wt * th_zs_l;
            c_x[zi] = ds_dw * bracket;
            c_xb[zi] = ds_dwb * bracket;
            c_x[zi + 1 + l] = e;
            c_x[wi] = 2.0 * rz;
            for c in 0..dim {
                d[(1 + 2 * l, c)] = c_x[c] + c_xb[c].conj();
                d[(2 + 2 * l, c)] = I * (c_x[c] - c_xb[c].conj());
            }
        }

        // Last row: T = i w~ zeta^{-k0} conj(E).
        let last = dim - 1;
        let mut t_x = vec![C64::default(); dim];
        let mut t_xb = vec![C64::default(); dim];
        for j in 0..n {
            t_x[j] = pt.wt * zeta_k0 * th_sz[j];
            t_xb[j] = pt.wt * zeta_k0 * th_szb[j];
        }
        t_x[zi] = pt.wt * zeta_k0 * th_ss * ds_dw;
        t_xb[zi] = pt.wt * zeta_k0 * th_ss * ds_dwb;
        t_x[wi] = I * zeta_k0 * e.conj();
        for c in 0..dim {
            d[(last, c)] = t_x[c] + t_xb[c].conj();
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Exponent;

    fn sample_function() -> DefiningFunction {
        let p = HermitianPolynomial::from_json(
            r#"{"n":2,"weights":[1,1],"degree":4,"terms":[
                {"J":[2,0],"K":[2,0],"re":1.0},{"J":[0,2],"K":[0,2],"re":1.0},
                {"J":[1,1],"K":[1,1],"re":0.5}]}"#,
        )
        .unwrap();
        let mut theta = Poly::new(2);
        // Real-valued: 0.3 (z1 zbar2 + zbar1 z2) s + 0.2 |z1|^2 s^2 + 0.1 s^4
        theta.add_term(Exponent::new(vec![1, 0], vec![0, 1], 1), C64::new(0.3, 0.1)).unwrap();
        theta.add_term(Exponent::new(vec![0, 1], vec![1, 0], 1), C64::new(0.3, -0.1)).unwrap();
        theta.add_term(Exponent::new(vec![1, 0], vec![1, 0], 2), C64::new(0.2, 0.0)).unwrap();
        theta.add_term(Exponent::new(vec![0, 0], vec![0, 0], 4), C64::new(0.1, 0.0)).unwrap();
        DefiningFunction::new(&p, theta)
    }

    /// Finite differences of the residual against the Wirtinger Jacobian.
    #[test]
    fn jacobian_matches_finite_differences() {
        let f = sample_function();
        let x: Vec<C64> = vec![
            C64::new(0.3, -0.2),
            C64::new(-0.1, 0.4),
            C64::new(0.2, 0.35),
            C64::new(0.5, 0.1),
            C64::new(-0.3, 0.2),
            C64::new(0.15, -0.25),
        ];
        let zeta = C64::from_polar(1.0, 0.9);
        let d = f.jacobian(zeta, &LiftPoint::from_components(2, &x));
        let h = 1e-6;
        for c in 0..6 {
            for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[c] += dir * h;
                xm[c] -= dir * h;
                let rp = f.residual(zeta, &LiftPoint::from_components(2, &xp));
                let rm = f.residual(zeta, &LiftPoint::from_components(2, &xm));
                for i in 0..6 {
                    let fd = (rp[i] - rm[i]) / (2.0 * h);
                    let an = 2.0 * (d[(i, c)] * dir).re;
                    assert!((fd - an).abs() < 1e-7, "row {i} col {c}: {fd} vs {an}");
                }
            }
        }
    }
}
