//! Jets of lifts at the boundary point `zeta = 1`, jet-order bounds and the
//! injectivity test of the jet map on a family's tangent space.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::birkhoff::{self, DEFAULT_INDEX_DEGREE};
use crate::circle::CircleFunction;
use crate::error::{Error, Result};
use crate::linalg::{self, RankInfo};
use crate::model::{self, DiscLift, ADMISSIBILITY_TOL};
use crate::poly::HermitianPolynomial;
use crate::rhsolver::symbol;

/// Required ratio between the smallest kept and largest discarded singular value.
pub const MIN_JET_GAP: f64 = 1e6;
/// Relative threshold separating kept from discarded singular values.
pub const JET_RANK_TOL: f64 = 1e-8;
/// Sphere samples used to test positivity of the Levi form.
const LEVI_SAMPLES: u64 = 2048;
/// `min eig / max eig` below which the Levi form is treated as degenerate.
const LEVI_DEFINITE_RATIO: f64 = 1e-3;

/// Derivatives `d^l f(1)`, `l = 0..=order`, of each component of a lift.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JetVector {
    pub order: usize,
    /// `entries[c][l]` is the `l`-th derivative of component `c` at 1.
    pub entries: Vec<Vec<C64>>,
}

impl JetVector {
    /// Real coordinates, component-major with real and imaginary parts interleaved.
    pub fn to_real(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flatten()
            .flat_map(|z| [z.re, z.im])
            .collect()
    }

    /// Largest entrywise difference.
    pub fn distance(&self, other: &JetVector) -> f64 {
        self.entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `d^l f(1) = sum_k k (k-1) ... (k-l+1) c_k` for `l = 0..=order`.
pub fn jet_of(f: &CircleFunction, order: usize) -> Result<Vec<C64>> {
    if 2 * order > f.nf() {
        return Err(Error::Truncation(format!(
            "jet order {order} exceeds N_F / 2 = {}",
            f.nf() / 2
        )));
    }
    if !f.is_holomorphic() {
        return Err(Error::InvalidArgument(format!(
            "jets need a holomorphic function (negative-mode mass {:.3e})",
            f.antiholomorphic_mass()
        )));
    }
    let nf = f.nf() as i64;
    Ok((0..=order as i64)
        .map(|l| {
            (l..=nf)
                .map(|k| {
                    let falling: f64 = (0..l).map(|i| (k - i) as f64).product();
                    f.coeff(k) * falling
                })
                .sum()
        })
        .collect())
}

/// Jet of order `order` of every component of `lift` at `zeta = 1`.
pub fn jet_at_one(lift: &DiscLift, order: usize) -> Result<JetVector> {
    let entries = lift
        .components()
        .iter()
        .map(|c| jet_of(c, order))
        .collect::<Result<Vec<_>>>()?;
    Ok(JetVector { order, entries })
}

/// Rank of the jet map restricted to a set of tangent directions.
#[derive(Clone, Debug, Serialize)]
pub struct JetInjectivity {
    pub order: usize,
    pub kernel_dim: usize,
    pub rank: usize,
    pub injective: bool,
    /// Singular values of the stacked jet matrix, descending.
    pub singular_values: Vec<f64>,
    pub gap: f64,
}

/// Stacks the order-`order` jets of `basis` as real columns and certifies
/// their rank by a singular-value gap of at least [`MIN_JET_GAP`].
pub fn kernel_jet_injectivity(basis: &[DiscLift], order: usize) -> Result<JetInjectivity> {
    if basis.is_empty() {
        return Ok(JetInjectivity {
            order,
            kernel_dim: 0,
            rank: 0,
            injective: true,
            singular_values: Vec::new(),
            gap: f64::INFINITY,
        });
    }
    let columns = basis
        .iter()
        .map(|f| jet_at_one(f, order).map(|j| j.to_real()))
        .collect::<Result<Vec<_>>>()?;
    let rows = columns[0].len();
    if columns.iter().any(|c| c.len() != rows) {
        return Err(Error::Dimension("kernel elements have different shapes".into()));
    }
    let mat = DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i]);
    let info = RankInfo::from_singular_values(linalg::singular_values(mat), JET_RANK_TOL);
    if info.gap < MIN_JET_GAP {
        return Err(Error::RankAmbiguous(format!(
            "jet matrix gap {:.3e} at rank {}; increase the jet order or N_F",
            info.gap, info.rank
        )));
    }
    Ok(JetInjectivity {
        order,
        kernel_dim: basis.len(),
        rank: info.rank,
        injective: info.rank == basis.len(),
        singular_values: info.singular_values,
        gap: info.gap,
    })
}

/// Jet rank as a function of the order, up to the first order where it saturates.
#[derive(Clone, Debug, Serialize)]
pub struct SaturationScan {
    pub kernel_dim: usize,
    pub ranks: Vec<(usize, usize)>,
    /// First order at which the jet map is injective.
    pub saturation_order: Option<usize>,
    pub monotone: bool,
}

/// Computes the jet rank for `order = 0, 1, ...` until injective or `max_order`.
pub fn saturation_scan(basis: &[DiscLift], max_order: usize) -> Result<SaturationScan> {
    let mut ranks = Vec::new();
    let mut saturation_order = None;
    for order in 0..=max_order {
        let step = kernel_jet_injectivity(basis, order)?;
        ranks.push((order, step.rank));
        if step.injective {
            saturation_order = Some(order);
            break;
        }
    }
    let monotone = ranks.windows(2).all(|w| w[0].1 <= w[1].1);
    Ok(SaturationScan {
        kernel_dim: basis.len(),
        ranks,
        saturation_order,
        monotone,
    })
}

/// Checks that no two lifts share a jet without coinciding.
#[derive(Clone, Debug, Serialize)]
pub struct JetSeparation {
    pub order: usize,
    pub pairs: usize,
    pub min_jet_distance: f64,
    /// Pairs `(i, j)` with jet distance below `jet_tol` but coefficient distance
    /// at least `coeff_tol`.
    pub violations: Vec<(usize, usize)>,
}

pub fn jet_separation(lifts: &[DiscLift], order: usize, jet_tol: f64, coeff_tol: f64) -> Result<JetSeparation> {
    let jets = lifts
        .iter()
        .map(|f| jet_at_one(f, order))
        .collect::<Result<Vec<_>>>()?;
    let mut min_jet_distance = f64::INFINITY;
    let mut violations = Vec::new();
    let mut pairs = 0;
    for i in 0..lifts.len() {
        for j in i + 1..lifts.len() {
            pairs += 1;
            let dj = jets[i].distance(&jets[j]);
            min_jet_distance = min_jet_distance.min(dj);
            if dj < jet_tol && lifts[i].distance(&lifts[j]) >= coeff_tol {
                violations.push((i, j));
            }
        }
    }
    Ok(JetSeparation {
        order,
        pairs,
        min_jet_distance,
        violations,
    })
}

/// Quantities specific to homogeneous models with a definite Levi form.
#[derive(Clone, Debug, Serialize)]
pub struct HomogeneousCase {
    /// Sampled on the sphere; degenerate directions of measure zero can be missed.
    pub levi_positive_definite: bool,
    pub levi_min_ratio: f64,
    /// `n (k0 - d/2 + 1)`.
    pub ind_q_formula: i64,
    /// `2 (n+1)(k0+1) - d n`.
    pub exact_dim: i64,
}

/// Jet-order and family-dimension bounds for a model.
#[derive(Clone, Debug, Serialize)]
pub struct JetBoundReport {
    pub n: usize,
    pub degree: u32,
    pub k0: u32,
    pub sum_weights: u32,
    /// `6 n d`.
    pub generic: i64,
    pub admissible: bool,
    pub v: Option<Vec<C64>>,
    /// Winding number of `det Q^v`.
    pub ind_q: Option<i64>,
    /// `-2 sum m + 2 ind Q`.
    pub maslov: Option<i64>,
    /// `maslov + 2 k0`.
    pub refined: Option<i64>,
    /// Winding number of `det` of the symbol `-conj(A)^{-1} A`.
    pub maslov_symbol: Option<i64>,
    /// Maslov index of the symbol built from the reduced system.
    pub maslov_reduced: Option<i64>,
    pub partial_indices: Option<Vec<i64>>,
    pub max_partial_index: Option<i64>,
    /// `2(n+1)(k0+1) + 2 n k0 - 2 d n`.
    pub dim_bound: i64,
    /// `2 n (2 k0 - d) + 2 n`.
    pub l3_bound: i64,
    /// Sum over variable blocks of `2(|I|+1)(k0+1) - d |I|`, for split models.
    pub decoupled_bound: Option<i64>,
    pub homogeneous: Option<HomogeneousCase>,
    /// Disagreements between independently computed quantities.
    pub flags: Vec<String>,
}

fn levi_min_ratio(p: &HermitianPolynomial) -> f64 {
    (0..LEVI_SAMPLES)
        .map(|t| {
            let z = model::sphere_sample(p.n(), 0x1e71, t);
            let eig = model::levi_matrix(p, &z).symmetric_eigenvalues();
            let max = eig.iter().map(|x| x.abs()).fold(0.0, f64::max);
            let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
            if max > 0.0 { min / max } else { 0.0 }
        })
        .fold(f64::INFINITY, f64::min)
}

fn decoupled_bound(p: &HermitianPolynomial) -> Result<Option<i64>> {
    let blocks = p.variable_blocks();
    if blocks.len() < 2 {
        return Ok(None);
    }
    let mut total = 0;
    for b in &blocks {
        let q = p.restrict(b)?;
        let size = b.len() as i64;
        total += 2 * (size + 1) * (q.k0() as i64 + 1) - q.degree() as i64 * size;
    }
    Ok(Some(total))
}

/// Bounds for `p`; everything beyond the generic bound needs an admissible `v`.
pub fn jet_bound(p: &HermitianPolynomial, v: Option<&[C64]>) -> Result<JetBoundReport> {
    let n = p.n() as i64;
    let d = p.degree() as i64;
    let k0 = p.k0() as i64;
    let sum_m = p.weights().total();
    let homogeneous = if p.weights().is_unit() {
        let ratio = levi_min_ratio(p);
        Some(HomogeneousCase {
            levi_positive_definite: ratio > LEVI_DEFINITE_RATIO,
            levi_min_ratio: ratio,
            ind_q_formula: n * (k0 - d / 2 + 1),
            exact_dim: 2 * (n + 1) * (k0 + 1) - d * n,
        })
    } else {
        None
    };
    let mut report = JetBoundReport {
        n: p.n(),
        degree: p.degree(),
        k0: p.k0(),
        sum_weights: sum_m,
        generic: 6 * n * d,
        admissible: false,
        v: None,
        ind_q: None,
        maslov: None,
        refined: None,
        maslov_symbol: None,
        maslov_reduced: None,
        partial_indices: None,
        max_partial_index: None,
        dim_bound: 2 * (n + 1) * (k0 + 1) + 2 * n * k0 - 2 * d * n,
        l3_bound: 2 * n * (2 * k0 - d) + 2 * n,
        decoupled_bound: decoupled_bound(p)?,
        homogeneous,
        flags: Vec::new(),
    };
    let Some(v) = v else {
        return Ok(report);
    };
    let cert = model::is_admissible(p, v, ADMISSIBILITY_TOL);
    if !cert.admissible {
        report
            .flags
            .push(cert.reason.unwrap_or_else(|| "v is not admissible".into()));
        return Ok(report);
    }
    report.admissible = true;
    report.v = Some(v.to_vec());
    let ind_q = model::levi_coefficients(p, v)?.det_q.winding_number()?;
    let maslov = 2 * ind_q - 2 * sum_m as i64;
    report.ind_q = Some(ind_q);
    report.maslov = Some(maslov);
    report.refined = Some(maslov + 2 * k0);
    if let Some(h) = &report.homogeneous {
        if h.levi_positive_definite && h.ind_q_formula != ind_q {
            report
                .flags
                .push(format!("ind Q = {ind_q} differs from n(k0-d/2+1) = {}", h.ind_q_formula));
        }
    }

    let g = symbol::build_g(p, v)?;
    let a = symbol::reduce_to_a(&g, p)?;
    match birkhoff::symbol(&a, a.nf().max(16)) {
        Ok(sym) => {
            report.maslov_symbol = sym.maslov_index().ok();
            match birkhoff::partial_indices(&sym, DEFAULT_INDEX_DEGREE) {
                Ok(pi) => {
                    report.max_partial_index = pi.indices.last().copied();
                    report.partial_indices = Some(pi.indices);
                }
                Err(e) => report.flags.push(format!("partial indices unavailable: {e}")),
            }
        }
        Err(e) => report.flags.push(format!("symbol of A unavailable: {e}")),
    }
    if let Ok(g2) = symbol::reduced_g2(&g, p) {
        if let Ok(sym2) = birkhoff::symbol(&g2, g2.nf().max(16)) {
            report.maslov_reduced = sym2.maslov_index().ok();
        }
    }

    if let Some(ms) = report.maslov_symbol {
        if ms != maslov {
            report
                .flags
                .push(format!("symbol Maslov index {ms} differs from -2 sum m + 2 ind Q = {maslov}"));
        }
    }
    if let Some(idx) = &report.partial_indices {
        if idx.iter().any(|&k| k < 0) {
            report.flags.push(format!("negative partial index in {idx:?}"));
        }
        let max = *idx.last().expect("n >= 1 indices");
        if max > maslov {
            report
                .flags
                .push(format!("max partial index {max} exceeds the Maslov sum {maslov}"));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: C64 = C64::new(1.0, 0.0);

    fn model(json: &str) -> HermitianPolynomial {
        HermitianPolynomial::from_json(json).unwrap()
    }

    #[test]
    fn jets_of_simple_functions() {
        let f = CircleFunction::from_laurent(8, 0, &[ONE, -2.0 * ONE, ONE]).unwrap();
        let j = jet_of(&f, 2).unwrap();
        assert!(j[1].norm() < 1e-14 && (j[2] - 2.0).norm() < 1e-14);
        let g = CircleFunction::from_laurent(8, 0, &[6.0 * ONE, -8.0 * ONE, 2.0 * ONE]).unwrap();
        let j = jet_of(&g, 2).unwrap();
        assert!(j[0].norm() < 1e-14 && (j[1] + 4.0).norm() < 1e-14 && (j[2] - 4.0).norm() < 1e-14);
    }

    #[test]
    fn order_above_half_truncation_is_rejected() {
        let f = CircleFunction::constant(8, ONE);
        assert!(matches!(jet_of(&f, 5), Err(Error::Truncation(_))));
    }

    #[test]
    fn quartic_bounds() {
        let p = model(r#"{"n":1,"weights":[1],"degree":4,"terms":[{"J":[2],"K":[2],"re":1.0}]}"#);
        let r = jet_bound(&p, Some(&[ONE])).unwrap();
        assert_eq!((r.generic, r.ind_q, r.refined), (24, Some(1), Some(4)));
        assert_eq!(r.homogeneous.as_ref().unwrap().exact_dim, 8);
        assert!(r.flags.is_empty(), "{:?}", r.flags);
    }

    #[test]
    fn decoupled_bounds() {
        let p = model(
            r#"{"n":2,"weights":[1,1],"degree":4,"terms":[{"J":[2,0],"K":[2,0],"re":1.0},{"J":[0,2],"K":[0,2],"re":1.0}]}"#,
        );
        let v = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let r = jet_bound(&p, Some(&v)).unwrap();
        assert_eq!((r.generic, r.ind_q, r.refined), (48, Some(2), Some(4)));
        assert_eq!(r.decoupled_bound, Some(16));
        assert!(!r.homogeneous.unwrap().levi_positive_definite);
    }

    #[test]
    fn empty_basis_is_injective() {
        let r = kernel_jet_injectivity(&[], 3).unwrap();
        assert!(r.injective && r.rank == 0);
    }

    #[test]
    fn quartic_kernel_jets_saturate() {
        use crate::rhsolver::{linearize, LinearizeOptions, PerturbedHypersurface};
        let p = model(r#"{"n":1,"weights":[1],"degree":4,"terms":[{"J":[2],"K":[2],"re":1.0}]}"#);
        let lift = model::build_lift(&p, &[ONE], 32).unwrap();
        let r = PerturbedHypersurface::unperturbed(model::ModelHypersurface::new(p));
        let opts = LinearizeOptions { nf: 32, ..Default::default() };
        let sys = linearize(&r, &lift, &opts).unwrap();
        let basis: Vec<_> = (0..sys.kernel_dim).map(|j| sys.kernel_lift(j).unwrap()).collect();
        let scan = saturation_scan(&basis, 8).unwrap();
        assert!(!kernel_jet_injectivity(&basis, 0).unwrap().injective);
        assert!(scan.monotone);
        assert!(scan.saturation_order.unwrap() <= 4);
    }
}
