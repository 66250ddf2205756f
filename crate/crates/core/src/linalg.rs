//! Rank-revealing helpers on top of nalgebra's QR and SVD.

use nalgebra::{ComplexField, DMatrix, DVector, Dyn, QR};
use serde::Serialize;

/// Singular values with the numerical rank and the gap that separates it.
#[derive(Clone, Debug, Serialize)]
pub struct RankInfo {
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// `sigma_{rank-1} / sigma_rank`; infinite when the matrix has full rank
    /// or is zero.
    pub gap: f64,
}

impl RankInfo {
    pub fn from_singular_values(mut sv: Vec<f64>, rel: f64) -> Self {
        sv.sort_by(|a, b| b.total_cmp(a));
        let max = sv.first().copied().unwrap_or(0.0);
        let rank = sv.iter().filter(|&&s| s > rel * max).count();
        let gap = if rank == 0 || rank == sv.len() {
            f64::INFINITY
        } else {
            sv[rank - 1] / sv[rank].max(f64::MIN_POSITIVE)
        };
        Self {
            singular_values: sv,
            rank,
            gap,
        }
    }

    /// Number of columns not accounted for by the rank.
    pub fn nullity(&self) -> usize {
        self.singular_values.len() - self.rank
    }
}

/// Numerical kernel: rank data plus an orthonormal basis in the columns.
#[derive(Clone, Debug)]
pub struct Kernel<T: ComplexField<RealField = f64>> {
    pub info: RankInfo,
    pub basis: DMatrix<T>,
}

/// Kernel of `a` with rank threshold `rel * sigma_max`.
///
/// Tall matrices are first reduced to their square `R` factor, which has the
/// same singular values and right singular vectors.
pub fn kernel<T: ComplexField<RealField = f64>>(a: DMatrix<T>, rel: f64) -> Kernel<T> {
    let cols = a.ncols();
    let square = if a.nrows() > cols {
        a.qr().r()
    } else if a.nrows() < cols {
        let mut padded = DMatrix::<T>::zeros(cols, cols);
        padded.rows_mut(0, a.nrows()).copy_from(&a);
        padded
    } else {
        a
    };
    // nalgebra accumulates left singular vectors much faster than right
    // ones, so the right singular vectors of `square` are taken as the left
    // singular vectors of its adjoint.
    let svd = square.adjoint().svd(true, false);
    let v = svd.u.expect("left singular vectors requested");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let info = RankInfo::from_singular_values(sv.clone(), rel);
    let kernel_cols: Vec<usize> = order[info.rank..].to_vec();
    let mut basis = DMatrix::<T>::zeros(cols, kernel_cols.len());
    for (c, &r) in kernel_cols.iter().enumerate() {
        basis.set_column(c, &v.column(r));
    }
    Kernel { info, basis }
}

/// Orthonormal basis of the numerical range of a real matrix, used to test
/// whether given right-hand sides are (nearly) attained.
#[derive(Clone, Debug)]
pub struct RangeBasis {
    /// Householder factors of a tall input; `None` when the input was square or wide.
    qr: Option<QR<f64, Dyn, Dyn>>,
    /// Leading left singular vectors of `R` (or of the input).
    u: DMatrix<f64>,
}

impl RangeBasis {
    /// Range of `a` at rank threshold `rel * sigma_max`, together with the
    /// rank data.
    pub fn new(a: DMatrix<f64>, rel: f64) -> (Self, RankInfo) {
        let (range, _, info) = decompose(a, rel, false);
        (range, info)
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    /// `|b - P b| / |b|` with `P` the orthogonal projector onto the range.
    pub fn relative_residual(&self, b: &DVector<f64>) -> f64 {
        let norm = b.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let (head, outside) = match &self.qr {
            Some(qr) => {
                let mut y = b.clone();
                qr.q_tr_mul(&mut y);
                let k = self.u.nrows();
                (y.rows(0, k).into_owned(), y.rows(k, y.len() - k).norm_squared())
            }
            None => (b.clone(), 0.0),
        };
        let coords = self.u.tr_mul(&head);
        let inside = (&head - &self.u * coords).norm_squared();
        (inside + outside).sqrt() / norm
    }
}

/// Kernel and range of a real matrix from a single QR and SVD.
pub fn kernel_and_range(a: DMatrix<f64>, rel: f64) -> (Kernel<f64>, RangeBasis) {
    if a.nrows() < a.ncols() {
        let range = RangeBasis::new(a.clone(), rel).0;
        return (kernel(a, rel), range);
    }
    let (range, kernel, _) = decompose(a, rel, true);
    (kernel.expect("kernel requested"), range)
}

fn decompose(a: DMatrix<f64>, rel: f64, with_kernel: bool) -> (RangeBasis, Option<Kernel<f64>>, RankInfo) {
    let cols = a.ncols();
    let (qr, square) = if a.nrows() > cols {
        let qr = a.qr();
        let r = qr.r();
        (Some(qr), r)
    } else {
        (None, a)
    };
    let svd = square.transpose().svd(true, false);
    let v = svd.u.expect("left singular vectors requested");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let info = RankInfo::from_singular_values(sv.clone(), rel);
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let columns = |idx: &[usize]| {
        if idx.is_empty() {
            DMatrix::zeros(v.nrows(), 0)
        } else {
            DMatrix::from_columns(&idx.iter().map(|&c| v.column(c).into_owned()).collect::<Vec<_>>())
        }
    };
    // span(R V_r) = span(U_r); the thin QR restores orthonormality lost on
    // the small kept singular values.
    let u_r = if info.rank == 0 {
        DMatrix::zeros(square.nrows(), 0)
    } else {
        (&square * columns(&order[..info.rank])).qr().q()
    };
    let kernel = with_kernel.then(|| Kernel {
        info: info.clone(),
        basis: columns(&order[info.rank..]),
    });
    (RangeBasis { qr, u: u_r }, kernel, info)
}

/// Singular values only.
pub fn singular_values<T: ComplexField<RealField = f64>>(a: DMatrix<T>) -> Vec<f64> {
    let square = if a.nrows() > a.ncols() { a.qr().r() } else { a };
    let mut sv: Vec<f64> = square.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Least-squares solution of `a x = b` for `a` of full column rank, with the
/// smallest diagonal entry of `R` relative to the largest.
pub fn least_squares(a: DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let n = a.ncols();
    let qr = a.qr();
    let mut qtb = b.clone();
    qr.q_tr_mul(&mut qtb);
    let r = qr.r();
    let diag: Vec<f64> = (0..n).map(|i| r[(i, i)].abs()).collect();
    let dmax = diag.iter().copied().fold(0.0, f64::max);
    let dmin = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let rhs = qtb.rows(0, n).into_owned();
    let x = r
        .solve_upper_triangular(&rhs)
        .unwrap_or_else(|| DVector::from_element(n, f64::NAN));
    (x, if dmax > 0.0 { dmin / dmax } else { 0.0 })
}

/// Orthonormal basis of the column span of `a` (modified Gram-Schmidt with
/// re-orthogonalization); columns with relative norm below `tol` are dropped.
pub fn orthonormal_columns<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, tol: f64) -> DMatrix<T> {
    let mut cols: Vec<DVector<T>> = Vec::new();
    for j in 0..a.ncols() {
        let mut v = a.column(j).into_owned();
        let norm0 = v.norm();
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let norm = v.norm();
        if norm0 > 0.0 && norm > tol * norm0 {
            cols.push(v.unscale(norm));
        }
    }
    if cols.is_empty() {
        DMatrix::zeros(a.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}
