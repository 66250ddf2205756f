//! Bordered Newton iteration for attached lifts and continuation over a grid
//! of kernel coordinates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{build_lift, DiscLift, RESIDUAL_SAMPLES};
use crate::rhsolver::linearize::{
    jacobian_matrix, linearize, residual_vector, Collocation, LinearizeOptions, LinearizedSystem, UnknownLayout,
};
use crate::rhsolver::perturbed::PerturbedHypersurface;

#[derive(Clone, Debug)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Weighted collocation residual, relative to `max(1, |x|_inf)`.
    pub tol: f64,
    /// Newton step size, relative to `max(1, |x|_inf)`, at which the iteration
    /// is considered converged even if the weighted residual sits at its
    /// rounding floor (the weights grow like `|1 - zeta|^{-kappa}`).
    pub step_tol: f64,
    /// Sup of the unweighted boundary residual on `RESIDUAL_SAMPLES` points.
    pub residual_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            tol: 1e-11,
            step_tol: 1e-12,
            residual_tol: 1e-9,
        }
    }
}

/// Smallest `R` diagonal ratio tolerated in the bordered least-squares step.
pub const RANK_COLLAPSE_RATIO: f64 = 1e-13;
/// Growth of the residual over its initial value that counts as divergence.
const DIVERGENCE_FACTOR: f64 = 1e6;

/// Everything fixed along a family: the hypersurface, the model lift `f0` and
/// the kernel directions used to pin solutions.
#[derive(Clone, Debug)]
pub struct FamilyContext {
    pub r: PerturbedHypersurface,
    pub v: Vec<C64>,
    pub f0: DiscLift,
    pub model_system: LinearizedSystem,
    x0: DVector<f64>,
    pub options: NewtonOptions,
}

impl FamilyContext {
    /// Builds `f0` for direction `v` and linearizes the unperturbed model there.
    pub fn new(r: PerturbedHypersurface, v: &[C64], nf: usize) -> Result<Self> {
        let p = r.model().polynomial();
        let f0 = build_lift(p, v, nf)?;
        let model = PerturbedHypersurface::unperturbed(r.model().clone());
        let model_system = linearize(
            &model,
            &f0,
            &LinearizeOptions {
                nf,
                ..LinearizeOptions::default()
            },
        )?;
        let x0 = model_system.layout.pack(&f0)?;
        Ok(Self {
            r,
            v: v.to_vec(),
            f0,
            model_system,
            x0,
            options: NewtonOptions::default(),
        })
    }

    pub fn kernel_dim(&self) -> usize {
        self.model_system.kernel_dim
    }

    pub fn layout(&self) -> &UnknownLayout {
        &self.model_system.layout
    }

    pub fn nf(&self) -> usize {
        self.layout().nf()
    }

    fn grid(&self) -> &Collocation {
        &self.model_system.collocation
    }

    fn kernel(&self) -> &DMatrix<f64> {
        &self.model_system.kernel_basis
    }

    /// Kernel coordinates `K^T (x(lift) - x0)` of a lift.
    pub fn coordinates(&self, lift: &DiscLift) -> Result<DVector<f64>> {
        let x = self.layout().pack(lift)?;
        Ok(self.kernel().tr_mul(&(x - &self.x0)))
    }

    /// Same context for a different hypersurface (e.g. a rescaled one).
    pub fn with_hypersurface(&self, r: PerturbedHypersurface) -> Self {
        Self { r, ..self.clone() }
    }
}

/// Converged solve with its convergence history.
#[derive(Clone, Debug, Serialize)]
pub struct NewtonReport {
    pub lift: DiscLift,
    pub iterations: usize,
    pub weighted_residual: f64,
    /// Sup of the unweighted boundary residuals on `RESIDUAL_SAMPLES` points.
    pub residual: f64,
    pub history: Vec<f64>,
}

/// Solves `r~(f) = 0` with the kernel coordinates of `f` pinned to `coords`,
/// starting from `start`.
pub fn newton_attach(ctx: &FamilyContext, start: &DiscLift, coords: &[f64]) -> Result<NewtonReport> {
    let kdim = ctx.kernel_dim();
    if coords.len() != kdim {
        return Err(Error::Dimension(format!(
            "{} kernel coordinates for a {kdim}-dimensional kernel",
            coords.len()
        )));
    }
    let layout = ctx.layout();
    let grid = ctx.grid();
    let defining = ctx.r.defining();
    let target = DVector::from_column_slice(coords);
    let mut x = layout.pack(&start.with_nf(ctx.nf().max(start.nf()))?)?;
    let mut history = Vec::new();
    let opts = &ctx.options;
    let mut last_step = f64::INFINITY;
    for it in 0..=opts.max_iterations {
        let lift = layout.unpack(&x)?;
        let f = residual_vector(defining, &lift, grid);
        let pin = ctx.kernel().tr_mul(&(&x - &ctx.x0)) - &target;
        let norm = f.amax().max(pin.amax());
        history.push(norm);
        if !norm.is_finite() || norm > DIVERGENCE_FACTOR * history[0].max(1e-3) {
            return Err(Error::NoConvergence(format!(
                "residual {norm:.3e} after {it} iterations"
            )));
        }
        let scale = x.amax().max(1.0);
        if norm <= opts.tol * scale || last_step <= opts.step_tol * scale {
            let residual = lift.residual(defining, RESIDUAL_SAMPLES);
            if residual > opts.residual_tol {
                return Err(Error::NoConvergence(format!(
                    "collocation converged but the sampled residual is {residual:.3e}; raise N_F"
                )));
            }
            return Ok(NewtonReport {
                lift,
                iterations: it,
                weighted_residual: norm,
                residual,
                history,
            });
        }
        if it == opts.max_iterations {
            break;
        }
        let j = jacobian_matrix(defining, &lift, layout, grid);
        let rows = j.nrows();
        let mut bordered = DMatrix::zeros(rows + kdim, layout.len());
        bordered.rows_mut(0, rows).copy_from(&j);
        bordered.rows_mut(rows, kdim).copy_from(&ctx.kernel().transpose());
        let mut rhs = DVector::zeros(rows + kdim);
        rhs.rows_mut(0, rows).copy_from(&(-f));
        rhs.rows_mut(rows, kdim).copy_from(&(-pin));
        let (delta, ratio) = linalg::least_squares(bordered, &rhs);
        if ratio < RANK_COLLAPSE_RATIO {
            return Err(Error::RankCollapse(format!(
                "R diagonal ratio {ratio:.3e} at iteration {it}"
            )));
        }
        last_step = delta.amax();
        x += delta;
    }
    Err(Error::NoConvergence(format!(
        "no convergence in {} iterations (last residual {:.3e})",
        opts.max_iterations,
        history.last().copied().unwrap_or(f64::NAN)
    )))
}

/// Outcome at one grid point.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyMember {
    pub index: usize,
    pub coords: Vec<f64>,
    pub converged: bool,
    pub error: Option<String>,
    pub iterations: usize,
    /// Number of continuation steps (1 when the direct solve succeeded).
    pub steps: usize,
    pub residual: f64,
    /// `(h(0), g(0))`.
    pub center: Vec<C64>,
    #[serde(skip)]
    pub lift: Option<DiscLift>,
}

/// Family solved over a grid, in grid order.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub kernel_dim: usize,
    pub members: Vec<FamilyMember>,
    /// Smallest coefficient distance between converged discs with distinct
    /// coordinates (infinite when fewer than two).
    pub min_pair_distance: f64,
    /// All pairs with distinct coordinates are further apart than `1e-6`.
    pub injective: bool,
}

/// Minimum continuation step, as a fraction of the segment from `0`.
const MIN_STEP: f64 = 1.0 / 64.0;

fn solve_point(ctx: &FamilyContext, coords: &[f64]) -> Result<(NewtonReport, usize)> {
    match newton_attach(ctx, &ctx.f0, coords) {
        Ok(rep) => Ok((rep, 1)),
        Err(first) => {
            let mut tau: f64 = 0.0;
            let mut step: f64 = 0.25;
            let mut current = ctx.f0.clone();
            let mut last = None;
            let mut steps = 1;
            while tau < 1.0 {
                let next = (tau + step).min(1.0);
                let c: Vec<f64> = coords.iter().map(|x| x * next).collect();
                steps += 1;
                match newton_attach(ctx, &current, &c) {
                    Ok(rep) => {
                        tau = next;
                        current = rep.lift.clone();
                        step = (step * 1.5).min(0.5);
                        last = Some(rep);
                    }
                    Err(e) => {
                        step /= 2.0;
                        if step < MIN_STEP {
                            return Err(e);
                        }
                    }
                }
            }
            last.map(|r| (r, steps)).ok_or(first)
        }
    }
}

/// Solves every grid point from `f0`, falling back to continuation along the
/// ray from the origin; points are independent and solved in parallel.
pub fn disc_family(ctx: &FamilyContext, grid: &[Vec<f64>]) -> FamilyReport {
    let members: Vec<FamilyMember> = grid
        .par_iter()
        .enumerate()
        .map(|(index, coords)| match solve_point(ctx, coords) {
            Ok((rep, steps)) => FamilyMember {
                index,
                coords: coords.clone(),
                converged: true,
                error: None,
                iterations: rep.iterations,
                steps,
                residual: rep.residual,
                center: rep.lift.components()[..=rep.lift.n()]
                    .iter()
                    .map(|c| c.coeff(0))
                    .collect(),
                lift: Some(rep.lift),
            },
            Err(e) => FamilyMember {
                index,
                coords: coords.clone(),
                converged: false,
                error: Some(e.to_string()),
                iterations: 0,
                steps: 0,
                residual: f64::NAN,
                center: Vec::new(),
                lift: None,
            },
        })
        .collect();
    let mut min_pair_distance = f64::INFINITY;
    for (i, a) in members.iter().enumerate() {
        for b in &members[i + 1..] {
            if let (Some(la), Some(lb)) = (&a.lift, &b.lift) {
                if a.coords != b.coords {
                    min_pair_distance = min_pair_distance.min(la.distance(lb));
                }
            }
        }
    }
    FamilyReport {
        kernel_dim: ctx.kernel_dim(),
        members,
        min_pair_distance,
        injective: min_pair_distance > 1e-6,
    }
}

/// Grid with the origin and `+-delta` along each kernel axis.
pub fn axes_grid(kernel_dim: usize, delta: f64) -> Vec<Vec<f64>> {
    let mut grid = vec![vec![0.0; kernel_dim]];
    for j in 0..kernel_dim {
        for s in [delta, -delta] {
            let mut c = vec![0.0; kernel_dim];
            c[j] = s;
            grid.push(c);
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelHypersurface;
    use crate::poly::HermitianPolynomial;

    fn quartic() -> ModelHypersurface {
        ModelHypersurface::new(
            HermitianPolynomial::from_json(
                r#"{"n":1,"weights":[1],"degree":4,"terms":[{"J":[2],"K":[2],"re":1.0}]}"#,
            )
            .unwrap(),
        )
    }

    #[test]
    fn model_lift_is_a_fixed_point() {
        let r = PerturbedHypersurface::unperturbed(quartic());
        let ctx = FamilyContext::new(r, &[C64::new(1.0, 0.0)], 24).unwrap();
        let rep = newton_attach(&ctx, &ctx.f0, &vec![0.0; ctx.kernel_dim()]).unwrap();
        assert!(rep.iterations <= 1);
        assert!(rep.lift.distance(&ctx.f0) < 1e-10, "{} {:?}", rep.lift.distance(&ctx.f0), rep.history);
    }

    #[test]
    fn small_perturbation_converges() {
        let spec = r#"{"terms":[{"J":[3],"K":[2],"re":1e-3},{"J":[2],"K":[3],"re":1e-3}]}"#;
        let r = PerturbedHypersurface::from_json(quartic(), spec).unwrap();
        let ctx = FamilyContext::new(r, &[C64::new(1.0, 0.0)], 32).unwrap();
        let rep = newton_attach(&ctx, &ctx.f0, &vec![0.0; ctx.kernel_dim()]).unwrap();
        assert!(rep.residual < 1e-9);
        assert!(rep.lift.distance(&ctx.f0) > 1e-6);
    }
}
