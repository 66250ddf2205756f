//! One function per subcommand; each returns a JSON report and, for disc
//! families, a CSV trace.

use std::fmt::Write as _;

use anyhow::{bail, Context};
use serde_json::{json, Value};
use sdisc::birkhoff::{self, DEFAULT_INDEX_DEGREE};
use sdisc::jets::{jet_bound, jet_separation, saturation_scan};
use sdisc::model::{self, AdmissibleSearch, ModelHypersurface, ADMISSIBILITY_TOL};
use sdisc::rhsolver::symbol::{build_g, det_identity_error, reduce_to_a, reduced_g2};
use sdisc::rhsolver::transform::center_jacobian;
use sdisc::rhsolver::{disc_family, FamilyContext, FamilyReport, PerturbedHypersurface};
use sdisc::{CircleFunction, HermitianPolynomial, C64};

use crate::config::{read, Command, Settings};
use crate::Numerical;

/// Default residual tolerance for attached discs.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Coefficients below this modulus are dropped from printed Laurent data.
const PRINT_TOL: f64 = 1e-14;
/// Reason reported when `det Q^v` has a zero on the circle for every trial.
const VANISHING_REASON: &str = "Q^v vanishes on bΔ";

pub struct Report {
    pub json: Value,
    pub csv: Option<String>,
    /// Set when the report is complete but records a numerical failure.
    pub failure: Option<String>,
}

impl Report {
    fn json(json: Value) -> Self {
        Self {
            json,
            csv: None,
            failure: None,
        }
    }
}

pub fn run(s: &Settings) -> anyhow::Result<Report> {
    let p = HermitianPolynomial::from_json(&read(&s.model)?)
        .with_context(|| format!("invalid model {}", s.model.display()))?;
    match s.command {
        Command::Analyze => analyze(s, &p),
        Command::FindAdmissible => find_admissible(s, &p),
        Command::Levi => levi(s, &p),
        Command::Indices => indices(s, &p),
        Command::JetBound => bounds(s, &p),
        Command::Attach => attach(s, p, false),
        Command::Family => attach(s, p, true),
    }
}

fn admissibility_tol(s: &Settings) -> f64 {
    s.tol.unwrap_or(ADMISSIBILITY_TOL)
}

fn search(s: &Settings, p: &HermitianPolynomial) -> AdmissibleSearch {
    model::find_admissible(p, s.trials, s.seed, admissibility_tol(s))
}

fn require_admissible(s: &Settings, p: &HermitianPolynomial) -> anyhow::Result<Vec<C64>> {
    let found = search(s, p);
    if !found.found {
        bail!(Numerical(format!(
            "no admissible direction in {} trials ({})",
            s.trials,
            found.certificate.reason.unwrap_or_default()
        )));
    }
    Ok(found.v)
}

fn model_header(p: &HermitianPolynomial) -> Value {
    json!({
        "n": p.n(),
        "degree": p.degree(),
        "weights": p.weights().as_slice(),
        "k0": p.k0(),
    })
}

/// Nonzero Laurent coefficients as `{k: [re, im]}` in increasing `k`.
fn laurent(f: &CircleFunction) -> Value {
    let Some((lo, hi)) = f.support() else {
        return json!([]);
    };
    let terms: Vec<Value> = (lo..=hi)
        .filter_map(|k| {
            let c = f.coeff(k);
            (c.norm() > PRINT_TOL).then(|| json!({"k": k, "c": [c.re, c.im]}))
        })
        .collect();
    Value::Array(terms)
}

fn complex_list(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|z| json!([z.re, z.im])).collect())
}

fn analyze(s: &Settings, p: &HermitianPolynomial) -> anyhow::Result<Report> {
    let found = search(s, p);
    let mut out = model_header(p);
    out["admissible"] = json!(found.found);
    out["trials"] = json!(found.trials_used);
    if !found.found {
        let detail = found.certificate.reason.clone().unwrap_or_default();
        let reason = if detail.starts_with("det Q") {
            VANISHING_REASON.to_string()
        } else {
            detail.clone()
        };
        out["reason"] = json!(reason);
        out["detail"] = json!(detail);
        out["l0_generic"] = json!(6 * p.n() as u32 * p.degree());
        return Ok(Report::json(out));
    }
    let b = jet_bound(p, Some(&found.v))?;
    let exact = b
        .homogeneous
        .as_ref()
        .filter(|h| h.levi_positive_definite)
        .map(|h| h.exact_dim);
    out["v"] = complex_list(&found.v);
    out["margin"] = json!(found.certificate.margin());
    out["indQ"] = json!(b.ind_q);
    out["N"] = json!(exact);
    out["N_bound"] = json!(b.dim_bound);
    out["l3_bound"] = json!(b.l3_bound);
    out["decoupled_bound"] = json!(b.decoupled_bound);
    out["maslov"] = json!(b.maslov);
    out["partial_indices"] = json!(b.partial_indices);
    out["l0_refined"] = json!(b.refined);
    out["l0_generic"] = json!(b.generic);
    out["flags"] = json!(b.flags);
    Ok(Report::json(out))
}

fn find_admissible(s: &Settings, p: &HermitianPolynomial) -> anyhow::Result<Report> {
    let found = search(s, p);
    let mut out = serde_json::to_value(&found)?;
    out["seed"] = json!(s.seed);
    out["margin"] = json!(found.certificate.margin());
    Ok(Report::json(out))
}

fn levi(s: &Settings, p: &HermitianPolynomial) -> anyhow::Result<Report> {
    let found = search(s, p);
    let l = model::levi_coefficients(p, &found.v)?;
    let matrix = |m: &[Vec<CircleFunction>]| Value::Array(m.iter().map(|row| Value::Array(row.iter().map(laurent).collect())).collect());
    let winding = l.det_q.winding_number().ok();
    Ok(Report::json(json!({
        "v": complex_list(&found.v),
        "admissible": found.found,
        "Q": matrix(&l.q),
        "S": matrix(&l.s),
        "Q_prime": matrix(&l.q_prime),
        "det_Q": laurent(&l.det_q),
        "winding_det_Q": winding,
        "min_abs_det_Q": found.certificate.min_abs_det_q,
        "max_abs_det_Q": found.certificate.max_abs_det_q,
    })))
}

fn indices(s: &Settings, p: &HermitianPolynomial) -> anyhow::Result<Report> {
    let v = require_admissible(s, p)?;
    let g = build_g(p, &v)?;
    let a = reduce_to_a(&g, p)?;
    let levi = model::levi_coefficients(p, &v)?;
    let sym = birkhoff::symbol(&a, a.nf().max(16))?;
    let idx = birkhoff::partial_indices(&sym, DEFAULT_INDEX_DEGREE)?;
    let fac = birkhoff::factorize(&sym, DEFAULT_INDEX_DEGREE)?;
    let g2 = reduced_g2(&g, p)?;
    let maslov_g2 = birkhoff::symbol(&g2, g2.nf().max(16))?.maslov_index()?;
    Ok(Report::json(json!({
        "v": complex_list(&v),
        "winding_det_Q": levi.det_q.winding_number()?,
        "winding_det_A": a.maslov_index()?,
        "det_identity_error": det_identity_error(&a, &levi.det_q_prime, p.n()),
        "maslov": idx.maslov,
        "partial_indices": idx.indices,
        "kernel_scan": idx.kernel_dims,
        "factorization": {
            "lambda": fac.lambda,
            "residual": fac.residual,
            "normalized": fac.normalized,
        },
        "maslov_reduced_system": maslov_g2,
    })))
}

fn bounds(s: &Settings, p: &HermitianPolynomial) -> anyhow::Result<Report> {
    let found = search(s, p);
    let v = found.found.then_some(found.v.as_slice());
    Ok(Report::json(serde_json::to_value(jet_bound(p, v)?)?))
}

fn perturbation(s: &Settings, p: HermitianPolynomial) -> anyhow::Result<PerturbedHypersurface> {
    let m = ModelHypersurface::new(p);
    Ok(match &s.theta {
        Some(path) => PerturbedHypersurface::from_json(m, &read(path)?)
            .with_context(|| format!("invalid perturbation {}", path.display()))?,
        None => PerturbedHypersurface::unperturbed(m),
    })
}

fn trace_csv(family: &FamilyReport) -> String {
    let dim = family.kernel_dim;
    let mut csv = String::from("index");
    for j in 0..dim {
        let _ = write!(csv, ",x{j}");
    }
    csv.push_str(",converged,iterations,steps,residual,center_g_re,center_g_im\n");
    for m in &family.members {
        let _ = write!(csv, "{}", m.index);
        for x in &m.coords {
            let _ = write!(csv, ",{x:e}");
        }
        let g0 = m.center.last().copied().unwrap_or_default();
        let _ = writeln!(
            csv,
            ",{},{},{},{:e},{:e},{:e}",
            m.converged, m.iterations, m.steps, m.residual, g0.re, g0.im
        );
    }
    csv
}

fn attach(s: &Settings, p: HermitianPolynomial, with_jets: bool) -> anyhow::Result<Report> {
    let tol = s.tol.unwrap_or(RESIDUAL_TOL);
    let v = require_admissible(s, &p)?;
    let r = perturbation(s, p)?;
    let ctx = FamilyContext::new(r, &v, s.nf)?;
    let grid = s.grid.points(ctx.kernel_dim())?;
    let family = disc_family(&ctx, &grid);
    let members: Vec<Value> = family
        .members
        .iter()
        .map(|m| {
            json!({
                "index": m.index,
                "coords": m.coords,
                "converged": m.converged,
                "error": m.error,
                "iterations": m.iterations,
                "continuation_steps": m.steps,
                "residual": m.converged.then_some(m.residual),
                "within_tol": m.converged && m.residual <= tol,
                "center": complex_list(&m.center),
                "center_jacobian": m.lift.as_ref().map(center_jacobian),
                "lift": m.lift.as_ref().map(|l| Value::Array(l.components().iter().map(laurent).collect())),
            })
        })
        .collect();
    let mut out = json!({
        "v": complex_list(&v),
        "nf": s.nf,
        "kernel_dim": family.kernel_dim,
        "residual_tol": tol,
        "members": members,
        "min_pair_distance": family.min_pair_distance.is_finite().then_some(family.min_pair_distance),
        "injective": family.injective,
    });
    if with_jets {
        let sys = &ctx.model_system;
        let basis = (0..sys.kernel_dim)
            .map(|j| sys.kernel_lift(j))
            .collect::<sdisc::Result<Vec<_>>>()?;
        let max_order = (s.nf / 2).min(6 * ctx.f0.n() * ctx.r.model().polynomial().degree() as usize);
        let scan = saturation_scan(&basis, max_order)?;
        out["jet_saturation"] = serde_json::to_value(&scan)?;
        if let Some(order) = scan.saturation_order {
            let lifts: Vec<_> = family.members.iter().filter_map(|m| m.lift.clone()).collect();
            out["jet_separation"] = serde_json::to_value(jet_separation(&lifts, order, 1e-8, 1e-6)?)?;
        }
    }
    let bad: Vec<String> = family
        .members
        .iter()
        .filter(|m| !m.converged || m.residual > tol)
        .map(|m| match &m.error {
            Some(e) => format!("grid point {}: {e}", m.index),
            None => format!("grid point {}: residual {:.3e} exceeds {tol:e}; raise --nf", m.index, m.residual),
        })
        .collect();
    Ok(Report {
        json: out,
        csv: Some(trace_csv(&family)),
        failure: (!bad.is_empty()).then(|| bad.join("; ")),
    })
}
