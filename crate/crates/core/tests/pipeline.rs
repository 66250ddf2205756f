//! End-to-end checks across modules on the bundled models.

use sdisc::jets::{jet_bound, kernel_jet_injectivity};
use sdisc::model::{self, ModelHypersurface, ADMISSIBILITY_TOL, RESIDUAL_SAMPLES};
use sdisc::rhsolver::symbol::{build_g, l3_kernel, reduce_to_a};
use sdisc::rhsolver::{axes_grid, disc_family, linearize, newton_attach, FamilyContext, LinearizeOptions, PerturbedHypersurface};
use sdisc::{Error, HermitianPolynomial, C64};

const QUARTIC: &str = include_str!("../../../models/quartic.json");
const TILTED: &str = include_str!("../../../models/tilted_quartic.json");
const DECOUPLED: &str = include_str!("../../../models/decoupled_quartic.json");
const DEGENERATE: &str = include_str!("../../../models/degenerate_quartic.json");
const THETA_SMALL: &str = include_str!("../../../models/theta_small.json");
const THETA_HUGE: &str = include_str!("../../../models/theta_huge.json");

const ONE: C64 = C64::new(1.0, 0.0);

fn poly(json: &str) -> HermitianPolynomial {
    HermitianPolynomial::from_json(json).unwrap()
}

#[test]
fn quartic_summary_values() {
    let p = poly(QUARTIC);
    let search = model::find_admissible(&p, 64, 0, ADMISSIBILITY_TOL);
    assert!(search.found);
    let r = jet_bound(&p, Some(&search.v)).unwrap();
    assert_eq!(p.k0(), 2);
    assert_eq!(r.ind_q, Some(1));
    assert_eq!(r.refined, Some(4));
    assert_eq!(r.homogeneous.unwrap().exact_dim, 8);
    assert_eq!(r.partial_indices, Some(vec![0, 0]));
}

#[test]
fn degenerate_model_has_no_admissible_direction() {
    let p = poly(DEGENERATE);
    let search = model::find_admissible(&p, 64, 0, ADMISSIBILITY_TOL);
    assert!(!search.found);
    assert!(search.certificate.reason.unwrap().contains("det Q"));
    let r = jet_bound(&p, None).unwrap();
    assert_eq!(r.generic, 24);
    assert!(r.refined.is_none());
}

#[test]
fn kernel_dimensions_respect_the_bounds() {
    for (json, v) in [
        (QUARTIC, vec![ONE]),
        (TILTED, vec![ONE]),
        (DECOUPLED, vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]),
    ] {
        let p = poly(json);
        assert!(model::is_admissible(&p, &v, ADMISSIBILITY_TOL).admissible);
        let lift = model::build_lift(&p, &v, 48).unwrap();
        let r = PerturbedHypersurface::unperturbed(ModelHypersurface::new(p.clone()));
        let sys = linearize(&r, &lift, &LinearizeOptions { nf: 48, ..Default::default() }).unwrap();
        let bounds = jet_bound(&p, Some(&v)).unwrap();
        assert!(sys.kernel_dim as i64 <= bounds.dim_bound, "{} > {}", sys.kernel_dim, bounds.dim_bound);
        let a = reduce_to_a(&build_g(&p, &v).unwrap(), &p).unwrap();
        let l3 = l3_kernel(&a, 16).unwrap();
        assert!(l3.dim as i64 <= bounds.l3_bound);
        assert_eq!(l3.dim as i64, 2 * bounds.ind_q.unwrap());
    }
}

#[test]
fn jet_rank_grows_to_the_kernel() {
    let p = poly(QUARTIC);
    let ctx = FamilyContext::new(PerturbedHypersurface::unperturbed(ModelHypersurface::new(p)), &[ONE], 32).unwrap();
    let basis: Vec<_> = (0..ctx.kernel_dim())
        .map(|j| ctx.model_system.kernel_lift(j).unwrap())
        .collect();
    let zero = kernel_jet_injectivity(&basis, 0).unwrap();
    assert!(!zero.injective && zero.rank < basis.len());
    let four = kernel_jet_injectivity(&basis, 4).unwrap();
    assert!(four.injective && four.rank == basis.len());
}

#[test]
fn perturbed_discs_stay_divisible_and_attached() {
    let m = ModelHypersurface::new(poly(QUARTIC));
    let r = PerturbedHypersurface::from_json(m, THETA_SMALL).unwrap();
    let ctx = FamilyContext::new(r.clone(), &[ONE], 32).unwrap();
    let family = disc_family(&ctx, &axes_grid(ctx.kernel_dim(), 1e-2));
    assert!(family.injective);
    for member in &family.members {
        assert!(member.converged, "{:?}", member.error);
        let lift = member.lift.as_ref().unwrap();
        assert!(lift.residual(r.defining(), RESIDUAL_SAMPLES) < 1e-9);
        assert!(lift.quotients().is_ok());
    }
}

#[test]
fn huge_perturbation_fails_gracefully() {
    let m = ModelHypersurface::new(poly(QUARTIC));
    let r = PerturbedHypersurface::from_json(m, THETA_HUGE).unwrap();
    let ctx = FamilyContext::new(r, &[ONE], 32).unwrap();
    let zeros = vec![0.0; ctx.kernel_dim()];
    match newton_attach(&ctx, &ctx.f0, &zeros) {
        Err(e @ (Error::NoConvergence(_) | Error::RankCollapse(_))) => {
            assert!(!e.is_validation());
        }
        other => panic!("expected a numerical failure, got {:?}", other.map(|r| r.residual)),
    }
}

#[test]
fn invalid_deformations_are_validation_errors() {
    let m = ModelHypersurface::new(poly(QUARTIC));
    let low_order = r#"{"terms":[{"J":[2],"K":[1],"re":1.0}]}"#;
    let e = PerturbedHypersurface::from_json(m.clone(), low_order).unwrap_err();
    assert!(e.is_validation());
    let unknown = r#"{"terms":[],"bogus":1}"#;
    assert!(PerturbedHypersurface::from_json(m, unknown).unwrap_err().is_validation());
}
