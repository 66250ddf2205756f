//! Randomized invariants of the building blocks.

use nalgebra::DMatrix;
use proptest::prelude::*;
use sdisc::birkhoff::{self, MatrixLoop, DEFAULT_INDEX_DEGREE};
use sdisc::hypersurface::DefiningFunction;
use sdisc::jets::{jet_at_one, jet_of};
use sdisc::model::{self, ADMISSIBILITY_TOL, RESIDUAL_SAMPLES};
use sdisc::poly::{Exponent, Poly};
use sdisc::rhsolver::symbol::{build_g, det_identity_error, reduce_to_a};
use sdisc::rhsolver::transform::{reparametrize, rotate, Mobius};
use sdisc::{CircleFunction, HermitianPolynomial, WeightVector, C64};

const QUARTIC: &str = include_str!("../../../models/quartic.json");
const TILTED: &str = include_str!("../../../models/tilted_quartic.json");
const DECOUPLED: &str = include_str!("../../../models/decoupled_quartic.json");

fn poly(json: &str) -> HermitianPolynomial {
    HermitianPolynomial::from_json(json).unwrap()
}

fn complex(scale: f64) -> impl Strategy<Value = C64> {
    (-scale..scale, -scale..scale).prop_map(|(re, im)| C64::new(re, im))
}

fn holomorphic(nf: usize, len: usize) -> impl Strategy<Value = CircleFunction> {
    prop::collection::vec(complex(1.0), len).prop_map(move |c| CircleFunction::from_laurent(nf, 0, &c).unwrap())
}

/// Real trigonometric polynomial `sum_{|k| <= deg} c_k zeta^k` with `c_{-k} = conj(c_k)`.
fn real_trig(nf: usize, deg: usize) -> impl Strategy<Value = CircleFunction> {
    (-1.0..1.0f64, prop::collection::vec(complex(1.0), deg)).prop_map(move |(c0, cs)| {
        let mut f = CircleFunction::constant(nf, C64::new(c0, 0.0));
        for (k, c) in cs.iter().enumerate() {
            f.set(k as i64 + 1, *c).unwrap();
            f.set(-(k as i64) - 1, c.conj()).unwrap();
        }
        f
    })
}

/// `prod (zeta - r_j)` with every root at distance >= 0.2 from the circle.
fn laurent_with_roots(nf: usize) -> impl Strategy<Value = (CircleFunction, i64)> {
    prop::collection::vec((prop_oneof![0.0..0.8f64, 1.2..2.5f64], 0.0..std::f64::consts::TAU), 1..4).prop_map(
        move |roots| {
            let mut f = CircleFunction::constant(nf, C64::new(1.0, 0.0));
            let mut inside = 0;
            for (r, t) in roots {
                inside += i64::from(r < 1.0);
                let lin =
                    CircleFunction::from_laurent(nf, 0, &[-C64::from_polar(r, t), C64::new(1.0, 0.0)]).unwrap();
                f = f.mul(&lin).unwrap();
            }
            (f, inside)
        },
    )
}

fn rel_close(a: &[C64], b: &[C64], tol: f64) -> bool {
    let scale = a.iter().chain(b).map(|x| x.norm()).fold(1.0, f64::max);
    a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol * scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weighted_homogeneity(t in 0.1..3.0f64, z in prop::collection::vec(complex(1.0), 2)) {
        let p = poly(TILTED);
        let q = poly(DECOUPLED);
        for p in [&p, &q] {
            let m = p.weights().as_slice();
            let zs: Vec<C64> = z[..p.n()].to_vec();
            let scaled: Vec<C64> = zs.iter().zip(m).map(|(x, &mi)| x * t.powi(mi as i32)).collect();
            let lhs = p.eval(&scaled).unwrap();
            let rhs = t.powi(p.degree() as i32) * p.eval(&zs).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1e-300));
        }
    }

    #[test]
    fn bihomogeneous_components_sum_to_p(re in -2.0..2.0f64, im in -2.0..2.0f64) {
        let mut raw = Poly::new(1);
        raw.add_term(Exponent::new(vec![2], vec![2], 0), C64::new(1.0, 0.0)).unwrap();
        raw.add_term(Exponent::new(vec![3], vec![1], 0), C64::new(re, im)).unwrap();
        raw.add_term(Exponent::new(vec![1], vec![3], 0), C64::new(re, -im)).unwrap();
        let p = HermitianPolynomial::new(raw.clone(), WeightVector::unit(1), 4).unwrap();
        let mut total = Poly::new(1);
        for ell in 0..=4 {
            total = total.add(&p.bihomogeneous_component(ell).unwrap()).unwrap();
        }
        prop_assert_eq!(total, raw);
    }

    #[test]
    fn eval_matches_monomial_sum(z in prop::collection::vec(complex(1.5), 2)) {
        let p = poly(DECOUPLED);
        let oracle: C64 = p
            .poly()
            .terms()
            .map(|(e, c)| {
                let mut v = *c;
                for i in 0..2 {
                    v *= z[i].powu(e.j[i]) * z[i].conj().powu(e.k[i]);
                }
                v
            })
            .sum();
        let val = p.eval(&z).unwrap();
        prop_assert!((val - oracle.re).abs() <= 1e-12 * oracle.norm().max(1.0));
    }

    #[test]
    fn winding_is_additive(a in laurent_with_roots(16), b in laurent_with_roots(16)) {
        let (f, wf) = a;
        let (g, wg) = b;
        let prod = f.mul(&g).unwrap();
        prop_assert_eq!(f.winding_number().unwrap(), wf);
        prop_assert_eq!(prod.winding_number().unwrap(), f.winding_number().unwrap() + g.winding_number().unwrap());
        prop_assert_eq!(prod.winding_number().unwrap(), wf + wg);
    }

    #[test]
    fn division_by_one_minus_zeta_round_trips(f in holomorphic(24, 12), m in 0u32..5) {
        let g = f.mul_one_minus_zeta_pow(m).unwrap();
        let back = g.divide_one_minus_zeta(m).unwrap().mul_one_minus_zeta_pow(m).unwrap();
        prop_assert!(rel_close(back.coeffs(), g.coeffs(), 1e-10));
        prop_assert!(rel_close(g.divide_one_minus_zeta(m).unwrap().coeffs(), f.coeffs(), 1e-10));
    }

    #[test]
    fn harmonic_extension_matches_boundary(u in real_trig(16, 8)) {
        let g = u.harmonic_extension(C64::new(0.0, 0.0)).unwrap();
        let err = u
            .sample(1024)
            .iter()
            .zip(g.sample(1024))
            .map(|(a, b)| (a.re - b.re).abs())
            .fold(0.0, f64::max);
        prop_assert!(err < 1e-10);
    }

    #[test]
    fn tau_lands_in_r_m(psi in real_trig(24, 6), m in 0u32..4) {
        let bar = CircleFunction::from_laurent(24, -1, &[C64::new(-1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        let mut phi = psi.mul_one_minus_zeta_pow(m).unwrap();
        for _ in 0..m {
            phi = phi.mul(&bar).unwrap();
        }
        let tau = phi.divide_one_minus_zeta(m).unwrap();
        prop_assert!(tau.in_r_m(m as i64));
    }

    #[test]
    fn jets_are_linear(f in holomorphic(16, 10), g in holomorphic(16, 10), a in complex(2.0), b in complex(2.0)) {
        let order = 6;
        let combo = &f.scale(a) + &g.scale(b);
        let lhs = jet_of(&combo, order).unwrap();
        let jf = jet_of(&f, order).unwrap();
        let jg = jet_of(&g, order).unwrap();
        let rhs: Vec<C64> = jf.iter().zip(&jg).map(|(x, y)| a * x + b * y).collect();
        prop_assert!(rel_close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn monomial_jets(k in 0i64..12, ell in 0usize..6) {
        let f = CircleFunction::monomial(16, k, C64::new(1.0, 0.0)).unwrap();
        let jet = jet_of(&f, ell).unwrap();
        let expected: f64 = (0..ell as i64).map(|i| (k - i) as f64).product();
        prop_assert!((jet[ell] - expected).norm() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn det_identity_on_random_directions(trial in 0u64..10_000) {
        for json in [TILTED, DECOUPLED] {
            let p = poly(json);
            let v = model::sphere_sample(p.n(), 99, trial);
            if !model::is_admissible(&p, &v, ADMISSIBILITY_TOL).admissible {
                continue;
            }
            let a = reduce_to_a(&build_g(&p, &v).unwrap(), &p).unwrap();
            let det_q_prime = model::levi_coefficients(&p, &v).unwrap().det_q_prime;
            prop_assert!(det_identity_error(&a, &det_q_prime, p.n()) < 1e-8);
        }
    }

    #[test]
    fn model_discs_satisfy_the_boundary_system(trial in 0u64..10_000) {
        for json in [QUARTIC, TILTED, DECOUPLED] {
            let p = poly(json);
            let v = model::sphere_sample(p.n(), 17, trial);
            if !model::is_admissible(&p, &v, ADMISSIBILITY_TOL).admissible {
                continue;
            }
            let lift = model::build_lift(&p, &v, 32).unwrap();
            prop_assert!(lift.residual(&DefiningFunction::model(&p), RESIDUAL_SAMPLES) < 1e-10);
            let h = lift.h(0).sample(256);
            let g = lift.g().sample(256);
            let other: Vec<Vec<C64>> = (1..p.n()).map(|i| lift.h(i).sample(256)).collect();
            for (j, (hj, gj)) in h.iter().zip(&g).enumerate() {
                let mut z = vec![*hj];
                z.extend(other.iter().map(|o| o[j]));
                prop_assert!((gj.re - p.eval(&z).unwrap()).abs() < 1e-10);
            }
            let wind = model::levi_coefficients(&p, &v).unwrap().det_q.winding_number().unwrap();
            let (n, k0, d) = (p.n() as i64, p.k0() as i64, p.degree() as i64);
            prop_assert!(wind <= n * (2 * k0 - d) + p.weights().total() as i64);
        }
    }

    #[test]
    fn reparametrization_round_trips(re in -0.15..0.15f64, im in -0.15..0.15f64, phase in 0.0..std::f64::consts::TAU) {
        let p = poly(QUARTIC);
        let lift = model::build_lift(&p, &[C64::from_polar(1.0, phase)], 64).unwrap();
        let a = C64::new(re, im);
        let there = reparametrize(&lift, a).unwrap();
        let back = reparametrize(&there, Mobius::new(a).unwrap().inverse().a).unwrap();
        let err = lift
            .sample(256)
            .iter()
            .zip(back.sample(256))
            .flat_map(|(x, y)| x.iter().zip(y).map(|(a, b)| (a - b).norm()).collect::<Vec<_>>())
            .fold(0.0, f64::max);
        prop_assert!(err < 1e-8);
        prop_assert!(there.residual(&DefiningFunction::model(&p), RESIDUAL_SAMPLES) < 1e-10);
    }

    #[test]
    fn rotations_of_decoupled_discs_stay_attached(a in 0.0..std::f64::consts::TAU, b in 0.0..std::f64::consts::TAU) {
        let p = poly(DECOUPLED);
        let lift = model::build_lift(&p, &[C64::new(0.6, 0.0), C64::new(0.0, 0.8)], 32).unwrap();
        let moved = rotate(&lift, &[a, b]).unwrap();
        prop_assert!(moved.residual(&DefiningFunction::model(&p), RESIDUAL_SAMPLES) < 1e-10);
    }

    #[test]
    fn model_jets_vanish_at_one(phase in 0.0..std::f64::consts::TAU) {
        let p = poly(QUARTIC);
        let lift = model::build_lift(&p, &[C64::from_polar(1.0, phase)], 32).unwrap();
        let jet = jet_at_one(&lift, 3).unwrap();
        prop_assert!(jet.entries[0][0].norm() < 1e-12);
        prop_assert!(jet.entries[1][0].norm() < 1e-12);
    }

    #[test]
    fn partial_indices_invariant_under_constant_conjugation(
        e1 in -3i64..4, e2 in -3i64..4,
        u in prop::collection::vec(complex(1.0), 4),
        w in prop::collection::vec(complex(1.0), 4),
    ) {
        let um = DMatrix::from_row_slice(2, 2, &u) + DMatrix::identity(2, 2) * C64::new(2.5, 0.0);
        let wm = DMatrix::from_row_slice(2, 2, &w) + DMatrix::identity(2, 2) * C64::new(2.5, 0.0);
        let nf = 16;
        let constant = |m: &DMatrix<C64>| {
            MatrixLoop::from_rows(
                (0..2)
                    .map(|i| (0..2).map(|j| CircleFunction::constant(nf, m[(i, j)])).collect())
                    .collect(),
            )
            .unwrap()
        };
        let diag = MatrixLoop::diagonal_monomials(nf, &[e1, e2]).unwrap();
        let l = constant(&um).mul(&diag).unwrap().mul(&constant(&wm)).unwrap();
        let idx = birkhoff::partial_indices(&l, DEFAULT_INDEX_DEGREE).unwrap();
        let mut expected = vec![e1, e2];
        expected.sort_unstable();
        prop_assert_eq!(&idx.indices, &expected);
        prop_assert_eq!(idx.indices.iter().sum::<i64>(), l.maslov_index().unwrap());
        let fac = birkhoff::factorize(&l, DEFAULT_INDEX_DEGREE).unwrap();
        prop_assert!(fac.residual < 1e-6);
    }
}
