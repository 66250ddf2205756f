//! Timings for the main stages on the homogeneous quartic.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use sdisc::birkhoff::{self, DEFAULT_INDEX_DEGREE};
use sdisc::model::{self, ModelHypersurface};
use sdisc::rhsolver::symbol::{build_g, reduce_to_a};
use sdisc::rhsolver::{linearize, newton_attach, FamilyContext, LinearizeOptions, PerturbedHypersurface};
use sdisc::{HermitianPolynomial, C64};

const QUARTIC: &str = include_str!("../../../models/quartic.json");
const THETA_SMALL: &str = include_str!("../../../models/theta_small.json");
const NF: usize = 32;

fn quartic() -> HermitianPolynomial {
    HermitianPolynomial::from_json(QUARTIC).unwrap()
}

fn stages(c: &mut Criterion) {
    let p = quartic();
    let v = [C64::new(1.0, 0.0)];

    c.bench_function("build_lift", |b| b.iter(|| model::build_lift(black_box(&p), &v, NF).unwrap()));

    let lift = model::build_lift(&p, &v, NF).unwrap();
    let r = PerturbedHypersurface::unperturbed(ModelHypersurface::new(p.clone()));
    let opts = LinearizeOptions { nf: NF, ..Default::default() };
    c.bench_function("linearize", |b| b.iter(|| linearize(&r, black_box(&lift), &opts).unwrap()));

    let a = reduce_to_a(&build_g(&p, &v).unwrap(), &p).unwrap();
    let sym = birkhoff::symbol(&a, a.nf().max(16)).unwrap();
    c.bench_function("partial_indices", |b| {
        b.iter(|| birkhoff::partial_indices(black_box(&sym), DEFAULT_INDEX_DEGREE).unwrap())
    });
}

fn attach(c: &mut Criterion) {
    let m = ModelHypersurface::new(quartic());
    let r = PerturbedHypersurface::from_json(m, THETA_SMALL).unwrap();
    let ctx = FamilyContext::new(r, &[C64::new(1.0, 0.0)], NF).unwrap();
    let zeros = vec![0.0; ctx.kernel_dim()];
    let mut group = c.benchmark_group("attach");
    group.sample_size(10);
    group.bench_function("newton_attach", |b| b.iter(|| newton_attach(&ctx, &ctx.f0, black_box(&zeros)).unwrap()));
    group.finish();
}

criterion_group!(benches, stages, attach);
criterion_main!(benches);
