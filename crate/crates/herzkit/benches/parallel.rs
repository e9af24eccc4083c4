use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use herzkit::anisotropy::AnisotropyVector;
use herzkit::builtins::{mixture_battery, DEFAULT_SEED};
use herzkit::operators::{cz_apply, hl_maximal, BallFamily, StandardKernel};
use herzkit::par;
use herzkit::{ExponentVector, Grid, HerzParams, HerzSpace};

fn bench(c: &mut Criterion) {
    let a1 = AnisotropyVector::isotropic(1);
    let g1 = Grid::cube(1, 8.0, 1025).unwrap();
    let f1 = mixture_battery(1, 8.0, 1, false, DEFAULT_SEED)[0].sample(&g1, "f").unwrap();
    let fam = BallFamily::covering(&g1, &a1).unwrap();
    let mut kernel = StandardKernel::hilbert();
    kernel.validate(&g1).unwrap();

    let a2 = AnisotropyVector::new(vec![2.0, 1.0]).unwrap();
    let g2 = Grid::cube(2, 4.0, 257).unwrap();
    let f2 = mixture_battery(2, 4.0, 1, false, DEFAULT_SEED)[0].sample(&g2, "f").unwrap();
    let params = HerzParams::new(0.25, 2.0, ExponentVector::new(vec![2.0, 3.0]).unwrap(), a2).unwrap();
    let space = HerzSpace::new(params, &g2).unwrap();

    let mut group = c.benchmark_group("pool");
    group.sample_size(10);
    for mode in ["parallel", "sequential"] {
        let run = |f: &mut (dyn FnMut() + Send)| {
            if mode == "sequential" {
                par::sequential(&mut *f)
            } else {
                f()
            }
        };
        group.bench_function(BenchmarkId::new("maximal-1025", mode), |b| {
            b.iter(|| run(&mut || drop(black_box(hl_maximal(&f1, &fam).unwrap()))))
        });
        group.bench_function(BenchmarkId::new("hilbert-1025", mode), |b| {
            b.iter(|| run(&mut || drop(black_box(cz_apply(&kernel, &f1).unwrap()))))
        });
        group.bench_function(BenchmarkId::new("herz-norm-257x257", mode), |b| {
            b.iter(|| run(&mut || {
                black_box(space.norm(&f2).unwrap());
            }))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
