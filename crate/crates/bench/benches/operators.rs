use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use ymddr::scheme::interpolate_ics;
use ymddr::{DdrComplex, LaddrComplex, LieAlgebra, Mesh, Point, Scheme, SchemeConfig, Space, Variant};

fn ddr_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("ddr_build");
    group.sample_size(10);
    for n in [2usize, 4] {
        let mesh = Mesh::cubic(n);
        group.bench_function(format!("cubic:{n}"), |b| {
            b.iter_batched(|| mesh.clone(), |m| DdrComplex::new(m).unwrap(), BatchSize::LargeInput)
        });
    }
    group.finish();
}

fn laddr_assembly(c: &mut Criterion) {
    let ddr = DdrComplex::new(Mesh::cubic(4)).unwrap();
    c.bench_function("laddr_lift/cubic:4", |b| {
        b.iter_batched(|| ddr.clone(), |d| LaddrComplex::new(d, LieAlgebra::su2()), BatchSize::LargeInput)
    });
}

fn brackets(c: &mut Criterion) {
    let l = LaddrComplex::new(DdrComplex::new(Mesh::cubic(4)).unwrap(), LieAlgebra::su2());
    let v: Vec<f64> = (0..l.len(Space::Curl)).map(|i| (i as f64 * 0.37).sin()).collect();
    let q: Vec<f64> = (0..l.len(Space::Grad)).map(|i| (i as f64 * 0.11).cos()).collect();
    c.bench_function("bracket_curl_curl/cubic:4", |b| b.iter(|| l.bracket_curl_curl_raw(&v, &v)));
    c.bench_function("bvi_grad_first/cubic:4", |b| b.iter(|| l.bvi_grad_first(&v, &q)));
}

fn newton_step(c: &mut Criterion) {
    let l = LaddrComplex::new(DdrComplex::new(Mesh::cubic(2)).unwrap(), LieAlgebra::su2());
    let field = |x: &Point| vec![Point::new(x.y, 0.0, x.z), Point::new(0.0, x.x * x.z, 0.0), Point::new(1.0, 0.0, x.y)];
    let state = interpolate_ics(&l, &field, &field, true);
    let scheme = Scheme::new(&l, SchemeConfig::new(Variant::YangMillsConstrained, 1.0, 0.1)).unwrap();
    let mut group = c.benchmark_group("step");
    group.sample_size(10);
    group.bench_function("ym-constrained/cubic:2", |b| b.iter(|| scheme.step(&state, None).unwrap()));
    group.finish();
}

criterion_group!(benches, ddr_build, laddr_assembly, brackets, newton_step);
criterion_main!(benches);
