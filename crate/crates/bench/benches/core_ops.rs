use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use multiform_core::decompose::support_blocks;
use multiform_core::gen::{gen_decomposable, gen_witness, random_form_seeded, random_matrix_seeded};
use multiform_core::{
    symmetrize_complex, symmetrize_real, EigenSpec, FieldKind, GenSpec, SymmetrizeOptions, TolerancePolicy, C64, Q,
    R64,
};
use std::hint::black_box;

fn tensor_ops(c: &mut Criterion) {
    let mut group = c.benchmark_group("change_basis");
    for (n, d) in [(3, 4), (4, 4), (3, 8)] {
        let f = random_form_seeded::<R64>(1, n, d);
        let m = random_matrix_seeded::<R64>(2, d);
        group.bench_with_input(BenchmarkId::new("R64", format!("n{n}_d{d}")), &(f, m), |b, (f, m)| {
            b.iter(|| black_box(f.change_basis(m).unwrap()))
        });
    }
    let f = random_form_seeded::<Q>(1, 3, 4);
    let m = random_matrix_seeded::<Q>(2, 4);
    group.bench_function("Q/n3_d4", |b| b.iter(|| black_box(f.change_basis(&m).unwrap())));
    group.finish();

    let pol = TolerancePolicy::default();
    let f = random_form_seeded::<Q>(3, 3, 4);
    c.bench_function("radical/Q/n3_d4", |b| b.iter(|| black_box(f.radical(&pol))));
}

fn witness_spec(field: FieldKind) -> GenSpec {
    GenSpec::new(42, 3, vec![2, 1], field).conjugated().with_eigenvalues(&[
        EigenSpec::Value("2.5".into()),
        EigenSpec::Value("-1.5".into()),
    ])
}

fn symmetrize(c: &mut Criterion) {
    let opts = SymmetrizeOptions::default();
    let real = gen_witness::<R64>(&witness_spec(FieldKind::FloatReal)).unwrap().witness;
    c.bench_function("symmetrize/R64/n3_d3", |b| b.iter(|| black_box(symmetrize_real(&real, &opts).unwrap())));
    let complex = gen_witness::<C64>(&witness_spec(FieldKind::FloatComplex)).unwrap().witness;
    c.bench_function("symmetrize/C64/n3_d3", |b| b.iter(|| black_box(symmetrize_complex(&complex, &opts).unwrap())));

    let exact = GenSpec::new(42, 2, vec![2, 1], FieldKind::ExactRational)
        .conjugated()
        .with_eigenvalues(&[EigenSpec::Value("4".into()), EigenSpec::Value("-9".into())]);
    let exact = gen_witness::<Q>(&exact).unwrap().witness;
    c.bench_function("symmetrize/Q/n2_d3", |b| b.iter(|| black_box(symmetrize_real(&exact, &opts).unwrap())));
}

fn decompose(c: &mut Criterion) {
    let pol = TolerancePolicy::default();
    let mut spec = GenSpec::new(42, 3, vec![1, 1, 2], FieldKind::ExactRational);
    spec.radical_dim = 1;
    let g = gen_decomposable::<Q>(&spec).unwrap();
    c.bench_function("support_blocks/Q/n3_d5", |b| b.iter(|| black_box(support_blocks(&g.form, &pol))));
}

criterion_group!(benches, tensor_ops, symmetrize, decompose);
criterion_main!(benches);
