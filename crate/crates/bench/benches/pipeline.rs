use criterion::{black_box, criterion_group, criterion_main, Criterion};
use modschwarz::analytic::{residue_report, DEFAULT_DELTA, DEFAULT_SAMPLES};
use modschwarz::schwarz::{auto_spec, verify_ode, verify_schwarzian, VerifyOptions};
use modschwarz::system::SolveOptions;
use modschwarz::ResidueSystem;
use modschwarz_bench::{exact_operands, f1_spec, float_operands};

fn series(c: &mut Criterion) {
    let (a, b) = exact_operands(25).unwrap();
    c.bench_function("mul exact q^25", |bch| bch.iter(|| black_box(&a).mul(black_box(&b)).unwrap()));
    c.bench_function("recip exact q^25", |bch| bch.iter(|| black_box(&a).recip().unwrap()));
    let (fa, fb) = float_operands(100, 1064).unwrap();
    c.bench_function("mul float q^100", |bch| bch.iter(|| black_box(&fa).mul(black_box(&fb)).unwrap()));
    c.bench_function("recip float q^100", |bch| bch.iter(|| black_box(&fa).recip().unwrap()));
}

fn solver(c: &mut Criterion) {
    for n in [4, 10] {
        let sys = ResidueSystem::standard(n);
        let opts = SolveOptions { tol: 1e-10, ..SolveOptions::default() };
        c.bench_function(&format!("solve n={n}"), |bch| bch.iter(|| sys.solve(None, &opts).unwrap()));
    }
}

fn verify(c: &mut Criterion) {
    let mut g = c.benchmark_group("verify");
    g.sample_size(10);
    let f1 = f1_spec();
    g.bench_function("schwarzian n=1 exact q^25", |bch| {
        bch.iter(|| verify_schwarzian(&f1, &VerifyOptions::exact(25)).unwrap())
    });
    g.bench_function("ode n=1 exact q^25", |bch| bch.iter(|| verify_ode(&f1, &VerifyOptions::exact(25)).unwrap()));
    let f4 = auto_spec(4, 1064).unwrap();
    g.bench_function("schwarzian n=4 float q^100", |bch| {
        bch.iter(|| verify_schwarzian(&f4, &VerifyOptions::float(100)).unwrap())
    });
    g.bench_function("residues n=4", |bch| {
        bch.iter(|| residue_report(&f4, DEFAULT_DELTA, DEFAULT_SAMPLES, 1e-6).unwrap())
    });
    g.finish();
}

criterion_group!(benches, series, solver, verify);
criterion_main!(benches);
