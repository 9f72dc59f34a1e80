use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use jobcost::fewclass::{solve_few_classes, FewClassConfig};
use jobcost::oracles::exact_ufp_cover;
use jobcost::par::Execution;
use jobcost::rational::frac;
use jobcost::reduction::{solve_e_approx, InnerSolver};
use jobcost::speedup::{solve_speedup, SpeedupConfig};
use jobcost::ufp_qptas::{solve_qptas, QptasConfig};
use jobcost::workbench::generate::{generate_gsp, generate_ufp, GspParams, UfpParams};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn ufp(c: &mut Criterion) {
    let inst = generate_ufp(11, &UfpParams { n: 12, m: 8, ..UfpParams::default() }).unwrap();
    let mut g = c.benchmark_group("ufp");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("qptas", name), &exec, |b, &exec| {
            let cfg = QptasConfig { exec, ..QptasConfig::new(frac(1, 2)) };
            b.iter(|| solve_qptas(&inst, &cfg).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("oracle", name), &exec, |b, &exec| {
            b.iter(|| exact_ufp_cover(&inst, 20, exec).unwrap())
        });
    }
    g.finish();
}

fn scheduling(c: &mut Criterion) {
    let uniform = generate_gsp(5, &GspParams { n: 6, processing: (1, 3), ..GspParams::default() }).unwrap();
    let two_release = generate_gsp(5, &GspParams { n: 7, releases: vec![0, 3], ..GspParams::default() }).unwrap();
    let mut g = c.benchmark_group("scheduling");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("e-approx", name), &exec, |b, &exec| {
            b.iter(|| solve_e_approx(&uniform, 8, &InnerSolver::Exact { cap: 24 }, exec).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("speedup", name), &exec, |b, &exec| {
            let cfg = SpeedupConfig { exec, ..SpeedupConfig::new(2) };
            b.iter(|| solve_speedup(&uniform, &cfg).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("few-class", name), &exec, |b, &exec| {
            let cfg = FewClassConfig { exec, ..FewClassConfig::new(frac(1, 2)) };
            b.iter(|| solve_few_classes(&two_release, &cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, ufp, scheduling);
criterion_main!(benches);
