use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use chaoslab::coupling::{CoupledConfig, CoupledSetup};
use chaoslab::experiments::run_replicates;
use chaoslab::kernels::{KernelKind, Profile};
use chaoslab::par::Execution;
use chaoslab::pde::{InitialDensity, SolveOptions};

fn replicates(c: &mut Criterion) {
    let mut group = c.benchmark_group("coupled_replicates");
    group.sample_size(10);
    for n in [64usize, 256] {
        let cfg = CoupledConfig {
            n,
            alpha: 0.25,
            beta: 0.25,
            eps_scale: 1.0,
            sigma: 0.5,
            t_end: 0.5,
            dt: 0.01,
            kernel: KernelKind::Bcm {
                profile: Profile::One,
                radius: 1.0,
            },
            rho0: InitialDensity::default(),
            domain_half_width: 8.0,
            cells: 1024,
            lambda: None,
            pde_substeps: None,
            pde: SolveOptions::default(),
        };
        let setup = CoupledSetup::prepare(&cfg).unwrap();
        for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(label, n), &setup, |b, setup| {
                b.iter(|| run_replicates(setup, 16, 1, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, replicates);
criterion_main!(benches);
