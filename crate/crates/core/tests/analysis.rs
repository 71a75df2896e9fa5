use chaoslab::analysis::{wasserstein1_sorted, wasserstein1_vs_density};
use chaoslab::coupling::{CoupledConfig, CoupledSetup};
use chaoslab::experiments::run_replicates;
use chaoslab::kernels::{KernelKind, KernelSpec, Profile, RegularizedKernel};
use chaoslab::par::Execution;
use chaoslab::pde::{solve, Grid1D, GridDensity, InitialDensity, SolveOptions};
use chaoslab::stochastics::{SeedSpec, Stream, StreamPurpose};

#[test]
fn static_dynamics_keep_the_distance() {
    let grid = Grid1D::symmetric(8.0, 1024).unwrap();
    let rk = RegularizedKernel::new(KernelSpec::zero(), 0.1).unwrap();
    let rho0 = InitialDensity::Mixture {
        components: vec![
            chaoslab::pde::MixtureComponent {
                weight: 0.5,
                density: InitialDensity::Gaussian { mean: -1.0, sd: 0.6 },
            },
            chaoslab::pde::MixtureComponent {
                weight: 0.5,
                density: InitialDensity::UniformBox { a: 0.0, b: 2.0 },
            },
        ],
    };
    let sol = solve(&rho0, &rk, 0.0, 1.0, grid, 0.05, 4, SolveOptions::default()).unwrap();
    let start = &sol.snapshots[0];
    let sample: Vec<f64> = (0..500).map(|i| start.quantile((i as f64 + 0.5) / 500.0)).collect();
    let w0 = wasserstein1_vs_density(&sample, start).unwrap();
    for snap in &sol.snapshots {
        assert_eq!(wasserstein1_vs_density(&sample, snap).unwrap(), w0);
    }
}

fn draws(rho: &GridDensity, n: usize, seed: u64) -> Vec<f64> {
    let mut s = Stream::new(SeedSpec::new(seed, 0, 0), StreamPurpose::Auxiliary);
    (0..n).map(|_| rho.quantile(s.uniform())).collect()
}

fn pooled_gap(kernel: KernelKind) -> f64 {
    let cfg = CoupledConfig {
        n: 64,
        alpha: 0.25,
        beta: 0.25,
        eps_scale: 1.0,
        sigma: 0.5,
        t_end: 1.0,
        dt: 0.01,
        kernel,
        rho0: InitialDensity::default(),
        domain_half_width: 8.0,
        cells: 2048,
        lambda: None,
        pde_substeps: None,
        pde: SolveOptions::default(),
    };
    let setup = CoupledSetup::prepare(&cfg).unwrap();
    let recs = run_replicates(&setup, 160, 7, Execution::default()).unwrap();
    let pooled: Vec<f64> = recs.iter().flat_map(|r| r.final_y.iter().copied()).collect();
    let reference = draws(setup.solution.final_state(), pooled.len(), 99);
    wasserstein1_sorted(&pooled, &reference).unwrap()
}

#[test]
fn mean_field_sample_is_within_sampling_noise_of_the_pde() {
    let baseline = pooled_gap(KernelKind::Zero);
    let bcm = pooled_gap(KernelKind::Bcm {
        profile: Profile::One,
        radius: 1.0,
    });
    assert!(bcm < 3.0 * baseline, "{bcm} vs baseline {baseline}");
}
