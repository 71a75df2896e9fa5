use chaoslab::analysis::chaos_sets;
use chaoslab::coupling::{em_step_particles, run_replicate, CoupledConfig, CoupledEnsemble, CoupledSetup};
use chaoslab::experiments::{replicate_seed, run_replicates};
use chaoslab::kernels::{KernelKind, KernelSpec, Profile, RegularizedKernel};
use chaoslab::par::Execution;
use chaoslab::pde::{InitialDensity, SolveOptions};

fn config(kernel: KernelKind, n: usize) -> CoupledConfig {
    CoupledConfig {
        n,
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
    }
}

fn bcm() -> KernelKind {
    KernelKind::Bcm {
        profile: Profile::One,
        radius: 1.0,
    }
}

#[test]
fn particle_update_is_permutation_equivariant() {
    let rk = RegularizedKernel::new(KernelSpec::uniform(1.0).unwrap(), 0.1).unwrap();
    let x: Vec<f64> = (0..40).map(|i| ((i * 37) % 40) as f64 * 0.07 - 1.3).collect();
    let db: Vec<f64> = (0..40).map(|i| ((i * 11) % 7) as f64 * 0.01 - 0.03).collect();
    let perm: Vec<usize> = (0..40).map(|i| (i * 17) % 40).collect();
    let mut a = CoupledEnsemble::new(x.clone(), 0.1, 0.25);
    em_step_particles(&mut a, &rk, 0.5, 0.01, &db, Execution::Sequential).unwrap();
    let mut b = CoupledEnsemble::new(perm.iter().map(|&k| x[k]).collect(), 0.1, 0.25);
    let db_perm: Vec<f64> = perm.iter().map(|&k| db[k]).collect();
    em_step_particles(&mut b, &rk, 0.5, 0.01, &db_perm, Execution::Sequential).unwrap();
    for (i, &k) in perm.iter().enumerate() {
        assert!((b.x[i] - a.x[k]).abs() < 1e-14);
    }
}

#[test]
fn single_particle_gap_grows_at_most_linearly() {
    let mut cfg = config(bcm(), 1);
    cfg.eps_scale = 0.2;
    let setup = CoupledSetup::prepare(&cfg).unwrap();
    for r in 0..20 {
        let rec = run_replicate(&setup, replicate_seed(3, r), Execution::Sequential).unwrap();
        for (t, d) in rec.times.iter().zip(&rec.sup_dev) {
            assert!(*d <= 2.0 * t + 1e-12, "t={t}: {d}");
        }
    }
}

#[test]
fn applied_drift_is_bounded_by_the_kernel() {
    let setup = CoupledSetup::prepare(&config(bcm(), 128)).unwrap();
    let recs = run_replicates(&setup, 10, 1, Execution::default()).unwrap();
    for rec in &recs {
        assert!(rec.max_drift <= 1.0 + 1e-12, "{}", rec.max_drift);
        assert_eq!(rec.sup_dev[0], 0.0);
        assert!(rec.j.windows(2).all(|w| w[1] >= w[0]) && rec.j.iter().all(|&j| j <= 1.0));
    }
}

#[test]
fn replicates_do_not_depend_on_execution_mode() {
    let mut cfg = config(KernelKind::Uniform { radius: 1.0 }, 64);
    cfg.eps_scale = 0.5;
    let setup = CoupledSetup::prepare(&cfg).unwrap();
    let a = run_replicates(&setup, 8, 5, Execution::Parallel).unwrap();
    let b = run_replicates(&setup, 8, 5, Execution::Sequential).unwrap();
    assert_eq!(a, b);
}

/// Kolmogorov-Smirnov distance between a sample and the PDE snapshot CDF.
fn ks_distance(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn mean_field_marginal_matches_the_pde() {
    let setup = CoupledSetup::prepare(&config(bcm(), 64)).unwrap();
    let recs = run_replicates(&setup, 200, 11, Execution::default()).unwrap();
    let mut pooled: Vec<f64> = recs.iter().flat_map(|r| r.final_y.iter().copied()).collect();
    let rho = setup.solution.final_state();
    let n = pooled.len() as f64;
    let ks = ks_distance(&mut pooled, |x| rho.cdf(x));
    // Euler-Maruyama bias with dt = 0.01 adds to the grid error
    let allowance = 2.0 / n.sqrt() + 5e-3;
    assert!(ks < allowance, "KS {ks} vs {allowance}");
}

fn good_set_fractions(cfg: &CoupledConfig, reps: usize, seed: u64) -> (f64, f64) {
    let setup = CoupledSetup::prepare(cfg).unwrap();
    let recs = run_replicates(&setup, reps, seed, Execution::default()).unwrap();
    let mut misses = (0usize, 0usize);
    for rec in &recs {
        let m = chaos_sets(
            &rec.final_y,
            &setup.kernel,
            &setup.envelope,
            &setup.solution,
            cfg.t_end,
            cfg.alpha,
            cfg.delta(),
            Execution::Sequential,
        )
        .unwrap();
        misses.0 += usize::from(!m.in_b1);
        misses.1 += usize::from(!m.in_b2);
    }
    (misses.0 as f64 / reps as f64, misses.1 as f64 / reps as f64)
}

fn exceedance_fraction(cfg: &CoupledConfig, reps: usize, seed: u64) -> f64 {
    let setup = CoupledSetup::prepare(cfg).unwrap();
    let recs = run_replicates(&setup, reps, seed, Execution::default()).unwrap();
    recs.iter().filter(|r| r.exceeded).count() as f64 / reps as f64
}

#[test]
fn good_set_violations_do_not_grow_with_n() {
    let fractions: Vec<(f64, f64)> = [64, 128, 256, 512].iter().map(|&n| good_set_fractions(&config(bcm(), n), 200, 17)).collect();
    eprintln!("P(B1^c), P(B2^c) for N = 64..512: {fractions:?}");
    assert!(fractions.windows(2).all(|w| w[1].0 <= w[0].0 && w[1].1 <= w[0].1), "{fractions:?}");
}

#[test]
fn exceedance_does_not_grow_with_n() {
    let (small, large) = (exceedance_fraction(&config(bcm(), 64), 200, 23), exceedance_fraction(&config(bcm(), 256), 200, 23));
    eprintln!("exceedance at N^-0.25: N=64 {small}, N=256 {large}");
    assert!(large <= small);
}
