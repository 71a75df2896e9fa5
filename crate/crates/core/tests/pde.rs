use chaoslab::kernels::{KernelSpec, Profile, RegularizedKernel};
use chaoslab::pde::{
    drift_field, project_initial, solve, step, weak_convergence_gap, FluxScheme, Grid1D, GridDensity, InitialDensity,
    PdeSolver, SolveOptions, TOL_MASS,
};
use chaoslab::Error;

fn bcm(eps: f64) -> RegularizedKernel {
    RegularizedKernel::new(KernelSpec::bcm(Profile::One, 1.0).unwrap(), eps).unwrap()
}

fn uniform(eps: f64) -> RegularizedKernel {
    RegularizedKernel::new(KernelSpec::uniform(1.0).unwrap(), eps).unwrap()
}

fn zero() -> RegularizedKernel {
    RegularizedKernel::new(KernelSpec::zero(), 0.1).unwrap()
}

fn gaussian(sd: f64) -> InitialDensity {
    InitialDensity::Gaussian { mean: 0.0, sd }
}

#[test]
fn zero_kernel_has_zero_drift() {
    let rho = GridDensity::project(&gaussian(1.0), Grid1D::symmetric(8.0, 256).unwrap()).unwrap();
    assert!(drift_field(&zero(), &rho).iter().all(|&b| b == 0.0));
}

#[test]
fn antisymmetric_kernel_on_symmetric_density_has_no_drift_at_origin() {
    // odd cell count puts a centre at 0
    let grid = Grid1D::symmetric(6.0, 513).unwrap();
    let rho = GridDensity::project(&gaussian(0.8), grid).unwrap();
    let b = drift_field(&uniform(0.05), &rho);
    assert_eq!(grid.center(256), 0.0);
    assert!(b[256].abs() < 1e-14, "{}", b[256]);
}

#[test]
fn drift_matches_fine_quadrature() {
    let grid = Grid1D::symmetric(4.0, 800).unwrap();
    let rk = uniform(0.05);
    let rho = GridDensity::project(&InitialDensity::UniformBox { a: -0.5, b: 0.5 }, grid).unwrap();
    let b = drift_field(&rk, &rho);
    for j in [300, 400, 499, 500, 510, 640] {
        let x = grid.center(j);
        let fine = 200_000;
        let h = 1.0 / fine as f64;
        let oracle = -(0..fine).map(|m| rk.eval(x - (-0.5 + (m as f64 + 0.5) * h)) * h).sum::<f64>();
        assert!((b[j] - oracle).abs() < 1e-3, "x={x}: {} vs {oracle}", b[j]);
    }
    // |b| <= ‖k^ε‖_∞ · mass
    assert!(b.iter().all(|v| v.abs() <= rho.mass() + 1e-12));
}

#[test]
fn zero_step_is_identity() {
    let rho = GridDensity::project(&gaussian(1.0), Grid1D::symmetric(8.0, 256).unwrap()).unwrap();
    let next = step(&rho, &bcm(0.1), 0.5, 0.0).unwrap();
    assert_eq!(next.values, rho.values);
    assert_eq!(next.t, rho.t);
}

#[test]
fn cfl_violation_is_reported() {
    let rho = GridDensity::project(&gaussian(1.0), Grid1D::symmetric(8.0, 1024).unwrap()).unwrap();
    let err = step(&rho, &bcm(0.1), 0.5, 0.5).unwrap_err();
    assert!(matches!(err, Error::CflViolation { .. }), "{err:?}");
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn step_conserves_mass_and_positivity() {
    let grid = Grid1D::symmetric(8.0, 512).unwrap();
    let rho0 = InitialDensity::UniformBox { a: -1.0, b: 0.7 };
    let mut rho = project_initial(&rho0, grid).unwrap();
    let rk = bcm(0.05);
    let m0 = rho.mass();
    for _ in 0..200 {
        rho = step(&rho, &rk, 0.3, 0.005).unwrap();
        assert!((rho.mass() - m0).abs() < 1e-12);
        assert!(rho.min() >= -1e-14);
    }
}

#[test]
fn symmetry_is_preserved_without_noise() {
    let grid = Grid1D::symmetric(4.0, 400).unwrap();
    let rho = GridDensity::project(&gaussian(0.7), grid).unwrap();
    let m = grid.cells();
    let mut state = rho;
    for _ in 0..20 {
        state = step(&state, &uniform(0.05), 0.0, 0.004).unwrap();
    }
    for j in 0..m / 2 {
        assert!((state.values[j] - state.values[m - 1 - j]).abs() < 1e-13, "j={j}");
    }
}

/// Exact cell averages of `N(0, var)`.
fn heat_cells(grid: Grid1D, var: f64) -> Vec<f64> {
    let exact = gaussian(var.sqrt());
    (0..grid.cells())
        .map(|j| exact.prob_between(grid.face(j), grid.face(j + 1)) / grid.dx())
        .collect()
}

#[test]
fn single_heat_step_error_is_dt_dx2() {
    // dt small enough that the O(dt^2) time error sits far below the spatial one
    let (sigma, dt) = (1.0, 1e-6);
    let mut errors = Vec::new();
    for m in [256, 512, 1024] {
        let grid = Grid1D::symmetric(8.0, m).unwrap();
        let rho = GridDensity::project(&gaussian(1.0), grid).unwrap();
        let next = step(&rho, &zero(), sigma, dt).unwrap();
        let exact = heat_cells(grid, 1.0 + sigma * sigma * dt);
        let err = next.values.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= dt * grid.dx().powi(2), "M={m}: {err:e}");
        errors.push(err);
    }
    assert!(errors[0] / errors[1] > 3.0 && errors[1] / errors[2] > 3.0, "{errors:?}");
}

#[test]
fn heat_variance_grows_linearly() {
    let (s0, sigma, t) = (0.8, 0.7, 1.0);
    let grid = Grid1D::symmetric(8.0, 1024).unwrap();
    let sol = solve(&gaussian(s0), &zero(), sigma, t, grid, 0.01, 10, SolveOptions::default()).unwrap();
    let rho = sol.final_state();
    let var: f64 = (0..grid.cells()).map(|j| grid.dx() * grid.center(j).powi(2) * rho.values[j]).sum();
    let expected = s0 * s0 + sigma * sigma * t;
    assert!((var / expected - 1.0).abs() < 0.01, "{var} vs {expected}");
}

#[test]
fn zero_horizon_returns_projection() {
    let grid = Grid1D::symmetric(8.0, 256).unwrap();
    let sol = solve(&gaussian(1.0), &bcm(0.1), 0.5, 0.0, grid, 0.01, 1, SolveOptions::default()).unwrap();
    assert_eq!(sol.snapshots.len(), 1);
    assert_eq!(sol.snapshots[0].values, GridDensity::project(&gaussian(1.0), grid).unwrap().values);
}

#[test]
fn snapshots_cover_the_horizon() {
    let grid = Grid1D::symmetric(8.0, 256).unwrap();
    let sol = solve(&gaussian(1.0), &bcm(0.1), 0.5, 0.33, grid, 0.01, 4, SolveOptions::default()).unwrap();
    let times = sol.times();
    assert_eq!(times[0], 0.0);
    assert!((times[times.len() - 1] - 0.33).abs() < 1e-12);
    assert!(times.windows(2).all(|w| w[1] > w[0]));
    for d in &sol.diagnostics {
        assert!((d.mass - 1.0).abs() <= TOL_MASS);
        assert!(d.min >= -1e-14);
        assert!(d.drift_sup <= 1.0 + 1e-12);
    }
}

#[test]
fn narrow_domain_is_rejected() {
    let grid = Grid1D::symmetric(2.5, 256).unwrap();
    let err = solve(&gaussian(1.0), &bcm(0.1), 0.5, 1.0, grid, 0.01, 10, SolveOptions::default()).unwrap_err();
    assert!(matches!(err, Error::DomainTooSmall { .. }), "{err:?}");
}

#[test]
fn diagnostics_examples() {
    let grid = Grid1D::symmetric(8.0, 2048).unwrap();
    let sol = solve(&gaussian(1.0), &zero(), 0.5, 0.0, grid, 0.01, 1, SolveOptions::default()).unwrap();
    let d = &sol.diagnostics[0];
    assert!((d.abs_moment - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-4, "{}", d.abs_moment);
    assert!((d.mass - 1.0).abs() < 1e-12);

    let grid = Grid1D::symmetric(2.0, 64).unwrap();
    let sol = solve(&InitialDensity::UniformBox { a: -0.5, b: 0.5 }, &zero(), 0.0, 0.0, grid, 0.01, 1, SolveOptions::default()).unwrap();
    let d = &sol.diagnostics[0];
    assert!((d.linf - 1.0).abs() < 1e-12);
    assert!((d.l2 - 1.0).abs() < 1e-12);
    assert!((d.lp(4).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn weak_gap_examples() {
    let grid = Grid1D::symmetric(8.0, 512).unwrap();
    let a = solve(&gaussian(1.0), &bcm(0.2), 0.5, 0.5, grid, 0.01, 5, SolveOptions::default()).unwrap();
    let b = solve(&gaussian(1.0), &bcm(0.05), 0.5, 0.5, grid, 0.01, 5, SolveOptions::default()).unwrap();
    assert_eq!(weak_convergence_gap(&a, &a, f64::tanh).unwrap(), 0.0);
    assert!(weak_convergence_gap(&a, &b, |_| 1.0).unwrap() <= 2.0 * TOL_MASS);
    assert!(weak_convergence_gap(&a, &b, f64::tanh).unwrap() > 0.0);

    let other = Grid1D::symmetric(8.0, 256).unwrap();
    let c = solve(&gaussian(1.0), &bcm(0.2), 0.5, 0.5, other, 0.01, 5, SolveOptions::default()).unwrap();
    assert!(matches!(weak_convergence_gap(&a, &c, f64::tanh), Err(Error::GridMismatch(_))));
    let d = solve(&gaussian(1.0), &bcm(0.2), 0.5, 0.5, grid, 0.01, 10, SolveOptions::default()).unwrap();
    assert!(matches!(weak_convergence_gap(&a, &d, f64::tanh), Err(Error::GridMismatch(_))));
}

/// Restricts a fine solution to a grid coarser by `factor` by averaging.
fn coarsen(values: &[f64], factor: usize) -> Vec<f64> {
    values.chunks(factor).map(|c| c.iter().sum::<f64>() / factor as f64).collect()
}

#[test]
fn grid_refinement_is_at_least_first_order() {
    for flux in [FluxScheme::Upwind, FluxScheme::Muscl] {
        let options = SolveOptions {
            flux,
            ..SolveOptions::default()
        };
        let run = |m: usize| {
            let grid = Grid1D::symmetric(8.0, m).unwrap();
            solve(&gaussian(1.0), &bcm(0.2), 0.5, 0.5, grid, 2e-3, 250, options).unwrap()
        };
        let finest = run(4096);
        let mut errors = Vec::new();
        for m in [256, 512, 1024] {
            let sol = run(m);
            let reference = coarsen(&finest.final_state().values, 4096 / m);
            let dx = 16.0 / m as f64;
            errors.push(sol.final_state().values.iter().zip(&reference).map(|(a, b)| dx * (a - b).abs()).sum::<f64>());
        }
        let ratios = [errors[0] / errors[1], errors[1] / errors[2]];
        assert!(ratios.iter().all(|&r| r >= 1.8), "{flux:?}: errors {errors:?}");
    }
}

#[test]
fn solver_reports_its_cfl_limit() {
    let grid = Grid1D::symmetric(8.0, 1024).unwrap();
    let rk = bcm(0.1);
    let solver = PdeSolver::new(&rk, grid, 0.5, SolveOptions::default()).unwrap();
    let rho = GridDensity::project(&gaussian(1.0), grid).unwrap();
    let drift = solver.drift(&rho);
    let limit = solver.max_dt(&drift);
    let speed = drift.iter().map(|b| b.abs()).fold(0.0, f64::max);
    assert!((limit - 0.5 * grid.dx() / speed).abs() < 1e-15);
    assert!(solver.step(&rho, &drift, limit).is_ok());
    assert!(solver.step(&rho, &drift, 1.01 * limit).is_err());
}
