//! Acceptance suite: one test per contracted criterion, each printing a
//! PASS line with the measured quantities (run with `--nocapture` to see
//! them).
#![allow(clippy::needless_range_loop)]

use std::sync::Arc;

use muspar_core::diagnostics::{build_interpolants, energy_audit};
use muspar_core::fem::{FemSpace, FieldView, Mesh, NodalField, QuadratureRule};
use muspar_core::harness::{
    brute_force_oracle, finite_difference_jacobian, heat_exp_sine, temporal_order_study,
};
use muspar_core::musielak::{
    luxemburg_norm, young_conjugate, young_inequality_check, MusielakFunction,
};
use muspar_core::problem::{library, Initial, ProblemSpec, Source};
use muspar_core::stepper::{
    run, solve_step, uniqueness_probe, InitialState, SolverOpts, TimeGrid,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ORIGIN: [f64; 2] = [0.0, 0.0];

fn one_dof_space() -> Arc<FemSpace> {
    FemSpace::build(1, 2).unwrap()
}

#[test]
fn criterion_1_closed_form_heat_steps() {
    let space = one_dof_space();
    let u_prev = space.function_from_coeffs(vec![1.0]).unwrap();
    let opts = SolverOpts::default();
    let mut worst = 0.0f64;
    for tau in [0.1, 0.05, 0.01] {
        let (u, _) = solve_step(&library::heat_limit(), &u_prev, tau, tau, &opts).unwrap();
        let expect = 1.0 / (1.0 + 12.0 * tau);
        worst = worst.max((u.coeffs()[0] - expect).abs());
        assert!(
            (u.coeffs()[0] - expect).abs() <= 1e-12,
            "heat step tau={tau}: {} vs {expect}",
            u.coeffs()[0]
        );
        let (v, _) = solve_step(&library::heat_limit_scaled_b(), &u_prev, tau, tau, &opts).unwrap();
        let expect_b = 1.0 / (1.0 + 8.0 * tau);
        worst = worst.max((v.coeffs()[0] - expect_b).abs());
        assert!(
            (v.coeffs()[0] - expect_b).abs() <= 1e-12,
            "scaled-b step tau={tau}: {} vs {expect_b}",
            v.coeffs()[0]
        );
    }
    println!("criterion 1 (closed-form one-node steps, both b variants): PASS, max deviation {worst:.3e}");
}

#[test]
fn criterion_2_first_order_in_time() {
    let case = heat_exp_sine(1);
    let report = temporal_order_study(&case, 512, &[8, 16, 32, 64], &SolverOpts::default())
        .expect("study must complete");
    assert!(!report.degenerate);
    for w in report.rows.windows(2) {
        assert!(
            w[1].err_l1 < w[0].err_l1,
            "L1 errors must decrease monotonically: {} -> {}",
            w[0].err_l1,
            w[1].err_l1
        );
    }
    let order = report.fitted_order.expect("fit exists");
    assert!(order >= 0.9, "fitted temporal order {order} < 0.9");
    println!(
        "criterion 2 (temporal order on decaying sine, m=512, N=8..64): PASS, fitted order {order:.4}"
    );
}

#[test]
fn criterion_3_energy_audit_across_models_and_grids() {
    let matrix = [(4usize, 8usize), (8, 16), (16, 32)];
    let mut audited = 0;
    for (name, base) in library::all() {
        for &(steps, m) in &matrix {
            let spec = base.clone().with_initial(Initial::SinePi { dim: 1 });
            let space = FemSpace::build(1, m).unwrap();
            let grid = TimeGrid::new(0.4, steps).unwrap();
            let traj = run(&spec, &space, &grid, InitialState::FromInitialData, &SolverOpts::default())
                .unwrap_or_else(|e| panic!("{name} (N={steps}, m={m}): {e}"));
            let audit = energy_audit(&traj, &spec, 0.5).unwrap();
            assert!(audit.margin > 0.0, "{name}: margin {}", audit.margin);
            assert!(
                audit.verdict,
                "{name} (N={steps}, m={m}): audit failed, rows {:?}",
                audit.rows
            );
            audited += 1;
        }
    }
    // driven run (nonzero source) on the heat limit
    let case = heat_exp_sine(1);
    let space = FemSpace::build(1, 16).unwrap();
    let grid = TimeGrid::new(1.0, 8).unwrap();
    let traj = run(&case.spec, &space, &grid, InitialState::FromInitialData, &SolverOpts::default())
        .unwrap();
    let audit = energy_audit(&traj, &case.spec, 0.5).unwrap();
    assert!(audit.verdict, "driven heat audit failed");
    audited += 1;
    // two-dimensional run
    let spec2 = library::heat_limit().with_initial(Initial::SinePi { dim: 2 });
    let space2 = FemSpace::build(2, 4).unwrap();
    let grid2 = TimeGrid::new(0.2, 4).unwrap();
    let traj2 = run(&spec2, &space2, &grid2, InitialState::FromInitialData, &SolverOpts::default())
        .unwrap();
    let audit2 = energy_audit(&traj2, &spec2, 0.5).unwrap();
    assert!(audit2.verdict, "2d heat audit failed");
    audited += 1;
    println!("criterion 3 (energy audit, eps = 0.5): PASS on {audited} (model, N, m) runs");
}

#[test]
fn criterion_4_uniqueness_witness() {
    let opts = SolverOpts::default(); // tol 1e-10, contract is 10 * tol
    let mut worst = 0.0f64;
    for (name, base) in [
        ("p-laplacian", library::p_laplacian()),
        ("lipschitz-convection", library::lipschitz_convection()),
    ] {
        let spec = base.with_initial(Initial::SinePi { dim: 1 });
        let space = FemSpace::build(1, 16).unwrap();
        let u_prev = space
            .restrict(|x| (std::f64::consts::PI * x[0]).sin(), 1e-9)
            .unwrap();
        let mut shifted = u_prev.clone();
        for c in shifted.coeffs_mut() {
            *c = 0.7 - 0.4 * *c;
        }
        let guesses = vec![space.zero_function(), u_prev.clone(), shifted];
        let d = uniqueness_probe(&spec, &u_prev, 0.05, 0.05, &guesses, &opts).unwrap();
        worst = worst.max(d);
        assert!(d <= 1e-9, "{name}: probe distance {d}");
    }
    println!("criterion 4 (uniqueness probe, 3 iterates per nonlinear model): PASS, max distance {worst:.3e}");
}

/// Exact integral of |u|^p over one segment with u linear: the antiderivative
/// of |u|^p du is sign(u) |u|^{p+1} / (p+1).
fn exact_abs_power_integral(mesh: &Mesh, values: &[f64], p: f64) -> f64 {
    let mut total = 0.0;
    for c in 0..mesh.n_cells() {
        let ids = mesh.cell(c);
        let (va, vb) = (values[ids[0]], values[ids[1]]);
        let h = mesh.cell_geom(c).measure;
        if (vb - va).abs() < 1e-14 {
            total += (0.5 * (va + vb)).abs().powf(p) * h;
        } else {
            let g = |v: f64| v.signum() * v.abs().powf(p + 1.0) / (p + 1.0);
            total += (g(vb) - g(va)) / ((vb - va) / h);
        }
    }
    total
}

#[test]
fn criterion_5_musielak_kit() {
    // (a) Luxemburg norm against the closed-form p-norm on random P1 fields
    let mesh = Mesh::unit(1, 16).unwrap();
    let quad = QuadratureRule::gauss_segment(24);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_norm = 0.0f64;
    for p in [1.5, 2.0, 3.0] {
        let phi = MusielakFunction::power(p).unwrap();
        for _ in 0..20 {
            let values: Vec<f64> = (0..mesh.n_vertices())
                .map(|_| rng.random_range(-2.0..2.0))
                .collect();
            let field = NodalField::from_values(values);
            let lux =
                luxemburg_norm(&phi, &mesh, FieldView::Nodal(field.values()), &quad, 1e-12)
                    .unwrap();
            let pnorm = exact_abs_power_integral(&mesh, field.values(), p).powf(1.0 / p);
            let dev = (lux - pnorm).abs();
            worst_norm = worst_norm.max(dev);
            assert!(dev <= 1e-8, "p={p}: luxemburg {lux} vs p-norm {pnorm}");
        }
    }
    // (b) numeric conjugate against the power-conjugate family
    let mut worst_conj = 0.0f64;
    for p in [1.5, 2.0, 3.0] {
        let q = p / (p - 1.0);
        let phi = MusielakFunction::power_scaled(p, 1.0 / p).unwrap();
        for k in 0..25 {
            let s = 0.1 + (10.0 - 0.1) * k as f64 / 24.0;
            let numeric = young_conjugate(&phi, &ORIGIN, s).unwrap();
            let exact = s.powf(q) / q;
            let rel = (numeric - exact).abs() / exact;
            worst_conj = worst_conj.max(rel);
            assert!(rel <= 1e-6, "p={p} s={s}: {numeric} vs {exact}");
        }
    }
    // (c) Young inequality residual on 10^4 samples per shipped function
    let mut worst_young = f64::INFINITY;
    for (_, spec) in library::all() {
        let phi = spec.phi;
        for _ in 0..10_000 {
            let x = [rng.random_range(0.0..1.0), 0.0];
            let s = rng.random_range(0.0..30.0f64);
            let t = rng.random_range(0.0..30.0f64);
            let r = young_inequality_check(&phi, &x, s, t).unwrap();
            worst_young = worst_young.min(r);
            assert!(r >= -1e-9, "residual {r} at s={s}, t={t}");
        }
    }
    println!(
        "criterion 5 (norm/conjugate/Young kit): PASS, worst p-norm deviation {worst_norm:.3e}, \
         worst conjugate rel. error {worst_conj:.3e}, smallest Young residual {worst_young:.3e}"
    );
}

#[test]
fn criterion_6_oracle_equivalence_on_tiny_instances() {
    let models = library::all();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let opts = SolverOpts {
        tol: 1e-12,
        ..SolverOpts::default()
    };
    let mut worst = 0.0f64;
    for k in 0..50 {
        let (name, base) = &models[k % models.len()];
        let m = 2 + k % 3; // 1..=3 unknowns
        let space = FemSpace::build(1, m).unwrap();
        let coeffs: Vec<f64> = (0..space.n_dofs())
            .map(|_| rng.random_range(-1.5..1.5))
            .collect();
        let u_prev = space.function_from_coeffs(coeffs).unwrap();
        let tau = rng.random_range(0.02..0.3);
        let f_val = rng.random_range(-1.0..1.0);
        let spec = base.clone().with_source(Source::Constant { value: f_val });
        let oracle = brute_force_oracle(&spec, &space, &u_prev, tau, tau, 21)
            .unwrap_or_else(|e| panic!("instance {k} ({name}): {e}"));
        let (newton, _) = solve_step(&spec, &u_prev, tau, tau, &opts).unwrap();
        let dev = oracle
            .coeffs()
            .iter()
            .zip(newton.coeffs())
            .fold(0.0f64, |mx, (a, b)| mx.max((a - b).abs()));
        worst = worst.max(dev);
        assert!(dev <= 1e-8, "instance {k} ({name}): deviation {dev}");
    }
    println!("criterion 6 (brute-force oracle vs Newton, 50 instances): PASS, max deviation {worst:.3e}");
}

#[test]
fn criterion_7_jacobian_against_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst = 0.0f64;
    for (name, spec) in library::all() {
        let space = FemSpace::build(1, 8).unwrap();
        for state in 0..20 {
            let coeffs: Vec<f64> = (0..space.n_dofs())
                .map(|_| rng.random_range(-2.0..2.0))
                .collect();
            let u = space.function_from_coeffs(coeffs).unwrap();
            let u_prev = space.zero_function();
            let tau = rng.random_range(0.02..0.5);
            let jac = muspar_core::fem::assemble_jacobian(&spec, &u, tau).unwrap();
            let fd = finite_difference_jacobian(&spec, &u, &u_prev, tau, tau).unwrap();
            let scale = jac.max_abs();
            let mut dev = 0.0f64;
            for i in 0..space.n_dofs() {
                for j in 0..space.n_dofs() {
                    dev = dev.max((jac.get(i, j) - fd[i][j]).abs() / scale);
                }
            }
            worst = worst.max(dev);
            assert!(dev < 1e-5, "{name} state {state}: relative deviation {dev}");
        }
    }
    println!("criterion 7 (Jacobian vs central differences, 20 states/model): PASS, max relative deviation {worst:.3e}");
}

fn gap_of_heat_run(space: &Arc<FemSpace>, spec: &ProblemSpec, steps: usize) -> f64 {
    let grid = TimeGrid::new(0.5, steps).unwrap();
    let traj = run(spec, space, &grid, InitialState::FromInitialData, &SolverOpts::default())
        .unwrap();
    build_interpolants(&traj, spec).gap_sq_l2q()
}

#[test]
fn criterion_8_interpolant_gap_identity_and_decay() {
    // identity on a genuinely nonlinear model
    let spec = library::p_laplacian().with_initial(Initial::SinePi { dim: 1 });
    let space = FemSpace::build(1, 16).unwrap();
    let grid = TimeGrid::new(0.4, 8).unwrap();
    let traj = run(&spec, &space, &grid, InitialState::FromInitialData, &SolverOpts::default())
        .unwrap();
    let interp = build_interpolants(&traj, &spec);
    let gap = interp.gap_sq_l2q();
    let identity = interp.jump_sum_identity();
    let rel = (gap - identity).abs() / identity;
    assert!(rel <= 1e-10, "identity deviation {rel}");
    // decay: doubling N at least halves the squared gap on the heat limit
    let heat = library::heat_limit();
    let space = FemSpace::build(1, 32).unwrap();
    let g8 = gap_of_heat_run(&space, &heat, 8);
    let g16 = gap_of_heat_run(&space, &heat, 16);
    assert!(
        g16 <= 0.5 * g8,
        "squared gap must at least halve: {g8} -> {g16}"
    );
    println!(
        "criterion 8 (interpolant gap identity + decay): PASS, identity rel. deviation {rel:.3e}, \
         gap ratio {:.4}",
        g16 / g8
    );
}
