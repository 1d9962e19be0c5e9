use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::grid::{divergence, gradient, make_grid, Bc, GridSpec, SideBcs};
use crate::linalg::{cell_laplacian, CsrMatrix};

fn square(n: usize) -> Grid {
    make_grid(GridSpec::unit_square(n)).unwrap()
}

fn shear_bc() -> BoundarySpec {
    BoundarySpec {
        phi: SideBcs::periodic_x(Bc::Neumann, Bc::Neumann),
        mu: SideBcs::periodic_x(Bc::Neumann, Bc::Neumann),
        c: SideBcs::periodic_x(Bc::Neumann, Bc::Neumann),
        vel: SideBcs::periodic_x(Bc::MovingWall(-1.0), Bc::MovingWall(1.0)),
        p: SideBcs::periodic_x(Bc::Neumann, Bc::Neumann),
    }
}

fn drop_state(g: Grid, bc: &BoundarySpec, params: &PhysicalParams) -> State {
    let eps = params.epsilon;
    let phi = ScalarField::from_fn(g, |x, y| {
        let r = ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt();
        ((0.25 - r) / (2f64.sqrt() * eps)).tanh()
    });
    let c = ScalarField::from_fn(g, |_, y| 0.6 * y + 0.2);
    let vel = FaceVectorField::from_fns(
        g,
        |x, y| -0.25 * (PI * x).sin().powi(2) * (2.0 * PI * y).sin(),
        |x, y| 0.25 * (PI * y).sin().powi(2) * (2.0 * PI * x).sin(),
    );
    State::initial(phi, c, vel, params, bc).unwrap()
}

#[test]
fn pure_phase_at_rest_is_a_fixed_point_of_step1() {
    let g = square(8);
    let bc = BoundarySpec::closed_box();
    let params = PhysicalParams::default();
    let s = State::initial(
        ScalarField::constant(g, 1.0),
        ScalarField::constant(g, 1.0),
        FaceVectorField::zeros(g),
        &params,
        &bc,
    )
    .unwrap();
    let (phi, mu, u) = step1_phase_velocity(&s, &params, &SolverConfig::default(), &bc).unwrap();
    assert!(phi.data.iter().all(|&v| (v - 1.0).abs() < 1e-14));
    assert!(mu.max_abs() < 1e-12);
    assert!(u.max_abs() < 1e-14);
}

#[test]
fn couette_flow_is_a_fixed_point() {
    let g = square(16);
    let bc = shear_bc();
    let params = PhysicalParams { re: 100.0, ..Default::default() };
    let s = State::initial(
        ScalarField::constant(g, 1.0),
        ScalarField::constant(g, 0.5),
        FaceVectorField::from_fns(g, |_, y| 2.0 * y - 1.0, |_, _| 0.0),
        &params,
        &bc,
    )
    .unwrap();
    let cfg = SolverConfig { dt: 1e-2, lin_tol: 1e-13, ..Default::default() };
    let (_, _, u) = step1_phase_velocity(&s, &params, &cfg, &bc).unwrap();
    let diff = u.zip_map(&s.vel, |a, b| a - b).max_abs();
    assert!(diff < 1e-11, "{diff}");
    let next = advance(&s, &params, &cfg, &bc).unwrap();
    assert!(next.vel.zip_map(&s.vel, |a, b| a - b).max_abs() < 1e-11);
}

#[test]
fn quiescent_state_is_steady() {
    let g = square(8);
    let bc = BoundarySpec::closed_box();
    let params = PhysicalParams::default();
    let s = State::initial(
        ScalarField::constant(g, 1.0),
        ScalarField::constant(g, 1.0),
        FaceVectorField::zeros(g),
        &params,
        &bc,
    )
    .unwrap();
    let cfg = SolverConfig { dt: 0.1, ..Default::default() };
    let next = advance(&s, &params, &cfg, &bc).unwrap();
    assert_eq!(next.n, 1);
    assert!((next.t - 0.1).abs() < 1e-16);
    assert!(next.phi.zip_map(&s.phi, |a, b| a - b).max_abs() < 1e-14);
    assert!(next.c.zip_map(&s.c, |a, b| a - b).max_abs() < 1e-14);
    assert!(next.vel.max_abs() < 1e-14);
    assert!(next.p.max_abs() < 1e-12);
}

#[test]
fn constant_concentration_is_steady() {
    let g = square(12);
    let bc = BoundarySpec::closed_box();
    let params = PhysicalParams { epsilon: 0.1, ..Default::default() };
    let phi = ScalarField::from_fn(g, |x, _| ((x - 0.5) / 0.14).tanh());
    let s = State::initial(phi.clone(), ScalarField::constant(g, 0.6), FaceVectorField::zeros(g), &params, &bc)
        .unwrap();
    for mode in [Step3Mode::LinearizedFlux, Step3Mode::EntropyFlux] {
        let cfg = SolverConfig { dt: 0.05, step3_mode: mode, ..Default::default() };
        let c = step3_concentration(&s, &phi, &s.vel, &params, &cfg, &bc).unwrap();
        assert!(c.data.iter().all(|&v| (v - 0.6).abs() < 1e-13));
    }
}

#[test]
fn cosine_mode_decays_by_discrete_eigenvalue() {
    let g = square(32);
    let bc = BoundarySpec::all_periodic();
    let params = PhysicalParams { pe: 1.0, d_plus: 1.0, ..Default::default() };
    let c0 = ScalarField::from_fn(g, |x, _| 1.0 + 0.1 * (2.0 * PI * x).cos());
    let s = State::initial(ScalarField::constant(g, 1.0), c0.clone(), FaceVectorField::zeros(g), &params, &bc)
        .unwrap();
    let dt = 1e-3;
    let cfg = SolverConfig { dt, step3_mode: Step3Mode::LinearizedFlux, lin_tol: 1e-13, ..Default::default() };
    let c1 = step3_concentration(&s, &s.phi, &s.vel, &params, &cfg, &bc).unwrap();
    let h = g.hx;
    let lambda = 4.0 / (h * h) * (PI * h).sin().powi(2);
    let factor = 1.0 / (1.0 + dt * lambda / params.pe);
    for k in 0..c1.data.len() {
        let expected = 1.0 + (c0.data[k] - 1.0) * factor;
        assert!((c1.data[k] - expected).abs() < 1e-12);
    }
}

#[test]
fn projection_is_identity_on_solenoidal_fields() {
    let g = square(32);
    let bc = BoundarySpec::all_periodic();
    // discrete curl of a cell-corner stream function is exactly solenoidal
    let psi = |x: f64, y: f64| (2.0 * PI * x).sin() * (2.0 * PI * y).cos();
    let mut u = FaceVectorField::zeros(g);
    for j in 0..g.ny {
        for i in 0..=g.nx {
            let (x, y0, y1) = (g.xf(i), g.yf(j), g.yf(j + 1));
            u.u[j * (g.nx + 1) + i] = (psi(x, y1) - psi(x, y0)) / g.hy;
        }
    }
    for j in 0..=g.ny {
        for i in 0..g.nx {
            let (y, x0, x1) = (g.yf(j), g.xf(i), g.xf(i + 1));
            u.v[j * g.nx + i] = -(psi(x1, y) - psi(x0, y)) / g.hx;
        }
    }
    assert!(divergence(&u).max_abs() < 1e-10);
    let p0 = ScalarField::from_fn(g, |x, y| (x - 0.5) * (y - 0.5));
    let cfg = SolverConfig::default();
    let (u1, p1) = step2_projection(&u, &p0, 1.0, &cfg, &bc).unwrap();
    assert!(u1.zip_map(&u, |a, b| a - b).max_abs() < 1e-10);
    let mut p_expected = p0.clone();
    p_expected.subtract_mean();
    assert!(p1.zip_map(&p_expected, |a, b| a - b).max_abs() < 1e-10);
}

#[test]
fn projection_removes_gradients() {
    let g = square(32);
    let bc = BoundarySpec::all_periodic();
    let f = ScalarField::from_fn(g, |x, y| (2.0 * PI * x).cos() * (2.0 * PI * y).cos());
    let u = gradient(&f, &bc.p);
    let cfg = SolverConfig { lin_tol: 1e-12, ..Default::default() };
    let (u1, _) = step2_projection(&u, &ScalarField::zeros(g), 1.0, &cfg, &bc).unwrap();
    assert!(u1.max_abs() < 1e-10 * u.max_abs(), "{}", u1.max_abs());
}

#[test]
fn projection_of_random_fields_is_divergence_free() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for bc in [BoundarySpec::all_periodic(), BoundarySpec::closed_box(), shear_bc()] {
        let g = square(24);
        let layout = VelocityLayout::new(g, &bc.vel);
        let x: Vec<f64> = (0..layout.n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u = layout.scatter(&x);
        let cfg = SolverConfig { lin_tol: 1e-10, ..Default::default() };
        let (u1, _) = step2_projection(&u, &ScalarField::zeros(g), 1.0, &cfg, &bc).unwrap();
        let d = divergence(&u1).max_abs();
        assert!(d <= 1e-8, "{d}");
    }
}

#[test]
fn advance_conserves_volume_and_mass() {
    let g = square(32);
    for bc in [BoundarySpec::closed_box(), BoundarySpec::all_periodic()] {
        let params = PhysicalParams { epsilon: 0.04, mobility: 0.01, re: 10.0, ..Default::default() };
        let mut s = drop_state(g, &bc, &params);
        let (v0, m0) = (s.phi.integral(), s.c.integral());
        let cfg = SolverConfig { dt: 5e-3, ..Default::default() };
        let mut st = Stepper::new(g, params, cfg, bc).unwrap();
        for _ in 0..5 {
            let (next, stats) = st.advance(&s).unwrap();
            assert!(stats.div_projected <= 1e-8, "{}", stats.div_projected);
            s = next;
        }
        assert!((s.phi.integral() - v0).abs() < 1e-10);
        assert!((s.c.integral() - m0).abs() < 1e-10);
    }
}

#[test]
fn flux_modes_agree_on_smooth_data() {
    // difference between modes is O(h^2): halving h reduces it ~4x
    let mut diffs = Vec::new();
    for n in [16, 32] {
        let g = square(n);
        let bc = BoundarySpec::all_periodic();
        let params = PhysicalParams { epsilon: 0.1, ..Default::default() };
        let phi = ScalarField::from_fn(g, |x, y| 0.5 * (2.0 * PI * x).sin() * (2.0 * PI * y).cos());
        let c = ScalarField::from_fn(g, |x, y| 1.0 + 0.5 * (2.0 * PI * (x + y)).sin());
        let s = State::initial(phi.clone(), c, FaceVectorField::zeros(g), &params, &bc).unwrap();
        let run = |mode| {
            let cfg = SolverConfig { dt: 1e-3, step3_mode: mode, ..Default::default() };
            step3_concentration(&s, &phi, &s.vel, &params, &cfg, &bc).unwrap()
        };
        let a = run(Step3Mode::LinearizedFlux);
        let b = run(Step3Mode::EntropyFlux);
        diffs.push(a.zip_map(&b, |p, q| p - q).max_abs());
    }
    assert!(diffs[0] < 1e-3);
    assert!(diffs[0] / diffs[1] > 3.0, "{diffs:?}");
}

#[test]
fn block_gauss_cap_reports_nonconvergence() {
    let g = square(16);
    let bc = BoundarySpec::all_periodic();
    let params = PhysicalParams { epsilon: 0.08, mobility: 0.02, ..Default::default() };
    let s = drop_state(g, &bc, &params);
    let cfg = SolverConfig { dt: 1e-2, gauss_max_iters: 1, ..Default::default() };
    match step1_phase_velocity(&s, &params, &cfg, &bc) {
        Err(Error::NonConvergence { iterations: 1, residual, .. }) => assert!(residual > cfg.gauss_tol),
        other => panic!("expected nonconvergence, got {other:?}"),
    }
}

#[test]
fn invalid_configuration_rejected() {
    assert!(SolverConfig { dt: 0.0, ..Default::default() }.validate().is_err());
    assert!(SolverConfig { lin_tol: 1.0, ..Default::default() }.validate().is_err());
    assert!(SolverConfig { gauss_max_iters: 0, ..Default::default() }.validate().is_err());
    assert!(SolverConfig::default().validate().is_ok());
}

#[test]
fn solve_linear_identity() {
    let sys = LinearSystem {
        matrix: CsrMatrix::identity(5),
        rhs: vec![1.0, -2.0, 3.0, 0.5, 0.0],
        layout: UnknownLayout::Plain { n: 5 },
        symmetric: true,
        constant_nullspace: false,
    };
    let x = solve_linear(&sys, &SolverConfig::default()).unwrap();
    for (a, b) in x.iter().zip(&sys.rhs) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn solve_linear_periodic_poisson_sine() {
    let n = 64;
    let g = make_grid(GridSpec::line(n, 0.0, 1.0)).unwrap();
    let a = cell_laplacian(&g, &SideBcs::periodic());
    let rhs: Vec<f64> = (0..n).map(|i| (2.0 * PI * g.xc(i)).sin()).collect();
    let sys = LinearSystem {
        matrix: a,
        rhs: rhs.clone(),
        layout: UnknownLayout::Cells { nx: n, ny: 1 },
        symmetric: true,
        constant_nullspace: true,
    };
    let cfg = SolverConfig { lin_tol: 1e-13, ..Default::default() };
    let x = solve_linear(&sys, &cfg).unwrap();
    let h = g.hx;
    let lambda = 4.0 / (h * h) * (PI * h).sin().powi(2);
    for (xi, ri) in x.iter().zip(&rhs) {
        assert!((xi + ri / lambda).abs() < 1e-12);
    }
}

#[test]
fn solve_linear_neumann_poisson_random_rhs() {
    let g = square(32);
    let a = cell_laplacian(&g, &SideBcs::neumann());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut rhs: Vec<f64> = (0..g.cell_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let m = rhs.iter().sum::<f64>() / rhs.len() as f64;
    rhs.iter_mut().for_each(|v| *v -= m);
    let sys = LinearSystem {
        matrix: a.clone(),
        rhs: rhs.clone(),
        layout: UnknownLayout::Cells { nx: 32, ny: 32 },
        symmetric: true,
        constant_nullspace: true,
    };
    let cfg = SolverConfig { lin_tol: 1e-10, ..Default::default() };
    let x = solve_linear(&sys, &cfg).unwrap();
    let ax = a.mul(&x);
    let r: f64 = ax.iter().zip(&rhs).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let b: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(r / b <= 1e-10);
}

#[test]
fn solve_linear_rejects_bad_dimensions() {
    let sys = LinearSystem {
        matrix: CsrMatrix::identity(3),
        rhs: vec![1.0; 2],
        layout: UnknownLayout::Plain { n: 3 },
        symmetric: false,
        constant_nullspace: false,
    };
    assert!(solve_linear(&sys, &SolverConfig::default()).is_err());
}
