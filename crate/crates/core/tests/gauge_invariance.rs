//! Trajectory-level gauge properties: the invariant functionals must not
//! move under time-indexed thermodynamic-group actions on the states, nor
//! under block-diagonal gauge transformations of the eigenframes, and the
//! covariant derivative must satisfy its spectral identity at second order.

mod common;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::random_smooth_trajectory;
use thermogauge_core::dynamics::{
    assemble_trajectory, build_family, HamiltonianFamily, HamiltonianFamilySpec, TrajectoryGrid,
};
use thermogauge_core::functionals::{
    energy_change, invariant_heat, invariant_work, work_spectral_oracle,
};
use thermogauge_core::geometry::{fitted_order, frame_gauge_transform};
use thermogauge_core::operators::{
    expectation, pauli_z, ComplexMatrix, DensityMatrix, UnitaryMatrix,
};
use thermogauge_core::spectral::{
    covariant_derivative, eigendecompose, in_frame_diagonal, DEFAULT_CLUSTER_TOL,
};
use thermogauge_core::thermo_group::{act, derive_seed, gauge_entropy, thermodynamic_group};

/// Apply an independently Haar-sampled group element at every grid point.
fn haar_transformed_states(
    traj: &TrajectoryGrid,
    seed: u64,
    path: u64,
) -> Vec<DensityMatrix> {
    (0..traj.len())
        .map(|i| {
            let frame = &traj.frames()[i];
            let group = thermodynamic_group(frame.structure(), frame).unwrap();
            let v = group.sample_haar(derive_seed(seed, path, i as u64));
            act(&v, &traj.states()[i]).unwrap()
        })
        .collect()
}

#[test]
fn functionals_are_invariant_under_haar_gauge_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(314);
    // Invariance of the discrete work integral holds up to the off-block
    // O(dt^2) residue of D_t H, which scales like tau^3 / N^2; the grid
    // below keeps it safely under the 1e-8 contract.
    let traj = random_smooth_trajectory(&mut rng, 3, 2500, 0.6);
    let last = traj.len() - 1;

    let w0 = invariant_work(&traj).unwrap();
    let q0 = invariant_heat(&traj).unwrap();
    let u0_start = expectation(&traj.states()[0], &traj.hamiltonians()[0]).unwrap();
    let u0_end = expectation(&traj.states()[last], &traj.hamiltonians()[last]).unwrap();
    let s0_start = gauge_entropy(&traj.states()[0], traj.frames()[0].structure()).unwrap();
    let s0_end = gauge_entropy(&traj.states()[last], traj.frames()[last].structure()).unwrap();
    let scale = w0.abs().max(q0.abs()).max((u0_end - u0_start).abs()).max(1.0);

    for path in 0..10u64 {
        let transformed = traj
            .with_states(haar_transformed_states(&traj, 271828, path))
            .unwrap();
        let w = invariant_work(&transformed).unwrap();
        let q = invariant_heat(&transformed).unwrap();
        let u_start = expectation(&transformed.states()[0], &transformed.hamiltonians()[0]).unwrap();
        let u_end =
            expectation(&transformed.states()[last], &transformed.hamiltonians()[last]).unwrap();
        let s_start =
            gauge_entropy(&transformed.states()[0], transformed.frames()[0].structure()).unwrap();
        let s_end = gauge_entropy(
            &transformed.states()[last],
            transformed.frames()[last].structure(),
        )
        .unwrap();

        assert!((u_start - u0_start).abs() <= 1e-10 * scale, "U(0) moved");
        assert!((u_end - u0_end).abs() <= 1e-10 * scale, "U(tau) moved");
        assert!(
            (w - w0).abs() <= 1e-8 * scale,
            "work moved by {:.3e} on path {path}",
            (w - w0).abs()
        );
        assert!(
            (q - q0).abs() <= 1e-7 * scale,
            "heat moved by {:.3e} on path {path}",
            (q - q0).abs()
        );
        assert!((s_start - s0_start).abs() <= 1e-9, "S(0) moved");
        assert!((s_end - s0_end).abs() <= 1e-9, "S(tau) moved");
    }
}

#[test]
fn functionals_are_invariant_under_smooth_frame_gauge_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(1618);
    let traj = random_smooth_trajectory(&mut rng, 3, 2000, 0.8);

    let w0 = invariant_work(&traj).unwrap();
    let q0 = invariant_heat(&traj).unwrap();
    let scale = w0.abs().max(q0.abs()).max(1.0);

    // Smooth diagonal gauge path (the generic block structure here is
    // nondegenerate, so block-diagonal means diagonal phases).
    let v_path: Vec<UnitaryMatrix> = traj
        .times()
        .iter()
        .map(|&t| {
            let dim = traj.dim();
            let m = ComplexMatrix::from_diagonal(&DVector::from_iterator(
                dim,
                (0..dim).map(|k| {
                    Complex64::from_polar(1.0, (0.4 + 0.3 * k as f64) * (1.3 * t + k as f64).sin())
                }),
            ));
            UnitaryMatrix::new(m).unwrap()
        })
        .collect();

    let gauged_frames = frame_gauge_transform(traj.frames(), &v_path).unwrap();
    let gauged = traj.with_frames(gauged_frames).unwrap();

    let w = invariant_work(&gauged).unwrap();
    let q = invariant_heat(&gauged).unwrap();
    assert!(
        (w - w0).abs() <= 1e-7 * scale,
        "work moved by {:.3e} under frame gauge",
        (w - w0).abs()
    );
    assert!(
        (q - q0).abs() <= 1e-7 * scale,
        "heat moved by {:.3e} under frame gauge",
        (q - q0).abs()
    );
}

/// Max interior deviation of D_t H from u dLambda/dt u^H along a trajectory,
/// with the eigenvalue velocity supplied analytically.
fn spectral_identity_residual(traj: &TrajectoryGrid, lambda_dot: impl Fn(f64, usize) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 1..traj.len() - 1 {
        let dth = covariant_derivative(
            traj.hamiltonians(),
            &traj.potentials()[i],
            traj.dt(),
            i,
        )
        .unwrap();
        let velocities: Vec<f64> = (0..traj.dim())
            .map(|k| lambda_dot(traj.times()[i], k))
            .collect();
        let reference = in_frame_diagonal(traj.frames()[i].frame(), &velocities).unwrap();
        worst = worst.max((dth.matrix() - reference.matrix()).norm());
    }
    worst
}

#[test]
fn covariant_derivative_spectral_identity_rotating_qubit_order_two() {
    // Eigenvalues are constant: D_t H must vanish at O(dt^2).
    let spec = HamiltonianFamilySpec::new(
        HamiltonianFamily::RotatingQubit { omega: 1.0, nu: 0.3 },
        2,
    )
    .unwrap();
    let rho0 = DensityMatrix::maximally_mixed(2);
    let tau = 2.0;
    let mut steps = Vec::new();
    let mut residuals = Vec::new();
    for n in [250usize, 500, 1000] {
        let traj = assemble_trajectory(&spec, &rho0, n, tau, DEFAULT_CLUSTER_TOL).unwrap();
        steps.push(traj.dt());
        residuals.push(spectral_identity_residual(&traj, |_, _| 0.0));
    }
    let order = fitted_order(&steps, &residuals);
    assert!(
        (order - 2.0).abs() <= 0.3,
        "fitted order {order:.2}, residuals {residuals:?}"
    );
}

#[test]
fn covariant_derivative_spectral_identity_amplitude_drive_order_two() {
    // Cubic drive f(t) sigma_z: ascending eigenvalues are -f, +f (f > 0 on
    // the window), so dLambda/dt = (-f', +f').
    let coefficients = vec![1.0, 0.2, 0.1, 0.05];
    let fprime = |t: f64| 0.2 + 2.0 * 0.1 * t + 3.0 * 0.05 * t * t;
    let spec = HamiltonianFamilySpec::new(
        HamiltonianFamily::AmplitudeDrive {
            coefficients,
            direction: pauli_z(),
        },
        2,
    )
    .unwrap();
    let rho0 = DensityMatrix::maximally_mixed(2);
    let tau = 2.0;
    let mut steps = Vec::new();
    let mut residuals = Vec::new();
    for n in [250usize, 500, 1000] {
        let traj = assemble_trajectory(&spec, &rho0, n, tau, DEFAULT_CLUSTER_TOL).unwrap();
        steps.push(traj.dt());
        residuals.push(spectral_identity_residual(&traj, |t, k| {
            if k == 0 {
                -fprime(t)
            } else {
                fprime(t)
            }
        }));
    }
    let order = fitted_order(&steps, &residuals);
    assert!(
        (order - 2.0).abs() <= 0.3,
        "fitted order {order:.2}, residuals {residuals:?}"
    );
}

#[test]
fn work_oracle_agrees_on_random_smooth_trajectories() {
    let mut rng = ChaCha8Rng::seed_from_u64(42424242);
    for dim in [2usize, 3, 4] {
        let traj = random_smooth_trajectory(&mut rng, dim, 2500, 0.8);
        let w = invariant_work(&traj).unwrap();
        let oracle = work_spectral_oracle(&traj).unwrap();
        assert!(
            (w - oracle).abs() <= 1e-8 * w.abs().max(1.0),
            "d = {dim}: W = {w:.6e}, oracle = {oracle:.6e}"
        );
    }
}

#[test]
fn frame_smoothness_follows_the_drive_rate() {
    // |u_{i+1} - u_i| <= C dt on the rotating qubit; the frame velocity is
    // nu/2 per column pair, so C = 2 nu is a generous Lipschitz bound.
    let nu = 0.3;
    let spec = HamiltonianFamilySpec::new(
        HamiltonianFamily::RotatingQubit { omega: 1.0, nu },
        2,
    )
    .unwrap();
    let rho0 = DensityMatrix::maximally_mixed(2);
    let traj = assemble_trajectory(&spec, &rho0, 500, 5.0, DEFAULT_CLUSTER_TOL).unwrap();
    let bound = 2.0 * nu * traj.dt();
    for i in 0..traj.len() - 1 {
        let step = (traj.frames()[i + 1].frame().matrix() - traj.frames()[i].frame().matrix())
            .norm();
        assert!(step <= bound, "frame step {step:.3e} at index {i}");
    }
}

#[test]
fn first_law_is_exact_even_for_discontinuous_gauge_paths() {
    // The discrete ledger telescopes for arbitrary state paths, so even a
    // jump-discontinuous gauge path keeps dU = W + Q at rounding level.
    let mut rng = ChaCha8Rng::seed_from_u64(2718);
    let traj = random_smooth_trajectory(&mut rng, 3, 500, 1.5);
    let transformed = traj
        .with_states(haar_transformed_states(&traj, 999, 0))
        .unwrap();
    let w = invariant_work(&transformed).unwrap();
    let q = invariant_heat(&transformed).unwrap();
    let du = energy_change(&transformed).unwrap();
    let scale = w.abs().max(q.abs()).max(du.abs()).max(1.0);
    assert!(
        (du - w - q).abs() <= 1e-10 * scale,
        "ledger residual {:.3e}",
        (du - w - q).abs()
    );
}

#[test]
fn eigendecompose_and_families_compose() {
    // Build a rotating-qubit family and check the eigenvalues stay put.
    let spec = HamiltonianFamilySpec::new(
        HamiltonianFamily::RotatingQubit { omega: 1.0, nu: 0.3 },
        2,
    )
    .unwrap();
    let times: Vec<f64> = (0..=10).map(|i| 0.3 * i as f64).collect();
    let hs = build_family(&spec, &times).unwrap();
    for h in &hs {
        let (values, _) = eigendecompose(h).unwrap();
        assert!((values[0] + 0.5).abs() < 1e-12);
        assert!((values[1] - 0.5).abs() < 1e-12);
    }
}
