//! Shared fixtures for the integration suites.

use rand::Rng;
use thermogauge_core::dynamics::{
    assemble_trajectory, HamiltonianFamily, HamiltonianFamilySpec, TrajectoryGrid,
};
use thermogauge_core::operators::{DensityMatrix, HermitianOperator};
use thermogauge_core::spectral::DEFAULT_CLUSTER_TOL;

/// A random smooth two-tone Hamiltonian family realized on the grid:
/// H(t) = A0 + cos(w1 t + p1) A1 + sin(w2 t + p2) A2 with GUE-like terms
/// scaled to O(1) norm.
pub fn random_smooth_family<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    times: &[f64],
) -> Vec<HermitianOperator> {
    let scale = 1.0 / (dim as f64).sqrt();
    let a0 = HermitianOperator::new(HermitianOperator::random(rng, dim).matrix().scale(scale))
        .unwrap();
    let a1 = HermitianOperator::new(HermitianOperator::random(rng, dim).matrix().scale(scale))
        .unwrap();
    let a2 = HermitianOperator::new(HermitianOperator::random(rng, dim).matrix().scale(scale))
        .unwrap();
    let w1: f64 = rng.random_range(0.3..1.0);
    let w2: f64 = rng.random_range(0.3..1.0);
    let p1: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let p2: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    times
        .iter()
        .map(|&t| {
            HermitianOperator::new(
                a0.matrix()
                    + a1.matrix().scale((w1 * t + p1).cos())
                    + a2.matrix().scale((w2 * t + p2).sin()),
            )
            .unwrap()
        })
        .collect()
}

/// Assemble a full trajectory over a random smooth family with a random
/// full-rank initial state.
pub fn random_smooth_trajectory<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    n: usize,
    tau: f64,
) -> TrajectoryGrid {
    let times: Vec<f64> = (0..=n).map(|i| tau * i as f64 / n as f64).collect();
    let matrices = random_smooth_family(rng, dim, &times);
    let spec = HamiltonianFamilySpec::new(HamiltonianFamily::CustomGrid { matrices }, dim).unwrap();
    let rho0 = DensityMatrix::random(rng, dim);
    assemble_trajectory(&spec, &rho0, n, tau, DEFAULT_CLUSTER_TOL).unwrap()
}
