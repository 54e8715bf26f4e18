//! Gauge-invariant thermodynamic functionals along a trajectory: internal
//! energy, invariant work W = int Tr(rho D_t H) dt, invariant heat
//! Q = int Tr(H D_t rho) dt, and the first-law ledger that ties them to the
//! energy change.
//!
//! Quadrature is the composite trapezoidal rule, matched to the O(dt^2)
//! central differences of the spectral module. With first-order one-sided
//! differences at interval endpoints the two commutator terms cancel by
//! cyclic trace invariance and the remaining discrete sum telescopes, so
//! W + Q = dU holds identically (up to rounding) on every grid, not just in
//! the dt -> 0 limit. Across degeneracy-change boundaries the integrals are
//! taken per interval and summed.

use crate::dynamics::TrajectoryGrid;
use crate::error::{Error, Result};
use crate::operators::{expectation, trace_of_product, HermitianOperator};
use crate::spectral::{covariant_derivative, grid_derivative_scalar};
use crate::thermo_group::gauge_entropy;
use crate::dynamics::IntervalPartition;

/// Relative tolerance on the first-law residual; exceeding it indicates a
/// numerically inconsistent (too coarse) grid.
pub const FIRST_LAW_TOL: f64 = 1e-8;

/// Relative bound asserted on the imaginary part of every power trace.
const IMAG_TRACE_TOL: f64 = 1e-9;

/// Full ledger of the invariant energy accounting over one trajectory.
#[derive(Debug, Clone)]
pub struct ThermoRecord {
    pub u_initial: f64,
    pub u_final: f64,
    pub w_inv: f64,
    pub q_inv: f64,
    /// (u_final - u_initial) - (w_inv + q_inv).
    pub first_law_residual: f64,
    /// Gauge-invariant entropy at t = 0, with the initial degeneracy structure.
    pub s_initial: f64,
    /// Gauge-invariant entropy at t = tau, with the final degeneracy structure.
    pub s_final: f64,
    pub partition: IntervalPartition,
    /// Per-interval subtotals of the work and heat integrals.
    pub w_per_interval: Vec<f64>,
    pub q_per_interval: Vec<f64>,
    /// Work power trace Re Tr(rho D_t H) at every grid point.
    pub work_power: Vec<f64>,
    /// Heat power trace Re Tr(H D_t rho) at every grid point.
    pub heat_power: Vec<f64>,
}

/// Deterministic pairwise summation; bit-stable regardless of how callers
/// might partition work, and more accurate than a running sum.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Composite trapezoidal rule on a uniform grid.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner = pairwise_sum(&values[1..values.len() - 1]);
    dt * (0.5 * values[0] + inner + 0.5 * values[values.len() - 1])
}

fn real_trace_checked(a: &crate::operators::ComplexMatrix, b: &crate::operators::ComplexMatrix) -> f64 {
    let tr = trace_of_product(a, b);
    let scale = a.norm().max(b.norm()).max(1.0);
    assert!(
        tr.im.abs() <= IMAG_TRACE_TOL * scale,
        "power trace has imaginary part {:.3e}",
        tr.im
    );
    tr.re
}

/// Work power trace Re Tr(rho_i D_t H_i) at every grid point, differenced
/// within partition intervals.
pub fn work_integrands(traj: &TrajectoryGrid) -> Result<Vec<f64>> {
    integrands(traj, Integrand::Work)
}

/// Heat power trace Re Tr(H_i D_t rho_i) at every grid point.
pub fn heat_integrands(traj: &TrajectoryGrid) -> Result<Vec<f64>> {
    integrands(traj, Integrand::Heat)
}

enum Integrand {
    Work,
    Heat,
}

fn integrands(traj: &TrajectoryGrid, which: Integrand) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(traj.len());
    for (start, end) in traj.partition().interval_ranges(traj.len()) {
        match which {
            Integrand::Work => {
                let hs = &traj.hamiltonians()[start..=end];
                for local in 0..=(end - start) {
                    let global = start + local;
                    let dth =
                        covariant_derivative(hs, &traj.potentials()[global], traj.dt(), local)?;
                    out.push(real_trace_checked(
                        traj.states()[global].matrix(),
                        dth.matrix(),
                    ));
                }
            }
            Integrand::Heat => {
                // D_t rho needs the state list as Hermitian operators.
                let rhos: Vec<HermitianOperator> = traj.states()[start..=end]
                    .iter()
                    .map(|r| r.operator().clone())
                    .collect();
                for local in 0..=(end - start) {
                    let global = start + local;
                    let dtrho =
                        covariant_derivative(&rhos, &traj.potentials()[global], traj.dt(), local)?;
                    out.push(real_trace_checked(
                        traj.hamiltonians()[global].matrix(),
                        dtrho.matrix(),
                    ));
                }
            }
        }
    }
    Ok(out)
}

fn per_interval_integrals(traj: &TrajectoryGrid, values: &[f64]) -> Vec<f64> {
    traj.partition()
        .interval_ranges(traj.len())
        .iter()
        .map(|&(start, end)| trapezoid(&values[start..=end], traj.dt()))
        .collect()
}

/// Invariant work W = int_0^tau Tr(rho_t D_t H_t) dt.
pub fn invariant_work(traj: &TrajectoryGrid) -> Result<f64> {
    let w = work_integrands(traj)?;
    Ok(pairwise_sum(&per_interval_integrals(traj, &w)))
}

/// Invariant heat Q = int_0^tau Tr(H_t D_t rho_t) dt.
pub fn invariant_heat(traj: &TrajectoryGrid) -> Result<f64> {
    let q = heat_integrands(traj)?;
    Ok(pairwise_sum(&per_interval_integrals(traj, &q)))
}

/// Energy change U(tau) - U(0).
pub fn energy_change(traj: &TrajectoryGrid) -> Result<f64> {
    let last = traj.len() - 1;
    let u0 = expectation(&traj.states()[0], &traj.hamiltonians()[0])?;
    let u1 = expectation(&traj.states()[last], &traj.hamiltonians()[last])?;
    Ok(u1 - u0)
}

/// Assemble the full first-law ledger, enforcing the residual invariant at
/// the default tolerance.
pub fn first_law_report(traj: &TrajectoryGrid) -> Result<ThermoRecord> {
    first_law_report_with_tol(traj, FIRST_LAW_TOL)
}

/// As [`first_law_report`] with a caller-chosen residual tolerance.
pub fn first_law_report_with_tol(traj: &TrajectoryGrid, residual_tol: f64) -> Result<ThermoRecord> {
    let work_power = work_integrands(traj)?;
    let heat_power = heat_integrands(traj)?;
    let w_per_interval = per_interval_integrals(traj, &work_power);
    let q_per_interval = per_interval_integrals(traj, &heat_power);
    let w_inv = pairwise_sum(&w_per_interval);
    let q_inv = pairwise_sum(&q_per_interval);

    let last = traj.len() - 1;
    let u_initial = expectation(&traj.states()[0], &traj.hamiltonians()[0])?;
    let u_final = expectation(&traj.states()[last], &traj.hamiltonians()[last])?;
    let delta_u = u_final - u_initial;
    let first_law_residual = delta_u - (w_inv + q_inv);
    let scale = delta_u.abs().max(w_inv.abs()).max(q_inv.abs()).max(1.0);
    if first_law_residual.abs() > residual_tol * scale {
        return Err(Error::FirstLawResidual {
            residual: first_law_residual.abs(),
            tol: residual_tol * scale,
        });
    }

    let s_initial = gauge_entropy(&traj.states()[0], traj.frames()[0].structure())?;
    let s_final = gauge_entropy(&traj.states()[last], traj.frames()[last].structure())?;

    Ok(ThermoRecord {
        u_initial,
        u_final,
        w_inv,
        q_inv,
        first_law_residual,
        s_initial,
        s_final,
        partition: traj.partition().clone(),
        w_per_interval,
        q_per_interval,
        work_power,
        heat_power,
    })
}

/// Independent work oracle: the population-weighted eigenvalue-velocity
/// integral int sum_k <e_k|rho|e_k> dlambda_k/dt dt, evaluated in the
/// instantaneous eigenbasis with the same stencils and quadrature.
pub fn work_spectral_oracle(traj: &TrajectoryGrid) -> Result<f64> {
    let mut per_interval = Vec::new();
    for (start, end) in traj.partition().interval_ranges(traj.len()) {
        let dim = traj.dim();
        // Per-column eigenvalue curves over this interval.
        let curves: Vec<Vec<f64>> = (0..dim)
            .map(|k| (start..=end).map(|i| traj.eigenvalues()[i][k]).collect())
            .collect();
        let mut integrand = Vec::with_capacity(end - start + 1);
        for local in 0..=(end - start) {
            let global = start + local;
            let frame = traj.frames()[global].frame().matrix();
            let rho = traj.states()[global].matrix();
            let mut total = 0.0;
            for k in 0..dim {
                let col = frame.column(k);
                let p = (col.adjoint() * rho * col)[(0, 0)].re;
                let lam_dot = grid_derivative_scalar(&curves[k], traj.dt(), local)?;
                total += p * lam_dot;
            }
            integrand.push(total);
        }
        per_interval.push(trapezoid(&integrand, traj.dt()));
    }
    Ok(pairwise_sum(&per_interval))
}
