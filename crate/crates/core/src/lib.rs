//! Numerical toolkit for gauge-invariant quantum thermodynamics.
//!
//! Given a time-dependent Hermitian observable (typically the Hamiltonian)
//! and a closed-system state trajectory, this crate computes the quantities
//! that are invariant under the group of unitaries commuting with the
//! observable at each instant: invariant work and heat, the twirled state,
//! the invariant entropy, and general spectrum-determined functionals. A
//! finite-difference geometry module verifies the connection structure
//! underneath the construction (Maurer-Cartan forms, connection axioms,
//! flatness).
//!
//! Module map:
//! - [`operators`]: checked complex-matrix value types and elementary ops.
//! - [`spectral`]: eigenframe tracking, gauge potential, covariant derivative.
//! - [`thermo_group`]: the block-unitary group, Haar sampling, twirling.
//! - [`dynamics`]: Hamiltonian families, closed evolution, trajectory grids.
//! - [`functionals`]: invariant work/heat, first-law ledger, work oracle.
//! - [`geometry`]: finite-difference checks of the underlying geometry.
//!
//! Everything is a pure function over immutable values; the only
//! sequential stage is the frame alignment sweep inside
//! [`dynamics::assemble_trajectory`].

pub mod dynamics;
pub mod error;
pub mod functionals;
pub mod geometry;
pub mod operators;
pub mod spectral;
pub mod thermo_group;

pub use error::{Error, Result};
pub use operators::{
    commutator, expectation, skew_exp, trace_distance, validate_density, von_neumann_entropy,
    ComplexMatrix, DensityMatrix, HermitianOperator, UnitaryMatrix,
};
pub use spectral::{
    align_frame, cluster_degeneracies, covariant_derivative, eigendecompose, eigenframe,
    gauge_potential, DegeneracyStructure, EigenFrame, GaugePotential, DEFAULT_CLUSTER_TOL,
};
pub use thermo_group::{
    act, gauge_entropy, invariant_functional, sample_haar, thermodynamic_group, twirl,
    FunctionalHandle, GroupElement, ThermodynamicGroup,
};
pub use dynamics::{
    assemble_trajectory, build_family, detect_degeneracy_changes, evolve_closed,
    HamiltonianFamily, HamiltonianFamilySpec, IntervalPartition, TrajectoryGrid,
};
pub use functionals::{
    energy_change, first_law_report, first_law_report_with_tol, invariant_heat, invariant_work,
    work_spectral_oracle, ThermoRecord,
};
pub use geometry::{
    check_connection_axioms, check_right_invariance, flatness_residual, frame_gauge_transform,
    mc_right, ActionConvention, AlgebraElement, GroupCurve, TwoParamFamily,
};
