//! Time-dependent Hamiltonian families, closed-system evolution, and the
//! partition of the time axis at instants where the degeneracy structure of
//! the driven observable changes.
//!
//! Evolution uses a midpoint-Hamiltonian exact-exponential stepper
//! (rho_{i+1} = U rho U^H with U = exp(-i dt (H_i + H_{i+1})/2)): unitarity
//! holds at machine precision, which the purity and first-law invariants
//! rely on. Grids are uniform; adaptive stepping is out of scope.

use crate::error::{Error, Result};
use crate::operators::{DensityMatrix, HermitianOperator};
use crate::spectral::{
    align_frame, cluster_degeneracies, eigendecompose, gauge_potential, EigenFrame,
    GaugePotential,
};

/// Closed-form Hamiltonian families realizable on a grid.
#[derive(Debug, Clone)]
pub enum HamiltonianFamily {
    /// H(t) = H for all t.
    Constant { matrix: HermitianOperator },
    /// H(t) = (omega/2)(cos(nu t) sigma_z + sin(nu t) sigma_x).
    RotatingQubit { omega: f64, nu: f64 },
    /// H(t) = f(t) D with f a polynomial (ascending coefficients) and D a
    /// fixed Hermitian direction.
    AmplitudeDrive {
        coefficients: Vec<f64>,
        direction: HermitianOperator,
    },
    /// H(t) = delta sigma_x + velocity t sigma_z.
    LandauZener { delta: f64, velocity: f64 },
    /// Piecewise-constant quench: `initial` until the first switch time,
    /// then each switch Hamiltonian in turn.
    PiecewiseQuench {
        initial: HermitianOperator,
        switches: Vec<(f64, HermitianOperator)>,
    },
    /// Explicit per-grid-point matrices (must match the grid length).
    CustomGrid { matrices: Vec<HermitianOperator> },
}

/// A family plus its declared Hilbert-space dimension.
#[derive(Debug, Clone)]
pub struct HamiltonianFamilySpec {
    pub family: HamiltonianFamily,
    pub dimension: usize,
}

impl HamiltonianFamilySpec {
    pub fn new(family: HamiltonianFamily, dimension: usize) -> Result<Self> {
        let spec = Self { family, dimension };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let check_finite = |v: f64, name: &'static str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::NonFiniteParameter { name })
            }
        };
        match &self.family {
            HamiltonianFamily::Constant { matrix } => {
                if matrix.dim() != self.dimension {
                    return Err(Error::DimensionMismatch {
                        left: matrix.dim(),
                        right: self.dimension,
                    });
                }
            }
            HamiltonianFamily::RotatingQubit { omega, nu } => {
                check_finite(*omega, "omega")?;
                check_finite(*nu, "nu")?;
                if self.dimension != 2 {
                    return Err(Error::InvalidFamily {
                        reason: format!(
                            "rotating_qubit requires dimension 2, got {}",
                            self.dimension
                        ),
                    });
                }
            }
            HamiltonianFamily::AmplitudeDrive {
                coefficients,
                direction,
            } => {
                for &c in coefficients {
                    check_finite(c, "coefficient")?;
                }
                if direction.dim() != self.dimension {
                    return Err(Error::DimensionMismatch {
                        left: direction.dim(),
                        right: self.dimension,
                    });
                }
            }
            HamiltonianFamily::LandauZener { delta, velocity } => {
                check_finite(*delta, "delta")?;
                check_finite(*velocity, "velocity")?;
                if self.dimension != 2 {
                    return Err(Error::InvalidFamily {
                        reason: format!(
                            "landau_zener requires dimension 2, got {}",
                            self.dimension
                        ),
                    });
                }
            }
            HamiltonianFamily::PiecewiseQuench { initial, switches } => {
                if initial.dim() != self.dimension {
                    return Err(Error::DimensionMismatch {
                        left: initial.dim(),
                        right: self.dimension,
                    });
                }
                let mut prev = 0.0;
                for (t, h) in switches {
                    check_finite(*t, "switch time")?;
                    if *t <= prev {
                        return Err(Error::InvalidFamily {
                            reason: "switch times must be strictly increasing and positive"
                                .to_string(),
                        });
                    }
                    if h.dim() != self.dimension {
                        return Err(Error::DimensionMismatch {
                            left: h.dim(),
                            right: self.dimension,
                        });
                    }
                    prev = *t;
                }
            }
            HamiltonianFamily::CustomGrid { matrices } => {
                if matrices.is_empty() {
                    return Err(Error::InvalidFamily {
                        reason: "custom_grid needs at least one matrix".to_string(),
                    });
                }
                for m in matrices {
                    if m.dim() != self.dimension {
                        return Err(Error::DimensionMismatch {
                            left: m.dim(),
                            right: self.dimension,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Evaluate a polynomial with ascending coefficients at t.
fn poly_eval(coefficients: &[f64], t: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// Evaluate a family on a time grid; each matrix is Hermitian by
/// construction.
pub fn build_family(
    spec: &HamiltonianFamilySpec,
    times: &[f64],
) -> Result<Vec<HermitianOperator>> {
    spec.validate()?;
    match &spec.family {
        HamiltonianFamily::Constant { matrix } => Ok(vec![matrix.clone(); times.len()]),
        HamiltonianFamily::RotatingQubit { omega, nu } => {
            let sz = crate::operators::pauli_z();
            let sx = crate::operators::pauli_x();
            times
                .iter()
                .map(|&t| {
                    let m = sz.matrix().scale(0.5 * omega * (nu * t).cos())
                        + sx.matrix().scale(0.5 * omega * (nu * t).sin());
                    HermitianOperator::new(m)
                })
                .collect()
        }
        HamiltonianFamily::AmplitudeDrive {
            coefficients,
            direction,
        } => times
            .iter()
            .map(|&t| HermitianOperator::new(direction.matrix().scale(poly_eval(coefficients, t))))
            .collect(),
        HamiltonianFamily::LandauZener { delta, velocity } => {
            let sz = crate::operators::pauli_z();
            let sx = crate::operators::pauli_x();
            times
                .iter()
                .map(|&t| {
                    HermitianOperator::new(
                        sx.matrix().scale(*delta) + sz.matrix().scale(velocity * t),
                    )
                })
                .collect()
        }
        HamiltonianFamily::PiecewiseQuench { initial, switches } => Ok(times
            .iter()
            .map(|&t| {
                let mut current = initial;
                for (ts, h) in switches {
                    if t >= *ts {
                        current = h;
                    } else {
                        break;
                    }
                }
                current.clone()
            })
            .collect()),
        HamiltonianFamily::CustomGrid { matrices } => {
            if matrices.len() != times.len() {
                return Err(Error::InvalidFamily {
                    reason: format!(
                        "custom_grid holds {} matrices but the grid has {} points",
                        matrices.len(),
                        times.len()
                    ),
                });
            }
            Ok(matrices.clone())
        }
    }
}

/// Closed-system evolution along the grid with the midpoint-exponential
/// stepper. Purity is conserved to rounding over the full run.
pub fn evolve_closed(
    hamiltonians: &[HermitianOperator],
    rho0: &DensityMatrix,
    dt: f64,
) -> Result<Vec<DensityMatrix>> {
    if hamiltonians.is_empty() {
        return Err(Error::GridTooSmall {
            required: 1,
            actual: 0,
        });
    }
    if hamiltonians[0].dim() != rho0.dim() {
        return Err(Error::DimensionMismatch {
            left: hamiltonians[0].dim(),
            right: rho0.dim(),
        });
    }
    let mut states = Vec::with_capacity(hamiltonians.len());
    states.push(rho0.clone());
    for i in 0..hamiltonians.len() - 1 {
        let mid = HermitianOperator::hermitized(
            (hamiltonians[i].matrix() + hamiltonians[i + 1].matrix()).scale(0.5),
        )?;
        let u = crate::operators::skew_exp(&mid, dt)?;
        let next = states[i].conjugated(u.matrix());
        states.push(next);
    }
    Ok(states)
}

/// The partition of the time axis at instants where the degeneracy
/// signature (tuple of block dimensions in ascending eigenvalue order)
/// changes.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalPartition {
    boundaries: Vec<f64>,
    boundary_indices: Vec<usize>,
    signatures: Vec<Vec<usize>>,
}

impl IntervalPartition {
    /// Boundary times (each lies on a grid point).
    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Grid indices of the boundaries (first index of each new interval).
    pub fn boundary_indices(&self) -> &[usize] {
        &self.boundary_indices
    }

    /// Per-interval block-dimension signatures; consecutive entries differ.
    pub fn signatures(&self) -> &[Vec<usize>] {
        &self.signatures
    }

    pub fn num_intervals(&self) -> usize {
        self.signatures.len()
    }

    /// Inclusive grid index ranges (start, end) of the intervals for a grid
    /// of `len` points.
    pub fn interval_ranges(&self, len: usize) -> Vec<(usize, usize)> {
        let mut starts = vec![0];
        starts.extend_from_slice(&self.boundary_indices);
        let mut out = Vec::with_capacity(starts.len());
        for (k, &start) in starts.iter().enumerate() {
            let end = if k + 1 < starts.len() {
                starts[k + 1] - 1
            } else {
                len - 1
            };
            out.push((start, end));
        }
        out
    }
}

/// Build a partition from per-grid-point signatures.
pub(crate) fn partition_from_signatures(
    point_signatures: &[Vec<usize>],
    times: &[f64],
) -> IntervalPartition {
    let mut boundaries = Vec::new();
    let mut boundary_indices = Vec::new();
    let mut signatures = vec![point_signatures[0].clone()];
    for i in 1..point_signatures.len() {
        if point_signatures[i] != point_signatures[i - 1] {
            boundaries.push(times[i]);
            boundary_indices.push(i);
            signatures.push(point_signatures[i].clone());
        }
    }
    IntervalPartition {
        boundaries,
        boundary_indices,
        signatures,
    }
}

/// Scan a Hamiltonian grid for degeneracy-structure changes.
pub fn detect_degeneracy_changes(
    hamiltonians: &[HermitianOperator],
    times: &[f64],
    tol: f64,
) -> Result<IntervalPartition> {
    if hamiltonians.is_empty() || hamiltonians.len() != times.len() {
        return Err(Error::GridTooSmall {
            required: times.len().max(1),
            actual: hamiltonians.len(),
        });
    }
    let mut sigs = Vec::with_capacity(hamiltonians.len());
    for h in hamiltonians {
        let (values, _) = eigendecompose(h)?;
        let (_, mults) = crate::spectral::cluster_multiplicities(&values, tol)?;
        sigs.push(mults);
    }
    Ok(partition_from_signatures(&sigs, times))
}

/// A fully populated trajectory: per-grid-point Hamiltonian, state, aligned
/// eigenframe, gauge potential and raw spectrum, plus the degeneracy
/// partition of the time axis.
///
/// Gauge potentials are differenced within partition intervals only (one
/// sided at interval edges), so frame velocities never straddle a
/// degeneracy-change instant.
#[derive(Debug, Clone)]
pub struct TrajectoryGrid {
    times: Vec<f64>,
    dt: f64,
    cluster_tol: f64,
    hamiltonians: Vec<HermitianOperator>,
    eigenvalues: Vec<Vec<f64>>,
    states: Vec<DensityMatrix>,
    frames: Vec<EigenFrame>,
    potentials: Vec<GaugePotential>,
    partition: IntervalPartition,
}

impl TrajectoryGrid {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn tau(&self) -> f64 {
        *self.times.last().expect("non-empty grid")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.hamiltonians[0].dim()
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    pub fn hamiltonians(&self) -> &[HermitianOperator] {
        &self.hamiltonians
    }

    /// Raw ascending eigenvalues per grid point (unclustered).
    pub fn eigenvalues(&self) -> &[Vec<f64>] {
        &self.eigenvalues
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn frames(&self) -> &[EigenFrame] {
        &self.frames
    }

    pub fn potentials(&self) -> &[GaugePotential] {
        &self.potentials
    }

    pub fn partition(&self) -> &IntervalPartition {
        &self.partition
    }

    /// Replace the state path, keeping the observable, frames and
    /// potentials. This is the surface for gauge experiments: acting with a
    /// time-indexed family of thermodynamic-group elements transforms the
    /// states while the driven observable (and hence its eigenstructure)
    /// stays fixed.
    pub fn with_states(&self, states: Vec<DensityMatrix>) -> Result<TrajectoryGrid> {
        if states.len() != self.len() {
            return Err(Error::GridTooSmall {
                required: self.len(),
                actual: states.len(),
            });
        }
        if states.iter().any(|s| s.dim() != self.dim()) {
            return Err(Error::DimensionMismatch {
                left: states[0].dim(),
                right: self.dim(),
            });
        }
        let mut out = self.clone();
        out.states = states;
        Ok(out)
    }

    /// Replace the frame path (e.g. by a gauge-transformed one) and
    /// recompute the potentials per partition interval from the new frames.
    pub fn with_frames(&self, frames: Vec<EigenFrame>) -> Result<TrajectoryGrid> {
        if frames.len() != self.len() {
            return Err(Error::GridTooSmall {
                required: self.len(),
                actual: frames.len(),
            });
        }
        if frames.iter().any(|f| f.dim() != self.dim()) {
            return Err(Error::DimensionMismatch {
                left: frames[0].dim(),
                right: self.dim(),
            });
        }
        let mut potentials = Vec::with_capacity(self.len());
        for (start, end) in self.partition.interval_ranges(self.len()) {
            let slice = &frames[start..=end];
            for local in 0..slice.len() {
                potentials.push(
                    gauge_potential(slice, self.dt, local)
                        .map_err(|e| e.at_grid_index(start + local))?,
                );
            }
        }
        let mut out = self.clone();
        out.frames = frames;
        out.potentials = potentials;
        Ok(out)
    }
}

/// Compose build + evolve + eigenframe sweep + potentials into a trajectory.
///
/// The frame alignment sweep is the one strictly sequential stage; every
/// per-grid-point computation before and after it is independent.
pub fn assemble_trajectory(
    spec: &HamiltonianFamilySpec,
    rho0: &DensityMatrix,
    n: usize,
    tau: f64,
    cluster_tol: f64,
) -> Result<TrajectoryGrid> {
    if n < 2 {
        return Err(Error::GridTooSmall {
            required: 2,
            actual: n,
        });
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::NonFiniteParameter { name: "tau" });
    }
    let dt = tau / n as f64;
    let times: Vec<f64> = (0..=n).map(|i| dt * i as f64).collect();
    let hamiltonians = build_family(spec, &times)?;
    if rho0.dim() != spec.dimension {
        return Err(Error::DimensionMismatch {
            left: rho0.dim(),
            right: spec.dimension,
        });
    }
    let states = evolve_closed(&hamiltonians, rho0, dt)?;

    let mut eigenvalues = Vec::with_capacity(times.len());
    let mut frames: Vec<EigenFrame> = Vec::with_capacity(times.len());
    let mut signatures = Vec::with_capacity(times.len());
    for (i, h) in hamiltonians.iter().enumerate() {
        let (values, raw) = eigendecompose(h).map_err(|e| e.at_grid_index(i))?;
        let structure =
            cluster_degeneracies(&values, &raw, cluster_tol).map_err(|e| e.at_grid_index(i))?;
        signatures.push(structure.multiplicities().to_vec());
        let frame = if let Some(prev) = frames.last() {
            align_frame(prev, &raw, &structure).map_err(|e| e.at_grid_index(i))?
        } else {
            EigenFrame::new(raw, structure)?
        };
        eigenvalues.push(values);
        frames.push(frame);
    }
    let partition = partition_from_signatures(&signatures, &times);

    let mut potentials = Vec::with_capacity(times.len());
    for (start, end) in partition.interval_ranges(times.len()) {
        let slice = &frames[start..=end];
        for local in 0..slice.len() {
            potentials
                .push(gauge_potential(slice, dt, local).map_err(|e| e.at_grid_index(start + local))?);
        }
    }

    Ok(TrajectoryGrid {
        times,
        dt,
        cluster_tol,
        hamiltonians,
        eigenvalues,
        states,
        frames,
        potentials,
        partition,
    })
}
