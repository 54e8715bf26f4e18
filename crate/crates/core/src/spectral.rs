//! Eigendecomposition with degeneracy clustering, smooth eigenframe tracking
//! along a time grid, and the gauge potential / covariant derivative built
//! from the frame velocity.
//!
//! The eigenframe at each grid point is only defined up to a block-diagonal
//! unitary (one block per degenerate eigenvalue cluster). [`align_frame`]
//! picks the representative closest to the previous frame in Frobenius norm
//! (orthogonal-Procrustes alignment within each block), which makes the frame
//! sequence a differentiable curve and the finite-difference potential
//! A = i du/dt u^H meaningful.
//!
//! Finite-difference convention: central differences at interior grid points,
//! first-order one-sided differences at the two endpoints. The endpoint order
//! matters: with trapezoidal quadrature this exact combination makes the
//! discrete work + heat integrals telescope to the energy change identically,
//! so the first-law residual sits at rounding level instead of O(dt^2).

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{
    commutator, sorted_hermitian_eigen, ComplexMatrix, HermitianOperator, UnitaryMatrix,
};

/// Default eigenvalue clustering tolerance: well above eigensolver noise,
/// well below physical gaps in desk-scale models.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

/// Smallest allowed singular value of a block overlap before the frame is
/// declared discontinuous.
const OVERLAP_SINGULAR_FLOOR: f64 = 0.1;

/// Clustered spectrum of a Hermitian operator: distinct eigenvalues
/// (ascending), their multiplicities, and the spectral projectors.
#[derive(Debug, Clone)]
pub struct DegeneracyStructure {
    distinct_values: Vec<f64>,
    multiplicities: Vec<usize>,
    projectors: Vec<HermitianOperator>,
    cluster_tol: f64,
}

impl DegeneracyStructure {
    pub fn distinct_values(&self) -> &[f64] {
        &self.distinct_values
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn projectors(&self) -> &[HermitianOperator] {
        &self.projectors
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    pub fn dim(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn num_blocks(&self) -> usize {
        self.multiplicities.len()
    }

    /// Column ranges of the blocks in an ascending-ordered eigenframe.
    pub fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::with_capacity(self.multiplicities.len());
        let mut start = 0;
        for &n in &self.multiplicities {
            out.push(start..start + n);
            start += n;
        }
        out
    }
}

/// A unitary eigenframe (columns = eigenvectors in ascending eigenvalue
/// order) together with the degeneracy structure it diagonalizes.
#[derive(Debug, Clone)]
pub struct EigenFrame {
    frame: UnitaryMatrix,
    structure: DegeneracyStructure,
}

impl EigenFrame {
    pub fn new(frame: UnitaryMatrix, structure: DegeneracyStructure) -> Result<Self> {
        if frame.dim() != structure.dim() {
            return Err(Error::DimensionMismatch {
                left: frame.dim(),
                right: structure.dim(),
            });
        }
        Ok(Self { frame, structure })
    }

    pub fn frame(&self) -> &UnitaryMatrix {
        &self.frame
    }

    pub fn structure(&self) -> &DegeneracyStructure {
        &self.structure
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }
}

/// The gauge potential A = i du/dt u^H (Hermitian, units 1/time).
#[derive(Debug, Clone)]
pub struct GaugePotential {
    matrix: HermitianOperator,
}

impl GaugePotential {
    pub fn new(matrix: HermitianOperator) -> Self {
        Self { matrix }
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.matrix
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.matrix()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// The residual |u L u^H - H| is checked against 1e-10 * max(1, |H|).
pub fn eigendecompose(h: &HermitianOperator) -> Result<(Vec<f64>, UnitaryMatrix)> {
    let (values, vectors) = sorted_hermitian_eigen(h.matrix())?;
    Ok((values, UnitaryMatrix::new(vectors)?))
}

/// Merge an ascending eigenvalue list into degenerate clusters.
///
/// Adjacent values join one cluster when their gap is at most
/// tol * max(1, |lambda|); chained gaps merge transitively. Returns the
/// cluster means and multiplicities.
pub fn cluster_multiplicities(eigenvalues: &[f64], tol: f64) -> Result<(Vec<f64>, Vec<usize>)> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::NonPositiveTolerance { tol });
    }
    let mut values = Vec::new();
    let mut mults = Vec::new();
    let mut start = 0;
    while start < eigenvalues.len() {
        let mut end = start + 1;
        while end < eigenvalues.len() {
            let gap = eigenvalues[end] - eigenvalues[end - 1];
            let scale = eigenvalues[end].abs().max(eigenvalues[end - 1].abs()).max(1.0);
            if gap <= tol * scale {
                end += 1;
            } else {
                break;
            }
        }
        let mean = eigenvalues[start..end].iter().sum::<f64>() / (end - start) as f64;
        values.push(mean);
        mults.push(end - start);
        start = end;
    }
    Ok((values, mults))
}

/// Full degeneracy structure: cluster the spectrum and build the spectral
/// projectors from the corresponding frame columns.
pub fn cluster_degeneracies(
    eigenvalues: &[f64],
    frame: &UnitaryMatrix,
    tol: f64,
) -> Result<DegeneracyStructure> {
    if eigenvalues.len() != frame.dim() {
        return Err(Error::DimensionMismatch {
            left: eigenvalues.len(),
            right: frame.dim(),
        });
    }
    let (distinct_values, multiplicities) = cluster_multiplicities(eigenvalues, tol)?;
    let dim = frame.dim();
    let mut projectors = Vec::with_capacity(multiplicities.len());
    let mut start = 0;
    for &n in &multiplicities {
        let block = frame.matrix().columns(start, n);
        let p = block * block.adjoint();
        projectors.push(HermitianOperator::hermitized(p)?);
        start += n;
    }
    debug_assert_eq!(start, dim);
    Ok(DegeneracyStructure {
        distinct_values,
        multiplicities,
        projectors,
        cluster_tol: tol,
    })
}

/// Eigendecompose and cluster in one step.
pub fn eigenframe(h: &HermitianOperator, cluster_tol: f64) -> Result<EigenFrame> {
    let (values, frame) = eigendecompose(h)?;
    let structure = cluster_degeneracies(&values, &frame, cluster_tol)?;
    EigenFrame::new(frame, structure)
}

/// Unitary polar factor of a square matrix: W = M (M^H M)^{-1/2}.
///
/// Returns the factor together with the smallest singular value of M.
fn polar_unitary(m: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    let gram = m.adjoint() * m;
    let (values, vectors) = sorted_hermitian_eigen(&gram)?;
    let sigma_min = values.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    if sigma_min < OVERLAP_SINGULAR_FLOOR {
        return Err(Error::FrameOverlapSingular { sigma_min });
    }
    let n = m.nrows();
    let inv_sqrt_diag = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(1.0 / values[i].sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let inv_sqrt = &vectors * inv_sqrt_diag * vectors.adjoint();
    Ok((m * inv_sqrt, sigma_min))
}

/// Align a freshly computed eigenframe against the previous grid point.
///
/// Within each degeneracy block of `structure`, the new block frame is
/// right-multiplied by the unitary polar factor of (next^H prev), the
/// orthogonal-Procrustes minimizer of |next W - prev|_F over block unitaries.
/// For one-dimensional blocks this reduces to fixing the phase so that
/// <prev, next> is real positive.
pub fn align_frame(
    prev: &EigenFrame,
    next_raw: &UnitaryMatrix,
    structure: &DegeneracyStructure,
) -> Result<EigenFrame> {
    let dim = prev.dim();
    if next_raw.dim() != dim || structure.dim() != dim {
        return Err(Error::DimensionMismatch {
            left: next_raw.dim(),
            right: dim,
        });
    }
    let mut aligned = next_raw.matrix().clone();
    for range in structure.block_ranges() {
        let n = range.len();
        let prev_block = prev.frame.matrix().columns(range.start, n);
        let next_block = next_raw.matrix().columns(range.start, n);
        let overlap = next_block.adjoint() * prev_block;
        let (w, _sigma_min) = polar_unitary(&overlap)?;
        let new_block = next_block * w;
        aligned.view_mut((0, range.start), (dim, n)).copy_from(&new_block);
    }
    EigenFrame::new(UnitaryMatrix::new(aligned)?, structure.clone())
}

/// Finite-difference stencil over a matrix-valued grid function: central at
/// interior points, first-order one-sided at the endpoints.
pub(crate) fn grid_derivative<'a, F>(get: F, len: usize, dt: f64, index: usize) -> Result<ComplexMatrix>
where
    F: Fn(usize) -> &'a ComplexMatrix,
{
    if len < 2 {
        return Err(Error::GridTooSmall {
            required: 2,
            actual: len,
        });
    }
    if index >= len {
        return Err(Error::IndexOutOfRange { index, len });
    }
    let d = if index == 0 {
        (get(1) - get(0)).scale(1.0 / dt)
    } else if index == len - 1 {
        (get(len - 1) - get(len - 2)).scale(1.0 / dt)
    } else {
        (get(index + 1) - get(index - 1)).scale(1.0 / (2.0 * dt))
    };
    Ok(d)
}

/// Same stencil for scalar grid functions (eigenvalue curves).
pub(crate) fn grid_derivative_scalar(values: &[f64], dt: f64, index: usize) -> Result<f64> {
    let len = values.len();
    if len < 2 {
        return Err(Error::GridTooSmall {
            required: 2,
            actual: len,
        });
    }
    if index >= len {
        return Err(Error::IndexOutOfRange { index, len });
    }
    Ok(if index == 0 {
        (values[1] - values[0]) / dt
    } else if index == len - 1 {
        (values[len - 1] - values[len - 2]) / dt
    } else {
        (values[index + 1] - values[index - 1]) / (2.0 * dt)
    })
}

/// The gauge potential A = i du/dt u^H at one grid point of an aligned frame
/// sequence. The finite-difference result is Hermitized: the exact potential
/// is Hermitian and the O(dt) anti-Hermitian residue is discretization noise.
pub fn gauge_potential(frames: &[EigenFrame], dt: f64, index: usize) -> Result<GaugePotential> {
    let udot = grid_derivative(|i| frames[i].frame.matrix(), frames.len(), dt, index)?;
    let m = (udot * frames[index].frame.matrix().adjoint()).map(|z| z * Complex64::new(0.0, 1.0));
    Ok(GaugePotential::new(HermitianOperator::hermitized(m)?))
}

/// Covariant derivative D_t X = dX/dt + i [A, X] at one grid point.
pub fn covariant_derivative(
    xs: &[HermitianOperator],
    a: &GaugePotential,
    dt: f64,
    index: usize,
) -> Result<HermitianOperator> {
    let xdot = grid_derivative(|i| xs[i].matrix(), xs.len(), dt, index)?;
    if a.dim() != xs[index].dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: xs[index].dim(),
        });
    }
    let comm = commutator(a.matrix(), xs[index].matrix())?;
    let total = xdot + comm.map(|z| z * Complex64::new(0.0, 1.0));
    HermitianOperator::hermitized(total)
}

/// Per-column eigenvalue list of a structure (cluster means repeated by
/// multiplicity), matching the frame column order.
pub fn column_eigenvalues(structure: &DegeneracyStructure) -> Vec<f64> {
    let mut out = Vec::with_capacity(structure.dim());
    for (v, &n) in structure
        .distinct_values
        .iter()
        .zip(structure.multiplicities.iter())
    {
        out.extend(std::iter::repeat_n(*v, n));
    }
    out
}

/// Diagonal matrix u diag(values) u^H in the given frame.
pub fn in_frame_diagonal(frame: &UnitaryMatrix, values: &[f64]) -> Result<HermitianOperator> {
    if frame.dim() != values.len() {
        return Err(Error::DimensionMismatch {
            left: frame.dim(),
            right: values.len(),
        });
    }
    let diag = ComplexMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::new(v, 0.0)),
    ));
    let m = frame.matrix() * diag * frame.matrix().adjoint();
    HermitianOperator::hermitized(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{norm_scale, pauli_x, pauli_y, pauli_z, DensityMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigendecompose_sigma_z_ascending() {
        let (values, frame) = eigendecompose(&pauli_z()).unwrap();
        assert!((values[0] + 1.0).abs() < 1e-14);
        assert!((values[1] - 1.0).abs() < 1e-14);
        // Ascending order puts |1> first, |0> second; canonical phase makes
        // the dominant entry real positive.
        assert!((frame.matrix()[(1, 0)] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((frame.matrix()[(0, 1)] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn eigendecompose_sigma_x_columns_up_to_phase() {
        let (values, frame) = eigendecompose(&pauli_x()).unwrap();
        assert!((values[0] + 1.0).abs() < 1e-12);
        assert!((values[1] - 1.0).abs() < 1e-12);
        let inv = 1.0 / 2.0_f64.sqrt();
        // column 0 ~ (|0> - |1>)/sqrt(2), column 1 ~ (|0> + |1>)/sqrt(2)
        let c0 = frame.matrix().column(0);
        let c1 = frame.matrix().column(1);
        assert!((c0[0].norm() - inv).abs() < 1e-12);
        assert!((c0[0] + c0[1]).norm() < 1e-12);
        assert!((c1[0] - c1[1]).norm() < 1e-12);
    }

    #[test]
    fn eigendecompose_identity_d3() {
        let h = HermitianOperator::new(ComplexMatrix::identity(3, 3)).unwrap();
        let (values, frame) = eigendecompose(&h).unwrap();
        assert!(values.iter().all(|v| (v - 1.0).abs() < 1e-14));
        let defect =
            (frame.matrix().adjoint() * frame.matrix() - ComplexMatrix::identity(3, 3)).norm();
        assert!(defect < 1e-12);
    }

    #[test]
    fn cluster_separated_eigenvalues() {
        let (values, mults) = cluster_multiplicities(&[-1.0, 1.0], 1e-9).unwrap();
        assert_eq!(mults, vec![1, 1]);
        assert_eq!(values, vec![-1.0, 1.0]);
    }

    #[test]
    fn cluster_within_tolerance_merges() {
        let (_, mults) = cluster_multiplicities(&[1.0, 1.0 + 1e-12, 3.0], 1e-9).unwrap();
        assert_eq!(mults, vec![2, 1]);
    }

    #[test]
    fn cluster_chained_gaps_merge_transitively() {
        let (values, mults) = cluster_multiplicities(&[0.0, 5e-10, 1e-9], 1e-9).unwrap();
        assert_eq!(mults, vec![3]);
        assert!((values[0] - 5e-10).abs() < 1e-24);
    }

    #[test]
    fn cluster_rejects_non_positive_tolerance() {
        assert!(matches!(
            cluster_multiplicities(&[0.0, 1.0], 0.0),
            Err(Error::NonPositiveTolerance { .. })
        ));
    }

    #[test]
    fn projectors_are_orthogonal_and_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = HermitianOperator::random(&mut rng, 4);
        let ef = eigenframe(&h, DEFAULT_CLUSTER_TOL).unwrap();
        let s = ef.structure();
        let dim = s.dim();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (k, pk) in s.projectors().iter().enumerate() {
            sum += pk.matrix();
            for (j, pj) in s.projectors().iter().enumerate() {
                let prod = pk.matrix() * pj.matrix();
                let expected = if j == k {
                    pk.matrix().clone()
                } else {
                    ComplexMatrix::zeros(dim, dim)
                };
                assert!((prod - expected).norm() < 1e-10);
            }
            let rank = pk.matrix().trace().re;
            assert!((rank - s.multiplicities()[k] as f64).abs() < 1e-9);
        }
        assert!((sum - ComplexMatrix::identity(dim, dim)).norm() < 1e-10);
    }

    #[test]
    fn align_frame_removes_phases() {
        let prev = eigenframe(&pauli_z(), 1e-8).unwrap();
        let phases = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::from_polar(1.0, 0.9),
            Complex64::from_polar(1.0, -1.7),
        ]));
        let next_raw = UnitaryMatrix::new(prev.frame().matrix() * phases).unwrap();
        let aligned = align_frame(&prev, &next_raw, prev.structure()).unwrap();
        assert!((aligned.frame().matrix() - prev.frame().matrix()).norm() < 1e-12);
    }

    #[test]
    fn align_frame_recovers_degenerate_block_rotation() {
        // Degenerate 2-block: next = prev . V for a block unitary V, so the
        // Procrustes factor must undo V exactly and return prev.
        let h = HermitianOperator::new(ComplexMatrix::identity(2, 2)).unwrap();
        let prev = eigenframe(&h, 1e-8).unwrap();
        assert_eq!(prev.structure().multiplicities(), &[2]);
        let v = crate::operators::skew_exp(&pauli_y(), 0.437).unwrap();
        let next_raw = UnitaryMatrix::new(prev.frame().matrix() * v.matrix()).unwrap();
        let aligned = align_frame(&prev, &next_raw, prev.structure()).unwrap();
        assert!((aligned.frame().matrix() - prev.frame().matrix()).norm() < 1e-10);
    }

    #[test]
    fn align_frame_undoes_sign_flip() {
        let prev = eigenframe(&pauli_z(), 1e-8).unwrap();
        let mut flipped = prev.frame().matrix().clone();
        let col = -flipped.column(1).clone_owned();
        flipped.set_column(1, &col);
        let next_raw = UnitaryMatrix::new(flipped).unwrap();
        let aligned = align_frame(&prev, &next_raw, prev.structure()).unwrap();
        assert!((aligned.frame().matrix() - prev.frame().matrix()).norm() < 1e-12);
    }

    #[test]
    fn align_frame_rejects_orthogonal_overlap() {
        let prev = eigenframe(&pauli_z(), 1e-8).unwrap();
        // Swap the two columns: each diagonal overlap becomes 0.
        let mut swapped = ComplexMatrix::zeros(2, 2);
        swapped.set_column(0, &prev.frame().matrix().column(1).clone_owned());
        swapped.set_column(1, &prev.frame().matrix().column(0).clone_owned());
        let next_raw = UnitaryMatrix::new(swapped).unwrap();
        assert!(matches!(
            align_frame(&prev, &next_raw, prev.structure()),
            Err(Error::FrameOverlapSingular { .. })
        ));
    }

    #[test]
    fn gauge_potential_constant_frame_is_zero() {
        let ef = eigenframe(&pauli_z(), 1e-8).unwrap();
        let frames = vec![ef.clone(), ef.clone(), ef.clone()];
        let a = gauge_potential(&frames, 0.1, 1).unwrap();
        assert!(a.matrix().norm() < 1e-14);
    }

    #[test]
    fn gauge_potential_of_z_rotation() {
        // u(t) = exp(-i w t sigma_z / 2) as an explicit frame curve:
        // A = i du/dt u^H = (w/2) sigma_z, recovered within O(dt^2).
        let omega = 0.8;
        let dt = 1e-3;
        let n = 5;
        let structure = eigenframe(&pauli_z(), 1e-8).unwrap().structure().clone();
        let frames: Vec<EigenFrame> = (0..n)
            .map(|i| {
                let u = crate::operators::skew_exp(&pauli_z(), omega * (i as f64) * dt / 2.0)
                    .unwrap();
                EigenFrame::new(u, structure.clone()).unwrap()
            })
            .collect();
        let a = gauge_potential(&frames, dt, 2).unwrap();
        let expected = pauli_z().matrix().scale(omega / 2.0);
        assert!((a.matrix() - expected).norm() < 1e-6);
    }

    #[test]
    fn gauge_potential_of_rotating_qubit_frame() {
        // u(t) = [[cos, -sin],[sin, cos]](nu t / 2) gives A = (nu/2) sigma_y.
        let nu = 0.6;
        let dt = 1e-3;
        let structure = eigenframe(&pauli_z(), 1e-8).unwrap().structure().clone();
        let frames: Vec<EigenFrame> = (0..5)
            .map(|i| {
                let th = nu * (i as f64) * dt / 2.0;
                let m = ComplexMatrix::from_fn(2, 2, |r, c_| {
                    let v = match (r, c_) {
                        (0, 0) => th.cos(),
                        (0, 1) => -th.sin(),
                        (1, 0) => th.sin(),
                        _ => th.cos(),
                    };
                    Complex64::new(v, 0.0)
                });
                EigenFrame::new(UnitaryMatrix::new(m).unwrap(), structure.clone()).unwrap()
            })
            .collect();
        let a = gauge_potential(&frames, dt, 2).unwrap();
        let expected = pauli_y().matrix().scale(nu / 2.0);
        assert!((a.matrix() - expected).norm() < 1e-6);
    }

    #[test]
    fn covariant_derivative_with_zero_potential_is_plain_derivative() {
        let dt = 0.1;
        let xs: Vec<HermitianOperator> = (0..3)
            .map(|i| {
                HermitianOperator::new(pauli_x().matrix().scale(i as f64 * dt)).unwrap()
            })
            .collect();
        let a = GaugePotential::new(HermitianOperator::zeros(2));
        let d = covariant_derivative(&xs, &a, dt, 1).unwrap();
        assert!((d.matrix() - pauli_x().matrix()).norm() < 1e-12);
    }

    #[test]
    fn covariant_derivative_of_constant_is_commutator() {
        let xs = vec![pauli_x(), pauli_x(), pauli_x()];
        let a = GaugePotential::new(pauli_z());
        let d = covariant_derivative(&xs, &a, 0.05, 1).unwrap();
        let expected = commutator(pauli_z().matrix(), pauli_x().matrix())
            .unwrap()
            .map(|z| z * c(0.0, 1.0));
        assert!((d.matrix() - expected).norm() < 1e-12);
    }

    #[test]
    fn frame_gauge_freedom_constant_block_unitary_leaves_potential_fixed() {
        // u_i -> u_i v with one constant block-diagonal v leaves A unchanged.
        let nu = 0.4;
        let dt = 1e-3;
        let structure = eigenframe(&pauli_z(), 1e-8).unwrap().structure().clone();
        let make = |with_v: bool| -> Vec<EigenFrame> {
            let v = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![
                Complex64::from_polar(1.0, 0.3),
                Complex64::from_polar(1.0, -1.1),
            ]));
            (0..5)
                .map(|i| {
                    let u = crate::operators::skew_exp(&pauli_y(), nu * (i as f64) * dt)
                        .unwrap();
                    let m = if with_v {
                        u.matrix() * &v
                    } else {
                        u.matrix().clone()
                    };
                    EigenFrame::new(UnitaryMatrix::new(m).unwrap(), structure.clone()).unwrap()
                })
                .collect()
        };
        let a_plain = gauge_potential(&make(false), dt, 2).unwrap();
        let a_gauged = gauge_potential(&make(true), dt, 2).unwrap();
        assert!((a_plain.matrix() - a_gauged.matrix()).norm() < 1e-10);
    }

    #[test]
    fn diagonalization_residual_invariant_on_random_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [2, 3, 5, 8] {
            let h = HermitianOperator::random(&mut rng, dim);
            let ef = eigenframe(&h, DEFAULT_CLUSTER_TOL).unwrap();
            let lam = column_eigenvalues(ef.structure());
            let rebuilt = in_frame_diagonal(ef.frame(), &lam).unwrap();
            let scale = norm_scale(h.matrix());
            assert!((rebuilt.matrix() - h.matrix()).norm() <= 1e-9 * scale);
        }
    }

    #[test]
    fn twirl_weights_survive_projector_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = DensityMatrix::random(&mut rng, 3);
        let h = HermitianOperator::random(&mut rng, 3);
        let ef = eigenframe(&h, DEFAULT_CLUSTER_TOL).unwrap();
        let total: f64 = ef
            .structure()
            .projectors()
            .iter()
            .map(|p| crate::operators::trace_of_product(p.matrix(), rho.matrix()).re)
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
