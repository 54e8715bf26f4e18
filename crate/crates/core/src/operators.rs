//! Core complex-matrix value types and elementary operations.
//!
//! Everything downstream (spectral tracking, twirling, the invariant
//! functionals) is built on the three checked value types defined here:
//! [`HermitianOperator`], [`UnitaryMatrix`] and [`DensityMatrix`]. All types
//! are immutable after construction and safe to share across threads.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Ambient matrix space: dense d x d complex matrices.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Relative Hermiticity tolerance for [`HermitianOperator`].
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Unitarity tolerance for [`UnitaryMatrix`].
pub const UNITARITY_TOL: f64 = 1e-10;
/// Trace / positivity tolerance for [`DensityMatrix`].
pub const DENSITY_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as exactly zero inside entropies.
const ENTROPY_EIGENVALUE_FLOOR: f64 = 1e-14;

/// max(1, |M|_F): all relative tolerances in this crate are taken against
/// this scale so behaviour is uniform across energy scales.
pub fn norm_scale(m: &ComplexMatrix) -> f64 {
    m.norm().max(1.0)
}

fn all_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if !all_finite(m) {
        return Err(Error::NonFinite);
    }
    Ok(m.nrows())
}

fn check_same_dim(left: &ComplexMatrix, right: &ComplexMatrix) -> Result<usize> {
    let l = check_square(left)?;
    let r = check_square(right)?;
    if l != r {
        return Err(Error::DimensionMismatch { left: l, right: r });
    }
    Ok(l)
}

/// A d x d Hermitian matrix. Houses Hamiltonians and general observables.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    /// Accepts `m` when |M - M^H|_F <= 1e-12 * max(1, |M|_F).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_square(&matrix)?;
        let defect = (&matrix - matrix.adjoint()).norm() / norm_scale(&matrix);
        if defect > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                defect,
                tol: HERMITICITY_TOL,
            });
        }
        Ok(Self { matrix })
    }

    /// Symmetrize to (M + M^H)/2 and wrap. Used where an operation is
    /// Hermitian in exact arithmetic but carries floating-point (or
    /// finite-difference) anti-Hermitian noise.
    pub fn hermitized(matrix: ComplexMatrix) -> Result<Self> {
        check_square(&matrix)?;
        let sym = (&matrix + matrix.adjoint()).scale(0.5);
        Ok(Self { matrix: sym })
    }

    /// Zero operator of the given dimension.
    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    /// GUE-style random Hermitian matrix with O(1) entries.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Self {
        let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
            )
        });
        let sym = (&g + g.adjoint()).scale(0.5);
        Self { matrix: sym }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// A d x d unitary matrix: |U^H U - I|_F <= 1e-10.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
}

impl UnitaryMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let dim = check_square(&matrix)?;
        let defect = (matrix.adjoint() * &matrix - ComplexMatrix::identity(dim, dim)).norm();
        if defect > UNITARITY_TOL {
            return Err(Error::NotUnitary {
                defect,
                tol: UNITARITY_TOL,
            });
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim, dim),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// A density matrix: Hermitian, unit trace, positive semidefinite within
/// [`DENSITY_TOL`]. Negative eigenvalues within tolerance are clipped to
/// zero (and the trace renormalized) on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    operator: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        validate_density(&matrix, DENSITY_TOL)
    }

    /// |psi><psi| for a (not necessarily normalized) state vector.
    pub fn pure(state: &nalgebra::DVector<Complex64>) -> Result<Self> {
        let n2 = state.norm_squared();
        if n2 <= 0.0 || !n2.is_finite() {
            return Err(Error::NonFinite);
        }
        let m = (state * state.adjoint()).scale(1.0 / n2);
        Self::new(m)
    }

    /// The maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        let m = ComplexMatrix::identity(dim, dim).scale(1.0 / dim as f64);
        Self {
            operator: HermitianOperator { matrix: m },
        }
    }

    /// Uniform superposition (|0> + ... + |d-1>)/sqrt(d) as a pure state.
    pub fn uniform_superposition(dim: usize) -> Self {
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        let v = nalgebra::DVector::from_element(dim, amp);
        Self::pure(&v).expect("uniform superposition is a valid state")
    }

    /// Random full-rank mixed state rho = G G^H / Tr(G G^H).
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Self {
        let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
            )
        });
        let m = &g * g.adjoint();
        let tr = m.trace().re;
        Self {
            operator: HermitianOperator {
                matrix: m.scale(1.0 / tr),
            },
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.operator.matrix()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    /// Purity Tr(rho^2).
    pub fn purity(&self) -> f64 {
        let m = self.matrix();
        // Tr(M M) without forming the product.
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                acc += m[(i, j)] * m[(j, i)];
            }
        }
        acc.re
    }

    /// Conjugation U rho U^H. The caller guarantees `u` is unitary, so the
    /// density invariants are preserved up to rounding; the result is
    /// re-symmetrized and trace-normalized without a fresh eigendecomposition.
    pub(crate) fn conjugated(&self, u: &ComplexMatrix) -> Self {
        let m = u * self.matrix() * u.adjoint();
        let sym = (&m + m.adjoint()).scale(0.5);
        let tr = sym.trace().re;
        Self {
            operator: HermitianOperator {
                matrix: sym.scale(1.0 / tr),
            },
        }
    }
}

/// XY - YX. Anti-Hermitian when both arguments are Hermitian.
pub fn commutator(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_dim(x, y)?;
    Ok(x * y - y * x)
}

/// Mean value Re Tr(rho X) of an observable in a state.
///
/// The imaginary part of the trace vanishes in exact arithmetic; it is
/// asserted to stay below 1e-10 relative to scale.
pub fn expectation(rho: &DensityMatrix, x: &HermitianOperator) -> Result<f64> {
    if rho.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: x.dim(),
        });
    }
    let tr = trace_of_product(rho.matrix(), x.matrix());
    let scale = norm_scale(x.matrix());
    assert!(
        tr.im.abs() <= 1e-10 * scale,
        "expectation value has imaginary part {:.3e}",
        tr.im
    );
    Ok(tr.re)
}

/// Tr(AB) via the entrywise sum, avoiding the full product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// exp(-i s H) for Hermitian H, computed spectrally (exact up to the
/// eigendecomposition error, guaranteed unitary within type tolerance).
pub fn skew_exp(h: &HermitianOperator, s: f64) -> Result<UnitaryMatrix> {
    if !s.is_finite() {
        return Err(Error::NonFiniteParameter { name: "s" });
    }
    let (values, vectors) = sorted_hermitian_eigen(h.matrix())?;
    let dim = h.dim();
    let phases = ComplexMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, -s * values[i])
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let u = &vectors * phases * vectors.adjoint();
    UnitaryMatrix::new(u)
}

/// Von Neumann entropy -Tr(rho ln rho) in nats, with 0 ln 0 := 0.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let (values, _) =
        sorted_hermitian_eigen(rho.matrix()).expect("density matrix eigendecomposition");
    let mut s = 0.0;
    for p in values {
        if p > ENTROPY_EIGENVALUE_FLOOR {
            s -= p * p.ln();
        }
    }
    s.max(0.0)
}

/// Validate a raw matrix as a density matrix within `tol`.
///
/// Checks Hermiticity, unit trace and positive semidefiniteness; eigenvalues
/// in [-tol, 0) are clipped to zero and the spectrum renormalized.
pub fn validate_density(m: &ComplexMatrix, tol: f64) -> Result<DensityMatrix> {
    check_square(m)?;
    let herm_defect = (m - m.adjoint()).norm() / norm_scale(m);
    if herm_defect > tol {
        return Err(Error::NotHermitian {
            defect: herm_defect,
            tol,
        });
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let trace_dev = (sym.trace().re - 1.0).abs();
    if trace_dev > tol {
        return Err(Error::TraceDeviation {
            deviation: trace_dev,
            tol,
        });
    }
    let (values, vectors) = sorted_hermitian_eigen(&sym)?;
    if let Some(&min) = values.first() {
        if min < -tol {
            return Err(Error::NegativeEigenvalue {
                eigenvalue: min,
                tol,
            });
        }
    }
    let clipped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let dim = sym.nrows();
    let diag = ComplexMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(clipped[i] / total, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let rebuilt = &vectors * diag * vectors.adjoint();
    let sym2 = (&rebuilt + rebuilt.adjoint()).scale(0.5);
    Ok(DensityMatrix {
        operator: HermitianOperator { matrix: sym2 },
    })
}

/// Trace distance (1/2)|rho - sigma|_1.
pub fn trace_distance(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let diff = rho - sigma;
    let sym = (&diff + diff.adjoint()).scale(0.5);
    let (values, _) = sorted_hermitian_eigen(&sym)?;
    Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
}

/// Hermitian eigendecomposition with ascending eigenvalues and a canonical
/// column phase (largest-modulus entry made real positive). Returns
/// (eigenvalues, eigenvector matrix).
pub(crate) fn sorted_hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let dim = check_square(m)?;
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("finite eigenvalues")
    });
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = ComplexMatrix::zeros(dim, dim);
    for (col, &k) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).clone_owned();
        // Canonical phase: rotate so the largest-modulus entry is real >= 0.
        let mut best = 0;
        for i in 1..dim {
            if v[i].norm_sqr() > v[best].norm_sqr() {
                best = i;
            }
        }
        let a = v[best];
        if a.norm() > 0.0 {
            let phase = a / a.norm();
            v *= phase.conj();
        }
        vectors.set_column(col, &v);
    }
    // Guard against a silently bad decomposition.
    let diag = ComplexMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(values[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let residual = (&vectors * diag * vectors.adjoint() - m).norm();
    let tol = 1e-10 * norm_scale(m);
    if residual > tol {
        return Err(Error::EigenResidual { residual, tol });
    }
    Ok((values, vectors))
}

/// Pauli sigma_x.
pub fn pauli_x() -> HermitianOperator {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 1)] = Complex64::new(1.0, 0.0);
    m[(1, 0)] = Complex64::new(1.0, 0.0);
    HermitianOperator { matrix: m }
}

/// Pauli sigma_y.
pub fn pauli_y() -> HermitianOperator {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 1)] = Complex64::new(0.0, -1.0);
    m[(1, 0)] = Complex64::new(0.0, 1.0);
    HermitianOperator { matrix: m }
}

/// Pauli sigma_z.
pub fn pauli_z() -> HermitianOperator {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 0)] = Complex64::new(1.0, 0.0);
    m[(1, 1)] = Complex64::new(-1.0, 0.0);
    HermitianOperator { matrix: m }
}
