//! The thermodynamic group U(n_1) x ... x U(n_k) attached to a degeneracy
//! structure: Haar sampling of its elements, the conjugation action on
//! states, the twirling projection onto block-scalar form, and the
//! gauge-invariant entropy / functionals built on top of it.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::operators::{
    trace_of_product, von_neumann_entropy, ComplexMatrix, DensityMatrix, UnitaryMatrix,
};
use crate::spectral::{DegeneracyStructure, EigenFrame};

/// The group of unitaries commuting with a given observable: one unitary
/// block per degenerate eigenvalue cluster, expressed in the observable's
/// eigenframe.
#[derive(Debug, Clone)]
pub struct ThermodynamicGroup {
    block_dims: Vec<usize>,
    frame: EigenFrame,
}

/// One sampled element of the thermodynamic group.
#[derive(Debug, Clone)]
pub struct GroupElement {
    matrix: UnitaryMatrix,
    block_dims: Vec<usize>,
}

impl GroupElement {
    pub fn matrix(&self) -> &UnitaryMatrix {
        &self.matrix
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Construct the thermodynamic group of a structure/frame pair.
///
/// The block dimensions are the degeneracy multiplicities in ascending
/// eigenvalue order.
pub fn thermodynamic_group(
    structure: &DegeneracyStructure,
    frame: &EigenFrame,
) -> Result<ThermodynamicGroup> {
    if structure.dim() != frame.dim() {
        return Err(Error::DimensionMismatch {
            left: structure.dim(),
            right: frame.dim(),
        });
    }
    if structure.multiplicities() != frame.structure().multiplicities() {
        return Err(Error::StructureMismatch {
            reason: format!(
                "structure multiplicities {:?} do not match the frame's {:?}",
                structure.multiplicities(),
                frame.structure().multiplicities()
            ),
        });
    }
    let same_values = structure
        .distinct_values()
        .iter()
        .zip(frame.structure().distinct_values())
        .all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0));
    if !same_values {
        return Err(Error::StructureMismatch {
            reason: "structure eigenvalues do not match the frame's".to_string(),
        });
    }
    Ok(ThermodynamicGroup {
        block_dims: structure.multiplicities().to_vec(),
        frame: frame.clone(),
    })
}

impl ThermodynamicGroup {
    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn frame(&self) -> &EigenFrame {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    /// Draw one Haar-distributed element, deterministically for a fixed seed.
    pub fn sample_haar(&self, seed: u64) -> GroupElement {
        sample_haar(self, seed)
    }

    /// Off-block-diagonal Frobenius norm of `u` in this group's frame; zero
    /// (within tolerance) iff `u` lies in the group.
    pub fn off_block_norm(&self, u: &UnitaryMatrix) -> f64 {
        let in_frame =
            self.frame.frame().matrix().adjoint() * u.matrix() * self.frame.frame().matrix();
        off_block_norm_of(&in_frame, &self.block_dims)
    }
}

fn off_block_norm_of(m: &ComplexMatrix, block_dims: &[usize]) -> f64 {
    let mut block_of = Vec::with_capacity(m.nrows());
    for (b, &n) in block_dims.iter().enumerate() {
        block_of.extend(std::iter::repeat_n(b, n));
    }
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if block_of[i] != block_of[j] {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Exact-Haar unitary on U(n): complex Ginibre matrix, thin QR, then the
/// R-phase normalization Q diag(r_jj/|r_jj|)^{-1}.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> UnitaryMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    if dim == 1 {
        // The 1x1 QR with phase normalization reduces to z/|z| exactly.
        let z = g[(0, 0)];
        let mut out = ComplexMatrix::zeros(1, 1);
        out[(0, 0)] = z / z.norm();
        return UnitaryMatrix::new(out).expect("unit phase");
    }
    let qr = g.qr();
    let r = qr.r();
    let q = qr.q();
    let phases = DVector::from_iterator(
        dim,
        (0..dim).map(|j| {
            let rjj = r[(j, j)];
            if rjj.norm() > 0.0 {
                rjj / rjj.norm()
            } else {
                Complex64::new(1.0, 0.0)
            }
        }),
    );
    let mut out = q;
    for j in 0..dim {
        let col = out.column(j) * phases[j].conj();
        out.set_column(j, &col.clone_owned());
    }
    UnitaryMatrix::new(out).expect("QR factor is unitary")
}

/// Haar sample from the thermodynamic group: independent Haar blocks
/// assembled block-diagonally in the frame basis, then conjugated back.
pub fn sample_haar(group: &ThermodynamicGroup, seed: u64) -> GroupElement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_haar_with(group, &mut rng)
}

/// Same as [`sample_haar`] but drawing from a caller-owned generator, for
/// Monte-Carlo loops that consume a single stream.
pub fn sample_haar_with<R: Rng + ?Sized>(group: &ThermodynamicGroup, rng: &mut R) -> GroupElement {
    let dim = group.dim();
    let mut block_diag = ComplexMatrix::zeros(dim, dim);
    let mut start = 0;
    for &n in &group.block_dims {
        let block = haar_unitary(rng, n);
        block_diag
            .view_mut((start, start), (n, n))
            .copy_from(block.matrix());
        start += n;
    }
    let u = group.frame.frame().matrix();
    let v = u * block_diag * u.adjoint();
    GroupElement {
        matrix: UnitaryMatrix::new(v).expect("conjugated block unitary stays unitary"),
        block_dims: group.block_dims.clone(),
    }
}

/// Deterministic per-(stream, index) seed derivation for Monte-Carlo loops,
/// via two rounds of SplitMix64.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    splitmix(seed ^ splitmix(stream.wrapping_add(1)) ^ splitmix(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// The group action rho -> V rho V^H. Leaves every expectation of the
/// generating observable unchanged.
pub fn act(v: &GroupElement, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if v.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: v.dim(),
            right: rho.dim(),
        });
    }
    Ok(rho.conjugated(v.matrix.matrix()))
}

/// Twirling projection onto the block-scalar commutant:
/// rho^E = sum_k Tr(Pi_k rho) / n_k * Pi_k.
///
/// Equal to the Haar average of V rho V^H over the thermodynamic group, but
/// computed by the closed block formula (Monte-Carlo averaging is a test
/// oracle only).
pub fn twirl(rho: &DensityMatrix, structure: &DegeneracyStructure) -> Result<DensityMatrix> {
    if rho.dim() != structure.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: structure.dim(),
        });
    }
    let dim = rho.dim();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (pk, &nk) in structure
        .projectors()
        .iter()
        .zip(structure.multiplicities())
    {
        let weight = trace_of_product(pk.matrix(), rho.matrix()).re;
        out += pk.matrix().scale(weight / nk as f64);
    }
    DensityMatrix::new(out)
}

/// Gauge-invariant entropy S_GT(rho) = S_vn(rho^E) in nats.
pub fn gauge_entropy(rho: &DensityMatrix, structure: &DegeneracyStructure) -> Result<f64> {
    Ok(von_neumann_entropy(&twirl(rho, structure)?))
}

/// Registered unitarily invariant base functionals for [`invariant_functional`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionalHandle {
    /// Von Neumann entropy in nats.
    VonNeumannEntropy,
    /// Purity Tr(rho^2).
    Purity,
    /// p-norm of the spectrum, (sum_i |lambda_i|^p)^(1/p), p >= 1.
    SpectralPNorm(f64),
}

impl FunctionalHandle {
    /// Parse a textual handle; unregistered names are an error.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "entropy" | "von_neumann_entropy" => Ok(Self::VonNeumannEntropy),
            "purity" => Ok(Self::Purity),
            other => {
                if let Some(p) = other.strip_prefix("spectral_p_norm:") {
                    if let Ok(p) = p.parse::<f64>() {
                        if p >= 1.0 && p.is_finite() {
                            return Ok(Self::SpectralPNorm(p));
                        }
                    }
                }
                Err(Error::UnknownFunctional {
                    name: other.to_string(),
                })
            }
        }
    }

    fn evaluate(&self, rho: &DensityMatrix) -> f64 {
        match self {
            Self::VonNeumannEntropy => von_neumann_entropy(rho),
            Self::Purity => rho.purity(),
            Self::SpectralPNorm(p) => {
                let (values, _) = crate::operators::sorted_hermitian_eigen(rho.matrix())
                    .expect("density matrix eigendecomposition");
                values
                    .iter()
                    .map(|v| v.abs().powf(*p))
                    .sum::<f64>()
                    .powf(1.0 / p)
            }
        }
    }
}

/// General gauge-invariant functional F_inv(rho) = F(rho^E) for a registered
/// unitarily invariant F.
pub fn invariant_functional(
    f: FunctionalHandle,
    rho: &DensityMatrix,
    structure: &DegeneracyStructure,
) -> Result<f64> {
    Ok(f.evaluate(&twirl(rho, structure)?))
}
