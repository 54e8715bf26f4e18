//! Finite-difference verification of the connection geometry underneath the
//! gauge potential: right Maurer-Cartan forms on unitary curves, their
//! right-invariance and left-translation covariance, the two connection
//! axioms under both action conventions, the flatness (structure) identity
//! on two-parameter families, and the frame gauge transform u -> u v.
//!
//! All derivatives are central differences with caller-supplied step h
//! (default 1e-4 balances O(h^2) truncation against O(eps/h) cancellation
//! in double precision). Residuals are Frobenius norms.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{commutator, ComplexMatrix, HermitianOperator, UnitaryMatrix};
use crate::spectral::EigenFrame;

/// Default finite-difference step for the geometry checks.
pub const DEFAULT_STEP: f64 = 1e-4;

/// A smooth curve t -> g(t) in the unitary group, evaluated on demand.
pub struct GroupCurve {
    eval: Box<dyn Fn(f64) -> UnitaryMatrix + Send + Sync>,
    t_min: f64,
    t_max: f64,
    dim: usize,
}

impl GroupCurve {
    pub fn new<F>(t_min: f64, t_max: f64, dim: usize, eval: F) -> Self
    where
        F: Fn(f64) -> UnitaryMatrix + Send + Sync + 'static,
    {
        Self {
            eval: Box::new(eval),
            t_min,
            t_max,
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.t_min, self.t_max)
    }

    /// Evaluate, checking the domain with margin `h` around `t`.
    pub fn at(&self, t: f64, h: f64) -> Result<UnitaryMatrix> {
        if t - h < self.t_min || t + h > self.t_max {
            return Err(Error::OutsideDomain {
                t,
                h,
                lo: self.t_min,
                hi: self.t_max,
            });
        }
        Ok((self.eval)(t))
    }
}

/// An element of the unitary Lie algebra: an anti-Hermitian matrix, with
/// the anti-Hermiticity tolerance supplied by the caller (finite-difference
/// outputs carry O(h^2) symmetric noise).
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    matrix: ComplexMatrix,
}

impl AlgebraElement {
    pub fn new(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        let defect = (&matrix + matrix.adjoint()).norm();
        if defect > tol {
            return Err(Error::NotHermitian {
                defect,
                tol,
            });
        }
        Ok(Self { matrix })
    }

    /// -i H for a Hermitian generator H.
    pub fn from_hermitian(h: &HermitianOperator) -> Self {
        Self {
            matrix: h.matrix().map(|z| z * Complex64::new(0.0, -1.0)),
        }
    }

    /// Random anti-Hermitian matrix with O(1) norm.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, dim: usize) -> Self {
        Self::from_hermitian(&HermitianOperator::random(rng, dim))
    }

    fn from_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// |M + M^H|_F, the distance from the Lie algebra.
    pub fn anti_hermiticity_defect(&self) -> f64 {
        (&self.matrix + self.matrix.adjoint()).norm()
    }
}

/// A two-parameter family (s, t) -> g(s, t) with its finite-difference step.
pub struct TwoParamFamily {
    eval: Box<dyn Fn(f64, f64) -> UnitaryMatrix + Send + Sync>,
    s_range: (f64, f64),
    t_range: (f64, f64),
    step: f64,
}

impl TwoParamFamily {
    pub fn new<F>(s_range: (f64, f64), t_range: (f64, f64), step: f64, eval: F) -> Self
    where
        F: Fn(f64, f64) -> UnitaryMatrix + Send + Sync + 'static,
    {
        Self {
            eval: Box::new(eval),
            s_range,
            t_range,
            step,
        }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    fn at(&self, s: f64, t: f64, margin: f64) -> Result<ComplexMatrix> {
        if s - margin < self.s_range.0 || s + margin > self.s_range.1 {
            return Err(Error::OutsideDomain {
                t: s,
                h: margin,
                lo: self.s_range.0,
                hi: self.s_range.1,
            });
        }
        if t - margin < self.t_range.0 || t + margin > self.t_range.1 {
            return Err(Error::OutsideDomain {
                t,
                h: margin,
                lo: self.t_range.0,
                hi: self.t_range.1,
            });
        }
        Ok((self.eval)(s, t).into_matrix())
    }
}

/// The right Maurer-Cartan form of a curve: theta^R = dg/dt g^{-1},
/// differenced centrally with step h (the inverse is the adjoint).
pub fn mc_right(curve: &GroupCurve, t: f64, h: f64) -> Result<AlgebraElement> {
    let g_plus = curve.at(t + h, 0.0)?;
    let g_minus = curve.at(t - h, 0.0)?;
    let g = curve.at(t, 0.0)?;
    let gdot = (g_plus.matrix() - g_minus.matrix()).scale(1.0 / (2.0 * h));
    Ok(AlgebraElement::from_unchecked(gdot * g.matrix().adjoint()))
}

/// Residual |theta^R[g h0] - theta^R[g]| at t: right translation by a fixed
/// h0 cancels algebraically, so the residual is pure finite-difference
/// noise, bounded by C h^2.
pub fn check_right_invariance(
    curve: &GroupCurve,
    h0: &UnitaryMatrix,
    t: f64,
    h: f64,
) -> Result<f64> {
    if h0.dim() != curve.dim() {
        return Err(Error::DimensionMismatch {
            left: h0.dim(),
            right: curve.dim(),
        });
    }
    let plain = mc_right(curve, t, h)?;
    // theta^R of the translated curve from the same three evaluations:
    // d(g h0)/dt (g h0)^{-1} = gdot h0 h0^H g^H.
    let g_plus = curve.at(t + h, 0.0)?;
    let g_minus = curve.at(t - h, 0.0)?;
    let g = curve.at(t, 0.0)?;
    let gdot_translated =
        (g_plus.matrix() * h0.matrix() - g_minus.matrix() * h0.matrix()).scale(1.0 / (2.0 * h));
    let translated = gdot_translated * (g.matrix() * h0.matrix()).adjoint();
    Ok((translated - plain.matrix()).norm())
}

/// Which action generates the fundamental vector field in
/// [`check_connection_axioms`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionConvention {
    /// v = d/ds (g exp(s A)) at s = 0.
    RightAction,
    /// v = d/ds (exp(s A) g) at s = 0.
    LeftAction,
}

/// Apply the right Maurer-Cartan form to the finite-difference fundamental
/// vector field of A at g and return |theta^R(v) - A|.
///
/// Under the left action the residual vanishes as O(h^2); under the right
/// action it converges to |Ad(g) A - A| instead. Both conventions are
/// exposed so the measured behaviour is part of the record.
pub fn check_connection_axioms(
    g: &UnitaryMatrix,
    a: &AlgebraElement,
    h: f64,
    convention: ActionConvention,
) -> f64 {
    // exp(h A) = exp(-i h (iA)) with iA Hermitian.
    let generator = HermitianOperator::hermitized(a.matrix().map(|z| z * Complex64::new(0.0, 1.0)))
        .expect("iA is Hermitian for anti-Hermitian A");
    let exp_plus = crate::operators::skew_exp(&generator, h).expect("finite step");
    let exp_minus = crate::operators::skew_exp(&generator, -h).expect("finite step");
    let v = match convention {
        ActionConvention::RightAction => {
            (g.matrix() * exp_plus.matrix() - g.matrix() * exp_minus.matrix())
                .scale(1.0 / (2.0 * h))
        }
        ActionConvention::LeftAction => {
            (exp_plus.matrix() * g.matrix() - exp_minus.matrix() * g.matrix())
                .scale(1.0 / (2.0 * h))
        }
    };
    let theta = v * g.matrix().adjoint();
    (theta - a.matrix()).norm()
}

/// |Ad(g) A - A| = |g A g^{-1} - A|, the limit of the right-action axiom
/// residual.
pub fn adjoint_defect(g: &UnitaryMatrix, a: &AlgebraElement) -> f64 {
    (g.matrix() * a.matrix() * g.matrix().adjoint() - a.matrix()).norm()
}

/// Structure-identity (flatness) residual of a two-parameter family at
/// (s, t): |d_s A_t - d_t A_s - [A_s, A_t]| with A_x = (d_x g) g^{-1}.
///
/// Vanishes identically for exact derivatives; the finite-difference value
/// decays as O(h^2). Mixed derivatives use centered 4-point stencils.
pub fn flatness_residual(fam: &TwoParamFamily, s: f64, t: f64) -> Result<f64> {
    let h = fam.step;
    // Margin 2h: the outer stencil shifts the inner one by +-h.
    fam.at(s, t, 2.0 * h)?;

    let a_t = |ss: f64| -> Result<ComplexMatrix> {
        let plus = fam.at(ss, t + h, 0.0)?;
        let minus = fam.at(ss, t - h, 0.0)?;
        let center = fam.at(ss, t, 0.0)?;
        Ok((plus - minus).scale(1.0 / (2.0 * h)) * center.adjoint())
    };
    let a_s = |tt: f64| -> Result<ComplexMatrix> {
        let plus = fam.at(s + h, tt, 0.0)?;
        let minus = fam.at(s - h, tt, 0.0)?;
        let center = fam.at(s, tt, 0.0)?;
        Ok((plus - minus).scale(1.0 / (2.0 * h)) * center.adjoint())
    };

    let ds_at = (a_t(s + h)? - a_t(s - h)?).scale(1.0 / (2.0 * h));
    let dt_as = (a_s(t + h)? - a_s(t - h)?).scale(1.0 / (2.0 * h));
    let bracket = commutator(&a_s(t)?, &a_t(s)?)?;
    Ok((ds_at - dt_as - bracket).norm())
}

/// Off-block-diagonal Frobenius norm with respect to block sizes.
fn off_block_norm(m: &ComplexMatrix, block_dims: &[usize]) -> f64 {
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

/// Gauge-transform an aligned frame path by a block-diagonal unitary path:
/// u_i -> u_i v_i. Each v_i must be block-diagonal for the frame's own
/// degeneracy structure within 1e-10.
///
/// Downstream, the potential transforms as A -> A + u (i dv/dt v^H) u^H;
/// the invariant functionals must be unchanged (verified by their property
/// tests, not enforced here).
pub fn frame_gauge_transform(
    frames: &[EigenFrame],
    v_path: &[UnitaryMatrix],
) -> Result<Vec<EigenFrame>> {
    if frames.len() != v_path.len() {
        return Err(Error::DimensionMismatch {
            left: frames.len(),
            right: v_path.len(),
        });
    }
    let mut out = Vec::with_capacity(frames.len());
    for (frame, v) in frames.iter().zip(v_path) {
        if v.dim() != frame.dim() {
            return Err(Error::DimensionMismatch {
                left: v.dim(),
                right: frame.dim(),
            });
        }
        let off = off_block_norm(v.matrix(), frame.structure().multiplicities());
        if off > 1e-10 {
            return Err(Error::NotBlockDiagonal {
                norm: off,
                tol: 1e-10,
            });
        }
        let new_frame = UnitaryMatrix::new(frame.frame().matrix() * v.matrix())?;
        out.push(EigenFrame::new(new_frame, frame.structure().clone())?);
    }
    Ok(out)
}

/// Least-squares slope of ln(residual) against ln(h): the fitted
/// convergence order of a residual sequence.
pub fn fitted_order(steps: &[f64], residuals: &[f64]) -> f64 {
    assert_eq!(steps.len(), residuals.len());
    let pairs: Vec<(f64, f64)> = steps
        .iter()
        .zip(residuals)
        .filter(|(_, &r)| r > 0.0)
        .map(|(&h, &r)| (h.ln(), r.ln()))
        .collect();
    if pairs.len() < 2 {
        return f64::NAN;
    }
    let n = pairs.len() as f64;
    let mean_x = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pairs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let var: f64 = pairs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{pauli_x, pauli_z, skew_exp};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z_rotation_curve(omega: f64) -> GroupCurve {
        GroupCurve::new(-10.0, 10.0, 2, move |t| {
            skew_exp(&pauli_z(), omega * t / 2.0).expect("finite")
        })
    }

    #[test]
    fn mc_right_of_z_rotation_is_minus_i_omega_sigma_z_half() {
        let omega = 0.9;
        let curve = z_rotation_curve(omega);
        let theta = mc_right(&curve, 0.4, 1e-4).unwrap();
        let expected = pauli_z()
            .matrix()
            .map(|z| z * Complex64::new(0.0, -omega / 2.0));
        assert!((theta.matrix() - expected).norm() < 1e-7);
        assert!(theta.anti_hermiticity_defect() < 1e-7);
    }

    #[test]
    fn mc_right_of_constant_curve_vanishes() {
        let curve = GroupCurve::new(-1.0, 1.0, 2, |_| UnitaryMatrix::identity(2));
        let theta = mc_right(&curve, 0.0, 1e-4).unwrap();
        assert!(theta.matrix().norm() < 1e-12);
    }

    #[test]
    fn mc_right_rejects_domain_violation() {
        let curve = z_rotation_curve(1.0);
        assert!(matches!(
            mc_right(&curve, 10.0, 1e-4),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn right_invariance_residual_sits_at_rounding_level() {
        // The h0 h0^{-1} cancellation is algebraic and survives the
        // difference quotient verbatim, so the residual carries no h^2
        // truncation term at all; it is rounding noise, far below the
        // C h^2 contract at every step size.
        let curve = GroupCurve::new(-5.0, 5.0, 2, |t| {
            skew_exp(&pauli_x(), t).expect("finite")
        });
        let h0 = skew_exp(&pauli_z(), 1.0).unwrap();
        for h in [2e-3, 1e-3, 5e-4] {
            let r = check_right_invariance(&curve, &h0, 0.3, h).unwrap();
            assert!(r <= 1e-10, "residual {r:.3e} at h = {h}");
            assert!(r <= h * h, "residual {r:.3e} breaches the h^2 contract");
        }
    }

    #[test]
    fn right_invariance_exact_for_commuting_diagonal_curve() {
        let curve = GroupCurve::new(-2.0, 2.0, 2, |t| {
            let m = ComplexMatrix::from_fn(2, 2, |i, j| {
                if i == j {
                    Complex64::from_polar(1.0, if i == 0 { 0.6 * t } else { -0.2 * t })
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            UnitaryMatrix::new(m).expect("diagonal phases")
        });
        let h0 = UnitaryMatrix::new(ComplexMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, 0.8 * (i as f64 + 1.0))
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
        .unwrap();
        let r = check_right_invariance(&curve, &h0, 0.1, 1e-4).unwrap();
        assert!(r < 1e-10);
    }

    #[test]
    fn right_invariance_with_identity_translation_is_exact() {
        let curve = z_rotation_curve(1.1);
        let r = check_right_invariance(&curve, &UnitaryMatrix::identity(2), 0.2, 1e-3).unwrap();
        assert!(r == 0.0);
    }

    #[test]
    fn left_translation_covariance_is_ad_conjugation() {
        // theta^R[h0 g](t) = h0 theta^R[g](t) h0^{-1} + O(h^2).
        let curve = GroupCurve::new(-5.0, 5.0, 2, |t| skew_exp(&pauli_x(), t).expect("finite"));
        let h0 = skew_exp(&pauli_z(), 0.7).unwrap();
        let h = 1e-4;
        let t = 0.45;
        let plain = mc_right(&curve, t, h).unwrap();
        let h0c = h0.clone();
        let translated_curve = GroupCurve::new(-5.0, 5.0, 2, move |t| {
            UnitaryMatrix::new(h0c.matrix() * skew_exp(&pauli_x(), t).expect("finite").matrix())
                .expect("product of unitaries")
        });
        let translated = mc_right(&translated_curve, t, h).unwrap();
        let expected = h0.matrix() * plain.matrix() * h0.matrix().adjoint();
        assert!((translated.matrix() - expected).norm() < 1e-7);
    }

    #[test]
    fn connection_axiom_conventions_coincide_at_identity() {
        let a = AlgebraElement::from_hermitian(&pauli_z());
        let g = UnitaryMatrix::identity(2);
        let r_right = check_connection_axioms(&g, &a, 1e-4, ActionConvention::RightAction);
        let r_left = check_connection_axioms(&g, &a, 1e-4, ActionConvention::LeftAction);
        assert!(r_right < 1e-8);
        assert!(r_left < 1e-8);
    }

    #[test]
    fn connection_axiom_left_action_converges_to_zero() {
        let g = skew_exp(&pauli_x(), 1.0).unwrap();
        let a = AlgebraElement::from_hermitian(&pauli_z());
        let r1 = check_connection_axioms(&g, &a, 2e-3, ActionConvention::LeftAction);
        let r2 = check_connection_axioms(&g, &a, 1e-3, ActionConvention::LeftAction);
        assert!(r1 < 1e-4);
        let ratio = r1 / r2;
        assert!((2.5..6.0).contains(&ratio), "left-action ratio {ratio:.2}");
    }

    #[test]
    fn connection_axiom_right_action_converges_to_ad_defect() {
        let g = skew_exp(&pauli_x(), 1.0).unwrap();
        let a = AlgebraElement::from_hermitian(&pauli_z());
        let expected = adjoint_defect(&g, &a);
        assert!(expected > 0.1, "test needs a noncommuting pair");
        let r = check_connection_axioms(&g, &a, 1e-4, ActionConvention::RightAction);
        assert!((r - expected).abs() < 1e-6);
    }

    #[test]
    fn flatness_residual_two_generator_family() {
        let fam = TwoParamFamily::new((-1.0, 1.0), (-1.0, 1.0), 1e-3, |s, t| {
            UnitaryMatrix::new(
                skew_exp(&pauli_x(), s).expect("finite").matrix()
                    * skew_exp(&pauli_z(), t).expect("finite").matrix(),
            )
            .expect("product of unitaries")
        });
        let r = flatness_residual(&fam, 0.2, -0.1).unwrap();
        assert!(r < 1e-5, "flatness residual {r:.3e}");
        let fine = TwoParamFamily::new((-1.0, 1.0), (-1.0, 1.0), 5e-4, |s, t| {
            UnitaryMatrix::new(
                skew_exp(&pauli_x(), s).expect("finite").matrix()
                    * skew_exp(&pauli_z(), t).expect("finite").matrix(),
            )
            .expect("product of unitaries")
        });
        let r_fine = flatness_residual(&fine, 0.2, -0.1).unwrap();
        let ratio = r / r_fine;
        assert!((2.5..6.0).contains(&ratio), "flatness ratio {ratio:.2}");
    }

    #[test]
    fn flatness_residual_abelian_family_is_tiny() {
        let fam = TwoParamFamily::new((-1.0, 1.0), (-1.0, 1.0), 1e-3, |s, t| {
            skew_exp(&pauli_z(), s + t).expect("finite")
        });
        let r = flatness_residual(&fam, 0.0, 0.3).unwrap();
        assert!(r < 1e-9, "abelian flatness residual {r:.3e}");
    }

    #[test]
    fn flatness_residual_constant_family_is_zero() {
        let fam = TwoParamFamily::new((-1.0, 1.0), (-1.0, 1.0), 1e-3, |_, _| {
            UnitaryMatrix::identity(3)
        });
        let r = flatness_residual(&fam, 0.0, 0.0).unwrap();
        assert!(r == 0.0);
    }

    #[test]
    fn flatness_rejects_insufficient_margin() {
        let fam = TwoParamFamily::new((-1.0, 1.0), (-1.0, 1.0), 1e-2, |s, t| {
            skew_exp(&pauli_z(), s + t).expect("finite")
        });
        assert!(matches!(
            flatness_residual(&fam, 0.999, 0.0),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn frame_gauge_transform_rejects_off_block_entries() {
        let ef = crate::spectral::eigenframe(&pauli_z(), 1e-8).unwrap();
        let frames = vec![ef.clone(), ef];
        // sigma_z structure is (1, 1): any off-diagonal entry is off-block.
        let bad = skew_exp(&pauli_x(), 1e-3).unwrap();
        assert!(matches!(
            frame_gauge_transform(&frames, &[bad.clone(), bad]),
            Err(Error::NotBlockDiagonal { .. })
        ));
    }

    #[test]
    fn frame_gauge_transform_applies_block_phases() {
        let ef = crate::spectral::eigenframe(&pauli_z(), 1e-8).unwrap();
        let v = UnitaryMatrix::new(ComplexMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, 0.3 * (i as f64 + 1.0))
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
        .unwrap();
        let out = frame_gauge_transform(std::slice::from_ref(&ef), std::slice::from_ref(&v)).unwrap();
        let expected = ef.frame().matrix() * v.matrix();
        assert!((out[0].frame().matrix() - expected).norm() < 1e-13);
    }

    #[test]
    fn fitted_order_recovers_quadratic_decay() {
        let hs = [1e-2, 5e-3, 2.5e-3];
        let rs: Vec<f64> = hs.iter().map(|h| 3.0 * h * h).collect();
        let order = fitted_order(&hs, &rs);
        assert!((order - 2.0).abs() < 1e-6);
    }

    #[test]
    fn algebra_element_tolerance_is_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = AlgebraElement::random(&mut rng, 3);
        assert!(a.anti_hermiticity_defect() < 1e-12);
        let bad = pauli_z().matrix().clone();
        assert!(AlgebraElement::new(bad, 1e-10).is_err());
    }
}
