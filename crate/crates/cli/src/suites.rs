//! The `verify` property suites: first-law closure (configured and over
//! random family draws), gauge invariance of the functionals, the
//! Monte-Carlo twirl oracle, forced entropy values, and the geometry
//! convergence checks. Every suite is deterministic for a fixed seed, so
//! two verify runs with the same config produce identical reports.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thermogauge_core::dynamics::{
    assemble_trajectory, HamiltonianFamily, HamiltonianFamilySpec, TrajectoryGrid,
};
use thermogauge_core::functionals::{
    first_law_report_with_tol, invariant_heat, invariant_work,
};
use thermogauge_core::geometry::{
    adjoint_defect, check_connection_axioms, check_right_invariance, fitted_order,
    flatness_residual, mc_right, ActionConvention, AlgebraElement, GroupCurve, TwoParamFamily,
};
use thermogauge_core::operators::{
    expectation, pauli_x, pauli_z, skew_exp, trace_distance, ComplexMatrix, DensityMatrix,
    HermitianOperator,
};
use thermogauge_core::spectral::{eigenframe, in_frame_diagonal};
use thermogauge_core::thermo_group::{
    act, derive_seed, gauge_entropy, haar_unitary, sample_haar_with, thermodynamic_group, twirl,
};

use crate::config::RunConfig;
use crate::pipeline::{trajectory_for, RunError};
use crate::report::{GeometryCheckJson, PartitionJson, SuiteJson, ThermoRecordJson};

/// Tolerance of the gauge-invariance suite (relative to scale).
pub const GAUGE_INVARIANCE_TOL: f64 = 1e-7;
/// Twirl-oracle sample count; the bound is 5/sqrt(N_s).
pub const TWIRL_ORACLE_SAMPLES: usize = 100_000;
/// Forced entropy identities must hold to this absolute tolerance.
pub const ENTROPY_FORCED_TOL: f64 = 1e-10;
/// Convergence orders must sit within this window of 2.
pub const ORDER_WINDOW: f64 = 0.3;

const STREAM_RANDOM_FAMILY: u64 = 1;
const STREAM_GAUGE_PATHS: u64 = 2;
const STREAM_TWIRL: u64 = 3;
const STREAM_GEOMETRY: u64 = 4;

pub struct VerifyOutput {
    pub suites: Vec<SuiteJson>,
    pub geometry_checks: Vec<GeometryCheckJson>,
    pub record: ThermoRecordJson,
    pub partition: PartitionJson,
    pub all_pass: bool,
}

/// A random smooth two-tone family with a random full-rank initial state,
/// realized as a custom grid.
pub fn random_smooth_run<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    n: usize,
    tau: f64,
) -> (HamiltonianFamilySpec, DensityMatrix) {
    let scale = 1.0 / (dim as f64).sqrt();
    let term = |rng: &mut R| {
        HermitianOperator::new(HermitianOperator::random(rng, dim).matrix().scale(scale)).unwrap()
    };
    let a0 = term(rng);
    let a1 = term(rng);
    let a2 = term(rng);
    let w1: f64 = rng.random_range(0.3..1.0);
    let w2: f64 = rng.random_range(0.3..1.0);
    let p1: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let p2: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let matrices: Vec<HermitianOperator> = (0..=n)
        .map(|i| {
            let t = tau * i as f64 / n as f64;
            HermitianOperator::new(
                a0.matrix()
                    + a1.matrix().scale((w1 * t + p1).cos())
                    + a2.matrix().scale((w2 * t + p2).sin()),
            )
            .unwrap()
        })
        .collect();
    let spec = HamiltonianFamilySpec::new(HamiltonianFamily::CustomGrid { matrices }, dim).unwrap();
    let rho0 = DensityMatrix::random(rng, dim);
    (spec, rho0)
}

fn first_law_scale(r: &thermogauge_core::functionals::ThermoRecord) -> f64 {
    (r.u_final - r.u_initial)
        .abs()
        .max(r.w_inv.abs())
        .max(r.q_inv.abs())
        .max(1.0)
}

fn suite_first_law_configured(traj: &TrajectoryGrid, residual_tol: f64) -> (SuiteJson, ThermoRecordJson, PartitionJson) {
    let record = first_law_report_with_tol(traj, f64::INFINITY).expect("ungated ledger");
    let rel = record.first_law_residual.abs() / first_law_scale(&record);
    let suite = SuiteJson {
        name: "first_law_configured".into(),
        samples: 1,
        max_residual: rel,
        tolerance: residual_tol,
        pass: rel <= residual_tol,
    };
    let partition = PartitionJson::from(&record.partition);
    (suite, ThermoRecordJson::from(&record), partition)
}

fn suite_first_law_random(config: &RunConfig) -> Result<SuiteJson, RunError> {
    let draws = 8usize;
    let mut worst: f64 = 0.0;
    for k in 0..draws {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
            config.seed,
            STREAM_RANDOM_FAMILY,
            k as u64,
        ));
        let dim = [2usize, 3, 4][k % 3];
        let (spec, rho0) = random_smooth_run(&mut rng, dim, config.grid.n, config.grid.tau);
        let traj = assemble_trajectory(
            &spec,
            &rho0,
            config.grid.n,
            config.grid.tau,
            config.tolerances.cluster_tol,
        )
        .map_err(|e| RunError::Numerical(e.to_string()))?;
        let record = first_law_report_with_tol(&traj, f64::INFINITY)
            .map_err(|e| RunError::Numerical(e.to_string()))?;
        worst = worst.max(record.first_law_residual.abs() / first_law_scale(&record));
    }
    Ok(SuiteJson {
        name: "first_law_random_families".into(),
        samples: draws,
        max_residual: worst,
        tolerance: config.tolerances.residual_tol,
        pass: worst <= config.tolerances.residual_tol,
    })
}

fn suite_gauge_invariance(config: &RunConfig, traj: &TrajectoryGrid) -> Result<SuiteJson, RunError> {
    let paths = 20usize;
    let last = traj.len() - 1;
    let w0 = invariant_work(traj).map_err(|e| RunError::Numerical(e.to_string()))?;
    let q0 = invariant_heat(traj).map_err(|e| RunError::Numerical(e.to_string()))?;
    let u0 = expectation(&traj.states()[0], &traj.hamiltonians()[0])
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let u1 = expectation(&traj.states()[last], &traj.hamiltonians()[last])
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let s0 = gauge_entropy(&traj.states()[0], traj.frames()[0].structure())
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let s1 = gauge_entropy(&traj.states()[last], traj.frames()[last].structure())
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let scale = w0.abs().max(q0.abs()).max((u1 - u0).abs()).max(1.0);

    let mut worst: f64 = 0.0;
    for path in 0..paths {
        let states: Vec<DensityMatrix> = (0..traj.len())
            .map(|i| {
                let frame = &traj.frames()[i];
                let group = thermodynamic_group(frame.structure(), frame)
                    .expect("frame carries its own structure");
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                    config.seed,
                    STREAM_GAUGE_PATHS + path as u64,
                    i as u64,
                ));
                let v = sample_haar_with(&group, &mut rng);
                act(&v, &traj.states()[i]).expect("matched dimensions")
            })
            .collect();
        let transformed = traj
            .with_states(states)
            .map_err(|e| RunError::Numerical(e.to_string()))?;
        let w = invariant_work(&transformed).map_err(|e| RunError::Numerical(e.to_string()))?;
        let q = invariant_heat(&transformed).map_err(|e| RunError::Numerical(e.to_string()))?;
        let u0t = expectation(&transformed.states()[0], &transformed.hamiltonians()[0])
            .map_err(|e| RunError::Numerical(e.to_string()))?;
        let u1t = expectation(&transformed.states()[last], &transformed.hamiltonians()[last])
            .map_err(|e| RunError::Numerical(e.to_string()))?;
        let s0t = gauge_entropy(&transformed.states()[0], transformed.frames()[0].structure())
            .map_err(|e| RunError::Numerical(e.to_string()))?;
        let s1t = gauge_entropy(
            &transformed.states()[last],
            transformed.frames()[last].structure(),
        )
        .map_err(|e| RunError::Numerical(e.to_string()))?;
        let dev = (w - w0)
            .abs()
            .max((q - q0).abs())
            .max((u0t - u0).abs())
            .max((u1t - u1).abs())
            .max((s0t - s0).abs())
            .max((s1t - s1).abs());
        worst = worst.max(dev / scale);
    }
    Ok(SuiteJson {
        name: "gauge_invariance".into(),
        samples: paths,
        max_residual: worst,
        tolerance: GAUGE_INVARIANCE_TOL,
        pass: worst <= GAUGE_INVARIANCE_TOL,
    })
}

fn suite_twirl_oracle(config: &RunConfig) -> SuiteJson {
    let structures: [&[usize]; 4] = [&[1, 1], &[2, 1], &[2, 2], &[3, 1]];
    let n_samples = TWIRL_ORACLE_SAMPLES;
    let bound = 5.0 / (n_samples as f64).sqrt();
    let mut worst: f64 = 0.0;
    for (k, block_dims) in structures.iter().enumerate() {
        let dim: usize = block_dims.iter().sum();
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_TWIRL, k as u64));
        // Observable with the requested block structure in a Haar frame.
        let u = haar_unitary(&mut rng, dim);
        let mut spectrum = Vec::with_capacity(dim);
        for (b, &nb) in block_dims.iter().enumerate() {
            spectrum.extend(std::iter::repeat_n(b as f64, nb));
        }
        let h = in_frame_diagonal(&u, &spectrum).expect("square input");
        let ef = eigenframe(&h, config.tolerances.cluster_tol).expect("clean spectrum");
        let group = thermodynamic_group(ef.structure(), &ef).expect("matched structure");
        let rho = DensityMatrix::random(&mut rng, dim);
        let closed = twirl(&rho, ef.structure()).expect("matched dimensions");
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for _ in 0..n_samples {
            let v = sample_haar_with(&group, &mut rng);
            acc += v.matrix().matrix() * rho.matrix() * v.matrix().matrix().adjoint();
        }
        let empirical = acc.scale(1.0 / n_samples as f64);
        let dist = trace_distance(closed.matrix(), &empirical).expect("matched dimensions");
        worst = worst.max(dist);
    }
    SuiteJson {
        name: "twirl_haar_oracle".into(),
        samples: structures.len() * n_samples,
        max_residual: worst,
        tolerance: bound,
        pass: worst <= bound,
    }
}

fn suite_entropy_forced(config: &RunConfig) -> SuiteJson {
    let mut worst: f64 = 0.0;
    // S_GT(|+><+|) with H = sigma_z is exactly ln 2.
    let ef = eigenframe(&pauli_z(), config.tolerances.cluster_tol).expect("sigma_z");
    let plus = DensityMatrix::uniform_superposition(2);
    let s = gauge_entropy(&plus, ef.structure()).expect("matched dimensions");
    worst = worst.max((s - 2.0_f64.ln()).abs());
    // S_GT of anything with H = I_d is exactly ln d.
    for (k, dim) in [3usize, 4].iter().enumerate() {
        let h = HermitianOperator::new(ComplexMatrix::identity(*dim, *dim)).expect("identity");
        let ef = eigenframe(&h, config.tolerances.cluster_tol).expect("identity spectrum");
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_TWIRL + 10, k as u64));
        let rho = DensityMatrix::random(&mut rng, *dim);
        let s = gauge_entropy(&rho, ef.structure()).expect("matched dimensions");
        worst = worst.max((s - (*dim as f64).ln()).abs());
    }
    SuiteJson {
        name: "entropy_forced_cases".into(),
        samples: 3,
        max_residual: worst,
        tolerance: ENTROPY_FORCED_TOL,
        pass: worst <= ENTROPY_FORCED_TOL,
    }
}

/// The geometry ladder: residuals at h, h/2, h/4 plus a fitted order where
/// the residual genuinely carries an h^2 truncation term. The
/// right-invariance residual cancels algebraically and is checked against
/// its C h^2 bound (and an absolute rounding ceiling) instead of fitted.
fn suite_geometry(config: &RunConfig) -> (SuiteJson, Vec<GeometryCheckJson>) {
    let steps = [4e-3, 2e-3, 1e-3];
    let mut checks = Vec::new();
    let mut order_dev: f64 = 0.0;
    let mut all_pass = true;

    // mc_right truncation against the analytic derivative.
    {
        let omega = 0.9;
        let curve = GroupCurve::new(-5.0, 5.0, 2, move |t| {
            skew_exp(&pauli_x(), omega * t).expect("finite")
        });
        let analytic = pauli_x()
            .matrix()
            .map(|z| z * Complex64::new(0.0, -omega));
        let residuals: Vec<f64> = steps
            .iter()
            .map(|&h| {
                let theta = mc_right(&curve, 0.37, h).expect("inside domain");
                (theta.matrix() - &analytic).norm()
            })
            .collect();
        let order = fitted_order(&steps, &residuals);
        let pass = (order - 2.0).abs() <= ORDER_WINDOW;
        order_dev = order_dev.max((order - 2.0).abs());
        all_pass &= pass;
        checks.push(GeometryCheckJson {
            name: "mc_right_accuracy".into(),
            h_values: steps.to_vec(),
            residuals,
            fitted_order: Some(order),
        });
    }

    // Anti-Hermiticity defect of the finite-difference Maurer-Cartan value.
    // Needs a curve with non-commuting velocity: on a one-parameter
    // exponential the difference quotient times g^H stays exactly
    // anti-Hermitian and the defect never leaves rounding level.
    {
        let curve = GroupCurve::new(-5.0, 5.0, 2, |t| {
            thermogauge_core::operators::UnitaryMatrix::new(
                skew_exp(&pauli_x(), 0.8 * t).expect("finite").matrix()
                    * skew_exp(&pauli_z(), 0.5 * t * t).expect("finite").matrix(),
            )
            .expect("product of unitaries")
        });
        let residuals: Vec<f64> = steps
            .iter()
            .map(|&h| {
                mc_right(&curve, 0.21, h)
                    .expect("inside domain")
                    .anti_hermiticity_defect()
            })
            .collect();
        let order = fitted_order(&steps, &residuals);
        let pass = (order - 2.0).abs() <= ORDER_WINDOW;
        order_dev = order_dev.max((order - 2.0).abs());
        all_pass &= pass;
        checks.push(GeometryCheckJson {
            name: "mc_right_antihermiticity".into(),
            h_values: steps.to_vec(),
            residuals,
            fitted_order: Some(order),
        });
    }

    // Right-invariance: exact cancellation, so bound checks only.
    {
        let curve = GroupCurve::new(-5.0, 5.0, 2, |t| {
            skew_exp(&pauli_x(), t).expect("finite")
        });
        let h0 = skew_exp(&pauli_z(), 1.0).expect("finite");
        let residuals: Vec<f64> = steps
            .iter()
            .map(|&h| check_right_invariance(&curve, &h0, 0.3, h).expect("inside domain"))
            .collect();
        let pass = residuals
            .iter()
            .zip(&steps)
            .all(|(&r, &h)| r <= h * h && r <= 1e-10);
        all_pass &= pass;
        checks.push(GeometryCheckJson {
            name: "mc_right_right_invariance".into(),
            h_values: steps.to_vec(),
            residuals,
            fitted_order: None,
        });
    }

    // Flatness on a two-generator family.
    {
        let residuals: Vec<f64> = steps
            .iter()
            .map(|&h| {
                let fam = TwoParamFamily::new((-1.0, 1.0), (-1.0, 1.0), h, |s, t| {
                    thermogauge_core::operators::UnitaryMatrix::new(
                        skew_exp(&pauli_x(), s).expect("finite").matrix()
                            * skew_exp(&pauli_z(), t).expect("finite").matrix(),
                    )
                    .expect("product of unitaries")
                });
                flatness_residual(&fam, 0.2, -0.1).expect("inside domain")
            })
            .collect();
        let order = fitted_order(&steps, &residuals);
        let pass = (order - 2.0).abs() <= ORDER_WINDOW;
        order_dev = order_dev.max((order - 2.0).abs());
        all_pass &= pass;
        checks.push(GeometryCheckJson {
            name: "flatness".into(),
            h_values: steps.to_vec(),
            residuals,
            fitted_order: Some(order),
        });
    }

    // Connection axioms on a seeded random (g, A) pair.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_GEOMETRY, 0));
        let g = haar_unitary(&mut rng, 2);
        let a = AlgebraElement::random(&mut rng, 2);
        let left: Vec<f64> = steps
            .iter()
            .map(|&h| check_connection_axioms(&g, &a, h, ActionConvention::LeftAction))
            .collect();
        let order = fitted_order(&steps, &left);
        let pass = (order - 2.0).abs() <= ORDER_WINDOW;
        order_dev = order_dev.max((order - 2.0).abs());
        all_pass &= pass;
        checks.push(GeometryCheckJson {
            name: "connection_axiom_left_action".into(),
            h_values: steps.to_vec(),
            residuals: left,
            fitted_order: Some(order),
        });

        let ad = adjoint_defect(&g, &a);
        let right_gap: Vec<f64> = steps
            .iter()
            .map(|&h| {
                (check_connection_axioms(&g, &a, h, ActionConvention::RightAction) - ad).abs()
            })
            .collect();
        let order = fitted_order(&steps, &right_gap);
        let pass = (order - 2.0).abs() <= ORDER_WINDOW;
        order_dev = order_dev.max((order - 2.0).abs());
        all_pass &= pass;
        checks.push(GeometryCheckJson {
            name: "connection_axiom_right_action_vs_ad".into(),
            h_values: steps.to_vec(),
            residuals: right_gap,
            fitted_order: Some(order),
        });
    }

    let suite = SuiteJson {
        name: "geometry_convergence".into(),
        samples: checks.len(),
        max_residual: order_dev,
        tolerance: ORDER_WINDOW,
        pass: all_pass,
    };
    (suite, checks)
}

/// Run every verify suite against the configured run.
pub fn run_verify(config: &RunConfig) -> Result<VerifyOutput, RunError> {
    let traj = trajectory_for(config)?;
    let (fl_suite, record, partition) =
        suite_first_law_configured(&traj, config.tolerances.residual_tol);
    let mut suites = vec![fl_suite];
    suites.push(suite_first_law_random(config)?);
    suites.push(suite_gauge_invariance(config, &traj)?);
    suites.push(suite_twirl_oracle(config));
    suites.push(suite_entropy_forced(config));
    let (geo_suite, geometry_checks) = suite_geometry(config);
    suites.push(geo_suite);
    let all_pass = suites.iter().all(|s| s.pass);
    Ok(VerifyOutput {
        suites,
        geometry_checks,
        record,
        partition,
        all_pass,
    })
}
