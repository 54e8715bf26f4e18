//! Run configuration schema (JSON, versioned, unknown fields rejected).
//!
//! Matrix literals are row-major arrays of `[re, im]` pairs. Hamiltonian
//! families are written as `{"family": "<tag>", "params": {...}}`.

use serde::{Deserialize, Serialize};

use thermogauge_core::dynamics::{HamiltonianFamily, HamiltonianFamilySpec};
use thermogauge_core::operators::{validate_density, ComplexMatrix, DensityMatrix, HermitianOperator};

/// Supported config schema version.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub mode: Mode,
    pub hamiltonian: HamiltonianConfig,
    pub initial_state: InitialStateConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    pub seed: u64,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Simulate,
    Verify,
    Sweep,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Simulate => write!(f, "simulate"),
            Mode::Verify => write!(f, "verify"),
            Mode::Sweep => write!(f, "sweep"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default = "default_cluster_tol")]
    pub cluster_tol: f64,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
}

fn default_cluster_tol() -> f64 {
    thermogauge_core::spectral::DEFAULT_CLUSTER_TOL
}

fn default_residual_tol() -> f64 {
    thermogauge_core::functionals::FIRST_LAW_TOL
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            cluster_tol: default_cluster_tol(),
            residual_tol: default_residual_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: String,
    pub values: Vec<f64>,
}

/// Row-major matrix literal of [re, im] pairs.
pub type MatrixLiteral = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum HamiltonianConfig {
    Constant(ConstantParams),
    RotatingQubit(RotatingQubitParams),
    AmplitudeDrive(AmplitudeDriveParams),
    LandauZener(LandauZenerParams),
    PiecewiseQuench(PiecewiseQuenchParams),
    CustomGrid(CustomGridParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantParams {
    pub dimension: usize,
    pub matrix: MatrixLiteral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotatingQubitParams {
    pub omega: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeDriveParams {
    pub dimension: usize,
    pub coefficients: Vec<f64>,
    pub direction: MatrixLiteral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandauZenerParams {
    pub delta: f64,
    pub velocity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseQuenchParams {
    pub dimension: usize,
    pub initial: MatrixLiteral,
    pub switches: Vec<QuenchSwitch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchSwitch {
    pub time: f64,
    pub matrix: MatrixLiteral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomGridParams {
    pub dimension: usize,
    pub matrices: Vec<MatrixLiteral>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialStateConfig {
    Named(NamedState),
    Matrix(MatrixLiteral),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedState {
    Ground,
    MaximallyMixed,
    Plus,
}

/// A config-level failure: maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn matrix_from_literal(lit: &MatrixLiteral, field: &str) -> Result<ComplexMatrix, ConfigError> {
    let rows = lit.len();
    if rows == 0 {
        return Err(ConfigError(format!("{field}: matrix literal is empty")));
    }
    if lit.iter().any(|r| r.len() != rows) {
        return Err(ConfigError(format!(
            "{field}: matrix literal must be square ({} rows)",
            rows
        )));
    }
    Ok(ComplexMatrix::from_fn(rows, rows, |i, j| {
        num_complex::Complex64::new(lit[i][j][0], lit[i][j][1])
    }))
}

pub fn literal_from_matrix(m: &ComplexMatrix) -> MatrixLiteral {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn hermitian_from_literal(
    lit: &MatrixLiteral,
    dim: usize,
    field: &str,
) -> Result<HermitianOperator, ConfigError> {
    let m = matrix_from_literal(lit, field)?;
    if m.nrows() != dim {
        return Err(ConfigError(format!(
            "{field}: matrix is {}x{} but dimension is {dim}",
            m.nrows(),
            m.ncols()
        )));
    }
    HermitianOperator::new(m).map_err(|e| ConfigError(format!("{field}: {e}")))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = serde_json::from_str(text)
            .map_err(|e| ConfigError(format!("config parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema != SCHEMA_VERSION {
            return Err(ConfigError(format!(
                "schema must be {SCHEMA_VERSION}, got {}",
                self.schema
            )));
        }
        if self.grid.n < 2 {
            return Err(ConfigError(format!(
                "grid.N must be >= 2, got {}",
                self.grid.n
            )));
        }
        if !(self.grid.tau.is_finite() && self.grid.tau > 0.0) {
            return Err(ConfigError(format!(
                "grid.tau must be positive and finite, got {}",
                self.grid.tau
            )));
        }
        if !(self.tolerances.cluster_tol.is_finite() && self.tolerances.cluster_tol > 0.0) {
            return Err(ConfigError("tolerances.cluster_tol must be positive".into()));
        }
        if !(self.tolerances.residual_tol.is_finite() && self.tolerances.residual_tol > 0.0) {
            return Err(ConfigError("tolerances.residual_tol must be positive".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.iter().any(|v| !v.is_finite()) {
                return Err(ConfigError("sweep.values must all be finite".into()));
            }
        }
        if self.mode == Mode::Sweep && self.sweep.is_none() {
            return Err(ConfigError("mode is sweep but no sweep block given".into()));
        }
        // Build the family once so shape errors surface as config errors.
        self.family_spec().map(|_| ())
    }

    /// Translate the Hamiltonian block into a validated family spec.
    pub fn family_spec(&self) -> Result<HamiltonianFamilySpec, ConfigError> {
        let spec = match &self.hamiltonian {
            HamiltonianConfig::Constant(p) => HamiltonianFamilySpec::new(
                HamiltonianFamily::Constant {
                    matrix: hermitian_from_literal(&p.matrix, p.dimension, "hamiltonian.matrix")?,
                },
                p.dimension,
            ),
            HamiltonianConfig::RotatingQubit(p) => HamiltonianFamilySpec::new(
                HamiltonianFamily::RotatingQubit {
                    omega: p.omega,
                    nu: p.nu,
                },
                2,
            ),
            HamiltonianConfig::AmplitudeDrive(p) => HamiltonianFamilySpec::new(
                HamiltonianFamily::AmplitudeDrive {
                    coefficients: p.coefficients.clone(),
                    direction: hermitian_from_literal(
                        &p.direction,
                        p.dimension,
                        "hamiltonian.direction",
                    )?,
                },
                p.dimension,
            ),
            HamiltonianConfig::LandauZener(p) => HamiltonianFamilySpec::new(
                HamiltonianFamily::LandauZener {
                    delta: p.delta,
                    velocity: p.velocity,
                },
                2,
            ),
            HamiltonianConfig::PiecewiseQuench(p) => {
                let initial =
                    hermitian_from_literal(&p.initial, p.dimension, "hamiltonian.initial")?;
                let mut switches = Vec::with_capacity(p.switches.len());
                for (k, s) in p.switches.iter().enumerate() {
                    let field = format!("hamiltonian.switches[{k}]");
                    switches.push((
                        s.time,
                        hermitian_from_literal(&s.matrix, p.dimension, &field)?,
                    ));
                }
                HamiltonianFamilySpec::new(
                    HamiltonianFamily::PiecewiseQuench { initial, switches },
                    p.dimension,
                )
            }
            HamiltonianConfig::CustomGrid(p) => {
                let mut matrices = Vec::with_capacity(p.matrices.len());
                for (k, lit) in p.matrices.iter().enumerate() {
                    let field = format!("hamiltonian.matrices[{k}]");
                    matrices.push(hermitian_from_literal(lit, p.dimension, &field)?);
                }
                HamiltonianFamilySpec::new(HamiltonianFamily::CustomGrid { matrices }, p.dimension)
            }
        };
        spec.map_err(|e| ConfigError(format!("hamiltonian: {e}")))
    }

    /// Resolve the initial state against the t = 0 Hamiltonian.
    pub fn initial_state(&self, h0: &HermitianOperator) -> Result<DensityMatrix, ConfigError> {
        match &self.initial_state {
            InitialStateConfig::Named(NamedState::Ground) => {
                let (_, frame) = thermogauge_core::spectral::eigendecompose(h0)
                    .map_err(|e| ConfigError(format!("initial_state: {e}")))?;
                DensityMatrix::pure(&frame.matrix().column(0).clone_owned())
                    .map_err(|e| ConfigError(format!("initial_state: {e}")))
            }
            InitialStateConfig::Named(NamedState::MaximallyMixed) => {
                Ok(DensityMatrix::maximally_mixed(h0.dim()))
            }
            InitialStateConfig::Named(NamedState::Plus) => {
                Ok(DensityMatrix::uniform_superposition(h0.dim()))
            }
            InitialStateConfig::Matrix(lit) => {
                let m = matrix_from_literal(lit, "initial_state")?;
                if m.nrows() != h0.dim() {
                    return Err(ConfigError(format!(
                        "initial_state: matrix is {}x{} but the Hamiltonian dimension is {}",
                        m.nrows(),
                        m.ncols(),
                        h0.dim()
                    )));
                }
                validate_density(&m, thermogauge_core::operators::DENSITY_TOL)
                    .map_err(|e| ConfigError(format!("initial_state: {e}")))
            }
        }
    }

    /// Apply one sweep value to a copy of this config. Unknown parameter
    /// names are a config error.
    pub fn with_sweep_value(&self, parameter: &str, value: f64) -> Result<RunConfig, ConfigError> {
        let mut out = self.clone();
        match (parameter, &mut out.hamiltonian) {
            ("tau", _) => out.grid.tau = value,
            ("omega", HamiltonianConfig::RotatingQubit(p)) => p.omega = value,
            ("nu", HamiltonianConfig::RotatingQubit(p)) => p.nu = value,
            ("delta", HamiltonianConfig::LandauZener(p)) => p.delta = value,
            ("velocity", HamiltonianConfig::LandauZener(p)) => p.velocity = value,
            (other, _) => {
                return Err(ConfigError(format!(
                    "unknown sweep parameter `{other}` for this family \
                     (supported: tau, and omega/nu or delta/velocity per family)"
                )))
            }
        }
        out.validate()?;
        Ok(out)
    }
}
