//! JSON run configuration and its translation into solver objects.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use muspar_core::musielak::{AffineExponent, MusielakFunction};
use muspar_core::problem::{
    BField, Constants, Convection, Initial, ProblemSpec, Source, Stress,
};
use muspar_core::stepper::SolverOpts;

use crate::runner::RunnerError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Validate,
    Solve,
    Audit,
    TemporalStudy,
    SpatialStudy,
    OracleCheck,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Mode, RunnerError> {
        match s {
            "validate" => Ok(Mode::Validate),
            "solve" => Ok(Mode::Solve),
            "audit" => Ok(Mode::Audit),
            "temporal-study" => Ok(Mode::TemporalStudy),
            "spatial-study" => Ok(Mode::SpatialStudy),
            "oracle-check" => Ok(Mode::OracleCheck),
            other => Err(RunnerError::Config(format!(
                "unknown mode '{other}' (expected validate | solve | audit | \
                 temporal-study | spatial-study | oracle-check)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Validate => "validate",
            Mode::Solve => "solve",
            Mode::Audit => "audit",
            Mode::TemporalStudy => "temporal-study",
            Mode::SpatialStudy => "spatial-study",
            Mode::OracleCheck => "oracle-check",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub problem: Option<ProblemConfig>,
    #[serde(default)]
    pub mesh: Option<MeshConfig>,
    #[serde(default)]
    pub time: Option<TimeConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub audit: AuditConfig,
    #[serde(default)]
    pub validation: ValidationConfig,
    #[serde(default)]
    pub study: Option<StudyConfig>,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub b: BConfig,
    pub a: AConfig,
    #[serde(rename = "K")]
    pub k: KConfig,
    pub f: FConfig,
    pub u0: U0Config,
    pub phi: PhiConfig,
    pub constants: ConstantsConfig,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BConfig {
    Linear { slope: f64 },
    LinearSine { slope: f64, amp: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AConfig {
    Gradient,
    PLaplacian,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KConfig {
    Zero,
    Linear { coef: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FConfig {
    Zero,
    Constant { value: f64 },
    DecaySine { amp: f64, rate: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum U0Config {
    Zero,
    Sine,
    Hat,
    Parabola,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhiConfig {
    Power {
        exponent: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    VariablePower {
        p0: f64,
        #[serde(default)]
        p1: f64,
        #[serde(default)]
        p2: f64,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    pub b0: f64,
    pub nu: f64,
    pub nu0: f64,
    pub nu1: f64,
    pub lambda: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub dim: usize,
    pub m: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_final: f64,
    pub steps: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iters: usize,
    pub damping: bool,
    pub fallback_picard: bool,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        let d = SolverOpts::default();
        SolverConfig {
            tol: d.tol,
            max_iters: d.max_iters,
            damping: d.damping,
            fallback_picard: d.fallback_picard,
        }
    }
}

impl SolverConfig {
    pub fn to_opts(&self) -> SolverOpts {
        SolverOpts {
            tol: self.tol,
            max_iters: self.max_iters,
            damping: self.damping,
            fallback_picard: self.fallback_picard,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditConfig {
    pub epsilon: f64,
}

impl Default for AuditConfig {
    fn default() -> AuditConfig {
        AuditConfig { epsilon: 0.5 }
    }
}

/// Sampling sizes of the assumption validators. The ranges follow the
/// contracts: scalar samples span `[-s_range, s_range]`, gradient samples the
/// ball of radius `xi_radius`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationConfig {
    pub s_samples: usize,
    pub s_range: f64,
    pub xi_samples: usize,
    pub xi_radius: f64,
    pub x_samples: usize,
    pub seed: u64,
}

impl Default for ValidationConfig {
    fn default() -> ValidationConfig {
        ValidationConfig {
            s_samples: 1000,
            s_range: 100.0,
            xi_samples: 10_000,
            xi_radius: 1000.0,
            x_samples: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    /// Named manufactured case (see the harness registry).
    pub case: String,
    #[serde(default)]
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub m_list: Vec<usize>,
    #[serde(default)]
    pub n_fixed: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub instances: usize,
    pub resolution: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> OracleConfig {
        OracleConfig {
            instances: 50,
            resolution: 21,
            seed: 7,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputsConfig {
    pub dir: Option<PathBuf>,
    /// Report selection; empty means every report the mode produces.
    pub reports: Vec<String>,
}

impl OutputsConfig {
    pub fn wants(&self, name: &str) -> bool {
        self.reports.is_empty() || self.reports.iter().any(|r| r == name)
    }
}

/// Per-verdict entry of the JSON summary.
#[derive(Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub mode: &'static str,
    pub exit_code: u8,
    pub verdicts: Vec<Verdict>,
    pub artifacts: Vec<String>,
}

pub fn load(path: &std::path::Path) -> Result<ConfigFile, RunnerError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunnerError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| RunnerError::Config(format!("cannot parse {}: {e}", path.display())))
}

impl ConfigFile {
    pub fn need_problem(&self) -> Result<&ProblemConfig, RunnerError> {
        self.problem
            .as_ref()
            .ok_or_else(|| RunnerError::Config("this mode needs a \"problem\" block".into()))
    }

    pub fn need_mesh(&self) -> Result<&MeshConfig, RunnerError> {
        self.mesh
            .as_ref()
            .ok_or_else(|| RunnerError::Config("this mode needs a \"mesh\" block".into()))
    }

    pub fn need_time(&self) -> Result<&TimeConfig, RunnerError> {
        self.time
            .as_ref()
            .ok_or_else(|| RunnerError::Config("this mode needs a \"time\" block".into()))
    }
}

/// Builds the problem instance, enforcing the structural constraints
/// (positivity and the margin `nu > 4 nu0`).
pub fn build_problem(problem: &ProblemConfig, dim: usize) -> Result<ProblemSpec, RunnerError> {
    let (phi, exponent) = match problem.phi {
        PhiConfig::Power { exponent, scale } => (
            MusielakFunction::power_scaled(exponent, scale)
                .map_err(|e| RunnerError::Config(e.to_string()))?,
            AffineExponent::constant(exponent),
        ),
        PhiConfig::VariablePower { p0, p1, p2, scale } => {
            let expo = AffineExponent { p0, p1, p2 };
            (
                MusielakFunction::variable_power_scaled(expo, scale)
                    .map_err(|e| RunnerError::Config(e.to_string()))?,
                expo,
            )
        }
    };
    let b = match problem.b {
        BConfig::Linear { slope } => BField::Linear { slope },
        BConfig::LinearSine { slope, amp } => BField::LinearSine { slope, amp },
    };
    let stress = match problem.a {
        AConfig::Gradient => Stress::Gradient,
        AConfig::PLaplacian => Stress::PLaplacian { exponent },
    };
    let convection = match problem.k {
        KConfig::Zero => Convection::Zero,
        KConfig::Linear { coef } => Convection::LinearE1 { coef },
    };
    let source = match problem.f {
        FConfig::Zero => Source::Zero,
        FConfig::Constant { value } => Source::Constant { value },
        FConfig::DecaySine { amp, rate } => Source::DecaySine { amp, rate, dim },
    };
    let initial = match problem.u0 {
        U0Config::Zero => Initial::Zero,
        U0Config::Sine => Initial::SinePi { dim },
        U0Config::Hat => Initial::Hat { dim },
        U0Config::Parabola => Initial::Parabola,
    };
    let constants = Constants {
        b0: problem.constants.b0,
        nu: problem.constants.nu,
        nu0: problem.constants.nu0,
        nu1: problem.constants.nu1,
        lambda: problem.constants.lambda,
    };
    ProblemSpec::new(b, stress, convection, source, initial, phi, constants)
        .map_err(|e| RunnerError::Config(e.to_string()))
}
