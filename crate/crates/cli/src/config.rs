//! Experiment configuration files (TOML, unknown keys rejected).

use std::path::{Path, PathBuf};

use geoprox::oracle::GridSpec;
use geoprox::{ConvexFunctional, InnerMethod, InnerSolverConfig, ModelSpace, RunConfig, SpherePoint, StepSchedule};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Initial point `x_1`.
    pub init: Vec<f64>,
    pub space: SpaceSection,
    pub functional: FunctionalSection,
    pub schedule: ScheduleSection,
    pub run: RunSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub outputs: OutputsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub dim: usize,
    #[serde(default = "one")]
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKindCfg {
    CosineMean,
    TanSinSum,
    MaxCosine,
    CustomCombination,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalSection {
    pub kind: FunctionalKindCfg,
    #[serde(default)]
    pub anchors: Vec<Vec<f64>>,
    #[serde(default)]
    pub weights: Vec<f64>,
    /// Value of a `constant` functional.
    #[serde(default)]
    pub value: Option<f64>,
    /// Terms of a `custom_combination`.
    #[serde(default)]
    pub terms: Vec<TermSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSection {
    pub coefficient: f64,
    pub kind: FunctionalKindCfg,
    pub anchors: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Constant,
    Harmonic,
    Power,
    ExplicitList,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub kind: ScheduleKind,
    /// Constant step, or exponent `p` of `n^(-p)`.
    #[serde(default)]
    pub value: Option<f64>,
    #[serde(default)]
    pub list: Option<Vec<f64>>,
    #[serde(default)]
    pub asserted_divergent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub max_iterations: usize,
    #[serde(default)]
    pub stop_step_tol: Option<f64>,
    #[serde(default)]
    pub stop_gap_tol: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodCfg {
    GeodesicDescent,
    NestedGoldenSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_method")]
    pub method: MethodCfg,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            method: default_method(),
            tol: default_tol(),
            max_iter: default_max_iter(),
            fd_step: default_fd_step(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    #[serde(default = "default_rounds")]
    pub refinement_rounds: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            spacing: default_spacing(),
            refinement_rounds: default_rounds(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    #[serde(default = "default_trace_path")]
    pub trace_path: PathBuf,
    #[serde(default = "default_summary_path")]
    pub summary_path: PathBuf,
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self {
            trace_path: default_trace_path(),
            summary_path: default_summary_path(),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn default_method() -> MethodCfg {
    MethodCfg::GeodesicDescent
}
fn default_tol() -> f64 {
    InnerSolverConfig::default().tol
}
fn default_max_iter() -> usize {
    InnerSolverConfig::default().max_iter
}
fn default_fd_step() -> f64 {
    InnerSolverConfig::default().fd_step
}
fn default_spacing() -> f64 {
    GridSpec::default().spacing
}
fn default_rounds() -> usize {
    GridSpec::default().refinement_rounds
}
fn default_trace_path() -> PathBuf {
    PathBuf::from("trace.csv")
}
fn default_summary_path() -> PathBuf {
    PathBuf::from("summary.json")
}

/// A validated configuration turned into library types.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub space: ModelSpace,
    pub functional: ConvexFunctional,
    pub x1: SpherePoint,
    pub schedule: StepSchedule,
    pub run: RunConfig,
    pub inner: InnerSolverConfig,
    pub grid: GridSpec,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Validates every section and builds the run inputs. The run's reference
    /// minimizer is left unset.
    pub fn build(&self) -> Result<Experiment, CliError> {
        let space = ModelSpace::new(self.space.dim, self.space.kappa)?;
        let functional = build_functional(&self.functional, &space)?;
        let x1 = space.point(self.init.clone())?;
        functional.check_domain(&x1, &space)?;
        let schedule = self.schedule.build()?;
        schedule.validate()?;
        let run = RunConfig {
            max_iterations: self.run.max_iterations,
            stop_step_tol: self.run.stop_step_tol,
            stop_gap_tol: None,
            reference_minimizer: None,
            reference_tolerance: 0.0,
            seed: self.run.seed,
        };
        run.validate()?;
        if let Some(t) = self.run.stop_gap_tol {
            if t.is_nan() || t <= 0.0 {
                return Err(CliError::Config(format!("stop_gap_tol must be positive, got {t}")));
            }
        }
        let inner = InnerSolverConfig {
            method: match self.solver.method {
                MethodCfg::GeodesicDescent => InnerMethod::GeodesicDescent,
                MethodCfg::NestedGoldenSection => InnerMethod::NestedGoldenSection,
            },
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            fd_step: self.solver.fd_step,
        };
        inner.validate()?;
        if inner.method == InnerMethod::GeodesicDescent && !functional.is_smooth() {
            return Err(CliError::Config(
                "geodesic_descent needs a smooth functional; use nested_golden_section".into(),
            ));
        }
        if inner.method == InnerMethod::NestedGoldenSection && space.dim() != 2 {
            return Err(CliError::Config("nested_golden_section requires dim = 2".into()));
        }
        let grid = GridSpec {
            spacing: self.oracle.spacing,
            refinement_rounds: self.oracle.refinement_rounds,
        };
        grid.validate()?;
        Ok(Experiment {
            space,
            functional,
            x1,
            schedule,
            run,
            inner,
            grid,
        })
    }
}

impl ScheduleSection {
    fn build(&self) -> Result<StepSchedule, CliError> {
        let need_value = || {
            self.value
                .ok_or_else(|| CliError::Config(format!("schedule kind {:?} needs `value`", self.kind)))
        };
        Ok(match self.kind {
            ScheduleKind::Constant => StepSchedule::Constant(need_value()?),
            ScheduleKind::Harmonic => StepSchedule::Harmonic,
            ScheduleKind::Power => StepSchedule::Power(need_value()?),
            ScheduleKind::ExplicitList => StepSchedule::ExplicitList {
                steps: self
                    .list
                    .clone()
                    .ok_or_else(|| CliError::Config("explicit_list schedule needs `list`".into()))?,
                asserted_divergent: self.asserted_divergent,
            },
        })
    }
}

fn points(coords: &[Vec<f64>], space: &ModelSpace) -> Result<Vec<SpherePoint>, CliError> {
    coords
        .iter()
        .map(|c| space.point(c.clone()).map_err(CliError::from))
        .collect()
}

fn anchored(
    kind: FunctionalKindCfg,
    anchors: &[Vec<f64>],
    weights: &[f64],
    space: &ModelSpace,
) -> Result<ConvexFunctional, CliError> {
    let a = points(anchors, space)?;
    let w = weights.to_vec();
    Ok(match kind {
        FunctionalKindCfg::CosineMean => ConvexFunctional::cosine_mean(a, w, space)?,
        FunctionalKindCfg::TanSinSum => ConvexFunctional::tan_sin_sum(a, w, space)?,
        FunctionalKindCfg::MaxCosine => ConvexFunctional::max_cosine(a, w, space)?,
        other => {
            return Err(CliError::Config(format!(
                "{other:?} cannot be used as an anchored term"
            )))
        }
    })
}

fn build_functional(f: &FunctionalSection, space: &ModelSpace) -> Result<ConvexFunctional, CliError> {
    match f.kind {
        FunctionalKindCfg::Constant => {
            if !f.anchors.is_empty() || !f.terms.is_empty() {
                return Err(CliError::Config("constant functional takes only `value`".into()));
            }
            let v = f
                .value
                .ok_or_else(|| CliError::Config("constant functional needs `value`".into()))?;
            if !v.is_finite() {
                return Err(CliError::Config(format!("constant value must be finite, got {v}")));
            }
            Ok(ConvexFunctional::constant(v))
        }
        FunctionalKindCfg::CustomCombination => {
            if !f.anchors.is_empty() || f.value.is_some() {
                return Err(CliError::Config("custom_combination takes only `terms`".into()));
            }
            let terms = f
                .terms
                .iter()
                .map(|t| Ok((t.coefficient, anchored(t.kind, &t.anchors, &t.weights, space)?)))
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(ConvexFunctional::combination(terms, space)?)
        }
        kind => {
            if f.value.is_some() || !f.terms.is_empty() {
                return Err(CliError::Config(format!("{kind:?} takes `anchors` and `weights` only")));
            }
            anchored(kind, &f.anchors, &f.weights, space)
        }
    }
}
