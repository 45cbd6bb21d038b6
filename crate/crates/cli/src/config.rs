use std::path::{Path, PathBuf};

use layeredbvp::TwoParamProblem;
use serde::{Deserialize, Serialize};

use crate::exit::Failure;

/// One JSON document drives every subcommand; unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: TwoParamProblem,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// `"auto"` or an engine index 1, 2, 3.
    #[serde(default)]
    pub regime: Option<RegimeChoice>,
    /// Classification thresholds on `eps1 / eps2^2`.
    #[serde(default = "default_thresholds")]
    pub thresholds: (f64, f64),
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub expand: ExpandConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub scan: Option<ScanConfig>,
}

fn default_thresholds() -> (f64, f64) {
    layeredbvp::problem::DEFAULT_THRESHOLDS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegimeChoice {
    Engine(u8),
    Named(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoTag {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MeshKind {
    #[default]
    Graded,
    /// The three-element `kappa p / mu` mesh.
    ThreeElement,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default = "default_solve_degree")]
    pub degree: usize,
    #[serde(default)]
    pub mesh: MeshKind,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

fn default_solve_degree() -> usize {
    12
}

fn default_kappa() -> f64 {
    2.5
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            degree: default_solve_degree(),
            mesh: MeshKind::default(),
            kappa: default_kappa(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandConfig {
    /// Fixed `M`; chosen by the floor rule when absent.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_m_max")]
    pub m_max: usize,
}

fn default_delta() -> f64 {
    0.5
}

fn default_m_max() -> usize {
    12
}

impl Default for ExpandConfig {
    fn default() -> Self {
        Self {
            m: None,
            delta: default_delta(),
            m_max: default_m_max(),
        }
    }
}

pub const DEFAULT_CHECKS: [&str; 6] = [
    "sup_and_derivative",
    "smooth_growth",
    "layer_envelopes",
    "mu_bounds",
    "remainder",
    "residual",
];

pub const ALL_CHECKS: [&str; 8] = [
    "sup_and_derivative",
    "smooth_growth",
    "layer_envelopes",
    "mu_bounds",
    "remainder",
    "residual",
    "smooth_growth_stability",
    "endpoint_values",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_checks")]
    pub checks: Vec<String>,
    #[serde(default = "default_reference_degree")]
    pub degree: usize,
    #[serde(default = "default_derivative_constant")]
    pub derivative_constant: f64,
    #[serde(default = "default_mu_constant")]
    pub mu_constant: f64,
    #[serde(default = "default_endpoint_constant")]
    pub endpoint_constant: f64,
    #[serde(default = "one")]
    pub endpoint_left_factor: f64,
    #[serde(default = "default_r2")]
    pub remainder_r2: f64,
    #[serde(default = "default_n_max")]
    pub smooth_n_max: usize,
    #[serde(default = "default_layer_n_max")]
    pub layer_n_max: usize,
    #[serde(default = "default_theta")]
    pub layer_rate_margin: f64,
    #[serde(default = "default_stability")]
    pub stability_tolerance: f64,
}

fn default_checks() -> Vec<String> {
    DEFAULT_CHECKS.iter().map(|s| s.to_string()).collect()
}
fn default_reference_degree() -> usize {
    16
}
fn default_derivative_constant() -> f64 {
    10.0
}
fn default_mu_constant() -> f64 {
    4.0
}
fn default_endpoint_constant() -> f64 {
    3.0
}
fn one() -> f64 {
    1.0
}
fn default_r2() -> f64 {
    0.98
}
fn default_n_max() -> usize {
    12
}
fn default_layer_n_max() -> usize {
    4
}
fn default_theta() -> f64 {
    0.1
}
fn default_stability() -> f64 {
    0.25
}

impl Default for VerifyConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all verify fields have defaults")
    }
}

/// Either an explicit list or `count` log-spaced values in `[10^from, 10^to]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    List(Vec<f64>),
    Log(LogAxis),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogAxis {
    pub log10_from: f64,
    pub log10_to: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::List(v) => v.clone(),
            Axis::Log(a) if a.count == 1 => vec![10f64.powf(a.log10_from)],
            Axis::Log(a) => (0..a.count)
                .map(|k| {
                    let t = k as f64 / (a.count - 1) as f64;
                    10f64.powf(a.log10_from + t * (a.log10_to - a.log10_from))
                })
                .collect(),
        }
    }
}

/// Grid of the scan: the tensor product of the axes, or explicit points.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default)]
    pub eps1: Option<Axis>,
    #[serde(default)]
    pub eps2: Option<Axis>,
    #[serde(default)]
    pub points: Option<Vec<(f64, f64)>>,
}

impl ScanConfig {
    /// Points ordered by `eps1` (outer) then `eps2` (inner), then any explicit points.
    pub fn points(&self) -> Result<Vec<(f64, f64)>, Failure> {
        let mut out = Vec::new();
        match (&self.eps1, &self.eps2) {
            (Some(a), Some(b)) => {
                for e1 in a.values() {
                    for e2 in b.values() {
                        out.push((e1, e2));
                    }
                }
            }
            (None, None) => {}
            _ => return Err(Failure::config("scan needs both eps1 and eps2 axes")),
        }
        out.extend(self.points.iter().flatten().copied());
        if out.is_empty() {
            return Err(Failure::config("scan grid is empty"));
        }
        Ok(out)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Failure> {
        self.problem.check().map_err(|e| Failure::config(e.to_string()))?;
        if let Some(RegimeChoice::Engine(i)) = self.regime {
            if !(1..=3).contains(&i) {
                return Err(Failure::config(format!("regime {i} is not one of 1, 2, 3")));
            }
        }
        let (lo, hi) = self.thresholds;
        if !(lo > 0.0 && lo < hi) {
            return Err(Failure::config("thresholds must satisfy 0 < low < high"));
        }
        if self.solve.degree == 0 || self.verify.degree < 3 {
            return Err(Failure::config("degrees must be at least 1 (solve) and 3 (verify)"));
        }
        if !(self.expand.delta > 0.0) {
            return Err(Failure::config("delta must be positive"));
        }
        for c in &self.verify.checks {
            if !ALL_CHECKS.contains(&c.as_str()) {
                return Err(Failure::config(format!("unknown check {c:?}")));
            }
        }
        Ok(())
    }
}
