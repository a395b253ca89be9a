//! Experiment configuration, read from TOML.
//!
//! Unknown keys are rejected everywhere so that typos fail loudly instead of
//! silently falling back to defaults.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use varifold_core::geometry::ShapeSpec;
use varifold_core::quadrature::TimeRule;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    CurvatureConvergence,
    DiscretizationStability,
    BrakkeResidual,
    DistanceCheck,
    AhlforsScan,
    ConstantsLedger,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::CurvatureConvergence => "curvature-convergence",
            Kind::DiscretizationStability => "discretization-stability",
            Kind::BrakkeResidual => "brakke-residual",
            Kind::DistanceCheck => "distance-check",
            Kind::AhlforsScan => "ahlfors-scan",
            Kind::ConstantsLedger => "constants-ledger",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub shape: ShapeConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeConfig>,
    #[serde(default)]
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub theory: TheoryConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiConfig>,
    #[serde(default)]
    pub distance: DistanceConfig,
    #[serde(default)]
    pub acceptance: AcceptanceConfig,
    /// Present when the file is a run manifest; ignored on input.
    #[serde(default, skip_serializing)]
    pub manifest: Option<toml::Value>,
}

/// `type` selects the shape; the remaining keys are its parameters
/// (`cx`, `cy`, `cz`, `radius`, `a`, `b`, `major`, `minor`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeConfig {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(flatten)]
    pub params: BTreeMap<String, f64>,
}

impl ShapeConfig {
    pub fn spec(&self) -> Result<ShapeSpec, CliError> {
        ShapeSpec::from_record(&self.kind, &self.params).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(default = "default_kernel_name")]
    pub name: String,
    #[serde(default = "default_exponent")]
    pub exponent: u32,
}

fn default_kernel_name() -> String {
    "natural".into()
}

fn default_exponent() -> u32 {
    4
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            name: default_kernel_name(),
            exponent: default_exponent(),
        }
    }
}

/// Scales of the sweep. At most one mesh rule may be given: explicit
/// diameters `h`, `h = eps * h_over_eps`, or `h = eps^h_power`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_over_eps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_power: Option<f64>,
}

impl SweepConfig {
    pub fn rule_count(&self) -> usize {
        [self.h.is_some(), self.h_over_eps.is_some(), self.h_power.is_some()]
            .iter()
            .filter(|b| **b)
            .count()
    }

    /// Mesh diameters paired with `eps`.
    pub fn mesh_diameters(&self, eps: f64) -> Vec<f64> {
        if let Some(h) = &self.h {
            h.clone()
        } else if let Some(f) = &self.h_over_eps {
            f.iter().map(|f| eps * f).collect()
        } else if let Some(p) = self.h_power {
            vec![eps.powf(p)]
        } else {
            Vec::new()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default)]
    pub t1: f64,
    pub t2: f64,
    pub intervals: usize,
    #[serde(default = "default_rule")]
    pub rule: String,
}

fn default_rule() -> String {
    "end-corrected".into()
}

impl TimeConfig {
    pub fn time_rule(&self) -> Result<TimeRule, CliError> {
        match self.rule.as_str() {
            "end-corrected" => Ok(TimeRule::EndCorrected),
            "trapezoid" => Ok(TimeRule::Trapezoid),
            other => Err(CliError::Config(format!("unknown time rule '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    /// Resolution of the shape sample.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// Number of on-shape probe points.
    #[serde(default = "default_probes")]
    pub probes: usize,
    /// Sample density of flow snapshots, in points per mesh cell.
    #[serde(default = "default_samples_per_cell")]
    pub samples_per_cell: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_lower: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_upper: Option<Vec<f64>>,
}

fn default_resolution() -> usize {
    4096
}

fn default_probes() -> usize {
    32
}

fn default_samples_per_cell() -> usize {
    32
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        Self {
            resolution: default_resolution(),
            probes: default_probes(),
            samples_per_cell: default_samples_per_cell(),
            box_lower: None,
            box_upper: None,
        }
    }
}

/// Theorem constants. Unset values are measured on the shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryConfig {
    #[serde(default = "default_true")]
    pub enforce_hypotheses: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_c1: Option<f64>,
    /// Ball radii of the Ahlfors scan.
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    /// Pair distance cutoff when measuring `C2`.
    #[serde(default = "default_c2_distance")]
    pub c2_distance: f64,
    #[serde(default = "default_gamma_floor")]
    pub gamma_floor: f64,
}

fn default_true() -> bool {
    true
}

fn default_radii() -> Vec<f64> {
    vec![0.1, 0.25, 0.5, 1.0]
}

fn default_c2_distance() -> f64 {
    0.1
}

fn default_gamma_floor() -> f64 {
    varifold_core::brakke::DEFAULT_GAMMA_FLOOR
}

impl Default for TheoryConfig {
    fn default() -> Self {
        Self {
            enforce_hypotheses: true,
            c0: None,
            c1: None,
            c2: None,
            lambda_max: None,
            mass0: None,
            t_final: None,
            phi_c1: None,
            radii: default_radii(),
            c2_distance: default_c2_distance(),
            gamma_floor: default_gamma_floor(),
        }
    }
}

/// Radial bump test function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiConfig {
    pub center: Vec<f64>,
    pub inner: f64,
    pub outer: f64,
    #[serde(default = "default_height")]
    pub height: f64,
}

fn default_height() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceConfig {
    /// Number of seeded random Lipschitz test functions.
    #[serde(default = "default_functions")]
    pub functions: usize,
    /// Largest merged support for the exact distance LP.
    #[serde(default = "default_support_cap")]
    pub support_cap: usize,
    /// Resolution of the sample used for the LP (kept small).
    #[serde(default = "default_lp_resolution")]
    pub lp_resolution: usize,
}

fn default_functions() -> usize {
    20
}

fn default_support_cap() -> usize {
    500
}

fn default_lp_resolution() -> usize {
    360
}

impl Default for DistanceConfig {
    fn default() -> Self {
        Self {
            functions: default_functions(),
            support_cap: default_support_cap(),
            lp_resolution: default_lp_resolution(),
        }
    }
}

/// Pass/fail thresholds reported in the summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceConfig {
    #[serde(default = "default_min_slope")]
    pub min_slope: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0_range: Option<[f64; 2]>,
    #[serde(default = "default_control_tolerance")]
    pub control_tolerance: f64,
    #[serde(default = "default_control_ratio")]
    pub control_ratio: f64,
}

fn default_min_slope() -> f64 {
    0.8
}

fn default_control_tolerance() -> f64 {
    1e-6
}

fn default_control_ratio() -> f64 {
    3.5
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        Self {
            min_slope: default_min_slope(),
            c0_range: None,
            control_tolerance: default_control_tolerance(),
            control_ratio: default_control_ratio(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, String), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok((Self::parse(&text)?, text))
    }

    /// Canonical TOML of the effective configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}
