//! Static checks of a configuration, run before any experiment.

use varifold_core::geometry::AnyShape;

use crate::config::{ExperimentConfig, Kind};
use crate::experiments::{build_kernels, build_shape, domain_box, estimate_gamma};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    /// The configuration cannot be run as written (exit status 2).
    Config,
    /// A hypothesis of the theory fails (exit status 3 when enforced).
    Precondition,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn config(message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Config,
            message: message.into(),
        }
    }

    fn precondition(message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Precondition,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Config => "error",
            Severity::Precondition => "precondition",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

fn needs_mesh(kind: Kind) -> bool {
    matches!(
        kind,
        Kind::DiscretizationStability | Kind::BrakkeResidual | Kind::DistanceCheck
    )
}

/// Every problem found in `config`; empty when it can run as written.
///
/// Checks required fields per kind, `eps` in `(0, 1]`, the hypothesis
/// `2h <= gamma eps` (with `gamma` from [`gamma_feasible`]) and that the
/// meshing box holds the `eps`-neighborhood of the shape.
///
/// [`gamma_feasible`]: varifold_core::brakke::gamma_feasible
pub fn validate(config: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let shape = match build_shape(config) {
        Ok(s) => s,
        Err(e) => {
            out.push(Diagnostic::config(e.to_string()));
            return out;
        }
    };
    let kernels = match build_kernels(config, &shape) {
        Ok(k) => Some(k),
        Err(e) => {
            out.push(Diagnostic::config(e.to_string()));
            None
        }
    };
    check_fields(config, &shape, &mut out);
    if out.iter().any(|d| d.severity == Severity::Config) {
        return out;
    }

    if needs_mesh(config.kind) {
        check_box(config, &shape, &mut out);
    }
    if matches!(config.kind, Kind::DiscretizationStability | Kind::BrakkeResidual) {
        if let Some(k) = &kernels {
            match estimate_gamma(config, &shape, k) {
                Ok((_, gamma)) => {
                    for &eps in &config.sweep.eps {
                        for h in config.sweep.mesh_diameters(eps) {
                            let gamma_eps = gamma.gamma * eps;
                            if 2.0 * h > gamma_eps {
                                out.push(Diagnostic::precondition(format!(
                                    "2h > γε at eps = {eps}, h = {h}: 2h = {:.3e}, γε = {:.3e} (γ = {:.3e}, {} bound)",
                                    2.0 * h,
                                    gamma_eps,
                                    gamma.gamma,
                                    gamma.binding.name()
                                )));
                            }
                        }
                    }
                }
                Err(e) => out.push(Diagnostic::precondition(e.to_string())),
            }
        }
    }
    out
}

fn check_fields(config: &ExperimentConfig, shape: &AnyShape, out: &mut Vec<Diagnostic>) {
    let sweep = &config.sweep;
    for &eps in &sweep.eps {
        if !(eps > 0.0 && eps <= 1.0) {
            out.push(Diagnostic::config(format!("eps = {eps} is outside (0, 1]")));
        }
    }
    if sweep.rule_count() > 1 {
        out.push(Diagnostic::config("give at most one of sweep.h, sweep.h_over_eps, sweep.h_power"));
    }
    let diameters: Vec<f64> = match (&sweep.h, sweep.eps.is_empty()) {
        (Some(h), _) => h.clone(),
        (None, false) => sweep.eps.iter().flat_map(|&e| sweep.mesh_diameters(e)).collect(),
        (None, true) => Vec::new(),
    };
    if let Some(h) = diameters.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
        out.push(Diagnostic::config(format!("mesh diameter h = {h} must be positive")));
    }
    let n = shape.ambient_dim();
    for (name, corner) in [("box_lower", &config.discretization.box_lower), ("box_upper", &config.discretization.box_upper)] {
        if let Some(c) = corner {
            if c.len() != n {
                out.push(Diagnostic::config(format!("discretization.{name} needs {n} coordinates")));
            }
        }
    }
    if let Some(phi) = &config.phi {
        if phi.center.len() != n {
            out.push(Diagnostic::config(format!("phi.center needs {n} coordinates")));
        }
        if !(phi.inner > 0.0 && phi.outer > phi.inner) {
            out.push(Diagnostic::config("phi needs 0 < inner < outer"));
        }
    }
    if config.theory.radii.iter().any(|r| r.is_nan() || *r <= 0.0) {
        out.push(Diagnostic::config("theory.radii must be positive"));
    }
    if config.discretization.resolution < 8 || config.discretization.probes < 8 {
        out.push(Diagnostic::config("resolution and probes must be at least 8"));
    }

    match config.kind {
        Kind::CurvatureConvergence => {
            if sweep.eps.len() < 2 {
                out.push(Diagnostic::config("curvature-convergence needs at least two eps values"));
            }
        }
        Kind::DiscretizationStability => {
            if sweep.eps.is_empty() || sweep.rule_count() != 1 {
                out.push(Diagnostic::config(
                    "discretization-stability needs sweep.eps and one mesh rule",
                ));
            }
        }
        Kind::BrakkeResidual => {
            if sweep.eps.is_empty() || sweep.rule_count() != 1 {
                out.push(Diagnostic::config("brakke-residual needs sweep.eps and one mesh rule"));
            }
            match &config.time {
                None => out.push(Diagnostic::config("brakke-residual needs a [time] section")),
                Some(t) => {
                    if !(t.t1 >= 0.0 && t.t2 > t.t1) || t.intervals == 0 {
                        out.push(Diagnostic::config("time needs 0 <= t1 < t2 and intervals >= 1"));
                    }
                    if let Err(e) = t.time_rule() {
                        out.push(Diagnostic::config(e.to_string()));
                    }
                }
            }
            if config.shape.kind == "torus" {
                out.push(Diagnostic::config("brakke-residual has no flow for a torus"));
            }
            if config.kernel.name != "natural" && config.theory.c1.is_none() {
                out.push(Diagnostic::config("C1 is measured with a natural kernel; set theory.c1"));
            }
        }
        Kind::DistanceCheck => {
            if diameters.is_empty() {
                out.push(Diagnostic::config("distance-check needs mesh diameters"));
            }
            if config.distance.lp_resolution < 8 {
                out.push(Diagnostic::config("distance.lp_resolution must be at least 8"));
            }
        }
        Kind::AhlforsScan => {
            if config.theory.radii.is_empty() {
                out.push(Diagnostic::config("ahlfors-scan needs theory.radii"));
            }
        }
        Kind::ConstantsLedger => {
            if config.theory.c1.is_none() && (sweep.eps.is_empty() || config.kernel.name != "natural") {
                out.push(Diagnostic::config("constants-ledger needs theory.c1 or a natural kernel with sweep.eps"));
            }
            if config.theory.t_final.is_none() && config.time.is_none() {
                out.push(Diagnostic::config("constants-ledger needs theory.t_final"));
            }
        }
    }
    if matches!(config.kind, Kind::DiscretizationStability)
        && config.kernel.name != "natural"
        && config.theory.c1.is_none()
    {
        out.push(Diagnostic::config("C1 is measured with a natural kernel; set theory.c1"));
    }
}

fn check_box(config: &ExperimentConfig, shape: &AnyShape, out: &mut Vec<Diagnostic>) {
    let (lo, hi) = shape.extent();
    let (lower, upper) = domain_box(config, shape);
    let eps = config.sweep.eps.iter().copied().fold(0.0, f64::max);
    for i in 0..lo.len().min(lower.len()).min(upper.len()) {
        let margin = (lo[i] - lower[i]).min(upper[i] - hi[i]);
        if margin < eps {
            out.push(Diagnostic::precondition(format!(
                "box does not contain the eps-neighborhood of the shape: margin {margin} < eps = {eps} on axis {i}"
            )));
        }
    }
}
