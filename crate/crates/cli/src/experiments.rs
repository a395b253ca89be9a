//! The six experiment kinds. Each one turns a validated configuration into
//! tables, pass/fail checks and, where the theory constants are needed, a
//! constants ledger.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varifold_core::brakke::{
    brakke_residual, bump, constants_ledger, gamma_feasible, measure_c1, measure_c2,
    BoundConstants, Bump, ConstantsLedger, GammaChoice, HypothesisPolicy, LedgerInputs,
    ResidualReport, ResidualSetup, ResidualVariant,
};
use varifold_core::curvature::{CurvatureQuery, KernelEvaluator};
use varifold_core::discretization::{discretize, Mesh};
use varifold_core::flow::{uniform_grid, FlowTrajectory, Polyline};
use varifold_core::geometry::{sample_surface, AnalyticShape, AnyShape, ShapeSpec};
use varifold_core::kernels::KernelPair;
use varifold_core::metrics::{ahlfors_estimate, atomize, bounded_lipschitz_distance};
use varifold_core::quadrature::log_log_slope;
use varifold_core::table::{number, Table};
use varifold_core::varifold::{SampledManifoldVarifold, Varifold};
use varifold_core::{Error, Point};

use crate::config::{ExperimentConfig, Kind};
use crate::validate::{validate, Severity};
use crate::CliError;

/// Sample sizes used for `C0` and `C2`; these constants do not need the full
/// experiment resolution.
const CURVE_CONSTANTS_RESOLUTION: usize = 4096;
const SURFACE_CONSTANTS_RESOLUTION: usize = 256;

/// One pass/fail line of the summary.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!("{status} {}: {}", self.name, self.detail)
    }
}

/// Everything a run produces before it is written to disk.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub kind: Kind,
    /// `(file stem, table)`, written as `<stem>.csv`.
    pub tables: Vec<(String, Table)>,
    pub ledger: Option<ConstantsLedger>,
    pub gamma: Option<GammaChoice>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Outcome {
    fn new(kind: Kind) -> Self {
        Self {
            kind,
            tables: Vec::new(),
            ledger: None,
            gamma: None,
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self, stem: &str) -> Option<&Table> {
        self.tables.iter().find(|(s, _)| s == stem).map(|(_, t)| t)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

macro_rules! with_shape {
    ($shape:expr, $s:ident => $body:expr) => {
        match $shape {
            AnyShape::Planar($s) => $body,
            AnyShape::Spatial($s) => $body,
        }
    };
}

pub fn build_shape(config: &ExperimentConfig) -> Result<AnyShape, CliError> {
    Ok(config.shape.spec()?.build()?)
}

pub fn build_kernels(config: &ExperimentConfig, shape: &AnyShape) -> Result<KernelPair, CliError> {
    KernelPair::from_name(&config.kernel.name, config.kernel.exponent, shape.ambient_dim(), shape.dim())
        .map_err(|e| CliError::Config(e.to_string()))
}

/// Meshing box: the configured corners, or the shape's bounding box grown by
/// the largest `eps` plus `0.1`.
pub fn domain_box(config: &ExperimentConfig, shape: &AnyShape) -> (Vec<f64>, Vec<f64>) {
    grown_box(config, shape.extent())
}

fn grown_box(config: &ExperimentConfig, (lo, hi): (Vec<f64>, Vec<f64>)) -> (Vec<f64>, Vec<f64>) {
    let margin = config.sweep.eps.iter().copied().fold(0.0, f64::max) + 0.1;
    let lower = config
        .discretization
        .box_lower
        .clone()
        .unwrap_or_else(|| lo.iter().map(|v| v - margin).collect());
    let upper = config
        .discretization
        .box_upper
        .clone()
        .unwrap_or_else(|| hi.iter().map(|v| v + margin).collect());
    (lower, upper)
}

fn point<const N: usize>(v: &[f64]) -> Result<Point<N>, CliError> {
    if v.len() != N {
        return Err(CliError::Config(format!("expected {N} coordinates, got {}", v.len())));
    }
    Ok(Point::<N>::from_column_slice(v))
}

fn constants_resolution(d: usize, resolution: usize) -> usize {
    let cap = if d == 1 {
        CURVE_CONSTANTS_RESOLUTION
    } else {
        SURFACE_CONSTANTS_RESOLUTION
    };
    resolution.min(cap)
}

fn probes<const N: usize>(config: &ExperimentConfig, shape: &dyn AnalyticShape<N>) -> Result<Vec<Point<N>>, CliError> {
    Ok(sample_surface(shape, config.discretization.probes)?.points().to_vec())
}

fn c0_of<const N: usize>(config: &ExperimentConfig, shape: &dyn AnalyticShape<N>) -> Result<f64, CliError> {
    let res = constants_resolution(shape.dim(), config.discretization.resolution);
    let v = SampledManifoldVarifold::new(sample_surface(shape, res)?);
    let est = ahlfors_estimate(&v, &config.theory.radii, &probes(config, shape)?)?;
    if !est.c0.is_finite() {
        return Err(CliError::Precondition(format!(
            "Ahlfors estimate is degenerate ({:?})",
            est.degeneracy
        )));
    }
    Ok(est.c0)
}

/// `C0` from the configuration, or estimated on a sample of the shape.
pub fn estimate_c0(config: &ExperimentConfig, shape: &AnyShape) -> Result<f64, CliError> {
    match config.theory.c0 {
        Some(c0) => Ok(c0),
        None => with_shape!(shape, s => c0_of(config, s.as_ref())),
    }
}

/// `C0` and the admissible `gamma` it implies.
pub fn estimate_gamma(
    config: &ExperimentConfig,
    shape: &AnyShape,
    kernels: &KernelPair,
) -> Result<(f64, GammaChoice), CliError> {
    let c0 = estimate_c0(config, shape)?;
    let lambda_max = config.theory.lambda_max.unwrap_or(shape.max_principal_curvature());
    let beta = kernels.beta(c0)?;
    let gamma = gamma_feasible(
        c0,
        lambda_max,
        beta,
        kernels.norms().lip_xi(),
        shape.dim(),
        config.theory.gamma_floor,
    )?;
    Ok((c0, gamma))
}

fn default_phi<const N: usize>(shape: &dyn AnalyticShape<N>) -> Result<Bump<N>, CliError> {
    // plateau over the whole shape, so that grad phi vanishes on it and on
    // every shrunken copy
    let (lo, hi) = shape.extent();
    let center = (lo + hi) * 0.5;
    let half = (hi - lo).iter().fold(0.0f64, |m, v| m.max(0.5 * v));
    Ok(bump(center, 1.1 * half, 1.4 * half, 1.0)?)
}

fn phi_of<const N: usize>(config: &ExperimentConfig, shape: &dyn AnalyticShape<N>) -> Result<Bump<N>, CliError> {
    match &config.phi {
        Some(p) => Ok(bump(point::<N>(&p.center)?, p.inner, p.outer, p.height)?),
        None => default_phi(shape),
    }
}

fn phi_c1(config: &ExperimentConfig, shape: &AnyShape) -> Result<f64, CliError> {
    if let Some(v) = config.theory.phi_c1 {
        return Ok(v);
    }
    with_shape!(shape, s => Ok(phi_of(config, s.as_ref())?.norms().c1()))
}

/// Ledger inputs, measuring whatever the configuration leaves open. `c1` is
/// the measured consistency constant when the caller already has one.
pub fn ledger_inputs(
    config: &ExperimentConfig,
    shape: &AnyShape,
    kernels: &KernelPair,
    c1: Option<f64>,
) -> Result<(LedgerInputs, GammaChoice), CliError> {
    let (c0, gamma) = estimate_gamma(config, shape, kernels)?;
    let c1 = match (config.theory.c1, c1) {
        (Some(v), _) | (None, Some(v)) => v,
        (None, None) => {
            if config.sweep.eps.is_empty() {
                return Err(CliError::Config("C1 needs theory.c1 or a sweep.eps list".into()));
            }
            with_shape!(shape, s => measure_c1(
                s.as_ref(),
                kernels,
                &config.sweep.eps,
                config.discretization.resolution,
                config.discretization.probes,
            )?
            .ratio)
        }
    };
    let c2 = match config.theory.c2 {
        Some(v) => v,
        None => with_shape!(shape, s => {
            let res = constants_resolution(s.dim(), config.discretization.resolution);
            measure_c2(&sample_surface(s.as_ref(), res)?, config.theory.c2_distance)?
        }),
    };
    let inputs = LedgerInputs {
        d: shape.dim(),
        c0,
        c1,
        c2,
        gamma: gamma.gamma,
        beta: kernels.beta(c0)?,
        lambda_max: config.theory.lambda_max.unwrap_or(shape.max_principal_curvature()),
        mass0: config.theory.mass0.unwrap_or(shape.total_measure()),
        t_final: config
            .theory
            .t_final
            .or(config.time.as_ref().map(|t| t.t2))
            .unwrap_or(1.0),
        kernel: kernels.norms(),
        phi_c1: phi_c1(config, shape)?,
    };
    Ok((inputs, gamma))
}

/// Validates `config` and runs the selected experiment.
///
/// Configuration diagnostics fail with status 2. Precondition diagnostics
/// fail with status 3 when hypotheses are enforced and become notes
/// otherwise.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let diagnostics = validate(config);
    let mut warnings = Vec::new();
    for d in &diagnostics {
        match d.severity {
            Severity::Config => return Err(CliError::Config(d.message.clone())),
            Severity::Precondition if config.theory.enforce_hypotheses => {
                return Err(CliError::Precondition(d.message.clone()))
            }
            Severity::Precondition => warnings.push(format!("hypothesis not enforced: {}", d.message)),
        }
    }
    let shape = build_shape(config)?;
    let kernels = build_kernels(config, &shape)?;
    let mut outcome = match config.kind {
        Kind::CurvatureConvergence => {
            with_shape!(&shape, s => curvature_convergence(config, s.as_ref(), &kernels))
        }
        Kind::DiscretizationStability => discretization_stability(config, &shape, &kernels),
        Kind::BrakkeResidual => brakke(config, &shape, &kernels),
        Kind::DistanceCheck => with_shape!(&shape, s => distance_check(config, s.as_ref())),
        Kind::AhlforsScan => with_shape!(&shape, s => ahlfors_scan(config, s.as_ref())),
        Kind::ConstantsLedger => ledger_only(config, &shape, &kernels),
    }?;
    warnings.append(&mut outcome.notes);
    outcome.notes = warnings;
    Ok(outcome)
}

fn slope_of(x: &[f64], y: &[f64]) -> f64 {
    if x.len() >= 2 && y.iter().all(|v| *v > 0.0) {
        log_log_slope(x, y)
    } else {
        f64::NAN
    }
}

fn curvature_convergence<const N: usize>(
    config: &ExperimentConfig,
    shape: &dyn AnalyticShape<N>,
    kernels: &KernelPair,
) -> Result<Outcome, CliError> {
    let m = measure_c1(
        shape,
        kernels,
        &config.sweep.eps,
        config.discretization.resolution,
        config.discretization.probes,
    )?;
    let c1 = config.theory.c1.unwrap_or(m.ratio);
    let mut table = Table::new(["epsilon", "max_error", "bound_c1_eps", "error_over_eps", "fitted_order"]);
    let mut within = true;
    for &(eps, err) in &m.errors {
        within &= err <= c1 * eps * (1.0 + 1e-12);
        table.push_numbers(&[eps, err, c1 * eps, err / eps, m.slope]);
    }
    let mut out = Outcome::new(Kind::CurvatureConvergence);
    out.tables.push(("curvature-convergence".into(), table));
    let min = config.acceptance.min_slope;
    out.checks.push(Check::new(
        "fitted order",
        m.slope >= min,
        format!("slope {:.4} >= {min}", m.slope),
    ));
    out.checks.push(Check::new(
        "consistency bound",
        within,
        format!("max error <= C1 eps with C1 = {}", number(c1)),
    ));
    out.notes.push(format!("fitted C1 = {}", number(m.ratio)));
    Ok(out)
}

fn stability_rows<const N: usize>(
    config: &ExperimentConfig,
    shape: &dyn AnalyticShape<N>,
    kernels: &KernelPair,
    (lower, upper): (&[f64], &[f64]),
    c10: f64,
    out: &mut Outcome,
) -> Result<(), CliError> {
    let sample = sample_surface(shape, config.discretization.resolution)?;
    let m = SampledManifoldVarifold::new(sample.clone());
    let probes = probes(config, shape)?;
    let mesh_box = (point::<N>(lower)?, point::<N>(upper)?);
    let mut table = Table::new(["epsilon", "h", "max_error", "bound_c10_h_over_eps2", "fitted_order"]);
    for &eps in &config.sweep.eps {
        let query = CurvatureQuery::new(kernels, eps)?;
        let smooth = KernelEvaluator::new(&m, query)?;
        let reference: Vec<Point<N>> = probes
            .iter()
            .map(|y| smooth.mean_curvature(y))
            .collect::<Result<_, _>>()?;
        let mut rows = Vec::new();
        for h in config.sweep.mesh_diameters(eps) {
            let mesh = Mesh::covering(mesh_box.0, mesh_box.1, h / (N as f64).sqrt())?;
            let vh = discretize(&sample, &mesh)?;
            let ev = KernelEvaluator::new(&vh, query)?;
            let mut worst = 0.0f64;
            for (y, r) in probes.iter().zip(&reference) {
                worst = worst.max((ev.mean_curvature(y)? - r).norm());
            }
            rows.push((mesh.diameter(), worst));
        }
        let (hs, errs): (Vec<f64>, Vec<f64>) = rows.iter().copied().unzip();
        let slope = slope_of(&hs, &errs);
        let mut violations = 0;
        for &(h, err) in &rows {
            let bound = c10 * h / (eps * eps);
            if err > bound {
                violations += 1;
            }
            table.push_numbers(&[eps, h, err, bound, slope]);
        }
        let min = config.acceptance.min_slope;
        out.checks.push(Check::new(
            format!("stability bound eps={eps}"),
            violations == 0,
            format!("{violations} of {} errors above c10 h/eps^2", rows.len()),
        ));
        out.checks.push(Check::new(
            format!("order in h eps={eps}"),
            slope >= min,
            format!("slope {slope:.4} >= {min}"),
        ));
    }
    out.tables.push(("discretization-stability".into(), table));
    Ok(())
}

fn discretization_stability(
    config: &ExperimentConfig,
    shape: &AnyShape,
    kernels: &KernelPair,
) -> Result<Outcome, CliError> {
    let (inputs, gamma) = ledger_inputs(config, shape, kernels, None)?;
    let ledger = constants_ledger(inputs)?;
    let (lower, upper) = domain_box(config, shape);
    let mut out = Outcome::new(Kind::DiscretizationStability);
    with_shape!(shape, s => stability_rows(config, s.as_ref(), kernels, (&lower, &upper), ledger.c10, &mut out))?;
    out.ledger = Some(ledger);
    out.gamma = Some(gamma);
    Ok(out)
}

/// Closed polyline through `count` equally spaced parameter values of a
/// planar shape.
fn polygon_of(shape: &dyn AnalyticShape<2>, count: usize) -> Result<Polyline<2>, CliError> {
    let vertices = (0..count)
        .map(|j| shape.position([2.0 * PI * j as f64 / count as f64, 0.0]))
        .collect();
    Ok(Polyline::new(vertices)?)
}

fn planar_flow(
    spec: &ShapeSpec,
    shape: &dyn AnalyticShape<2>,
    vertices: usize,
    t1: f64,
    t2: f64,
    intervals: usize,
) -> Result<FlowTrajectory<2>, CliError> {
    match *spec {
        ShapeSpec::Circle { center, radius } => Ok(FlowTrajectory::shrinking_circle(
            center.into(),
            radius,
            &uniform_grid(t1, t2, intervals),
        )?),
        _ => {
            // curve shortening needs the flow to start at the shape
            if t1 != 0.0 {
                return Err(CliError::Precondition("polygonal flows start at t1 = 0".into()));
            }
            let poly = polygon_of(shape, vertices)?;
            let interval = t2 / intervals as f64;
            // explicit Euler with a margin under the stability limit, since
            // the shortest segment shrinks along the flow
            let limit = 0.1 * poly.min_segment().powi(2);
            let steps = (interval / limit).ceil().max(1.0) as usize;
            let traj = FlowTrajectory::curve_shortening(poly, interval / steps as f64, steps, intervals + 1)?;
            Ok(traj)
        }
    }
}

struct ResidualRun<'a, const N: usize> {
    config: &'a ExperimentConfig,
    kernels: &'a KernelPair,
    phi: Bump<N>,
    domain: (Point<N>, Point<N>),
    gamma: f64,
    constants: BoundConstants,
}

impl<const N: usize> ResidualRun<'_, N> {
    fn report(
        &self,
        traj: &FlowTrajectory<N>,
        eps: f64,
        h: f64,
        variant: ResidualVariant,
    ) -> Result<ResidualReport, CliError> {
        let time = self.config.time.as_ref().expect("validated");
        let setup = ResidualSetup {
            kernels: self.kernels,
            epsilon: eps,
            edge: h / (N as f64).sqrt(),
            domain: self.domain,
            phi: self.phi,
            first: 0,
            last: traj.len() - 1,
            time_rule: time.time_rule()?,
            gamma: self.gamma,
            policy: if self.config.theory.enforce_hypotheses {
                HypothesisPolicy::Enforce
            } else {
                HypothesisPolicy::Record
            },
            variant,
            samples_per_cell: self.config.discretization.samples_per_cell,
            constants: self.constants,
        };
        Ok(brakke_residual(traj, &setup)?)
    }
}

fn residual_rows<const N: usize>(
    run: &ResidualRun<'_, N>,
    make_flow: &dyn Fn(usize) -> Result<FlowTrajectory<N>, CliError>,
    out: &mut Outcome,
) -> Result<(), CliError> {
    let config = run.config;
    let time = config.time.as_ref().expect("validated");
    let acc = &config.acceptance;
    let traj = make_flow(time.intervals)?;
    let mut table = ResidualReport::table_header();

    // exact measure with exact curvature: only the time quadrature remains
    let eps0 = config.sweep.eps[0];
    let h0 = config.sweep.mesh_diameters(eps0)[0];
    let control = run.report(&traj, eps0, h0, ResidualVariant::ExactControl)?;
    let refined = run.report(&make_flow(2 * time.intervals)?, eps0, h0, ResidualVariant::ExactControl)?;
    control.push_row(&mut table);
    refined.push_row(&mut table);
    let reduction = control.residual / refined.residual;
    out.checks.push(Check::new(
        "control residual",
        control.residual <= acc.control_tolerance,
        format!(
            "{} <= {} at {} intervals",
            number(control.residual),
            acc.control_tolerance,
            time.intervals
        ),
    ));
    out.checks.push(Check::new(
        "control refinement",
        reduction >= acc.control_ratio,
        format!("reduction {reduction:.3} >= {} when intervals double", acc.control_ratio),
    ));

    let mut reports = Vec::new();
    for &eps in &config.sweep.eps {
        for h in config.sweep.mesh_diameters(eps) {
            let r = run.report(&traj, eps, h, ResidualVariant::Discrete)?;
            r.push_row(&mut table);
            reports.push(r);
        }
    }
    out.tables.push(("brakke-residual".into(), table));

    // C' fitted at the coarsest scale, then checked at the others
    let coarsest = reports
        .iter()
        .max_by(|a, b| a.epsilon.total_cmp(&b.epsilon))
        .expect("nonempty sweep");
    let fitted = coarsest.residual / coarsest.scale();
    let eps: Vec<f64> = reports.iter().map(|r| r.epsilon).collect();
    let res: Vec<f64> = reports.iter().map(|r| r.residual).collect();
    let slope = slope_of(&eps, &res);
    let mut fit = Table::new([
        "epsilon",
        "h",
        "residual",
        "scale",
        "fitted_c_prime_bound",
        "theoretical_bound",
        "fitted_order",
    ]);
    let mut violations = 0;
    let mut within_theory = true;
    for r in &reports {
        let bound = fitted * r.scale();
        if r.residual > bound * (1.0 + 1e-12) {
            violations += 1;
        }
        within_theory &= r.residual <= r.bound;
        fit.push_numbers(&[r.epsilon, r.h, r.residual, r.scale(), bound, r.bound, slope]);
    }
    out.tables.push(("brakke-residual-fit".into(), fit));

    let mut by_eps: Vec<&ResidualReport> = reports.iter().collect();
    by_eps.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    let monotone = by_eps.windows(2).all(|w| w[1].residual < w[0].residual);
    out.checks.push(Check::new(
        "monotone in eps",
        monotone,
        "discrete residual decreases with eps".to_string(),
    ));
    out.checks.push(Check::new(
        "fitted weak bound",
        violations == 0,
        format!(
            "{violations} violations of residual <= C' (eps + h/eps^3), C' = {} fitted at eps = {}",
            number(fitted),
            coarsest.epsilon
        ),
    ));
    out.checks.push(Check::new(
        "theoretical bound",
        within_theory,
        "residual <= ledger bound".to_string(),
    ));
    out.notes.push(format!("fitted C' = {}", number(fitted)));
    if reports.iter().any(|r| !r.hypothesis_holds) {
        out.notes.push("2h <= gamma eps fails for at least one row".into());
    }
    Ok(())
}

fn brakke(config: &ExperimentConfig, shape: &AnyShape, kernels: &KernelPair) -> Result<Outcome, CliError> {
    let (inputs, gamma) = ledger_inputs(config, shape, kernels, None)?;
    let ledger = constants_ledger(inputs)?;
    let (lower, upper) = domain_box(config, shape);
    let time = config.time.as_ref().expect("validated");
    let spec = config.shape.spec()?;
    let constants = BoundConstants {
        c1: inputs.c1,
        big_c: ledger.big_c,
        big_c_prime: ledger.big_c_prime,
    };
    let mut out = Outcome::new(Kind::BrakkeResidual);
    match shape {
        AnyShape::Planar(s) => {
            let run = ResidualRun {
                config,
                kernels,
                phi: phi_of(config, s.as_ref())?,
                domain: (point::<2>(&lower)?, point::<2>(&upper)?),
                gamma: gamma.gamma,
                constants,
            };
            let vertices = config.discretization.resolution;
            let make = |n: usize| planar_flow(&spec, s.as_ref(), vertices, time.t1, time.t2, n);
            residual_rows(&run, &make, &mut out)?;
        }
        AnyShape::Spatial(s) => {
            let ShapeSpec::Sphere { center, radius } = spec else {
                return Err(CliError::Precondition("only spheres have a spatial flow".into()));
            };
            let run = ResidualRun {
                config,
                kernels,
                phi: phi_of(config, s.as_ref())?,
                domain: (point::<3>(&lower)?, point::<3>(&upper)?),
                gamma: gamma.gamma,
                constants,
            };
            let make = |n: usize| -> Result<FlowTrajectory<3>, CliError> {
                Ok(FlowTrajectory::shrinking_sphere(
                    center.into(),
                    radius,
                    &uniform_grid(time.t1, time.t2, n),
                )?)
            };
            residual_rows(&run, &make, &mut out)?;
        }
    }
    out.ledger = Some(ledger);
    out.gamma = Some(gamma);
    Ok(out)
}

fn distance_check<const N: usize>(config: &ExperimentConfig, shape: &dyn AnalyticShape<N>) -> Result<Outcome, CliError> {
    let sample = sample_surface(shape, config.discretization.resolution)?;
    let m = SampledManifoldVarifold::new(sample.clone());
    let mass = m.mass_total();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // A sin(w . x + b) has lip = |A| |w|
    let functions: Vec<(f64, Point<N>, f64)> = (0..config.distance.functions)
        .map(|_| {
            let a = rng.gen_range(-2.0..2.0);
            let w = Point::<N>::from_fn(|_, _| rng.gen_range(-6.0..6.0));
            (a, w, rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    let (lo, hi) = shape.extent();
    let (lower, upper) = grown_box(config, (lo.iter().copied().collect(), hi.iter().copied().collect()));
    let lower = point::<N>(&lower)?;
    let upper = point::<N>(&upper)?;
    let mut diameters: Vec<f64> = Vec::new();
    if config.sweep.h.is_some() || config.sweep.eps.is_empty() {
        diameters = config.sweep.mesh_diameters(f64::NAN);
    } else {
        for &eps in &config.sweep.eps {
            diameters.extend(config.sweep.mesh_diameters(eps));
        }
    }

    let lp_sample = sample_surface(shape, config.distance.lp_resolution)?;
    let lp_measure = atomize(&SampledManifoldVarifold::new(lp_sample.clone()));
    let mut gaps = Table::new(["h", "function", "lipschitz", "gap", "bound_h_lip_mass"]);
    let mut lp = Table::new(["h", "support", "distance", "bound_h_mass", "iterations"]);
    let mut violations = 0;
    let mut lp_ok = true;
    let mut lp_runs = 0;
    for &h in &diameters {
        let mesh = Mesh::covering(lower, upper, h / (N as f64).sqrt())?;
        let vh = discretize(&sample, &mesh)?;
        let hd = mesh.diameter();
        for (k, &(a, w, b)) in functions.iter().enumerate() {
            let phi = |x: &Point<N>| a * (w.dot(x) + b).sin();
            let gap = (m.mass_apply(phi) - vh.mass_apply(phi)).abs();
            let lip = a.abs() * w.norm();
            let bound = hd * lip * mass;
            if gap > bound {
                violations += 1;
            }
            gaps.push(vec![number(hd), k.to_string(), number(lip), number(gap), number(bound)]);
        }
        let coarse = atomize(&discretize(&lp_sample, &mesh)?);
        let support = lp_measure.len() + coarse.len();
        match bounded_lipschitz_distance(&lp_measure, &coarse, config.distance.support_cap) {
            Ok(d) => {
                lp_runs += 1;
                let bound = hd * mass;
                lp_ok &= d.value <= bound;
                lp.push(vec![
                    number(hd),
                    support.to_string(),
                    number(d.value),
                    number(bound),
                    d.iterations.to_string(),
                ]);
            }
            Err(Error::SupportTooLarge { size, .. }) => {
                lp.push(vec![number(hd), size.to_string(), "nan".into(), number(hd * mass), "0".into()]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let mut out = Outcome::new(Kind::DistanceCheck);
    out.tables.push(("distance-check".into(), gaps));
    out.tables.push(("distance-check-lp".into(), lp));
    out.checks.push(Check::new(
        "measure approximation",
        violations == 0,
        format!(
            "{violations} of {} gaps above h lip(phi) mass",
            diameters.len() * functions.len()
        ),
    ));
    out.checks.push(Check::new(
        "bounded Lipschitz distance",
        lp_ok,
        format!("{lp_runs} LP distances <= h mass (support cap {})", config.distance.support_cap),
    ));
    Ok(out)
}

/// Exact Ahlfors ratio of a ball of radius `r` centered on the shape, where
/// one is known in closed form.
fn exact_ratio<const N: usize>(shape: &dyn AnalyticShape<N>, r: f64) -> f64 {
    let (lo, hi) = shape.extent();
    let radius = 0.5 * (hi[0] - lo[0]);
    let round = (0..N).all(|i| ((hi[i] - lo[i]) * 0.5 - radius).abs() <= 1e-15 * radius);
    if !round || r > 2.0 * radius {
        return f64::NAN;
    }
    let ball = match shape.name() {
        "circle" => 4.0 * radius * (r / (2.0 * radius)).asin(),
        // spherical cap of chord radius r: 2 pi R (r^2 / 2R)
        "sphere" => PI * r * r,
        _ => return f64::NAN,
    };
    let rd = r.powi(shape.dim() as i32);
    (ball / rd).max(rd / ball)
}

fn ahlfors_scan<const N: usize>(config: &ExperimentConfig, shape: &dyn AnalyticShape<N>) -> Result<Outcome, CliError> {
    let v = SampledManifoldVarifold::new(sample_surface(shape, config.discretization.resolution)?);
    let probes = probes(config, shape)?;
    let mut table = Table::new(["radius", "c0_estimate", "c0_exact", "degenerate"]);
    for &r in &config.theory.radii {
        let est = ahlfors_estimate(&v, &[r], &probes)?;
        table.push(vec![
            number(r),
            number(est.c0),
            number(exact_ratio(shape, r)),
            est.degeneracy.map_or("no".into(), |d| format!("{d:?}")),
        ]);
    }
    let est = ahlfors_estimate(&v, &config.theory.radii, &probes)?;
    let mut out = Outcome::new(Kind::AhlforsScan);
    out.tables.push(("ahlfors-scan".into(), table));
    out.checks.push(Check::new(
        "finite estimate",
        est.c0.is_finite(),
        format!("C0 = {}", number(est.c0)),
    ));
    if let Some([lo, hi]) = config.acceptance.c0_range {
        out.checks.push(Check::new(
            "C0 range",
            est.c0 >= lo && est.c0 <= hi,
            format!("{} in [{lo}, {hi}]", number(est.c0)),
        ));
    }
    out.notes.push(format!(
        "C0 = {} attained at probe {} radius {}",
        number(est.c0),
        est.witness.0,
        est.witness.1
    ));
    Ok(out)
}

fn ledger_only(config: &ExperimentConfig, shape: &AnyShape, kernels: &KernelPair) -> Result<Outcome, CliError> {
    let (inputs, gamma) = ledger_inputs(config, shape, kernels, None)?;
    let ledger = constants_ledger(inputs)?;
    let mut table = Table::new(["bound", "value", "binding"]);
    let names = ["ahlfors", "curvature", "kernel", "strict"];
    for (name, value) in names.iter().zip(gamma.bounds) {
        table.push(vec![
            name.to_string(),
            number(value),
            (*name == gamma.binding.name()).to_string(),
        ]);
    }
    table.push(vec!["gamma".into(), number(gamma.gamma), "".into()]);
    let mut out = Outcome::new(Kind::ConstantsLedger);
    out.tables.push(("constants-ledger".into(), table));
    let finite = ledger.entries().iter().all(|(_, v)| v.is_finite() && *v >= 0.0);
    out.checks.push(Check::new(
        "finite constants",
        finite,
        "every constant is finite and nonnegative".to_string(),
    ));
    out.checks.push(Check::new(
        "strict kernel condition",
        ledger.c9 > 0.0,
        format!("c9 = {} > 0", number(ledger.c9)),
    ));
    out.ledger = Some(ledger);
    out.gamma = Some(gamma);
    Ok(out)
}
