use rayon::prelude::*;

use super::test_function::{Bump, ScalarField};
use crate::curvature::{CurvatureQuery, KernelEvaluator};
use crate::discretization::{discretize, Mesh};
use crate::flow::{FlowTrajectory, Snapshot};
use crate::kernels::KernelPair;
use crate::quadrature::{CompensatedSum, TimeRule};
use crate::table::{number, Table};
use crate::varifold::{SampledManifoldVarifold, Varifold};
use crate::{Error, Point, Result};

/// What to do when `2h <= gamma eps` fails.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HypothesisPolicy {
    /// Refuse to evaluate.
    #[default]
    Enforce,
    /// Evaluate and flag the violation in the report.
    Record,
}

/// Which measure and curvature enter the residual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ResidualVariant {
    /// Volumetric discretization `V_h(t)` with `H_eps(., V_h(t))`.
    #[default]
    Discrete,
    /// Sampled `||M(t)||` with `H_eps(., M(t))`.
    SmoothedExactMeasure,
    /// Sampled `||M(t)||` with the exact mean curvature; only the time
    /// quadrature error remains.
    ExactControl,
}

impl ResidualVariant {
    pub fn name(self) -> &'static str {
        match self {
            ResidualVariant::Discrete => "discrete",
            ResidualVariant::SmoothedExactMeasure => "smoothed",
            ResidualVariant::ExactControl => "exact",
        }
    }
}

/// Constants entering the theoretical right-hand side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundConstants {
    pub c1: f64,
    pub big_c: f64,
    pub big_c_prime: f64,
}

/// Parameters of one residual evaluation.
#[derive(Clone, Debug)]
pub struct ResidualSetup<'a, const N: usize> {
    pub kernels: &'a KernelPair,
    pub epsilon: f64,
    /// Mesh edge length; the cell diameter is `h = edge * sqrt(N)`.
    pub edge: f64,
    /// Fixed box holding the flow, meshed from its lower corner.
    pub domain: (Point<N>, Point<N>),
    pub phi: Bump<N>,
    /// Snapshot indices of `t1` and `t2`.
    pub first: usize,
    pub last: usize,
    pub time_rule: TimeRule,
    pub gamma: f64,
    pub policy: HypothesisPolicy,
    pub variant: ResidualVariant,
    /// Target number of sample points per mesh cell.
    pub samples_per_cell: usize,
    pub constants: BoundConstants,
}

/// Per-snapshot terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapshotTerms {
    pub time: f64,
    /// `||V(t)||(phi)`.
    pub mass_phi: f64,
    /// `int phi |H|^2 - grad phi . H d||V(t)||`.
    pub integrand: f64,
    /// `||V(t)||(R^n)`.
    pub total_mass: f64,
    /// `||M(t)||(R^n)`.
    pub exact_mass: f64,
    pub cells: usize,
    pub samples: usize,
}

/// Every term of the approximate Brakke equality and its bound.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub variant: ResidualVariant,
    pub epsilon: f64,
    pub edge: f64,
    pub h: f64,
    pub intervals: usize,
    pub t1: f64,
    pub t2: f64,
    pub time_rule: TimeRule,
    /// `||V(t1)||(phi)` and `||V(t2)||(phi)`.
    pub mass_t1: f64,
    pub mass_t2: f64,
    /// `int_{t1}^{t2} int phi |H_eps|^2 - grad phi . H_eps d||V|| dt`.
    pub integral: f64,
    /// The same integral with `phi_eps = -phi |H_eps|^2 + grad phi . H_eps`.
    pub integral_phi_eps: f64,
    /// `|mass_t2 - mass_t1 + integral|`.
    pub residual: f64,
    /// `2 lip(phi) max_{t1,t2} h ||M(t)||(R^n)`.
    pub bound_distance_term: f64,
    /// `||phi||_inf C1 eps (||M(t1)|| - ||M(t2)||)`.
    pub bound_mass_drop_term: f64,
    /// `||phi||_{C^2} C (t2 - t1) (eps + h / eps^3)`.
    pub bound_main_term: f64,
    pub bound: f64,
    /// `||phi||_{C^2} C' (eps + h / eps^3)`.
    pub weak_bound: f64,
    pub gamma: f64,
    pub hypothesis_holds: bool,
    pub snapshots: Vec<SnapshotTerms>,
}

impl ResidualReport {
    /// Residual recomputed from the stored terms.
    pub fn recomputed_residual(&self) -> f64 {
        (self.mass_t2 - self.mass_t1 + self.integral).abs()
    }

    /// `eps + h / eps^3`.
    pub fn scale(&self) -> f64 {
        self.epsilon + self.h / self.epsilon.powi(3)
    }

    /// Flat `key = value` record.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.fields() {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("variant", self.variant.name().to_string()),
            ("epsilon", number(self.epsilon)),
            ("edge", number(self.edge)),
            ("h", number(self.h)),
            ("intervals", self.intervals.to_string()),
            ("t1", number(self.t1)),
            ("t2", number(self.t2)),
            ("time_rule", self.time_rule.name().to_string()),
            ("mass_t1", number(self.mass_t1)),
            ("mass_t2", number(self.mass_t2)),
            ("integral", number(self.integral)),
            ("integral_phi_eps", number(self.integral_phi_eps)),
            ("residual", number(self.residual)),
            ("bound_distance_term", number(self.bound_distance_term)),
            ("bound_mass_drop_term", number(self.bound_mass_drop_term)),
            ("bound_main_term", number(self.bound_main_term)),
            ("bound", number(self.bound)),
            ("weak_bound", number(self.weak_bound)),
            ("gamma", number(self.gamma)),
            ("hypothesis_holds", self.hypothesis_holds.to_string()),
        ]
    }

    /// A table whose single row is this report.
    pub fn table_header() -> Table {
        let dummy: Vec<&'static str> = [
            "variant",
            "epsilon",
            "edge",
            "h",
            "intervals",
            "t1",
            "t2",
            "time_rule",
            "mass_t1",
            "mass_t2",
            "integral",
            "integral_phi_eps",
            "residual",
            "bound_distance_term",
            "bound_mass_drop_term",
            "bound_main_term",
            "bound",
            "weak_bound",
            "gamma",
            "hypothesis_holds",
        ]
        .to_vec();
        Table::new(dummy)
    }

    pub fn push_row(&self, table: &mut Table) {
        table.push(self.fields().into_iter().map(|(_, v)| v).collect());
    }
}

fn snapshot_terms<const N: usize>(
    snapshot: &Snapshot<N>,
    time: f64,
    setup: &ResidualSetup<'_, N>,
    mesh: &Mesh<N>,
) -> Result<SnapshotTerms> {
    let d = setup.kernels.d() as f64;
    let spacing = setup.edge / (setup.samples_per_cell.max(1) as f64).powf(1.0 / d);
    let sample = snapshot.sample(spacing)?;
    let samples = sample.len();
    let phi = &setup.phi;
    let query = CurvatureQuery::new(setup.kernels, setup.epsilon)?;
    let exact_mass = snapshot.mass();

    let integrate = |atoms: &[crate::varifold::Atom<N>],
                     curvature: &(dyn Fn(&Point<N>) -> Result<Point<N>> + Sync)|
     -> Result<f64> {
        let values: Vec<Result<f64>> = atoms
            .par_iter()
            .map(|a| {
                if !phi.in_support(&a.position) {
                    return Ok(0.0);
                }
                let h = curvature(&a.position)?;
                Ok(a.mass * (phi.value(&a.position) * h.norm_squared() - phi.gradient(&a.position).dot(&h)))
            })
            .collect();
        let mut sum = CompensatedSum::new();
        for v in values {
            sum.add(v?);
        }
        Ok(sum.value())
    };

    match setup.variant {
        ResidualVariant::Discrete => {
            let vh = discretize(&sample, mesh)?;
            let ev = KernelEvaluator::new(&vh, query)?;
            let atoms = vh.atoms();
            let integrand = integrate(&atoms, &|y| ev.mean_curvature(y))?;
            Ok(SnapshotTerms {
                time,
                mass_phi: vh.mass_apply(|x| phi.value(x)),
                integrand,
                total_mass: vh.mass_total(),
                exact_mass,
                cells: vh.cells().len(),
                samples,
            })
        }
        ResidualVariant::SmoothedExactMeasure => {
            let v = SampledManifoldVarifold::new(sample);
            let ev = KernelEvaluator::new(&v, query)?;
            let atoms = v.atoms();
            let integrand = integrate(&atoms, &|y| ev.mean_curvature(y))?;
            Ok(SnapshotTerms {
                time,
                mass_phi: v.mass_apply(|x| phi.value(x)),
                integrand,
                total_mass: v.mass_total(),
                exact_mass,
                cells: 0,
                samples,
            })
        }
        ResidualVariant::ExactControl => {
            let Snapshot::Shape { shape, .. } = snapshot else {
                return Err(Error::InvalidArgument(
                    "the exact control needs analytic snapshots".into(),
                ));
            };
            let v = SampledManifoldVarifold::new(sample);
            let atoms = v.atoms();
            let integrand = integrate(&atoms, &|y| shape.exact_mean_curvature(y))?;
            Ok(SnapshotTerms {
                time,
                mass_phi: v.mass_apply(|x| phi.value(x)),
                integrand,
                total_mass: v.mass_total(),
                exact_mass,
                cells: 0,
                samples,
            })
        }
    }
}

/// Evaluates the approximate Brakke equality on `[t1, t2]` for a flow sampled
/// on a uniform time grid.
pub fn brakke_residual<const N: usize>(
    traj: &FlowTrajectory<N>,
    setup: &ResidualSetup<'_, N>,
) -> Result<ResidualReport> {
    if !(setup.first < setup.last && setup.last < traj.len()) {
        return Err(Error::InvalidArgument(format!(
            "snapshot range {}..={} of {}",
            setup.first,
            setup.last,
            traj.len()
        )));
    }
    if !traj.is_uniform() {
        return Err(Error::InvalidArgument("time grid is not uniform".into()));
    }
    let mesh = Mesh::covering(setup.domain.0, setup.domain.1, setup.edge)?;
    let h = mesh.diameter();
    let eps = setup.epsilon;
    let two_h = 2.0 * h;
    let gamma_eps = setup.gamma * eps;
    let hypothesis_holds = two_h <= gamma_eps;
    if !hypothesis_holds && setup.policy == HypothesisPolicy::Enforce {
        return Err(Error::HypothesisViolated { two_h, gamma_eps });
    }
    let (lo, hi) = traj.extent();
    if (0..N).any(|i| lo[i] < setup.domain.0[i] || hi[i] > setup.domain.1[i]) {
        return Err(Error::InvalidArgument("flow leaves the domain box".into()));
    }

    let indices: Vec<usize> = (setup.first..=setup.last).collect();
    let terms: Vec<SnapshotTerms> = indices
        .par_iter()
        .map(|&i| snapshot_terms(&traj.snapshots()[i], traj.times()[i], setup, &mesh))
        .collect::<Result<_>>()?;

    let intervals = setup.last - setup.first;
    let t1 = traj.times()[setup.first];
    let t2 = traj.times()[setup.last];
    let weights = setup.time_rule.weights(intervals, (t2 - t1) / intervals as f64);
    let integral = terms
        .iter()
        .zip(&weights)
        .map(|(t, w)| w * t.integrand)
        .collect::<CompensatedSum>()
        .value();
    let mass_t1 = terms[0].mass_phi;
    let mass_t2 = terms[intervals].mass_phi;
    let residual = (mass_t2 - mass_t1 + integral).abs();

    let norms = setup.phi.norms();
    let exact_t1 = terms[0].exact_mass;
    let exact_t2 = terms[intervals].exact_mass;
    let c = setup.constants;
    let scale = eps + h / eps.powi(3);
    let bound_distance_term = 2.0 * norms.lip() * h * exact_t1.max(exact_t2);
    let bound_mass_drop_term = norms.sup * c.c1 * eps * (exact_t1 - exact_t2);
    let bound_main_term = norms.c2() * c.big_c * (t2 - t1) * scale;
    Ok(ResidualReport {
        variant: setup.variant,
        epsilon: eps,
        edge: setup.edge,
        h,
        intervals,
        t1,
        t2,
        time_rule: setup.time_rule,
        mass_t1,
        mass_t2,
        integral,
        integral_phi_eps: -integral,
        residual,
        bound_distance_term,
        bound_mass_drop_term,
        bound_main_term,
        bound: bound_distance_term + bound_mass_drop_term + bound_main_term,
        weak_bound: norms.c2() * c.big_c_prime * scale,
        gamma: setup.gamma,
        hypothesis_holds,
        snapshots: terms,
    })
}
