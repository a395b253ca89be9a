//! Bounded Lipschitz distance between atomic measures and Ahlfors-regularity
//! estimates.

use std::collections::BTreeMap;

use crate::lp;
use crate::table::{number, Table};
use crate::varifold::{PointCloudVarifold, SampledManifoldVarifold, Varifold, VolumetricVarifold};
use crate::{Error, Point, Result};

/// Default cap on the merged support size of a distance computation.
pub const DEFAULT_SUPPORT_CAP: usize = 2000;

/// A finite sum of positive point masses.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure<const N: usize> {
    atoms: Vec<(Point<N>, f64)>,
}

impl<const N: usize> AtomicMeasure<N> {
    /// Drops zero masses; rejects negative or non-finite ones.
    pub fn new(atoms: Vec<(Point<N>, f64)>) -> Result<Self> {
        if let Some((_, m)) = atoms.iter().find(|(_, m)| !(*m >= 0.0 && m.is_finite())) {
            return Err(Error::InvalidArgument(format!("atom mass {m}")));
        }
        Ok(Self {
            atoms: atoms.into_iter().filter(|(_, m)| *m > 0.0).collect(),
        })
    }

    pub fn zero() -> Self {
        Self { atoms: Vec::new() }
    }

    pub fn dirac(x: Point<N>, mass: f64) -> Result<Self> {
        Self::new(vec![(x, mass)])
    }

    pub fn atoms(&self) -> &[(Point<N>, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        crate::quadrature::compensated_sum(self.atoms.iter().map(|(_, m)| *m))
    }
}

/// Conversion of a varifold's mass measure to point masses.
pub trait Atomize<const N: usize> {
    fn atomize(&self) -> AtomicMeasure<N>;
}

impl<const N: usize> Atomize<N> for PointCloudVarifold<N> {
    fn atomize(&self) -> AtomicMeasure<N> {
        AtomicMeasure {
            atoms: self.atoms().iter().map(|a| (a.position, a.mass)).collect(),
        }
    }
}

impl<const N: usize> Atomize<N> for SampledManifoldVarifold<N> {
    fn atomize(&self) -> AtomicMeasure<N> {
        AtomicMeasure {
            atoms: self.sample().iter().map(|(x, _, w)| (*x, w)).collect(),
        }
    }
}

/// Cells become atoms at their centers carrying `m_K`.
impl<const N: usize> Atomize<N> for VolumetricVarifold<N> {
    fn atomize(&self) -> AtomicMeasure<N> {
        AtomicMeasure {
            atoms: self.center_atoms().iter().map(|a| (a.position, a.mass)).collect(),
        }
    }
}

pub fn atomize<const N: usize, V: Atomize<N> + ?Sized>(varifold: &V) -> AtomicMeasure<N> {
    varifold.atomize()
}

/// Result of a bounded Lipschitz distance computation.
#[derive(Clone, Debug, PartialEq)]
pub struct Distance<const N: usize> {
    pub value: f64,
    pub iterations: usize,
    /// Merged support with the optimal test function values.
    pub support: Vec<(Point<N>, f64)>,
    /// Optimal sup-norm bound `a` and Lipschitz bound `L` (`a + L <= 1`).
    pub sup_bound: f64,
    pub lipschitz_bound: f64,
}

fn key<const N: usize>(x: &Point<N>) -> [u64; N] {
    let mut k = [0u64; N];
    for (ki, v) in k.iter_mut().zip(x.iter()) {
        // +0.0 and -0.0 are the same point
        *ki = (v + 0.0).to_bits();
    }
    k
}

/// `Delta(mu, nu) = sup { int phi d(mu - nu) : ||phi||_inf + lip(phi) <= 1 }`,
/// solved exactly as a linear program on the merged support.
pub fn bounded_lipschitz_distance<const N: usize>(
    mu: &AtomicMeasure<N>,
    nu: &AtomicMeasure<N>,
    support_cap: usize,
) -> Result<Distance<N>> {
    let mut merged: BTreeMap<[u64; N], (Point<N>, f64)> = BTreeMap::new();
    for (x, m) in &mu.atoms {
        merged.entry(key(x)).or_insert((*x, 0.0)).1 += m;
    }
    for (x, m) in &nu.atoms {
        merged.entry(key(x)).or_insert((*x, 0.0)).1 -= m;
    }
    let support: Vec<(Point<N>, f64)> = merged.into_values().filter(|(_, c)| *c != 0.0).collect();
    if support.len() > support_cap {
        return Err(Error::SupportTooLarge {
            size: support.len(),
            cap: support_cap,
        });
    }
    let c: Vec<f64> = support.iter().map(|(_, c)| *c).collect();
    let points: Vec<Point<N>> = support.iter().map(|(x, _)| *x).collect();
    let k = c.len();
    let max_iterations = 200 * (k + 2) * (k + 2) + 1000;
    let sol = lp::solve(&c, |i, j| (points[i] - points[j]).norm(), max_iterations)?;
    Ok(Distance {
        value: sol.value,
        iterations: sol.iterations,
        support: points.into_iter().zip(sol.phi).collect(),
        sup_bound: sol.a,
        lipschitz_bound: sol.lipschitz,
    })
}

/// Table row layout for distance reports.
pub fn distance_table() -> Table {
    Table::new(["label", "distance", "iterations"])
}

pub fn push_distance<const N: usize>(table: &mut Table, label: &str, d: &Distance<N>) {
    table.push(vec![label.to_string(), number(d.value), d.iterations.to_string()]);
}

/// Why an Ahlfors estimate is infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degeneracy {
    /// The ball has zero mass.
    EmptyBall,
    /// All mass in the ball sits at the probe point, so the ratio
    /// `r^d / ||V||(B(x, r))` is unbounded as `r -> 0`.
    PointMass,
}

/// Estimated Ahlfors-regularity constant.
#[derive(Clone, Debug, PartialEq)]
pub struct AhlforsEstimate {
    /// `max(||V||(B) / r^d, r^d / ||V||(B))` over probes and radii; infinite
    /// when degenerate.
    pub c0: f64,
    /// Probe index and radius attaining the estimate.
    pub witness: (usize, f64),
    /// Largest lower-side ratio `r^d / ||V||(B)` with its probe and radius.
    pub lower_witness: (usize, f64, f64),
    pub degeneracy: Option<Degeneracy>,
}

/// Ahlfors constant of `||V||` probed at the given points and radii. Ball
/// masses use the varifold's quadrature atoms (for volumetric varifolds the
/// fraction of subcell midpoints inside the ball).
pub fn ahlfors_estimate<const N: usize, V: Varifold<N> + ?Sized>(
    varifold: &V,
    radii: &[f64],
    probes: &[Point<N>],
) -> Result<AhlforsEstimate> {
    if radii.is_empty() || probes.is_empty() {
        return Err(Error::InvalidArgument("need at least one radius and one probe".into()));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidArgument(format!("radius {r}")));
    }
    let d = varifold.dim() as i32;
    let atoms = varifold.atoms();
    let mut best = AhlforsEstimate {
        c0: 0.0,
        witness: (0, radii[0]),
        lower_witness: (0, radii[0], 0.0),
        degeneracy: None,
    };
    for (p, x) in probes.iter().enumerate() {
        let at_probe: f64 = atoms
            .iter()
            .filter(|a| (a.position - x).norm() <= 1e-12 * (1.0 + x.norm()))
            .map(|a| a.mass)
            .sum();
        for &r in radii {
            let ball: f64 = atoms
                .iter()
                .filter(|a| (a.position - x).norm() <= r)
                .map(|a| a.mass)
                .sum();
            let degeneracy = if ball <= 0.0 {
                Some(Degeneracy::EmptyBall)
            } else if d > 0 && ball <= at_probe {
                Some(Degeneracy::PointMass)
            } else {
                None
            };
            if let Some(kind) = degeneracy {
                return Ok(AhlforsEstimate {
                    c0: f64::INFINITY,
                    witness: (p, r),
                    lower_witness: (p, r, f64::INFINITY),
                    degeneracy: Some(kind),
                });
            }
            let rd = r.powi(d);
            let upper = ball / rd;
            let lower = rd / ball;
            if lower > best.lower_witness.2 {
                best.lower_witness = (p, r, lower);
            }
            let ratio = upper.max(lower);
            if ratio > best.c0 {
                best.c0 = ratio;
                best.witness = (p, r);
            }
        }
    }
    Ok(best)
}
