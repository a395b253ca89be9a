//! Regularized first variation, regularized mass and the approximate mean
//! curvature
//!
//! ```text
//! H_eps(y) = -(C_xi / C_rho) (deltaV * rho_eps)(y) / (||V|| * xi_eps)(y)
//! ```

use std::collections::HashMap;

use rayon::prelude::*;

use crate::kernels::KernelPair;
use crate::table::{number, Table};
use crate::varifold::Varifold;
use crate::{Error, Matrix, Point, Result};

/// Default denominator floor, before the `eps^(d-n)` scaling.
pub const DEFAULT_TAU: f64 = 1e-14;

/// Scale and kernels of a curvature evaluation.
#[derive(Clone, Copy, Debug)]
pub struct CurvatureQuery<'k> {
    epsilon: f64,
    tau: f64,
    kernels: &'k KernelPair,
}

impl<'k> CurvatureQuery<'k> {
    pub fn new(kernels: &'k KernelPair, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon {epsilon} not in (0, 1]")));
        }
        Ok(Self {
            epsilon,
            tau: DEFAULT_TAU,
            kernels,
        })
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidArgument(format!("tau {tau} must be positive")));
        }
        self.tau = tau;
        Ok(self)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn kernels(&self) -> &'k KernelPair {
        self.kernels
    }

    /// Denominator floor `tau * eps^(d - n)`.
    pub fn floor(&self) -> f64 {
        let k = self.kernels;
        self.tau * self.epsilon.powi(k.d() as i32 - k.n() as i32)
    }
}

/// Numerator and denominator of `H_eps` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Convolutions<const N: usize> {
    /// `(deltaV * rho_eps)(y)`.
    pub first_variation: Point<N>,
    /// `(||V|| * xi_eps)(y)`.
    pub mass: f64,
}

/// Kernel sums over the atoms of one varifold at one scale, with a spatial
/// hash of bucket size `eps`.
///
/// Atoms are stored bucket by bucket in index order, and buckets are visited
/// in a fixed order, so results do not depend on atoms farther than `eps`.
pub struct KernelEvaluator<'k, const N: usize> {
    query: CurvatureQuery<'k>,
    positions: Vec<Point<N>>,
    projectors: Vec<Matrix<N>>,
    masses: Vec<f64>,
    buckets: HashMap<[i64; N], (usize, usize)>,
}

impl<'k, const N: usize> KernelEvaluator<'k, N> {
    pub fn new<V: Varifold<N> + ?Sized>(varifold: &V, query: CurvatureQuery<'k>) -> Result<Self> {
        if query.kernels.n() != N {
            return Err(Error::DimensionMismatch {
                expected: N,
                found: query.kernels.n(),
            });
        }
        if varifold.dim() != query.kernels.d() {
            return Err(Error::DimensionMismatch {
                expected: query.kernels.d(),
                found: varifold.dim(),
            });
        }
        let eps = query.epsilon;
        let atoms = varifold.kernel_atoms(eps);
        let mut keyed: Vec<([i64; N], usize)> = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (bucket_of(&a.position, eps), i))
            .collect();
        keyed.sort_unstable();
        let mut buckets = HashMap::new();
        let mut start = 0;
        while start < keyed.len() {
            let key = keyed[start].0;
            let mut end = start + 1;
            while end < keyed.len() && keyed[end].0 == key {
                end += 1;
            }
            buckets.insert(key, (start, end));
            start = end;
        }
        Ok(Self {
            query,
            positions: keyed.iter().map(|&(_, i)| atoms[i].position).collect(),
            projectors: keyed.iter().map(|&(_, i)| *atoms[i].plane.projector()).collect(),
            masses: keyed.iter().map(|&(_, i)| atoms[i].mass).collect(),
            buckets,
        })
    }

    pub fn query(&self) -> &CurvatureQuery<'k> {
        &self.query
    }

    /// Regularized first variation and regularized mass at `y`.
    pub fn convolutions(&self, y: &Point<N>) -> Convolutions<N> {
        let k = self.query.kernels;
        let eps = self.query.epsilon;
        let eps2 = eps * eps;
        let inv_eps = 1.0 / eps;
        let center = bucket_of(y, eps);
        let mut num = Point::<N>::zeros();
        let mut den = 0.0;
        for offset in 0..3usize.pow(N as u32) {
            let mut key = center;
            let mut o = offset;
            for c in key.iter_mut() {
                *c += (o % 3) as i64 - 1;
                o /= 3;
            }
            let Some(&(start, end)) = self.buckets.get(&key) else {
                continue;
            };
            for j in start..end {
                let w = self.positions[j] - y;
                let r2 = w.norm_squared();
                if r2 >= eps2 {
                    continue;
                }
                let m = self.masses[j];
                let r = r2.sqrt();
                let s = r * inv_eps;
                den += m * k.xi(s);
                if r > 0.0 {
                    num += self.projectors[j] * w * (m * k.d_rho(s) / r);
                }
            }
        }
        let n = k.n() as i32;
        Convolutions {
            first_variation: num / eps.powi(n + 1),
            mass: den / eps.powi(n),
        }
    }

    /// `H_eps(y)`, or `DenominatorTooSmall` when `||V|| * xi_eps` is below the
    /// floor.
    pub fn mean_curvature(&self, y: &Point<N>) -> Result<Point<N>> {
        self.evaluate(y).curvature
    }

    pub fn evaluate(&self, y: &Point<N>) -> FieldValue<N> {
        let c = self.convolutions(y);
        let floor = self.query.floor();
        let curvature = if c.mass > floor {
            Ok(c.first_variation * (-self.query.kernels.curvature_prefactor() / c.mass))
        } else {
            Err(Error::DenominatorTooSmall {
                point: y.iter().copied().collect(),
                value: c.mass,
                floor,
            })
        };
        FieldValue {
            point: *y,
            first_variation: c.first_variation,
            mass: c.mass,
            curvature,
        }
    }
}

fn bucket_of<const N: usize>(x: &Point<N>, eps: f64) -> [i64; N] {
    let mut key = [0i64; N];
    for (k, v) in key.iter_mut().zip(x.iter()) {
        *k = (v / eps).floor() as i64;
    }
    key
}

/// `(deltaV * rho_eps)(y) = int S grad rho_eps(z - y) dV(z, S)`.
pub fn regularized_first_variation<const N: usize, V: Varifold<N> + ?Sized>(
    varifold: &V,
    query: CurvatureQuery<'_>,
    y: &Point<N>,
) -> Result<Point<N>> {
    Ok(KernelEvaluator::new(varifold, query)?.convolutions(y).first_variation)
}

/// `(||V|| * xi_eps)(y) = int xi_eps(z - y) d||V||(z)`.
pub fn regularized_mass<const N: usize, V: Varifold<N> + ?Sized>(
    varifold: &V,
    query: CurvatureQuery<'_>,
    y: &Point<N>,
) -> Result<f64> {
    Ok(KernelEvaluator::new(varifold, query)?.convolutions(y).mass)
}

/// Approximate mean curvature `H_eps(y)`.
pub fn approx_mean_curvature<const N: usize, V: Varifold<N> + ?Sized>(
    varifold: &V,
    query: CurvatureQuery<'_>,
    y: &Point<N>,
) -> Result<Point<N>> {
    KernelEvaluator::new(varifold, query)?.mean_curvature(y)
}

/// One entry of a curvature field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldValue<const N: usize> {
    pub point: Point<N>,
    pub first_variation: Point<N>,
    pub mass: f64,
    pub curvature: Result<Point<N>>,
}

impl<const N: usize> FieldValue<N> {
    pub fn is_ok(&self) -> bool {
        self.curvature.is_ok()
    }
}

/// `H_eps` at every point, in input order. Points where the denominator is
/// too small are reported, not fatal.
pub fn curvature_field<const N: usize, V: Varifold<N> + ?Sized>(
    varifold: &V,
    query: CurvatureQuery<'_>,
    points: &[Point<N>],
) -> Result<Vec<FieldValue<N>>> {
    let evaluator = KernelEvaluator::new(varifold, query)?;
    Ok(points.par_iter().map(|y| evaluator.evaluate(y)).collect())
}

/// Table with point coordinates, `H_eps` components, denominator and status.
pub fn field_table<const N: usize>(values: &[FieldValue<N>]) -> Table {
    let mut header: Vec<String> = (1..=N).map(|i| format!("x{i}")).collect();
    header.extend((1..=N).map(|i| format!("h{i}")));
    header.push("denominator".into());
    header.push("status".into());
    let mut table = Table::new(header);
    for v in values {
        let mut row: Vec<String> = v.point.iter().map(|x| number(*x)).collect();
        match &v.curvature {
            Ok(h) => row.extend(h.iter().map(|x| number(*x))),
            Err(_) => row.extend((0..N).map(|_| number(f64::NAN))),
        }
        row.push(number(v.mass));
        row.push(if v.is_ok() { "ok" } else { "denominator-too-small" }.into());
        table.push(row);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Plane;
    use crate::varifold::{Atom, PointCloudVarifold};

    fn single(x: Point<2>, mass: f64) -> PointCloudVarifold<2> {
        let plane = Plane::line(Point::<2>::new(1.0, 0.5)).unwrap();
        PointCloudVarifold::new(1, vec![Atom { position: x, plane, mass }]).unwrap()
    }

    #[test]
    fn far_points_see_nothing() {
        let k = KernelPair::default_pair(2, 1).unwrap();
        let q = CurvatureQuery::new(&k, 0.1).unwrap();
        let v = single(Point::<2>::new(0.0, 0.0), 1.0);
        let y = Point::<2>::new(0.1, 0.0);
        assert_eq!(regularized_first_variation(&v, q, &y).unwrap(), Point::<2>::zeros());
        assert_eq!(regularized_mass(&v, q, &y).unwrap(), 0.0);
        assert!(matches!(
            approx_mean_curvature(&v, q, &y),
            Err(Error::DenominatorTooSmall { .. })
        ));
    }

    #[test]
    fn single_atom_matches_direct_formula() {
        let k = KernelPair::default_pair(2, 1).unwrap();
        let eps = 0.3;
        let q = CurvatureQuery::new(&k, eps).unwrap();
        let x = Point::<2>::new(0.05, -0.1);
        let v = single(x, 2.5);
        let y = Point::<2>::new(-0.07, 0.02);
        let plane = Plane::line(Point::<2>::new(1.0, 0.5)).unwrap();
        let expect = plane.project(&k.grad_rho_eps(&(x - y), eps)) * 2.5;
        let got = regularized_first_variation(&v, q, &y).unwrap();
        assert!((got - expect).norm() < 1e-12 * expect.norm());
        let mass = regularized_mass(&v, q, &y).unwrap();
        assert!((mass - 2.5 * k.xi_eps((x - y).norm(), eps)).abs() < 1e-12 * mass);
    }

    #[test]
    fn epsilon_range_is_checked() {
        let k = KernelPair::default_pair(2, 1).unwrap();
        assert!(CurvatureQuery::new(&k, 0.0).is_err());
        assert!(CurvatureQuery::new(&k, 1.5).is_err());
        assert!(CurvatureQuery::new(&k, 1.0).is_ok());
    }
}
