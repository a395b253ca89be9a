//! Mean curvature flow trajectories: exact shrinking spheres and an explicit
//! curve-shortening integrator for closed polylines.

use std::sync::Arc;

use crate::geometry::{sample_surface, AnalyticShape, Circle, Plane, Sphere, WeightedSample};
use crate::quadrature::{compensated_sum, gauss_legendre};
use crate::table::{number, Table};
use crate::{Error, Point, Result};

/// Time at which a `d`-sphere of initial radius `r0` collapses.
pub fn extinction_time(r0: f64, d: usize) -> f64 {
    r0 * r0 / (2.0 * d as f64)
}

/// Radius `sqrt(r0^2 - 2 d t)` at time `t` of a round `d`-sphere in `R^n`
/// moving by mean curvature.
pub fn analytic_sphere_flow(r0: f64, d: usize, n: usize, t: f64) -> Result<f64> {
    if !(r0 > 0.0) || d == 0 || n <= d {
        return Err(Error::InvalidArgument(format!("sphere r0 = {r0}, d = {d}, n = {n}")));
    }
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("negative time {t}")));
    }
    let extinction = extinction_time(r0, d);
    if t >= extinction {
        return Err(Error::Extinction { t, extinction });
    }
    Ok((r0 * r0 - 2.0 * d as f64 * t).sqrt())
}

/// A closed polygonal curve in `R^N`; the last vertex connects to the first.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline<const N: usize> {
    vertices: Vec<Point<N>>,
}

impl<const N: usize> Polyline<N> {
    pub fn new(vertices: Vec<Point<N>>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidArgument("a closed polyline needs 3 vertices".into()));
        }
        let poly = Self { vertices };
        if poly.segment_lengths().iter().any(|l| !(*l > 0.0)) {
            return Err(Error::InvalidArgument("repeated consecutive vertices".into()));
        }
        Ok(poly)
    }

    pub fn vertices(&self) -> &[Point<N>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn next(&self, i: usize) -> usize {
        (i + 1) % self.vertices.len()
    }

    /// Length of segment `i`, from vertex `i` to vertex `i + 1`.
    pub fn segment_lengths(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| (self.vertices[self.next(i)] - self.vertices[i]).norm())
            .collect()
    }

    pub fn length(&self) -> f64 {
        compensated_sum(self.segment_lengths())
    }

    pub fn min_segment(&self) -> f64 {
        self.segment_lengths().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Discrete curvature vectors
    /// `2 / (l_{i-1} + l_i) * (e_i - e_{i-1})` with `e_i` the unit direction
    /// of segment `i`.
    pub fn curvature_vectors(&self) -> Vec<Point<N>> {
        let n = self.len();
        let lengths = self.segment_lengths();
        let dirs: Vec<Point<N>> = (0..n)
            .map(|i| (self.vertices[self.next(i)] - self.vertices[i]) / lengths[i])
            .collect();
        (0..n)
            .map(|i| {
                let prev = (i + n - 1) % n;
                (dirs[i] - dirs[prev]) * (2.0 / (lengths[prev] + lengths[i]))
            })
            .collect()
    }

    /// Resamples the curve at equal arc length, keeping vertex 0 and the
    /// vertex count.
    pub fn reparametrized(&self) -> Polyline<N> {
        let n = self.len();
        let lengths = self.segment_lengths();
        let total: f64 = compensated_sum(lengths.iter().copied());
        let mut out = Vec::with_capacity(n);
        out.push(self.vertices[0]);
        let mut seg = 0;
        let mut start = 0.0;
        for j in 1..n {
            let target = total * j as f64 / n as f64;
            while seg + 1 < n && start + lengths[seg] < target {
                start += lengths[seg];
                seg += 1;
            }
            let s = ((target - start) / lengths[seg]).clamp(0.0, 1.0);
            let a = self.vertices[seg];
            let b = self.vertices[self.next(seg)];
            out.push(a + (b - a) * s);
        }
        Polyline { vertices: out }
    }

    /// Quadrature of the length measure with `nodes` Gauss-Legendre points
    /// per segment.
    pub fn to_sample(&self, nodes: usize) -> Result<WeightedSample<N>> {
        let (z, w) = gauss_legendre(nodes.max(1));
        let mut points = Vec::with_capacity(self.len() * z.len());
        let mut planes = Vec::with_capacity(self.len() * z.len());
        let mut weights = Vec::with_capacity(self.len() * z.len());
        for i in 0..self.len() {
            let a = self.vertices[i];
            let b = self.vertices[self.next(i)];
            let plane = Plane::line(b - a)?;
            let l = (b - a).norm();
            for (zi, wi) in z.iter().zip(&w) {
                points.push(a + (b - a) * (0.5 * (zi + 1.0)));
                planes.push(plane);
                weights.push(0.5 * l * wi);
            }
        }
        WeightedSample::new(1, points, planes, weights)
    }

    /// Bounding box of the vertices.
    pub fn extent(&self) -> (Point<N>, Point<N>) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }
}

impl Polyline<2> {
    /// Regular polygon inscribed in the circle of the given radius.
    pub fn regular(center: Point<2>, radius: f64, count: usize, phase: f64) -> Result<Self> {
        let vertices = (0..count)
            .map(|j| {
                let t = phase + 2.0 * std::f64::consts::PI * j as f64 / count as f64;
                center + radius * Point::<2>::new(t.cos(), t.sin())
            })
            .collect();
        Self::new(vertices)
    }

    /// Absolute enclosed area (shoelace formula).
    pub fn area(&self) -> f64 {
        let s = compensated_sum((0..self.len()).map(|i| {
            let a = self.vertices[i];
            let b = self.vertices[self.next(i)];
            a[0] * b[1] - a[1] * b[0]
        }));
        0.5 * s.abs()
    }

    /// `L^2 / (4 pi A)`, equal to 1 for a circle.
    pub fn isoperimetric_ratio(&self) -> f64 {
        let l = self.length();
        l * l / (4.0 * std::f64::consts::PI * self.area())
    }

    /// First pair of non-adjacent segments that intersect.
    pub fn self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.len();
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b) = (self.vertices[i], self.vertices[self.next(i)]);
                let (c, d) = (self.vertices[j], self.vertices[self.next(j)]);
                if segments_intersect(a, b, c, d) {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

fn cross(o: Point<2>, a: Point<2>, b: Point<2>) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_intersect(a: Point<2>, b: Point<2>, c: Point<2>, d: Point<2>) -> bool {
    let lo = |p: Point<2>, q: Point<2>| p.inf(&q);
    let hi = |p: Point<2>, q: Point<2>| p.sup(&q);
    let (l1, h1, l2, h2) = (lo(a, b), hi(a, b), lo(c, d), hi(c, d));
    if h1[0] < l2[0] || h2[0] < l1[0] || h1[1] < l2[1] || h2[1] < l1[1] {
        return false;
    }
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    (d1 * d2 <= 0.0) && (d3 * d4 <= 0.0)
}

/// One explicit Euler step of curve shortening followed by arc-length
/// reparametrization. Requires `dt <= min_segment^2 / 4`.
pub fn curve_shortening_step(poly: &Polyline<2>, dt: f64) -> Result<Polyline<2>> {
    let limit = 0.25 * poly.min_segment().powi(2);
    if !(dt > 0.0 && dt <= limit) {
        return Err(Error::Unstable { dt, limit });
    }
    let kappa = poly.curvature_vectors();
    let moved: Vec<Point<2>> = poly
        .vertices
        .iter()
        .zip(&kappa)
        .map(|(x, k)| x + k * dt)
        .collect();
    let next = Polyline::new(moved)?.reparametrized();
    if let Some((first, second)) = next.self_intersection() {
        return Err(Error::SelfIntersection { first, second });
    }
    Ok(next)
}

/// One state of a flow.
#[derive(Clone, Debug)]
pub enum Snapshot<const N: usize> {
    Shape {
        shape: Arc<dyn AnalyticShape<N>>,
        radius: f64,
    },
    Polyline(Polyline<N>),
}

impl<const N: usize> Snapshot<N> {
    pub fn mass(&self) -> f64 {
        match self {
            Snapshot::Shape { shape, .. } => shape.total_measure(),
            Snapshot::Polyline(p) => p.length(),
        }
    }

    /// Quadrature sample with node spacing at most `spacing`.
    pub fn sample(&self, spacing: f64) -> Result<WeightedSample<N>> {
        match self {
            Snapshot::Shape { shape, .. } => {
                sample_surface(shape.as_ref(), shape.resolution_for_spacing(spacing))
            }
            Snapshot::Polyline(p) => {
                let max_seg = p.segment_lengths().into_iter().fold(0.0, f64::max);
                p.to_sample((max_seg / spacing).ceil().max(1.0) as usize)
            }
        }
    }

    pub fn extent(&self) -> (Point<N>, Point<N>) {
        match self {
            Snapshot::Shape { shape, .. } => shape.extent(),
            Snapshot::Polyline(p) => p.extent(),
        }
    }
}

/// A time-sampled mean curvature flow.
#[derive(Clone, Debug)]
pub struct FlowTrajectory<const N: usize> {
    dim: usize,
    times: Vec<f64>,
    snapshots: Vec<Snapshot<N>>,
    masses: Vec<f64>,
}

/// `intervals + 1` equally spaced times from `t1` to `t2`.
pub fn uniform_grid(t1: f64, t2: f64, intervals: usize) -> Vec<f64> {
    let step = (t2 - t1) / intervals.max(1) as f64;
    (0..=intervals)
        .map(|i| if i == intervals { t2 } else { t1 + step * i as f64 })
        .collect()
}

impl<const N: usize> FlowTrajectory<N> {
    fn from_parts(dim: usize, times: Vec<f64>, snapshots: Vec<Snapshot<N>>) -> Result<Self> {
        if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("times must be strictly increasing".into()));
        }
        let masses = snapshots.iter().map(Snapshot::mass).collect();
        Ok(Self {
            dim,
            times,
            snapshots,
            masses,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[Snapshot<N>] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Whether the mass never increases along the trajectory.
    pub fn is_mass_monotone(&self) -> bool {
        self.masses.windows(2).all(|w| w[1] <= w[0])
    }

    /// Bounding box of all snapshots.
    pub fn extent(&self) -> (Point<N>, Point<N>) {
        let (mut lo, mut hi) = self.snapshots[0].extent();
        for s in &self.snapshots[1..] {
            let (l, h) = s.extent();
            lo = lo.inf(&l);
            hi = hi.sup(&h);
        }
        (lo, hi)
    }

    /// Whether the time grid is uniform to `1e-12` relative.
    pub fn is_uniform(&self) -> bool {
        if self.times.len() < 3 {
            return true;
        }
        let step = (self.times[self.times.len() - 1] - self.times[0]) / (self.times.len() - 1) as f64;
        self.times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-12 * step.abs().max(1e-300) * 10.0)
    }

    /// Table with one row per snapshot (analytic) or per vertex (polylines).
    pub fn to_table(&self) -> Table {
        match self.snapshots.first() {
            Some(Snapshot::Polyline(_)) => {
                let mut header: Vec<String> =
                    vec!["snapshot".into(), "time".into(), "mass".into(), "vertex".into()];
                header.extend((1..=N).map(|i| format!("x{i}")));
                let mut t = Table::new(header);
                for (i, s) in self.snapshots.iter().enumerate() {
                    if let Snapshot::Polyline(p) = s {
                        for (v, x) in p.vertices().iter().enumerate() {
                            let mut row = vec![
                                i.to_string(),
                                number(self.times[i]),
                                number(self.masses[i]),
                                v.to_string(),
                            ];
                            row.extend(x.iter().map(|c| number(*c)));
                            t.push(row);
                        }
                    }
                }
                t
            }
            _ => {
                let mut t = Table::new(["snapshot", "time", "mass", "radius"]);
                for (i, s) in self.snapshots.iter().enumerate() {
                    let radius = match s {
                        Snapshot::Shape { radius, .. } => *radius,
                        Snapshot::Polyline(_) => f64::NAN,
                    };
                    t.push(vec![
                        i.to_string(),
                        number(self.times[i]),
                        number(self.masses[i]),
                        number(radius),
                    ]);
                }
                t
            }
        }
    }
}

/// `||M(t_index)||(R^N)`.
pub fn trajectory_mass<const N: usize>(traj: &FlowTrajectory<N>, t_index: usize) -> Result<f64> {
    traj.masses.get(t_index).copied().ok_or_else(|| {
        Error::InvalidArgument(format!("snapshot {t_index} of {}", traj.len()))
    })
}

impl FlowTrajectory<2> {
    /// Exact circle flow sampled at `times`.
    pub fn shrinking_circle(center: Point<2>, r0: f64, times: &[f64]) -> Result<Self> {
        let snapshots = times
            .iter()
            .map(|&t| {
                let radius = analytic_sphere_flow(r0, 1, 2, t)?;
                Ok(Snapshot::Shape {
                    shape: Arc::new(Circle::new(center, radius)?) as Arc<dyn AnalyticShape<2>>,
                    radius,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(1, times.to_vec(), snapshots)
    }

    /// Curve shortening from `initial` with step `dt`, recording a snapshot
    /// every `steps_per_snapshot` steps, `snapshots` snapshots in total
    /// (including the initial curve).
    pub fn curve_shortening(
        initial: Polyline<2>,
        dt: f64,
        steps_per_snapshot: usize,
        snapshots: usize,
    ) -> Result<Self> {
        let mut current = initial;
        let mut shots = vec![Snapshot::Polyline(current.clone())];
        let mut times = vec![0.0];
        for s in 1..snapshots {
            for _ in 0..steps_per_snapshot {
                current = curve_shortening_step(&current, dt)?;
            }
            shots.push(Snapshot::Polyline(current.clone()));
            times.push((s * steps_per_snapshot) as f64 * dt);
        }
        Self::from_parts(1, times, shots)
    }
}

impl FlowTrajectory<3> {
    /// Exact 2-sphere flow sampled at `times`.
    pub fn shrinking_sphere(center: Point<3>, r0: f64, times: &[f64]) -> Result<Self> {
        let snapshots = times
            .iter()
            .map(|&t| {
                let radius = analytic_sphere_flow(r0, 2, 3, t)?;
                Ok(Snapshot::Shape {
                    shape: Arc::new(Sphere::new(center, radius)?) as Arc<dyn AnalyticShape<3>>,
                    radius,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(2, times.to_vec(), snapshots)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_law() {
        assert_eq!(analytic_sphere_flow(1.0, 1, 2, 0.0).unwrap(), 1.0);
        assert!((analytic_sphere_flow(1.0, 1, 2, 0.25).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((analytic_sphere_flow(1.0, 2, 3, 0.2).unwrap() - 0.2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            analytic_sphere_flow(1.0, 1, 2, 0.5),
            Err(Error::Extinction { .. })
        ));
    }

    #[test]
    fn regular_polygon_curvature_is_inverse_radius() {
        let p = Polyline::regular(Point::<2>::zeros(), 2.0, 64, 0.1).unwrap();
        for (x, k) in p.vertices().iter().zip(p.curvature_vectors()) {
            assert!((k + x / 4.0).norm() < 1e-12);
        }
    }

    #[test]
    fn unstable_step_is_rejected() {
        let p = Polyline::regular(Point::<2>::zeros(), 1.0, 256, 0.0).unwrap();
        assert!(matches!(curve_shortening_step(&p, 1e-3), Err(Error::Unstable { .. })));
    }

    #[test]
    fn crossing_polyline_is_detected() {
        let bowtie = Polyline::new(vec![
            Point::<2>::new(0.0, 0.0),
            Point::<2>::new(1.0, 1.0),
            Point::<2>::new(1.0, 0.0),
            Point::<2>::new(0.0, 1.0),
        ])
        .unwrap();
        assert!(bowtie.self_intersection().is_some());
        let square = Polyline::regular(Point::<2>::zeros(), 1.0, 4, 0.0).unwrap();
        assert!(square.self_intersection().is_none());
    }

    #[test]
    fn masses_follow_the_radius_law() {
        let times = uniform_grid(0.0, 0.25, 4);
        let traj = FlowTrajectory::shrinking_circle(Point::<2>::zeros(), 1.0, &times).unwrap();
        assert_eq!(trajectory_mass(&traj, 0).unwrap(), 2.0 * std::f64::consts::PI);
        let m = trajectory_mass(&traj, 4).unwrap();
        assert!((m - 2.0 * std::f64::consts::PI * 0.5f64.sqrt()).abs() < 1e-14);
        assert!(traj.is_mass_monotone());
        assert!(trajectory_mass(&traj, 5).is_err());
    }
}
