use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

use super::{Plane, WeightedSample};
use crate::quadrature::gauss_legendre;
use crate::{Error, Point, Result};

/// Distance from the parametrized surface beyond which a point is rejected.
pub const ON_SHAPE_TOLERANCE: f64 = 1e-8;

/// A closed analytic submanifold of `R^N` with exact differential geometry.
///
/// Parameters are passed as `[f64; 2]`; curves ignore the second entry.
pub trait AnalyticShape<const N: usize>: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// Dimension `d` of the submanifold.
    fn dim(&self) -> usize;

    fn position(&self, u: [f64; 2]) -> Point<N>;

    /// Partial derivatives of the parametrization, one per parameter.
    fn tangents(&self, u: [f64; 2]) -> Vec<Point<N>>;

    fn tangent_plane(&self, u: [f64; 2]) -> Plane<N> {
        Plane::from_basis(&self.tangents(u)).expect("parametrization is an immersion")
    }

    /// Mean curvature vector (sum of principal curvatures, pointing to the
    /// concave side).
    fn mean_curvature_at(&self, u: [f64; 2]) -> Point<N>;

    /// Maximum over the shape of the largest principal curvature.
    fn max_principal_curvature(&self) -> f64;

    /// Total `d`-dimensional measure.
    fn total_measure(&self) -> f64;

    /// Parameters of the point of the shape associated with `y`. Exact for
    /// points on the shape; otherwise a nearby parameter.
    fn parameters_of(&self, y: &Point<N>) -> [f64; 2];

    /// Quadrature nodes and weights for `resolution`.
    fn quadrature(&self, resolution: usize) -> (Vec<[f64; 2]>, Vec<f64>);

    /// Smallest resolution whose node spacing is at most `spacing`.
    fn resolution_for_spacing(&self, spacing: f64) -> usize;

    /// Axis-aligned bounding box `(lower, upper)`.
    fn extent(&self) -> (Point<N>, Point<N>);

    /// Exact mean curvature at a point `y` of the shape.
    fn exact_mean_curvature(&self, y: &Point<N>) -> Result<Point<N>> {
        let u = self.parameters_of(y);
        let distance = (self.position(u) - y).norm();
        if !(distance <= ON_SHAPE_TOLERANCE) {
            return Err(Error::NotOnShape { distance });
        }
        Ok(self.mean_curvature_at(u))
    }
}

/// Product-rule quadrature of the shape's `d`-dimensional measure.
pub fn sample_surface<const N: usize, S: AnalyticShape<N> + ?Sized>(
    shape: &S,
    resolution: usize,
) -> Result<WeightedSample<N>> {
    if resolution < 8 {
        return Err(Error::InvalidArgument(format!(
            "resolution {resolution} is below the minimum of 8"
        )));
    }
    let (params, weights) = shape.quadrature(resolution);
    let points = params.iter().map(|&u| shape.position(u)).collect();
    let planes = params.iter().map(|&u| shape.tangent_plane(u)).collect();
    WeightedSample::new(shape.dim(), points, planes, weights)
}

fn periodic_nodes(count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |j| 2.0 * PI * j as f64 / count as f64)
}

fn ceil_resolution(length: f64, spacing: f64) -> usize {
    ((length / spacing).ceil() as usize).max(8)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circle {
    pub center: Point<2>,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point<2>, radius: f64) -> Result<Self> {
        positive("radius", radius)?;
        Ok(Self { center, radius })
    }

    pub fn unit() -> Self {
        Self {
            center: Point::<2>::zeros(),
            radius: 1.0,
        }
    }
}

impl AnalyticShape<2> for Circle {
    fn name(&self) -> &'static str {
        "circle"
    }
    fn dim(&self) -> usize {
        1
    }
    fn position(&self, u: [f64; 2]) -> Point<2> {
        self.center + self.radius * Point::<2>::new(u[0].cos(), u[0].sin())
    }
    fn tangents(&self, u: [f64; 2]) -> Vec<Point<2>> {
        vec![self.radius * Point::<2>::new(-u[0].sin(), u[0].cos())]
    }
    fn mean_curvature_at(&self, u: [f64; 2]) -> Point<2> {
        -Point::<2>::new(u[0].cos(), u[0].sin()) / self.radius
    }
    fn max_principal_curvature(&self) -> f64 {
        1.0 / self.radius
    }
    fn total_measure(&self) -> f64 {
        2.0 * PI * self.radius
    }
    fn parameters_of(&self, y: &Point<2>) -> [f64; 2] {
        let v = y - self.center;
        [v[1].atan2(v[0]), 0.0]
    }
    fn quadrature(&self, resolution: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
        let w = self.total_measure() / resolution as f64;
        (periodic_nodes(resolution).map(|t| [t, 0.0]).collect(), vec![w; resolution])
    }
    fn resolution_for_spacing(&self, spacing: f64) -> usize {
        ceil_resolution(self.total_measure(), spacing)
    }
    fn extent(&self) -> (Point<2>, Point<2>) {
        let r = Point::<2>::repeat(self.radius);
        (self.center - r, self.center + r)
    }
}

/// Axis-aligned ellipse with semi-axes `a` (along x) and `b` (along y).
#[derive(Clone, Debug, PartialEq)]
pub struct Ellipse {
    pub center: Point<2>,
    pub a: f64,
    pub b: f64,
}

impl Ellipse {
    pub fn new(center: Point<2>, a: f64, b: f64) -> Result<Self> {
        positive("semi-axis a", a)?;
        positive("semi-axis b", b)?;
        Ok(Self { center, a, b })
    }

    fn speed(&self, t: f64) -> f64 {
        (self.a * t.sin()).hypot(self.b * t.cos())
    }
}

impl AnalyticShape<2> for Ellipse {
    fn name(&self) -> &'static str {
        "ellipse"
    }
    fn dim(&self) -> usize {
        1
    }
    fn position(&self, u: [f64; 2]) -> Point<2> {
        self.center + Point::<2>::new(self.a * u[0].cos(), self.b * u[0].sin())
    }
    fn tangents(&self, u: [f64; 2]) -> Vec<Point<2>> {
        vec![Point::<2>::new(-self.a * u[0].sin(), self.b * u[0].cos())]
    }
    fn mean_curvature_at(&self, u: [f64; 2]) -> Point<2> {
        let t = u[0];
        let s = self.speed(t);
        let kappa = self.a * self.b / (s * s * s);
        let inward = -Point::<2>::new(self.b * t.cos(), self.a * t.sin()) / s;
        kappa * inward
    }
    fn max_principal_curvature(&self) -> f64 {
        (self.a / (self.b * self.b)).max(self.b / (self.a * self.a))
    }
    fn total_measure(&self) -> f64 {
        // Perimeter through the arithmetic-geometric mean.
        let (mut a, mut b) = (self.a.max(self.b), self.a.min(self.b));
        let mut sum = 0.5 * (a * a - b * b);
        let mut power = 1.0;
        for _ in 0..64 {
            let c = 0.5 * (a - b);
            let next_a = 0.5 * (a + b);
            b = (a * b).sqrt();
            a = next_a;
            sum += power * c * c;
            power *= 2.0;
            if c.abs() < 1e-17 * a {
                break;
            }
        }
        2.0 * PI / a * (self.a.max(self.b).powi(2) - sum)
    }
    fn parameters_of(&self, y: &Point<2>) -> [f64; 2] {
        let v = y - self.center;
        [(v[1] / self.b).atan2(v[0] / self.a), 0.0]
    }
    fn quadrature(&self, resolution: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
        let step = 2.0 * PI / resolution as f64;
        periodic_nodes(resolution)
            .map(|t| ([t, 0.0], self.speed(t) * step))
            .unzip()
    }
    fn resolution_for_spacing(&self, spacing: f64) -> usize {
        ceil_resolution(2.0 * PI * self.a.max(self.b), spacing)
    }
    fn extent(&self) -> (Point<2>, Point<2>) {
        let r = Point::<2>::new(self.a, self.b);
        (self.center - r, self.center + r)
    }
}

/// Round 2-sphere in `R^3`, parametrized by polar angle and azimuth.
#[derive(Clone, Debug, PartialEq)]
pub struct Sphere {
    pub center: Point<3>,
    pub radius: f64,
}

impl Sphere {
    pub fn new(center: Point<3>, radius: f64) -> Result<Self> {
        positive("radius", radius)?;
        Ok(Self { center, radius })
    }

    pub fn unit() -> Self {
        Self {
            center: Point::<3>::zeros(),
            radius: 1.0,
        }
    }

    fn normal(u: [f64; 2]) -> Point<3> {
        let (st, ct) = u[0].sin_cos();
        Point::<3>::new(st * u[1].cos(), st * u[1].sin(), ct)
    }
}

impl AnalyticShape<3> for Sphere {
    fn name(&self) -> &'static str {
        "sphere"
    }
    fn dim(&self) -> usize {
        2
    }
    fn position(&self, u: [f64; 2]) -> Point<3> {
        self.center + self.radius * Self::normal(u)
    }
    fn tangents(&self, u: [f64; 2]) -> Vec<Point<3>> {
        let (st, ct) = u[0].sin_cos();
        let (sp, cp) = u[1].sin_cos();
        vec![
            self.radius * Point::<3>::new(ct * cp, ct * sp, -st),
            self.radius * Point::<3>::new(-st * sp, st * cp, 0.0),
        ]
    }
    fn tangent_plane(&self, u: [f64; 2]) -> Plane<3> {
        // Well defined at the poles, unlike the coordinate frame.
        let n = Self::normal(u);
        let p = crate::Matrix::<3>::identity() - n * n.transpose();
        Plane::from_projector(p, 2).expect("unit normal gives a projector")
    }
    fn mean_curvature_at(&self, u: [f64; 2]) -> Point<3> {
        -2.0 / self.radius * Self::normal(u)
    }
    fn max_principal_curvature(&self) -> f64 {
        1.0 / self.radius
    }
    fn total_measure(&self) -> f64 {
        4.0 * PI * self.radius * self.radius
    }
    fn parameters_of(&self, y: &Point<3>) -> [f64; 2] {
        let v = y - self.center;
        let r = v.norm();
        let theta = if r > 0.0 { (v[2] / r).clamp(-1.0, 1.0).acos() } else { 0.0 };
        [theta, v[1].atan2(v[0])]
    }
    /// Gauss-Legendre in `cos(theta)` (half as many nodes as `resolution`)
    /// times the periodic trapezoid rule in azimuth.
    fn quadrature(&self, resolution: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
        let (z, wz) = gauss_legendre((resolution / 2).max(4));
        let step = 2.0 * PI / resolution as f64;
        let r2 = self.radius * self.radius;
        let mut params = Vec::with_capacity(z.len() * resolution);
        let mut weights = Vec::with_capacity(z.len() * resolution);
        for (zi, wi) in z.iter().zip(&wz) {
            let theta = zi.clamp(-1.0, 1.0).acos();
            for phi in periodic_nodes(resolution) {
                params.push([theta, phi]);
                weights.push(r2 * wi * step);
            }
        }
        (params, weights)
    }
    fn resolution_for_spacing(&self, spacing: f64) -> usize {
        ceil_resolution(2.0 * PI * self.radius, spacing)
    }
    fn extent(&self) -> (Point<3>, Point<3>) {
        let r = Point::<3>::repeat(self.radius);
        (self.center - r, self.center + r)
    }
}

/// Round torus of revolution about the z axis with major radius `major`
/// (center to tube center) and tube radius `minor`.
#[derive(Clone, Debug, PartialEq)]
pub struct Torus {
    pub center: Point<3>,
    pub major: f64,
    pub minor: f64,
}

impl Torus {
    pub fn new(center: Point<3>, major: f64, minor: f64) -> Result<Self> {
        positive("minor radius", minor)?;
        if !(major > minor) {
            return Err(Error::InvalidArgument(format!(
                "major radius {major} must exceed minor radius {minor}"
            )));
        }
        Ok(Self { center, major, minor })
    }

    fn outward_normal(u: [f64; 2]) -> Point<3> {
        let (sp, cp) = u[0].sin_cos();
        let (sq, cq) = u[1].sin_cos();
        Point::<3>::new(cq * cp, cq * sp, sq)
    }

    fn tube_resolution(&self, resolution: usize) -> usize {
        ((resolution as f64 * self.minor / (self.major + self.minor)).ceil() as usize).max(8)
    }
}

impl AnalyticShape<3> for Torus {
    fn name(&self) -> &'static str {
        "torus"
    }
    fn dim(&self) -> usize {
        2
    }
    fn position(&self, u: [f64; 2]) -> Point<3> {
        let (sp, cp) = u[0].sin_cos();
        let (sq, cq) = u[1].sin_cos();
        let rho = self.major + self.minor * cq;
        self.center + Point::<3>::new(rho * cp, rho * sp, self.minor * sq)
    }
    fn tangents(&self, u: [f64; 2]) -> Vec<Point<3>> {
        let (sp, cp) = u[0].sin_cos();
        let (sq, cq) = u[1].sin_cos();
        let rho = self.major + self.minor * cq;
        vec![
            Point::<3>::new(-rho * sp, rho * cp, 0.0),
            self.minor * Point::<3>::new(-sq * cp, -sq * sp, cq),
        ]
    }
    fn mean_curvature_at(&self, u: [f64; 2]) -> Point<3> {
        let cq = u[1].cos();
        let k = 1.0 / self.minor + cq / (self.major + self.minor * cq);
        -k * Self::outward_normal(u)
    }
    fn max_principal_curvature(&self) -> f64 {
        (1.0 / self.minor).max(1.0 / (self.major - self.minor))
    }
    fn total_measure(&self) -> f64 {
        4.0 * PI * PI * self.major * self.minor
    }
    fn parameters_of(&self, y: &Point<3>) -> [f64; 2] {
        let v = y - self.center;
        let rho = v[0].hypot(v[1]);
        [v[1].atan2(v[0]), v[2].atan2(rho - self.major)]
    }
    fn quadrature(&self, resolution: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
        let m = self.tube_resolution(resolution);
        let step = (2.0 * PI / resolution as f64) * (2.0 * PI / m as f64);
        let mut params = Vec::with_capacity(resolution * m);
        let mut weights = Vec::with_capacity(resolution * m);
        for phi in periodic_nodes(resolution) {
            for psi in periodic_nodes(m) {
                params.push([phi, psi]);
                weights.push(step * self.minor * (self.major + self.minor * psi.cos()));
            }
        }
        (params, weights)
    }
    fn resolution_for_spacing(&self, spacing: f64) -> usize {
        ceil_resolution(2.0 * PI * (self.major + self.minor), spacing)
    }
    fn extent(&self) -> (Point<3>, Point<3>) {
        let r = self.major + self.minor;
        let e = Point::<3>::new(r, r, self.minor);
        (self.center - e, self.center + e)
    }
}

fn positive(what: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} must be positive, got {value}")))
    }
}

/// Shape description as it appears in configuration files.
#[derive(Clone, Debug, PartialEq)]
pub enum ShapeSpec {
    Circle { center: [f64; 2], radius: f64 },
    Ellipse { center: [f64; 2], a: f64, b: f64 },
    Sphere { center: [f64; 3], radius: f64 },
    Torus { center: [f64; 3], major: f64, minor: f64 },
}

impl ShapeSpec {
    /// Builds a spec from a shape name and named numeric parameters.
    ///
    /// Centers are given as `cx`, `cy` (and `cz`), defaulting to the origin.
    pub fn from_record(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |key: &str| -> Result<f64> {
            params
                .get(key)
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("{name}: missing parameter '{key}'")))
        };
        let opt = |key: &str| params.get(key).copied().unwrap_or(0.0);
        let allowed: &[&str] = match name {
            "circle" => &["cx", "cy", "radius"],
            "ellipse" => &["cx", "cy", "a", "b"],
            "sphere" => &["cx", "cy", "cz", "radius"],
            "torus" => &["cx", "cy", "cz", "major", "minor"],
            other => return Err(Error::InvalidArgument(format!("unknown shape '{other}'"))),
        };
        if let Some(key) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidArgument(format!("{name}: unknown parameter '{key}'")));
        }
        let spec = match name {
            "circle" => ShapeSpec::Circle {
                center: [opt("cx"), opt("cy")],
                radius: get("radius")?,
            },
            "ellipse" => ShapeSpec::Ellipse {
                center: [opt("cx"), opt("cy")],
                a: get("a")?,
                b: get("b")?,
            },
            "sphere" => ShapeSpec::Sphere {
                center: [opt("cx"), opt("cy"), opt("cz")],
                radius: get("radius")?,
            },
            _ => ShapeSpec::Torus {
                center: [opt("cx"), opt("cy"), opt("cz")],
                major: get("major")?,
                minor: get("minor")?,
            },
        };
        spec.build()?;
        Ok(spec)
    }

    pub fn build(&self) -> Result<AnyShape> {
        Ok(match *self {
            ShapeSpec::Circle { center, radius } => {
                AnyShape::Planar(Arc::new(Circle::new(center.into(), radius)?))
            }
            ShapeSpec::Ellipse { center, a, b } => {
                AnyShape::Planar(Arc::new(Ellipse::new(center.into(), a, b)?))
            }
            ShapeSpec::Sphere { center, radius } => {
                AnyShape::Spatial(Arc::new(Sphere::new(center.into(), radius)?))
            }
            ShapeSpec::Torus { center, major, minor } => {
                AnyShape::Spatial(Arc::new(Torus::new(center.into(), major, minor)?))
            }
        })
    }
}

/// A shape in the plane or in space.
#[derive(Clone, Debug)]
pub enum AnyShape {
    Planar(Arc<dyn AnalyticShape<2>>),
    Spatial(Arc<dyn AnalyticShape<3>>),
}

impl AnyShape {
    pub fn ambient_dim(&self) -> usize {
        match self {
            AnyShape::Planar(_) => 2,
            AnyShape::Spatial(_) => 3,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            AnyShape::Planar(s) => s.dim(),
            AnyShape::Spatial(s) => s.dim(),
        }
    }

    pub fn total_measure(&self) -> f64 {
        match self {
            AnyShape::Planar(s) => s.total_measure(),
            AnyShape::Spatial(s) => s.total_measure(),
        }
    }

    pub fn max_principal_curvature(&self) -> f64 {
        match self {
            AnyShape::Planar(s) => s.max_principal_curvature(),
            AnyShape::Spatial(s) => s.max_principal_curvature(),
        }
    }

    /// Bounding box as plain coordinate vectors.
    pub fn extent(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            AnyShape::Planar(s) => {
                let (l, u) = s.extent();
                (l.iter().copied().collect(), u.iter().copied().collect())
            }
            AnyShape::Spatial(s) => {
                let (l, u) = s.extent();
                (l.iter().copied().collect(), u.iter().copied().collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipse_perimeter_matches_fine_trapezoid() {
        let e = Ellipse::new(Point::<2>::zeros(), 2.0, 0.5).unwrap();
        let (_, w) = e.quadrature(20000);
        let s: f64 = w.iter().sum();
        assert!((s - e.total_measure()).abs() < 1e-12 * s);
        let circle = Ellipse::new(Point::<2>::zeros(), 1.5, 1.5).unwrap();
        assert!((circle.total_measure() - 3.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn ellipse_curvature_at_vertices() {
        let e = Ellipse::new(Point::<2>::zeros(), 2.0, 1.0).unwrap();
        // curvature a/b^2 at (a, 0), b/a^2 at (0, b)
        let h = e.exact_mean_curvature(&Point::<2>::new(2.0, 0.0)).unwrap();
        assert!((h - Point::<2>::new(-2.0, 0.0)).norm() < 1e-14);
        let h = e.exact_mean_curvature(&Point::<2>::new(0.0, 1.0)).unwrap();
        assert!((h - Point::<2>::new(0.0, -0.25)).norm() < 1e-14);
    }

    #[test]
    fn off_shape_point_is_rejected() {
        let c = Circle::unit();
        assert!(matches!(
            c.exact_mean_curvature(&Point::<2>::new(1.0 + 1e-6, 0.0)),
            Err(Error::NotOnShape { .. })
        ));
        assert!(c.exact_mean_curvature(&Point::<2>::new(1.0 + 1e-10, 0.0)).is_ok());
    }

    #[test]
    fn torus_parameters_invert_position() {
        let t = Torus::new(Point::<3>::new(0.1, -0.2, 0.3), 1.0, 0.3).unwrap();
        for u in [[0.3, 2.0], [-1.0, -2.5], [3.0, 0.1]] {
            let back = t.parameters_of(&t.position(u));
            assert!((t.position(back) - t.position(u)).norm() < 1e-14);
        }
    }

    #[test]
    fn spec_from_record() {
        let mut p = BTreeMap::new();
        p.insert("radius".to_string(), 2.0);
        let s = ShapeSpec::from_record("sphere", &p).unwrap();
        assert_eq!(s, ShapeSpec::Sphere { center: [0.0; 3], radius: 2.0 });
        p.insert("bogus".to_string(), 1.0);
        assert!(ShapeSpec::from_record("sphere", &p).is_err());
        assert!(ShapeSpec::from_record("cube", &BTreeMap::new()).is_err());
    }
}
