//! Grassmannian planes and analytic closed submanifolds.

mod plane;
mod sample;
mod shapes;

pub use plane::{projector_distance, Plane};
pub use sample::WeightedSample;
pub use shapes::{
    sample_surface, AnalyticShape, AnyShape, Circle, Ellipse, ShapeSpec, Sphere, Torus,
    ON_SHAPE_TOLERANCE,
};
