//! Coarse curvature of finite metric spaces.

pub mod balls;
pub mod bounds;
pub mod cat;
pub mod divergence;
pub mod generate;
pub mod hyperbolicity;
pub mod metric;
pub mod rational;
pub mod report;
mod sync;

pub use metric::{GeodesicPath, GeodesicSet, InputFormat, MetricError, MetricSpace, Origin, PointLabel};
pub use rational::Rational;
