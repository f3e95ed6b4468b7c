//! Navigation planning for climbing robots on steel-bridge structures.
//!
//! A 2-D point cloud of a bar structure is split into bars and cross areas,
//! turned into a structure graph, covered by an open postman route, and the
//! route is refined into footprint-checked robot paths.

// `!(x > 0)` is how NaN gets rejected along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod cloud;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod pipeline;
pub mod planner;
pub mod scalar;
pub mod segmentation;
pub mod spatial;
pub mod synth;
pub mod vocpp;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Point2F64 = geometry::Point2<f64>;
pub type Point2F32 = geometry::Point2<f32>;
pub type Polygon2F64 = geometry::Polygon2<f64>;
pub type Polygon2F32 = geometry::Polygon2<f32>;
pub type PointCloudF64 = cloud::PointCloud2D<f64>;
pub type BoundaryF64 = boundary::Boundary<f64>;
pub type StructureGraphF64 = graph::StructureGraph<f64>;
pub type InspectionRouteF64 = vocpp::InspectionRoute<f64>;
pub type RobotConfigF64 = planner::RobotConfig<f64>;
