use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bounds, Point2};
use crate::scalar::Scalar;
use crate::spatial::mean_nearest_neighbor_spacing;

/// Planar working-space points, optionally with a per-point intensity.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PointCloud2D<T> {
    pub points: Vec<Point2<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity: Option<Vec<T>>,
}

impl<T: Scalar> PointCloud2D<T> {
    pub fn new(points: Vec<Point2<T>>) -> Self {
        Self {
            points,
            intensity: None,
        }
    }

    pub fn with_intensity(points: Vec<Point2<T>>, intensity: Vec<T>) -> Result<Self> {
        if intensity.len() != points.len() {
            return Err(Error::InvalidArgument(format!(
                "{} intensities for {} points",
                intensity.len(),
                points.len()
            )));
        }
        Ok(Self {
            points,
            intensity: Some(intensity),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bounds(&self) -> Option<(Point2<T>, Point2<T>)> {
        bounds(&self.points)
    }

    pub fn mean_spacing(&self) -> Option<T> {
        mean_nearest_neighbor_spacing(&self.points)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.points.iter().position(|p| !p.is_finite()) {
            return Err(Error::DegenerateInput(format!("point {i} is not finite")));
        }
        Ok(())
    }
}
