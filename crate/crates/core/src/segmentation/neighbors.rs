use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::boundary::Boundary;
use crate::error::{Error, Result};
use crate::geometry::{point_in_polygon_raycast, polyline_length, Point2, Polygon2};
use crate::scalar::Scalar;

/// Pairwise neighbor relation between cluster boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NeighborInfo<T> {
    /// Symmetric, false on the diagonal.
    pub matrix: Vec<Vec<bool>>,
    /// `borders[i][j]`: vertices of boundary `i` near boundary `j`, in
    /// boundary order. Empty when there is no contact.
    pub borders: Vec<Vec<Vec<Point2<T>>>>,
    /// Polyline length of `borders[i][j]`.
    pub lengths: Vec<Vec<T>>,
}

impl<T: Scalar> NeighborInfo<T> {
    pub fn len(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    pub fn neighbor_counts(&self) -> Vec<usize> {
        self.matrix
            .iter()
            .map(|row| row.iter().filter(|&&b| b).count())
            .collect()
    }

    /// Neighbor pairs `(i, j)` with `i < j`, in row-major order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.matrix[i][j])
            .collect()
    }
}

/// Builds the neighbor matrix.
///
/// The border of `i` towards `j` runs through the vertices of boundary `i`
/// that lie inside polygon `j` or within `eps_border` of its outline, in
/// cyclic boundary order starting after the widest gap. Clusters are
/// neighbors when both directed borders are at least `l_b` long.
pub fn neighbor_matrix<T: Scalar>(boundaries: &[Boundary<T>], l_b: T, eps_border: T) -> NeighborInfo<T> {
    let n = boundaries.len();
    let mut borders = vec![vec![Vec::new(); n]; n];
    let mut lengths = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let border = border_towards(&boundaries[i].polygon, &boundaries[j].polygon, eps_border);
            lengths[i][j] = polyline_length(&border);
            borders[i][j] = border;
        }
    }
    let matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| i != j && lengths[i][j] >= l_b && lengths[j][i] >= l_b)
                .collect()
        })
        .collect();
    NeighborInfo {
        matrix,
        borders,
        lengths,
    }
}

fn border_towards<T: Scalar>(from: &Polygon2<T>, to: &Polygon2<T>, eps: T) -> Vec<Point2<T>> {
    let (lo, hi) = to.bounds();
    let verts = from.vertices();
    let near: Vec<usize> = (0..verts.len())
        .filter(|&i| {
            let p = verts[i];
            if p.x < lo.x - eps || p.x > hi.x + eps || p.y < lo.y - eps || p.y > hi.y + eps {
                return false;
            }
            point_in_polygon_raycast(p, to) || to.distance_to_boundary(p) <= eps
        })
        .collect();
    if near.is_empty() {
        return Vec::new();
    }
    // Rotate so the polyline starts right after the widest index gap.
    let m = verts.len();
    let mut start = 0;
    let mut widest = 0;
    for (pos, &idx) in near.iter().enumerate() {
        let prev = near[(pos + near.len() - 1) % near.len()];
        let gap = (idx + m - prev) % m;
        let gap = if gap == 0 { m } else { gap };
        if gap > widest {
            widest = gap;
            start = pos;
        }
    }
    (0..near.len()).map(|k| verts[near[(start + k) % near.len()]]).collect()
}

/// Neighbor statistics of one candidate cluster count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NeighborStats<T> {
    pub n_c: usize,
    /// Largest neighbor count over clusters.
    pub n_m: usize,
    /// Second largest neighbor count over distinct clusters.
    pub n_s: usize,
    pub r: T,
}

impl<T: Scalar> NeighborStats<T> {
    pub fn from_counts(counts: &[usize]) -> Result<Self> {
        let mut sorted = counts.to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let n_m = sorted.first().copied().unwrap_or(0);
        let n_s = sorted.get(1).copied().unwrap_or(0);
        let n_c = counts.len();
        Ok(Self {
            n_c,
            n_m,
            n_s,
            r: selection_ratio(n_m, n_s, n_c)?,
        })
    }

    pub fn exact_ratio(&self) -> Ratio<u64> {
        selection_ratio_exact(self.n_m, self.n_s, self.n_c).expect("validated at construction")
    }
}

/// `r = n_m / (n_m + n_s) + n_m / n_c` as an exact fraction.
pub fn selection_ratio_exact(n_m: usize, n_s: usize, n_c: usize) -> Result<Ratio<u64>> {
    if n_c == 0 {
        return Err(Error::InvalidArgument("n_c must be >= 1".into()));
    }
    if n_s > n_m {
        return Err(Error::InvalidArgument(format!("n_s ({n_s}) exceeds n_m ({n_m})")));
    }
    if n_m + n_s == 0 {
        return Err(Error::UndefinedRatio);
    }
    let (m, s, c) = (n_m as u64, n_s as u64, n_c as u64);
    Ok(Ratio::new(m, m + s) + Ratio::new(m, c))
}

/// Cluster-count selection ratio `n_m / (n_m + n_s) + n_m / n_c`.
pub fn selection_ratio<T: Scalar>(n_m: usize, n_s: usize, n_c: usize) -> Result<T> {
    selection_ratio_exact(n_m, n_s, n_c)?;
    let (m, s, c) = (T::from_count(n_m), T::from_count(n_s), T::from_count(n_c));
    Ok(m / (m + s) + m / c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::estimate_boundary;

    type P = Point2<f64>;

    fn square(x: f64, y: f64, id: usize) -> Boundary<f64> {
        let pts = [
            P::new(x, y),
            P::new(x + 1.0, y),
            P::new(x + 1.0, y + 1.0),
            P::new(x, y + 1.0),
        ];
        estimate_boundary(id, &pts, 3).unwrap()
    }

    #[test]
    fn shared_side_makes_neighbors() {
        let b = [square(0.0, 0.0, 0), square(1.0, 0.0, 1)];
        let info = neighbor_matrix(&b, 0.5, 1e-3);
        assert!(info.matrix[0][1] && info.matrix[1][0]);
        assert!((info.lengths[0][1] - 1.0).abs() < 1e-12);
        assert_eq!(info.neighbor_counts(), vec![1, 1]);
        assert_eq!(info.pairs(), vec![(0, 1)]);
    }

    #[test]
    fn corner_contact_is_not_neighbors() {
        let b = [square(0.0, 0.0, 0), square(1.0, 1.0, 1)];
        let info = neighbor_matrix(&b, 0.5, 1e-3);
        assert!(!info.matrix[0][1]);
        assert_eq!(info.lengths[0][1], 0.0);
    }

    #[test]
    fn threshold_above_side_length() {
        let b = [square(0.0, 0.0, 0), square(1.0, 0.0, 1)];
        assert!(!neighbor_matrix(&b, 1.5, 1e-3).matrix[0][1]);
    }

    #[test]
    fn matrix_symmetric_with_false_diagonal() {
        let b = [
            square(0.0, 0.0, 0),
            square(1.0, 0.0, 1),
            square(0.0, 1.0, 2),
            square(1.0, 1.0, 3),
            square(5.0, 5.0, 4),
        ];
        let info = neighbor_matrix(&b, 0.5, 1e-3);
        for i in 0..5 {
            assert!(!info.matrix[i][i]);
            for j in 0..5 {
                assert_eq!(info.matrix[i][j], info.matrix[j][i]);
            }
        }
        assert_eq!(info.neighbor_counts(), vec![2, 2, 2, 2, 0]);
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(selection_ratio::<f64>(4, 1, 5).unwrap(), 1.6);
        assert_eq!(selection_ratio::<f64>(2, 2, 4).unwrap(), 1.0);
        assert_eq!(selection_ratio::<f64>(3, 1, 4).unwrap(), 1.5);
        assert_eq!(selection_ratio_exact(4, 1, 5).unwrap(), Ratio::new(8, 5));
        assert!(matches!(selection_ratio::<f64>(0, 0, 3), Err(Error::UndefinedRatio)));
        assert!(selection_ratio::<f64>(1, 2, 3).is_err());
        assert!(selection_ratio::<f64>(1, 0, 0).is_err());
    }

    #[test]
    fn ratio_monotonicity() {
        for c in 1..12usize {
            for m in 1..12usize {
                for s in 0..=m {
                    let r = selection_ratio_exact(m, s, c).unwrap();
                    assert!(selection_ratio_exact(m + 1, s, c).unwrap() > r);
                    if s < m {
                        assert!(selection_ratio_exact(m, s + 1, c).unwrap() < r);
                    }
                    assert!(selection_ratio_exact(m, s, c + 1).unwrap() < r);
                }
            }
        }
    }

    #[test]
    fn stats_from_counts() {
        let s: NeighborStats<f64> = NeighborStats::from_counts(&[1, 4, 1, 1, 1]).unwrap();
        assert_eq!((s.n_c, s.n_m, s.n_s), (5, 4, 1));
        assert_eq!(s.r, 1.6);
        assert!(NeighborStats::<f64>::from_counts(&[0, 0, 0]).is_err());
    }
}
