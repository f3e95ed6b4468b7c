//! Uniform bucket grid for nearest-neighbor and radius queries.

use crate::geometry::{bounds, Point2};
use crate::scalar::Scalar;

pub struct GridIndex<'a, T: Scalar> {
    points: &'a [Point2<T>],
    origin: Point2<T>,
    cell: T,
    cols: usize,
    rows: usize,
    /// Bucket start offsets into `order`, length cols * rows + 1.
    starts: Vec<usize>,
    order: Vec<usize>,
}

impl<'a, T: Scalar> GridIndex<'a, T> {
    /// Builds an index with roughly two points per cell.
    pub fn new(points: &'a [Point2<T>]) -> Self {
        let (lo, hi) = bounds(points).unwrap_or_default();
        let w = (hi.x - lo.x).max(T::eps_len());
        let h = (hi.y - lo.y).max(T::eps_len());
        let n = T::from_count(points.len().max(1));
        let cell = (w * h * T::lit(2.0) / n).sqrt().max(T::eps_len());
        Self::with_cell(points, cell)
    }

    pub fn with_cell(points: &'a [Point2<T>], cell: T) -> Self {
        let (lo, hi) = bounds(points).unwrap_or_default();
        let dim = |span: T| ((span / cell).floor().to_usize().unwrap_or(0) + 1).min(1 << 16);
        let cols = dim(hi.x - lo.x);
        let rows = dim(hi.y - lo.y);
        let mut counts = vec![0usize; cols * rows + 1];
        let key = |p: &Point2<T>| {
            let cx = ((p.x - lo.x) / cell).floor().to_usize().unwrap_or(0).min(cols - 1);
            let cy = ((p.y - lo.y) / cell).floor().to_usize().unwrap_or(0).min(rows - 1);
            cy * cols + cx
        };
        for p in points {
            counts[key(p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut order = vec![0usize; points.len()];
        for (i, p) in points.iter().enumerate() {
            let k = key(p);
            order[fill[k]] = i;
            fill[k] += 1;
        }
        Self {
            points,
            origin: lo,
            cell,
            cols,
            rows,
            starts,
            order,
        }
    }

    fn cell_of(&self, p: Point2<T>) -> (i64, i64) {
        let cx = ((p.x - self.origin.x) / self.cell).floor().to_i64().unwrap_or(0);
        let cy = ((p.y - self.origin.y) / self.cell).floor().to_i64().unwrap_or(0);
        (cx, cy)
    }

    fn bucket(&self, cx: i64, cy: i64) -> &[usize] {
        if cx < 0 || cy < 0 || cx >= self.cols as i64 || cy >= self.rows as i64 {
            return &[];
        }
        let k = cy as usize * self.cols + cx as usize;
        &self.order[self.starts[k]..self.starts[k + 1]]
    }

    /// Nearest indexed point to `q`, skipping index `skip`. Ties resolve to
    /// the lowest index.
    pub fn nearest(&self, q: Point2<T>, skip: Option<usize>) -> Option<(usize, T)> {
        let (qx, qy) = self.cell_of(q);
        let mut best: Option<(usize, T)> = None;
        let max_ring = self.cols.max(self.rows) as i64 + 1;
        for ring in 0..=max_ring {
            for (cx, cy) in ring_cells(qx, qy, ring) {
                for &i in self.bucket(cx, cy) {
                    if Some(i) == skip {
                        continue;
                    }
                    let d = q.dist_sq(self.points[i]);
                    let better = match best {
                        None => true,
                        Some((bi, bd)) => d < bd || (d == bd && i < bi),
                    };
                    if better {
                        best = Some((i, d));
                    }
                }
            }
            // Every point in rings beyond this one is at least `ring * cell` away.
            if let Some((_, bd)) = best {
                let reach = self.cell * T::from_count(ring as usize);
                if reach * reach >= bd {
                    break;
                }
            }
        }
        best.map(|(i, d)| (i, d.sqrt()))
    }

    /// Indices of points within distance `r` of `q`, ascending.
    pub fn within(&self, q: Point2<T>, r: T) -> Vec<usize> {
        let (lo_x, lo_y) = self.cell_of(q - Point2::new(r, r));
        let (hi_x, hi_y) = self.cell_of(q + Point2::new(r, r));
        let r_sq = r * r;
        let mut out = Vec::new();
        for cy in lo_y.max(0)..=hi_y.min(self.rows as i64 - 1) {
            for cx in lo_x.max(0)..=hi_x.min(self.cols as i64 - 1) {
                out.extend(
                    self.bucket(cx, cy)
                        .iter()
                        .copied()
                        .filter(|&i| q.dist_sq(self.points[i]) <= r_sq),
                );
            }
        }
        out.sort_unstable();
        out
    }
}

fn ring_cells(cx: i64, cy: i64, ring: i64) -> Vec<(i64, i64)> {
    if ring == 0 {
        return vec![(cx, cy)];
    }
    let mut cells = Vec::with_capacity(8 * ring as usize);
    for dx in -ring..=ring {
        cells.push((cx + dx, cy - ring));
        cells.push((cx + dx, cy + ring));
    }
    for dy in (-ring + 1)..ring {
        cells.push((cx - ring, cy + dy));
        cells.push((cx + ring, cy + dy));
    }
    cells
}

/// Mean distance from each point to its nearest other point.
pub fn mean_nearest_neighbor_spacing<T: Scalar>(points: &[Point2<T>]) -> Option<T> {
    if points.len() < 2 {
        return None;
    }
    let grid = GridIndex::new(points);
    let total: T = (0..points.len())
        .map(|i| grid.nearest(points[i], Some(i)).map_or(T::zero(), |(_, d)| d))
        .sum();
    Some(total / T::from_count(points.len()))
}
