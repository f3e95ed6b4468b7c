//! Bar / cross-area segmentation: a Gaussian mixture fitted for every
//! candidate cluster count, scored by how strongly one cluster dominates
//! the neighbor graph of the estimated boundaries.

mod gmm;
mod neighbors;

pub use gmm::{em_gmm_fit, em_gmm_fit_traced, ClusterSet, Cov2, EmOptions, EmTrace, GmmModel};
pub use neighbors::{neighbor_matrix, selection_ratio, selection_ratio_exact, NeighborInfo, NeighborStats};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{estimate_boundary, Boundary};
use crate::cloud::PointCloud2D;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Two concave hulls of adjacent clusters are separated by the empty strip
/// between the clusters plus each hull's inward chords, up to about three
/// point spacings in total.
pub const BORDER_SPACING_FACTOR: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentOptions {
    pub n_min: usize,
    pub n_max: usize,
    /// Minimum shared border length for two clusters to be neighbors, m.
    pub l_b: f64,
    pub sliding_factor: usize,
    pub seed: u64,
    pub em: EmOptions,
    /// Border membership distance, m. Defaults to
    /// `BORDER_SPACING_FACTOR` times the cloud's mean nearest-neighbor spacing.
    pub eps_border: Option<f64>,
}

impl Default for SegmentOptions {
    fn default() -> Self {
        Self {
            n_min: 3,
            n_max: 8,
            l_b: 0.15,
            sliding_factor: crate::boundary::DEFAULT_SLIDING_FACTOR,
            seed: 0,
            em: EmOptions::default(),
            eps_border: None,
        }
    }
}

/// Outcome for one candidate cluster count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CandidateReport<T> {
    pub n_c: usize,
    pub neighbor_counts: Vec<usize>,
    /// `None` when the ratio is undefined (no neighbors at all).
    pub stats: Option<NeighborStats<T>>,
    /// Clusters whose boundary could not be estimated.
    pub failed_clusters: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation<T: Scalar> {
    pub clusters: ClusterSet<T>,
    /// Chosen cluster count.
    pub n_o: usize,
    pub candidates: Vec<CandidateReport<T>>,
    /// Boundaries of the chosen clusters, indexed by cluster id. Clusters
    /// without a boundary are absent.
    pub boundaries: Vec<Boundary<T>>,
    pub neighbors: NeighborInfo<T>,
    pub eps_border: T,
}

struct Candidate<T: Scalar> {
    clusters: ClusterSet<T>,
    boundaries: Vec<Boundary<T>>,
    neighbors: NeighborInfo<T>,
    report: CandidateReport<T>,
}

/// Boundaries for each cluster, skipping degenerate ones.
pub fn cluster_boundaries<T: Scalar>(
    clusters: &[Vec<crate::geometry::Point2<T>>],
    sliding_factor: usize,
) -> (Vec<Boundary<T>>, Vec<usize>) {
    let results: Vec<_> = clusters
        .par_iter()
        .enumerate()
        .map(|(id, pts)| estimate_boundary(id, pts, sliding_factor))
        .collect();
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (id, r) in results.into_iter().enumerate() {
        match r {
            Ok(b) => ok.push(b),
            Err(_) => failed.push(id),
        }
    }
    (ok, failed)
}

/// Neighbor matrix over all `k` cluster ids; clusters without a boundary
/// have no neighbors.
pub fn neighbor_info_by_cluster<T: Scalar>(k: usize, boundaries: &[Boundary<T>], l_b: T, eps: T) -> NeighborInfo<T> {
    let dense = neighbor_matrix(boundaries, l_b, eps);
    let mut info = NeighborInfo {
        matrix: vec![vec![false; k]; k],
        borders: vec![vec![Vec::new(); k]; k],
        lengths: vec![vec![T::zero(); k]; k],
    };
    for (a, ba) in boundaries.iter().enumerate() {
        for (b, bb) in boundaries.iter().enumerate() {
            let (i, j) = (ba.cluster_id, bb.cluster_id);
            info.matrix[i][j] = dense.matrix[a][b];
            info.borders[i][j] = dense.borders[a][b].clone();
            info.lengths[i][j] = dense.lengths[a][b];
        }
    }
    info
}

fn evaluate<T: Scalar>(cloud: &PointCloud2D<T>, k: usize, opts: &SegmentOptions, eps: T) -> Result<Candidate<T>> {
    let (clusters, _) = em_gmm_fit_traced(&cloud.points, k, opts.seed, &opts.em)?;
    let (boundaries, failed) = cluster_boundaries(&clusters.clusters, opts.sliding_factor);
    let neighbors = neighbor_info_by_cluster(k, &boundaries, T::lit(opts.l_b), eps);
    let counts = neighbors.neighbor_counts();
    let stats = NeighborStats::from_counts(&counts).ok();
    Ok(Candidate {
        clusters,
        boundaries,
        neighbors,
        report: CandidateReport {
            n_c: k,
            neighbor_counts: counts,
            stats,
            failed_clusters: failed,
        },
    })
}

/// Selects the cluster count in `[n_min, n_max]` with the highest
/// selection ratio (ties go to the smaller count) and returns its fit.
///
/// Fits are deterministic in `seed`, so the candidate fit for the chosen
/// count is the final segmentation.
pub fn segment_structure<T: Scalar>(cloud: &PointCloud2D<T>, opts: &SegmentOptions) -> Result<Segmentation<T>> {
    if opts.n_min < 2 || opts.n_max < opts.n_min {
        return Err(Error::InvalidArgument(format!(
            "cluster range [{}, {}] must satisfy 2 <= n_min <= n_max",
            opts.n_min, opts.n_max
        )));
    }
    if cloud.len() < opts.n_max {
        return Err(Error::TooFewPoints {
            needed: opts.n_max,
            got: cloud.len(),
        });
    }
    cloud.validate()?;
    let eps = match opts.eps_border {
        Some(e) => T::lit(e),
        None => cloud.mean_spacing().unwrap_or_else(T::eps_len) * T::lit(BORDER_SPACING_FACTOR),
    };

    let candidates: Vec<Candidate<T>> = (opts.n_min..=opts.n_max)
        .into_par_iter()
        .map(|k| evaluate(cloud, k, opts, eps))
        .collect::<Result<_>>()?;

    let mut best: Option<usize> = None;
    for (idx, c) in candidates.iter().enumerate() {
        let Some(stats) = &c.report.stats else { continue };
        let better = match best {
            None => true,
            Some(b) => {
                let incumbent = candidates[b].report.stats.as_ref().expect("scored");
                stats.exact_ratio() > incumbent.exact_ratio()
            }
        };
        if better {
            best = Some(idx);
        }
    }
    let best = best.ok_or(Error::UndefinedRatio)?;
    let reports = candidates.iter().map(|c| c.report.clone()).collect();
    let chosen = candidates.into_iter().nth(best).expect("index in range");
    Ok(Segmentation {
        n_o: chosen.report.n_c,
        clusters: chosen.clusters,
        candidates: reports,
        boundaries: chosen.boundaries,
        neighbors: chosen.neighbors,
        eps_border: eps,
    })
}
