//! Full-covariance Gaussian mixture fitted by expectation maximization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud2D;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::scalar::Scalar;

/// Symmetric 2x2 covariance in m^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Cov2<T> {
    pub xx: T,
    pub xy: T,
    pub yy: T,
}

impl<T: Scalar> Cov2<T> {
    pub fn det(&self) -> T {
        self.xx * self.yy - self.xy * self.xy
    }

    /// Eigenvalues, larger first.
    pub fn eigenvalues(&self) -> (T, T) {
        let half_trace = (self.xx + self.yy) * T::lit(0.5);
        let disc = ((self.xx - self.yy) * T::lit(0.5)).hypot(self.xy);
        (half_trace + disc, half_trace - disc)
    }

    /// Lifts the spectrum so the smaller eigenvalue is at least `floor`.
    fn clamped(mut self, floor: T) -> Self {
        let (_, low) = self.eigenvalues();
        if !(low >= floor) {
            let lift = floor - if low.is_finite() { low } else { T::zero() };
            self.xx = self.xx + lift;
            self.yy = self.yy + lift;
        }
        self
    }

    /// Log density of N(mean, self) at `p`.
    fn log_pdf(&self, mean: Point2<T>, p: Point2<T>) -> T {
        let det = self.det();
        let d = p - mean;
        let maha = (self.yy * d.x * d.x - T::lit(2.0) * self.xy * d.x * d.y + self.xx * d.y * d.y) / det;
        -(T::TAU().ln()) - T::lit(0.5) * det.ln() - T::lit(0.5) * maha
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GmmModel<T> {
    pub weights: Vec<T>,
    pub means: Vec<Point2<T>>,
    pub covariances: Vec<Cov2<T>>,
}

impl<T: Scalar> GmmModel<T> {
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    /// Per-point responsibilities (row-major `n x k`) and total log-likelihood.
    pub fn responsibilities(&self, points: &[Point2<T>]) -> (Vec<T>, T) {
        let k = self.k();
        let mut resp = vec![T::zero(); points.len() * k];
        let log_w: Vec<T> = self.weights.iter().map(|w| w.ln()).collect();
        let mut ll = T::zero();
        for (i, p) in points.iter().enumerate() {
            let row = &mut resp[i * k..(i + 1) * k];
            let mut peak = T::neg_infinity();
            for j in 0..k {
                row[j] = log_w[j] + self.covariances[j].log_pdf(self.means[j], *p);
                peak = peak.max(row[j]);
            }
            let mut total = T::zero();
            for v in row.iter_mut() {
                *v = (*v - peak).exp();
                total = total + *v;
            }
            for v in row.iter_mut() {
                *v = *v / total;
            }
            ll = ll + peak + total.ln();
        }
        (resp, ll)
    }

    pub fn log_likelihood(&self, points: &[Point2<T>]) -> T {
        self.responsibilities(points).1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmOptions {
    /// Relative log-likelihood improvement that ends the iteration.
    pub tol_ll: f64,
    pub max_iter: usize,
    /// Lower bound on covariance eigenvalues, m^2.
    pub reg_floor: f64,
    /// Re-seeds of components that end up without points.
    pub max_reseeds: usize,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            tol_ll: 1e-6,
            max_iter: 200,
            reg_floor: 1e-8,
            max_reseeds: 8,
        }
    }
}

/// Partition of a cloud into mixture components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ClusterSet<T> {
    /// Cluster id of each input point, in input order.
    pub labels: Vec<usize>,
    /// Member points per cluster id, in input order.
    pub clusters: Vec<Vec<Point2<T>>>,
    pub model: GmmModel<T>,
    pub log_likelihood: T,
}

impl<T: Scalar> ClusterSet<T> {
    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    /// Input indices belonging to cluster `id`.
    pub fn members(&self, id: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == id).collect()
    }
}

/// Log-likelihood after every E-step, and where re-seeds happened.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmTrace<T> {
    pub log_likelihood: Vec<T>,
    /// Indices into `log_likelihood` of the first value after each re-seed.
    pub reseeds: Vec<usize>,
}

/// Fits a `k`-component mixture with default options.
pub fn em_gmm_fit<T: Scalar>(cloud: &PointCloud2D<T>, k: usize, seed: u64) -> Result<ClusterSet<T>> {
    em_gmm_fit_traced(&cloud.points, k, seed, &EmOptions::default()).map(|(c, _)| c)
}

/// Fits a `k`-component mixture and returns the log-likelihood trace.
///
/// Points are processed in lexicographic order, so the result does not
/// depend on input order. Seeding is k-means++ driven by `seed`; the
/// seeded centers become components through one hard-assignment M-step.
pub fn em_gmm_fit_traced<T: Scalar>(
    points: &[Point2<T>],
    k: usize,
    seed: u64,
    opts: &EmOptions,
) -> Result<(ClusterSet<T>, EmTrace<T>)> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if points.len() < k {
        return Err(Error::TooFewPoints {
            needed: k,
            got: points.len(),
        });
    }
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(Error::DegenerateInput(format!("point {i} is not finite")));
    }

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].lex_cmp(&points[b]).then(a.cmp(&b)));
    let sorted: Vec<Point2<T>> = order.iter().map(|&i| points[i]).collect();

    let floor = T::lit(opts.reg_floor);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds = kmeans_pp(&sorted, k, &mut rng);
    let hard = hard_assign(&sorted, &seeds, k);
    let mut model = m_step(&sorted, &hard, k, floor);

    let mut trace = EmTrace {
        log_likelihood: Vec::new(),
        reseeds: Vec::new(),
    };
    let mut reseeds_left = opts.max_reseeds;
    let (resp, ll) = loop {
        let (resp, ll) = run_em(&sorted, &mut model, floor, opts, &mut trace)?;
        let labels = argmax_labels(&resp, k);
        let empty: Vec<usize> = (0..k).filter(|j| !labels.contains(j)).collect();
        if empty.is_empty() || reseeds_left == 0 {
            break (resp, ll);
        }
        reseeds_left -= 1;
        reseed(&sorted, &resp, &mut model, &empty, floor);
        trace.reseeds.push(trace.log_likelihood.len());
    };

    let mut sorted_labels = argmax_labels(&resp, k);
    force_non_empty(&resp, k, &mut sorted_labels);
    let mut labels = vec![0usize; points.len()];
    for (s, &orig) in order.iter().enumerate() {
        labels[orig] = sorted_labels[s];
    }
    let mut clusters = vec![Vec::new(); k];
    for (p, &l) in points.iter().zip(&labels) {
        clusters[l].push(*p);
    }
    Ok((
        ClusterSet {
            labels,
            clusters,
            model,
            log_likelihood: ll,
        },
        trace,
    ))
}

/// Alternates E and M steps until the relative improvement drops below
/// `tol_ll`. Returns responsibilities for the final parameters.
fn run_em<T: Scalar>(
    pts: &[Point2<T>],
    model: &mut GmmModel<T>,
    floor: T,
    opts: &EmOptions,
    trace: &mut EmTrace<T>,
) -> Result<(Vec<T>, T)> {
    let k = model.k();
    let tol = T::lit(opts.tol_ll);
    let mut prev: Option<T> = None;
    let mut iter = 0;
    loop {
        let (resp, ll) = model.responsibilities(pts);
        if !ll.is_finite() {
            return Err(Error::SingularCovariance(
                (0..k).find(|&j| !(model.covariances[j].det() > T::zero())).unwrap_or(0),
            ));
        }
        trace.log_likelihood.push(ll);
        let converged = prev.is_some_and(|p| (ll - p).abs() <= tol * ll.abs().max(T::one()));
        if converged || iter >= opts.max_iter {
            return Ok((resp, ll));
        }
        *model = m_step(pts, &resp, k, floor);
        prev = Some(ll);
        iter += 1;
    }
}

fn kmeans_pp<T: Scalar>(pts: &[Point2<T>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Point2<T>> {
    let n = pts.len();
    let mut centers = vec![pts[rng.random_range(0..n)]];
    let mut d2: Vec<f64> = pts.iter().map(|p| p.dist_sq(centers[0]).as_f64()).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = pts[pick];
        centers.push(c);
        for (d, p) in d2.iter_mut().zip(pts) {
            *d = d.min(p.dist_sq(c).as_f64());
        }
    }
    centers
}

/// One-hot responsibilities from nearest-center assignment.
fn hard_assign<T: Scalar>(pts: &[Point2<T>], centers: &[Point2<T>], k: usize) -> Vec<T> {
    let mut resp = vec![T::zero(); pts.len() * k];
    for (i, p) in pts.iter().enumerate() {
        let best = (0..k)
            .min_by(|&a, &b| {
                p.dist_sq(centers[a])
                    .partial_cmp(&p.dist_sq(centers[b]))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(0);
        resp[i * k + best] = T::one();
    }
    resp
}

/// Maximum-likelihood parameters for the given responsibilities. A component
/// with no mass is parked on the first point until the re-seed pass moves it.
fn m_step<T: Scalar>(pts: &[Point2<T>], resp: &[T], k: usize, floor: T) -> GmmModel<T> {
    let n = T::from_count(pts.len());
    let mut mass = vec![T::zero(); k];
    let mut sums = vec![Point2::new(T::zero(), T::zero()); k];
    for (i, p) in pts.iter().enumerate() {
        for j in 0..k {
            let r = resp[i * k + j];
            mass[j] = mass[j] + r;
            sums[j] = sums[j] + *p * r;
        }
    }
    let tiny = T::min_positive_value().sqrt();
    let means: Vec<Point2<T>> = (0..k)
        .map(|j| {
            if mass[j] > tiny {
                sums[j] * mass[j].recip()
            } else {
                pts[0]
            }
        })
        .collect();
    let mut covs = vec![
        Cov2 {
            xx: T::zero(),
            xy: T::zero(),
            yy: T::zero()
        };
        k
    ];
    for (i, p) in pts.iter().enumerate() {
        for j in 0..k {
            let r = resp[i * k + j];
            let d = *p - means[j];
            covs[j].xx = covs[j].xx + r * d.x * d.x;
            covs[j].xy = covs[j].xy + r * d.x * d.y;
            covs[j].yy = covs[j].yy + r * d.y * d.y;
        }
    }
    let covariances = (0..k)
        .map(|j| {
            let m = if mass[j] > tiny { mass[j] } else { T::one() };
            Cov2 {
                xx: covs[j].xx / m,
                xy: covs[j].xy / m,
                yy: covs[j].yy / m,
            }
            .clamped(floor)
        })
        .collect();
    let mut weights: Vec<T> = mass.iter().map(|&m| (m / n).max(tiny)).collect();
    let total: T = weights.iter().copied().sum();
    for w in &mut weights {
        *w = *w / total;
    }
    GmmModel {
        weights,
        means,
        covariances,
    }
}

fn argmax_labels<T: Scalar>(resp: &[T], k: usize) -> Vec<usize> {
    resp.chunks(k)
        .map(|row| {
            let mut best = 0;
            for j in 1..k {
                if row[j] > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Points ordered by ascending maximum responsibility (least confident first).
fn least_confident<T: Scalar>(resp: &[T], k: usize) -> Vec<usize> {
    let conf: Vec<T> = resp
        .chunks(k)
        .map(|row| row.iter().copied().fold(T::zero(), T::max))
        .collect();
    let mut idx: Vec<usize> = (0..conf.len()).collect();
    idx.sort_by(|&a, &b| {
        conf[a]
            .partial_cmp(&conf[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx
}

/// Moves each empty component onto a distinct least-confident point.
fn reseed<T: Scalar>(pts: &[Point2<T>], resp: &[T], model: &mut GmmModel<T>, empty: &[usize], floor: T) {
    let k = model.k();
    let donors = least_confident(resp, k);
    let shared = {
        let mut c = Cov2 {
            xx: T::zero(),
            xy: T::zero(),
            yy: T::zero(),
        };
        for (j, cov) in model.covariances.iter().enumerate() {
            c.xx = c.xx + model.weights[j] * cov.xx;
            c.xy = c.xy + model.weights[j] * cov.xy;
            c.yy = c.yy + model.weights[j] * cov.yy;
        }
        c.clamped(floor)
    };
    let fresh = T::from_count(pts.len()).recip();
    for (&j, &donor) in empty.iter().zip(&donors) {
        model.means[j] = pts[donor];
        model.covariances[j] = shared;
        model.weights[j] = fresh;
    }
    let total: T = model.weights.iter().copied().sum();
    for w in &mut model.weights {
        *w = *w / total;
    }
}

/// Hands every still-empty label its least-confident point.
fn force_non_empty<T: Scalar>(resp: &[T], k: usize, labels: &mut [usize]) {
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    let donors = least_confident(resp, k);
    let mut donor_iter = donors.into_iter();
    for j in 0..k {
        while counts[j] == 0 {
            let Some(d) = donor_iter.next() else { return };
            if counts[labels[d]] > 1 {
                counts[labels[d]] -= 1;
                labels[d] = j;
                counts[j] += 1;
            }
        }
    }
}
