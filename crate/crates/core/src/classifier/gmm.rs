//! Two-dimensional Gaussian mixtures fitted by expectation maximization.
//!
//! Fitting works on the distinct points of the input weighted by their
//! multiplicity, so row order never matters and repeating every row the same
//! number of times leaves the fitted parameters unchanged. Seeding is
//! k-means++ driven by a ChaCha8 stream, so a fixed seed gives a fixed
//! model on every platform.
//!
//! Covariances are kept positive definite with an eigenvalue floor. The
//! floored covariance is the exact maximizer of the M-step objective under
//! that constraint, so the log-likelihood stays monotone across iterations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point2 = [f64; 2];
pub type Cov2 = [[f64; 2]; 2];

/// Stopping and regularization settings for EM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmSettings {
    pub max_iter: usize,
    /// Stop once the relative log-likelihood gain drops below this.
    pub tol: f64,
    /// Smallest allowed covariance eigenvalue.
    pub cov_floor: f64,
}

impl Default for EmSettings {
    fn default() -> Self {
        EmSettings {
            max_iter: 100,
            tol: 1e-6,
            cov_floor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gmm2D {
    pub weights: Vec<f64>,
    pub centroids: Vec<Point2>,
    pub covariances: Vec<Cov2>,
}

/// Eigen-decomposition of a symmetric 2x2 matrix: eigenvalues in
/// descending order and the matching unit eigenvectors.
pub fn sym_eigen(c: &Cov2) -> ([f64; 2], [Point2; 2]) {
    let (a, b, d) = (c[0][0], c[0][1], c[1][1]);
    let half_tr = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let (l1, l2) = (half_tr + disc, half_tr - disc);
    let v1 = if b != 0.0 {
        let (x, y) = (l1 - d, b);
        let n = x.hypot(y);
        [x / n, y / n]
    } else if a >= d {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let v2 = [-v1[1], v1[0]];
    ([l1, l2], [v1, v2])
}

fn floor_cov(c: Cov2, floor: f64) -> Cov2 {
    let (vals, vecs) = sym_eigen(&c);
    if vals[1] >= floor {
        return c;
    }
    let l = [vals[0].max(floor), vals[1].max(floor)];
    let mut out = [[0.0; 2]; 2];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += l[k] * vecs[k][i] * vecs[k][j];
            }
        }
    }
    out
}

fn log_density(p: &Point2, mu: &Point2, cov: &Cov2) -> f64 {
    let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    let (dx, dy) = (p[0] - mu[0], p[1] - mu[1]);
    let q = (cov[1][1] * dx * dx - 2.0 * cov[0][1] * dx * dy + cov[0][0] * dy * dy) / det;
    -std::f64::consts::LN_2 - std::f64::consts::PI.ln() - 0.5 * det.ln() - 0.5 * q
}

fn dist2(a: &Point2, b: &Point2) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Distinct points with multiplicities, in lexicographic order.
fn weighted_unique(points: &[Point2]) -> (Vec<Point2>, Vec<f64>) {
    let mut s = points.to_vec();
    s.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut pts: Vec<Point2> = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    for p in s {
        match pts.last() {
            Some(q) if q[0].to_bits() == p[0].to_bits() && q[1].to_bits() == p[1].to_bits() => {
                *counts.last_mut().unwrap() += 1.0;
            }
            _ => {
                pts.push(p);
                counts.push(1.0);
            }
        }
    }
    (pts, counts)
}

fn sample_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn kmeanspp(pts: &[Point2], counts: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<Point2> {
    let mut centers = vec![pts[sample_index(rng, counts)]];
    let mut d2: Vec<f64> = pts.iter().map(|p| dist2(p, &centers[0])).collect();
    while centers.len() < k {
        let w: Vec<f64> = d2.iter().zip(counts).map(|(d, c)| d * c).collect();
        let next = if w.iter().sum::<f64>() > 0.0 {
            pts[sample_index(rng, &w)]
        } else {
            // every remaining point coincides with a center
            centers[0]
        };
        for (d, p) in d2.iter_mut().zip(pts) {
            *d = d.min(dist2(p, &next));
        }
        centers.push(next);
    }
    centers
}

fn weighted_mean_cov(pts: &[Point2], w: &[f64]) -> (Point2, Cov2) {
    let total: f64 = w.iter().sum();
    let mut mu = [0.0; 2];
    for (p, wi) in pts.iter().zip(w) {
        mu[0] += wi * p[0];
        mu[1] += wi * p[1];
    }
    mu[0] /= total;
    mu[1] /= total;
    let mut c = [[0.0; 2]; 2];
    for (p, wi) in pts.iter().zip(w) {
        let (dx, dy) = (p[0] - mu[0], p[1] - mu[1]);
        c[0][0] += wi * dx * dx;
        c[0][1] += wi * dx * dy;
        c[1][1] += wi * dy * dy;
    }
    c[0][0] /= total;
    c[0][1] /= total;
    c[1][1] /= total;
    c[1][0] = c[0][1];
    (mu, c)
}

fn logsumexp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

struct EStep {
    log_likelihood: f64,
    resp: Vec<Vec<f64>>,
}

impl Gmm2D {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    fn e_step(&self, pts: &[Point2], counts: &[f64]) -> EStep {
        let log_w: Vec<f64> = self.weights.iter().map(|w| w.ln()).collect();
        let mut ll = 0.0;
        let mut resp = Vec::with_capacity(pts.len());
        let mut lp = vec![0.0; self.k()];
        for (p, c) in pts.iter().zip(counts) {
            for j in 0..self.k() {
                lp[j] = log_w[j] + log_density(p, &self.centroids[j], &self.covariances[j]);
            }
            let lse = logsumexp(&lp);
            ll += c * lse;
            resp.push(lp.iter().map(|x| (x - lse).exp()).collect());
        }
        EStep {
            log_likelihood: ll,
            resp,
        }
    }

    fn m_step(&mut self, pts: &[Point2], counts: &[f64], resp: &[Vec<f64>], floor: f64) {
        let n: f64 = counts.iter().sum();
        for j in 0..self.k() {
            let w: Vec<f64> = resp.iter().zip(counts).map(|(r, c)| r[j] * c).collect();
            let nk: f64 = w.iter().sum();
            if nk > 0.0 {
                let (mu, cov) = weighted_mean_cov(pts, &w);
                self.centroids[j] = mu;
                self.covariances[j] = floor_cov(cov, floor);
            }
            // an emptied component keeps its place with zero weight
            self.weights[j] = nk / n;
        }
    }

    /// Total log-likelihood of `points` under the mixture.
    pub fn log_likelihood(&self, points: &[Point2]) -> f64 {
        let ones = vec![1.0; points.len()];
        self.e_step(points, &ones).log_likelihood
    }

    /// Distance from `p` to the nearest centroid.
    pub fn min_distance(&self, p: &Point2) -> f64 {
        self.centroids
            .iter()
            .map(|c| dist2(p, c))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    /// Sum of distances from `p` to every centroid.
    pub fn total_distance(&self, p: &Point2) -> f64 {
        self.centroids.iter().map(|c| dist2(p, c).sqrt()).sum()
    }
}

/// Fitted mixture plus the log-likelihood after every E-step.
#[derive(Debug, Clone)]
pub struct GmmFit {
    pub model: Gmm2D,
    pub log_likelihood_trace: Vec<f64>,
    pub iterations: usize,
}

pub fn fit_gmm(points: &[Point2], k: usize, seed: u64, settings: &EmSettings) -> Result<Gmm2D> {
    fit_gmm_traced(points, k, seed, settings).map(|f| f.model)
}

pub fn fit_gmm_traced(
    points: &[Point2],
    k: usize,
    seed: u64,
    settings: &EmSettings,
) -> Result<GmmFit> {
    if k == 0 {
        return Err(Error::InvalidConfig("mixture needs at least one component".into()));
    }
    if points.len() < k {
        return Err(Error::TooFewPoints {
            needed: k,
            got: points.len(),
        });
    }
    let (pts, counts) = weighted_unique(points);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = kmeanspp(&pts, &counts, k, &mut rng);
    let (_, data_cov) = weighted_mean_cov(&pts, &counts);
    let cov0 = floor_cov(data_cov, settings.cov_floor);

    let mut model = Gmm2D {
        weights: vec![1.0 / k as f64; k],
        centroids: centers,
        covariances: vec![cov0; k],
    };

    let mut e = model.e_step(&pts, &counts);
    let mut trace = vec![e.log_likelihood];
    let mut iterations = 0;
    while iterations < settings.max_iter {
        model.m_step(&pts, &counts, &e.resp, settings.cov_floor);
        iterations += 1;
        let prev = e.log_likelihood;
        e = model.e_step(&pts, &counts);
        trace.push(e.log_likelihood);
        if e.log_likelihood - prev < settings.tol * prev.abs() {
            break;
        }
    }

    Ok(GmmFit {
        model,
        log_likelihood_trace: trace,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn blobs(seed: u64, centers: &[Point2], n: usize, sd: f64) -> Vec<Vec<Point2>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sd).unwrap();
        centers
            .iter()
            .map(|c| {
                (0..n)
                    .map(|_| [c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)])
                    .collect()
            })
            .collect()
    }

    #[test]
    fn single_component_is_sample_moments() {
        let pts = blobs(3, &[[1.0, -2.0]], 200, 0.7).remove(0);
        let g = fit_gmm(&pts, 1, 0, &EmSettings::default()).unwrap();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
        let my = pts.iter().map(|p| p[1]).sum::<f64>() / n;
        assert!((g.centroids[0][0] - mx).abs() < 1e-10);
        assert!((g.centroids[0][1] - my).abs() < 1e-10);
        let cxx = pts.iter().map(|p| (p[0] - mx).powi(2)).sum::<f64>() / n;
        assert!((g.covariances[0][0][0] - cxx).abs() < 1e-10);
        assert_eq!(g.weights, vec![1.0]);
    }

    #[test]
    fn too_few_points() {
        let r = fit_gmm(&[[0.0, 0.0], [1.0, 1.0]], 3, 0, &EmSettings::default());
        assert!(matches!(r, Err(Error::TooFewPoints { needed: 3, got: 2 })));
    }

    #[test]
    fn identical_points_stay_finite() {
        let pts = vec![[0.5, 0.5]; 10];
        let g = fit_gmm(&pts, 3, 1, &EmSettings::default()).unwrap();
        assert!(g.centroids.iter().all(|c| *c == [0.5, 0.5]));
        assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(g.covariances.iter().all(|c| c[0][0] >= 1e-6 - 1e-18));
    }

    #[test]
    fn duplicated_rows_leave_centroids_unchanged() {
        let pts: Vec<Point2> = blobs(9, &[[0.2, 0.3], [0.7, 0.8]], 30, 0.05).concat();
        let doubled: Vec<Point2> = pts.iter().flat_map(|p| [*p, *p]).collect();
        let a = fit_gmm(&pts, 3, 11, &EmSettings::default()).unwrap();
        let b = fit_gmm(&doubled, 3, 11, &EmSettings::default()).unwrap();
        assert_eq!(a.centroids, b.centroids);
        assert_eq!(a.weights, b.weights);
    }

    #[test]
    fn row_order_does_not_matter() {
        let mut pts: Vec<Point2> = blobs(5, &[[0.0, 0.0], [1.0, 0.5]], 25, 0.1).concat();
        let a = fit_gmm(&pts, 2, 4, &EmSettings::default()).unwrap();
        pts.reverse();
        let b = fit_gmm(&pts, 2, 4, &EmSettings::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn floor_applies_to_degenerate_covariance() {
        let c = floor_cov([[1.0, 1.0], [1.0, 1.0]], 1e-6);
        let (vals, _) = sym_eigen(&c);
        assert!(vals[1] >= 1e-6 * (1.0 - 1e-9));
        assert!((vals[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_reconstructs() {
        let c = [[2.0, 0.7], [0.7, 0.5]];
        let (l, v) = sym_eigen(&c);
        for k in 0..2 {
            let av = [c[0][0] * v[k][0] + c[0][1] * v[k][1], c[1][0] * v[k][0] + c[1][1] * v[k][1]];
            assert!((av[0] - l[k] * v[k][0]).abs() < 1e-12);
            assert!((av[1] - l[k] * v[k][1]).abs() < 1e-12);
        }
    }
}
