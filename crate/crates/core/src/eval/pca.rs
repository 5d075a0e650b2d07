//! Two-component PCA of pooled feature rows and per-group mixture fits,
//! emitted as plot data.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::classifier::gmm::sym_eigen;
use crate::classifier::{fit_gmm, EmSettings, Point2};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaProjection {
    pub mean: Vec<f64>,
    /// Unit loadings of the first two components; the first entry above
    /// noise level of each is positive.
    pub axes: [Vec<f64>; 2],
    /// Sample-covariance eigenvalues (divisor n - 1) of the two components.
    pub eigenvalues: [f64; 2],
    /// Sum of all eigenvalues.
    pub total_variance: f64,
    pub points: Vec<Point2>,
}

/// Mean-centers `rows` and projects them onto the two leading eigenvectors
/// of their sample covariance.
pub fn pca_2d(rows: &[Vec<f64>]) -> Result<PcaProjection> {
    let first = rows.first().ok_or(Error::EmptyPool)?;
    let (n, d) = (rows.len(), first.len());
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidConfig("rows must share a non-zero width".into()));
    }
    if rows.iter().all(|r| r == first) {
        return Err(Error::DegenerateData);
    }
    let mean: Vec<f64> = (0..d).map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / n as f64).collect();
    let centered = DMatrix::from_fn(n, d, |i, j| rows[i][j] - mean[j]);
    let cov = centered.transpose() * &centered / (n.max(2) - 1) as f64;
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let axis = |slot: usize| -> (Vec<f64>, f64) {
        match order.get(slot) {
            Some(&c) => {
                let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
                let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                if let Some(lead) = v.iter().find(|x| x.abs() > 1e-6 * scale) {
                    if *lead < 0.0 {
                        v.iter_mut().for_each(|x| *x = -*x);
                    }
                }
                (v, eig.eigenvalues[c].max(0.0))
            }
            None => (vec![0.0; d], 0.0),
        }
    };
    let (a1, l1) = axis(0);
    let (a2, l2) = axis(1);
    let points = (0..n)
        .map(|i| {
            let row = centered.row(i);
            let dot = |a: &[f64]| row.iter().zip(a).map(|(x, y)| x * y).sum::<f64>();
            [dot(&a1), dot(&a2)]
        })
        .collect();
    Ok(PcaProjection {
        mean,
        axes: [a1, a2],
        eigenvalues: [l1, l2],
        total_variance: eig.eigenvalues.iter().map(|v| v.max(0.0)).sum(),
        points,
    })
}

/// Ellipse parameters of one mixture component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaComponent {
    pub centroid: Point2,
    /// Unit eigen-axes of the component covariance, major axis first.
    pub axes: [Point2; 2],
    /// Standard deviations along `axes`.
    pub lengths: [f64; 2],
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaExport {
    pub group: String,
    pub points: Vec<Point2>,
    pub components: Vec<PcaComponent>,
}

/// Projects the pooled `rows` onto two principal components and fits a
/// `k`-component mixture per group. `groups[i]` labels `rows[i]`; groups
/// are emitted in order of first appearance.
pub fn export_pca_gmm(
    rows: &[Vec<f64>],
    groups: &[String],
    k: usize,
    seed: u64,
    em: &EmSettings,
) -> Result<Vec<PcaExport>> {
    if rows.len() != groups.len() {
        return Err(Error::InvalidConfig("one group label per row is required".into()));
    }
    let proj = pca_2d(rows)?;
    let mut names: Vec<&String> = Vec::new();
    for g in groups {
        if !names.contains(&g) {
            names.push(g);
        }
    }
    names
        .into_iter()
        .enumerate()
        .map(|(gi, name)| {
            let points: Vec<Point2> = proj
                .points
                .iter()
                .zip(groups)
                .filter(|(_, g)| *g == name)
                .map(|(p, _)| *p)
                .collect();
            let gmm = fit_gmm(&points, k, seed.wrapping_add(gi as u64), em)?;
            let components = (0..gmm.k())
                .map(|c| {
                    let (vals, vecs) = sym_eigen(&gmm.covariances[c]);
                    PcaComponent {
                        centroid: gmm.centroids[c],
                        axes: vecs,
                        lengths: [vals[0].max(0.0).sqrt(), vals[1].max(0.0).sqrt()],
                        weight: gmm.weights[c],
                    }
                })
                .collect();
            Ok(PcaExport {
                group: name.clone(),
                points,
                components,
            })
        })
        .collect()
}
