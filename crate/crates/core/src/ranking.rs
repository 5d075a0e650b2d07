//! Min-max normalization, outlier-trimmed means and per-user feature ranking.
//!
//! Each feature `i` is scored by how far the genuine user's trimmed mean
//! sits from the impostors' trimmed mean, relative to the genuine mean:
//!
//! ```text
//! r_i = |m_G(i) - m_I(i)| / max(m_G(i), 1e-6)
//! ```
//!
//! computed on min-max normalized data. The top-ranked features are then
//! chained into consecutive pairs for the ensemble.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::feature_name;
use crate::stats::{mean, percentile_sorted, sorted};

/// Guard for the ranking denominator.
pub const RANK_EPSILON: f64 = 1e-6;

/// Default number of top-ranked features fed to the ensemble.
pub const DEFAULT_TOP_K: usize = 40;

/// Per-column (min, max) bounds of a training pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub bounds: Vec<(f64, f64)>,
}

impl Normalizer {
    /// Learns column bounds from a non-empty pool of equal-length rows.
    pub fn fit<R: AsRef<[f64]>>(pool: &[R]) -> Result<Self> {
        let first = pool.first().ok_or(Error::EmptyPool)?.as_ref();
        let mut bounds: Vec<(f64, f64)> = first.iter().map(|&v| (v, v)).collect();
        for row in &pool[1..] {
            for (b, &v) in bounds.iter_mut().zip(row.as_ref()) {
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
        Ok(Normalizer { bounds })
    }

    pub fn width(&self) -> usize {
        self.bounds.len()
    }

    /// Maps one value of column `col` into [0, 1]; constant columns map to 0.
    pub fn scale(&self, col: usize, v: f64) -> f64 {
        let (lo, hi) = self.bounds[col];
        if hi > lo {
            ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(c, &v)| self.scale(c, v)).collect()
    }

    pub fn apply<R: AsRef<[f64]>>(&self, rows: &[R]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply_row(r.as_ref())).collect()
    }
}

/// Mean after discarding points outside the Tukey fences
/// `[Q1 - 1.5 IQR, Q3 + 1.5 IQR]`; the median if nothing survives.
pub fn trimmed_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let s = sorted(values);
    let q1 = percentile_sorted(&s, 25.0);
    let q3 = percentile_sorted(&s, 75.0);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let kept: Vec<f64> = s.iter().copied().filter(|v| *v >= lo && *v <= hi).collect();
    if kept.is_empty() {
        percentile_sorted(&s, 50.0)
    } else {
        mean(&kept).clamp(s[0], s[s.len() - 1])
    }
}

/// Normalized training rows split by class. `columns` lists the catalog
/// index of each row position.
#[derive(Debug, Clone)]
pub struct TrainingSplit {
    pub columns: Vec<usize>,
    pub genuine: Vec<Vec<f64>>,
    pub impostor: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    /// Catalog index.
    pub id: usize,
    pub name: String,
    pub score: f64,
}

/// Features in descending score order, ties broken by catalog index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeatures(pub Vec<RankedFeature>);

impl RankedFeatures {
    pub fn ids(&self) -> Vec<usize> {
        self.0.iter().map(|f| f.id).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn top(&self, k: usize) -> RankedFeatures {
        RankedFeatures(self.0.iter().take(k).cloned().collect())
    }
}

pub fn ratio_score(genuine_mean: f64, impostor_mean: f64) -> f64 {
    (genuine_mean - impostor_mean).abs() / genuine_mean.max(RANK_EPSILON)
}

pub fn rank_features(split: &TrainingSplit) -> Result<RankedFeatures> {
    if split.genuine.is_empty() || split.impostor.is_empty() {
        return Err(Error::EmptyPool);
    }
    let column = |rows: &[Vec<f64>], c: usize| rows.iter().map(|r| r[c]).collect::<Vec<_>>();
    let mut ranked: Vec<RankedFeature> = split
        .columns
        .iter()
        .enumerate()
        .map(|(c, &id)| {
            let mg = trimmed_mean(&column(&split.genuine, c));
            let mi = trimmed_mean(&column(&split.impostor, c));
            RankedFeature {
                id,
                name: feature_name(id).to_string(),
                score: ratio_score(mg, mi),
            }
        })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.id.cmp(&b.id)));
    Ok(RankedFeatures(ranked))
}

/// Chains the `top_k` best features into `top_k - 1` consecutive pairs.
pub fn select_pairs(ranked: &RankedFeatures, top_k: usize) -> Result<Vec<(usize, usize)>> {
    if ranked.len() < top_k {
        return Err(Error::InsufficientFeatures {
            requested: top_k,
            available: ranked.len(),
        });
    }
    Ok(ranked.0[..top_k].windows(2).map(|w| (w[0].id, w[1].id)).collect())
}
