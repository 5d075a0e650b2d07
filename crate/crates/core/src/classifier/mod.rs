//! One-class ensemble built from 2-D Gaussian mixtures.
//!
//! Each pair of consecutive top-ranked features gets its own mixture,
//! fitted on the genuine user's normalized training swipes only. A swipe is
//! scored by projecting it onto every pair, taking the distance to the
//! nearest centroid of that pair's mixture and summing over pairs. The
//! decision on a sequence of swipes uses the mean of the few smallest sums
//! in a sliding window.

pub mod gmm;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::ranking::{Normalizer, RankedFeatures};
use crate::types::Context;

pub use gmm::{fit_gmm, fit_gmm_traced, EmSettings, Gmm2D, GmmFit, Point2};

pub const MODEL_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_K: usize = 3;
pub const MAX_K: usize = 8;
pub const DEFAULT_WINDOW: usize = 25;
pub const DEFAULT_SMALLEST: usize = 4;

/// How a pair-classifier turns centroid distances into `d_i`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    /// Distance to the nearest centroid.
    #[default]
    Min,
    /// Sum of distances to every centroid.
    SumAll,
}

/// Fits one mixture per feature pair. `genuine` rows are indexed by catalog
/// feature id; pair `i` is seeded with `seed + i`.
pub fn train_ensemble(
    genuine: &[Vec<f64>],
    pairs: &[(usize, usize)],
    k: usize,
    seed: u64,
    em: &EmSettings,
) -> Result<Vec<Gmm2D>> {
    if genuine.is_empty() {
        return Err(Error::TooFewPoints { needed: k.max(1), got: 0 });
    }
    pairs
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let pts: Vec<Point2> = genuine.iter().map(|r| [r[a], r[b]]).collect();
            fit_gmm(&pts, k, seed.wrapping_add(i as u64), em)
        })
        .collect()
}

/// Sum over pair-classifiers of the distance from the projected swipe to
/// that classifier's centroids. `v` must already be normalized.
pub fn distance_sum(gmms: &[Gmm2D], pairs: &[(usize, usize)], v: &[f64], mode: DistanceMode) -> f64 {
    gmms.iter()
        .zip(pairs)
        .map(|(g, &(a, b))| {
            let p = [v[a], v[b]];
            match mode {
                DistanceMode::Min => g.min_distance(&p),
                DistanceMode::SumAll => g.total_distance(&p),
            }
        })
        .sum()
}

/// Nearest-rank percentile: `sorted(D)[ceil(i/100 * n) - 1]` for
/// `i` in [50, 100].
pub fn calibrate_threshold(distances: &[f64], percentile: f64) -> Result<f64> {
    if distances.is_empty() {
        return Err(Error::EmptyScores);
    }
    if !(50.0..=100.0).contains(&percentile) {
        return Err(Error::InvalidPercentile(percentile));
    }
    let mut s = distances.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let rank = ((percentile * n as f64) / 100.0).ceil() as usize;
    Ok(s[rank.clamp(1, n) - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Genuine,
    Anomaly,
}

/// A run of consecutive per-swipe distance sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreWindow {
    pub values: Vec<f64>,
    /// Mean of the `m` smallest values.
    pub statistic: f64,
}

impl ScoreWindow {
    pub fn new(values: Vec<f64>, smallest: usize) -> Self {
        let statistic = window_statistic(&values, smallest);
        ScoreWindow { values, statistic }
    }
}

/// Mean of the `min(m, |c|)` smallest values.
pub fn window_statistic(c: &[f64], m: usize) -> f64 {
    let mut s = c.to_vec();
    s.sort_by(f64::total_cmp);
    if s.is_empty() {
        return 0.0;
    }
    let take = m.clamp(1, s.len());
    s[..take].iter().sum::<f64>() / take as f64
}

/// Stride-1 windows of length `w`; a single shorter window when fewer than
/// `w` scores exist.
pub fn stream_windows(scores: &[f64], w: usize, smallest: usize) -> Result<Vec<ScoreWindow>> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    let w = w.max(1);
    if scores.len() < w {
        return Ok(vec![ScoreWindow::new(scores.to_vec(), smallest)]);
    }
    Ok(scores
        .windows(w)
        .map(|c| ScoreWindow::new(c.to_vec(), smallest))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowDecision {
    pub verdict: Verdict,
    pub statistic: f64,
}

/// Trained per-user artifact. Persisted as versioned JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserModel {
    pub schema_version: u32,
    pub user: String,
    pub contexts: Vec<Context>,
    pub feature_set: FeatureSet,
    pub normalizer: Normalizer,
    /// Top-ranked features with their scores, best first.
    pub ranked: RankedFeatures,
    pub pairs: Vec<(usize, usize)>,
    pub gmms: Vec<Gmm2D>,
    pub threshold: f64,
    pub percentile_i: f64,
    pub k: usize,
    pub seed: u64,
    pub em: EmSettings,
    pub distance: DistanceMode,
    pub window: usize,
    pub smallest: usize,
}

impl UserModel {
    /// Distance sum `D` of a normalized feature vector.
    pub fn score_swipe(&self, normalized: &[f64]) -> f64 {
        distance_sum(&self.gmms, &self.pairs, normalized, self.distance)
    }

    /// Normalizes a raw 211-value vector with the stored bounds, then scores it.
    pub fn score_raw(&self, raw: &[f64]) -> f64 {
        self.score_swipe(&self.normalizer.apply_row(raw))
    }

    pub fn decide_window(&self, c: &[f64]) -> Result<WindowDecision> {
        decide_window(self.threshold, c, self.smallest)
    }

    pub fn set_threshold(&mut self, training_distances: &[f64], percentile: f64) -> Result<()> {
        self.threshold = calibrate_threshold(training_distances, percentile)?;
        self.percentile_i = percentile;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: UserModel = serde_json::from_str(s)?;
        if m.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: m.schema_version,
                expected: MODEL_SCHEMA_VERSION,
            });
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

/// Genuine iff the window statistic does not exceed the threshold.
pub fn decide_window(threshold: f64, c: &[f64], smallest: usize) -> Result<WindowDecision> {
    if c.is_empty() {
        return Err(Error::EmptyScores);
    }
    let statistic = window_statistic(c, smallest);
    let verdict = if statistic <= threshold {
        Verdict::Genuine
    } else {
        Verdict::Anomaly
    };
    Ok(WindowDecision { verdict, statistic })
}
