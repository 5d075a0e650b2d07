//! Equal error rates, experiment protocols and plot-data export.

mod pca;
mod protocol;

pub use pca::{export_pca_gmm, pca_2d, PcaComponent, PcaExport, PcaProjection};
pub use protocol::{
    run_direction_ablation, run_protocol, run_table1, run_table2, table_csv, train_user_model,
    user_rankings, FeatureTable, Protocol, RunSettings, SessionFeatures, UserFeatures, TABLE2_PAIRS,
};

use serde::{Deserialize, Serialize};

use crate::classifier::calibrate_threshold;
use crate::error::{Error, Result};

/// Operating point where false accepts and false rejects balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eer {
    pub eer: f64,
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
}

/// Sweeps thresholds over the sorted union of both score lists. A score is
/// accepted iff it is `<= t`. Returns the `t` minimizing `|FAR - FRR|`,
/// the smallest such `t` on ties, with `eer = (FAR + FRR) / 2`.
///
/// Midpoints between consecutive values give the same rates as the lower
/// value, so only the values themselves are visited.
pub fn compute_eer(genuine: &[f64], impostor: &[f64]) -> Result<Eer> {
    if genuine.is_empty() || impostor.is_empty() {
        return Err(Error::EmptyScores);
    }
    let mut g = genuine.to_vec();
    let mut im = impostor.to_vec();
    g.sort_by(f64::total_cmp);
    im.sort_by(f64::total_cmp);
    let mut candidates: Vec<f64> = g.iter().chain(&im).copied().collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let (ng, ni) = (g.len() as f64, im.len() as f64);
    let mut best: Option<(f64, Eer)> = None;
    for &t in &candidates {
        let accepted_g = g.partition_point(|&v| v <= t);
        let accepted_i = im.partition_point(|&v| v <= t);
        let frr = (g.len() - accepted_g) as f64 / ng;
        let far = accepted_i as f64 / ni;
        let gap = (far - frr).abs();
        if best.as_ref().is_none_or(|(b, _)| gap < *b) {
            best = Some((
                gap,
                Eer {
                    eer: (far + frr) / 2.0,
                    threshold: t,
                    far,
                    frr,
                },
            ));
        }
    }
    Ok(best.expect("candidates are non-empty").1)
}

/// Integer percentile in [50, 100] whose calibrated threshold on `d_g` is
/// nearest `threshold`; the smaller percentile on ties.
pub fn nearest_percentile(d_g: &[f64], threshold: f64) -> Result<f64> {
    let mut best = (f64::INFINITY, 50.0);
    for i in 50..=100 {
        let p = f64::from(i);
        let gap = (calibrate_threshold(d_g, p)? - threshold).abs();
        if gap < best.0 {
            best = (gap, p);
        }
    }
    Ok(best.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserResult {
    pub user: String,
    pub eer: f64,
    pub threshold: f64,
    pub percentile_i: f64,
    pub n_genuine_windows: usize,
    pub n_impostor_windows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub user: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub protocol: Protocol,
    pub per_user: Vec<UserResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<Skipped>,
    pub mean_eer: f64,
    /// Population standard deviation across users.
    pub std_eer: f64,
}

impl EvalReport {
    pub fn new(protocol: Protocol, per_user: Vec<UserResult>, skipped: Vec<Skipped>) -> Self {
        let eers: Vec<f64> = per_user.iter().map(|u| u.eer).collect();
        EvalReport {
            protocol,
            per_user,
            skipped,
            mean_eer: crate::stats::mean(&eers),
            std_eer: crate::stats::std_dev(&eers),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
