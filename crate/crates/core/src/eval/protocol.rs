use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{compute_eer, nearest_percentile, EvalReport, Skipped, UserResult};
use crate::classifier::{
    distance_sum, stream_windows, train_ensemble, DistanceMode, EmSettings, Gmm2D, UserModel,
    DEFAULT_K, DEFAULT_SMALLEST, DEFAULT_WINDOW, MODEL_SCHEMA_VERSION,
};
use crate::error::{Error, Result};
use crate::features::{extract, FeatureSet};
use crate::ingest::Dataset;
use crate::ranking::{rank_features, select_pairs, Normalizer, RankedFeatures, TrainingSplit, DEFAULT_TOP_K};
use crate::segment::{attach_motion, segment_swipes_with, DirectionClass, SegmentConfig};
use crate::types::{Context, SessionId};

/// Feature rows of one session, in swipe order.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionFeatures {
    pub id: SessionId,
    pub rows: Vec<Vec<f64>>,
    pub directions: Vec<DirectionClass>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserFeatures {
    pub user: String,
    pub sessions: Vec<SessionFeatures>,
}

/// Raw 211-value feature vectors for every swipe of a dataset.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub users: Vec<UserFeatures>,
}

impl FeatureTable {
    pub fn from_dataset(ds: &Dataset, seg: &SegmentConfig) -> Self {
        let users = ds
            .users
            .iter()
            .map(|u| UserFeatures {
                user: u.id.clone(),
                sessions: u
                    .sessions
                    .par_iter()
                    .map(|s| {
                        let swipes = attach_motion(segment_swipes_with(&s.touch, seg), &s.accel);
                        SessionFeatures {
                            id: s.id.clone(),
                            directions: swipes.iter().map(|w| w.direction()).collect(),
                            rows: swipes.iter().map(|w| extract(w).0).collect(),
                        }
                    })
                    .collect(),
            })
            .collect();
        FeatureTable { users }
    }

    pub fn contexts(&self) -> Vec<Context> {
        let mut c: Vec<Context> = self
            .users
            .iter()
            .flat_map(|u| u.sessions.iter().map(|s| s.id.context))
            .collect();
        c.sort();
        c.dedup();
        c
    }
}

/// Knobs shared by every protocol of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub train_sessions: Vec<u8>,
    pub test_sessions: Vec<u8>,
    pub window: usize,
    pub smallest: usize,
    pub k: usize,
    pub top_k: usize,
    pub seed: u64,
    pub em: EmSettings,
    pub distance: DistanceMode,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            train_sessions: vec![1, 2],
            test_sessions: vec![3, 4],
            window: DEFAULT_WINDOW,
            smallest: DEFAULT_SMALLEST,
            k: DEFAULT_K,
            top_k: DEFAULT_TOP_K,
            seed: 0,
            em: EmSettings::default(),
            distance: DistanceMode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub train_contexts: Vec<Context>,
    pub test_context: Context,
    pub feature_set: FeatureSet,
    /// Keep only swipes of this direction, in training and testing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<DirectionClass>,
    #[serde(flatten)]
    pub settings: RunSettings,
}

impl Protocol {
    pub fn new(
        train_contexts: Vec<Context>,
        test_context: Context,
        feature_set: FeatureSet,
        settings: RunSettings,
    ) -> Self {
        let mut train_contexts = train_contexts;
        train_contexts.sort();
        train_contexts.dedup();
        Protocol {
            train_contexts,
            test_context,
            feature_set,
            direction: None,
            settings,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.settings;
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.train_contexts.is_empty() {
            return bad("no training context".into());
        }
        if s.train_sessions.is_empty() || s.test_sessions.is_empty() {
            return bad("train and test session lists must be non-empty".into());
        }
        if s.train_sessions.iter().any(|i| s.test_sessions.contains(i)) {
            return bad("train and test sessions overlap".into());
        }
        if s.k == 0 || s.k > crate::classifier::MAX_K {
            return bad(format!("k must lie in 1..={}", crate::classifier::MAX_K));
        }
        if s.top_k < 2 {
            return bad("top_k must be at least 2".into());
        }
        if s.window == 0 || s.smallest == 0 {
            return bad("window and m must be positive".into());
        }
        Ok(())
    }

    fn is_train(&self, id: &SessionId) -> bool {
        self.train_contexts.contains(&id.context) && self.settings.train_sessions.contains(&id.session_index)
    }

    fn is_test(&self, id: &SessionId) -> bool {
        id.context == self.test_context && self.settings.test_sessions.contains(&id.session_index)
    }

    fn rows<'a>(&'a self, s: &'a SessionFeatures) -> impl Iterator<Item = &'a Vec<f64>> + 'a {
        s.rows
            .iter()
            .zip(&s.directions)
            .filter(move |(_, d)| self.direction.is_none_or(|keep| **d == keep))
            .map(|(r, _)| r)
    }
}

/// Normalized rows of one user under a protocol.
struct Prepared {
    train: Vec<Vec<f64>>,
    test_sessions: Vec<Vec<Vec<f64>>>,
}

fn prepare(table: &FeatureTable, p: &Protocol) -> Result<(Normalizer, Vec<Prepared>)> {
    let pool: Vec<&Vec<f64>> = table
        .users
        .iter()
        .flat_map(|u| u.sessions.iter())
        .filter(|s| p.is_train(&s.id))
        .flat_map(|s| p.rows(s))
        .collect();
    let normalizer = Normalizer::fit(&pool)?;
    let prepared = table
        .users
        .iter()
        .map(|u| Prepared {
            train: u
                .sessions
                .iter()
                .filter(|s| p.is_train(&s.id))
                .flat_map(|s| p.rows(s))
                .map(|r| normalizer.apply_row(r))
                .collect(),
            test_sessions: u
                .sessions
                .iter()
                .filter(|s| p.is_test(&s.id))
                .map(|s| p.rows(s).map(|r| normalizer.apply_row(r)).collect::<Vec<_>>())
                .filter(|rows: &Vec<Vec<f64>>| !rows.is_empty())
                .collect(),
        })
        .collect();
    Ok((normalizer, prepared))
}

enum Outcome {
    Done(UserResult),
    Skip(Skipped),
}

fn evaluate_user(p: &Protocol, users: &[Prepared], names: &[String], u: usize) -> Result<Outcome> {
    let s = &p.settings;
    let me = &users[u];
    let skip = |reason: String| {
        Ok(Outcome::Skip(Skipped {
            user: names[u].clone(),
            reason,
        }))
    };
    if me.train.len() < s.k {
        return skip(format!("{} training swipes, need {}", me.train.len(), s.k));
    }
    if me.test_sessions.is_empty() {
        return skip("no test swipes".into());
    }
    let impostor_train = impostor_pool(users, u);
    if impostor_train.is_empty() {
        return skip("no impostor training swipes".into());
    }

    let fit = fit_user(p, &me.train, &impostor_train, u)?;
    let (pairs, gmms) = (&fit.pairs, &fit.gmms);
    let score = |row: &Vec<f64>| distance_sum(gmms, pairs, row, s.distance);

    let windows = |sessions: &[Vec<Vec<f64>>]| -> Result<Vec<f64>> {
        let mut stats = Vec::new();
        for rows in sessions {
            let scores: Vec<f64> = rows.iter().map(score).collect();
            stats.extend(stream_windows(&scores, s.window, s.smallest)?.into_iter().map(|w| w.statistic));
        }
        Ok(stats)
    };
    let genuine = windows(&me.test_sessions)?;
    let mut impostor = Vec::new();
    for (j, other) in users.iter().enumerate() {
        if j != u {
            impostor.extend(windows(&other.test_sessions)?);
        }
    }
    if impostor.is_empty() {
        return skip("no impostor test swipes".into());
    }
    let eer = compute_eer(&genuine, &impostor)?;
    let d_g: Vec<f64> = me.train.iter().map(score).collect();
    Ok(Outcome::Done(UserResult {
        user: names[u].clone(),
        eer: eer.eer,
        threshold: eer.threshold,
        percentile_i: nearest_percentile(&d_g, eer.threshold)?,
        n_genuine_windows: genuine.len(),
        n_impostor_windows: impostor.len(),
    }))
}

struct Fitted {
    ranked: RankedFeatures,
    pairs: Vec<(usize, usize)>,
    gmms: Vec<Gmm2D>,
    seed: u64,
}

fn rank_columns(p: &Protocol, genuine: &[Vec<f64>], impostor: &[Vec<f64>]) -> Result<RankedFeatures> {
    let columns: Vec<usize> = p.feature_set.columns().collect();
    let restrict = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
        rows.iter().map(|r| columns.iter().map(|&c| r[c]).collect()).collect()
    };
    rank_features(&TrainingSplit {
        columns: columns.clone(),
        genuine: restrict(genuine),
        impostor: restrict(impostor),
    })
}

fn impostor_pool(users: &[Prepared], u: usize) -> Vec<Vec<f64>> {
    users
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != u)
        .flat_map(|(_, o)| o.train.iter().cloned())
        .collect()
}

/// Ranks the protocol's columns for user `u` and fits the pair ensemble.
fn fit_user(p: &Protocol, genuine: &[Vec<f64>], impostor: &[Vec<f64>], u: usize) -> Result<Fitted> {
    let s = &p.settings;
    let ranked = rank_columns(p, genuine, impostor)?;
    let pairs = select_pairs(&ranked, s.top_k)?;
    let seed = s.seed.wrapping_add((u as u64) << 20);
    let gmms = train_ensemble(genuine, &pairs, s.k, seed, &s.em)?;
    Ok(Fitted {
        ranked: ranked.top(s.top_k),
        pairs,
        gmms,
        seed,
    })
}

/// Trains a deployable model for `user` on the protocol's training sessions.
/// The normalizer and the impostor pool come from every user of the table,
/// exactly as in [`run_protocol`], and the threshold is the `percentile`-th
/// nearest-rank percentile of the user's training distances.
pub fn train_user_model(table: &FeatureTable, p: &Protocol, user: &str, percentile: f64) -> Result<UserModel> {
    p.validate()?;
    let available = table.contexts();
    if let Some(c) = p.train_contexts.iter().find(|c| !available.contains(c)) {
        return Err(Error::MissingContext(*c));
    }
    let u = table
        .users
        .iter()
        .position(|x| x.user == user)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown user {user}")))?;
    let (normalizer, users) = prepare(table, p)?;
    let me = &users[u].train;
    let s = &p.settings;
    if me.len() < s.k {
        return Err(Error::TooFewPoints { needed: s.k, got: me.len() });
    }
    let fit = fit_user(p, me, &impostor_pool(&users, u), u)?;
    let mut model = UserModel {
        schema_version: MODEL_SCHEMA_VERSION,
        user: user.to_string(),
        contexts: p.train_contexts.clone(),
        feature_set: p.feature_set,
        normalizer,
        ranked: fit.ranked,
        pairs: fit.pairs,
        gmms: fit.gmms,
        threshold: 0.0,
        percentile_i: percentile,
        k: s.k,
        seed: fit.seed,
        em: s.em,
        distance: s.distance,
        window: s.window,
        smallest: s.smallest,
    };
    let d_g: Vec<f64> = me.iter().map(|r| model.score_swipe(r)).collect();
    model.set_threshold(&d_g, percentile)?;
    Ok(model)
}

/// Full feature ranking of every user with training swipes, in table order.
pub fn user_rankings(table: &FeatureTable, p: &Protocol) -> Result<Vec<(String, RankedFeatures)>> {
    p.validate()?;
    let (_, users) = prepare(table, p)?;
    let mut out = Vec::new();
    for (u, prepared) in users.iter().enumerate() {
        let impostor = impostor_pool(&users, u);
        if prepared.train.is_empty() || impostor.is_empty() {
            log::warn!("no ranking for {}: empty training pool", table.users[u].user);
            continue;
        }
        out.push((table.users[u].user.clone(), rank_columns(p, &prepared.train, &impostor)?));
    }
    Ok(out)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))
}

/// Trains and tests one model per user. `workers` of 0 uses every core;
/// the report does not depend on it.
pub fn run_protocol(table: &FeatureTable, p: &Protocol, workers: usize) -> Result<EvalReport> {
    pool(workers)?.install(|| run_in_pool(table, p))
}

fn run_in_pool(table: &FeatureTable, p: &Protocol) -> Result<EvalReport> {
    p.validate()?;
    let available = table.contexts();
    for c in p.train_contexts.iter().chain([&p.test_context]) {
        if !available.contains(c) {
            return Err(Error::MissingContext(*c));
        }
    }
    let (_, users) = prepare(table, p)?;
    let names: Vec<String> = table.users.iter().map(|u| u.user.clone()).collect();
    let outcomes: Vec<Result<Outcome>> = (0..users.len())
        .into_par_iter()
        .map(|u| evaluate_user(p, &users, &names, u))
        .collect();
    let mut per_user = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o? {
            Outcome::Done(r) => per_user.push(r),
            Outcome::Skip(s) => {
                log::warn!("skipping {}: {}", s.user, s.reason);
                skipped.push(s)
            }
        }
    }
    Ok(EvalReport::new(p.clone(), per_user, skipped))
}

fn require_all(table: &FeatureTable) -> Result<()> {
    let have = table.contexts();
    match Context::ALL.iter().find(|c| !have.contains(c)) {
        Some(c) => Err(Error::MissingContext(*c)),
        None => Ok(()),
    }
}

/// Context-specific and general models for each scenario: 8 rows of
/// 3 feature sets, ordered scenario, then regime, then feature set.
pub fn run_table1(table: &FeatureTable, settings: &RunSettings, workers: usize) -> Result<Vec<EvalReport>> {
    require_all(table)?;
    let pool = pool(workers)?;
    let mut out = Vec::with_capacity(24);
    for ctx in Context::ALL {
        for train in [vec![ctx], Context::ALL.to_vec()] {
            for fs in FeatureSet::ALL {
                let p = Protocol::new(train.clone(), ctx, fs, settings.clone());
                out.push(pool.install(|| run_in_pool(table, &p))?);
            }
        }
    }
    Ok(out)
}

/// Cross-scenario (train, test) pairs: same activity with the other task,
/// then same task with the other activity.
pub const TABLE2_PAIRS: [(Context, Context); 8] = {
    use Context::*;
    [
        (S1ReadSit, S2ReadWalk),
        (S2ReadWalk, S1ReadSit),
        (S3MapSit, S4MapWalk),
        (S4MapWalk, S3MapSit),
        (S1ReadSit, S3MapSit),
        (S3MapSit, S1ReadSit),
        (S2ReadWalk, S4MapWalk),
        (S4MapWalk, S2ReadWalk),
    ]
};

pub fn run_table2(table: &FeatureTable, settings: &RunSettings, workers: usize) -> Result<Vec<EvalReport>> {
    require_all(table)?;
    let pool = pool(workers)?;
    let mut out = Vec::with_capacity(24);
    for (train, test) in TABLE2_PAIRS {
        for fs in FeatureSet::ALL {
            let p = Protocol::new(vec![train], test, fs, settings.clone());
            out.push(pool.install(|| run_in_pool(table, &p))?);
        }
    }
    Ok(out)
}

/// S3 touch-only models on all swipes, then on vertical swipes only.
pub fn run_direction_ablation(
    table: &FeatureTable,
    settings: &RunSettings,
    workers: usize,
) -> Result<(EvalReport, EvalReport)> {
    let s3 = Context::S3MapSit;
    if !table.contexts().contains(&s3) {
        return Err(Error::MissingContext(s3));
    }
    let all = Protocol::new(vec![s3], s3, FeatureSet::Touch, settings.clone());
    let mut vertical = all.clone();
    vertical.direction = Some(DirectionClass::Vertical);
    Ok((run_protocol(table, &all, workers)?, run_protocol(table, &vertical, workers)?))
}

fn train_label(p: &Protocol) -> String {
    if p.train_contexts.len() == Context::ALL.len() {
        "S1-S4".to_string()
    } else {
        p.train_contexts.iter().map(|c| c.code()).collect::<Vec<_>>().join("+")
    }
}

/// One line per (train, test) combination with a mean and std column per
/// feature set, in the order the reports first mention them.
pub fn table_csv(reports: &[EvalReport]) -> String {
    type Row = (String, String, [Option<(f64, f64)>; 3]);
    let mut rows: Vec<Row> = Vec::new();
    for r in reports {
        let key = (train_label(&r.protocol), r.protocol.test_context.code().to_string());
        let pos = match rows.iter().position(|(a, b, _)| (a, b) == (&key.0, &key.1)) {
            Some(p) => p,
            None => {
                rows.push((key.0, key.1, [None; 3]));
                rows.len() - 1
            }
        };
        let fi = FeatureSet::ALL.iter().position(|f| *f == r.protocol.feature_set).unwrap();
        rows[pos].2[fi] = Some((r.mean_eer, r.std_eer));
    }
    let mut out = String::from("train,test,touch_eer,touch_std,motion_eer,motion_std,fusion_eer,fusion_std\n");
    for (train, test, cells) in rows {
        out.push_str(&format!("{train},{test}"));
        for c in cells {
            match c {
                Some((m, s)) => out.push_str(&format!(",{m:.6},{s:.6}")),
                None => out.push_str(",,"),
            }
        }
        out.push('\n');
    }
    out
}
