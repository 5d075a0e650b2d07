use std::io::Write;
use std::path::Path;

use clap::Args;
use serde::Serialize;
use serde_json::json;
use swipeauth::eval::{
    export_pca_gmm, run_direction_ablation, run_table1, run_table2, table_csv, user_rankings, EvalReport,
};
use swipeauth::ingest::{read_accel_events, read_touch_events, write_dataset};
use swipeauth::segment::{segment_swipes_with, SegmentConfig};
use swipeauth::{
    attach_motion, generate_synthetic, load_dataset, run_protocol, stream_windows, train_user_model,
    Context, FeatureTable, Normalizer, Protocol, SynthConfig, UserModel,
};

use crate::config::RunConfig;
use crate::manifest::{create_dir, Manifest};
use crate::Failure;

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    pub users: usize,
    /// Swipes per session; the preset value applies when omitted.
    #[arg(long)]
    pub swipes: Option<usize>,
    /// Spread of users relative to their own variation.
    #[arg(long)]
    pub separation: Option<f64>,
    /// Gait-driven noise while walking.
    #[arg(long)]
    pub walk_noise: Option<f64>,
    /// Start from the high-separation preset instead of the default one.
    #[arg(long)]
    pub separable: bool,
}

pub fn synth(cfg: &RunConfig, a: &SynthArgs) -> Result<(), Failure> {
    let out = cfg.out_dir()?;
    let mut sc = if a.separable {
        SynthConfig::separable(a.users, cfg.seed)
    } else {
        SynthConfig {
            n_users: a.users,
            rng_seed: cfg.seed,
            ..SynthConfig::default()
        }
    };
    sc.contexts = cfg.contexts.clone();
    if let Some(v) = a.swipes {
        sc.swipes_per_session = v;
    }
    if let Some(v) = a.separation {
        sc.user_separation = v;
    }
    if let Some(v) = a.walk_noise {
        sc.walk_noise = v;
    }
    let ds = generate_synthetic(&sc)?;
    let m = Manifest::new("synth", cfg, json!({ "synth": sc }));
    write_dataset(out, &ds)?;
    m.write(out)
}

pub fn dump_catalog(csv: bool) -> Result<(), Failure> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let text = if csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["index", "name", "group", "channel"]).map_err(Failure::data)?;
        for f in swipeauth::catalog() {
            let group = serde_json::to_value(f.group).map_err(Failure::data)?;
            let channel = serde_json::to_value(f.channel).map_err(Failure::data)?;
            w.write_record([
                f.index.to_string(),
                f.name.clone(),
                group.as_str().unwrap_or_default().to_string(),
                channel.as_str().unwrap_or_default().to_string(),
            ])
            .map_err(Failure::data)?;
        }
        String::from_utf8(w.into_inner().map_err(Failure::data)?).map_err(Failure::data)?
    } else {
        serde_json::to_string_pretty(swipeauth::catalog()).map_err(Failure::data)? + "\n"
    };
    lock.write_all(text.as_bytes()).map_err(Failure::data)
}

pub fn segment(cfg: &RunConfig, touch: &Path, accel: Option<&Path>, max_gap_ms: i64) -> Result<(), Failure> {
    let map = cfg.column_map()?;
    let events = read_touch_events(touch, &map)?;
    let mut swipes = segment_swipes_with(&events, &SegmentConfig { max_gap_ms });
    if let Some(p) = accel {
        swipes = attach_motion(swipes, &read_accel_events(p, &map)?);
    }
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    for s in &swipes {
        let line = serde_json::to_string(s).map_err(Failure::data)?;
        writeln!(lock, "{line}").map_err(Failure::data)?;
    }
    Ok(())
}

fn load_table(cfg: &RunConfig) -> Result<FeatureTable, Failure> {
    let ds = load_dataset(cfg.data_dir()?, &cfg.column_map()?)?;
    if ds.users.is_empty() {
        return Err(Failure::data("dataset has no users"));
    }
    Ok(FeatureTable::from_dataset(&ds, &SegmentConfig::default()))
}

fn start<'a>(cfg: &'a RunConfig, command: &str, args: serde_json::Value) -> Result<(&'a Path, Manifest), Failure> {
    let out = cfg.out_dir()?;
    let m = Manifest::new(command, cfg, args);
    create_dir(out)?;
    m.write(out)?;
    Ok((out, m))
}

fn csv_text(rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).map_err(Failure::data)?;
    }
    String::from_utf8(w.into_inner().map_err(Failure::data)?).map_err(Failure::data)
}

pub fn extract(cfg: &RunConfig) -> Result<(), Failure> {
    let table = load_table(cfg)?;
    let (out, m) = start(cfg, "extract", json!({}))?;
    let mut header: Vec<String> = ["user", "context", "session_index", "swipe", "direction"]
        .map(String::from)
        .to_vec();
    header.extend(swipeauth::catalog().iter().map(|f| f.name.clone()));
    let mut rows = vec![header];
    for u in &table.users {
        for s in u.sessions.iter().filter(|s| cfg.contexts.contains(&s.id.context)) {
            for (i, (r, d)) in s.rows.iter().zip(&s.directions).enumerate() {
                let mut row = vec![
                    u.user.clone(),
                    s.id.context.to_string(),
                    s.id.session_index.to_string(),
                    i.to_string(),
                    format!("{d:?}").to_lowercase(),
                ];
                row.extend(r.iter().map(|v| v.to_string()));
                rows.push(row);
            }
        }
    }
    m.write_csv(&out.join("features.csv"), &csv_text(rows)?)
}

/// Protocol training on every configured context; the test context only
/// matters to evaluation.
fn training_protocol(cfg: &RunConfig) -> Protocol {
    Protocol::new(cfg.contexts.clone(), cfg.contexts[0], cfg.feature_set, cfg.settings())
}

pub fn rank(cfg: &RunConfig) -> Result<(), Failure> {
    let table = load_table(cfg)?;
    let (out, m) = start(cfg, "rank", json!({}))?;
    let mut rows = vec![["user", "rank", "feature", "score"].map(String::from).to_vec()];
    for (user, ranked) in user_rankings(&table, &training_protocol(cfg))? {
        for (i, f) in ranked.0.iter().enumerate() {
            rows.push(vec![user.clone(), (i + 1).to_string(), f.name.clone(), f.score.to_string()]);
        }
    }
    m.write_csv(&out.join("rank.csv"), &csv_text(rows)?)
}

pub fn train(cfg: &RunConfig, user: &str, percentile: f64) -> Result<(), Failure> {
    let table = load_table(cfg)?;
    let (out, m) = start(cfg, "train", json!({ "user": user, "percentile": percentile }))?;
    let model = train_user_model(&table, &training_protocol(cfg), user, percentile)?;
    m.write_json(&out.join(format!("model_{user}.json")), &model)
}

pub fn score(cfg: &RunConfig, model_path: &Path, user: &str, context: Option<Context>) -> Result<(), Failure> {
    let raw = std::fs::read_to_string(model_path).map_err(|e| Failure::data(format!("{}: {e}", model_path.display())))?;
    let model = UserModel::from_json(&raw)?;
    let table = load_table(cfg)?;
    let contexts = context.map(|c| vec![c]).unwrap_or_else(|| model.contexts.clone());
    let args = json!({ "model": model_path, "user": user, "contexts": contexts });
    let (out, m) = start(cfg, "score", args)?;
    let u = table
        .users
        .iter()
        .find(|u| u.user == user)
        .ok_or_else(|| Failure::data(format!("unknown user {user}")))?;
    let mut rows = vec![["context", "session_index", "window", "statistic", "verdict"].map(String::from).to_vec()];
    for s in u
        .sessions
        .iter()
        .filter(|s| contexts.contains(&s.id.context) && cfg.test_sessions.contains(&s.id.session_index))
    {
        let scores: Vec<f64> = s.rows.iter().map(|r| model.score_raw(r)).collect();
        if scores.is_empty() {
            continue;
        }
        for (i, w) in stream_windows(&scores, model.window, model.smallest)?.iter().enumerate() {
            let d = model.decide_window(&w.values)?;
            rows.push(vec![
                s.id.context.to_string(),
                s.id.session_index.to_string(),
                i.to_string(),
                d.statistic.to_string(),
                format!("{:?}", d.verdict).to_lowercase(),
            ]);
        }
    }
    m.write_csv(&out.join("scores.csv"), &csv_text(rows)?)
}

pub fn eval(cfg: &RunConfig, test: Context, workers: usize) -> Result<(), Failure> {
    let table = load_table(cfg)?;
    let (out, m) = start(cfg, "eval", json!({ "test": test }))?;
    let p = Protocol::new(cfg.contexts.clone(), test, cfg.feature_set, cfg.settings());
    let report = run_protocol(&table, &p, workers)?;
    m.write_json(&out.join("eval.json"), &report)
}

pub fn table(cfg: &RunConfig, name: &str, workers: usize) -> Result<(), Failure> {
    let table = load_table(cfg)?;
    let (out, m) = start(cfg, &format!("experiment {name}"), json!({}))?;
    let reports = match name {
        "table1" => run_table1(&table, &cfg.settings(), workers)?,
        _ => run_table2(&table, &cfg.settings(), workers)?,
    };
    write_reports(&m, out, name, &reports)
}

fn write_reports(m: &Manifest, out: &Path, name: &str, reports: &[EvalReport]) -> Result<(), Failure> {
    m.write_json(&out.join(format!("{name}.json")), &json!({ "reports": reports }))?;
    m.write_csv(&out.join(format!("{name}.csv")), &table_csv(reports))
}

pub fn ablation(cfg: &RunConfig, workers: usize) -> Result<(), Failure> {
    let table = load_table(cfg)?;
    let (out, m) = start(cfg, "experiment ablation", json!({}))?;
    let (all, vertical) = run_direction_ablation(&table, &cfg.settings(), workers)?;
    let rows = [("all", &all), ("vertical", &vertical)]
        .into_iter()
        .map(|(label, r)| vec![label.to_string(), format!("{:.6}", r.mean_eer), format!("{:.6}", r.std_eer)]);
    let csv = csv_text(std::iter::once(["swipes", "eer", "std"].map(String::from).to_vec()).chain(rows))?;
    m.write_json(&out.join("ablation.json"), &json!({ "all": all, "vertical": vertical }))?;
    m.write_csv(&out.join("ablation.csv"), &csv)
}

pub fn viz_pca(cfg: &RunConfig) -> Result<(), Failure> {
    let table = load_table(cfg)?;
    let (out, m) = start(cfg, "viz pca", json!({}))?;
    let columns: Vec<usize> = cfg.feature_set.columns().collect();
    let mut rows = Vec::new();
    let mut groups = Vec::new();
    for u in &table.users {
        for s in u.sessions.iter().filter(|s| {
            cfg.contexts.contains(&s.id.context) && cfg.train_sessions.contains(&s.id.session_index)
        }) {
            for r in &s.rows {
                rows.push(columns.iter().map(|&c| r[c]).collect::<Vec<f64>>());
                groups.push(u.user.clone());
            }
        }
    }
    let norm = Normalizer::fit(&rows)?;
    let export = export_pca_gmm(&norm.apply(&rows), &groups, cfg.k, cfg.seed, &Default::default())?;
    m.write_json(&out.join("pca.json"), &json!({ "groups": export }))
}
