use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use swipeauth::classifier::{DEFAULT_K, DEFAULT_SMALLEST, DEFAULT_WINDOW};
use swipeauth::ranking::DEFAULT_TOP_K;
use swipeauth::{ColumnMap, Context, FeatureSet, RunSettings};

use crate::Failure;

/// Settings shared by every subcommand. Loaded from `--config`, then
/// overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub map: Option<PathBuf>,
    pub seed: u64,
    pub k: usize,
    pub top_k: usize,
    pub window: usize,
    pub m: usize,
    pub feature_set: FeatureSet,
    pub contexts: Vec<Context>,
    pub train_sessions: Vec<u8>,
    pub test_sessions: Vec<u8>,
    /// Not part of the manifest: where outputs go does not change them.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = RunSettings::default();
        RunConfig {
            data: None,
            map: None,
            seed: 0,
            k: DEFAULT_K,
            top_k: DEFAULT_TOP_K,
            window: DEFAULT_WINDOW,
            m: DEFAULT_SMALLEST,
            feature_set: FeatureSet::Fusion,
            contexts: Context::ALL.to_vec(),
            train_sessions: s.train_sessions,
            test_sessions: s.test_sessions,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON file with RunConfig keys; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Dataset root (labels.csv plus per-session directories).
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Column-map JSON for the dataset's CSV layout.
    #[arg(long, global = true)]
    pub map: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Mixture components per pair-classifier.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true)]
    pub top_k: Option<usize>,
    /// Swipes per decision window.
    #[arg(long, global = true)]
    pub window: Option<usize>,
    /// Smallest scores averaged per window.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true)]
    pub feature_set: Option<FeatureSet>,
    /// Comma-separated context codes, e.g. S1,S3.
    #[arg(long, global = true, value_delimiter = ',')]
    pub contexts: Option<Vec<Context>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub train_sessions: Option<Vec<u8>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub test_sessions: Option<Vec<u8>>,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

impl Common {
    pub fn resolve(&self) -> Result<RunConfig, Failure> {
        let mut c = match &self.config {
            Some(p) => {
                let s = std::fs::read_to_string(p).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&s).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = &self.$f { c.$f = v.clone().into(); })*};
        }
        set!(data, map, out, seed, k, top_k, window, m, feature_set, contexts, train_sessions, test_sessions);
        c.contexts.sort();
        c.contexts.dedup();
        if c.contexts.is_empty() {
            return Err(Failure::usage("at least one context is required"));
        }
        Ok(c)
    }
}

impl RunConfig {
    pub fn settings(&self) -> RunSettings {
        RunSettings {
            train_sessions: self.train_sessions.clone(),
            test_sessions: self.test_sessions.clone(),
            window: self.window,
            smallest: self.m,
            k: self.k,
            top_k: self.top_k,
            seed: self.seed,
            ..RunSettings::default()
        }
    }

    pub fn column_map(&self) -> Result<ColumnMap, Failure> {
        match &self.map {
            Some(p) => ColumnMap::load(p).map_err(Failure::data),
            None => Ok(ColumnMap::default()),
        }
    }

    pub fn data_dir(&self) -> Result<&Path, Failure> {
        self.data.as_deref().ok_or_else(|| Failure::usage("--data is required"))
    }

    pub fn out_dir(&self) -> Result<&Path, Failure> {
        self.out.as_deref().ok_or_else(|| Failure::usage("--out is required"))
    }
}
