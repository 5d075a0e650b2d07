//! Continuous authentication from swipe gestures.
//!
//! Touchscreen and accelerometer streams are cut into swipes, each swipe
//! becomes a fixed 211-value feature vector, and a per-user one-class
//! ensemble of 2-D Gaussian mixtures decides whether a run of swipes came
//! from the enrolled user.
//!
//! ```
//! use swipeauth::{segment_swipes, TouchAction, TouchSample};
//!
//! let swipe: Vec<TouchSample> = (0..8)
//!     .map(|i| TouchSample {
//!         t: 16 * i,
//!         x: 500.0,
//!         y: 1200.0 - 40.0 * i as f64,
//!         pressure: 0.4,
//!         action: match i {
//!             0 => TouchAction::Down,
//!             7 => TouchAction::Up,
//!             _ => TouchAction::Move,
//!         },
//!     })
//!     .collect();
//! assert_eq!(segment_swipes(&swipe).len(), 1);
//! ```

pub mod classifier;
pub mod error;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod ranking;
pub mod segment;
pub mod stats;
pub mod types;

pub use classifier::{
    calibrate_threshold, decide_window, distance_sum, fit_gmm, stream_windows, train_ensemble,
    window_statistic, DistanceMode, EmSettings, Gmm2D, UserModel, Verdict,
};
pub use error::{Error, Result};
pub use eval::{compute_eer, run_protocol, train_user_model, EvalReport, FeatureTable, Protocol, RunSettings};
pub use features::{catalog, extract, FeatureId, FeatureSet, FeatureVector, N_FEATURES, N_MOTION, N_TOUCH};
pub use ingest::{generate_synthetic, load_dataset, ColumnMap, Dataset, SynthConfig};
pub use ranking::{rank_features, select_pairs, Normalizer, RankedFeatures, TrainingSplit};
pub use segment::{attach_motion, filter_direction, segment_swipes, DirectionClass, Swipe};
pub use types::{AccelSample, Context, SessionId, TouchAction, TouchSample};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
