//! Surrogate regressors for band-gap QoIs.
//!
//! The fitting code in [`poly`], [`forest`] and [`mlp`] works on plain feature matrices.
//! [`model::Surrogate`] adds the feature map, input scaling, target bookkeeping and the
//! versioned JSON format used by the command line.

pub mod forest;
pub mod metrics;
pub mod mlp;
pub mod model;
pub mod poly;
pub mod tune;

pub use forest::{ForestConfig, ForestModel};
pub use metrics::{r2, rmse, Metrics};
pub use mlp::{LossHistory, MlpConfig, MlpModel, OptimizerKind};
pub use model::{FeatureMap, MetricsReport, SplitInfo, Surrogate, SurrogateBody};
pub use poly::PolyModel;
pub use tune::{tune_forest, TuneResult};
