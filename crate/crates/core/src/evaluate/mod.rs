//! 1-NN classification protocol and the ARI / OA / AA / FS / κ metrics.

mod metrics;
mod protocol;

pub use metrics::{ari, ari_detail, fscore_kappa, oa_aa, ConfusionMatrix};
pub use protocol::{
    knn1_classify, run_protocol, run_protocol_points, stratified_split, EvaluationReport,
    RunMetrics, SplitScheme, METRIC_NAMES,
};
