//! Session reconstruction, interaction metrics and the randomized-pairing
//! signed-rank analysis.

pub mod metrics;
pub mod pairing;
pub mod report;
pub mod session;
pub mod simulate;
pub mod wilcoxon;

pub use metrics::{compute_metrics, Metric, MetricGroup, TaskMetrics};
pub use pairing::{pair_observations, Pairing, PairingOptions};
pub use report::{analyze, significance_stars, AnalysisConfig, AnalysisError, AnalysisReport, MetricSummary};
pub use session::{
    reconstruct_session, sessions_from_events, validate_events, SessionError, SessionSkeleton, TaskOrder, TaskSession,
    DEFAULT_GAP_MERGE,
};
pub use simulate::{relabel_session, simulate, write_sessions, ConditionProfile, SimulateError, SimulationProfile};
pub use wilcoxon::{wilcoxon_signed_rank, wilcoxon_signed_rank_with, PValueMethod, WilcoxonResult, ZeroMethod};
