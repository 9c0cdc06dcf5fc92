//! Metrics, reports and the experiment runner.

mod metrics;
mod report;
mod runner;

pub use metrics::{
    gcc_phat_lag, oracle_distance, peer_on_local_clock, residual_drift, segmental_snr, to_node_clock, ORACLE_DISTANCE_FLOOR_DB,
    SEG_SNR_CEIL_DB, SEG_SNR_FLOOR_DB,
};
pub use report::{sro_trace_csv, write_wav, FsdEvents, MetricsReport, ModeMetrics, NodeMetrics, PairTrace, RunMeta, TracePoint};
pub use runner::{run_experiment, Experiment, ExperimentOptions, SEG_FRAME_S};
