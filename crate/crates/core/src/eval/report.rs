use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::danse::{Mode, SroTraceRow};
use crate::dsp::TimeSignal;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeMetrics {
    /// Segmental SNR of the estimate against the clean reference, from the
    /// first metric frame to the end.
    pub output_seg_snr_db: Option<f64>,
    /// Distance to the centralized estimate over the final window; absent
    /// for the centralized mode itself.
    pub oracle_distance_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeMetrics {
    /// One-based node number.
    pub node: usize,
    pub mics: usize,
    pub input_seg_snr_db: Option<f64>,
    pub modes: BTreeMap<Mode, ModeMetrics>,
}

/// Per-pair estimator trace point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePoint {
    pub frame: usize,
    pub time_s: f64,
    pub eps_hat_ppm: f64,
    pub tau_hat_samples: f64,
    pub fsd_event: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairTrace {
    pub mode: Mode,
    /// One-based `"k-q"`: node `k` estimating its offset to peer `q`.
    pub pair: String,
    pub eps_true_ppm: f64,
    pub points: Vec<TracePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FsdEvents {
    pub mode: Mode,
    pub pair: String,
    /// Local times of nonzero events, with their sign.
    pub events: Vec<(f64, i32)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMeta {
    pub seed: u64,
    pub duration_s: f64,
    pub rate_hz: f64,
    pub frame_len: usize,
    pub sro_ppm: Vec<f64>,
    pub modes: Vec<Mode>,
    pub metric_skip_frames: usize,
    pub tail_s: f64,
    /// Linear gains applied to exported WAV files, keyed by file name.
    pub wav_gains: BTreeMap<String, f64>,
}

/// Everything an experiment reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub run_meta: RunMeta,
    pub per_node: Vec<NodeMetrics>,
    pub sro_traces: Vec<PairTrace>,
    pub fsd_events: Vec<FsdEvents>,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.6}"))
}

pub(crate) fn pair_name(k: usize, q: usize) -> String {
    format!("{}-{}", k + 1, q + 1)
}

impl MetricsReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per node and mode.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,mics,mode,input_seg_snr_db,output_seg_snr_db,oracle_distance_db\n");
        for n in &self.per_node {
            for (mode, m) in &n.modes {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    n.node,
                    n.mics,
                    mode,
                    opt(n.input_seg_snr_db),
                    opt(m.output_seg_snr_db),
                    opt(m.oracle_distance_db)
                );
            }
        }
        out
    }

    /// Metrics of one node in one mode.
    pub fn get(&self, node: usize, mode: Mode) -> Option<&ModeMetrics> {
        self.per_node.get(node)?.modes.get(&mode)
    }
}

/// `frame,pair,eps_hat_ppm,tau_hat_samples,fsd_event` for every trace row.
pub fn sro_trace_csv(rows: &[SroTraceRow]) -> String {
    let mut out = String::from("frame,pair,eps_hat_ppm,tau_hat_samples,fsd_event\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6},{}",
            r.frame,
            pair_name(r.node, r.peer),
            r.eps_hat * 1e6,
            r.tau_hat,
            r.fsd_event
        );
    }
    out
}

/// Writes a 32-bit float mono WAV. Signals whose peak exceeds 1 are scaled
/// down to a unit peak; the applied gain is returned.
pub fn write_wav(path: &Path, sig: &TimeSignal) -> Result<f64> {
    let peak = sig.samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let gain = if peak > 1.0 { 1.0 / peak } else { 1.0 };
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: sig.rate_hz.round() as u32,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut w = hound::WavWriter::create(path, spec)?;
    for &x in &sig.samples {
        w.write_sample(((x * gain) as f32).clamp(-1.0, 1.0))?;
    }
    w.finalize()?;
    Ok(gain)
}
