//! DANSE nodes and the asynchronous network simulation.
//!
//! Each node compresses its microphones into one fused signal with the
//! local part `w_kk` of its filter and broadcasts it. In the asynchronous
//! modes every local sample produces one fused sample through the
//! distortion-function taps, so peers receive a sample stream on the
//! sender's clock; the synchronous mode broadcasts WOLA-synthesized frames.

mod distortion;
mod network;
mod node;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::mwf::DEFAULT_LOADING;
use crate::scene::Processing;

pub use distortion::{distortion_taps, fused_sample, window_correlation, DistortionFilter};
pub use network::{run_network, NetworkRun, SroTraceRow};
pub use node::{danse_filter_update, fuse_frame, NodeState};

/// Processing mode of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// All microphones stacked in one GEVD-MWF, no clock offsets.
    Centralized,
    /// DANSE with frame broadcasts and perfectly synchronized clocks.
    SyncDanse,
    /// Per-sample broadcasts over skewed clocks, no correction.
    AsyncUncompensated,
    /// SRO estimation and phase compensation, FSDs ignored.
    AsyncSro,
    /// SRO estimation, FSD detection and compensation of both.
    AsyncSroFsd,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::Centralized, Mode::SyncDanse, Mode::AsyncUncompensated, Mode::AsyncSro, Mode::AsyncSroFsd];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Centralized => "centralized",
            Mode::SyncDanse => "sync-danse",
            Mode::AsyncUncompensated => "async-uncompensated",
            Mode::AsyncSro => "async-sro",
            Mode::AsyncSroFsd => "async-sro-fsd",
        }
    }

    /// Runs on the skewed node clocks.
    pub fn is_async(self) -> bool {
        matches!(self, Mode::AsyncUncompensated | Mode::AsyncSro | Mode::AsyncSroFsd)
    }

    pub fn estimates_sro(self) -> bool {
        matches!(self, Mode::AsyncSro | Mode::AsyncSroFsd)
    }

    pub fn uses_fsd(self) -> bool {
        self == Mode::AsyncSroFsd
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown mode '{s}'")))
    }
}

/// Parameters of the network simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct DanseOptions {
    pub frame_len: usize,
    pub beta: f64,
    pub loading: f64,
    pub update_period: usize,
    pub sro_lag: usize,
    pub sro_alpha: f64,
    pub search_half_width_ppm: f64,
}

impl DanseOptions {
    pub fn from_processing(p: &Processing) -> Self {
        Self {
            frame_len: p.frame_len,
            beta: p.beta,
            loading: DEFAULT_LOADING,
            update_period: p.update_period,
            sro_lag: p.sro_lag,
            sro_alpha: p.sro_alpha,
            search_half_width_ppm: p.search_half_width_ppm,
        }
    }
}

impl Default for DanseOptions {
    fn default() -> Self {
        Self::from_processing(&Processing::default())
    }
}
