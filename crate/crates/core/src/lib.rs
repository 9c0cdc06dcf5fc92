//! Distributed speech enhancement in asynchronous wireless acoustic sensor
//! networks.
//!
//! The crate simulates a fully connected network of multi-microphone nodes
//! running WOLA-based GEVD-DANSE. Nodes sample with independent clocks; each
//! node blindly estimates the sampling rate offset (SRO) to every peer from
//! coherence drift, detects full-sample drifts by counting per-sample
//! broadcasts, and compensates both with STFT-domain phase shifts.
//!
//! Layout:
//!
//! - [`dsp`]: windows, DFT, WOLA analysis/synthesis, convolution, resampling.
//! - [`scene`]: room impulse responses, scene rendering, oracle VAD.
//! - [`mwf`]: covariance tracking, GEVD and the rank-1 multichannel Wiener
//!   filter, plus the centralized baseline.
//! - [`danse`]: node state, distortion-function fusion, network event loop.
//! - [`sro`]: coherence-drift SRO estimation, FSD bookkeeping, compensation.
//! - [`eval`]: metrics, reports and the experiment runner.

pub mod danse;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod mwf;
pub mod scene;
pub mod sro;

pub use danse::{run_network, DanseOptions, Mode, NetworkRun};
pub use dsp::{ClockOwner, StftFrame, TimeSignal, WolaConfig};
pub use error::{Error, Result};
pub use eval::{run_experiment, ExperimentOptions, MetricsReport};
pub use scene::{render_scene, RenderedScene, Scenario};

pub use num_complex::Complex64;
