//! Acoustic scene simulation: image-source room responses, source mixing at
//! a target SNR, per-node clock skew and the ideal VAD.

mod config;
mod render;
mod rir;
mod speech;
mod vad;

pub use config::{sro_set, NodeSpec, Processing, Room, Scenario, SourceKind, SourceSpec};
pub use render::{load_speech, render_scene, RenderedScene};
pub use rir::{schroeder_t60, simulate_rir, RirParams, IMAGE_JITTER_M};
pub use speech::{material_needed, read_wav, speech_cadence, synthetic_speech, GAP_S, LEAD_SILENCE_S, SNIPPET_S};
pub use vad::{oracle_vad, OracleVad};

/// Speed of sound in m/s.
pub const SPEED_OF_SOUND: f64 = 343.0;
