//! Blind sampling-rate-offset estimation from coherence drift, full-sample
//! drift (FSD) bookkeeping and STFT-domain compensation.
//!
//! All spectra here are half spectra of real frames: bins `0..=N/2`.

mod estimate;
mod state;

pub use estimate::{
    coherence_product, compensate, detect_fsd, estimate_sro, fsd_phase, gcc_value, instantaneous_coherence,
    update_avg_product, SroSearch,
};
pub use state::{SroStep, SroSyncState};
