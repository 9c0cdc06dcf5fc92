//! Signal-processing primitives shared by the simulator and the DANSE nodes.

mod convolve;
mod fft;
mod resample;
mod signal;
mod window;
mod wola;

pub use convolve::convolve;
pub use fft::{dft, dft_real, idft, Dft};
pub use resample::{resample, KAISER_BETA, TAPS_PER_SIDE};
pub use signal::{ClockOwner, StftFrame, TimeSignal};
pub use window::make_sqrt_hann;
pub use wola::{hermitian_extend, wola_analysis, wola_synthesis, OverlapAdd, WolaConfig};
