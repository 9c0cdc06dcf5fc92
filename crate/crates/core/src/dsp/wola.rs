use std::fmt;

use num_complex::Complex64;

use super::fft::Dft;
use super::signal::{StftFrame, TimeSignal};
use super::window::make_sqrt_hann;
use crate::error::{Error, Result};

const COLA_TOL: f64 = 1e-12;

/// WOLA filterbank parameters: DFT size, hop and the analysis/synthesis pair.
///
/// The hop is fixed at `N/2`; the windows must satisfy the constant
/// overlap-add identity `h_a[n] h_s[n] + h_a[n+Ns] h_s[n+Ns] = 1`.
#[derive(Clone)]
pub struct WolaConfig {
    n: usize,
    hop: usize,
    analysis: Vec<f64>,
    synthesis: Vec<f64>,
    dft: Dft,
}

impl fmt::Debug for WolaConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WolaConfig").field("n", &self.n).field("hop", &self.hop).finish()
    }
}

impl WolaConfig {
    pub fn new(analysis: Vec<f64>, synthesis: Vec<f64>) -> Result<Self> {
        let n = analysis.len();
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidConfig(format!("DFT size must be even and >= 4, got {n}")));
        }
        if synthesis.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: synthesis.len() });
        }
        let hop = n / 2;
        for i in 0..hop {
            let sum = analysis[i] * synthesis[i] + analysis[i + hop] * synthesis[i + hop];
            if (sum - 1.0).abs() > COLA_TOL {
                return Err(Error::InvalidConfig(format!(
                    "windows violate constant overlap-add at sample {i}: sum = {sum}"
                )));
            }
        }
        Ok(Self { n, hop, analysis, synthesis, dft: Dft::new(n) })
    }

    /// Square-root Hann analysis and synthesis windows at 50% overlap.
    pub fn sqrt_hann(n: usize) -> Result<Self> {
        let w = make_sqrt_hann(n)?;
        Self::new(w.clone(), w)
    }

    pub fn frame_len(&self) -> usize {
        self.n
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    /// Number of non-redundant bins of a real frame, `N/2 + 1`.
    pub fn half_bins(&self) -> usize {
        self.n / 2 + 1
    }

    pub fn analysis_window(&self) -> &[f64] {
        &self.analysis
    }

    pub fn synthesis_window(&self) -> &[f64] {
        &self.synthesis
    }

    pub fn dft(&self) -> &Dft {
        &self.dft
    }

    /// Windowed DFT of exactly `N` samples.
    pub fn analyze(&self, frame: &[f64]) -> Result<Vec<Complex64>> {
        if frame.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: frame.len() });
        }
        let mut buf: Vec<Complex64> = frame
            .iter()
            .zip(&self.analysis)
            .map(|(&x, &w)| Complex64::new(x * w, 0.0))
            .collect();
        self.dft.forward_in_place(&mut buf)?;
        Ok(buf)
    }

    /// Windowed DFT of `signal[start..start + N]`, treating samples outside
    /// the signal as zero.
    pub fn analyze_at(&self, signal: &[f64], start: isize) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        for (j, slot) in buf.iter_mut().enumerate() {
            let idx = start + j as isize;
            if idx >= 0 && (idx as usize) < signal.len() {
                *slot = Complex64::new(signal[idx as usize] * self.analysis[j], 0.0);
            }
        }
        self.dft.forward_in_place(&mut buf).expect("buffer has plan length");
        buf
    }

    /// Same as [`analyze_at`](Self::analyze_at) but keeps bins `0..=N/2`.
    pub fn analyze_half_at(&self, signal: &[f64], start: isize) -> Vec<Complex64> {
        let mut full = self.analyze_at(signal, start);
        full.truncate(self.half_bins());
        full
    }

    /// Inverse DFT followed by the synthesis window. Only the real part is
    /// kept.
    pub fn synthesize(&self, bins: &[Complex64]) -> Result<Vec<f64>> {
        let time = self.dft.inverse(bins)?;
        Ok(time.iter().zip(&self.synthesis).map(|(x, &w)| x.re * w).collect())
    }

    /// Synthesis from the non-redundant half spectrum of a real frame.
    pub fn synthesize_half(&self, half: &[Complex64]) -> Result<Vec<f64>> {
        self.synthesize(&hermitian_extend(half, self.n)?)
    }
}

/// Rebuilds a full `n`-bin spectrum from bins `0..=n/2` assuming a real
/// time-domain signal.
pub fn hermitian_extend(half: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    if half.len() != n / 2 + 1 {
        return Err(Error::LengthMismatch { expected: n / 2 + 1, got: half.len() });
    }
    let mut full = Vec::with_capacity(n);
    full.extend_from_slice(half);
    for nu in n / 2 + 1..n {
        full.push(half[n - nu].conj());
    }
    Ok(full)
}

/// WOLA analysis of frame `i`, covering samples `[i*Ns, i*Ns + N)`.
pub fn wola_analysis(stream: &TimeSignal, cfg: &WolaConfig, i: usize) -> Result<StftFrame> {
    let start = i * cfg.hop();
    let needed = start + cfg.frame_len();
    if stream.len() < needed {
        return Err(Error::Underflow { needed, available: stream.len() });
    }
    let bins = cfg.analyze(&stream.samples[start..needed])?;
    Ok(StftFrame { bins, index: i })
}

/// Batch WOLA synthesis. Frame `i` is overlap-added at sample `i*Ns`; the
/// frame indices must be consecutive.
pub fn wola_synthesis(frames: &[StftFrame], cfg: &WolaConfig) -> Result<Vec<f64>> {
    let Some(last) = frames.last() else {
        return Ok(Vec::new());
    };
    for pair in frames.windows(2) {
        if pair[1].index != pair[0].index + 1 {
            return Err(Error::InvalidConfig(format!(
                "non-consecutive frame indices {} -> {}",
                pair[0].index, pair[1].index
            )));
        }
    }
    let mut out = vec![0.0; last.index * cfg.hop() + cfg.frame_len()];
    for frame in frames {
        let block = cfg.synthesize(&frame.bins)?;
        let start = frame.index * cfg.hop();
        for (o, b) in out[start..start + cfg.frame_len()].iter_mut().zip(block) {
            *o += b;
        }
    }
    Ok(out)
}

/// Streaming overlap-add: each pushed frame finalizes `Ns` output samples.
#[derive(Debug, Clone)]
pub struct OverlapAdd {
    tail: Vec<f64>,
}

impl OverlapAdd {
    pub fn new(cfg: &WolaConfig) -> Self {
        Self { tail: vec![0.0; cfg.hop()] }
    }

    /// Adds a synthesized frame and returns the `Ns` samples that no later
    /// frame can touch.
    pub fn push(&mut self, block: &[f64]) -> Vec<f64> {
        let hop = self.tail.len();
        debug_assert_eq!(block.len(), 2 * hop);
        let out: Vec<f64> = self.tail.iter().zip(&block[..hop]).map(|(a, b)| a + b).collect();
        self.tail.copy_from_slice(&block[hop..]);
        out
    }
}
