use nalgebra::DVector;
use num_complex::Complex64;

use super::covariance::{CovariancePair, StackedFrame};
use super::gevd::{gevd, gevd_mwf_filters, DEFAULT_LOADING};
use crate::dsp::{ClockOwner, TimeSignal, WolaConfig};
use crate::error::Result;
use crate::scene::RenderedScene;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwfOptions {
    pub beta: f64,
    /// Relative diagonal loading of `Rnn`.
    pub loading: f64,
}

impl Default for MwfOptions {
    fn default() -> Self {
        Self { beta: 0.978, loading: DEFAULT_LOADING }
    }
}

#[derive(Debug, Clone)]
pub struct CentralizedOutput {
    /// Desired-signal estimate at each node's reference microphone, on the
    /// reference clock.
    pub outputs: Vec<TimeSignal>,
    /// Mean filter norm per node and frame.
    pub filter_trace: Vec<Vec<f64>>,
    pub frames: usize,
}

/// Start sample of frame `i >= 1` on the shared frame grid, `(i - 2) Ns`.
pub(crate) fn grid_start(i: usize, hop: usize) -> isize {
    (i as isize - 2) * hop as isize
}

/// Number of frames whose trigger count `N + (i - 1) Ns` fits in `len`.
pub(crate) fn grid_frames(len: usize, cfg: &WolaConfig) -> usize {
    if len < cfg.frame_len() {
        0
    } else {
        (len - cfg.frame_len()) / cfg.hop() + 1
    }
}

/// Centralized GEVD-MWF with every microphone of the network stacked into
/// one filter. Runs on the synchronized (reference clock) signals and uses
/// the same frame grid as the synchronous DANSE nodes, so outputs line up
/// sample for sample.
pub fn centralized_enhance(scene: &RenderedScene, cfg: &WolaConfig, opts: &MwfOptions) -> Result<CentralizedOutput> {
    let channels: Vec<&TimeSignal> = scene.reference.iter().flatten().collect();
    let c = channels.len();
    let len = channels.iter().map(|s| s.len()).min().unwrap_or(0);
    let bins = cfg.half_bins();
    let hop = cfg.hop();
    let n = cfg.frame_len();

    let mut refs = Vec::new();
    let mut offset = 0;
    for (k, node) in scene.reference.iter().enumerate() {
        refs.push(offset + scene.ref_mics[k]);
        offset += node.len();
    }
    let selector = |r: usize| {
        let mut e = DVector::zeros(c);
        e[r] = Complex64::new(1.0, 0.0);
        e
    };
    let mut filters: Vec<Vec<DVector<Complex64>>> = refs.iter().map(|&r| vec![selector(r); bins]).collect();
    let mut cov = CovariancePair::new(c, bins, opts.beta)?;
    let mut outputs = vec![vec![0.0; len]; refs.len()];
    let mut filter_trace = vec![Vec::new(); refs.len()];

    let frames = grid_frames(len, cfg);
    for i in 1..=frames {
        let start = grid_start(i, hop);
        let spectra: Vec<Vec<Complex64>> = channels.iter().map(|s| cfg.analyze_half_at(&s.samples[..len], start)).collect();
        let refs_slices: Vec<&[Complex64]> = spectra.iter().map(|v| v.as_slice()).collect();
        let frame = StackedFrame::from_channels(&refs_slices)?;
        cov.update(&frame, scene.vad.is_active(start))?;
        if cov.ready() {
            for nu in 0..bins {
                let Ok(g) = gevd(&cov.ryy[nu], &cov.rnn[nu], opts.loading) else {
                    continue;
                };
                if let Ok(ws) = gevd_mwf_filters(&g, &refs) {
                    for (k, w) in ws.into_iter().enumerate() {
                        filters[k][nu] = w;
                    }
                }
            }
        }
        for (k, fk) in filters.iter().enumerate() {
            let half: Vec<Complex64> = (0..bins)
                .map(|nu| fk[nu].iter().zip(frame.bin(nu)).map(|(w, y)| w.conj() * y).sum())
                .collect();
            let block = cfg.synthesize_half(&half)?;
            overlap_add_at(&mut outputs[k], &block, start);
            filter_trace[k].push(fk.iter().map(|w| w.norm()).sum::<f64>() / bins as f64);
        }
        debug_assert!(start + n as isize <= len as isize + hop as isize);
    }

    let outputs = outputs
        .into_iter()
        .map(|x| TimeSignal::new(x, scene.rate_hz, ClockOwner::Reference))
        .collect::<Result<Vec<_>>>()?;
    Ok(CentralizedOutput { outputs, filter_trace, frames })
}

/// Adds `block` into `out` starting at `start`, dropping samples that fall
/// outside.
pub(crate) fn overlap_add_at(out: &mut [f64], block: &[f64], start: isize) {
    for (j, &b) in block.iter().enumerate() {
        let idx = start + j as isize;
        if idx >= 0 && (idx as usize) < out.len() {
            out[idx as usize] += b;
        }
    }
}
