use log::debug;
use nalgebra::DVector;
use num_complex::Complex64;

use super::distortion::DistortionFilter;
use super::DanseOptions;
use crate::dsp::WolaConfig;
use crate::error::{Error, Result};
use crate::mwf::{refresh_filters, CovariancePair, FilterBank, StackedFrame};
use crate::sro::SroSyncState;

/// Per-node DANSE state.
#[derive(Debug, Clone)]
pub struct NodeState {
    pub index: usize,
    pub mics: usize,
    /// Stacked filter `[w_kk | g]` of dimension `M_k + K - 1` per bin.
    pub w_tilde: FilterBank,
    pub cov: CovariancePair,
    pub distortion: DistortionFilter,
    /// Received sample count per peer at the previous frame.
    pub rx_counts: Vec<usize>,
    /// Net detected FSD events per peer.
    pub fsd_totals: Vec<i64>,
    pub tx_count: usize,
    pub frame_index: usize,
    /// One estimator per peer in the SRO-aware modes.
    pub sro: Vec<Option<SroSyncState>>,
    /// Local count at the previous frame.
    pub last_frame_count: usize,
}

impl NodeState {
    pub fn new(index: usize, mics: usize, ref_mic: usize, nodes: usize, cfg: &WolaConfig, opts: &DanseOptions) -> Result<Self> {
        if ref_mic >= mics {
            return Err(Error::DimensionMismatch { expected: mics, got: ref_mic + 1 });
        }
        let dim = mics + nodes - 1;
        let bins = cfg.half_bins();
        let w_tilde = FilterBank::selector(dim, bins, ref_mic);
        let mut node = Self {
            index,
            mics,
            cov: CovariancePair::new(dim, bins, opts.beta)?,
            distortion: DistortionFilter::from_filters(&[], cfg, opts.update_period, 0)?,
            w_tilde,
            rx_counts: vec![0; nodes],
            fsd_totals: vec![0; nodes],
            tx_count: 0,
            frame_index: 0,
            sro: vec![None; nodes],
            last_frame_count: 0,
        };
        node.distortion = DistortionFilter::from_filters(&node.local_filters(), cfg, opts.update_period, 0)?;
        Ok(node)
    }

    pub fn dimension(&self) -> usize {
        self.cov.channels()
    }

    /// `w_kk` as one half spectrum per local microphone.
    pub fn local_filters(&self) -> Vec<Vec<Complex64>> {
        (0..self.mics).map(|m| self.w_tilde.w.iter().map(|w| w[m]).collect()).collect()
    }

    /// Regenerates the distortion taps from the current `w_kk`.
    pub fn refresh_distortion(&mut self, cfg: &WolaConfig, iteration: usize) -> Result<()> {
        let period = self.distortion.update_period;
        self.distortion = DistortionFilter::from_filters(&self.local_filters(), cfg, period, iteration)?;
        Ok(())
    }

    /// `d_hat = w_tilde^H y_tilde` per bin.
    pub fn estimate(&self, frame: &StackedFrame) -> Vec<Complex64> {
        (0..frame.bins()).map(|nu| inner(&self.w_tilde.w[nu], frame.bin(nu))).collect()
    }
}

fn inner(w: &DVector<Complex64>, y: &[Complex64]) -> Complex64 {
    w.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// `z[nu] = w_kk[nu]^H y[nu]`, using the first `M_k` entries of each
/// stacked filter.
pub fn fuse_frame(w: &[DVector<Complex64>], y: &StackedFrame) -> Result<Vec<Complex64>> {
    if w.len() != y.bins() {
        return Err(Error::LengthMismatch { expected: y.bins(), got: w.len() });
    }
    if w.first().is_some_and(|v| v.len() < y.channels()) {
        return Err(Error::DimensionMismatch { expected: y.channels(), got: w[0].len() });
    }
    Ok((0..y.bins())
        .map(|nu| w[nu].iter().zip(y.bin(nu)).map(|(a, b)| a.conj() * b).sum())
        .collect())
}

/// Covariance update followed by the GEVD filter update once the pencil
/// has enough updates of both kinds. Returns the number of bins that kept
/// their previous filter because the pencil was singular.
pub fn danse_filter_update(node: &mut NodeState, frame: &StackedFrame, vad_active: bool, loading: f64) -> Result<usize> {
    node.cov.update(frame, vad_active)?;
    if !node.cov.ready() {
        return Ok(0);
    }
    let kept = refresh_filters(&node.cov, &mut node.w_tilde, loading);
    if kept > 0 {
        debug!("node {}: {kept} bins kept their previous filter", node.index + 1);
    }
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn selector_fusion_returns_reference_mic() {
        let y = StackedFrame::from_channels(&[&[c(1.0, 2.0), c(3.0, 0.0)], &[c(-1.0, 0.0), c(0.5, 0.5)]]).unwrap();
        let w = FilterBank::selector(3, 2, 0);
        assert_eq!(fuse_frame(&w.w, &y).unwrap(), vec![c(1.0, 2.0), c(3.0, 0.0)]);
    }

    #[test]
    fn scalar_fusion_conjugates() {
        let y = StackedFrame::from_channels(&[&[c(1.0, 1.0)]]).unwrap();
        let w = vec![DVector::from_element(1, c(2.0, 1.0))];
        assert_eq!(fuse_frame(&w, &y).unwrap()[0], c(2.0, -1.0) * c(1.0, 1.0));
    }

    #[test]
    fn fusion_matches_direct_sum() {
        let spectra: Vec<Vec<Complex64>> =
            (0..3).map(|m| (0..5).map(|nu| c((m * 5 + nu) as f64 * 0.3, (m + nu) as f64 * -0.2)).collect()).collect();
        let refs: Vec<&[Complex64]> = spectra.iter().map(Vec::as_slice).collect();
        let y = StackedFrame::from_channels(&refs).unwrap();
        let w: Vec<_> = (0..5).map(|nu| DVector::from_fn(3, |m, _| c(1.0 / (1 + m + nu) as f64, m as f64 * 0.1))).collect();
        let z = fuse_frame(&w, &y).unwrap();
        for nu in 0..5 {
            let mut expected = c(0.0, 0.0);
            for m in 0..3 {
                expected += w[nu][m].conj() * spectra[m][nu];
            }
            assert!((z[nu] - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn initial_state_selects_reference() {
        let cfg = WolaConfig::sqrt_hann(16).unwrap();
        let node = NodeState::new(0, 2, 1, 3, &cfg, &DanseOptions::default()).unwrap();
        assert_eq!(node.dimension(), 4);
        let f = node.local_filters();
        assert!(f[0].iter().all(|v| *v == c(0.0, 0.0)));
        assert!(f[1].iter().all(|v| *v == c(1.0, 0.0)));
    }

    #[test]
    fn frozen_covariances_give_idempotent_updates() {
        let cfg = WolaConfig::sqrt_hann(8).unwrap();
        let mut node = NodeState::new(0, 2, 0, 1, &cfg, &DanseOptions::default()).unwrap();
        for k in 0..20 {
            let spectra: Vec<Vec<Complex64>> = (0..2)
                .map(|m| (0..5).map(|nu| c(((k * 3 + m * 7 + nu) as f64).sin(), ((k + m * 2 + nu * 5) as f64).cos())).collect())
                .collect();
            let refs: Vec<&[Complex64]> = spectra.iter().map(Vec::as_slice).collect();
            danse_filter_update(&mut node, &StackedFrame::from_channels(&refs).unwrap(), k % 2 == 0, 1e-10).unwrap();
        }
        let w1 = node.w_tilde.clone();
        refresh_filters(&node.cov, &mut node.w_tilde, 1e-10);
        assert_eq!(w1, node.w_tilde);
    }
}
