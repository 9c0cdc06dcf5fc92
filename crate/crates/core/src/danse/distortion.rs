use num_complex::Complex64;

use crate::dsp::{hermitian_extend, idft, WolaConfig};
use crate::error::{Error, Result};

/// Time-domain equivalent of the WOLA filterbank at hop 1 for one node's
/// fusion filter: `2N - 1` taps per local microphone.
///
/// Convolving microphone `m` with `taps(m)` and summing over microphones
/// reproduces the fused signal `w^H y` that a hop-1 WOLA filterbank would
/// output, delayed by `N - 1` samples so that the filter is causal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionFilter {
    /// Per microphone, stored reversed so that a fused sample is a plain dot
    /// product with the most recent `2N - 1` inputs in time order.
    reversed: Vec<Vec<f64>>,
    pub last_update_iteration: usize,
    pub update_period: usize,
}

impl DistortionFilter {
    /// Builds the taps from per-microphone half-spectrum filters (`w_m[nu]`
    /// for `nu = 0..=N/2`); the fused signal is `sum_m conj(w_m) y_m`.
    pub fn from_filters(w: &[Vec<Complex64>], cfg: &WolaConfig, update_period: usize, iteration: usize) -> Result<Self> {
        let wc = window_correlation(cfg);
        let reversed = w
            .iter()
            .map(|wm| {
                let mut t = distortion_taps(wm, cfg, &wc)?;
                t.reverse();
                Ok(t)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { reversed, last_update_iteration: iteration, update_period })
    }

    /// Whether frame `i` belongs to the refresh set.
    pub fn due(&self, i: usize) -> bool {
        i % self.update_period == 0
    }

    pub fn mics(&self) -> usize {
        self.reversed.len()
    }

    /// Taps of microphone `m` in natural order (tap `j` weights `x[n - j]`).
    pub fn taps(&self, m: usize) -> Vec<f64> {
        self.reversed[m].iter().rev().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.reversed.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `sum_r h_s[r + l] h_a[r] / Ns` for `l = -(N-1)..=N-1`, indexed by
/// `l + N - 1`.
pub fn window_correlation(cfg: &WolaConfig) -> Vec<f64> {
    let n = cfg.frame_len() as isize;
    let hs = cfg.synthesis_window();
    let ha = cfg.analysis_window();
    let ns = cfg.hop() as f64;
    (-(n - 1)..n)
        .map(|l| {
            let lo = 0.max(-l);
            let hi = n.min(n - l);
            (lo..hi).map(|r| hs[(r + l) as usize] * ha[r as usize]).sum::<f64>() / ns
        })
        .collect()
}

/// Taps of one microphone: the circular impulse response of the filter
/// `conj(w)` weighted by the window correlation.
pub fn distortion_taps(w_half: &[Complex64], cfg: &WolaConfig, wc: &[f64]) -> Result<Vec<f64>> {
    let n = cfg.frame_len();
    if wc.len() != 2 * n - 1 {
        return Err(Error::LengthMismatch { expected: 2 * n - 1, got: wc.len() });
    }
    let g: Vec<Complex64> = w_half.iter().map(|w| w.conj()).collect();
    let c = idft(&hermitian_extend(&g, n)?);
    Ok((0..2 * n - 1)
        .map(|k| {
            let l = k as isize - (n as isize - 1);
            c[l.rem_euclid(n as isize) as usize].re * wc[k]
        })
        .collect())
}

/// One fused sample from the local microphone histories (each ending at
/// the newest sample). Emits 0 until `N` samples are available.
pub fn fused_sample(histories: &[&[f64]], filter: &DistortionFilter, frame_len: usize) -> f64 {
    let mut acc = 0.0;
    for (x, taps) in histories.iter().zip(&filter.reversed) {
        if x.len() < frame_len {
            return 0.0;
        }
        let span = taps.len().min(x.len());
        acc += dot(&taps[taps.len() - span..], &x[x.len() - span..]);
    }
    acc
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut lanes = [0.0f64; 8];
    let chunks = a.len() / 8;
    for i in 0..chunks {
        for j in 0..8 {
            lanes[j] += a[8 * i + j] * b[8 * i + j];
        }
    }
    let mut acc = lanes.iter().sum::<f64>();
    for i in chunks * 8..a.len() {
        acc += a[i] * b[i];
    }
    acc
}
