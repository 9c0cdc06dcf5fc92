use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Per-bin stacked observation: `C` channel values for each of `bins` bins,
/// stored bin-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedFrame {
    channels: usize,
    bins: usize,
    data: Vec<Complex64>,
}

impl StackedFrame {
    pub fn zeros(channels: usize, bins: usize) -> Self {
        Self { channels, bins, data: vec![Complex64::new(0.0, 0.0); channels * bins] }
    }

    /// Stacks per-channel spectra (all of equal length) into per-bin vectors.
    pub fn from_channels(spectra: &[&[Complex64]]) -> Result<Self> {
        let bins = spectra.first().map_or(0, |s| s.len());
        let channels = spectra.len();
        let mut out = Self::zeros(channels, bins);
        for (c, s) in spectra.iter().enumerate() {
            if s.len() != bins {
                return Err(Error::LengthMismatch { expected: bins, got: s.len() });
            }
            for (nu, &v) in s.iter().enumerate() {
                out.data[nu * channels + c] = v;
            }
        }
        Ok(out)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn bin(&self, nu: usize) -> &[Complex64] {
        &self.data[nu * self.channels..(nu + 1) * self.channels]
    }

    pub fn bin_mut(&mut self, nu: usize) -> &mut [Complex64] {
        &mut self.data[nu * self.channels..(nu + 1) * self.channels]
    }

    /// Spectrum of one channel across all bins.
    pub fn channel(&self, c: usize) -> Vec<Complex64> {
        (0..self.bins).map(|nu| self.data[nu * self.channels + c]).collect()
    }
}

/// Speech-plus-noise and noise-only covariance estimates for every bin,
/// updated by exponential averaging gated on a voice activity flag.
#[derive(Debug, Clone)]
pub struct CovariancePair {
    pub ryy: Vec<CMatrix>,
    pub rnn: Vec<CMatrix>,
    beta: f64,
    speech_updates: usize,
    noise_updates: usize,
}

/// Both matrices start as a small multiple of the identity.
pub const COVARIANCE_INIT: f64 = 1e-6;

impl CovariancePair {
    pub fn new(channels: usize, bins: usize, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidConfig(format!("forgetting factor must lie in (0, 1), got {beta}")));
        }
        if channels == 0 {
            return Err(Error::InvalidConfig("covariance needs at least one channel".into()));
        }
        let init = CMatrix::identity(channels, channels) * Complex64::new(COVARIANCE_INIT, 0.0);
        Ok(Self {
            ryy: vec![init.clone(); bins],
            rnn: vec![init; bins],
            beta,
            speech_updates: 0,
            noise_updates: 0,
        })
    }

    pub fn channels(&self) -> usize {
        self.ryy.first().map_or(0, |m| m.nrows())
    }

    pub fn bins(&self) -> usize {
        self.ryy.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `(speech, noise)` update counts. Every bin is updated on every call,
    /// so the counts are shared across bins.
    pub fn update_counts(&self) -> (usize, usize) {
        (self.speech_updates, self.noise_updates)
    }

    /// True once both matrices have seen at least `C` rank-one updates.
    pub fn ready(&self) -> bool {
        let c = self.channels();
        self.speech_updates >= c && self.noise_updates >= c
    }

    /// `R <- beta R + (1 - beta) y y^H` on `Ryy` when speech is active, on
    /// `Rnn` otherwise.
    pub fn update(&mut self, frame: &StackedFrame, vad_active: bool) -> Result<()> {
        if frame.channels() != self.channels() {
            return Err(Error::DimensionMismatch { expected: self.channels(), got: frame.channels() });
        }
        if frame.bins() != self.bins() {
            return Err(Error::LengthMismatch { expected: self.bins(), got: frame.bins() });
        }
        let (target, count) = if vad_active {
            (&mut self.ryy, &mut self.speech_updates)
        } else {
            (&mut self.rnn, &mut self.noise_updates)
        };
        let b = self.beta;
        let a = 1.0 - b;
        for (nu, r) in target.iter_mut().enumerate() {
            rank_one_update(r, frame.bin(nu), b, a);
        }
        *count += 1;
        Ok(())
    }
}

fn rank_one_update(r: &mut CMatrix, y: &[Complex64], b: f64, a: f64) {
    let c = y.len();
    // Column-major; computing each entry as y_i conj(y_j) keeps the result
    // exactly Hermitian because complex multiplication commutes bitwise.
    for j in 0..c {
        let yj = y[j].conj();
        for i in 0..c {
            let v = &mut r[(i, j)];
            *v = *v * b + y[i] * yj * a;
        }
    }
}
