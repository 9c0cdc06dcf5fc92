use crate::dsp::WolaConfig;

/// Ideal voice activity detector driven by the clean desired signal.
///
/// A window is active when its clean energy exceeds `threshold_rel` times
/// the largest energy over the hop grid. Energies of arbitrary windows come
/// from a prefix sum, so frames need not sit on the grid.
#[derive(Debug, Clone)]
pub struct OracleVad {
    prefix: Vec<f64>,
    frame_len: usize,
    hop: usize,
    threshold: f64,
}

impl OracleVad {
    pub fn new(clean: &[f64], cfg: &WolaConfig, threshold_rel: f64) -> Self {
        let mut prefix = Vec::with_capacity(clean.len() + 1);
        let mut acc = 0.0;
        prefix.push(acc);
        for &x in clean {
            acc += x * x;
            prefix.push(acc);
        }
        let mut vad = Self { prefix, frame_len: cfg.frame_len(), hop: cfg.hop(), threshold: 0.0 };
        let max = (0..vad.grid_frames()).map(|i| vad.energy((i * vad.hop) as isize)).fold(0.0, f64::max);
        vad.threshold = threshold_rel * max;
        vad
    }

    fn len(&self) -> usize {
        self.prefix.len() - 1
    }

    /// Frames `i` with `[i Ns, i Ns + N)` fully inside the signal.
    pub fn grid_frames(&self) -> usize {
        if self.len() < self.frame_len {
            0
        } else {
            (self.len() - self.frame_len) / self.hop + 1
        }
    }

    /// Clean energy in `[start, start + N)`, clipped to the signal.
    pub fn energy(&self, start: isize) -> f64 {
        let len = self.len() as isize;
        let a = start.clamp(0, len) as usize;
        let b = (start + self.frame_len as isize).clamp(0, len) as usize;
        self.prefix[b] - self.prefix[a]
    }

    pub fn is_active(&self, start: isize) -> bool {
        self.energy(start) > self.threshold
    }

    pub fn flags(&self) -> Vec<bool> {
        (0..self.grid_frames()).map(|i| self.is_active((i * self.hop) as isize)).collect()
    }
}

/// Per-frame activity on the hop grid.
pub fn oracle_vad(clean: &[f64], cfg: &WolaConfig, threshold_rel: f64) -> Vec<bool> {
    OracleVad::new(clean, cfg, threshold_rel).flags()
}
