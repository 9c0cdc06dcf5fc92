use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::estimate::{coherence_product, estimate_sro, instantaneous_coherence, update_avg_product, SroSearch};
use crate::error::Result;

/// Estimator state for one ordered pair `(k, q)`, owned by node `k`.
#[derive(Debug, Clone)]
pub struct SroSyncState {
    pub peer: usize,
    search: SroSearch,
    alpha: f64,
    coh_history: VecDeque<Vec<Complex64>>,
    avg_product: Vec<Complex64>,
    /// FSD events of the most recent `l_d` frames.
    fsd_window: VecDeque<i32>,
    pub eps_hat: f64,
    pub tau_hat: f64,
    pub fsd_count: i64,
    products: usize,
    /// Drift anchor: window position at the end of the warm-up and the
    /// running sum and count of estimates since then. The anchor term uses
    /// their mean so an early estimation error does not persist.
    anchor_pos: f64,
    anchor_sum: f64,
    anchor_count: usize,
    /// `Ns * sum(eps_hat)` since the anchor.
    accumulated: f64,
}

/// Snapshot after one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SroStep {
    pub eps_hat: f64,
    pub tau_hat: f64,
    pub fsd_count: i64,
    /// True when a new estimate was produced this frame.
    pub estimated: bool,
    /// True once the averaged product has filled; before that the drift and
    /// FSD terms must not be applied (see [`SroSyncState::compensating`]).
    pub compensating: bool,
}

impl SroSyncState {
    pub fn new(peer: usize, search: SroSearch, alpha: f64) -> Self {
        let bins = search.n / 2 + 1;
        Self {
            peer,
            search,
            alpha,
            coh_history: VecDeque::with_capacity(search.lag_frames + 1),
            avg_product: vec![Complex64::new(0.0, 0.0); bins],
            fsd_window: VecDeque::with_capacity(search.lag_frames),
            eps_hat: 0.0,
            tau_hat: 0.0,
            fsd_count: 0,
            products: 0,
            anchor_pos: 0.0,
            anchor_sum: 0.0,
            anchor_count: 0,
            accumulated: 0.0,
        }
    }

    /// Number of averaged products after which the drift switches from
    /// anchoring to accumulation: the effective length of the average.
    pub fn warmup(&self) -> usize {
        (1.0 / (1.0 - self.alpha).max(1e-9)).ceil() as usize
    }

    /// Whether the compensation terms are usable. The received window
    /// already follows the peer's integer slips, so applying the FSD count
    /// without a matching drift estimate would shift the wrong way.
    pub fn compensating(&self) -> bool {
        self.products >= self.warmup()
    }

    pub fn avg_product(&self) -> &[Complex64] {
        &self.avg_product
    }

    /// Processes one frame.
    ///
    /// `y1` is the first local microphone and `z` the peer's uncompensated
    /// fused signal; `fsd_event` is this frame's detected event (pass 0 when
    /// FSD handling is off). `window_pos` is the local sample index of the
    /// analysis window, used to seed the accumulated drift the first time an
    /// estimate becomes available. When `stable` is false the peer changed
    /// its fusion rule inside the lag span, so this frame's product is left
    /// out of the average and the previous estimate is kept.
    pub fn step(&mut self, y1: &[Complex64], z: &[Complex64], fsd_event: i32, window_pos: f64, stable: bool) -> Result<SroStep> {
        let ld = self.search.lag_frames;
        let n = self.search.n;
        self.fsd_count += i64::from(fsd_event);
        self.fsd_window.push_back(fsd_event);
        if self.fsd_window.len() > ld {
            self.fsd_window.pop_front();
        }
        self.coh_history.push_back(instantaneous_coherence(y1, z)?);
        if self.coh_history.len() > ld + 1 {
            self.coh_history.pop_front();
        }

        let mut estimated = false;
        if self.coh_history.len() == ld + 1 && stable {
            // Undo the integer shifts that happened between the two frames.
            let delta: i64 = self.fsd_window.iter().map(|&e| i64::from(e)).sum();
            let phi_ac: Vec<Complex64> = (0..=n / 2)
                .map(|nu| {
                    let k = (nu as i64 * delta).rem_euclid(n as i64);
                    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
                })
                .collect();
            let p = coherence_product(&self.coh_history[ld], &self.coh_history[0], &phi_ac);
            update_avg_product(&mut self.avg_product, &p, self.alpha);
            if let Some(eps) = estimate_sro(&self.avg_product, &self.search) {
                self.eps_hat = eps;
                estimated = true;
            }
        }
        if estimated {
            self.products += 1;
        }
        let warmup = self.warmup();
        if self.products > 0 && self.products <= warmup && estimated {
            // While the average is still filling, early estimates are too
            // rough to integrate; anchor the drift to the elapsed time instead.
            self.tau_hat = self.eps_hat * window_pos;
            if self.products == warmup {
                self.anchor_pos = window_pos;
                self.anchor_sum = self.eps_hat;
                self.anchor_count = 1;
                self.accumulated = 0.0;
            }
        } else if self.products > warmup {
            self.accumulated += self.search.hop as f64 * self.eps_hat;
            if estimated {
                self.anchor_sum += self.eps_hat;
                self.anchor_count += 1;
            }
            self.tau_hat = self.anchor_sum / self.anchor_count as f64 * self.anchor_pos + self.accumulated;
        } else if self.products > 0 {
            self.tau_hat += self.search.hop as f64 * self.eps_hat;
        }
        Ok(SroStep { eps_hat: self.eps_hat, tau_hat: self.tau_hat, fsd_count: self.fsd_count, estimated, compensating: self.compensating() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::WolaConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    /// Frames drifting exactly as the linear phase model predicts.
    fn lpd_frames(eps: f64, frames: usize) -> Vec<(Vec<Complex64>, Vec<Complex64>)> {
        let cfg = WolaConfig::sqrt_hann(1024).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..(frames + 2) * 512).map(|_| StandardNormal.sample(&mut rng)).collect();
        (0..frames)
            .map(|i| {
                let y = cfg.analyze_half_at(&x, (i * 512) as isize);
                let tau = eps * (i * 512) as f64;
                let z = y
                    .iter()
                    .enumerate()
                    .map(|(nu, v)| v * Complex64::from_polar(1.0, -2.0 * PI * nu as f64 * tau / 1024.0))
                    .collect();
                (y, z)
            })
            .collect()
    }

    #[test]
    fn recovers_lpd_offset() {
        for eps in [-400e-6, -37e-6, 0.0, 120e-6, 480e-6] {
            let search = SroSearch { n: 1024, hop: 512, lag_frames: 10, half_width_ppm: 1000.0 };
            let mut st = SroSyncState::new(1, search, 0.95);
            let mut last = None;
            for (i, (y, z)) in lpd_frames(eps, 60).iter().enumerate() {
                let s = st.step(y, z, 0, (i * 512) as f64, true).unwrap();
                if i < 10 {
                    assert!(!s.estimated && s.eps_hat == 0.0);
                }
                last = Some(s);
            }
            let s = last.unwrap();
            assert!((s.eps_hat - eps).abs() < 1e-6, "eps {eps}: got {}", s.eps_hat);
            let tau = eps * (59 * 512) as f64;
            assert!((s.tau_hat - tau).abs() < 0.05, "tau {tau}: got {}", s.tau_hat);
        }
    }

    #[test]
    fn compensation_waits_for_a_full_average() {
        let search = SroSearch { n: 1024, hop: 512, lag_frames: 10, half_width_ppm: 1000.0 };
        let mut st = SroSyncState::new(1, search, 0.95);
        assert_eq!(st.warmup(), 20);
        let frames = lpd_frames(200e-6, 40);
        let flags: Vec<bool> = frames.iter().enumerate().map(|(i, (y, z))| st.step(y, z, 0, (i * 512) as f64, true).unwrap().compensating).collect();
        // Products start at frame 10; the 20th lands on frame 29.
        assert!(flags[..29].iter().all(|f| !f));
        assert!(flags[29..].iter().all(|&f| f));
    }

    #[test]
    fn unstable_frames_are_not_averaged() {
        let search = SroSearch { n: 1024, hop: 512, lag_frames: 10, half_width_ppm: 1000.0 };
        let mut st = SroSyncState::new(1, search, 0.95);
        for (i, (y, z)) in lpd_frames(200e-6, 30).iter().enumerate() {
            let s = st.step(y, z, 0, (i * 512) as f64, false).unwrap();
            assert!(!s.estimated);
        }
        assert!(st.avg_product().iter().all(|p| p.norm() == 0.0));
    }
}
