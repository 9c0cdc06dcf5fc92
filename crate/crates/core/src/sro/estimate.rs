use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dsp::idft;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Plausibility bound on any SRO estimate.
const MAX_EPS: f64 = 1e-3;
const GOLDEN_TOL: f64 = 1e-3;
const GOLDEN_MAX_ITER: usize = 30;

/// `Gamma = y z* / (|y| |z|)` per bin; zero where either bin is zero.
pub fn instantaneous_coherence(y: &[Complex64], z: &[Complex64]) -> Result<Vec<Complex64>> {
    if y.len() != z.len() {
        return Err(Error::LengthMismatch { expected: y.len(), got: z.len() });
    }
    Ok(y
        .iter()
        .zip(z)
        .map(|(a, b)| {
            let den = a.norm() * b.norm();
            if den > 0.0 { a * b.conj() / den } else { ZERO }
        })
        .collect())
}

/// `P = Gamma_i conj(Gamma_{i - l_d}) phi_ac`.
pub fn coherence_product(now: &[Complex64], lagged: &[Complex64], phi_ac: &[Complex64]) -> Vec<Complex64> {
    now.iter().zip(lagged).zip(phi_ac).map(|((a, b), p)| a * b.conj() * p).collect()
}

/// `Pbar <- alpha Pbar + (1 - alpha) P`.
pub fn update_avg_product(avg: &mut [Complex64], p: &[Complex64], alpha: f64) {
    for (a, &x) in avg.iter_mut().zip(p) {
        *a = *a * alpha + x * (1.0 - alpha);
    }
}

/// `exp(-j 2 pi nu total / N)` for bins `0..=N/2`. The integer product is
/// reduced modulo `N` first so large counts lose no precision.
pub fn fsd_phase(total: i64, n: usize) -> Vec<Complex64> {
    (0..=n / 2)
        .map(|nu| {
            let k = (nu as i64 * total).rem_euclid(n as i64);
            Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64)
        })
        .collect()
}

/// Event in `{-1, 0, +1}`: received samples since the previous frame minus
/// the local samples over the same span.
pub fn detect_fsd(rx_delta: usize, local_delta: usize) -> Result<i32> {
    let ev = rx_delta as i64 - local_delta as i64;
    if ev.abs() > 1 {
        return Err(Error::Consistency(format!(
            "received {rx_delta} samples against {local_delta} local ones in one frame"
        )));
    }
    Ok(ev as i32)
}

/// `z exp(j 2 pi nu tau_hat / N) exp(-j 2 pi nu fsd_total / N)`.
pub fn compensate(z: &[Complex64], tau_hat: f64, fsd_total: i64, n: usize) -> Vec<Complex64> {
    let fsd = fsd_phase(fsd_total, n);
    z.iter()
        .zip(&fsd)
        .enumerate()
        .map(|(nu, (x, f))| x * Complex64::from_polar(1.0, 2.0 * PI * nu as f64 * tau_hat / n as f64) * f)
        .collect()
}

/// Generalized cross-correlation of a half spectrum at a real-valued lag:
/// the inverse DFT of the Hermitian extension, evaluated off-grid.
pub fn gcc_value(p: &[Complex64], n: usize, lag: f64) -> f64 {
    let half = n / 2;
    let w = 2.0 * PI * lag / n as f64;
    let mut acc = p[0].re + (p[half] * Complex64::from_polar(1.0, PI * lag)).re;
    for (nu, x) in p.iter().enumerate().take(half).skip(1) {
        acc += 2.0 * (x * Complex64::from_polar(1.0, w * nu as f64)).re;
    }
    acc / n as f64
}

/// Search settings for [`estimate_sro`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SroSearch {
    pub n: usize,
    pub hop: usize,
    pub lag_frames: usize,
    pub half_width_ppm: f64,
}

impl SroSearch {
    fn lag_scale(&self) -> f64 {
        (self.lag_frames * self.hop) as f64
    }
}

/// SRO from the averaged coherence product: integer peak of `|p(lambda)|`
/// within the search range, golden-section refinement on
/// `[lambda - 0.5, lambda + 0.5]`, then `eps = -lambda / (l_d Ns)`.
///
/// Returns `None` when the peak does not rise above the mean magnitude of
/// the full cross-correlation.
pub fn estimate_sro(avg: &[Complex64], s: &SroSearch) -> Option<f64> {
    let n = s.n;
    if avg.len() != n / 2 + 1 {
        return None;
    }
    let mut full = avg.to_vec();
    full.extend((n / 2 + 1..n).map(|nu| avg[n - nu].conj()));
    let corr = idft(&full);
    let mean = corr.iter().map(|c| c.re.abs()).sum::<f64>() / n as f64;

    let reach = (s.half_width_ppm * 1e-6 * s.lag_scale()).floor() as i64;
    let reach = reach.min(n as i64 / 2 - 1);
    let mut best = (0i64, f64::NEG_INFINITY);
    for lag in -reach..=reach {
        let v = corr[lag.rem_euclid(n as i64) as usize].re.abs();
        if v > best.1 {
            best = (lag, v);
        }
    }
    if !(best.1 > mean) {
        return None;
    }

    let f = |x: f64| gcc_value(avg, n, x).abs();
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (best.0 as f64 - 0.5, best.0 as f64 + 0.5);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_MAX_ITER {
        if (b - a).abs() < GOLDEN_TOL {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let lambda = 0.5 * (a + b);
    Some((-lambda / s.lag_scale()).clamp(-MAX_EPS, MAX_EPS))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn coherence_of_identical_and_rotated_frames() {
        let y = vec![c(1.0, 2.0), c(0.0, 0.0), c(-3.0, 0.5)];
        let g = instantaneous_coherence(&y, &y).unwrap();
        assert_eq!(g[1], ZERO);
        for v in [g[0], g[2]] {
            assert!((v - c(1.0, 0.0)).norm() < 1e-15);
        }
        let rot = Complex64::from_polar(1.0, 0.7);
        let z: Vec<_> = y.iter().map(|v| v * rot).collect();
        let g = instantaneous_coherence(&y, &z).unwrap();
        // Gamma = y conj(z) / (|y||z|) = conj(rot).
        assert!((g[0] - rot.conj()).norm() < 1e-15);
        assert!(instantaneous_coherence(&y, &y[..2]).is_err());
    }

    #[test]
    fn averaging_limits() {
        let mut avg = vec![c(1.0, 1.0)];
        update_avg_product(&mut avg, &[c(5.0, 0.0)], 1.0);
        assert_eq!(avg[0], c(1.0, 1.0));
        let mut avg = vec![ZERO];
        for i in 1..=100 {
            update_avg_product(&mut avg, &[c(2.0, -1.0)], 0.95);
            let expected = c(2.0, -1.0) * (1.0 - 0.95f64.powi(i));
            assert!((avg[0] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn fsd_detection_rules() {
        assert_eq!(detect_fsd(512, 512).unwrap(), 0);
        assert_eq!(detect_fsd(513, 512).unwrap(), 1);
        assert_eq!(detect_fsd(511, 512).unwrap(), -1);
        assert!(matches!(detect_fsd(514, 512), Err(Error::Consistency(_))));
        let phi = fsd_phase(1, 8);
        assert!((phi[1] - Complex64::from_polar(1.0, -2.0 * PI / 8.0)).norm() < 1e-15);
        assert_eq!(phi[0], c(1.0, 0.0));
    }

    #[test]
    fn compensation_identity_and_dc() {
        let z = vec![c(1.0, 0.0), c(0.3, -0.2), c(-1.0, 2.0), c(0.5, 0.5), c(2.0, 0.0)];
        assert_eq!(compensate(&z, 0.0, 0, 8), z);
        let out = compensate(&z, 3.7, 2, 8);
        assert_eq!(out[0], z[0]);
        for (a, b) in out.iter().zip(&z) {
            assert!((a.norm() - b.norm()).abs() <= 1e-15 * b.norm().max(1.0));
        }
    }

    #[test]
    fn known_lag_gives_known_sro() {
        // P with phase slope for lambda = -1 peaks there: eps = 1/5120.
        let n = 1024;
        let p: Vec<_> = (0..=n / 2).map(|nu| Complex64::from_polar(1.0, 2.0 * PI * nu as f64 / n as f64)).collect();
        let s = SroSearch { n, hop: 512, lag_frames: 10, half_width_ppm: 1000.0 };
        let eps = estimate_sro(&p, &s).unwrap();
        assert!((eps - 1.0 / 5120.0).abs() < 1e-3 / 5120.0, "{eps}");
        let flat = vec![c(1.0, 0.0); n / 2 + 1];
        assert!(estimate_sro(&flat, &s).unwrap().abs() < 1e-9);
        let zero = vec![ZERO; n / 2 + 1];
        assert_eq!(estimate_sro(&zero, &s), None);
    }

    #[test]
    fn gcc_matches_inverse_dft_on_grid() {
        let n = 16;
        let p: Vec<_> = (0..=n / 2).map(|nu| c((nu as f64).sin(), if nu == 0 || nu == n / 2 { 0.0 } else { (nu as f64).cos() })).collect();
        let mut full = p.clone();
        full.extend((n / 2 + 1..n).map(|nu| p[n - nu].conj()));
        let r = idft(&full);
        for lag in 0..n {
            assert!((gcc_value(&p, n, lag as f64) - r[lag].re).abs() < 1e-12);
        }
    }
}
