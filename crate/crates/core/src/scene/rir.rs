use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SPEED_OF_SOUND;
use crate::error::{Error, Result};

/// Half-length of the fractional-delay interpolator.
const FD_HALF: usize = 32;
/// Per-axis uniform jitter applied to every reflected image.
pub const IMAGE_JITTER_M: f64 = 0.05;
/// Images weaker than this fraction of the direct path are skipped.
const AMPLITUDE_FLOOR: f64 = 1e-9;

/// Geometry and sampling parameters for one impulse response.
#[derive(Debug, Clone, Copy)]
pub struct RirParams {
    pub room: [f64; 3],
    /// Pressure reflection coefficient shared by all six walls.
    pub reflection: f64,
    pub rate_hz: f64,
    pub length: usize,
    pub seed: u64,
}

/// Image-source impulse response from `source` to `mic`.
///
/// Every image except the direct path is displaced by up to
/// [`IMAGE_JITTER_M`] per axis, which breaks up the regular arrival pattern
/// of a shoebox room the way randomized image methods do.
pub fn simulate_rir(p: &RirParams, source: [f64; 3], mic: [f64; 3]) -> Result<Vec<f64>> {
    let direct = dist(source, mic);
    if direct < 1e-6 {
        return Err(Error::DegenerateGeometry(format!("source and microphone coincide at {source:?}")));
    }
    let mut h = vec![0.0; p.length];
    let fs = p.rate_hz;
    let max_dist = (p.length + FD_HALF) as f64 * SPEED_OF_SOUND / fs;
    let reach: Vec<i64> = p.room.iter().map(|&l| (max_dist / (2.0 * l)).ceil() as i64 + 1).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let beta = p.reflection;
    let direct_amp = 1.0 / (4.0 * PI * direct);

    for nx in -reach[0]..=reach[0] {
        for ny in -reach[1]..=reach[1] {
            for nz in -reach[2]..=reach[2] {
                for parity in 0..8u32 {
                    let n = [nx, ny, nz];
                    let mut pos = [0.0; 3];
                    let mut order = 0i64;
                    for a in 0..3 {
                        let q = ((parity >> a) & 1) as i64;
                        pos[a] = (1 - 2 * q) as f64 * source[a] + 2.0 * n[a] as f64 * p.room[a];
                        order += (n[a] - q).abs() + n[a].abs();
                    }
                    let is_direct = order == 0;
                    if !is_direct {
                        // Draw unconditionally so the stream does not depend on pruning.
                        for c in pos.iter_mut() {
                            *c += rng.random_range(-IMAGE_JITTER_M..IMAGE_JITTER_M);
                        }
                    }
                    let d = dist(pos, mic);
                    if d > max_dist {
                        continue;
                    }
                    let amp = if beta == 0.0 {
                        if is_direct { 1.0 } else { 0.0 }
                    } else {
                        beta.powi(order as i32)
                    } / (4.0 * PI * d.max(1e-3));
                    if amp.abs() < AMPLITUDE_FLOOR * direct_amp {
                        continue;
                    }
                    add_fractional_impulse(&mut h, d / SPEED_OF_SOUND * fs, amp);
                }
            }
        }
    }
    Ok(h)
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Hann-windowed sinc centred at `delay` samples.
fn add_fractional_impulse(h: &mut [f64], delay: f64, amp: f64) {
    let centre = delay.round() as i64;
    let lo = (centre - FD_HALF as i64).max(0);
    let hi = (centre + FD_HALF as i64).min(h.len() as i64 - 1);
    for n in lo..=hi {
        let x = n as f64 - delay;
        if x.abs() >= FD_HALF as f64 {
            continue;
        }
        let sinc = if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
        let win = 0.5 * (1.0 + (PI * x / FD_HALF as f64).cos());
        h[n as usize] += amp * sinc * win;
    }
}

/// Reverberation time from the Schroeder backward integral, extrapolated
/// from the -5 dB to -25 dB decay.
pub fn schroeder_t60(h: &[f64], rate_hz: f64) -> Option<f64> {
    let mut edc: Vec<f64> = h.iter().rev().scan(0.0, |acc, &x| {
        *acc += x * x;
        Some(*acc)
    }).collect();
    edc.reverse();
    let total = *edc.first()?;
    if total <= 0.0 {
        return None;
    }
    let db: Vec<f64> = edc.iter().map(|&e| 10.0 * (e / total).log10()).collect();
    let pts: Vec<(f64, f64)> = db
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= -5.0 && v >= -25.0)
        .map(|(i, &v)| (i as f64 / rate_hz, v))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope < 0.0).then(|| -60.0 / slope)
}
