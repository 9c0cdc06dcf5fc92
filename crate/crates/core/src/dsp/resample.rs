use std::f64::consts::PI;
use std::sync::OnceLock;

use super::signal::{ClockOwner, TimeSignal};
use crate::error::{Error, Result};

/// Half-width of the interpolation kernel in input samples.
pub const TAPS_PER_SIDE: usize = 64;
/// Kaiser shape parameter; gives well over 100 dB of image rejection.
pub const KAISER_BETA: f64 = 14.0;

const MAX_DEVIATION: f64 = 1e-3;
const TABLE_SIZE: usize = 1 << 16;

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    let mut k = 1.0;
    while term > sum * 1e-17 {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// Kaiser window sampled on `[0, 1]` (normalized distance from the centre).
fn kaiser_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let norm = bessel_i0(KAISER_BETA);
        (0..=TABLE_SIZE + 1)
            .map(|i| {
                let u = (i as f64 / TABLE_SIZE as f64).min(1.0);
                bessel_i0(KAISER_BETA * (1.0 - u * u).max(0.0).sqrt()) / norm
            })
            .collect()
    })
}

fn kaiser(u: f64) -> f64 {
    let table = kaiser_table();
    let pos = u.abs() * TABLE_SIZE as f64;
    let i = pos as usize;
    if i >= TABLE_SIZE {
        return if u.abs() <= 1.0 { table[TABLE_SIZE] } else { 0.0 };
    }
    let frac = pos - i as f64;
    table[i] + (table[i + 1] - table[i]) * frac
}

/// Band-limited resampling by `ratio` (output rate / input rate).
///
/// Output sample `n` is the windowed-sinc interpolation of the input at
/// position `n / ratio`; the output has `floor(len * ratio)` samples and is
/// attributed to `clock`.
pub fn resample(sig: &TimeSignal, ratio: f64, clock: ClockOwner) -> Result<TimeSignal> {
    if !ratio.is_finite() || (ratio - 1.0).abs() > MAX_DEVIATION {
        return Err(Error::RatioOutOfRange(ratio));
    }
    let x = &sig.samples;
    let out_len = (x.len() as f64 * ratio).floor() as usize;
    let half = TAPS_PER_SIDE as isize;
    let width = TAPS_PER_SIDE as f64;
    let mut out = Vec::with_capacity(out_len);
    for n in 0..out_len {
        let pos = n as f64 / ratio;
        let base = pos.floor();
        let frac = pos - base;
        let base = base as isize;
        if frac == 0.0 {
            out.push(x.get(base as usize).copied().unwrap_or(0.0));
            continue;
        }
        // sin(pi (frac - j)) = (-1)^j sin(pi frac)
        let s = (PI * frac).sin() / PI;
        let mut acc = 0.0;
        for j in (1 - half)..=half {
            let idx = base + j;
            if idx < 0 || idx as usize >= x.len() {
                continue;
            }
            let d = frac - j as f64;
            let sign = if j & 1 == 0 { 1.0 } else { -1.0 };
            acc += x[idx as usize] * sign * s / d * kaiser(d / width);
        }
        out.push(acc);
    }
    TimeSignal::new(out, sig.rate_hz * ratio, clock)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, fs: f64, len: usize) -> TimeSignal {
        let s = (0..len).map(|t| (2.0 * PI * freq * t as f64 / fs).sin()).collect();
        TimeSignal::new(s, fs, ClockOwner::Reference).unwrap()
    }

    #[test]
    fn unit_ratio_is_identity() {
        let sig = tone(440.0, 16000.0, 4000);
        let out = resample(&sig, 1.0, ClockOwner::Node(1)).unwrap();
        assert_eq!(out.samples, sig.samples);
        assert_eq!(out.clock, ClockOwner::Node(1));
    }

    #[test]
    fn ratio_out_of_range() {
        let sig = tone(440.0, 16000.0, 100);
        assert!(matches!(resample(&sig, 1.01, ClockOwner::Reference), Err(Error::RatioOutOfRange(_))));
    }

    #[test]
    fn output_length_and_rate() {
        let sig = tone(440.0, 16000.0, 160000);
        let out = resample(&sig, 1.0 + 1e-4, ClockOwner::Node(2)).unwrap();
        assert_eq!(out.len(), 160016);
        assert!((out.rate_hz - 16001.6).abs() < 1e-9);
    }

    #[test]
    fn kaiser_table_endpoints() {
        assert!((kaiser(0.0) - 1.0).abs() < 1e-15);
        assert!(kaiser(1.0) < 1e-5);
        assert_eq!(kaiser(1.5), 0.0);
        let direct = bessel_i0(KAISER_BETA * (1.0f64 - 0.3 * 0.3).sqrt()) / bessel_i0(KAISER_BETA);
        assert!((kaiser(0.3) - direct).abs() < 1e-9);
    }
}
