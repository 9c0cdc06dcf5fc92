use num_complex::Complex64;

use crate::dsp::{resample, ClockOwner, TimeSignal, WolaConfig};
use crate::error::{Error, Result};
use crate::sro::{compensate, gcc_value};

/// Per-frame clamp for segmental SNR, in dB.
pub const SEG_SNR_FLOOR_DB: f64 = -10.0;
pub const SEG_SNR_CEIL_DB: f64 = 35.0;
/// Reported oracle distance when the two signals are identical.
pub const ORACLE_DISTANCE_FLOOR_DB: f64 = -120.0;

/// Mean over voiced frames of `10 log10(sum d^2 / sum (d_hat - d)^2)`, each
/// frame clamped to `[-10, 35]` dB.
///
/// Frames are `frame_len` samples without overlap, starting after `skip`
/// samples. A frame is voiced when its clean energy exceeds `voiced_rel`
/// times the loudest clean frame; frames with zero clean energy never count.
/// Returns `None` when no frame qualifies.
pub fn segmental_snr(estimate: &[f64], clean: &[f64], frame_len: usize, skip: usize, voiced_rel: f64) -> Option<f64> {
    let len = estimate.len().min(clean.len());
    if frame_len == 0 || skip >= len {
        return None;
    }
    let frames: Vec<(f64, f64)> = (skip..len)
        .step_by(frame_len)
        .filter(|&s| s + frame_len <= len)
        .map(|s| {
            let sig: f64 = clean[s..s + frame_len].iter().map(|x| x * x).sum();
            let err: f64 = estimate[s..s + frame_len].iter().zip(&clean[s..s + frame_len]).map(|(a, b)| (a - b) * (a - b)).sum();
            (sig, err)
        })
        .collect();
    let max = frames.iter().map(|f| f.0).fold(0.0, f64::max);
    let voiced: Vec<f64> = frames
        .iter()
        .filter(|(sig, _)| *sig > 0.0 && *sig > voiced_rel * max)
        .map(|&(sig, err)| {
            let db = if err == 0.0 { SEG_SNR_CEIL_DB } else { 10.0 * (sig / err).log10() };
            db.clamp(SEG_SNR_FLOOR_DB, SEG_SNR_CEIL_DB)
        })
        .collect();
    if voiced.is_empty() {
        None
    } else {
        Some(voiced.iter().sum::<f64>() / voiced.len() as f64)
    }
}

/// `10 log10(sum |d - c|^2 / sum |c|^2)` over the last `tail` samples.
/// Identical signals give [`ORACLE_DISTANCE_FLOOR_DB`]; a silent
/// centralized output gives `None`.
pub fn oracle_distance(distributed: &[f64], centralized: &[f64], tail: usize) -> Option<f64> {
    let len = distributed.len().min(centralized.len());
    let from = len.saturating_sub(tail);
    let num: f64 = distributed[from..len].iter().zip(&centralized[from..len]).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = centralized[from..len].iter().map(|x| x * x).sum();
    if den == 0.0 {
        return None;
    }
    if num == 0.0 {
        return Some(ORACLE_DISTANCE_FLOOR_DB);
    }
    Some((10.0 * (num / den).log10()).max(ORACLE_DISTANCE_FLOOR_DB))
}

/// Moves a reference-clock signal onto node `k`'s clock.
pub fn to_node_clock(sig: &TimeSignal, eps: f64, k: usize) -> Result<TimeSignal> {
    resample(sig, 1.0 + eps, ClockOwner::Node(k))
}

/// Puts a peer's broadcast stream on node `k`'s clock, keeping the peer's
/// `delay`-sample processing latency fixed in local samples.
///
/// Plain resampling would stretch that latency along with the content, which
/// shifts the reference by `eps * delay` samples.
pub fn peer_on_local_clock(tx: &[f64], eps: f64, delay: usize, rate_hz: f64, k: usize) -> Result<Vec<f64>> {
    let body = TimeSignal::new(tx[delay.min(tx.len())..].to_vec(), rate_hz, ClockOwner::Node(k))?;
    let moved = resample(&body, 1.0 / (1.0 + eps), ClockOwner::Node(k))?;
    let mut out = vec![0.0; delay];
    out.extend(moved.samples);
    Ok(out)
}

/// Fractional lag (in samples) by which `b` trails `a`, from the
/// phase-transform weighted cross-correlation of two half spectra, searched
/// within `+-max_lag`.
pub fn gcc_phat_lag(a: &[Complex64], b: &[Complex64], n: usize, max_lag: usize) -> Result<f64> {
    if a.len() != b.len() || a.len() != n / 2 + 1 {
        return Err(Error::LengthMismatch { expected: n / 2 + 1, got: b.len() });
    }
    let cross: Vec<Complex64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let p = y * x.conj();
            let m = p.norm();
            if m > 0.0 { p / m } else { Complex64::new(0.0, 0.0) }
        })
        .collect();
    let f = |lag: f64| gcc_value(&cross, n, lag);
    let mut best = (0i64, f64::NEG_INFINITY);
    for lag in -(max_lag as i64)..=max_lag as i64 {
        let v = f(lag as f64);
        if v > best.1 {
            best = (lag, v);
        }
    }
    // Golden-section refinement around the integer peak.
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (best.0 as f64 - 1.0, best.0 as f64 + 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-6 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Residual misalignment after compensation for one received frame.
///
/// `received` is the peer's broadcast stream as node `k` received it and
/// `aligned` the same stream resampled onto `k`'s clock. The compensated
/// window `[rx_count - N, rx_count)` is compared against `aligned` at
/// `[local_count - N, local_count)`, where it would sit with no clock offset.
#[allow(clippy::too_many_arguments)]
pub fn residual_drift(
    received: &[f64],
    aligned: &[f64],
    cfg: &WolaConfig,
    local_count: usize,
    rx_count: usize,
    tau_hat: f64,
    fsd_applied: i64,
) -> Result<f64> {
    let n = cfg.frame_len();
    let z = cfg.analyze_half_at(received, rx_count as isize - n as isize);
    let z = compensate(&z, tau_hat, fsd_applied, n);
    let r = cfg.analyze_half_at(aligned, local_count as isize - n as isize);
    gcc_phat_lag(&r, &z, n, 8)
}
