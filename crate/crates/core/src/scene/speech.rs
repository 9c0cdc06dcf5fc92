use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dsp::{ClockOwner, TimeSignal};
use crate::error::{Error, Result};

/// Leading silence before the first snippet.
pub const LEAD_SILENCE_S: f64 = 0.25;
pub const SNIPPET_S: f64 = 3.0;
pub const GAP_S: f64 = 2.0;

/// Reads a mono WAV file (16-bit PCM or 32-bit float) into a signal on the
/// reference clock.
pub fn read_wav(path: &Path) -> Result<TimeSignal> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::InvalidConfig(format!("{} has {} channels, expected mono", path.display(), spec.channels)));
    }
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Float, 32) => reader.samples::<f32>().map(|s| s.map(f64::from)).collect::<Result<_, _>>()?,
        (hound::SampleFormat::Int, 16) => {
            reader.samples::<i16>().map(|s| s.map(|v| f64::from(v) / 32768.0)).collect::<Result<_, _>>()?
        }
        (fmt, bits) => {
            return Err(Error::InvalidConfig(format!("unsupported WAV format {fmt:?} with {bits} bits")));
        }
    };
    TimeSignal::new(samples, f64::from(spec.sample_rate), ClockOwner::Reference)
}

/// Seeded speech-like material: voiced syllables built from a gliding
/// harmonic series shaped by three formants, with occasional fricative
/// bursts and short pauses.
pub fn synthetic_speech(duration_s: f64, rate_hz: f64, seed: u64) -> TimeSignal {
    let len = (duration_s * rate_hz).round() as usize;
    let mut out = vec![0.0; len];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos = 0usize;
    while pos < len {
        let syl = (rng.random_range(0.12..0.32) * rate_hz) as usize;
        let f0 = rng.random_range(95.0..210.0);
        let glide = rng.random_range(-0.25..0.2);
        let formants = [
            (rng.random_range(300.0..850.0), 90.0),
            (rng.random_range(900.0..2300.0), 130.0),
            (rng.random_range(2300.0..3200.0), 200.0),
        ];
        let level = rng.random_range(0.3..1.0);
        let fricative = rng.random_bool(0.3);
        let mut phase = 0.0f64;
        for n in 0..syl.min(len - pos) {
            let t = n as f64 / syl as f64;
            let env = (PI * t).sin().powf(0.6);
            let f = f0 * (1.0 + glide * t);
            phase += 2.0 * PI * f / rate_hz;
            let mut v = 0.0;
            let mut h = 1;
            while (h as f64) * f < 4000.0 {
                let fh = h as f64 * f;
                let gain: f64 = formants
                    .iter()
                    .map(|&(fc, bw)| (-0.5 * ((fh - fc) / bw).powi(2)).exp())
                    .sum::<f64>()
                    + 0.02;
                v += gain * (h as f64 * phase).sin() / (h as f64).sqrt();
                h += 1;
            }
            if fricative && t < 0.25 {
                let z: f64 = StandardNormal.sample(&mut rng);
                v += 0.4 * z * (1.0 - t / 0.25);
            }
            out[pos + n] = 0.1 * level * env * v;
        }
        pos += syl + (rng.random_range(0.02..0.09) * rate_hz) as usize;
    }
    TimeSignal::new(out, rate_hz, ClockOwner::Reference).expect("finite synthetic samples")
}

/// Lays consecutive snippets of `material` out in time: leading silence,
/// then alternating snippets and gaps, truncated to `len` samples.
pub fn speech_cadence(material: &TimeSignal, len: usize) -> Result<Vec<f64>> {
    let fs = material.rate_hz;
    let lead = (LEAD_SILENCE_S * fs).round() as usize;
    let snip = (SNIPPET_S * fs).round() as usize;
    let gap = (GAP_S * fs).round() as usize;
    let mut out = vec![0.0; len];
    let mut t = lead;
    let mut src = 0usize;
    while t < len {
        let take = snip.min(len - t);
        let needed = src + take;
        if needed > material.len() {
            return Err(Error::MissingSpeech { needed, available: material.len() });
        }
        out[t..t + take].copy_from_slice(&material.samples[src..src + take]);
        src += snip;
        t += snip + gap;
    }
    Ok(out)
}

/// Samples of speech material needed to fill `len` output samples.
pub fn material_needed(len: usize, rate_hz: f64) -> usize {
    let lead = (LEAD_SILENCE_S * rate_hz).round() as usize;
    let snip = (SNIPPET_S * rate_hz).round() as usize;
    let gap = (GAP_S * rate_hz).round() as usize;
    let mut t = lead;
    let mut total = 0;
    while t < len {
        total += snip.min(len - t);
        t += snip + gap;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cadence_places_snippets_and_gaps() {
        let fs = 100.0;
        let material = TimeSignal::new(vec![1.0; 1000], fs, ClockOwner::Reference).unwrap();
        let out = speech_cadence(&material, 1500).unwrap();
        assert!(out[..25].iter().all(|&x| x == 0.0));
        assert!(out[25..325].iter().all(|&x| x == 1.0));
        assert!(out[325..525].iter().all(|&x| x == 0.0));
        assert!(out[525..825].iter().all(|&x| x == 1.0));
        assert_eq!(material_needed(1500, fs), 900);
    }

    #[test]
    fn short_material_is_reported() {
        let material = TimeSignal::new(vec![1.0; 100], 100.0, ClockOwner::Reference).unwrap();
        assert!(matches!(speech_cadence(&material, 1500), Err(Error::MissingSpeech { .. })));
    }

    #[test]
    fn synthetic_material_is_deterministic_and_bounded() {
        let a = synthetic_speech(1.0, 16000.0, 7);
        let b = synthetic_speech(1.0, 16000.0, 7);
        assert_eq!(a, b);
        assert!(a.samples.iter().all(|x| x.abs() < 1.0));
        assert!(a.samples.iter().map(|x| x * x).sum::<f64>() > 0.0);
    }

    #[test]
    fn wav_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.wav");
        let spec = hound::WavSpec { channels: 1, sample_rate: 16000, bits_per_sample: 16, sample_format: hound::SampleFormat::Int };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        for v in [0i16, 16384, -32768] {
            w.write_sample(v).unwrap();
        }
        w.finalize().unwrap();
        let s = read_wav(&path).unwrap();
        assert_eq!(s.samples, vec![0.0, 0.5, -1.0]);
        assert_eq!(s.rate_hz, 16000.0);
    }
}
