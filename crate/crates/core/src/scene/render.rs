use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::{Scenario, SourceKind};
use super::rir::{simulate_rir, RirParams};
use super::speech::{material_needed, read_wav, speech_cadence, synthetic_speech};
use super::vad::OracleVad;
use crate::dsp::{convolve, resample, ClockOwner, TimeSignal, WolaConfig};
use crate::error::{Error, Result};

/// The simulated acoustic scene, on the reference clock and on every node's
/// own clock.
#[derive(Debug, Clone)]
pub struct RenderedScene {
    pub rate_hz: f64,
    /// Mixture per node and microphone, resampled to the node clock.
    pub per_node: Vec<Vec<TimeSignal>>,
    /// Desired component at each node's reference microphone, node clock.
    pub clean_desired_at_ref: Vec<TimeSignal>,
    /// Mixture before resampling, on the reference clock.
    pub reference: Vec<Vec<TimeSignal>>,
    /// Desired and noise components of `reference`.
    pub reference_desired: Vec<Vec<TimeSignal>>,
    pub reference_noise: Vec<Vec<TimeSignal>>,
    /// Ideal VAD from node 1's clean reference microphone.
    pub vad: OracleVad,
    pub vad_flags: Vec<bool>,
    /// Clock offsets relative to node 1.
    pub sro: Vec<f64>,
    pub ref_mics: Vec<usize>,
    /// Linear gain applied to the summed noise to reach the target SNR.
    pub noise_scale: f64,
}

impl RenderedScene {
    pub fn num_nodes(&self) -> usize {
        self.per_node.len()
    }

    pub fn mics_per_node(&self) -> Vec<usize> {
        self.per_node.iter().map(Vec::len).collect()
    }

    /// Desired component at node `k`'s reference microphone, reference clock.
    pub fn reference_clean(&self, k: usize) -> &TimeSignal {
        &self.reference_desired[k][self.ref_mics[k]]
    }
}

/// Derives independent stream seeds from the scenario seed.
pub(crate) fn sub_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut z = seed;
    for &t in tags {
        z = splitmix(z ^ splitmix(t.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    z
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Speech material for a scenario: the configured WAV or the seeded
/// synthetic talker.
pub fn load_speech(scenario: &Scenario) -> Result<TimeSignal> {
    match &scenario.speech_wav {
        Some(path) => read_wav(path),
        None => {
            let len = material_needed(scenario.num_samples(), scenario.nominal_rate_hz);
            let secs = len as f64 / scenario.nominal_rate_hz + 0.01;
            Ok(synthetic_speech(secs, scenario.nominal_rate_hz, sub_seed(scenario.seed, &[3])))
        }
    }
}

/// Renders the scene: speech cadence, white noise sources, RIR convolution,
/// SNR calibration at node 1's reference microphone and per-node clock skew.
pub fn render_scene(scenario: &Scenario, speech: &TimeSignal) -> Result<RenderedScene> {
    scenario.validate()?;
    let fs = scenario.nominal_rate_hz;
    if (speech.rate_hz - fs).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!("speech is sampled at {} Hz, scenario at {fs} Hz", speech.rate_hz)));
    }
    let len = scenario.num_samples();
    let desired_src = speech_cadence(speech, len)?;

    let noise_specs: Vec<_> = scenario.sources.iter().filter(|s| s.kind == SourceKind::Noise).collect();
    let desired_spec = scenario.sources.iter().find(|s| s.kind == SourceKind::Desired).expect("validated");
    let noise_src: Vec<Vec<f64>> = (0..noise_specs.len())
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(scenario.seed, &[2, j as u64]));
            (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
        })
        .collect();

    let reflection = scenario.reflection_coefficient();
    let rir = |src_idx: usize, mic_idx: usize, src: [f64; 3], mic: [f64; 3]| {
        let p = RirParams {
            room: scenario.room.dims,
            reflection,
            rate_hz: fs,
            length: scenario.rir_length,
            seed: sub_seed(scenario.seed, &[1, src_idx as u64, mic_idx as u64]),
        };
        simulate_rir(&p, src, mic)
    };
    let image = |src: &[f64], h: &[f64]| {
        let mut y = convolve(src, h);
        y.truncate(len);
        y
    };

    // Per node, per mic: desired image and per-source noise images.
    let mut desired = Vec::new();
    let mut noise_images = Vec::new();
    let mut mic_idx = 0;
    for node in &scenario.nodes {
        let mut d_node = Vec::new();
        let mut n_node = Vec::new();
        for &mic in &node.mics {
            d_node.push(image(&desired_src, &rir(0, mic_idx, desired_spec.position, mic)?));
            let per_src = noise_specs
                .iter()
                .enumerate()
                .map(|(j, s)| Ok(image(&noise_src[j], &rir(j + 1, mic_idx, s.position, mic)?)))
                .collect::<Result<Vec<_>>>()?;
            n_node.push(per_src);
            mic_idx += 1;
        }
        desired.push(d_node);
        noise_images.push(n_node);
    }
    info!("rendered {} impulse responses per source", mic_idx);

    // Equal power per noise source at node 1's reference mic, then the
    // configured relative gains, then one global scale for the target SNR.
    let ref0 = scenario.nodes[0].ref_mic;
    let power = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    let src_gain: Vec<f64> = noise_specs
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let p = power(&noise_images[0][ref0][j]);
            if p > 0.0 { s.gain / p.sqrt() } else { 0.0 }
        })
        .collect();
    let sum_noise = |per_src: &[Vec<f64>]| {
        let mut acc = vec![0.0; len];
        for (img, &g) in per_src.iter().zip(&src_gain) {
            if g != 0.0 {
                for (a, v) in acc.iter_mut().zip(img) {
                    *a += g * v;
                }
            }
        }
        acc
    };
    let noise_ref = sum_noise(&noise_images[0][ref0]);
    let pn = power(&noise_ref);
    let pd = power(&desired[0][ref0]);
    let noise_scale = if pn > 0.0 { (pd / pn * 10f64.powf(-scenario.snr_at_ref_db / 10.0)).sqrt() } else { 0.0 };

    let sro = scenario.sro();
    let signal = |x: Vec<f64>| TimeSignal::new(x, fs, ClockOwner::Reference);
    let mut reference = Vec::new();
    let mut reference_desired = Vec::new();
    let mut reference_noise = Vec::new();
    for (k, node) in scenario.nodes.iter().enumerate() {
        let mut mix_k = Vec::new();
        let mut d_k = Vec::new();
        let mut n_k = Vec::new();
        for m in 0..node.mics.len() {
            let n: Vec<f64> = sum_noise(&noise_images[k][m]).into_iter().map(|v| v * noise_scale).collect();
            let d = std::mem::take(&mut desired[k][m]);
            let mix: Vec<f64> = d.iter().zip(&n).map(|(a, b)| a + b).collect();
            mix_k.push(signal(mix)?);
            d_k.push(signal(d)?);
            n_k.push(signal(n)?);
        }
        reference.push(mix_k);
        reference_desired.push(d_k);
        reference_noise.push(n_k);
    }

    let mut per_node = Vec::new();
    let mut clean_desired_at_ref = Vec::new();
    for (k, node) in scenario.nodes.iter().enumerate() {
        let clock = ClockOwner::Node(k);
        let ratio = 1.0 + sro[k];
        let chans = reference[k].iter().map(|s| resample(s, ratio, clock)).collect::<Result<Vec<_>>>()?;
        per_node.push(chans);
        clean_desired_at_ref.push(resample(&reference_desired[k][node.ref_mic], ratio, clock)?);
    }

    let cfg = WolaConfig::sqrt_hann(scenario.processing.frame_len)?;
    let vad = OracleVad::new(&reference_desired[0][ref0].samples, &cfg, scenario.processing.vad_threshold);
    let vad_flags = vad.flags();
    Ok(RenderedScene {
        rate_hz: fs,
        per_node,
        clean_desired_at_ref,
        reference,
        reference_desired,
        reference_noise,
        vad,
        vad_flags,
        sro,
        ref_mics: scenario.nodes.iter().map(|n| n.ref_mic).collect(),
        noise_scale,
    })
}
