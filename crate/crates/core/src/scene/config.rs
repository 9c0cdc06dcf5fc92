use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Room {
    /// Width, depth and height in metres.
    pub dims: [f64; 3],
    /// Uniform wall absorption coefficient in (0, 1].
    pub absorption: f64,
    /// Target reverberation time. When set, the wall reflection coefficient
    /// is derived from it with Eyring's formula instead of from
    /// `absorption`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t60_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub mics: Vec<[f64; 3]>,
    /// Clock offset relative to node 1, in parts per million.
    #[serde(default)]
    pub sro_ppm: f64,
    #[serde(default)]
    pub ref_mic: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Desired,
    Noise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub kind: SourceKind,
    pub position: [f64; 3],
    /// Relative gain applied after the noise sources are equalized. Ignored
    /// for the desired source.
    #[serde(default = "one")]
    pub gain: f64,
}

fn one() -> f64 {
    1.0
}

/// Parameters of the enhancement pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Processing {
    /// DFT size `N`; the hop is `N/2`.
    pub frame_len: usize,
    /// Covariance forgetting factor.
    pub beta: f64,
    /// Oracle VAD threshold relative to the loudest clean frame.
    pub vad_threshold: f64,
    /// Coherence lag `l_d` in frames.
    pub sro_lag: usize,
    /// Smoothing of the coherence product.
    pub sro_alpha: f64,
    /// Distortion-function refresh period in frames.
    pub update_period: usize,
    /// Bound on the SRO search, in PPM.
    pub search_half_width_ppm: f64,
    /// Frames excluded from the start of every metric window.
    pub skip_frames: usize,
    /// Length of the post-convergence window, in seconds.
    pub tail_s: f64,
}

impl Default for Processing {
    fn default() -> Self {
        Self {
            frame_len: 1024,
            beta: 0.978,
            vad_threshold: 1e-3,
            sro_lag: 10,
            sro_alpha: 0.95,
            update_period: 30,
            search_half_width_ppm: 1000.0,
            skip_frames: 15,
            tail_s: 5.0,
        }
    }
}

/// Complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub room: Room,
    pub nodes: Vec<NodeSpec>,
    pub sources: Vec<SourceSpec>,
    #[serde(default = "default_rate")]
    pub nominal_rate_hz: f64,
    #[serde(default = "default_snr")]
    pub snr_at_ref_db: f64,
    pub duration_s: f64,
    #[serde(default = "default_rir_len")]
    pub rir_length: usize,
    #[serde(default)]
    pub seed: u64,
    /// Mono WAV supplying speech snippets; a seeded synthetic talker is used
    /// when absent. Relative paths resolve against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speech_wav: Option<PathBuf>,
    #[serde(default)]
    pub processing: Processing,
}

fn default_rate() -> f64 {
    16000.0
}

fn default_snr() -> f64 {
    -3.0
}

fn default_rir_len() -> usize {
    4096
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut s = Self::from_toml_str(&text)?;
        if let (Some(wav), Some(dir)) = (&s.speech_wav, path.parent()) {
            if wav.is_relative() {
                s.speech_wav = Some(dir.join(wav));
            }
        }
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.room.dims.iter().any(|&d| !(d > 0.0)) {
            return bad(format!("room dimensions must be positive: {:?}", self.room.dims));
        }
        if !(self.room.absorption > 0.0 && self.room.absorption <= 1.0) {
            return bad(format!("absorption must lie in (0, 1], got {}", self.room.absorption));
        }
        if let Some(t) = self.room.t60_s {
            if !(t > 0.0) {
                return bad(format!("t60_s must be positive, got {t}"));
            }
        }
        if self.nodes.is_empty() {
            return bad("at least one node is required".into());
        }
        if self.nodes[0].sro_ppm != 0.0 {
            return bad("node 1 is the clock reference and must have sro_ppm = 0".into());
        }
        for (k, node) in self.nodes.iter().enumerate() {
            if node.mics.is_empty() {
                return bad(format!("node {} has no microphones", k + 1));
            }
            if node.ref_mic >= node.mics.len() {
                return bad(format!("node {} ref_mic {} out of range", k + 1, node.ref_mic));
            }
            if !(node.sro_ppm.abs() <= 1000.0) {
                return bad(format!("node {} sro_ppm {} exceeds 1000 PPM", k + 1, node.sro_ppm));
            }
            for m in &node.mics {
                self.check_inside(m, &format!("node {} microphone", k + 1))?;
            }
        }
        let desired = self.sources.iter().filter(|s| s.kind == SourceKind::Desired).count();
        if desired != 1 {
            return bad(format!("exactly one desired source is required, found {desired}"));
        }
        if !self.sources.iter().any(|s| s.kind == SourceKind::Noise) {
            return bad("at least one noise source is required".into());
        }
        for s in &self.sources {
            self.check_inside(&s.position, "source")?;
            if !(s.gain >= 0.0 && s.gain.is_finite()) {
                return bad(format!("source gain must be finite and non-negative, got {}", s.gain));
            }
        }
        if !(self.nominal_rate_hz > 0.0) || !(self.duration_s > 0.0) || self.rir_length == 0 {
            return bad("rate, duration and rir_length must be positive".into());
        }
        let p = &self.processing;
        if p.frame_len < 4 || !p.frame_len.is_power_of_two() {
            return bad(format!("frame_len must be a power of two >= 4, got {}", p.frame_len));
        }
        if !(p.beta > 0.0 && p.beta < 1.0) || !(p.sro_alpha >= 0.0 && p.sro_alpha <= 1.0) {
            return bad("beta must lie in (0, 1) and sro_alpha in [0, 1]".into());
        }
        if p.sro_lag == 0 || p.update_period == 0 {
            return bad("sro_lag and update_period must be positive".into());
        }
        Ok(())
    }

    fn check_inside(&self, p: &[f64; 3], what: &str) -> Result<()> {
        if p.iter().zip(&self.room.dims).all(|(&x, &d)| x > 0.0 && x < d) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("{what} at {p:?} is not strictly inside the room")))
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn total_mics(&self) -> usize {
        self.nodes.iter().map(|n| n.mics.len()).sum()
    }

    pub fn num_samples(&self) -> usize {
        (self.duration_s * self.nominal_rate_hz).round() as usize
    }

    /// Clock offsets relative to node 1 as fractions.
    pub fn sro(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.sro_ppm * 1e-6).collect()
    }

    /// Pairwise offset `eps_kq = (1 + eps_1q) / (1 + eps_1k) - 1`.
    pub fn pairwise_sro(&self, k: usize, q: usize) -> f64 {
        let e = self.sro();
        (1.0 + e[q]) / (1.0 + e[k]) - 1.0
    }

    /// Replaces the per-node clock offsets.
    pub fn with_sro_ppm(mut self, ppm: &[f64]) -> Result<Self> {
        if ppm.len() != self.nodes.len() {
            return Err(Error::DimensionMismatch { expected: self.nodes.len(), got: ppm.len() });
        }
        for (n, &p) in self.nodes.iter_mut().zip(ppm) {
            n.sro_ppm = p;
        }
        self.validate()?;
        Ok(self)
    }

    /// Wall reflection coefficient used by the image-source model.
    pub fn reflection_coefficient(&self) -> f64 {
        let [x, y, z] = self.room.dims;
        match self.room.t60_s {
            Some(t60) => {
                let volume = x * y * z;
                let surface = 2.0 * (x * y + y * z + x * z);
                (-12.0 * std::f64::consts::LN_10 * volume / (super::SPEED_OF_SOUND * surface * t60)).exp()
            }
            None => (1.0 - self.room.absorption).sqrt(),
        }
    }
}

/// Named clock-offset sets for the four-node layout, in PPM.
pub fn sro_set(name: &str) -> Option<[f64; 4]> {
    match name {
        "small" => Some([0.0, 20.0, -20.0, 40.0]),
        "moderate" => Some([0.0, 50.0, -50.0, 100.0]),
        "large" => Some([0.0, 200.0, -200.0, 400.0]),
        _ => None,
    }
}
