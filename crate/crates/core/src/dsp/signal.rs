use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which clock a sampled signal lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClockOwner {
    Reference,
    /// Zero-based node index.
    Node(usize),
}

impl fmt::Display for ClockOwner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClockOwner::Reference => write!(f, "reference"),
            ClockOwner::Node(k) => write!(f, "node{}", k + 1),
        }
    }
}

/// Uniformly sampled real signal with a nominal rate and clock owner.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    pub samples: Vec<f64>,
    pub rate_hz: f64,
    pub clock: ClockOwner,
}

impl TimeSignal {
    pub fn new(samples: Vec<f64>, rate_hz: f64, clock: ClockOwner) -> Result<Self> {
        if !(rate_hz.is_finite() && rate_hz > 0.0) {
            return Err(Error::InvalidConfig(format!("sampling rate must be positive, got {rate_hz}")));
        }
        if let Some(pos) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite sample at index {pos}")));
        }
        Ok(Self { samples, rate_hz, clock })
    }

    pub fn zeros(len: usize, rate_hz: f64, clock: ClockOwner) -> Self {
        Self { samples: vec![0.0; len], rate_hz, clock }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.rate_hz
    }
}

/// Complex spectrum of one windowed frame. `bins` holds all `N` DFT bins.
#[derive(Debug, Clone, PartialEq)]
pub struct StftFrame {
    pub bins: Vec<Complex64>,
    pub index: usize,
}

impl StftFrame {
    pub fn zeros(n: usize, index: usize) -> Self {
        Self { bins: vec![Complex64::new(0.0, 0.0); n], index }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}
