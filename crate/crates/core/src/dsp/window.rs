use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Square root of the periodic Hann window of length `n`.
///
/// At 50% overlap the pair (h, h) satisfies `h[n]^2 + h[n + N/2]^2 = 1`, so the
/// same window serves for analysis and synthesis.
pub fn make_sqrt_hann(n: usize) -> Result<Vec<f64>> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::InvalidConfig(format!("window length must be even and >= 4, got {n}")));
    }
    Ok((0..n)
        .map(|i| {
            let hann = 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos());
            hann.max(0.0).sqrt()
        })
        .collect())
}
