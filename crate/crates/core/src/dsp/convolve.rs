use num_complex::Complex64;

use super::fft::Dft;

/// Below this many multiply-adds the direct sum is used.
const DIRECT_LIMIT: usize = 1 << 15;

/// Full linear convolution, length `a.len() + b.len() - 1`.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    if a.len().min(b.len()) <= 32 || a.len() * b.len() <= DIRECT_LIMIT {
        direct(a, b)
    } else {
        via_fft(a, b)
    }
}

fn direct(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (o, &y) in out[i..i + b.len()].iter_mut().zip(b) {
            *o += x * y;
        }
    }
    out
}

fn via_fft(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len() + b.len() - 1;
    let n = len.next_power_of_two();
    let dft = Dft::new(n);
    let pad = |x: &[f64]| {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for (slot, &s) in v.iter_mut().zip(x) {
            slot.re = s;
        }
        v
    };
    let mut fa = pad(a);
    let mut fb = pad(b);
    dft.forward_in_place(&mut fa).expect("planned size");
    dft.forward_in_place(&mut fb).expect("planned size");
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    dft.inverse_in_place(&mut fa).expect("planned size");
    fa.truncate(len);
    fa.into_iter().map(|c| c.re).collect()
}
