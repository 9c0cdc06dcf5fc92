use log::trace;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::covariance::CMatrix;
use crate::error::{Error, Result};

/// Relative diagonal loading applied to `Rnn` before factorization.
pub const DEFAULT_LOADING: f64 = 1e-10;

/// Joint diagonalization `Ryy = Q diag(sigma) Q^H`, `Rnn = Q Q^H`.
#[derive(Debug, Clone)]
pub struct GevdResult {
    pub q: CMatrix,
    /// Generalized eigenvalues, descending.
    pub sigma: Vec<f64>,
    pub lambda1: f64,
    chol: CMatrix,
    v1: DVector<Complex64>,
}

/// Rank-one GEVD-MWF filter for one bin.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    /// One `C`-vector per bin.
    pub w: Vec<DVector<Complex64>>,
    pub ref_selector: usize,
}

impl FilterBank {
    /// Filter that passes channel `ref_selector` unchanged in every bin.
    pub fn selector(channels: usize, bins: usize, ref_selector: usize) -> Self {
        let mut e = DVector::zeros(channels);
        e[ref_selector] = Complex64::new(1.0, 0.0);
        Self { w: vec![e; bins], ref_selector }
    }
}

/// GEVD of the pencil `(Ryy, Rnn)`.
///
/// `Rnn` is loaded with `loading * tr(Rnn) / C` on the diagonal and factored
/// as `L L^H`; the whitened matrix `L^-1 Ryy L^-H = V diag(sigma) V^H` then
/// gives `Q = L V`.
pub fn gevd(ryy: &CMatrix, rnn: &CMatrix, loading: f64) -> Result<GevdResult> {
    let c = rnn.nrows();
    for m in [ryy, rnn] {
        if m.nrows() != c || m.ncols() != c {
            return Err(Error::DimensionMismatch { expected: c, got: m.ncols() });
        }
    }
    let load = loading * rnn.trace().re / c as f64;
    let mut loaded = rnn.clone();
    for i in 0..c {
        loaded[(i, i)] += load;
    }
    let chol = loaded.cholesky().ok_or(Error::SingularCovariance)?.unpack();
    // A negative pivot shows up as an imaginary square root for complex
    // input rather than as a factorization failure.
    if (0..c).any(|i| {
        let d = chol[(i, i)];
        !(d.re > 0.0 && d.im.abs() <= 1e-9 * d.re)
    }) {
        return Err(Error::SingularCovariance);
    }
    let half = chol.solve_lower_triangular(ryy).ok_or(Error::SingularCovariance)?;
    let mut a = chol.solve_lower_triangular(&half.adjoint()).ok_or(Error::SingularCovariance)?;
    a = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);

    let eig = a.symmetric_eigen();
    let mut order: Vec<usize> = (0..c).collect();
    // Stable sort keeps the solver's order among equal eigenvalues.
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let v = DMatrix::from_fn(c, c, |r, k| eig.eigenvectors[(r, order[k])]);
    let q = &chol * &v;
    let v1 = v.column(0).into_owned();
    Ok(GevdResult { q, lambda1: 1.0 - 1.0 / sigma[0], sigma, chol, v1 })
}

/// `w = Q^-H diag(lambda1, 0, ..., 0) Q^H e_ref`.
pub fn gevd_mwf_filter(g: &GevdResult, ref_selector: usize) -> Result<DVector<Complex64>> {
    let s1 = g.sigma[0];
    if s1 == 0.0 || !s1.is_finite() {
        return Err(Error::DegenerateEigenvalue(s1));
    }
    if s1 < 1.0 {
        trace!("largest generalized eigenvalue {s1} below one; using negative gain as-is");
    }
    if ref_selector >= g.q.nrows() {
        return Err(Error::DimensionMismatch { expected: g.q.nrows(), got: ref_selector + 1 });
    }
    // Q^-H e_1 = L^-H v_1 because V is unitary.
    let x1 = g.chol.ad_solve_lower_triangular(&g.v1).ok_or(Error::SingularCovariance)?;
    let scale = g.q[(ref_selector, 0)].conj() * g.lambda1;
    Ok(x1 * scale)
}

/// Filter for each reference channel in `refs` from one shared GEVD.
pub fn gevd_mwf_filters(g: &GevdResult, refs: &[usize]) -> Result<Vec<DVector<Complex64>>> {
    refs.iter().map(|&r| gevd_mwf_filter(g, r)).collect()
}
