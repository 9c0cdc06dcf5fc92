//! Covariance tracking, GEVD and the rank-one multichannel Wiener filter.

mod centralized;
mod covariance;
mod gevd;

use log::debug;

pub use centralized::{centralized_enhance, CentralizedOutput, MwfOptions};
pub(crate) use centralized::overlap_add_at;
pub use covariance::{CMatrix, CovariancePair, StackedFrame, COVARIANCE_INIT};
pub use gevd::{gevd, gevd_mwf_filter, gevd_mwf_filters, FilterBank, GevdResult, DEFAULT_LOADING};

/// Recomputes every bin of `bank` from the current covariances. Bins whose
/// pencil cannot be factored keep their previous filter. Returns the number
/// of such bins.
pub fn refresh_filters(cov: &CovariancePair, bank: &mut FilterBank, loading: f64) -> usize {
    let mut kept = 0;
    for (nu, w) in bank.w.iter_mut().enumerate() {
        match gevd(&cov.ryy[nu], &cov.rnn[nu], loading).and_then(|g| gevd_mwf_filter(&g, bank.ref_selector)) {
            Ok(new) => *w = new,
            Err(e) => {
                debug!("bin {nu}: keeping previous filter ({e})");
                kept += 1;
            }
        }
    }
    kept
}
