use num_complex::Complex64;

use super::correlate::CorrelationReport;
use super::is_prime;
use crate::averaging::{checkpoint_series_ranges, RangeSums};
use crate::error::{Error, Result};

/// `E^log a(pn) · conj(a(qn))` for one prime pair.
#[derive(Clone, Debug)]
pub struct KbszEntry {
    pub p: u64,
    pub q: u64,
    pub report: CorrelationReport,
}

impl KbszEntry {
    /// `|E^log|` at `X`, `H_X`-normalised.
    pub fn modulus(&self) -> f64 {
        self.report.final_normalized.norm()
    }
}

/// Finite-`X` correlations behind the orthogonality criterion; diagnostic only.
pub fn kbsz_check<A>(a: A, pairs: &[(u64, u64)], x: u64) -> Result<Vec<KbszEntry>>
where
    A: Fn(u64) -> Complex64 + Sync,
{
    if x < 1000 {
        return Err(Error::InvalidArgument(format!("X = {} is below 1000", x)));
    }
    pairs
        .iter()
        .map(|&(p, q)| {
            if p == q || !is_prime(p) || !is_prime(q) {
                return Err(Error::InvalidArgument(format!("({}, {}) is not a pair of distinct primes", p, q)));
            }
            let series = checkpoint_series_ranges(x, 10.0, |lo, hi| {
                let mut s = RangeSums::default();
                for n in lo..=hi {
                    s.push(n, a(p * n) * a(q * n).conj());
                }
                Ok(s)
            })?;
            Ok(KbszEntry { p, q, report: CorrelationReport::from_series(series) })
        })
        .collect()
}
