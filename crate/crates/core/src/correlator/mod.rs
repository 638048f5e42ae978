//! Logarithmic correlation experiments over Beatty sequences.
//!
//! Reports carry both the `ln X` and the `H_X` normalisations of the logarithmic
//! average; verdicts use the `H_X` one, which is exactly 1 for `f ≡ 1`.

mod correlate;
mod kbsz;
mod kpoint;
mod product;
mod rational;

pub use correlate::{
    correlate, CorrelationReport, CorrelationSpec, Expectation, Factor, Verdict, BOUND_SLACK,
};
pub use rational::{rational_limit_predict, RationalPrediction};
pub use kbsz::{kbsz_check, KbszEntry};
pub use product::{verify_pretentious_product, IndependencePolicy, ProductReport};
pub use kpoint::{
    check_floor_identities, kpoint_scaffold, verify_kpoint, FloorIdentityReport, KPointReport, KPointScaffold,
    IDENTITY_WINDOW,
};

pub(crate) fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}
