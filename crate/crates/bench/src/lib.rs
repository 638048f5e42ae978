//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use bohr_chowla::beatty::BeattySequence;
use bohr_chowla::correlator::{CorrelationSpec, Factor};
use bohr_chowla::multfunc::MultiplicativeFunction;
use bohr_chowla::realfield::{ExactReal, NumberField};

pub fn field() -> Arc<NumberField> {
    NumberField::multiquadratic(&[2, 3]).expect("Q(sqrt2, sqrt3)")
}

pub fn element(f: &Arc<NumberField>, text: &str) -> ExactReal {
    ExactReal::parse(f, text).expect("valid element")
}

/// `λ(⌊√2 n⌋) λ(⌊√3 n⌋)` up to `x`.
pub fn two_point(x: u64) -> CorrelationSpec {
    let f = field();
    let zero = ExactReal::zero(&f);
    let l = MultiplicativeFunction::liouville();
    let factors = ["sqrt2", "sqrt3"]
        .iter()
        .map(|a| Factor::new(l.clone(), BeattySequence::new(element(&f, a), zero.clone()).unwrap()))
        .collect();
    CorrelationSpec::new(factors, x).unwrap()
}
