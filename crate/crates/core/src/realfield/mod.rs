//! Exact arithmetic in finite-dimensional real number fields with a certified
//! floor, plus a fixed-point fast path for affine forms.

mod field;
mod fixed;
mod independence;
mod real;

pub use field::{Embedding, NumberField, DEFAULT_MAX_DIGITS, FIELD_SCHEMA};
#[cfg(test)]
pub(crate) use field::parse_rational;
pub use fixed::{AffineForm, FixedInterval, FloorStepper, FracValue, FRAC_BITS, RESYNC_PERIOD};
pub use independence::{independent_with_unit, RELATION_DIGITS, RELATION_HEIGHT};
pub use real::{field_arith, ExactReal, FieldOp};
