//! Certified fixed-point fast path for floors of affine forms `a*n + b`.
//!
//! Values are enclosed in intervals of `i128` numbers scaled by `2^64`. A floor is
//! accepted only when both interval ends share it; otherwise the exact path runs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::ExactReal;
use crate::error::{Error, Result};

pub const FRAC_BITS: u32 = 64;
const ONE: i128 = 1i128 << FRAC_BITS;
/// Steps between exact resynchronisations of a [`FloorStepper`].
pub const RESYNC_PERIOD: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixedInterval {
    pub lo: i128,
    pub hi: i128,
}

impl FixedInterval {
    pub fn from_exact(x: &ExactReal) -> Option<Self> {
        let (lo, hi) = x.interval_at(24).ok()?;
        let scale = BigRational::from_integer(BigInt::from(ONE));
        let lo = (lo * &scale).floor().to_integer().to_i128()?;
        let hi = (hi * &scale).ceil().to_integer().to_i128()?;
        // keep 2^62 headroom for products with n
        if lo.unsigned_abs() > (1u128 << 126) || hi.unsigned_abs() > (1u128 << 126) {
            return None;
        }
        Some(FixedInterval { lo, hi })
    }

    pub fn point(v: i128) -> Self {
        FixedInterval { lo: v, hi: v }
    }

    pub fn from_f64_exact(v: f64) -> Self {
        let s = (v * ONE as f64) as i128;
        FixedInterval { lo: s, hi: s }
    }

    pub fn checked_add(self, o: Self) -> Option<Self> {
        Some(FixedInterval { lo: self.lo.checked_add(o.lo)?, hi: self.hi.checked_add(o.hi)? })
    }

    pub fn checked_mul_int(self, n: i64) -> Option<Self> {
        let n = n as i128;
        let a = self.lo.checked_mul(n)?;
        let b = self.hi.checked_mul(n)?;
        Some(if n >= 0 { FixedInterval { lo: a, hi: b } } else { FixedInterval { lo: b, hi: a } })
    }

    pub fn neg(self) -> Self {
        FixedInterval { lo: -self.hi, hi: -self.lo }
    }

    /// The common floor of both ends, if any.
    pub fn floor(self) -> Option<i64> {
        let a = self.lo >> FRAC_BITS;
        let b = self.hi >> FRAC_BITS;
        (a == b).then(|| a as i64)
    }

    /// Fractional part interval when the floor is certified, both ends in `[0, 2^64)`.
    pub fn frac(self) -> Option<(i64, FixedInterval)> {
        let f = self.floor()?;
        let shift = (f as i128) << FRAC_BITS;
        Some((f, FixedInterval { lo: self.lo - shift, hi: self.hi - shift }))
    }

    /// Certified strict order against another interval.
    pub fn compare(self, o: Self) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering::*;
        if self.hi < o.lo {
            Some(Less)
        } else if self.lo > o.hi {
            Some(Greater)
        } else if self.lo == self.hi && o.lo == o.hi && self.lo == o.lo {
            Some(Equal)
        } else {
            None
        }
    }

    pub fn mid_f64(self) -> f64 {
        ((self.lo as f64) + (self.hi as f64)) * 0.5 / ONE as f64
    }

    pub fn width(self) -> i128 {
        self.hi - self.lo
    }
}

#[derive(Clone, Debug)]
enum Fast {
    /// `(a*n + b) / den` with everything integral.
    Rational { a: i128, b: i128, den: i128 },
    Fixed { a: FixedInterval, b: FixedInterval },
    None,
}

/// The affine map `n -> slope*n + offset` over one number field, with a certified
/// fixed-point floor and an exact fallback.
#[derive(Clone, Debug)]
pub struct AffineForm {
    slope: ExactReal,
    offset: ExactReal,
    fast: Fast,
}

fn small_rational(r: &BigRational, den: &BigInt) -> Option<i128> {
    (r * BigRational::from_integer(den.clone())).to_integer().to_i128()
}

impl AffineForm {
    pub fn new(slope: &ExactReal, offset: &ExactReal) -> Result<Self> {
        if !slope.same_field(offset) {
            return Err(Error::FieldMismatch);
        }
        let fast = if slope.is_rational() && offset.is_rational() {
            let (a, b) = (slope.rational_part(), offset.rational_part());
            let den = num_integer::Integer::lcm(a.denom(), b.denom());
            match (small_rational(&a, &den), small_rational(&b, &den), den.to_i128()) {
                (Some(a), Some(b), Some(d)) if a.unsigned_abs() < 1 << 80 && b.unsigned_abs() < 1 << 100 => {
                    Fast::Rational { a, b, den: d }
                }
                _ => Fast::None,
            }
        } else {
            match (FixedInterval::from_exact(slope), FixedInterval::from_exact(offset)) {
                (Some(a), Some(b)) => Fast::Fixed { a, b },
                _ => Fast::None,
            }
        };
        Ok(AffineForm { slope: slope.clone(), offset: offset.clone(), fast })
    }

    pub fn slope(&self) -> &ExactReal {
        &self.slope
    }

    pub fn offset(&self) -> &ExactReal {
        &self.offset
    }

    /// Exact value `slope*n + offset`.
    pub fn value(&self, n: i64) -> ExactReal {
        &self.slope.mul_int(n) + &self.offset
    }

    /// Enclosure of `slope*n + offset` (degenerate for rational forms with small data).
    pub fn fixed_value(&self, n: i64) -> Option<FixedInterval> {
        match &self.fast {
            Fast::Fixed { a, b } => a.checked_mul_int(n)?.checked_add(*b),
            Fast::Rational { .. } | Fast::None => None,
        }
    }

    pub fn floor(&self, n: i64) -> Result<i64> {
        match &self.fast {
            Fast::Rational { a, b, den } => {
                let num = a.checked_mul(n as i128).and_then(|v| v.checked_add(*b));
                if let Some(num) = num {
                    return Ok(num.div_euclid(*den) as i64);
                }
            }
            Fast::Fixed { .. } => {
                if let Some(f) = self.fixed_value(n).and_then(FixedInterval::floor) {
                    return Ok(f);
                }
            }
            Fast::None => {}
        }
        self.value(n).floor_i64()
    }

    /// Exact fractional part `{slope*n + offset}`.
    pub fn frac_exact(&self, n: i64) -> Result<ExactReal> {
        self.value(n).frac()
    }

    /// `(floor, frac)` where `frac` is an enclosure of the fractional part; falls back to
    /// the exact path (returning a point enclosure of the exact rational, or a narrow
    /// interval) when the fast path is undecided.
    pub fn floor_and_frac(&self, n: i64) -> Result<(i64, FracValue)> {
        match &self.fast {
            Fast::Rational { a, b, den } => {
                if let Some(num) = a.checked_mul(n as i128).and_then(|v| v.checked_add(*b)) {
                    let f = num.div_euclid(*den);
                    let r = num - f * den;
                    return Ok((f as i64, FracValue::Rational { num: r, den: *den }));
                }
            }
            Fast::Fixed { .. } => {
                if let Some((f, fr)) = self.fixed_value(n).and_then(FixedInterval::frac) {
                    return Ok((f, FracValue::Fixed(fr)));
                }
            }
            Fast::None => {}
        }
        let v = self.value(n);
        let f = v.floor_i64()?;
        Ok((f, FracValue::Exact(v.add_rational(&BigRational::from_integer((-f).into())))))
    }

    pub fn is_rational(&self) -> bool {
        self.slope.is_rational() && self.offset.is_rational()
    }
}

/// A fractional part as produced by [`AffineForm::floor_and_frac`].
#[derive(Clone, Debug)]
pub enum FracValue {
    Rational { num: i128, den: i128 },
    Fixed(FixedInterval),
    Exact(ExactReal),
}

impl FracValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            FracValue::Rational { num, den } => *num as f64 / *den as f64,
            FracValue::Fixed(iv) => iv.mid_f64(),
            FracValue::Exact(x) => x.to_f64(),
        }
    }

    pub fn to_exact(&self, like: &ExactReal) -> Option<ExactReal> {
        match self {
            FracValue::Rational { num, den } => Some(ExactReal::from_rational(
                like.field(),
                BigRational::new(BigInt::from(*num), BigInt::from(*den)),
            )),
            FracValue::Exact(x) => Some(x.clone()),
            FracValue::Fixed(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FracValue::Rational { num, .. } => *num == 0,
            FracValue::Exact(x) => x.is_zero(),
            FracValue::Fixed(iv) => iv.lo == 0 && iv.hi == 0,
        }
    }
}

/// Streams `floor(slope*n + offset)` for `n = start, start+1, ...` by adding the slope
/// enclosure each step, resynchronising from a fresh multiplication every
/// [`RESYNC_PERIOD`] steps so enclosure width never accumulates.
#[derive(Clone, Debug)]
pub struct FloorStepper {
    form: AffineForm,
    n: i64,
    acc: Option<FixedInterval>,
    since_sync: u64,
}

impl FloorStepper {
    pub fn new(form: AffineForm, start: i64) -> Self {
        let acc = form.fixed_value(start);
        FloorStepper { form, n: start, acc, since_sync: 0 }
    }

    /// Floor at the current index, then advance.
    pub fn next_floor(&mut self) -> Result<i64> {
        let n = self.n;
        let out = match (&self.form.fast, self.acc) {
            (Fast::Fixed { .. }, Some(acc)) => match acc.floor() {
                Some(f) => f,
                None => self.form.floor(n)?,
            },
            _ => self.form.floor(n)?,
        };
        self.n += 1;
        self.since_sync += 1;
        if let Fast::Fixed { a, .. } = &self.form.fast {
            self.acc = if self.since_sync >= RESYNC_PERIOD {
                self.since_sync = 0;
                self.form.fixed_value(self.n)
            } else {
                self.acc.and_then(|v| v.checked_add(*a))
            };
            if self.acc.is_none() {
                self.acc = self.form.fixed_value(self.n);
            }
        }
        Ok(out)
    }

    pub fn position(&self) -> i64 {
        self.n
    }
}
