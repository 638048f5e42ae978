use std::cmp::Ordering;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::polytope;
use crate::error::{Error, Result};
use crate::realfield::{ExactReal, FixedInterval, FracValue, NumberField, FRAC_BITS};

/// An endpoint with cached enclosures for the fast comparison path.
#[derive(Clone, Debug)]
pub struct Bound {
    value: ExactReal,
    fixed: Option<FixedInterval>,
    rational: Option<(i128, i128)>,
}

impl Bound {
    pub fn new(value: ExactReal) -> Self {
        let rational = value.to_rational().and_then(|r| Some((r.numer().to_i128()?, r.denom().to_i128()?)));
        let fixed = FixedInterval::from_exact(&value);
        Bound { value, fixed, rational }
    }

    pub fn value(&self) -> &ExactReal {
        &self.value
    }

    /// Certified order of `x` against the bound, if the fast data decide it.
    fn compare_fast(&self, x: &FracValue) -> Option<Ordering> {
        match x {
            FracValue::Rational { num, den } => {
                if let Some((p, q)) = self.rational {
                    return Some(num.checked_mul(q)?.cmp(&p.checked_mul(*den)?));
                }
                let scaled = num.checked_shl(FRAC_BITS)?;
                let iv = FixedInterval { lo: scaled.div_euclid(*den), hi: (scaled + den - 1).div_euclid(*den) };
                iv.compare(self.fixed?)
            }
            FracValue::Fixed(iv) => iv.compare(self.fixed?),
            FracValue::Exact(_) => None,
        }
    }

    fn compare(&self, x: &FracValue, exact: &dyn Fn() -> Result<ExactReal>) -> Result<Ordering> {
        if let Some(o) = self.compare_fast(x) {
            return Ok(o);
        }
        match x {
            FracValue::Exact(v) => v.cmp_exact(&self.value),
            _ => exact()?.cmp_exact(&self.value),
        }
    }
}

/// A one-dimensional interval with explicit closedness at each end.
#[derive(Clone, Debug)]
pub struct Interval {
    pub lo: Bound,
    pub hi: Bound,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    /// The half-open interval `[lo, hi)`.
    pub fn half_open(lo: ExactReal, hi: ExactReal) -> Self {
        Interval { lo: Bound::new(lo), hi: Bound::new(hi), lo_closed: true, hi_closed: false }
    }

    fn accepts(&self, lo: Ordering, hi: Ordering) -> bool {
        let above = lo == Ordering::Greater || (lo == Ordering::Equal && self.lo_closed);
        let below = hi == Ordering::Less || (hi == Ordering::Equal && self.hi_closed);
        above && below
    }

    pub fn contains(&self, x: &ExactReal) -> Result<bool> {
        Ok(self.accepts(x.cmp_exact(&self.lo.value)?, x.cmp_exact(&self.hi.value)?))
    }

    fn contains_frac(&self, x: &FracValue, exact: &dyn Fn() -> Result<ExactReal>) -> Result<bool> {
        let lo = self.lo.compare(x, exact)?;
        if lo == Ordering::Less || (lo == Ordering::Equal && !self.lo_closed) {
            return Ok(false);
        }
        let hi = self.hi.compare(x, exact)?;
        Ok(self.accepts(lo, hi))
    }

    pub fn length(&self) -> ExactReal {
        &self.hi.value - &self.lo.value
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(match self.hi.value.cmp_exact(&self.lo.value)? {
            Ordering::Less => true,
            Ordering::Equal => !(self.lo_closed && self.hi_closed),
            Ordering::Greater => false,
        })
    }

    fn halfspaces(&self, dim: usize, i: usize) -> [HalfSpace; 2] {
        let mut e = vec![BigRational::zero(); dim];
        e[i] = BigRational::from_integer((-1).into());
        let lower = HalfSpace { coeffs: e.clone(), bound: -&self.lo.value, strict: !self.lo_closed };
        e[i] = BigRational::from_integer(1.into());
        let upper = HalfSpace { coeffs: e, bound: self.hi.value.clone(), strict: !self.hi_closed };
        [lower, upper]
    }

    /// `(lo, hi)` as floats.
    pub fn to_f64(&self) -> (f64, f64) {
        (self.lo.value.to_f64(), self.hi.value.to_f64())
    }
}

/// `coeffs · x < bound` when `strict`, `≤` otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpace {
    pub coeffs: Vec<BigRational>,
    pub bound: ExactReal,
    pub strict: bool,
}

impl HalfSpace {
    fn holds(&self, x: &[ExactReal]) -> Result<bool> {
        let mut s = ExactReal::zero(self.bound.field());
        for (c, xi) in self.coeffs.iter().zip(x) {
            if !c.is_zero() {
                s = &s + &xi.mul_rational(c);
            }
        }
        Ok(match s.cmp_exact(&self.bound)? {
            Ordering::Less => true,
            Ordering::Equal => !self.strict,
            Ordering::Greater => false,
        })
    }

    /// Float screen: `Some` only when the point is clearly away from the boundary.
    fn holds_approx(&self, x: &[f64]) -> Option<bool> {
        let mut s = 0.0;
        let mut scale = 1.0;
        for (c, xi) in self.coeffs.iter().zip(x) {
            let c = c.to_f64().unwrap_or(f64::NAN);
            s += c * xi;
            scale += c.abs();
        }
        let gap = self.bound.to_f64() - s;
        let margin = 1e-9 * scale;
        if gap > margin {
            Some(true)
        } else if gap < -margin {
            Some(false)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug)]
pub enum Shape {
    Box(Vec<Interval>),
    /// Intersected with `[0,1)^d` implicitly.
    Polytope(Vec<HalfSpace>),
}

/// A convex subset of `[0,1)^d`.
#[derive(Clone, Debug)]
pub struct ConvexRegion {
    dim: usize,
    field: Arc<NumberField>,
    shape: Shape,
}

fn in_unit(x: &ExactReal, upper_closed: bool) -> Result<bool> {
    let lo = x.signum()? != Ordering::Less;
    let one = ExactReal::one(x.field());
    let hi = match x.cmp_exact(&one)? {
        Ordering::Less => true,
        Ordering::Equal => upper_closed,
        Ordering::Greater => false,
    };
    Ok(lo && hi)
}

impl ConvexRegion {
    /// `[0,1)^d`.
    pub fn unit_box(field: &Arc<NumberField>, dim: usize) -> Self {
        let sides =
            (0..dim).map(|_| Interval::half_open(ExactReal::zero(field), ExactReal::one(field))).collect();
        ConvexRegion { dim, field: field.clone(), shape: Shape::Box(sides) }
    }

    /// Product of half-open intervals `[lo_i, hi_i)` with `0 <= lo_i <= hi_i <= 1`.
    pub fn boxed(field: &Arc<NumberField>, sides: Vec<(ExactReal, ExactReal)>) -> Result<Self> {
        let sides = sides.into_iter().map(|(lo, hi)| Interval::half_open(lo, hi)).collect();
        Self::from_intervals(field, sides)
    }

    /// Product of intervals with arbitrary closedness, each inside `[0,1)`.
    pub fn from_intervals(field: &Arc<NumberField>, sides: Vec<Interval>) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::InvalidArgument("a region needs dimension at least 1".into()));
        }
        for s in &sides {
            if !s.lo.value.same_field(&ExactReal::zero(field)) || !s.hi.value.same_field(&ExactReal::zero(field)) {
                return Err(Error::FieldMismatch);
            }
            if !in_unit(&s.lo.value, true)? || !in_unit(&s.hi.value, true)? {
                return Err(Error::InvalidArgument(format!(
                    "interval [{}, {}) leaves [0,1]",
                    s.lo.value, s.hi.value
                )));
            }
            if s.hi.value.cmp_exact(&s.lo.value)? == Ordering::Less {
                return Err(Error::InvalidArgument(format!("interval [{}, {}) is reversed", s.lo.value, s.hi.value)));
            }
        }
        Ok(ConvexRegion { dim: sides.len(), field: field.clone(), shape: Shape::Box(sides) })
    }

    /// `{x ∈ [0,1)^d : every half-space holds}`.
    pub fn polytope(field: &Arc<NumberField>, dim: usize, rows: Vec<HalfSpace>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("a region needs dimension at least 1".into()));
        }
        let probe = ExactReal::zero(field);
        for h in &rows {
            if h.coeffs.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "half-space has {} coefficients, region dimension is {}",
                    h.coeffs.len(),
                    dim
                )));
            }
            if !h.bound.same_field(&probe) {
                return Err(Error::FieldMismatch);
            }
        }
        Ok(ConvexRegion { dim, field: field.clone(), shape: Shape::Polytope(rows) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn intervals(&self) -> Option<&[Interval]> {
        match &self.shape {
            Shape::Box(s) => Some(s),
            Shape::Polytope(_) => None,
        }
    }

    /// All constraints, including those of the unit cube.
    pub fn halfspaces(&self) -> Vec<HalfSpace> {
        let one = ExactReal::one(&self.field);
        let mut rows = polytope::unit_cube(self.dim, &one);
        match &self.shape {
            Shape::Box(sides) => {
                for (i, s) in sides.iter().enumerate() {
                    rows.extend(s.halfspaces(self.dim, i));
                }
            }
            Shape::Polytope(h) => rows.extend(h.iter().cloned()),
        }
        rows
    }

    pub fn contains(&self, x: &[ExactReal]) -> Result<bool> {
        self.check_point(x.len())?;
        match &self.shape {
            Shape::Box(sides) => {
                for (s, xi) in sides.iter().zip(x) {
                    if !s.contains(xi)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Shape::Polytope(_) => {
                for h in self.halfspaces() {
                    if !h.holds(x)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    /// Membership of a point given by fast fractional parts, with `exact(i)` producing
    /// coordinate `i` exactly when the fast data are inconclusive.
    pub fn contains_frac(&self, x: &[FracValue], exact: &dyn Fn(usize) -> Result<ExactReal>) -> Result<bool> {
        self.check_point(x.len())?;
        match &self.shape {
            Shape::Box(sides) => {
                for (i, (s, xi)) in sides.iter().zip(x).enumerate() {
                    if !s.contains_frac(xi, &|| exact(i))? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Shape::Polytope(rows) => {
                let approx: Vec<f64> = x.iter().map(FracValue::to_f64).collect();
                let mut undecided = Vec::new();
                for h in rows {
                    match h.holds_approx(&approx) {
                        Some(false) => return Ok(false),
                        Some(true) => {}
                        None => undecided.push(h),
                    }
                }
                if undecided.is_empty() {
                    return Ok(true);
                }
                let point: Vec<ExactReal> = (0..self.dim)
                    .map(|i| match x[i].to_exact(&ExactReal::zero(&self.field)) {
                        Some(v) => Ok(v),
                        None => exact(i),
                    })
                    .collect::<Result<_>>()?;
                for h in undecided {
                    if !h.holds(&point)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    fn check_point(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::InvalidArgument(format!("point of dimension {} for a {}-dimensional region", len, self.dim)));
        }
        Ok(())
    }

    pub fn is_empty(&self) -> Result<bool> {
        match &self.shape {
            Shape::Box(sides) => {
                for s in sides {
                    if s.is_empty()? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Shape::Polytope(_) => polytope::is_empty(&self.halfspaces(), self.dim),
        }
    }

    /// Whether `self ∩ other` is empty, exactly.
    pub fn is_disjoint(&self, other: &ConvexRegion) -> Result<bool> {
        if self.dim != other.dim {
            return Err(Error::InvalidArgument("regions of different dimension".into()));
        }
        let mut rows = self.halfspaces();
        rows.extend(other.halfspaces());
        polytope::is_empty(&rows, self.dim)
    }

    /// Exact volume.
    pub fn volume(&self) -> Result<ExactReal> {
        match &self.shape {
            Shape::Box(sides) => {
                let mut v = ExactReal::one(&self.field);
                for s in sides {
                    let len = s.length();
                    if len.signum()? != Ordering::Greater {
                        return Ok(ExactReal::zero(&self.field));
                    }
                    v = &v * &len;
                }
                Ok(v)
            }
            Shape::Polytope(_) => polytope::volume(&self.halfspaces(), self.dim, &ExactReal::one(&self.field)),
        }
    }

    /// Rewrites the region as a box when every constraint involves one coordinate.
    pub fn simplify(self) -> Result<Self> {
        let rows = match &self.shape {
            Shape::Box(_) => return Ok(self),
            Shape::Polytope(_) => self.halfspaces(),
        };
        let mut sides: Vec<Interval> = (0..self.dim)
            .map(|_| Interval {
                lo: Bound::new(ExactReal::zero(&self.field)),
                hi: Bound::new(ExactReal::one(&self.field)),
                lo_closed: true,
                hi_closed: false,
            })
            .collect();
        for h in &rows {
            let nz: Vec<usize> = (0..self.dim).filter(|&i| !h.coeffs[i].is_zero()).collect();
            match nz.len() {
                0 => {
                    let ok = match h.bound.signum()? {
                        Ordering::Greater => true,
                        Ordering::Equal => !h.strict,
                        Ordering::Less => false,
                    };
                    if !ok {
                        let zero = ExactReal::zero(&self.field);
                        let empty = (0..self.dim).map(|_| Interval::half_open(zero.clone(), zero.clone())).collect();
                        return Ok(ConvexRegion { dim: self.dim, field: self.field, shape: Shape::Box(empty) });
                    }
                }
                1 => {
                    let i = nz[0];
                    let c = &h.coeffs[i];
                    let v = h.bound.mul_rational(&c.recip());
                    let s = &mut sides[i];
                    if c > &BigRational::zero() {
                        // x_i < v or x_i <= v
                        match v.cmp_exact(&s.hi.value)? {
                            Ordering::Less => {
                                s.hi = Bound::new(v);
                                s.hi_closed = !h.strict;
                            }
                            Ordering::Equal => s.hi_closed &= !h.strict,
                            Ordering::Greater => {}
                        }
                    } else {
                        match v.cmp_exact(&s.lo.value)? {
                            Ordering::Greater => {
                                s.lo = Bound::new(v);
                                s.lo_closed = !h.strict;
                            }
                            Ordering::Equal => s.lo_closed &= !h.strict,
                            Ordering::Less => {}
                        }
                    }
                }
                _ => return Ok(self),
            }
        }
        for s in sides.iter_mut() {
            if s.hi.value.cmp_exact(&s.lo.value)? == Ordering::Less {
                s.hi = s.lo.clone();
            }
        }
        Ok(ConvexRegion { dim: self.dim, field: self.field, shape: Shape::Box(sides) })
    }

    /// Sides as float pairs for a box.
    pub fn box_f64(&self) -> Option<Vec<(f64, f64)>> {
        self.intervals().map(|s| s.iter().map(Interval::to_f64).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_membership_respects_closedness() {
        let f = NumberField::rationals();
        let r = ConvexRegion::boxed(&f, vec![(ExactReal::zero(&f), ExactReal::from_ratio(&f, 1, 3))]).unwrap();
        assert!(r.contains(&[ExactReal::zero(&f)]).unwrap());
        assert!(!r.contains(&[ExactReal::from_ratio(&f, 1, 3)]).unwrap());
        let x = FracValue::Rational { num: 1, den: 3 };
        assert!(!r.contains_frac(&[x], &|_| unreachable!()).unwrap());
        let y = FracValue::Rational { num: 33, den: 100 };
        assert!(r.contains_frac(&[y], &|_| unreachable!()).unwrap());
    }

    #[test]
    fn rejects_out_of_cube() {
        let f = NumberField::rationals();
        assert!(ConvexRegion::boxed(&f, vec![(ExactReal::zero(&f), ExactReal::from_int(&f, 2))]).is_err());
        assert!(ConvexRegion::boxed(&f, vec![(ExactReal::from_ratio(&f, 1, 2), ExactReal::zero(&f))]).is_err());
    }

    #[test]
    fn polytope_simplifies_to_box() {
        let f = NumberField::multiquadratic(&[2]).unwrap();
        let c = ExactReal::parse(&f, "sqrt2 - 1").unwrap();
        let rows = vec![HalfSpace {
            coeffs: vec![BigRational::from_integer((-2).into())],
            bound: -&c.mul_int(2),
            strict: true,
        }];
        let r = ConvexRegion::polytope(&f, 1, rows).unwrap().simplify().unwrap();
        let s = &r.intervals().unwrap()[0];
        assert_eq!(s.lo.value(), &c);
        assert!(!s.lo_closed && !s.hi_closed);
        assert_eq!(r.volume().unwrap(), &ExactReal::one(&f) - &c);
    }

    #[test]
    fn disjointness() {
        let f = NumberField::rationals();
        let h = |a: i64, b: i64| ExactReal::from_ratio(&f, a, b);
        let a = ConvexRegion::boxed(&f, vec![(h(0, 1), h(1, 2))]).unwrap();
        let b = ConvexRegion::boxed(&f, vec![(h(1, 2), h(1, 1))]).unwrap();
        let c = ConvexRegion::boxed(&f, vec![(h(1, 4), h(3, 4))]).unwrap();
        assert!(a.is_disjoint(&b).unwrap());
        assert!(!a.is_disjoint(&c).unwrap());
    }
}
