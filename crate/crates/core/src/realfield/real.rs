use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::field::{parse_rational, pow10, NumberField};
use crate::error::{Error, Result};

/// An element of a declared [`NumberField`], stored as exact rational coordinates.
#[derive(Clone)]
pub struct ExactReal {
    field: Arc<NumberField>,
    coeffs: Vec<BigRational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Applies `op` to two elements of the same field.
pub fn field_arith(x: &ExactReal, y: &ExactReal, op: FieldOp) -> Result<ExactReal> {
    match op {
        FieldOp::Add => x.try_add(y),
        FieldOp::Sub => x.try_sub(y),
        FieldOp::Mul => x.try_mul(y),
        FieldOp::Div => x.try_div(y),
    }
}

impl ExactReal {
    pub fn new(field: &Arc<NumberField>, coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.len() != field.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                field.dim(),
                coeffs.len()
            )));
        }
        Ok(ExactReal { field: field.clone(), coeffs })
    }

    pub fn zero(field: &Arc<NumberField>) -> Self {
        ExactReal { field: field.clone(), coeffs: vec![BigRational::zero(); field.dim()] }
    }

    pub fn one(field: &Arc<NumberField>) -> Self {
        Self::from_rational(field, BigRational::one())
    }

    pub fn from_rational(field: &Arc<NumberField>, r: BigRational) -> Self {
        let mut x = Self::zero(field);
        x.coeffs[0] = r;
        x
    }

    pub fn from_int(field: &Arc<NumberField>, n: i64) -> Self {
        Self::from_rational(field, BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(field: &Arc<NumberField>, num: i64, den: i64) -> Self {
        Self::from_rational(field, BigRational::new(num.into(), den.into()))
    }

    /// The basis element named `name`.
    pub fn basis(field: &Arc<NumberField>, name: &str) -> Result<Self> {
        let i = field
            .basis_index(name)
            .ok_or_else(|| Error::Parse(format!("unknown basis element `{}`", name)))?;
        let mut x = Self::zero(field);
        x.coeffs[i] = BigRational::one();
        Ok(x)
    }

    /// Parses a linear expression over the basis, e.g. `2*sqrt2 - 1/4` or `3/2 sqrt6`.
    pub fn parse(field: &Arc<NumberField>, text: &str) -> Result<Self> {
        let mut out = Self::zero(field);
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(Error::Parse("empty expression".into()));
        }
        let mut terms = Vec::new();
        let mut cur = String::new();
        for (i, ch) in cleaned.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        for term in terms {
            let (sign, body) = match term.chars().next() {
                Some('-') => (-1, &term[1..]),
                Some('+') => (1, &term[1..]),
                _ => (1, term.as_str()),
            };
            let split = body.find(|c: char| c.is_ascii_alphabetic());
            let (coef, name) = match split {
                Some(pos) => {
                    let c = body[..pos].trim_end_matches('*');
                    let c = if c.is_empty() { BigRational::one() } else { parse_rational(c)? };
                    (c, Some(&body[pos..]))
                }
                None => (parse_rational(body)?, None),
            };
            let idx = match name {
                Some(n) => field
                    .basis_index(n)
                    .ok_or_else(|| Error::Parse(format!("unknown basis element `{}`", n)))?,
                None => 0,
            };
            let c = if sign < 0 { -coef } else { coef };
            out.coeffs[idx] += c;
        }
        Ok(out)
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn same_field(&self, other: &ExactReal) -> bool {
        Arc::ptr_eq(&self.field, &other.field)
    }

    fn check(&self, other: &ExactReal) -> Result<()> {
        if self.same_field(other) {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// True when every non-unit coordinate vanishes. Under the independence assumption this
    /// is equivalent to the real value being rational.
    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(Zero::is_zero)
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| self.coeffs[0].clone())
    }

    pub fn rational_part(&self) -> BigRational {
        self.coeffs[0].clone()
    }

    /// The element with its rational coordinate removed.
    pub fn irrational_part(&self) -> ExactReal {
        let mut x = self.clone();
        x.coeffs[0] = BigRational::zero();
        x
    }

    pub fn try_add(&self, y: &ExactReal) -> Result<ExactReal> {
        self.check(y)?;
        Ok(self.zip(y, |a, b| a + b))
    }

    pub fn try_sub(&self, y: &ExactReal) -> Result<ExactReal> {
        self.check(y)?;
        Ok(self.zip(y, |a, b| a - b))
    }

    pub fn try_mul(&self, y: &ExactReal) -> Result<ExactReal> {
        self.check(y)?;
        Ok(ExactReal { field: self.field.clone(), coeffs: self.field.mul_vec(&self.coeffs, &y.coeffs) })
    }

    /// Solves `y * z = self` by Gaussian elimination on the multiplication-by-`y` matrix.
    pub fn try_div(&self, y: &ExactReal) -> Result<ExactReal> {
        self.check(y)?;
        if y.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if y.is_rational() {
            let r = &y.coeffs[0];
            return Ok(self.map(|c| c / r));
        }
        let n = self.field.dim();
        // column j of the system is y * b_j
        let mut m: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n + 1]; n];
        for j in 0..n {
            let mut e = vec![BigRational::zero(); n];
            e[j] = BigRational::one();
            let col = self.field.mul_vec(&y.coeffs, &e);
            for i in 0..n {
                m[i][j] = col[i].clone();
            }
        }
        for i in 0..n {
            m[i][n] = self.coeffs[i].clone();
        }
        let sol = solve_rational(m).ok_or(Error::DivisionByZero)?;
        Ok(ExactReal { field: self.field.clone(), coeffs: sol })
    }

    pub fn mul_int(&self, k: i64) -> ExactReal {
        let k = BigRational::from_integer(BigInt::from(k));
        self.map(|c| c * &k)
    }

    pub fn mul_rational(&self, k: &BigRational) -> ExactReal {
        self.map(|c| c * k)
    }

    pub fn add_rational(&self, k: &BigRational) -> ExactReal {
        let mut x = self.clone();
        x.coeffs[0] += k;
        x
    }

    fn map(&self, f: impl Fn(&BigRational) -> BigRational) -> ExactReal {
        ExactReal { field: self.field.clone(), coeffs: self.coeffs.iter().map(f).collect() }
    }

    fn zip(&self, y: &ExactReal, f: impl Fn(&BigRational, &BigRational) -> BigRational) -> ExactReal {
        ExactReal {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().zip(&y.coeffs).map(|(a, b)| f(a, b)).collect(),
        }
    }

    /// Interval `[lo, hi]` containing the value, with `hi - lo <= sum |c_i| / 10^places`.
    pub fn interval_at(&self, places: usize) -> Result<(BigRational, BigRational)> {
        let scale = BigRational::from_integer(pow10(places));
        let mut lo = self.coeffs[0].clone();
        let mut hi = self.coeffs[0].clone();
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            if c.is_zero() {
                continue;
            }
            let l = self.field.embedding(i).floor_at(places, &self.field.basis_names()[i])?;
            let bl = BigRational::from_integer(l.clone()) / &scale;
            let bh = BigRational::from_integer(l + 1) / &scale;
            if c.is_positive() {
                lo += c * bl;
                hi += c * bh;
            } else {
                lo += c * bh;
                hi += c * bl;
            }
        }
        Ok((lo, hi))
    }

    fn coeff_mass(&self) -> BigRational {
        self.coeffs[1..].iter().map(|c| c.abs()).fold(BigRational::zero(), |a, b| a + b)
    }

    /// Rational interval of width at most `width` containing the value.
    pub fn eval_interval(&self, width: &BigRational) -> Result<(BigRational, BigRational)> {
        if !width.is_positive() {
            return Err(Error::InvalidArgument("interval width must be positive".into()));
        }
        if self.is_rational() {
            return Ok((self.coeffs[0].clone(), self.coeffs[0].clone()));
        }
        let mass = self.coeff_mass();
        let mut places = 0usize;
        let mut bound = mass.clone();
        let ten = BigRational::from_integer(BigInt::from(10));
        // one spare digit keeps the enclosure strictly narrower than requested
        while &bound * &ten > *width {
            bound /= &ten;
            places += 1;
        }
        self.interval_at(places)
    }

    /// Sign of the value, decided exactly.
    pub fn signum(&self) -> Result<Ordering> {
        if self.is_rational() {
            return Ok(self.coeffs[0].cmp(&BigRational::zero()));
        }
        let zero = BigRational::zero();
        self.refine(|lo, hi| {
            if lo > &zero {
                Some(Ordering::Greater)
            } else if hi < &zero {
                Some(Ordering::Less)
            } else {
                None
            }
        })
    }

    pub fn cmp_exact(&self, other: &ExactReal) -> Result<Ordering> {
        self.try_sub(other)?.signum()
    }

    /// Runs interval refinement over a doubling ladder of decimal places until `decide`
    /// returns a verdict, failing with `IndependenceViolation` past the field's cap.
    fn refine<T>(&self, decide: impl Fn(&BigRational, &BigRational) -> Option<T>) -> Result<T> {
        let cap = self.field.usable_digits();
        let mut places = 20usize.min(cap);
        loop {
            let (lo, hi) = self.interval_at(places)?;
            if let Some(v) = decide(&lo, &hi) {
                return Ok(v);
            }
            if places >= cap {
                return Err(Error::IndependenceViolation { what: self.to_string(), digits: cap });
            }
            places = (places * 2).min(cap);
        }
    }

    /// `floor(self)`, exact.
    pub fn floor(&self) -> Result<BigInt> {
        if self.is_rational() {
            return Ok(self.coeffs[0].floor().to_integer());
        }
        self.refine(|lo, hi| {
            // demand a strict enclosure so an exactly rational value is never accepted
            let f = lo.floor().to_integer();
            let fr = BigRational::from_integer(f.clone());
            (*lo > fr && *hi < fr + BigRational::one()).then_some(f)
        })
    }

    pub fn floor_i64(&self) -> Result<i64> {
        self.floor()?
            .to_i64()
            .ok_or_else(|| Error::ResourceLimit(format!("floor of {} exceeds i64", self)))
    }

    pub fn ceil(&self) -> Result<BigInt> {
        Ok(-(self.neg_ref().floor()?))
    }

    /// `self - floor(self)`, an element of `[0, 1)`.
    pub fn frac(&self) -> Result<ExactReal> {
        let f = self.floor()?;
        Ok(self.add_rational(&BigRational::from_integer(-f)))
    }

    fn neg_ref(&self) -> ExactReal {
        self.map(|c| -c)
    }

    /// Midpoint approximation; adequate for reporting, never for decisions.
    pub fn to_f64(&self) -> f64 {
        match self.interval_at(24) {
            Ok((lo, hi)) => ((lo + hi) / BigRational::from_integer(2.into())).to_f64().unwrap_or(f64::NAN),
            Err(_) => self.interval_at(self.field.usable_digits().min(17)).map_or(f64::NAN, |(lo, _)| {
                lo.to_f64().unwrap_or(f64::NAN)
            }),
        }
    }

    /// Least common multiple of the denominators of all coordinates.
    pub fn denominator_lcm(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }
}

/// Gaussian elimination on an augmented n x (n+1) matrix; `None` when singular.
pub(crate) fn solve_rational(mut m: Vec<Vec<BigRational>>) -> Option<Vec<BigRational>> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v /= &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let (src, dst) = if r < col {
                    let (a, b) = m.split_at_mut(col);
                    (&b[0], &mut a[r])
                } else {
                    let (a, b) = m.split_at_mut(r);
                    (&a[col], &mut b[0])
                };
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    *d -= &f * s;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

impl PartialEq for ExactReal {
    fn eq(&self, other: &Self) -> bool {
        self.same_field(other) && self.coeffs == other.coeffs
    }
}

impl Eq for ExactReal {}

impl fmt::Debug for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactReal({})", self)
    }
}

impl fmt::Display for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let name = &self.field.basis_names()[i];
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            if i == 0 {
                write!(f, "{}", mag)?;
            } else if mag.is_one() {
                write!(f, "{}", name)?;
            } else {
                write!(f, "{}*{}", mag, name)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

// Operator forms panic on mixed fields; use `field_arith` or the `try_` methods to get an error.
macro_rules! binop {
    ($tr:ident, $m:ident, $try:ident) => {
        impl<'a> $tr<&'a ExactReal> for &'a ExactReal {
            type Output = ExactReal;
            fn $m(self, rhs: &'a ExactReal) -> ExactReal {
                self.$try(rhs).expect("operands from different number fields")
            }
        }
        impl $tr<ExactReal> for ExactReal {
            type Output = ExactReal;
            fn $m(self, rhs: ExactReal) -> ExactReal {
                (&self).$m(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Neg for &ExactReal {
    type Output = ExactReal;
    fn neg(self) -> ExactReal {
        self.neg_ref()
    }
}

impl Neg for ExactReal {
    type Output = ExactReal;
    fn neg(self) -> ExactReal {
        self.neg_ref()
    }
}
