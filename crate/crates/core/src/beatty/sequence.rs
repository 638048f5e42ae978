use std::cmp::Ordering;
use std::sync::Arc;

use crate::bohr::{BohrSet, ConvexRegion, Interval};
use crate::error::{Error, Result};
use crate::realfield::{AffineForm, ExactReal, NumberField};

/// `n ↦ ⌊αn + β⌋` with `α > 0`.
#[derive(Clone, Debug)]
pub struct BeattySequence {
    form: AffineForm,
}

impl BeattySequence {
    pub fn new(alpha: ExactReal, beta: ExactReal) -> Result<Self> {
        if alpha.signum()? != Ordering::Greater {
            return Err(Error::InvalidArgument(format!("Beatty slope {} is not positive", alpha)));
        }
        Ok(BeattySequence { form: AffineForm::new(&alpha, &beta)? })
    }

    pub fn alpha(&self) -> &ExactReal {
        self.form.slope()
    }

    pub fn beta(&self) -> &ExactReal {
        self.form.offset()
    }

    pub fn field(&self) -> &Arc<NumberField> {
        self.form.slope().field()
    }

    pub fn form(&self) -> &AffineForm {
        &self.form
    }

    pub fn eval(&self, n: i64) -> Result<i64> {
        self.form.floor(n)
    }

    /// `{αn + β}` exactly.
    pub fn frac(&self, n: i64) -> Result<ExactReal> {
        self.form.frac_exact(n)
    }
}

pub fn beatty_eval(s: &BeattySequence, n: i64) -> Result<i64> {
    s.eval(n)
}

/// An interval condition on a fractional part `{αn + β}`, with closedness flags.
#[derive(Clone, Debug)]
pub struct FracCondition {
    pub lo: ExactReal,
    pub hi: ExactReal,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl FracCondition {
    pub fn half_open(lo: ExactReal, hi: ExactReal) -> Self {
        FracCondition { lo, hi, lo_closed: true, hi_closed: false }
    }

    pub fn open(lo: ExactReal, hi: ExactReal) -> Self {
        FracCondition { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn holds(&self, x: &ExactReal) -> Result<bool> {
        let lo = x.cmp_exact(&self.lo)?;
        let hi = x.cmp_exact(&self.hi)?;
        Ok((lo == Ordering::Greater || (lo == Ordering::Equal && self.lo_closed))
            && (hi == Ordering::Less || (hi == Ordering::Equal && self.hi_closed)))
    }

    /// Intersection with `[0,1)`, or `None` when empty.
    fn clip(&self) -> Result<Option<FracCondition>> {
        let f = self.lo.field();
        let (zero, one) = (ExactReal::zero(f), ExactReal::one(f));
        let mut c = self.clone();
        if c.lo.cmp_exact(&zero)? == Ordering::Less {
            c.lo = zero;
            c.lo_closed = true;
        }
        if c.hi.cmp_exact(&one)? != Ordering::Less {
            c.hi = one;
            c.hi_closed = false;
        }
        let empty = match c.hi.cmp_exact(&c.lo)? {
            Ordering::Less => true,
            Ordering::Equal => !(c.lo_closed && c.hi_closed),
            Ordering::Greater => false,
        };
        Ok((!empty).then_some(c))
    }

    fn shifted(&self, t: &ExactReal) -> FracCondition {
        FracCondition { lo: &self.lo + t, hi: &self.hi + t, ..*self }
    }

    fn to_interval(&self) -> Interval {
        let mut i = Interval::half_open(self.lo.clone(), self.hi.clone());
        i.lo_closed = self.lo_closed;
        i.hi_closed = self.hi_closed;
        i
    }
}

/// Rewrites `{{α_j n + β_j} ∈ I_j for all j}` as a disjoint union of homogeneous
/// Bohr sets with phase `α`, splitting each coordinate where `{α_j n}` wraps past
/// `1 - {β_j}`.
pub fn shifted_bohr_sets(
    alphas: &[ExactReal],
    betas: &[ExactReal],
    conds: &[FracCondition],
    label: &str,
) -> Result<Vec<BohrSet>> {
    if alphas.len() != betas.len() || alphas.len() != conds.len() || alphas.is_empty() {
        return Err(Error::InvalidArgument("phase, shift and condition lengths differ".into()));
    }
    let field = alphas[0].field().clone();
    // per coordinate: the ≤ 2 intervals for {α_j n}
    let mut options: Vec<Vec<FracCondition>> = Vec::with_capacity(alphas.len());
    for (b, c) in betas.iter().zip(conds) {
        let Some(c) = c.clip()? else { return Ok(Vec::new()) };
        let bf = b.frac()?;
        let one = ExactReal::one(&field);
        let wrap = &one - &bf;
        let mut opts = Vec::new();
        // x < 1 - b: x' = x + b
        let low = c.shifted(&-&bf);
        let low = FracCondition {
            hi: if low.hi.cmp_exact(&wrap)? == Ordering::Less { low.hi.clone() } else { wrap.clone() },
            hi_closed: low.hi.cmp_exact(&wrap)? == Ordering::Less && low.hi_closed,
            ..low
        };
        if let Some(v) = low.clip()? {
            opts.push(v);
        }
        // x >= 1 - b: x' = x + b - 1
        let high = c.shifted(&wrap);
        let high = match high.lo.cmp_exact(&wrap)? {
            Ordering::Less => FracCondition { lo: wrap.clone(), lo_closed: true, ..high },
            _ => high,
        };
        if let Some(v) = high.clip()? {
            opts.push(v);
        }
        if opts.is_empty() {
            return Ok(Vec::new());
        }
        options.push(opts);
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; options.len()];
    loop {
        let sides: Vec<Interval> = idx.iter().zip(&options).map(|(&i, o)| o[i].to_interval()).collect();
        let region = ConvexRegion::from_intervals(&field, sides)?;
        out.push(BohrSet::new(alphas.to_vec(), region, format!("{}#{}", label, out.len()))?);
        let mut k = 0;
        while k < idx.len() && idx[k] + 1 == options[k].len() {
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            return Ok(out);
        }
        idx[k] += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let f = NumberField::multiquadratic(&[2]).unwrap();
        let s = BeattySequence::new(ExactReal::parse(&f, "sqrt2").unwrap(), ExactReal::zero(&f)).unwrap();
        assert_eq!(beatty_eval(&s, 3).unwrap(), 4);
        let t = BeattySequence::new(ExactReal::from_ratio(&f, 3, 2), ExactReal::zero(&f)).unwrap();
        assert_eq!(t.eval(2).unwrap(), 3);
        let u = BeattySequence::new(ExactReal::parse(&f, "sqrt2").unwrap(), ExactReal::from_ratio(&f, 1, 4)).unwrap();
        assert_eq!(u.eval(0).unwrap(), 0);
        assert!(BeattySequence::new(ExactReal::parse(&f, "1 - sqrt2").unwrap(), ExactReal::zero(&f)).is_err());
    }

    #[test]
    fn shifted_sets_match_direct_condition() {
        let f = NumberField::multiquadratic(&[2, 3]).unwrap();
        let alphas = vec![ExactReal::parse(&f, "sqrt2").unwrap(), ExactReal::parse(&f, "sqrt3").unwrap()];
        let betas = vec![ExactReal::from_ratio(&f, 7, 3), ExactReal::from_ratio(&f, -1, 5)];
        let conds = vec![
            FracCondition::half_open(ExactReal::from_ratio(&f, 1, 4), ExactReal::from_ratio(&f, 9, 10)),
            FracCondition::open(ExactReal::from_ratio(&f, -1, 2), ExactReal::from_ratio(&f, 1, 2)),
        ];
        let sets = shifted_bohr_sets(&alphas, &betas, &conds, "s").unwrap();
        assert!(sets.len() <= 4);
        for n in -2000..2000 {
            let direct = (0..2).try_fold(true, |acc, j| {
                let x = (&alphas[j].mul_int(n) + &betas[j]).frac()?;
                Ok::<_, Error>(acc && conds[j].holds(&x)?)
            });
            let hits = sets.iter().filter(|b| b.contains(n).unwrap()).count();
            assert!(hits <= 1);
            assert_eq!(direct.unwrap(), hits == 1, "n = {}", n);
        }
    }
}
