use std::cmp::Ordering;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;

use super::decompose::{rational_period_weights, remove_rational_dependencies};
use super::fejer;
use super::set::BohrSet;
use crate::error::{Error, Result};
use crate::realfield::{AffineForm, ExactReal, NumberField};

/// Largest Fejér order tried before giving up.
pub const MAX_ORDER: usize = 1 << 16;
/// Default cap on the number of materialised frequencies.
pub const MAX_TERMS: usize = 1 << 22;

/// One term `c · e(γ n)`.
#[derive(Clone, Debug)]
pub struct TrigTerm {
    pub frequency: ExactReal,
    pub coefficient: Complex64,
}

/// Evaluates a list of terms at integers with certified fractional parts.
#[derive(Clone, Debug)]
pub(crate) struct TermEvaluator {
    terms: Vec<(AffineForm, Complex64)>,
}

impl TermEvaluator {
    pub(crate) fn new(terms: &[TrigTerm]) -> Result<Self> {
        let terms = terms
            .iter()
            .map(|t| {
                let zero = ExactReal::zero(t.frequency.field());
                Ok((AffineForm::new(&t.frequency, &zero)?, t.coefficient))
            })
            .collect::<Result<_>>()?;
        Ok(TermEvaluator { terms })
    }

    /// `eval(start + i)` for `i = 0..len`, stepping each phase by multiplication.
    pub(crate) fn eval_range(&self, start: i64, len: usize) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for (form, c) in &self.terms {
            let (_, fr) = form.floor_and_frac(start)?;
            let (_, step) = form.floor_and_frac(1)?;
            let step = fejer::e(step.to_f64());
            let mut z = c * fejer::e(fr.to_f64());
            for o in out.iter_mut() {
                *o += z;
                z *= step;
            }
        }
        Ok(out)
    }

    pub(crate) fn eval(&self, n: i64) -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        for (form, c) in &self.terms {
            let (_, fr) = form.floor_and_frac(n)?;
            s += c * fejer::e(fr.to_f64());
        }
        Ok(s)
    }
}

/// One box piece of `U'(a)`: smoothed coefficients for `h = 0..=K` per side, `None`
/// for sides covering the whole circle.
#[derive(Clone, Debug)]
struct TensorPiece {
    sides: Vec<Option<Vec<Complex64>>>,
}

impl TensorPiece {
    fn eval(&self, x: &[f64]) -> f64 {
        self.sides
            .iter()
            .zip(x)
            .map(|(s, &xi)| s.as_ref().map_or(1.0, |c| fejer::eval_real(c, xi)))
            .product()
    }

    fn coefficient(&self, k: &[i64]) -> Complex64 {
        let mut v = Complex64::new(1.0, 0.0);
        for (s, &ki) in self.sides.iter().zip(k) {
            match s {
                None if ki != 0 => return Complex64::new(0.0, 0.0),
                None => {}
                Some(c) => {
                    let h = ki.unsigned_abs() as usize;
                    let ch = if ki >= 0 { c[h] } else { c[h].conj() };
                    v *= ch;
                }
            }
        }
        v
    }
}

/// `1_B(n) = T(n) + Σ_a t_a 1_{n ≡ a (q)} + E(n)`, with `T` a trigonometric
/// polynomial in the frequencies `k·ρ + r/q` and `limsup E|E| <= error_bound`.
#[derive(Clone, Debug)]
pub struct TrigApproximation {
    field: Arc<NumberField>,
    pub rho: Vec<ExactReal>,
    pub q: u64,
    /// Fejér order `K`; zero when no side needs smoothing.
    pub order: usize,
    pieces: Vec<Vec<TensorPiece>>,
    /// Zero-frequency mass of the tensor part in each residue class.
    mass: Vec<f64>,
    /// Terms kept in flat form (amalgamated periodic part).
    pub extra: Vec<TrigTerm>,
    /// `t_a` for `a = 0..q`; empty once amalgamated.
    pub periodic: Vec<f64>,
    pub error_bound: f64,
    /// Bound on every `|c(k)|`.
    pub coefficient_bound: f64,
    /// Bound on `|(1/q) Σ t_a - δ_B|`.
    pub periodic_mass_error: f64,
    pub empirical_l1: Option<f64>,
    forms: Vec<AffineForm>,
    extra_eval: TermEvaluator,
}

fn is_full(lo: &ExactReal, hi: &ExactReal) -> bool {
    lo.is_zero() && *hi == ExactReal::one(hi.field())
}

pub fn trig_approximation(b: &BohrSet, epsilon: f64) -> Result<TrigApproximation> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1/2), got {}", epsilon)));
    }
    let field = b.field().clone();
    let dec = match remove_rational_dependencies(b) {
        Ok(d) => d,
        Err(Error::FullyRationalPhase) => {
            let periodic: Vec<f64> = rational_period_weights(b)?.into_iter().map(|t| t as u8 as f64).collect();
            let density = periodic.iter().sum::<f64>() / periodic.len() as f64;
            return Ok(TrigApproximation {
                field,
                rho: Vec::new(),
                q: periodic.len() as u64,
                order: 0,
                pieces: Vec::new(),
                mass: Vec::new(),
                extra: Vec::new(),
                periodic,
                error_bound: 0.0,
                coefficient_bound: density,
                periodic_mass_error: 0.0,
                empirical_l1: None,
                forms: Vec::new(),
                extra_eval: TermEvaluator { terms: Vec::new() },
            });
        }
        Err(e) => return Err(e),
    };
    let q = dec.q as usize;
    // (lo, hi) per non-full side, None for full sides; degenerate pieces dropped
    let mut boxes: Vec<Vec<Vec<Option<(f64, f64)>>>> = Vec::with_capacity(q);
    let mut mass = vec![0.0; q];
    for (a, ps) in dec.pieces.iter().enumerate() {
        let mut list = Vec::new();
        for p in ps {
            let sides = p.intervals().ok_or_else(|| {
                Error::NotBoxDecomposable(format!("residue {} has a non-box piece of dimension {}", a, p.dim()))
            })?;
            if p.volume()?.signum()? != Ordering::Greater {
                continue;
            }
            mass[a] += p.volume()?.to_f64();
            list.push(
                sides
                    .iter()
                    .map(|s| (!is_full(s.lo.value(), s.hi.value())).then(|| s.to_f64()))
                    .collect::<Vec<_>>(),
            );
        }
        boxes.push(list);
    }
    // least power of two whose summed per-side bound is within epsilon
    let total_error = |k: usize| -> f64 {
        let s: f64 = boxes
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .map(|&(lo, hi)| fejer::interval_error(k).min(2.0 * (hi - lo)))
            .sum();
        s / q as f64
    };
    let needs_smoothing = boxes.iter().flatten().flatten().any(Option::is_some);
    let mut order = 0;
    if needs_smoothing {
        order = 1;
        while total_error(order) > epsilon {
            order *= 2;
            if order > MAX_ORDER {
                return Err(Error::ResourceLimit(format!("Fejér order above {} needed for epsilon {}", MAX_ORDER, epsilon)));
            }
        }
    }
    let error_bound = if needs_smoothing { total_error(order) } else { 0.0 };
    let pieces: Vec<Vec<TensorPiece>> = boxes
        .iter()
        .map(|list| {
            list.iter()
                .map(|sides| TensorPiece {
                    sides: sides.iter().map(|s| s.map(|(lo, hi)| fejer::smoothed_interval(lo, hi, order))).collect(),
                })
                .collect()
        })
        .collect();
    let zero = ExactReal::zero(&field);
    let forms = dec.rho.iter().map(|r| AffineForm::new(r, &zero)).collect::<Result<_>>()?;
    let density = mass.iter().sum::<f64>() / q as f64;
    Ok(TrigApproximation {
        field,
        rho: dec.rho,
        q: dec.q,
        order,
        pieces,
        periodic: mass.clone(),
        mass,
        extra: Vec::new(),
        error_bound,
        coefficient_bound: density,
        periodic_mass_error: 0.0,
        empirical_l1: None,
        forms,
        extra_eval: TermEvaluator { terms: Vec::new() },
    })
}

impl TrigApproximation {
    /// A purely flat approximation, merging terms with equal frequency.
    pub(crate) fn from_terms(field: &Arc<NumberField>, terms: Vec<TrigTerm>, error_bound: f64) -> Result<Self> {
        let mut merged: Vec<TrigTerm> = Vec::new();
        let mut index = std::collections::HashMap::new();
        for t in terms {
            match index.get(t.frequency.coeffs()) {
                Some(&i) => {
                    let m: &mut TrigTerm = &mut merged[i];
                    m.coefficient += t.coefficient;
                }
                None => {
                    index.insert(t.frequency.coeffs().to_vec(), merged.len());
                    merged.push(t);
                }
            }
        }
        merged.retain(|t| t.coefficient.norm() > 0.0);
        let coefficient_bound = merged.iter().map(|t| t.coefficient.norm()).fold(0.0, f64::max);
        let extra_eval = TermEvaluator::new(&merged)?;
        Ok(TrigApproximation {
            field: field.clone(),
            rho: Vec::new(),
            q: 1,
            order: 0,
            pieces: Vec::new(),
            mass: Vec::new(),
            extra: merged,
            periodic: Vec::new(),
            error_bound,
            coefficient_bound,
            periodic_mass_error: 0.0,
            empirical_l1: None,
            forms: Vec::new(),
            extra_eval,
        })
    }

    fn residue(&self, n: i64) -> usize {
        n.rem_euclid(self.q as i64) as usize
    }

    /// `T(n)`, the trigonometric part.
    pub fn trig_value(&self, n: i64) -> Result<Complex64> {
        let mut s = self.extra_eval.eval(n)?;
        if !self.pieces.is_empty() {
            let a = self.residue(n);
            if !self.pieces[a].is_empty() {
                let x: Vec<f64> =
                    self.forms.iter().map(|f| f.floor_and_frac(n).map(|(_, v)| v.to_f64())).collect::<Result<_>>()?;
                let t: f64 = self.pieces[a].iter().map(|p| p.eval(&x)).sum();
                s += t - self.mass[a];
            }
        }
        Ok(s)
    }

    pub fn periodic_value(&self, n: i64) -> f64 {
        if self.periodic.is_empty() {
            0.0
        } else {
            self.periodic[self.residue(n)]
        }
    }

    /// `T(n) + Σ_a t_a 1_{n ≡ a}`.
    pub fn value(&self, n: i64) -> Result<Complex64> {
        Ok(self.trig_value(n)? + self.periodic_value(n))
    }

    /// `value(start + i)` for `i = 0..len`; phases drift by about `len · 1e-16`.
    pub fn values(&self, start: i64, len: usize) -> Result<Vec<Complex64>> {
        let mut out = self.extra_eval.eval_range(start, len)?;
        if !self.pieces.is_empty() || !self.periodic.is_empty() {
            for (i, o) in out.iter_mut().enumerate() {
                let n = start + i as i64;
                *o += self.value(n)? - self.extra_eval.eval(n)?;
            }
        }
        Ok(out)
    }

    /// Ranges of `k_i` with possibly nonzero coefficients.
    fn k_ranges(&self) -> Vec<i64> {
        (0..self.rho.len())
            .map(|i| {
                let used = self.pieces.iter().flatten().any(|p| p.sides[i].is_some());
                if used {
                    self.order as i64
                } else {
                    0
                }
            })
            .collect()
    }

    /// Number of frequencies in the flattened form.
    pub fn frequency_count(&self) -> u128 {
        let grid: u128 = self.k_ranges().iter().map(|&k| 2 * k as u128 + 1).product();
        let tensor = if self.pieces.is_empty() { 0 } else { (grid - 1) * self.q as u128 };
        tensor + self.extra.len() as u128
    }

    /// All terms of `T` with their exact frequencies; fails above `cap` terms.
    pub fn terms(&self, cap: usize) -> Result<Vec<TrigTerm>> {
        if self.frequency_count() > cap as u128 {
            return Err(Error::ResourceLimit(format!(
                "{} frequencies exceed the cap of {}",
                self.frequency_count(),
                cap
            )));
        }
        let mut out = Vec::new();
        if !self.pieces.is_empty() {
            let ranges = self.k_ranges();
            let d = ranges.len();
            let mut k: Vec<i64> = ranges.iter().map(|&r| -r).collect();
            let q = self.q as i64;
            loop {
                if k.iter().any(|&ki| ki != 0) {
                    let per_a: Vec<Complex64> = self
                        .pieces
                        .iter()
                        .map(|ps| ps.iter().map(|p| p.coefficient(&k)).sum())
                        .collect();
                    let base = k
                        .iter()
                        .zip(&self.rho)
                        .fold(ExactReal::zero(&self.field), |s, (&ki, r)| &s + &r.mul_int(ki));
                    for r in 0..q {
                        let c: Complex64 = per_a
                            .iter()
                            .enumerate()
                            .map(|(a, v)| v * fejer::e(-((r * a as i64) % q) as f64 / q as f64))
                            .sum::<Complex64>()
                            / q as f64;
                        if c.norm() == 0.0 {
                            continue;
                        }
                        let frequency = base.add_rational(&BigRational::new(BigInt::from(r), BigInt::from(q)));
                        out.push(TrigTerm { frequency, coefficient: c });
                    }
                }
                let mut i = 0;
                while i < d && k[i] == ranges[i] {
                    k[i] = -ranges[i];
                    i += 1;
                }
                if i == d {
                    break;
                }
                k[i] += 1;
            }
        }
        out.extend(self.extra.iter().cloned());
        Ok(out)
    }

    /// Folds the periodic part into frequencies `r/q` with coefficients
    /// `(1/q) Σ_a t_a e(-ra/q)`.
    pub fn amalgamate(mut self) -> Result<Self> {
        if self.periodic.is_empty() {
            return Ok(self);
        }
        let q = self.q as i64;
        for r in 0..q {
            let c: Complex64 = self
                .periodic
                .iter()
                .enumerate()
                .map(|(a, &t)| t * fejer::e(-((r * a as i64) % q) as f64 / q as f64))
                .sum::<Complex64>()
                / q as f64;
            let frequency = ExactReal::from_ratio(&self.field, r, q);
            self.extra.push(TrigTerm { frequency, coefficient: c });
        }
        self.periodic.clear();
        self.extra_eval = TermEvaluator::new(&self.extra)?;
        Ok(self)
    }

    /// `(1/X) Σ_{n=1}^{X} |1_B(n) - T(n) - periodic(n)|`, stored in `empirical_l1`.
    pub fn validate(&mut self, b: &BohrSet, x: u64) -> Result<f64> {
        if x == 0 {
            return Err(Error::InvalidArgument("validation needs X >= 1".into()));
        }
        const CHUNK: u64 = 1 << 13;
        let this = &*self;
        let sums: Vec<f64> = (0..x.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut s = 0.0;
                for n in c * CHUNK + 1..=((c + 1) * CHUNK).min(x) {
                    let ind = b.contains(n as i64)? as u8 as f64;
                    s += (this.value(n as i64)? - ind).norm();
                }
                Ok(s)
            })
            .collect::<Result<_>>()?;
        let l1 = sums.iter().sum::<f64>() / x as f64;
        self.empirical_l1 = Some(l1);
        Ok(l1)
    }
}
