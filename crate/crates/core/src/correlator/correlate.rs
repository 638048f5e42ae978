use std::collections::HashMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::averaging::{checkpoint_series_ranges, harmonic_number, AverageSeries, RangeSums};
use crate::beatty::BeattySequence;
use crate::bohr::BohrSet;
use crate::error::{Error, Result};
use crate::multfunc::{memory_budget, Family, FunctionTable, MultiplicativeFunction};
use crate::realfield::{AffineForm, ExactReal, FloorStepper};

/// Slack on `|value| ≤ 1` allowed for rounding.
pub const BOUND_SLACK: f64 = 1e-9;

/// One factor `f(⌊αn + β⌋)` of a correlation.
#[derive(Clone, Debug)]
pub struct Factor {
    pub f: MultiplicativeFunction,
    pub seq: BeattySequence,
}

impl Factor {
    pub fn new(f: MultiplicativeFunction, seq: BeattySequence) -> Self {
        Factor { f, seq }
    }
}

/// `E_{n ≤ X} Π f_i(⌊α_i n + β_i⌋) · e(γn) · 1_B(n)`.
#[derive(Clone, Debug)]
pub struct CorrelationSpec {
    pub factors: Vec<Factor>,
    /// `γ`; zero means no twist.
    pub twist: ExactReal,
    pub restriction: Option<BohrSet>,
    pub x_max: u64,
    pub checkpoint_ratio: f64,
}

impl CorrelationSpec {
    /// Untwisted, unrestricted, decade checkpoints.
    pub fn new(factors: Vec<Factor>, x_max: u64) -> Result<Self> {
        let first = factors.first().ok_or_else(|| Error::InvalidArgument("no factors".into()))?;
        let twist = ExactReal::zero(first.seq.field());
        Ok(CorrelationSpec { factors, twist, restriction: None, x_max, checkpoint_ratio: 10.0 })
    }

    pub fn with_twist(mut self, gamma: ExactReal) -> Self {
        self.twist = gamma;
        self
    }

    pub fn with_restriction(mut self, b: BohrSet) -> Self {
        self.restriction = Some(b);
        self
    }

    pub fn with_ratio(mut self, ratio: f64) -> Self {
        self.checkpoint_ratio = ratio;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.factors.is_empty() {
            return Err(Error::InvalidArgument("no factors".into()));
        }
        if self.x_max < 10 {
            return Err(Error::InvalidArgument("X_max must be at least 10".into()));
        }
        let zero = ExactReal::zero(self.factors[0].seq.field());
        let same = self.factors.iter().all(|fc| fc.seq.alpha().same_field(&zero))
            && self.twist.same_field(&zero)
            && self.restriction.as_ref().is_none_or(|b| b.phase()[0].same_field(&zero));
        if !same {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    /// Largest argument any factor is evaluated at.
    pub fn table_limit(&self) -> Result<u64> {
        let mut top = 1i64;
        for fc in &self.factors {
            top = top.max(fc.seq.eval(self.x_max as i64)?);
        }
        Ok(top as u64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Inconsistent => "inconsistent",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// What a run is compared against.
#[derive(Clone, Debug)]
pub enum Expectation {
    Nothing,
    /// Within `tolerance` of a predicted limit.
    Value { value: Complex64, tolerance: f64, note: String },
    /// At most `threshold` in modulus and not growing over the last three decade
    /// checkpoints by more than `slack`.
    Small { threshold: f64, slack: f64 },
}

#[derive(Clone, Debug)]
pub struct CorrelationReport {
    pub series: AverageSeries,
    /// Logarithmic averages divided by `H_X` instead of `ln X`, per checkpoint.
    pub normalized: Vec<Complex64>,
    /// `(1/ln X) Σ a(n)/n` at `X_max`.
    pub final_value: Complex64,
    /// `(1/H_X) Σ a(n)/n` at `X_max`; the value verdicts use.
    pub final_normalized: Complex64,
    pub predicted_value: Option<Complex64>,
    pub provenance: Option<String>,
    pub verdict: Verdict,
    pub tolerance: Option<f64>,
    pub note: String,
}

impl CorrelationReport {
    pub fn from_series(series: AverageSeries) -> Self {
        let normalized: Vec<Complex64> = series
            .checkpoints
            .iter()
            .zip(&series.log_values)
            .map(|(&x, v)| v * ((x as f64).ln() / harmonic_number(x)))
            .collect();
        CorrelationReport {
            final_value: series.last_log().unwrap_or_default(),
            final_normalized: normalized.last().copied().unwrap_or_default(),
            normalized,
            series,
            predicted_value: None,
            provenance: None,
            verdict: Verdict::Inconclusive,
            tolerance: None,
            note: "no expectation supplied".into(),
        }
    }

    /// Largest `|value|` over all checkpoints of the `H_X`-normalised and natural
    /// averages (the `ln X` one exceeds 1 for `f ≡ 1`).
    pub fn max_modulus(&self) -> f64 {
        self.normalized.iter().chain(&self.series.natural_values).map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `(X, |value|)` at checkpoints that are powers of ten.
    pub fn decade_moduli(&self) -> Vec<(u64, f64)> {
        self.series
            .checkpoints
            .iter()
            .zip(&self.normalized)
            .filter(|(&x, _)| is_power_of_ten(x))
            .map(|(&x, v)| (x, v.norm()))
            .collect()
    }

    pub fn judge(&mut self, e: &Expectation) {
        match e {
            Expectation::Nothing => {
                self.verdict = Verdict::Inconclusive;
                self.tolerance = None;
                self.note = "no expectation supplied".into();
            }
            Expectation::Value { value, tolerance, note } => {
                let d = (self.final_normalized - value).norm();
                self.predicted_value = Some(*value);
                self.provenance = Some(note.clone());
                self.tolerance = Some(*tolerance);
                self.verdict = if d <= *tolerance { Verdict::Consistent } else { Verdict::Inconsistent };
                self.note = format!("|empirical - predicted| = {:.6} against tolerance {}", d, tolerance);
            }
            Expectation::Small { threshold, slack } => {
                self.tolerance = Some(*threshold);
                let m = self.final_normalized.norm();
                let decades = self.decade_moduli();
                let tail = &decades[decades.len().saturating_sub(3)..];
                let monotone = tail.windows(2).all(|w| w[1].1 <= w[0].1 + slack);
                self.verdict = if m <= *threshold && tail.len() == 3 && monotone {
                    Verdict::Consistent
                } else {
                    Verdict::Inconclusive
                };
                let trend: Vec<String> = tail.iter().map(|(x, v)| format!("{}:{:.4}", x, v)).collect();
                self.note = format!(
                    "|final| = {:.6} against threshold {}; last decades [{}] {} within slack {}",
                    m,
                    threshold,
                    trend.join(", "),
                    if monotone && tail.len() == 3 { "non-increasing" } else { "not non-increasing" },
                    slack
                );
            }
        }
    }
}

fn is_power_of_ten(mut x: u64) -> bool {
    while x >= 10 && x % 10 == 0 {
        x /= 10;
    }
    x == 1
}

/// Bytes a table of `f` up to `limit` occupies.
fn table_bytes(f: &MultiplicativeFunction, limit: u64) -> u64 {
    match f.family() {
        Family::Constant => 0,
        Family::Liouville => limit.div_ceil(8),
        _ => 8 * (limit + 1),
    }
}

/// Tabulates each distinct function (by family and name) once, to the largest limit
/// any caller asks for, after checking the total against the memory budget.
pub(crate) fn tabulate_shared(requests: &[(&MultiplicativeFunction, u64)]) -> Result<Vec<FunctionTable>> {
    let key = |f: &MultiplicativeFunction| format!("{:?}/{}", f.family(), f.name());
    let mut distinct: HashMap<String, (&MultiplicativeFunction, u64)> = HashMap::new();
    for &(f, l) in requests {
        let e = distinct.entry(key(f)).or_insert((f, 0));
        e.1 = e.1.max(l);
    }
    let bytes = distinct.values().fold(0u64, |s, &(f, l)| s.saturating_add(table_bytes(f, l)));
    let budget = memory_budget();
    if bytes > budget {
        return Err(Error::ResourceLimit(format!("function tables need {} bytes, budget is {}", bytes, budget)));
    }
    let mut built: HashMap<String, FunctionTable> = HashMap::new();
    requests
        .iter()
        .map(|(f, _)| {
            let k = key(f);
            if let Some(t) = built.get(&k) {
                return Ok(t.clone());
            }
            let t = f.tabulate(distinct[&k].1)?;
            built.insert(k, t.clone());
            Ok(t)
        })
        .collect()
}

/// Sums of the summand over `a..=b` with one floor stepper per factor.
fn range_pass(
    forms: &[AffineForm],
    tables: &[FunctionTable],
    twist: Option<&AffineForm>,
    restriction: Option<&BohrSet>,
    a: u64,
    b: u64,
) -> Result<RangeSums> {
    let mut steppers: Vec<FloorStepper> = forms.iter().map(|f| FloorStepper::new(f.clone(), a as i64)).collect();
    let mut sums = RangeSums::default();
    for n in a..=b {
        let mut prod = 1.0;
        for (s, t) in steppers.iter_mut().zip(tables) {
            prod *= t.get(s.next_floor()?);
        }
        if prod == 0.0 {
            continue;
        }
        if let Some(bs) = restriction {
            if !bs.contains(n as i64)? {
                continue;
            }
        }
        match twist {
            None => sums.push_real(n, prod),
            Some(g) => {
                let x = g.floor_and_frac(n as i64)?.1.to_f64();
                sums.push(n, Complex64::from_polar(prod, TAU * x));
            }
        }
    }
    Ok(sums)
}

/// Streams the correlation once over `1..=X_max`, emitting both averages at every
/// checkpoint.
pub fn correlate(spec: &CorrelationSpec) -> Result<CorrelationReport> {
    spec.validate()?;
    let limit = spec.table_limit()?;
    let requests: Vec<(&MultiplicativeFunction, u64)> = spec.factors.iter().map(|fc| (&fc.f, limit)).collect();
    let tables = tabulate_shared(&requests)?;
    let forms: Vec<AffineForm> = spec.factors.iter().map(|fc| fc.seq.form().clone()).collect();
    let twist = if spec.twist.is_zero() {
        None
    } else {
        Some(AffineForm::new(&spec.twist, &ExactReal::zero(spec.twist.field()))?)
    };
    let series = checkpoint_series_ranges(spec.x_max, spec.checkpoint_ratio, |a, b| {
        range_pass(&forms, &tables, twist.as_ref(), spec.restriction.as_ref(), a, b)
    })?;
    Ok(CorrelationReport::from_series(series))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realfield::NumberField;

    fn seq(f: &std::sync::Arc<NumberField>, a: &str, b: &str) -> BeattySequence {
        BeattySequence::new(ExactReal::parse(f, a).unwrap(), ExactReal::parse(f, b).unwrap()).unwrap()
    }

    #[test]
    fn constant_one_is_one() {
        let f = NumberField::multiquadratic(&[2]).unwrap();
        let spec = CorrelationSpec::new(vec![Factor::new(MultiplicativeFunction::one(), seq(&f, "sqrt2", "0"))], 10_000)
            .unwrap();
        let rep = correlate(&spec).unwrap();
        assert!((rep.final_normalized.re - 1.0).abs() < 1e-12);
        let inflation = harmonic_number(10_000) / (10_000f64).ln();
        assert!((rep.final_value.re - inflation).abs() < 1e-12);
        assert_eq!(rep.series.checkpoints, vec![10, 100, 1000, 10_000]);
    }

    #[test]
    fn trivial_rational_case_cancels() {
        let f = NumberField::multiquadratic(&[2]).unwrap();
        let l = MultiplicativeFunction::liouville();
        let spec = CorrelationSpec::new(
            vec![Factor::new(l.clone(), seq(&f, "1", "0")), Factor::new(l, seq(&f, "1", "0"))],
            100_000,
        )
        .unwrap();
        let mut rep = correlate(&spec).unwrap();
        rep.judge(&Expectation::Value { value: Complex64::new(1.0, 0.0), tolerance: 1e-3, note: "λ² = 1".into() });
        assert_eq!(rep.verdict, Verdict::Consistent);
    }

    #[test]
    fn twist_by_an_integer_is_no_twist() {
        let f = NumberField::multiquadratic(&[2]).unwrap();
        let base = CorrelationSpec::new(vec![Factor::new(MultiplicativeFunction::liouville(), seq(&f, "sqrt2", "1/3"))], 5000)
            .unwrap();
        let plain = correlate(&base).unwrap();
        let twisted = correlate(&base.clone().with_twist(ExactReal::from_int(&f, 3))).unwrap();
        assert!((plain.final_value - twisted.final_value).norm() < 1e-12);
    }

    #[test]
    fn small_expectation_reads_decades() {
        let f = NumberField::multiquadratic(&[2]).unwrap();
        let spec = CorrelationSpec::new(vec![Factor::new(MultiplicativeFunction::one(), seq(&f, "sqrt2", "0"))], 10_000)
            .unwrap();
        let mut rep = correlate(&spec).unwrap();
        rep.judge(&Expectation::Small { threshold: 0.1, slack: 0.02 });
        assert_eq!(rep.verdict, Verdict::Inconclusive);
        assert_eq!(rep.decade_moduli().len(), 4);
        assert!(is_power_of_ten(1) && is_power_of_ten(1000) && !is_power_of_ten(2000));
    }

    #[test]
    fn memory_budget_is_enforced() {
        let big = MultiplicativeFunction::coprime_to(2);
        let e = tabulate_shared(&[(&big, u64::MAX / 16)]).unwrap_err();
        assert!(matches!(e, Error::ResourceLimit(_)));
    }
}
