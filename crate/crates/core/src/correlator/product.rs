use num_complex::Complex64;

use super::correlate::{correlate, tabulate_shared, CorrelationReport, CorrelationSpec, Expectation, Factor};
use crate::averaging::{checkpoint_series_ranges, RangeSums};
use crate::beatty::BeattySequence;
use crate::bohr::integer_relation_lattice;
use crate::error::{Error, Result};
use crate::lattice::to_i64;
use crate::multfunc::{Family, MultiplicativeFunction};
use crate::realfield::ExactReal;

/// What to do when `1, α₁, …, α_k` are rationally dependent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndependencePolicy {
    /// Fail with `DependentPhases`.
    Require,
    /// Run anyway and record the relations (for counterexamples).
    ReportOnly,
}

#[derive(Clone, Debug)]
pub struct ProductReport {
    /// Joint average, judged against the product of marginals.
    pub joint: CorrelationReport,
    /// Mean value of each `f_i` (natural average at the same `X`); for the periodic
    /// built-in families it equals the logarithmic limit and converges like `1/X`.
    pub marginals: Vec<Complex64>,
    /// `E^log f_i(n)` at `X`, `H_X`-normalised; off from the limit by `O(1/log X)`.
    pub log_marginals: Vec<Complex64>,
    pub product: Complex64,
    /// Basis of `{v : v·α ∈ Z}`; empty when independent.
    pub relations: Vec<Vec<i64>>,
}

impl ProductReport {
    pub fn independent(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn gap(&self) -> f64 {
        (self.joint.final_normalized - self.product).norm()
    }
}

fn pretentious_family(f: &MultiplicativeFunction) -> bool {
    matches!(f.family(), Family::Constant | Family::Coprime(_) | Family::RealCharacter { .. })
}

/// Compares `E^log Π f_i(⌊α_i n + β_i⌋)` with `Π E^log f_i(n)`.
pub fn verify_pretentious_product(
    fs: &[MultiplicativeFunction],
    alpha: &[ExactReal],
    beta: &[ExactReal],
    x: u64,
    tolerance: f64,
    policy: IndependencePolicy,
) -> Result<ProductReport> {
    if fs.is_empty() || fs.len() != alpha.len() || fs.len() != beta.len() {
        return Err(Error::InvalidArgument("function, slope and shift lists differ in length".into()));
    }
    if let Some(f) = fs.iter().find(|f| !pretentious_family(f)) {
        return Err(Error::InvalidArgument(format!("`{}` is not in the built-in pretentious family", f.name())));
    }
    let lattice = integer_relation_lattice(alpha)?;
    let relations = to_i64(&lattice).ok_or_else(|| Error::InvalidArgument("relation vector overflows i64".into()))?;
    if !relations.is_empty() && policy == IndependencePolicy::Require {
        return Err(Error::DependentPhases(relations));
    }
    let factors = fs
        .iter()
        .zip(alpha.iter().zip(beta))
        .map(|(f, (a, b))| Ok(Factor::new(f.clone(), BeattySequence::new(a.clone(), b.clone())?)))
        .collect::<Result<Vec<_>>>()?;
    let mut joint = correlate(&CorrelationSpec::new(factors, x)?)?;

    let tables = tabulate_shared(&fs.iter().map(|f| (f, x)).collect::<Vec<_>>())?;
    let (marginals, log_marginals): (Vec<_>, Vec<_>) = tables
        .iter()
        .map(|t| {
            let series = checkpoint_series_ranges(x, 10.0, |lo, hi| {
                let mut s = RangeSums::default();
                for n in lo..=hi {
                    s.push_real(n, t.get(n as i64));
                }
                Ok(s)
            })?;
            let rep = CorrelationReport::from_series(series);
            Ok((rep.series.last_natural().unwrap_or_default(), rep.final_normalized))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let product = marginals.iter().product();
    let mut note = String::from("product of marginal mean values at the same X");
    if !relations.is_empty() {
        note.push_str(&format!("; phases dependent, relations {:?}", relations));
    }
    joint.judge(&Expectation::Value { value: product, tolerance, note });
    Ok(ProductReport { joint, marginals, log_marginals, product, relations })
}
