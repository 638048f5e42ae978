use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::beatty::{partition_rational_pair, BeattyPartition, BeattySequence};
use crate::bohr::{theoretical_density, DensityMethod};
use crate::error::{Error, Result};
use crate::multfunc::{primes_up_to, Family, MultiplicativeFunction};
use crate::realfield::ExactReal;

/// Primes checked when deciding whether a custom function is ±1-valued.
const UNIMODULAR_CHECK: u64 = 1000;

/// Predicted limit of `E^log f(⌊α₁n+β₁⌋) f(⌊α₂n+β₂⌋)` when `α₁/α₂ = p/q`.
#[derive(Clone, Debug)]
pub struct RationalPrediction {
    pub p: u64,
    pub q: u64,
    /// `α₁ = pθ`, `α₂ = qθ`.
    pub theta: ExactReal,
    pub value: f64,
    /// Exact density of the piece where `p⌊α₂n+β₂⌋ = q⌊α₁n+β₁⌋`.
    pub b0_density: ExactReal,
    /// That piece is infinite, so `⌊α₁m+β₁⌋/⌊α₂m+β₂⌋ = p/q` infinitely often.
    pub b0_infinite: bool,
    /// `f` takes only the values ±1, for which the prediction is exact.
    pub unimodular: bool,
    pub partition: BeattyPartition,
    pub note: String,
}

fn unimodular(f: &MultiplicativeFunction) -> bool {
    match f.family() {
        Family::Liouville | Family::Constant => true,
        Family::Coprime(m) => *m == 1,
        Family::RealCharacter { .. } => false,
        Family::Custom => primes_up_to(UNIMODULAR_CHECK)
            .into_iter()
            .all(|p| (1..=3).all(|k| f.prime_power(p, k).abs() == 1.0)),
    }
}

pub fn rational_limit_predict(
    f: &MultiplicativeFunction,
    s1: &BeattySequence,
    s2: &BeattySequence,
) -> Result<RationalPrediction> {
    let ratio = s1.alpha().try_div(s2.alpha())?.to_rational().ok_or(Error::IrrationalRatio)?;
    if !ratio.is_positive() {
        return Err(Error::InvalidArgument("slopes must be positive".into()));
    }
    let (p, q) = match (ratio.numer().to_u64(), ratio.denom().to_u64()) {
        (Some(p), Some(q)) => (p, q),
        _ => return Err(Error::InvalidArgument(format!("slope ratio {} too large", ratio))),
    };
    if f.vanishes_somewhere(UNIMODULAR_CHECK) {
        return Err(Error::VanishingFunction(f.name().to_string()));
    }
    if !f.completely_multiplicative() {
        return Err(Error::InvalidArgument(format!("`{}` is not completely multiplicative", f.name())));
    }
    let theta = s1.alpha().mul_rational(&BigRational::new(1.into(), p.into()));
    let partition = partition_rational_pair(p, q, &theta, s1.beta(), s2.beta())?;
    let mut b0 = ExactReal::zero(theta.field());
    if let Some(piece) = partition.pieces.iter().find(|pc| pc.offset == 0) {
        for b in &piece.bohr_sets {
            match theoretical_density(b)?.method {
                DensityMethod::Theoretical { exact } => b0 = &b0 + &exact,
                DensityMethod::Empirical { .. } => unreachable!("theoretical density is exact"),
            }
        }
    }
    let infinite = !b0.is_zero();
    let value = f.eval(p as i64) * f.eval(q as i64) * b0.to_f64();
    let uni = unimodular(f);
    let mut note = format!("f({})f({}) * density(B0) = {} * {}", p, q, f.eval(p as i64) * f.eval(q as i64), b0);
    if !uni {
        note.push_str("; f is not ±1-valued, so f(x)f(y) on B0 need not equal f(p)f(q): prediction is heuristic");
    }
    Ok(RationalPrediction { p, q, theta, value, b0_density: b0, b0_infinite: infinite, unimodular: uni, partition, note })
}

impl RationalPrediction {
    /// Density as an exact rational when `θ` is rational or the cell ends are.
    pub fn b0_rational(&self) -> Option<BigRational> {
        self.b0_density.to_rational()
    }

    pub fn is_trivial(&self) -> bool {
        self.b0_rational().is_some_and(|d| d.is_one() || d.is_zero())
    }
}
