use super::character::{characters_mod, DirichletCharacter};
use super::function::MultiplicativeFunction;
use super::sieve::primes_up_to;
use crate::averaging::Compensated;
use crate::error::{Error, Result};

/// `Σ_{p ≤ limit} (1 − Re f(p) conj χ(p)) / p`.
pub fn pretentious_distance(f: &MultiplicativeFunction, chi: &DirichletCharacter, limit: u64) -> Result<f64> {
    if limit < 2 {
        return Err(Error::InvalidArgument("pretentious distance needs limit >= 2".into()));
    }
    Ok(distance_series(f, chi, &[limit])[0].1)
}

/// Partial sums at each limit of an ascending ladder, in one pass over the primes.
pub fn distance_series(f: &MultiplicativeFunction, chi: &DirichletCharacter, limits: &[u64]) -> Vec<(u64, f64)> {
    let top = limits.iter().copied().max().unwrap_or(2);
    let primes = primes_up_to(top);
    let mut acc = Compensated::default();
    let mut out = Vec::with_capacity(limits.len());
    let mut it = primes.iter().peekable();
    for &x in limits {
        while let Some(&&p) = it.peek() {
            if p > x {
                break;
            }
            let fp = f.prime_power(p, 1);
            let term = 1.0 - fp * chi.value(p as i64).re;
            acc.add(term / p as f64);
            it.next();
        }
        out.push((x, acc.value()));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pretentiousness {
    LikelyPretentious,
    LikelyNonPretentious,
}

/// Heuristic classification from finite partial sums; never a proof.
#[derive(Clone, Debug)]
pub struct PretentiousReport {
    pub verdict: Pretentiousness,
    /// Modulus and index (within `characters_mod`) of the closest character.
    pub closest: (u64, usize),
    /// Distance series against the closest character.
    pub series: Vec<(u64, f64)>,
    /// Growth of the closest series across the ladder, relative to `log log`.
    pub growth_ratio: f64,
    pub caveat: &'static str,
}

pub const CAVEAT: &str = "finite partial sums cannot prove divergence; verdict is heuristic";

/// Scans characters of modulus up to `max_modulus`, picks the one minimising the
/// distance at the top of the ladder, and compares its growth over the ladder with
/// the growth of `Σ 1/p ≈ log log x`. Growth above `threshold` times that is read as
/// non-pretentious.
pub fn classify(
    f: &MultiplicativeFunction,
    max_modulus: u64,
    limits: &[u64],
    threshold: f64,
) -> Result<PretentiousReport> {
    if limits.len() < 2 || limits.windows(2).any(|w| w[0] >= w[1]) || limits[0] < 2 {
        return Err(Error::InvalidArgument("need an increasing ladder of at least two limits >= 2".into()));
    }
    let mut best: Option<((u64, usize), Vec<(u64, f64)>)> = None;
    for q in 1..=max_modulus {
        for (i, chi) in characters_mod(q)?.iter().enumerate() {
            let s = distance_series(f, chi, limits);
            let better = match &best {
                None => true,
                Some((_, b)) => s.last().unwrap().1 < b.last().unwrap().1 - 1e-12,
            };
            if better {
                best = Some(((q, i), s));
            }
        }
    }
    let (closest, series) = best.expect("modulus 1 always contributes");
    let first = limits[0] as f64;
    let last = *limits.last().unwrap() as f64;
    let reference = last.ln().ln() - first.ln().ln();
    let growth = series.last().unwrap().1 - series[0].1;
    let growth_ratio = growth / reference;
    let verdict = if growth_ratio > threshold {
        Pretentiousness::LikelyNonPretentious
    } else {
        Pretentiousness::LikelyPretentious
    };
    Ok(PretentiousReport { verdict, closest, series, growth_ratio, caveat: CAVEAT })
}
