use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

use crate::bohr::fejer;
use crate::bohr::{trig_approximation, BohrSet, TrigApproximation, TrigTerm, MAX_ORDER, MAX_TERMS};
use crate::error::{Error, Result};
use crate::realfield::{AffineForm, ExactReal};

/// Largest period in `m` handled by the exact DFT when `α` is rational.
pub const MAX_PERIOD: u64 = 1 << 20;

/// `N(m) = Σ_{n ∈ B, ⌊αn+β⌋ = m} e(γn)`.
#[derive(Clone, Debug)]
pub struct MultiplicityCounter {
    pub b: BohrSet,
    pub alpha: ExactReal,
    pub beta: ExactReal,
    pub gamma: ExactReal,
    /// `⌊1/α⌋`; every `m` has this many or one more preimages.
    pub n_floor: i64,
    floor: AffineForm,
    twist: AffineForm,
    everything: bool,
    /// `(α, β)` in floating point, to seed preimage searches.
    approx: (f64, f64),
}

impl MultiplicityCounter {
    pub fn new(b: BohrSet, alpha: ExactReal, beta: ExactReal, gamma: ExactReal) -> Result<Self> {
        if alpha.signum()? != Ordering::Greater {
            return Err(Error::InvalidArgument(format!("α = {} is not positive", alpha)));
        }
        let zero = ExactReal::zero(alpha.field());
        let floor = AffineForm::new(&alpha, &beta)?;
        let twist = AffineForm::new(&gamma, &zero)?;
        // ⌊1/α⌋ = max{k : kα <= 1}
        let mut n_floor = (1.0 / alpha.to_f64()).floor() as i64;
        let one = ExactReal::one(alpha.field());
        while alpha.mul_int(n_floor).cmp_exact(&one)? == Ordering::Greater {
            n_floor -= 1;
        }
        while alpha.mul_int(n_floor + 1).cmp_exact(&one)? != Ordering::Greater {
            n_floor += 1;
        }
        let everything = b.is_everything();
        let approx = (alpha.to_f64(), beta.to_f64());
        Ok(MultiplicityCounter { b, alpha, beta, gamma, n_floor, floor, twist, everything, approx })
    }

    /// The integers `n` with `⌊αn+β⌋ = m`, in increasing order.
    pub fn preimages(&self, m: i64) -> Result<std::ops::Range<i64>> {
        let est = (m as f64 - self.approx.1) / self.approx.0;
        let mut n = est.floor() as i64;
        while self.floor.floor(n)? >= m {
            n -= 1;
        }
        while self.floor.floor(n)? < m {
            n += 1;
        }
        let start = n;
        while self.floor.floor(n)? == m {
            n += 1;
        }
        Ok(start..n)
    }

    pub fn eval(&self, m: i64) -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        for n in self.preimages(m)? {
            if self.everything || self.b.contains(n)? {
                let (_, fr) = self.twist.floor_and_frac(n)?;
                s += fejer::e(fr.to_f64());
            }
        }
        Ok(s)
    }

    /// `(1/M) Σ_{m=1}^{M} |N(m) − T(m)|`.
    pub fn residual(&self, approx: &TrigApproximation, m_max: u64) -> Result<f64> {
        if m_max == 0 {
            return Err(Error::InvalidArgument("residual needs M >= 1".into()));
        }
        const CHUNK: u64 = 1 << 13;
        let sums: Vec<f64> = (0..m_max.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK + 1;
                let end = ((c + 1) * CHUNK).min(m_max);
                let vals = approx.values(start as i64, (end + 1 - start) as usize)?;
                let mut s = 0.0;
                for (m, v) in (start..=end).zip(vals) {
                    s += (self.eval(m as i64)? - v).norm();
                }
                Ok(s)
            })
            .collect::<Result<_>>()?;
        Ok(sums.iter().sum::<f64>() / m_max as f64)
    }
}

pub fn multiplicity_counter(
    b: &BohrSet,
    alpha: &ExactReal,
    beta: &ExactReal,
    gamma: &ExactReal,
    m: i64,
) -> Result<Complex64> {
    MultiplicityCounter::new(b.clone(), alpha.clone(), beta.clone(), gamma.clone())?.eval(m)
}

/// `Φ_μ(Y) = Σ_{j<N} e(μ(Y+j)) + 1[Y < {1/α}] e(μ(Y+N))`, so that a counter over all
/// of `Z` with twist `μ` equals `e(μ(m−β)/α) Φ_μ({(β−m)/α})`.
struct Phi {
    mu: f64,
    n: i64,
    cut: f64,
}

impl Phi {
    fn eval(&self, y: f64) -> Complex64 {
        self.eval_split(y, y < self.cut)
    }

    fn eval_split(&self, y: f64, below_cut: bool) -> Complex64 {
        let mut s: Complex64 = (0..self.n).map(|j| fejer::e(self.mu * (y + j as f64))).sum();
        if below_cut {
            s += fejer::e(self.mu * (y + self.n as f64));
        }
        s
    }
}

/// `μ − ⌊μ + 1/2⌋`, so `e(μn)` is unchanged on integers.
fn reduce(mu: &ExactReal) -> Result<ExactReal> {
    let half = ExactReal::from_ratio(mu.field(), 1, 2);
    let k = (mu + &half).floor_i64()?;
    Ok(mu - &ExactReal::from_int(mu.field(), k))
}

/// Approximates `N(m)` by a trigonometric polynomial in `m` with mean error below
/// `epsilon`.
pub fn counter_trig_decomposition(c: &MultiplicityCounter, epsilon: f64) -> Result<TrigApproximation> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {}", epsilon)));
    }
    let field = c.alpha.field().clone();
    let inv_alpha = ExactReal::one(&field).try_div(&c.alpha).map_err(|_| Error::FieldClosure("1/α".into()))?;
    let alpha = c.alpha.to_f64();
    // 1_B ≈ Σ c_k e(λ_k n); the n-average error scales by 1/α in m
    let (b_terms, b_error) = if c.everything {
        (vec![TrigTerm { frequency: ExactReal::zero(&field), coefficient: Complex64::one() }], 0.0)
    } else {
        let t = trig_approximation(&c.b, (alpha * epsilon / 2.0).min(0.49))?.amalgamate()?;
        (t.terms(MAX_TERMS)?, t.error_bound / alpha)
    };
    let mass: f64 = b_terms.iter().map(|t| t.coefficient.norm()).sum();
    let budget = epsilon / (4.0 * mass.max(1.0));
    let expander = PhiExpander::new(c, &inv_alpha)?;
    let mut terms = Vec::new();
    let mut error = b_error;
    for bt in &b_terms {
        let mu = reduce(&(&bt.frequency + &c.gamma))?;
        let (ts, err) = expander.expand(&mu, bt.coefficient, budget)?;
        error += bt.coefficient.norm() * err;
        terms.extend(ts);
        if terms.len() > MAX_TERMS {
            return Err(Error::ResourceLimit(format!("counter expansion exceeds {} terms", MAX_TERMS)));
        }
    }
    TrigApproximation::from_terms(&field, terms, error)
}

struct PhiExpander {
    inv_alpha: ExactReal,
    beta_over_alpha: f64,
    n: i64,
    cut: f64,
    /// `(Y_m, Y_m < {1/α})` for `m = 0..v` when `α` is rational with numerator `v`.
    period: Option<Vec<(f64, bool)>>,
}

impl PhiExpander {
    fn new(c: &MultiplicityCounter, inv_alpha: &ExactReal) -> Result<Self> {
        let cut_exact = inv_alpha.frac()?;
        let cut = cut_exact.to_f64();
        let boa = &c.beta * inv_alpha;
        let period = match c.alpha.to_rational() {
            Some(r) => {
                let v = r.numer().to_u64().filter(|&v| v <= MAX_PERIOD).ok_or_else(|| {
                    Error::ResourceLimit(format!("period {} of 1/α exceeds {}", r.numer(), MAX_PERIOD))
                })?;
                debug_assert!(r.numer().gcd(r.denom()).is_one());
                let ys = (0..v as i64)
                    .map(|m| {
                        let y = (&boa - &inv_alpha.mul_int(m)).frac()?;
                        Ok((y.to_f64(), y.cmp_exact(&cut_exact)? == Ordering::Less))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(ys)
            }
            None => None,
        };
        Ok(PhiExpander { inv_alpha: inv_alpha.clone(), beta_over_alpha: boa.to_f64(), n: c.n_floor, cut, period })
    }

    /// Terms of `coef · e(μ(m−β)/α) Φ_μ(Y_m)` and the L1 error of the expansion.
    fn expand(&self, mu: &ExactReal, coef: Complex64, budget: f64) -> Result<(Vec<TrigTerm>, f64)> {
        let muf = mu.to_f64();
        let phi = Phi { mu: muf, n: self.n, cut: self.cut };
        let lead = coef * fejer::e(-muf * self.beta_over_alpha);
        let base = mu * &self.inv_alpha;
        if let Some(ys) = &self.period {
            // Y_m has period v in m: exact DFT
            let v = ys.len() as i64;
            let vals: Vec<Complex64> = ys.iter().map(|&(y, below)| phi.eval_split(y, below)).collect();
            let mut out = Vec::new();
            for r in 0..v {
                let d: Complex64 = vals
                    .iter()
                    .enumerate()
                    .map(|(m, z)| z * fejer::e(-((r * m as i64) % v) as f64 / v as f64))
                    .sum::<Complex64>()
                    / v as f64;
                if d.norm() > 1e-15 {
                    let frequency = base.add_rational(&BigRational::new(r.into(), v.into()));
                    out.push(TrigTerm { frequency, coefficient: lead * d });
                }
            }
            return Ok((out, 0.0));
        }
        // step function on an L-grid, refined at the cut
        let grid = ((self.n + 1) as f64 * TAU * muf.abs() / budget).ceil().max(1.0) as usize;
        let mut knots: Vec<f64> = (0..=grid).map(|l| l as f64 / grid as f64).collect();
        if self.cut > 0.0 {
            let i = knots.partition_point(|&x| x < self.cut);
            if knots[i] != self.cut {
                knots.insert(i, self.cut);
            }
        }
        let values: Vec<Complex64> = knots[..knots.len() - 1].iter().map(|&x| phi.eval(x)).collect();
        let variation: f64 = (0..values.len()).map(|i| (values[(i + 1) % values.len()] - values[i]).norm()).sum();
        let mut order = 0;
        if variation > 0.0 {
            order = 1;
            while variation * fejer::first_moment_bound(order) > budget {
                order *= 2;
                if order > MAX_ORDER {
                    return Err(Error::ResourceLimit(format!("Fejér order above {} needed", MAX_ORDER)));
                }
            }
        }
        let grid_error = if muf == 0.0 { 0.0 } else { (self.n + 1) as f64 * TAU * muf.abs() / grid as f64 };
        let smooth_error = if order == 0 { 0.0 } else { variation * fejer::first_moment_bound(order) };
        let h_max = order as i64;
        let out: Vec<TrigTerm> = (-h_max..=h_max)
            .into_par_iter()
            .filter_map(|h| {
                let hat: Complex64 = knots
                    .windows(2)
                    .zip(&values)
                    .map(|(w, v)| v * fejer::interval_coefficient(w[0], w[1], h))
                    .sum();
                let c = lead * hat * fejer::weight(order, h) * fejer::e(h as f64 * self.beta_over_alpha);
                (c.norm() > 1e-15).then(|| TrigTerm { frequency: &base - &self.inv_alpha.mul_int(h), coefficient: c })
            })
            .collect();
        Ok((out, grid_error + smooth_error))
    }
}
