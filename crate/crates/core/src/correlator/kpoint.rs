use std::cmp::Ordering;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::correlate::{correlate, tabulate_shared, CorrelationReport, CorrelationSpec, Expectation, Factor, Verdict};
use super::is_prime;
use crate::averaging::{checkpoint_series_ranges, RangeSums};
use crate::beatty::BeattySequence;
use crate::bohr::{integer_relation_lattice, theoretical_density, BohrSet, ConvexRegion, Interval};
use crate::error::{Error, Result};
use crate::lattice::to_i64;
use crate::multfunc::{Family, MultiplicativeFunction};
use crate::realfield::{AffineForm, ExactReal, FloorStepper};

/// Window for empirical densities and the exhaustive floor-identity check.
pub const IDENTITY_WINDOW: u64 = 100_000;

/// The Bohr-set scaffolding for a k-point correlation.
#[derive(Clone, Debug)]
pub struct KPointScaffold {
    /// Slopes in the caller's order.
    pub alpha: Vec<ExactReal>,
    /// Basis of `V = {v ∈ Z^k : v·α ∈ Z}`, empty when `1, α₁, …, α_k` are independent.
    pub v_basis: Vec<Vec<i64>>,
    /// lcm of the denominators of the rational parts `α″`.
    pub q: u64,
    pub r: u64,
    /// `w` in the caller's order.
    pub w: Option<Vec<BigRational>>,
    /// `permutation[j]` is the caller's index placed at position `j` (largest `w` first).
    pub permutation: Vec<usize>,
    pub witness_c: Option<(BigRational, BigRational)>,
    /// `B_r = B(α, D_r)` when `V = {0}`, else `B_{q,r}` over the relabelled `α′`.
    pub b_qr: BohrSet,
    pub theoretical_density: Option<f64>,
    pub empirical_density: f64,
}

impl KPointScaffold {
    pub fn independent(&self) -> bool {
        self.v_basis.is_empty()
    }

    /// `α` in relabelled order.
    pub fn relabeled_alpha(&self) -> Vec<ExactReal> {
        self.permutation.iter().map(|&i| self.alpha[i].clone()).collect()
    }

    /// `r` for `B_r`, `q` for `B_{q,r}`: the identities compare `⌊α_i·m·r·n⌋` with `r⌊α_i·m·n⌋`.
    pub fn base_multiplier(&self) -> u64 {
        if self.independent() {
            self.r
        } else {
            self.q
        }
    }

    pub fn density(&self) -> f64 {
        self.theoretical_density.unwrap_or(self.empirical_density)
    }
}

fn rat(n: i64, d: u64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn open(f: &std::sync::Arc<crate::realfield::NumberField>, lo: BigRational, hi: BigRational) -> Interval {
    let mut i = Interval::half_open(ExactReal::from_rational(f, lo), ExactReal::from_rational(f, hi));
    i.lo_closed = false;
    i
}

/// Checks a user-supplied `w`, reporting every failed condition.
fn check_w(w: &[BigRational], v: &[Vec<i64>], k: usize) -> Result<()> {
    let mut fails = Vec::new();
    if w.len() != k {
        fails.push(format!("w has {} entries, expected {}", w.len(), k));
    } else {
        let bad: Vec<usize> = (0..k).filter(|&i| !w[i].is_positive()).collect();
        if !bad.is_empty() {
            fails.push(format!("w is not positive at indices {:?}", bad));
        }
        for row in v {
            let dot = row.iter().zip(w).fold(BigRational::zero(), |s, (&a, b)| s + BigRational::from_integer(a.into()) * b);
            if !dot.is_zero() {
                fails.push(format!("v = {:?} has v·w = {} ≠ 0", row, dot));
            }
        }
        let max = w.iter().max().expect("k ≥ 1");
        if w.iter().filter(|x| *x == max).count() > 1 {
            fails.push(format!("maximal coefficient {} is not unique", max));
        }
    }
    if fails.is_empty() {
        Ok(())
    } else {
        Err(Error::NoValidW(fails.join("; ")))
    }
}

pub fn kpoint_scaffold(alpha: &[ExactReal], w_hint: Option<&[BigRational]>, r: u64) -> Result<KPointScaffold> {
    let k = alpha.len();
    if k == 0 {
        return Err(Error::InvalidArgument("empty slope vector".into()));
    }
    for a in alpha {
        if a.signum()? != Ordering::Greater {
            return Err(Error::InvalidArgument(format!("slope {} is not positive", a)));
        }
    }
    if alpha.iter().all(ExactReal::is_rational) {
        return Err(Error::InvalidArgument("every slope is rational".into()));
    }
    if !is_prime(r) {
        return Err(Error::InvalidArgument(format!("r = {} is not prime", r)));
    }
    let field = alpha[0].field().clone();
    let v_basis = to_i64(&integer_relation_lattice(alpha)?)
        .ok_or_else(|| Error::InvalidArgument("relation vector overflows i64".into()))?;
    let q = alpha
        .iter()
        .fold(BigInt::one(), |l, a| l.lcm(a.rational_part().denom()))
        .to_u64()
        .ok_or_else(|| Error::InvalidArgument("denominator lcm too large".into()))?;
    if let Some(w) = w_hint {
        check_w(w, &v_basis, k)?;
    } else if !v_basis.is_empty() {
        return Err(Error::WIsRequired);
    }
    let w = w_hint.map(<[BigRational]>::to_vec);
    let (permutation, witness_c, b_qr, theoretical);
    if v_basis.is_empty() {
        // D_r = (1/r², 2/r²) × (1/r, 1/r + 1/r²)^{k−1}
        let r2 = r * r;
        let mut sides = vec![open(&field, rat(1, r2), rat(2, r2))];
        sides.extend((1..k).map(|_| open(&field, rat(1, r), rat(1, r) + rat(1, r2))));
        permutation = (0..k).collect::<Vec<_>>();
        witness_c = None;
        b_qr = BohrSet::new(alpha.to_vec(), ConvexRegion::from_intervals(&field, sides)?, format!("B_{}", r))?;
        theoretical = Some((r as f64).powi(-2 * k as i32));
    } else {
        let w = w.as_ref().expect("checked above");
        let mut perm: Vec<usize> = (0..k).collect();
        perm.sort_by(|&i, &j| w[j].cmp(&w[i]));
        let qr = q * r;
        let lo = BigRational::one() / (BigRational::from_integer(qr.into()) * &w[perm[0]]);
        let mut hi = &lo * BigRational::from_integer(2.into());
        if k > 1 {
            hi = hi.min(BigRational::one() / (BigRational::from_integer(qr.into()) * &w[perm[1]]));
        }
        let mut sides = vec![open(&field, rat(1, qr), rat(2, qr))];
        sides.extend((1..k).map(|_| open(&field, BigRational::zero(), rat(1, qr))));
        let phase: Vec<ExactReal> = perm.iter().map(|&i| alpha[i].irrational_part()).collect();
        b_qr = BohrSet::new(phase, ConvexRegion::from_intervals(&field, sides)?, format!("B_{},{}", q, r))?;
        theoretical = theoretical_density(&b_qr).ok().map(|d| d.value);
        permutation = perm;
        witness_c = Some((lo, hi));
    }
    let empirical_density = b_qr.count_up_to(IDENTITY_WINDOW)? as f64 / IDENTITY_WINDOW as f64;
    Ok(KPointScaffold {
        alpha: alpha.to_vec(),
        v_basis,
        q,
        r,
        w,
        permutation,
        witness_c,
        b_qr,
        theoretical_density: theoretical,
        empirical_density,
    })
}

/// Outcome of the exhaustive floor-identity check on `B ∩ [1, window]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FloorIdentityReport {
    pub window: u64,
    pub members: u64,
    /// `⌊α₁·m·r·n⌋ = r⌊α₁·m·n⌋ + 1`.
    pub first_failures: u64,
    /// `⌊α_i·m·r·n⌋ = r⌊α_i·m·n⌋` for `i ≥ 2`.
    pub rest_failures: u64,
    /// `⌊α_i·r·n⌋ ≢ 0 (mod r)` for `i ≥ 2`; only claimed for `B_r`.
    pub coprime_failures: Option<u64>,
}

impl FloorIdentityReport {
    pub fn all_hold(&self) -> bool {
        self.first_failures == 0 && self.rest_failures == 0 && self.coprime_failures.unwrap_or(0) == 0
    }
}

pub fn check_floor_identities(s: &KPointScaffold, window: u64) -> Result<FloorIdentityReport> {
    let m = s.base_multiplier() as i64;
    let r = s.r as i64;
    let zero = ExactReal::zero(s.alpha[0].field());
    let alpha = s.relabeled_alpha();
    let base: Vec<AffineForm> = alpha.iter().map(|a| AffineForm::new(&a.mul_int(m), &zero)).collect::<Result<_>>()?;
    let fine: Vec<AffineForm> = alpha.iter().map(|a| AffineForm::new(&a.mul_int(m * r), &zero)).collect::<Result<_>>()?;
    let mut rep = FloorIdentityReport {
        window,
        coprime_failures: s.independent().then_some(0),
        ..Default::default()
    };
    for n in 1..=window as i64 {
        if !s.b_qr.contains(n)? {
            continue;
        }
        rep.members += 1;
        for i in 0..alpha.len() {
            let (lo, hi) = (base[i].floor(n)?, fine[i].floor(n)?);
            if i == 0 {
                rep.first_failures += (hi != r * lo + 1) as u64;
            } else {
                rep.rest_failures += (hi != r * lo) as u64;
                if let Some(c) = rep.coprime_failures.as_mut() {
                    *c += (lo.rem_euclid(r) == 0) as u64;
                }
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug)]
pub struct KPointReport {
    pub identities: FloorIdentityReport,
    /// `E^log Π f_i(⌊α_i n⌋)`, judged against `1 − η`.
    pub correlation: CorrelationReport,
    pub eta: f64,
    /// Every `f_i` is constant, so no bound below 1 can hold.
    pub vacuous: bool,
    /// `E^log 1_B(n) f₁(⌊α₁mn⌋) f₁(r⌊α₁mn⌋ + 1)`, `H_X`-normalised.
    pub reduced: CorrelationReport,
    /// `|reduced| / δ_B`: small when the two-point cancellation is visible.
    pub reduced_relative: f64,
}

pub fn verify_kpoint(s: &KPointScaffold, fs: &[MultiplicativeFunction], x: u64, eta: f64) -> Result<KPointReport> {
    let k = s.alpha.len();
    if fs.len() != k {
        return Err(Error::InvalidArgument(format!("{} functions for {} slopes", fs.len(), k)));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidArgument(format!("eta = {} outside (0, 1)", eta)));
    }
    let identities = check_floor_identities(s, IDENTITY_WINDOW.min(x))?;
    if identities.members == 0 && s.b_qr.count_up_to(x)? == 0 {
        return Err(Error::EmptyBohrSet { limit: x, density: s.density() });
    }

    let zero = ExactReal::zero(s.alpha[0].field());
    let factors = fs
        .iter()
        .zip(&s.alpha)
        .map(|(f, a)| Ok(Factor::new(f.clone(), BeattySequence::new(a.clone(), zero.clone())?)))
        .collect::<Result<Vec<_>>>()?;
    let mut correlation = correlate(&CorrelationSpec::new(factors, x)?)?;
    correlation.judge(&Expectation::Small { threshold: 1.0 - eta, slack: f64::INFINITY });
    let vacuous = fs.iter().all(|f| *f.family() == Family::Constant);
    if vacuous {
        correlation.verdict = Verdict::Inconclusive;
        correlation.note.push_str("; all functions constant, the bound 1 - eta is vacuous");
    }

    let first = s.permutation[0];
    let f1 = &fs[first];
    let m = s.base_multiplier() as i64;
    let form = AffineForm::new(&s.alpha[first].mul_int(m), &zero)?;
    let top = form.floor(x as i64)?.max(1) as u64;
    let table = tabulate_shared(&[(f1, s.r * top + 1)])?.remove(0);
    let r = s.r as i64;
    let series = checkpoint_series_ranges(x, 10.0, |lo, hi| {
        let mut st = FloorStepper::new(form.clone(), lo as i64);
        let mut sums = RangeSums::default();
        for n in lo..=hi {
            let y = st.next_floor()?;
            if s.b_qr.contains(n as i64)? {
                sums.push_real(n, table.get(y) * table.get(r * y + 1));
            }
        }
        Ok(sums)
    })?;
    let reduced = CorrelationReport::from_series(series);
    let reduced_relative = reduced.final_normalized.norm() / s.density();
    Ok(KPointReport { identities, correlation, eta, vacuous, reduced, reduced_relative })
}

impl KPointReport {
    pub fn max_modulus(&self) -> f64 {
        self.correlation.max_modulus()
    }

    pub fn final_value(&self) -> Complex64 {
        self.correlation.final_normalized
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{same_lattice, to_big};
    use crate::realfield::NumberField;

    fn parse_all(f: &std::sync::Arc<NumberField>, xs: &[&str]) -> Vec<ExactReal> {
        xs.iter().map(|x| ExactReal::parse(f, x).unwrap()).collect()
    }

    fn ints(xs: &[i64]) -> Vec<BigRational> {
        xs.iter().map(|&x| BigRational::from_integer(x.into())).collect()
    }

    #[test]
    fn independent_tuple_needs_no_w() {
        let f = NumberField::multiquadratic(&[2, 3, 5, 7]).unwrap();
        let s = kpoint_scaffold(&parse_all(&f, &["sqrt2", "sqrt3", "sqrt5", "sqrt7"]), None, 2).unwrap();
        assert!(s.independent() && s.witness_c.is_none());
        assert_eq!(s.theoretical_density, Some(1.0 / 256.0));
        assert!((s.empirical_density - 1.0 / 256.0).abs() < 1e-3);
    }

    #[test]
    fn dependent_tuple_lattice_and_witness() {
        let f = NumberField::multiquadratic(&[2, 3]).unwrap();
        let a = parse_all(&f, &["sqrt2", "sqrt2 + sqrt3", "sqrt2 + 2*sqrt3", "sqrt2 + 3*sqrt3"]);
        assert_eq!(kpoint_scaffold(&a, None, 2).unwrap_err(), Error::WIsRequired);
        let s = kpoint_scaffold(&a, Some(&ints(&[1, 2, 3, 4])), 2).unwrap();
        assert!(same_lattice(&to_big(&s.v_basis), &to_big(&[vec![1, -2, 1, 0], vec![0, 1, -2, 1]])));
        assert_eq!(s.q, 1);
        assert_eq!(s.permutation, vec![3, 2, 1, 0]);
        assert_eq!(s.witness_c, Some((rat(1, 8), rat(1, 6))));
        assert!(s.empirical_density > 0.0);
    }

    #[test]
    fn bad_w_reports_each_condition() {
        let f = NumberField::multiquadratic(&[2, 3]).unwrap();
        let a = parse_all(&f, &["sqrt2", "sqrt2 + sqrt3", "sqrt2 + 2*sqrt3", "sqrt2 + 3*sqrt3"]);
        let Error::NoValidW(msg) = kpoint_scaffold(&a, Some(&ints(&[1, 2, 3, 5])), 2).unwrap_err() else { panic!() };
        assert!(msg.contains("v·w"), "{}", msg);
        let Error::NoValidW(msg) = kpoint_scaffold(&a, Some(&ints(&[-1, 0, 1, 2])), 2).unwrap_err() else { panic!() };
        assert!(msg.contains("positive"), "{}", msg);
        let Error::NoValidW(msg) = kpoint_scaffold(&a, Some(&ints(&[3, 3, 1, 1])), 2).unwrap_err() else { panic!() };
        assert!(msg.contains("unique") && msg.contains("v·w"), "{}", msg);
    }

    #[test]
    fn rational_shift_sets_q() {
        let f = NumberField::multiquadratic(&[2]).unwrap();
        let a = parse_all(&f, &["sqrt2 + 1/2", "sqrt2 + 1/3"]);
        let s = kpoint_scaffold(&a, Some(&ints(&[2, 1])), 2);
        // v = (1, −1)·6 gives v·α ∈ Z; w must be orthogonal to it, so (2, 1) fails
        assert!(matches!(s, Err(Error::NoValidW(_))));
        let s = kpoint_scaffold(&a[..1], None, 3).unwrap();
        assert_eq!(s.q, 2);
    }

    #[test]
    fn floor_identities_on_b_r() {
        let f = NumberField::multiquadratic(&[2, 3, 5]).unwrap();
        let a = parse_all(&f, &["sqrt2", "sqrt3", "sqrt5"]);
        for r in [2, 3] {
            let s = kpoint_scaffold(&a, None, r).unwrap();
            let rep = check_floor_identities(&s, 20_000).unwrap();
            assert!(rep.members > 0 && rep.all_hold(), "{:?}", rep);
        }
    }

    #[test]
    fn constant_functions_are_vacuous() {
        let f = NumberField::multiquadratic(&[2, 3]).unwrap();
        let s = kpoint_scaffold(&parse_all(&f, &["sqrt2", "sqrt3"]), None, 2).unwrap();
        let one = MultiplicativeFunction::one();
        let rep = verify_kpoint(&s, &[one.clone(), one], 10_000, 0.01).unwrap();
        assert!(rep.vacuous && rep.correlation.verdict == Verdict::Inconclusive);
        assert!((rep.final_value().re - 1.0).abs() < 1e-12);
        assert!(rep.identities.all_hold());
    }
}
