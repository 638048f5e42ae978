use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::region::{ConvexRegion, HalfSpace};
use super::set::{irrational_kernel, BohrSet, Density, DensityMethod};
use crate::error::{Error, Result};
use crate::lattice::{self, IntMatrix};
use crate::realfield::{independent_with_unit, AffineForm, ExactReal, FracValue};

/// `1_B(n) = 1_{B_{d'}(ρ, U'(n mod q))}(n)` with `{1, ρ}` linearly independent.
#[derive(Clone, Debug)]
pub struct BohrDecomposition {
    pub d_prime: usize,
    pub rho: Vec<ExactReal>,
    pub q: u64,
    /// `pieces[a]` is a disjoint list of convex regions in `[0,1)^{d'}` whose union is `U'(a)`.
    pub pieces: Vec<Vec<ConvexRegion>>,
    /// Unimodular `M`; its first `d'` rows map the irrational parts of γ to ρ, the rest
    /// annihilate them.
    pub transform: IntMatrix,
    forms: Vec<AffineForm>,
}

impl BohrDecomposition {
    /// Membership through the decomposed description.
    pub fn contains(&self, n: i64) -> Result<bool> {
        let a = n.rem_euclid(self.q as i64) as usize;
        if self.pieces[a].is_empty() {
            return Ok(false);
        }
        let fr: Vec<FracValue> =
            self.forms.iter().map(|f| f.floor_and_frac(n).map(|(_, v)| v)).collect::<Result<_>>()?;
        for p in &self.pieces[a] {
            if p.contains_frac(&fr, &|i| self.forms[i].frac_exact(n))? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `Σ_a vol(U'(a)) / q`, exactly.
    pub fn density(&self) -> Result<ExactReal> {
        let field = self.rho[0].field();
        let mut total = ExactReal::zero(field);
        for pieces in &self.pieces {
            for p in pieces {
                total = &total + &p.volume()?;
            }
        }
        Ok(total.mul_rational(&BigRational::new(BigInt::one(), BigInt::from(self.q))))
    }

    /// `vol(U'(a))` for each residue.
    pub fn residue_volumes(&self) -> Result<Vec<ExactReal>> {
        self.pieces
            .iter()
            .map(|ps| {
                ps.iter().try_fold(ExactReal::zero(self.rho[0].field()), |s, p| Ok(&s + &p.volume()?))
            })
            .collect()
    }
}

fn lcm_of_denominators(xs: &[BigRational]) -> BigInt {
    xs.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()))
}

fn frac_q(x: &BigRational) -> BigRational {
    x - x.floor()
}

/// Splits off the rational dependencies of the phase.
pub fn remove_rational_dependencies(b: &BohrSet) -> Result<BohrDecomposition> {
    let phase = b.phase();
    let d = phase.len();
    let field = b.field();
    if phase.iter().all(ExactReal::is_rational) {
        return Err(Error::FullyRationalPhase);
    }
    let rational: Vec<BigRational> = phase.iter().map(ExactReal::rational_part).collect();
    let irrational: Vec<ExactReal> = phase.iter().map(ExactReal::irrational_part).collect();
    let w = irrational_kernel(phase);
    let d_prime = d - w.len();
    let m = lattice::complete_to_unimodular(&w, d)
        .ok_or_else(|| Error::InvalidArgument("relation kernel is not saturated".into()))?;
    let minv = lattice::unimodular_inverse(&m).expect("completion is unimodular");
    let rho: Vec<ExactReal> = m[..d_prime]
        .iter()
        .map(|row| {
            row.iter().zip(&irrational).fold(ExactReal::zero(field), |s, (c, g)| {
                &s + &g.mul_rational(&BigRational::from_integer(c.clone()))
            })
        })
        .collect();
    if !independent_with_unit(&rho) {
        return Err(Error::IndependenceViolation { what: "reduced phase".into(), digits: 0 });
    }
    // P: first d' columns of M^{-1}
    let p: Vec<Vec<BigRational>> =
        (0..d).map(|i| (0..d_prime).map(|j| BigRational::from_integer(minv[i][j].clone())).collect()).collect();
    let q_big = lcm_of_denominators(&rational);
    let q = q_big
        .to_u64()
        .filter(|&q| q <= 1 << 20)
        .ok_or_else(|| Error::ResourceLimit(format!("period {} is too large", q_big)))?;
    let rows = b.region().halfspaces();
    let mut pieces = Vec::with_capacity(q as usize);
    for a in 0..q {
        let ab = BigRational::from_integer(a.into());
        let s: Vec<BigRational> = rational.iter().map(|g| frac_q(&(g * &ab))).collect();
        pieces.push(residue_pieces(&rows, &p, &s, d_prime, field)?);
    }
    let zero = ExactReal::zero(field);
    let forms = rho.iter().map(|r| AffineForm::new(r, &zero)).collect::<Result<_>>()?;
    Ok(BohrDecomposition { d_prime, rho, q, pieces, transform: m, forms })
}

/// Nonempty pieces `{z : Pz + s - t ∈ U}` over the finitely many integer shifts `t`.
fn residue_pieces(
    rows: &[HalfSpace],
    p: &[Vec<BigRational>],
    s: &[BigRational],
    d_prime: usize,
    field: &std::sync::Arc<crate::realfield::NumberField>,
) -> Result<Vec<ConvexRegion>> {
    let d = s.len();
    let ranges: Vec<(i64, i64)> = (0..d)
        .map(|i| {
            let lo: BigRational = &s[i] + p[i].iter().filter(|c| c.is_negative()).sum::<BigRational>();
            let hi: BigRational = &s[i] + p[i].iter().filter(|c| c.is_positive()).sum::<BigRational>();
            (lo.floor().to_integer().to_i64().unwrap(), hi.floor().to_integer().to_i64().unwrap())
        })
        .collect();
    // coefficients h·P are shared by every shift
    let base: Vec<(Vec<BigRational>, BigRational)> = rows
        .iter()
        .map(|h| {
            let coeffs = (0..d_prime)
                .map(|j| (0..d).fold(BigRational::zero(), |acc, i| acc + &h.coeffs[i] * &p[i][j]))
                .collect();
            let hs = h.coeffs.iter().zip(s).fold(BigRational::zero(), |acc, (c, si)| acc + c * si);
            (coeffs, hs)
        })
        .collect();
    let mut out = Vec::new();
    let mut t: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        let sub: Vec<HalfSpace> = rows
            .iter()
            .zip(&base)
            .map(|(h, (coeffs, hs))| {
                let ht = h.coeffs.iter().zip(&t).fold(BigRational::zero(), |acc, (c, &ti)| {
                    acc + c * BigRational::from_integer(ti.into())
                });
                HalfSpace { coeffs: coeffs.clone(), bound: h.bound.add_rational(&(ht - hs)), strict: h.strict }
            })
            .collect();
        let region = ConvexRegion::polytope(field, d_prime, sub)?;
        if !region.is_empty()? {
            out.push(region.simplify()?);
        }
        let mut i = 0;
        while i < d && t[i] == ranges[i].1 {
            t[i] = ranges[i].0;
            i += 1;
        }
        if i == d {
            return Ok(out);
        }
        t[i] += 1;
    }
}

/// Density from the exact volumes of the decomposition, or from the period when the
/// phase is rational.
pub fn theoretical_density(b: &BohrSet) -> Result<Density> {
    let exact = match remove_rational_dependencies(b) {
        Ok(dec) => dec.density()?,
        Err(Error::FullyRationalPhase) => {
            let ts = rational_period_weights(b)?;
            let hits = ts.iter().filter(|&&t| t).count() as i64;
            ExactReal::from_ratio(b.field(), hits, ts.len() as i64)
        }
        Err(e) => return Err(e),
    };
    Ok(Density { value: exact.to_f64(), method: DensityMethod::Theoretical { exact } })
}

/// For a rational phase with period `q`, `1_B(a)` for `a = 0..q`.
pub fn rational_period_weights(b: &BohrSet) -> Result<Vec<bool>> {
    let rational: Vec<BigRational> = b.phase().iter().filter_map(ExactReal::to_rational).collect();
    if rational.len() != b.dim() {
        return Err(Error::InvalidArgument("phase is not rational".into()));
    }
    let q = lcm_of_denominators(&rational)
        .to_i64()
        .filter(|&q| q <= 1 << 20)
        .ok_or_else(|| Error::ResourceLimit("period too large".into()))?;
    (0..q).map(|a| b.contains(a)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realfield::NumberField;
    use std::sync::Arc;

    fn set(f: &Arc<NumberField>, phase: &[&str], sides: &[(i64, i64, i64, i64)]) -> BohrSet {
        let r = ConvexRegion::boxed(
            f,
            sides.iter().map(|&(a, b, c, d)| (ExactReal::from_ratio(f, a, b), ExactReal::from_ratio(f, c, d))).collect(),
        )
        .unwrap();
        BohrSet::new(phase.iter().map(|g| ExactReal::parse(f, g).unwrap()).collect(), r, "t").unwrap()
    }

    fn agree(b: &BohrSet, dec: &BohrDecomposition, upto: i64) {
        for n in -200..=upto {
            assert_eq!(b.contains(n).unwrap(), dec.contains(n).unwrap(), "{} at n = {}", b.label(), n);
        }
    }

    #[test]
    fn identity_decomposition() {
        let f = NumberField::multiquadratic(&[2]).unwrap();
        let b = set(&f, &["sqrt2"], &[(0, 1, 1, 2)]);
        let dec = remove_rational_dependencies(&b).unwrap();
        assert_eq!((dec.d_prime, dec.q), (1, 1));
        assert_eq!(dec.rho[0].to_string(), "sqrt2");
        assert_eq!(dec.pieces[0].len(), 1);
        assert_eq!(dec.density().unwrap(), ExactReal::from_ratio(&f, 1, 2));
        agree(&b, &dec, 10_000);
    }

    #[test]
    fn shifted_copy_has_empty_odd_residue() {
        let f = NumberField::multiquadratic(&[2]).unwrap();
        let b = set(&f, &["sqrt2", "sqrt2 + 1/2"], &[(0, 1, 1, 2), (0, 1, 1, 2)]);
        let dec = remove_rational_dependencies(&b).unwrap();
        assert_eq!((dec.d_prime, dec.q), (1, 2));
        assert!(dec.rho[0] == ExactReal::parse(&f, "sqrt2").unwrap() || dec.rho[0] == ExactReal::parse(&f, "-sqrt2").unwrap());
        assert!(dec.pieces[1].is_empty());
        assert_eq!(dec.residue_volumes().unwrap()[0], ExactReal::from_ratio(&f, 1, 2));
        agree(&b, &dec, 100_000);
    }

    #[test]
    fn doubled_phase_gives_quarter_interval() {
        let f = NumberField::multiquadratic(&[2]).unwrap();
        let b = set(&f, &["sqrt2", "2*sqrt2"], &[(0, 1, 1, 2), (0, 1, 1, 2)]);
        let dec = remove_rational_dependencies(&b).unwrap();
        assert_eq!((dec.d_prime, dec.q), (1, 1));
        assert_eq!(dec.density().unwrap(), ExactReal::from_ratio(&f, 1, 4));
        agree(&b, &dec, 100_000);
    }

    #[test]
    fn densities() {
        let f = NumberField::multiquadratic(&[2]).unwrap();
        let b = set(&f, &["sqrt2"], &[(1, 5, 1, 2)]);
        assert!((theoretical_density(&b).unwrap().value - 0.3).abs() < 1e-15);
        let c = set(&f, &["1/3"], &[(0, 1, 1, 3)]);
        let d = theoretical_density(&c).unwrap();
        assert_eq!(d.method, DensityMethod::Theoretical { exact: ExactReal::from_ratio(&f, 1, 3) });
        assert!(matches!(remove_rational_dependencies(&c), Err(Error::FullyRationalPhase)));
    }

    #[test]
    fn mixed_three_dimensional_phase() {
        let f = NumberField::multiquadratic(&[2, 3]).unwrap();
        let b = set(
            &f,
            &["sqrt2 + 1/3", "sqrt3 - sqrt2", "sqrt3 + 1/4"],
            &[(0, 1, 2, 3), (1, 4, 1, 1), (0, 1, 1, 2)],
        );
        let dec = remove_rational_dependencies(&b).unwrap();
        assert_eq!((dec.d_prime, dec.q), (2, 12));
        for ps in &dec.pieces {
            for (i, x) in ps.iter().enumerate() {
                for y in &ps[i + 1..] {
                    assert!(x.is_disjoint(y).unwrap());
                }
            }
        }
        agree(&b, &dec, 20_000);
        let emp = super::super::set::empirical_density(&b, 200_000).unwrap().value;
        assert!((dec.density().unwrap().to_f64() - emp).abs() < 0.01);
    }
}
