use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::region::ConvexRegion;
use crate::error::{Error, Result};
use crate::lattice::{self, IntMatrix};
use crate::realfield::{AffineForm, ExactReal, FracValue, NumberField};

/// `B_d(γ, U) = {n ∈ Z : γn ∈ U mod Z^d}`.
#[derive(Clone, Debug)]
pub struct BohrSet {
    phase: Vec<ExactReal>,
    region: ConvexRegion,
    label: String,
    forms: Vec<AffineForm>,
}

impl BohrSet {
    pub fn new(phase: Vec<ExactReal>, region: ConvexRegion, label: impl Into<String>) -> Result<Self> {
        if phase.is_empty() || phase.len() != region.dim() {
            return Err(Error::InvalidArgument(format!(
                "phase has {} coordinates, region dimension is {}",
                phase.len(),
                region.dim()
            )));
        }
        let zero = ExactReal::zero(region.field());
        if phase.iter().any(|g| !g.same_field(&zero)) {
            return Err(Error::FieldMismatch);
        }
        let forms = phase.iter().map(|g| AffineForm::new(g, &zero)).collect::<Result<_>>()?;
        Ok(BohrSet { phase, region, label: label.into(), forms })
    }

    /// All of `Z`, as `B_1(0, [0,1))`.
    pub fn integers(field: &Arc<NumberField>) -> Self {
        Self::new(vec![ExactReal::zero(field)], ConvexRegion::unit_box(field, 1), "Z").expect("valid")
    }

    /// Whether the region is the whole torus, so the set is all of `Z`.
    pub fn is_everything(&self) -> bool {
        self.region.intervals().is_some_and(|s| {
            s.iter().all(|i| i.lo.value().is_zero() && *i.hi.value() == ExactReal::one(self.field()))
        })
    }

    pub fn phase(&self) -> &[ExactReal] {
        &self.phase
    }

    pub fn region(&self) -> &ConvexRegion {
        &self.region
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.phase.len()
    }

    pub fn field(&self) -> &Arc<NumberField> {
        self.region.field()
    }

    pub fn contains(&self, n: i64) -> Result<bool> {
        let fr: Vec<FracValue> =
            self.forms.iter().map(|f| f.floor_and_frac(n).map(|(_, v)| v)).collect::<Result<_>>()?;
        self.region.contains_frac(&fr, &|i| self.forms[i].frac_exact(n))
    }

    /// Membership through exact arithmetic only.
    pub fn contains_exact(&self, n: i64) -> Result<bool> {
        let x: Vec<ExactReal> = self.phase.iter().map(|g| g.mul_int(n).frac()).collect::<Result<_>>()?;
        self.region.contains(&x)
    }

    /// Number of members in `1..=x`.
    pub fn count_up_to(&self, x: u64) -> Result<u64> {
        const CHUNK: u64 = 1 << 14;
        let chunks: Vec<u64> = (0..x.div_ceil(CHUNK)).collect();
        chunks
            .par_iter()
            .map(|&c| {
                let lo = c * CHUNK + 1;
                let hi = ((c + 1) * CHUNK).min(x);
                let mut k = 0;
                for n in lo..=hi {
                    k += self.contains(n as i64)? as u64;
                }
                Ok(k)
            })
            .sum()
    }
}

/// How a density was obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum DensityMethod {
    /// Exact volume of the decomposed pieces.
    Theoretical { exact: ExactReal },
    /// Exact member count over `1..=limit`.
    Empirical { limit: u64, count: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    pub value: f64,
    pub method: DensityMethod,
}

pub fn empirical_density(b: &BohrSet, limit: u64) -> Result<Density> {
    if limit < 1000 {
        return Err(Error::InvalidArgument("empirical density needs X >= 1000".into()));
    }
    let count = b.count_up_to(limit)?;
    Ok(Density { value: count as f64 / limit as f64, method: DensityMethod::Empirical { limit, count } })
}

/// Coordinates of each phase in the field basis, as a `d x dim` matrix.
pub(crate) fn coefficient_matrix(phase: &[ExactReal]) -> Vec<Vec<BigRational>> {
    phase.iter().map(|g| g.coeffs().to_vec()).collect()
}

/// Multiplies every row by the lcm of all denominators.
pub(crate) fn clear_denominators(m: &[Vec<BigRational>]) -> IntMatrix {
    let den = m.iter().flatten().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let s = BigRational::from_integer(den);
    m.iter().map(|r| r.iter().map(|x| (x * &s).to_integer()).collect()).collect()
}

/// Saturated integer basis of `{k ∈ Z^d : k · irrational parts of γ = 0}`.
pub(crate) fn irrational_kernel(phase: &[ExactReal]) -> IntMatrix {
    let c = coefficient_matrix(phase);
    let irr: Vec<Vec<BigRational>> = c.iter().map(|r| r[1..].to_vec()).collect();
    let cols = irr.first().map_or(0, Vec::len);
    lattice::left_kernel(&clear_denominators(&irr), cols)
}

/// Hermite basis of `{k ∈ Z^d : k · γ ∈ Z}`, possibly empty.
pub fn integer_relation_lattice(phase: &[ExactReal]) -> Result<IntMatrix> {
    if phase.is_empty() {
        return Ok(Vec::new());
    }
    let zero = ExactReal::zero(phase[0].field());
    if phase.iter().any(|g| !g.same_field(&zero)) {
        return Err(Error::FieldMismatch);
    }
    let w = irrational_kernel(phase);
    if w.is_empty() {
        return Ok(w);
    }
    // rational value of w_j · γ for each kernel vector
    let vals: Vec<BigRational> = w
        .iter()
        .map(|row| {
            row.iter()
                .zip(phase)
                .fold(BigRational::zero(), |s, (k, g)| s + BigRational::from_integer(k.clone()) * g.rational_part())
        })
        .collect();
    let den = vals.iter().fold(BigInt::one(), |l, v| l.lcm(v.denom()));
    // y·e ≡ 0 (mod den) with e_j = den·vals_j: kernel of the column [e; den]
    let mut col: IntMatrix = vals.iter().map(|v| vec![(v * BigRational::from_integer(den.clone())).to_integer()]).collect();
    col.push(vec![den.clone()]);
    let ker = lattice::left_kernel(&col, 1);
    let ys: IntMatrix = ker.iter().map(|r| r[..w.len()].to_vec()).collect();
    let ys = lattice::hnf(&ys);
    let d = phase.len();
    let basis: IntMatrix = ys
        .iter()
        .map(|y| {
            (0..d).map(|i| y.iter().zip(&w).fold(BigInt::zero(), |s, (yj, wj)| s + yj * &wj[i])).collect()
        })
        .collect();
    Ok(lattice::hnf(&basis))
}
