//! Exact emptiness and volume for systems of half-spaces with rational normals and
//! number-field right-hand sides.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::region::HalfSpace;
use crate::error::{Error, Result};
use crate::realfield::ExactReal;

/// Scales a constraint so its largest coefficient has absolute value one. Zero rows are
/// left alone.
fn normalize(h: &HalfSpace) -> HalfSpace {
    let m = h.coeffs.iter().map(|c| c.abs()).max().unwrap_or_else(BigRational::zero);
    if m.is_zero() {
        return h.clone();
    }
    let inv = m.recip();
    HalfSpace {
        coeffs: h.coeffs.iter().map(|c| c * &inv).collect(),
        bound: h.bound.mul_rational(&inv),
        strict: h.strict,
    }
}

/// Outcome of pruning a constraint list.
enum Pruned {
    Infeasible,
    Rows(Vec<HalfSpace>),
}

/// Normalises, drops trivially true zero rows, detects trivially false ones, and keeps
/// only the tightest of parallel constraints with the same orientation.
fn prune(rows: &[HalfSpace]) -> Result<Pruned> {
    let mut out: Vec<HalfSpace> = Vec::with_capacity(rows.len());
    for h in rows {
        let h = normalize(h);
        if h.coeffs.iter().all(Zero::is_zero) {
            let ok = match h.bound.signum()? {
                Ordering::Greater => true,
                Ordering::Equal => !h.strict,
                Ordering::Less => false,
            };
            if !ok {
                return Ok(Pruned::Infeasible);
            }
            continue;
        }
        match out.iter_mut().find(|g| g.coeffs == h.coeffs) {
            Some(g) => match h.bound.cmp_exact(&g.bound)? {
                Ordering::Less => *g = h,
                Ordering::Equal => g.strict |= h.strict,
                Ordering::Greater => {}
            },
            None => out.push(h),
        }
    }
    Ok(Pruned::Rows(out))
}

/// Whether `{x : every row holds}` is empty, decided exactly by Fourier–Motzkin
/// elimination that tracks strictness.
pub fn is_empty(rows: &[HalfSpace], dim: usize) -> Result<bool> {
    let mut rows = match prune(rows)? {
        Pruned::Infeasible => return Ok(true),
        Pruned::Rows(r) => r,
    };
    for var in (0..dim).rev() {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for h in rows {
            match h.coeffs[var].cmp(&BigRational::zero()) {
                Ordering::Greater => pos.push(h),
                Ordering::Less => neg.push(h),
                Ordering::Equal => rest.push(h),
            }
        }
        for p in &pos {
            for n in &neg {
                let sp = p.coeffs[var].recip();
                let sn = -n.coeffs[var].recip();
                let coeffs = p.coeffs.iter().zip(&n.coeffs).map(|(a, b)| a * &sp + b * &sn).collect();
                let bound = &p.bound.mul_rational(&sp) + &n.bound.mul_rational(&sn);
                rest.push(HalfSpace { coeffs, bound, strict: p.strict || n.strict });
            }
        }
        rows = match prune(&rest)? {
            Pruned::Infeasible => return Ok(true),
            Pruned::Rows(r) => r,
        };
    }
    Ok(false)
}

/// Lebesgue measure of the closure of a bounded polytope.
///
/// For `d >= 2` this sums `c_F · vol(F projected) / (|a_j| d)` over facets
/// `a·x = c_F`, projecting along a coordinate `j` with `a_j != 0` (cones from the
/// origin). Works with number-field constants throughout.
pub fn volume(rows: &[HalfSpace], dim: usize, like: &ExactReal) -> Result<ExactReal> {
    let zero = ExactReal::zero(like.field());
    let rows = match prune(rows)? {
        Pruned::Infeasible => return Ok(zero),
        Pruned::Rows(r) => r,
    };
    if dim == 0 {
        return Ok(ExactReal::one(like.field()));
    }
    if dim == 1 {
        let mut lower: Option<ExactReal> = None;
        let mut upper: Option<ExactReal> = None;
        for h in &rows {
            let v = h.bound.mul_rational(&h.coeffs[0].recip());
            if h.coeffs[0].is_positive() {
                if upper.as_ref().map_or(Ok(true), |u| v.cmp_exact(u).map(|o| o == Ordering::Less))? {
                    upper = Some(v);
                }
            } else if lower.as_ref().map_or(Ok(true), |l| v.cmp_exact(l).map(|o| o == Ordering::Greater))? {
                lower = Some(v);
            }
        }
        let (Some(lo), Some(hi)) = (lower, upper) else {
            return Err(Error::InvalidArgument("volume of an unbounded region".into()));
        };
        let len = &hi - &lo;
        return Ok(if len.signum()? == Ordering::Greater { len } else { zero });
    }
    let mut total = zero;
    let scale = BigRational::from_integer(dim.into()).recip();
    for (f, facet) in rows.iter().enumerate() {
        if facet.bound.is_zero() {
            continue;
        }
        let j = (0..dim).max_by(|&a, &b| facet.coeffs[a].abs().cmp(&facet.coeffs[b].abs())).unwrap();
        let aj = facet.coeffs[j].clone();
        // x_j = (c - Σ_{i≠j} a_i x_i) / a_j substituted into every other row
        let projected: Vec<HalfSpace> = rows
            .iter()
            .enumerate()
            .filter(|&(g, _)| g != f)
            .map(|(_, h)| {
                let t = &h.coeffs[j] / &aj;
                let coeffs = (0..dim).filter(|&i| i != j).map(|i| &h.coeffs[i] - &t * &facet.coeffs[i]).collect();
                HalfSpace { coeffs, bound: &h.bound - &facet.bound.mul_rational(&t), strict: false }
            })
            .collect();
        let v = volume(&projected, dim - 1, like)?;
        if v.is_zero() {
            continue;
        }
        let w = &scale / aj.abs();
        total = &total + &(&facet.bound * &v).mul_rational(&w);
    }
    Ok(total)
}

/// The unit cube `[0,1)^d` as half-spaces.
pub fn unit_cube(dim: usize, like: &ExactReal) -> Vec<HalfSpace> {
    let zero = ExactReal::zero(like.field());
    let one = ExactReal::one(like.field());
    let mut out = Vec::with_capacity(2 * dim);
    for i in 0..dim {
        let mut e = vec![BigRational::zero(); dim];
        e[i] = -BigRational::one();
        out.push(HalfSpace { coeffs: e.clone(), bound: zero.clone(), strict: false });
        e[i] = BigRational::one();
        out.push(HalfSpace { coeffs: e, bound: one.clone(), strict: true });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realfield::NumberField;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn row(c: &[i64], b: &ExactReal, strict: bool) -> HalfSpace {
        HalfSpace { coeffs: c.iter().map(|&v| q(v, 1)).collect(), bound: b.clone(), strict }
    }

    #[test]
    fn triangle_and_square() {
        let f = NumberField::rationals();
        let one = ExactReal::one(&f);
        let mut rows = unit_cube(2, &one);
        assert_eq!(volume(&rows, 2, &one).unwrap(), one);
        rows.push(row(&[1, 1], &one, false));
        assert_eq!(volume(&rows, 2, &one).unwrap(), ExactReal::from_ratio(&f, 1, 2));
        assert!(!is_empty(&rows, 2).unwrap());
    }

    #[test]
    fn simplex_in_three_dimensions() {
        let f = NumberField::rationals();
        let one = ExactReal::one(&f);
        let mut rows = unit_cube(3, &one);
        rows.push(row(&[1, 1, 1], &one, true));
        assert_eq!(volume(&rows, 3, &one).unwrap(), ExactReal::from_ratio(&f, 1, 6));
    }

    #[test]
    fn irrational_cut() {
        let f = NumberField::multiquadratic(&[2]).unwrap();
        let s = ExactReal::parse(&f, "sqrt2 - 1").unwrap();
        let one = ExactReal::one(&f);
        let mut rows = unit_cube(2, &one);
        rows.push(row(&[1, 0], &s, true));
        rows.push(row(&[0, 1], &s, true));
        assert_eq!(volume(&rows, 2, &one).unwrap(), &s * &s);
    }

    #[test]
    fn strictness_decides_emptiness() {
        let f = NumberField::rationals();
        let half = ExactReal::from_ratio(&f, 1, 2);
        // x <= 1/2 and x >= 1/2 meet in a point; x < 1/2 and x >= 1/2 do not
        let closed = vec![row(&[1], &half, false), row(&[-1], &-&half, false)];
        assert!(!is_empty(&closed, 1).unwrap());
        let open = vec![row(&[1], &half, true), row(&[-1], &-&half, false)];
        assert!(is_empty(&open, 1).unwrap());
        let one = ExactReal::one(&f);
        assert_eq!(volume(&closed, 1, &one).unwrap(), ExactReal::zero(&f));
    }

    #[test]
    fn lower_dimensional_polytope_has_zero_volume() {
        let f = NumberField::rationals();
        let one = ExactReal::one(&f);
        let zero = ExactReal::zero(&f);
        let mut rows = unit_cube(2, &one);
        rows.push(row(&[1, -1], &zero, false));
        rows.push(row(&[-1, 1], &zero, false));
        assert!(!is_empty(&rows, 2).unwrap());
        assert_eq!(volume(&rows, 2, &one).unwrap(), zero);
    }
}
