//! Numeric sanity check of the asserted Q-linear independence of a field basis, and an
//! exact check for families of field elements.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::field::pow10;
use super::{ExactReal, NumberField};
use crate::error::Result;
use crate::lattice;

/// Largest relation coefficient searched for.
pub const RELATION_HEIGHT: i64 = 10_000;
/// Working precision of the search, in decimal digits.
pub const RELATION_DIGITS: usize = 40;

impl NumberField {
    /// Searches for an integer relation `sum k_i b_i = 0` with `|k_i| <= 10^4` among the
    /// basis values at precision `10^-40`. Returns the relation if one is found; `None`
    /// is evidence (not proof) of independence.
    pub fn independence_sanity_check(&self) -> Result<Option<Vec<i64>>> {
        let n = self.dim();
        if n == 1 {
            return Ok(None);
        }
        let digits = RELATION_DIGITS.min(self.usable_digits());
        let extra = 5.min(self.usable_digits() - digits);
        let scale = pow10(digits);
        let fine = pow10(digits + extra);
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            let l = self.embedding(i).floor_at(digits + extra, &self.basis_names()[i])?;
            // round to the working precision
            let v = BigRational::new(l * &scale, fine.clone()).round().to_integer();
            values.push(v);
        }
        let rows: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                let mut r: Vec<BigInt> = (0..n).map(|j| BigInt::from((i == j) as i64)).collect();
                r.push(values[i].clone());
                r
            })
            .collect();
        let reduced = lattice::lll(&rows);
        let slack = BigInt::from(RELATION_HEIGHT * (n as i64 + 1));
        for row in reduced {
            let coeffs: Option<Vec<i64>> = row[..n].iter().map(|x| x.to_i64()).collect();
            let Some(coeffs) = coeffs else { continue };
            if coeffs.iter().all(|&c| c.abs() <= RELATION_HEIGHT)
                && coeffs.iter().any(|&c| c != 0)
                && row[n].abs() <= slack
            {
                return Ok(Some(coeffs));
            }
        }
        Ok(None)
    }
}

/// Whether `{1, x_1, ..., x_m}` is Q-linearly independent, decided exactly from the
/// coefficient vectors (valid under the field's independence assertion).
pub fn independent_with_unit(xs: &[ExactReal]) -> bool {
    let Some(first) = xs.first() else { return true };
    let n = first.field().dim();
    let mut rows: Vec<Vec<BigRational>> = xs.iter().map(|x| x.coeffs()[1..].to_vec()).collect();
    rational_rank(&mut rows, n - 1) == xs.len()
}

fn rational_rank(rows: &mut [Vec<BigRational>], cols: usize) -> usize {
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        for i in r + 1..rows.len() {
            if rows[i][c].is_zero() {
                continue;
            }
            let f = &rows[i][c] / &rows[r][c];
            let pivot = rows[r].clone();
            for (x, y) in rows[i].iter_mut().zip(&pivot) {
                *x -= &f * y;
            }
        }
        r += 1;
    }
    r
}
