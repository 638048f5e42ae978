//! Integer lattice utilities: Hermite normal form, integer kernels, unimodular
//! completion and LLL reduction. Matrices are `Vec` of rows; lattices are row spans.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

pub fn to_big(rows: &[Vec<i64>]) -> IntMatrix {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

pub fn to_i64(rows: &[Vec<BigInt>]) -> Option<Vec<Vec<i64>>> {
    rows.iter().map(|r| r.iter().map(|x| x.to_i64()).collect()).collect()
}

/// Unimodular row reduction on the first `pivot_cols` columns. Returns the rank; rows
/// `0..rank` are in echelon form with positive pivots and, when `reduce_above` is set,
/// entries above each pivot reduced into `[0, pivot)`.
fn echelon(m: &mut IntMatrix, pivot_cols: usize, reduce_above: bool) -> usize {
    let rows = m.len();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == rows {
            break;
        }
        loop {
            // smallest nonzero magnitude in column c among rows r..
            let best = (r..rows)
                .filter(|&i| !m[i][c].is_zero())
                .min_by(|&a, &b| m[a][c].abs().cmp(&m[b][c].abs()));
            let Some(p) = best else { break };
            m.swap(r, p);
            let mut done = true;
            for i in r + 1..rows {
                if m[i][c].is_zero() {
                    continue;
                }
                let q = m[i][c].div_floor(&m[r][c]);
                let (head, tail) = m.split_at_mut(i);
                sub_scaled(&mut tail[0], &head[r], &q);
                if !m[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < rows && !m[r][c].is_zero() {
            if m[r][c].is_negative() {
                for x in m[r].iter_mut() {
                    *x = -&*x;
                }
            }
            if reduce_above {
                for i in 0..r {
                    let q = m[i][c].div_floor(&m[r][c]);
                    if !q.is_zero() {
                        let (head, tail) = m.split_at_mut(r);
                        sub_scaled(&mut head[i], &tail[0], &q);
                    }
                }
            }
            r += 1;
        }
    }
    r
}

fn sub_scaled(target: &mut [BigInt], src: &[BigInt], q: &BigInt) {
    for (t, s) in target.iter_mut().zip(src) {
        if !s.is_zero() {
            *t -= q * s;
        }
    }
}

/// Row-style Hermite normal form of the lattice spanned by `rows` (zero rows dropped).
pub fn hnf(rows: &[Vec<BigInt>]) -> IntMatrix {
    if rows.is_empty() {
        return Vec::new();
    }
    let cols = rows[0].len();
    let mut m = rows.to_vec();
    let rank = echelon(&mut m, cols, true);
    m.truncate(rank);
    m
}

/// A basis of `{x in Z^m : x A = 0}` for the `m x n` matrix `A`, in Hermite normal form.
pub fn left_kernel(a: &[Vec<BigInt>], n: usize) -> IntMatrix {
    let m = a.len();
    let mut aug: IntMatrix = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..m).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            r
        })
        .collect();
    let rank = echelon(&mut aug, n, false);
    let kernel: IntMatrix = aug[rank..].iter().map(|r| r[n..].to_vec()).collect();
    hnf(&kernel)
}

/// Whether `v` lies in the lattice whose Hermite basis is `h`.
pub fn hnf_contains(h: &[Vec<BigInt>], v: &[BigInt]) -> bool {
    let mut v = v.to_vec();
    for row in h {
        let Some(c) = row.iter().position(|x| !x.is_zero()) else { continue };
        if v[..c].iter().any(|x| !x.is_zero()) {
            return false;
        }
        let (q, r) = v[c].div_rem(&row[c]);
        if !r.is_zero() {
            return false;
        }
        sub_scaled(&mut v, row, &q);
    }
    v.iter().all(Zero::is_zero)
}

/// Whether two generating sets span the same lattice.
pub fn same_lattice(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> bool {
    let ha = hnf(a);
    let hb = hnf(b);
    ha.len() == hb.len() && a.iter().all(|v| hnf_contains(&hb, v)) && b.iter().all(|v| hnf_contains(&ha, v))
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Exact inverse of a unimodular matrix; `None` if the determinant is not ±1.
pub fn unimodular_inverse(m: &[Vec<BigInt>]) -> Option<IntMatrix> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<BigRational> = row.iter().map(|x| BigRational::from_integer(x.clone())).collect();
            r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        let inv = a[c][c].recip();
        for x in a[c].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                let (pivot, other) = if i < c {
                    let (h, t) = a.split_at_mut(c);
                    (&t[0], &mut h[i])
                } else {
                    let (h, t) = a.split_at_mut(i);
                    (&h[c], &mut t[0])
                };
                for (x, y) in other.iter_mut().zip(pivot.iter()) {
                    *x -= &f * y;
                }
            }
        }
    }
    a.into_iter()
        .map(|row| {
            row[n..]
                .iter()
                .map(|x| x.is_integer().then(|| x.to_integer()))
                .collect::<Option<Vec<_>>>()
        })
        .collect()
}

/// Extends a basis `b` (r rows) of a saturated sublattice `W` of `Z^d` to a unimodular
/// `d x d` matrix whose last `r` rows are exactly `b`. The first `d - r` rows are chosen
/// among standard basis vectors when possible.
pub fn complete_to_unimodular(b: &[Vec<BigInt>], d: usize) -> Option<IntMatrix> {
    let r = b.len();
    if r > d {
        return None;
    }
    let unit = |i: usize| -> Vec<BigInt> {
        (0..d).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()
    };
    // try standard completions first, lexicographically
    let k = d - r;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let mut m: IntMatrix = idx.iter().map(|&i| unit(i)).collect();
        m.extend(b.iter().cloned());
        if determinant(&m).abs().is_one() {
            return Some(m);
        }
        // next k-subset of 0..d
        let mut i = k;
        loop {
            if i == 0 {
                return column_completion(b, d);
            }
            i -= 1;
            if idx[i] < d - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Completion via column reduction: find unimodular `V` with `b V = [L | 0]`; then the
/// last `d - r` rows of `V^{-1}` complement `b`.
fn column_completion(b: &[Vec<BigInt>], d: usize) -> Option<IntMatrix> {
    let r = b.len();
    // row-reduce [b^T | I_d]
    let mut aug: IntMatrix = (0..d)
        .map(|i| {
            let mut row: Vec<BigInt> = (0..r).map(|j| b[j][i].clone()).collect();
            row.extend((0..d).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let rank = echelon(&mut aug, r, false);
    if rank != r {
        return None;
    }
    // U b^T = [L^T; 0], so V = U^T and V^{-1} = (U^{-1})^T
    let u: IntMatrix = aug.iter().map(|row| row[r..].to_vec()).collect();
    let uinv = unimodular_inverse(&u)?;
    let vinv: IntMatrix = (0..d).map(|i| (0..d).map(|j| uinv[j][i].clone()).collect()).collect();
    let mut m: IntMatrix = vinv[r..].to_vec();
    m.extend(b.iter().cloned());
    determinant(&m).abs().is_one().then_some(m)
}

/// Exact LLL reduction (`delta = 3/4`) of linearly independent integer rows.
pub fn lll(basis: &[Vec<BigInt>]) -> IntMatrix {
    let mut b = basis.to_vec();
    let n = b.len();
    if n == 0 {
        return b;
    }
    let half = BigRational::new(1.into(), 2.into());
    let delta = BigRational::new(3.into(), 4.into());
    let gram_schmidt = |b: &IntMatrix| -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
        let mut mu = vec![vec![BigRational::zero(); n]; n];
        let mut bstar: Vec<Vec<BigRational>> = Vec::with_capacity(n);
        let mut norms = Vec::with_capacity(n);
        for i in 0..n {
            let mut v: Vec<BigRational> = b[i].iter().map(|x| BigRational::from_integer(x.clone())).collect();
            for j in 0..i {
                let num: BigRational = b[i]
                    .iter()
                    .zip(&bstar[j])
                    .map(|(x, y)| BigRational::from_integer(x.clone()) * y)
                    .sum();
                mu[i][j] = num / &norms[j];
                for (vk, yk) in v.iter_mut().zip(&bstar[j]) {
                    *vk -= &mu[i][j] * yk;
                }
            }
            let nn: BigRational = v.iter().map(|x| x * x).sum();
            norms.push(nn);
            bstar.push(v);
        }
        (mu, norms)
    };
    let (mut mu, mut norms) = gram_schmidt(&b);
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            if mu[k][j].abs() > half {
                let q = mu[k][j].round().to_integer();
                let (head, tail) = b.split_at_mut(k);
                sub_scaled(&mut tail[0], &head[j], &q);
                let qr = BigRational::from_integer(q);
                for l in 0..=j {
                    let t = if l == j { BigRational::one() } else { mu[j][l].clone() };
                    mu[k][l] -= &qr * t;
                }
            }
        }
        let lhs = &norms[k];
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &norms[k - 1];
        if *lhs >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            let (m2, n2) = gram_schmidt(&b);
            mu = m2;
            norms = n2;
            k = (k - 1).max(1);
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(rows: &[&[i64]]) -> IntMatrix {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn brute_left_kernel_contains(a: &IntMatrix, v: &[BigInt]) -> bool {
        let n = a[0].len();
        (0..n).all(|j| a.iter().zip(v).map(|(row, x)| &row[j] * x).sum::<BigInt>().is_zero())
    }

    #[test]
    fn hnf_of_small_lattice() {
        let h = hnf(&big(&[&[2, 4], &[3, 5]]));
        assert_eq!(h, big(&[&[1, 1], &[0, 2]]));
        assert!(hnf_contains(&h, &big(&[&[5, 9]])[0]));
        assert!(!hnf_contains(&h, &big(&[&[1, 2]])[0]));
    }

    #[test]
    fn kernel_of_dependent_rows() {
        let a = big(&[&[1, 0], &[1, 1], &[1, 2], &[1, 3]]);
        let k = left_kernel(&a, 2);
        assert_eq!(k.len(), 2);
        assert!(same_lattice(&k, &big(&[&[1, -2, 1, 0], &[0, 1, -2, 1]])));
    }

    #[test]
    fn determinant_matches_cofactor() {
        let m = big(&[&[2, -1, 0], &[1, 3, 4], &[0, 5, -2]]);
        // 2*(3*-2 - 4*5) - (-1)*(1*-2 - 0) + 0 = -52 - 2
        assert_eq!(determinant(&m), BigInt::from(-54));
    }

    #[test]
    fn completion_prefers_standard_vectors() {
        let w = big(&[&[1, -2, 1, 0], &[0, 1, -2, 1]]);
        let m = complete_to_unimodular(&w, 4).unwrap();
        assert!(determinant(&m).abs().is_one());
        assert_eq!(&m[2..], &w[..]);
    }

    #[test]
    fn completion_by_columns() {
        let w = big(&[&[2, 3, 5]]);
        let m = column_completion(&w, 3).unwrap();
        assert!(determinant(&m).abs().is_one());
        assert_eq!(m[2], w[0]);
    }

    #[test]
    fn lll_finds_short_relation() {
        // 1, sqrt2, 1 + 2 sqrt2 scaled: the relation (1, 2, -1) must surface
        let s = 1414213562373095i64;
        let n = 1_000_000_000_000_000i64;
        let rows = big(&[&[1, 0, 0, n], &[0, 1, 0, s], &[0, 0, 1, n + 2 * s]]);
        let red = lll(&rows);
        let first = &red[0];
        let coeffs: Vec<i64> = first[..3].iter().map(|x| x.to_i64().unwrap()).collect();
        assert!(coeffs == vec![1, 2, -1] || coeffs == vec![-1, -2, 1]);
    }

    proptest! {
        #[test]
        fn kernel_is_exact(rows in proptest::collection::vec(proptest::collection::vec(-6i64..=6, 2), 2..6)) {
            let a = to_big(&rows);
            let k = left_kernel(&a, 2);
            for v in &k {
                prop_assert!(brute_left_kernel_contains(&a, v));
            }
            // brute-force: every small kernel vector lies in the lattice
            let m = rows.len();
            if m <= 4 {
                let range = -3i64..=3;
                let mut idx = vec![-3i64; m];
                loop {
                    let v: Vec<BigInt> = idx.iter().map(|&x| BigInt::from(x)).collect();
                    if brute_left_kernel_contains(&a, &v) {
                        prop_assert!(hnf_contains(&k, &v));
                    }
                    let mut i = 0;
                    while i < m && idx[i] == *range.end() {
                        idx[i] = *range.start();
                        i += 1;
                    }
                    if i == m { break; }
                    idx[i] += 1;
                }
            }
        }

        #[test]
        fn completion_is_unimodular(v in proptest::collection::vec(-20i64..=20, 3)) {
            let g = v.iter().fold(0i64, |g, &x| g.gcd(&x));
            prop_assume!(g != 0);
            let w = vec![v.iter().map(|&x| BigInt::from(x / g)).collect::<Vec<_>>()];
            let m = complete_to_unimodular(&w, 3).unwrap();
            prop_assert!(determinant(&m).abs().is_one());
            prop_assert_eq!(&m[2], &w[0]);
        }
    }
}
