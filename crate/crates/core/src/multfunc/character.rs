use num_complex::Complex64;
use num_integer::Integer;

use super::function::factorize;
use crate::error::{Error, Result};

pub const DEFAULT_MODULUS_BOUND: u64 = 10_000;
const NOT_UNIT: u32 = u32::MAX;

/// A Dirichlet character mod `q`, stored exactly: `χ(a) = e(k_a / order)` for units,
/// zero otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirichletCharacter {
    modulus: u64,
    order: u32,
    exps: Vec<u32>,
}

impl DirichletCharacter {
    pub fn principal(q: u64) -> Self {
        let exps = (0..q).map(|a| if a.gcd(&q) == 1 { 0 } else { NOT_UNIT }).collect();
        DirichletCharacter { modulus: q, order: 1, exps }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Exponent `k` with `χ(n) = e(k / order)`, or `None` when `gcd(n, q) > 1`.
    pub fn exponent(&self, n: i64) -> Option<(u32, u32)> {
        let a = n.rem_euclid(self.modulus as i64) as usize;
        let k = self.exps[a];
        (k != NOT_UNIT).then_some((k, self.order))
    }

    pub fn value(&self, n: i64) -> Complex64 {
        match self.exponent(n) {
            None => Complex64::new(0.0, 0.0),
            Some((k, ord)) => {
                let t = std::f64::consts::TAU * k as f64 / ord as f64;
                Complex64::new(t.cos(), t.sin())
            }
        }
    }

    pub fn is_principal(&self) -> bool {
        self.exps.iter().all(|&k| k == 0 || k == NOT_UNIT)
    }

    /// Real-valued (all values in {−1, 0, 1}).
    pub fn is_real(&self) -> bool {
        self.exps.iter().all(|&k| k == NOT_UNIT || (2 * k as u64) % self.order as u64 == 0)
    }

    /// Table of values for a real character.
    pub fn real_values(&self) -> Option<Vec<i8>> {
        self.is_real().then(|| {
            self.exps
                .iter()
                .map(|&k| match k {
                    NOT_UNIT => 0,
                    0 => 1,
                    _ => -1,
                })
                .collect()
        })
    }

    /// `χ · conj(ψ)` as a character, for orthogonality checks.
    pub fn times_conj(&self, other: &DirichletCharacter) -> Option<DirichletCharacter> {
        if self.modulus != other.modulus {
            return None;
        }
        let order = self.order.lcm(&other.order);
        let (s, t) = (order / self.order, order / other.order);
        let exps = self
            .exps
            .iter()
            .zip(&other.exps)
            .map(|(&a, &b)| {
                if a == NOT_UNIT || b == NOT_UNIT {
                    NOT_UNIT
                } else {
                    ((a as u64 * s as u64 + (order - (b * t) % order) as u64) % order as u64) as u32
                }
            })
            .collect();
        Some(DirichletCharacter { modulus: self.modulus, order, exps })
    }
}

/// One cyclic factor of `(Z/p^e)^*`: generator, order and a discrete-log table on
/// residues mod `p^e`.
struct CyclicFactor {
    pe: u64,
    order: u64,
    log: Vec<u64>,
}

fn power_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn primitive_root_mod_p(p: u64) -> u64 {
    let phi = p - 1;
    let factors: Vec<u64> = factorize(phi).into_iter().map(|(f, _)| f).collect();
    (2..p)
        .find(|&g| factors.iter().all(|&f| power_mod(g, phi / f, p) != 1))
        .unwrap_or(1)
}

/// Cyclic decomposition of `(Z/p^e)^*` as factors with their own log tables.
fn cyclic_factors(p: u64, e: u32) -> Vec<CyclicFactor> {
    let pe = p.pow(e);
    let table = |g: u64, order: u64, sign_split: bool| -> Vec<u64> {
        let mut log = vec![u64::MAX; pe as usize];
        let mut x = 1u64;
        for k in 0..order {
            log[x as usize] = k;
            if sign_split {
                // -g^k carries the same exponent of 5
                log[(pe - x) as usize] = k;
            }
            x = x * g % pe;
        }
        log
    };
    if p == 2 {
        match e {
            1 => vec![],
            2 => vec![CyclicFactor { pe, order: 2, log: table(3, 2, false) }],
            _ => {
                // (Z/2^e)^* = <-1> x <5>
                let order5 = pe / 4;
                let minus: Vec<u64> = (0..pe).map(|a| if a % 4 == 1 { 0 } else { 1 }).collect();
                vec![
                    CyclicFactor { pe, order: 2, log: minus },
                    CyclicFactor { pe, order: order5, log: table(5, order5, true) },
                ]
            }
        }
    } else {
        let mut g = primitive_root_mod_p(p);
        if e > 1 && power_mod(g, p - 1, p * p) == 1 {
            g += p;
        }
        let order = pe / p * (p - 1);
        vec![CyclicFactor { pe, order, log: table(g, order, false) }]
    }
}

/// All φ(q) Dirichlet characters mod `q`.
pub fn characters_mod(q: u64) -> Result<Vec<DirichletCharacter>> {
    characters_mod_bounded(q, DEFAULT_MODULUS_BOUND)
}

pub fn characters_mod_bounded(q: u64, bound: u64) -> Result<Vec<DirichletCharacter>> {
    if q == 0 {
        return Err(Error::InvalidArgument("modulus must be at least 1".into()));
    }
    if q > bound {
        return Err(Error::ResourceLimit(format!("modulus {} exceeds bound {}", q, bound)));
    }
    let factors: Vec<CyclicFactor> =
        factorize(q).into_iter().flat_map(|(p, e)| cyclic_factors(p, e)).collect();
    let exponent = factors.iter().fold(1u64, |acc, f| acc.lcm(&f.order));
    // logs of every residue in every factor
    let logs: Vec<Option<Vec<u64>>> = (0..q)
        .map(|a| {
            if a.gcd(&q) != 1 {
                return None;
            }
            Some(factors.iter().map(|f| f.log[(a % f.pe) as usize]).collect())
        })
        .collect();
    let count: u64 = factors.iter().map(|f| f.order).product();
    let mut out = Vec::with_capacity(count as usize);
    let mut idx = vec![0u64; factors.len()];
    loop {
        let exps = logs
            .iter()
            .map(|l| match l {
                None => NOT_UNIT,
                Some(l) => {
                    let mut k = 0u64;
                    for ((j, lg), f) in idx.iter().zip(l).zip(&factors) {
                        k += j * lg % f.order * (exponent / f.order);
                    }
                    (k % exponent) as u32
                }
            })
            .collect();
        out.push(reduce(DirichletCharacter { modulus: q, order: exponent as u32, exps }));
        let mut i = 0;
        while i < idx.len() && idx[i] + 1 == factors[i].order {
            idx[i] = 0;
            i += 1;
        }
        if i == idx.len() {
            break;
        }
        idx[i] += 1;
    }
    Ok(out)
}

/// Lowers `order` to the actual order of the character.
fn reduce(mut c: DirichletCharacter) -> DirichletCharacter {
    let g = c
        .exps
        .iter()
        .filter(|&&k| k != NOT_UNIT)
        .fold(c.order, |g, &k| g.gcd(&k));
    if g > 1 {
        c.order /= g;
        for k in c.exps.iter_mut() {
            if *k != NOT_UNIT {
                *k /= g;
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi(q: u64) -> u64 {
        (1..=q).filter(|a| a.gcd(&q) == 1).count() as u64
    }

    #[test]
    fn modulus_one() {
        let cs = characters_mod(1).unwrap();
        assert_eq!(cs.len(), 1);
        for n in -5..20 {
            assert_eq!(cs[0].value(n), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn modulus_four() {
        let cs = characters_mod(4).unwrap();
        assert_eq!(cs.len(), 2);
        let nonprincipal: Vec<_> = cs.iter().filter(|c| !c.is_principal()).collect();
        assert_eq!(nonprincipal.len(), 1);
        assert_eq!(nonprincipal[0].real_values().unwrap()[3], -1);
    }

    #[test]
    fn modulus_five() {
        let cs = characters_mod(5).unwrap();
        assert_eq!(cs.len(), 4);
        for c in &cs {
            for a in 1..5 {
                let (k, ord) = c.exponent(a).unwrap();
                assert_eq!(4 % ord, 0, "value is a 4th root of unity");
                assert!(k < ord);
            }
        }
    }

    #[test]
    fn counts_multiplicativity_and_orthogonality() {
        for q in 1..=100u64 {
            let cs = characters_mod(q).unwrap();
            assert_eq!(cs.len() as u64, phi(q), "q = {}", q);
            for c in &cs {
                for a in 0..q as i64 {
                    for b in 0..q as i64 {
                        let lhs = c.value(a * b);
                        let rhs = c.value(a) * c.value(b);
                        assert!((lhs - rhs).norm() < 1e-9);
                    }
                }
            }
            for (i, x) in cs.iter().enumerate() {
                for (j, y) in cs.iter().enumerate() {
                    let prod = x.times_conj(y).unwrap();
                    // exact: the product character is principal exactly when i = j
                    assert_eq!(prod.is_principal(), i == j, "q = {}", q);
                    let s: Complex64 = (0..q as i64).map(|a| x.value(a) * y.value(a).conj()).sum();
                    if i != j {
                        assert!(s.norm() < 1e-9, "q = {}: {}", q, s);
                    } else {
                        assert!((s.re - phi(q) as f64).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn bound_is_enforced() {
        assert!(matches!(characters_mod(10_001), Err(Error::ResourceLimit(_))));
        assert_eq!(characters_mod_bounded(10_001, 20_000).unwrap().len() as u64, phi(10_001));
    }
}
