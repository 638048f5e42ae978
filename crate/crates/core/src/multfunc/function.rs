use std::fmt;
use std::sync::Arc;

use super::sieve::{liouville_sieve, SieveTable, DEFAULT_SEGMENT};
use crate::error::{Error, Result};

type PrimePowerRule = dyn Fn(u64, u32) -> f64 + Send + Sync;

/// Which closed-form family a function belongs to; lets tabulation and predictions
/// take shortcuts.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Liouville,
    Constant,
    /// `1_{(n, m) = 1}`.
    Coprime(u64),
    /// A real (quadratic or principal) Dirichlet character, as a table mod `q`.
    RealCharacter { modulus: u64, values: Vec<i8> },
    Custom,
}

#[derive(Clone)]
pub struct MultiplicativeFunction {
    name: String,
    rule: Arc<PrimePowerRule>,
    completely_multiplicative: bool,
    extension: f64,
    family: Family,
}

impl fmt::Debug for MultiplicativeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplicativeFunction")
            .field("name", &self.name)
            .field("completely_multiplicative", &self.completely_multiplicative)
            .field("extension", &self.extension)
            .finish()
    }
}

/// Smallest-prime-factor factorisation by trial division.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut k = 0;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

impl MultiplicativeFunction {
    /// A function given by its values on prime powers.
    pub fn custom(
        name: impl Into<String>,
        completely_multiplicative: bool,
        rule: impl Fn(u64, u32) -> f64 + Send + Sync + 'static,
    ) -> Self {
        MultiplicativeFunction {
            name: name.into(),
            rule: Arc::new(rule),
            completely_multiplicative,
            extension: 1.0,
            family: Family::Custom,
        }
    }

    pub fn liouville() -> Self {
        let mut f = Self::custom("liouville", true, |_, k| if k % 2 == 0 { 1.0 } else { -1.0 });
        f.family = Family::Liouville;
        f
    }

    pub fn one() -> Self {
        let mut f = Self::custom("one", true, |_, _| 1.0);
        f.family = Family::Constant;
        f
    }

    /// `1_{(n, m) = 1}`, completely multiplicative.
    pub fn coprime_to(m: u64) -> Self {
        let primes: Vec<u64> = factorize(m).into_iter().map(|(p, _)| p).collect();
        let mut f = Self::custom(format!("coprime{}", m), true, move |p, _| {
            if primes.contains(&p) {
                0.0
            } else {
                1.0
            }
        });
        f.family = Family::Coprime(m);
        f
    }

    /// A real character from its table of values mod `q` (entries −1, 0, 1).
    pub fn real_character(name: impl Into<String>, values: Vec<i8>) -> Result<Self> {
        let q = values.len() as u64;
        if q == 0 || values.iter().any(|v| v.abs() > 1) {
            return Err(Error::InvalidArgument("character table must hold −1, 0, 1 values".into()));
        }
        let table = values.clone();
        let mut f = Self::custom(name, true, move |p, k| {
            let v = table[(p % q) as usize] as f64;
            v.powi(k as i32)
        });
        f.family = Family::RealCharacter { modulus: q, values };
        Ok(f)
    }

    pub fn with_extension(mut self, value: f64) -> Self {
        self.extension = value;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn completely_multiplicative(&self) -> bool {
        self.completely_multiplicative
    }

    pub fn extension(&self) -> f64 {
        self.extension
    }

    pub fn prime_power(&self, p: u64, k: u32) -> f64 {
        if k == 0 {
            1.0
        } else {
            (self.rule)(p, k)
        }
    }

    /// f(n) for n ≥ 1 from the factorisation; the extension constant for n ≤ 0.
    pub fn eval(&self, n: i64) -> f64 {
        if n <= 0 {
            return self.extension;
        }
        match &self.family {
            Family::Constant => 1.0,
            Family::Coprime(m) => {
                if num_integer::gcd(n as u64, *m) == 1 {
                    1.0
                } else {
                    0.0
                }
            }
            Family::RealCharacter { modulus, values } => values[(n as u64 % modulus) as usize] as f64,
            _ => factorize(n as u64).into_iter().map(|(p, k)| self.prime_power(p, k)).product(),
        }
    }

    /// Checks `|f(p^k)| <= 1` and, when declared, `f(p^k) = f(p)^k` for prime powers up
    /// to `limit`.
    pub fn validate(&self, limit: u64) -> Result<()> {
        for p in super::sieve::primes_up_to(limit) {
            let fp = self.prime_power(p, 1);
            let mut pk = p;
            let mut k = 1;
            loop {
                let v = self.prime_power(p, k);
                if !(v.abs() <= 1.0) {
                    return Err(Error::InvalidArgument(format!("|{}({}^{})| > 1", self.name, p, k)));
                }
                if self.completely_multiplicative && (v - fp.powi(k as i32)).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "{} declared completely multiplicative but f({}^{}) != f({})^{}",
                        self.name, p, k, p, k
                    )));
                }
                match pk.checked_mul(p) {
                    Some(next) if next <= limit => {
                        pk = next;
                        k += 1;
                    }
                    _ => break,
                }
            }
        }
        Ok(())
    }

    /// Whether f(n) = 0 for some n ≥ 1, judged on primes up to `limit`.
    pub fn vanishes_somewhere(&self, limit: u64) -> bool {
        match &self.family {
            Family::Liouville | Family::Constant => false,
            Family::Coprime(m) => *m > 1,
            Family::RealCharacter { modulus, .. } => *modulus > 1,
            Family::Custom => super::sieve::primes_up_to(limit)
                .into_iter()
                .any(|p| self.prime_power(p, 1) == 0.0 || self.prime_power(p, 2) == 0.0),
        }
    }

    /// Tabulates f on `0..=limit` (argument 0 and negatives use the extension).
    pub fn tabulate(&self, limit: u64) -> Result<FunctionTable> {
        Ok(match &self.family {
            Family::Constant => FunctionTable::Constant { value: 1.0, extension: self.extension },
            Family::Liouville => FunctionTable::Signs {
                table: Arc::new(liouville_sieve(limit.max(1), DEFAULT_SEGMENT)?),
                extension: self.extension,
            },
            _ => FunctionTable::Dense { values: Arc::new(self.dense_values(limit)), extension: self.extension },
        })
    }

    /// f(1..=limit) via a smallest-prime-factor sieve; index 0 unused.
    fn dense_values(&self, limit: u64) -> Vec<f64> {
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut values = vec![0.0f64; n + 1];
        if n >= 1 {
            values[1] = 1.0;
        }
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
            let p = spf[i] as usize;
            let mut m = i / p;
            let mut k = 1u32;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            values[i] = values[m] * self.prime_power(p as u64, k);
        }
        values
    }
}

/// Precomputed values of a multiplicative function on `1..=limit`.
#[derive(Clone, Debug)]
pub enum FunctionTable {
    Signs { table: Arc<SieveTable>, extension: f64 },
    Dense { values: Arc<Vec<f64>>, extension: f64 },
    Constant { value: f64, extension: f64 },
}

impl FunctionTable {
    /// Largest argument covered.
    pub fn limit(&self) -> u64 {
        match self {
            FunctionTable::Signs { table, .. } => table.limit(),
            FunctionTable::Dense { values, .. } => values.len() as u64 - 1,
            FunctionTable::Constant { .. } => u64::MAX,
        }
    }

    #[inline]
    pub fn get(&self, m: i64) -> f64 {
        match self {
            FunctionTable::Signs { table, extension } => {
                if m <= 0 {
                    *extension
                } else {
                    table.lambda(m as u64) as f64
                }
            }
            FunctionTable::Dense { values, extension } => {
                if m <= 0 {
                    *extension
                } else {
                    values[m as usize]
                }
            }
            FunctionTable::Constant { value, extension } => {
                if m <= 0 {
                    *extension
                } else {
                    *value
                }
            }
        }
    }
}
