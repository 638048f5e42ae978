use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};

/// Default cap on decimal refinement: intervals narrower than 10^-256 are never requested.
pub const DEFAULT_MAX_DIGITS: usize = 256;

/// How a basis element is located on the real line.
#[derive(Clone, Debug)]
pub enum Embedding {
    /// The unit, or any basis element that happens to be rational.
    Rational(BigRational),
    /// Positive square root of an integer, computable to any precision.
    Sqrt(BigUint),
    /// A fixed decimal expansion: the value lies in `[floor, floor + 1] / 10^places`.
    Decimal { floor: BigInt, places: usize },
}

impl Embedding {
    /// Parses a truncated decimal expansion such as `1.41421356` or `-0.7071`.
    pub fn from_decimal(text: &str) -> Result<Self> {
        let t = text.trim().replace('_', "");
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest.to_string()),
            None => (false, t.trim_start_matches('+').to_string()),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((a, b)) => (a.to_string(), b.to_string()),
            None => (body.clone(), String::new()),
        };
        let digits = format!("{}{}", int_part, frac_part);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(Error::Parse(format!("bad decimal expansion `{}`", text)));
        }
        let magnitude: BigInt = digits.parse().map_err(|_| Error::Parse(text.to_string()))?;
        let places = frac_part.len();
        // truncation toward zero: a negative expansion bounds the value from above
        let floor = if neg { -magnitude - 1 } else { magnitude };
        Ok(Embedding::Decimal { floor, places })
    }

    /// Lower end `l` of an interval `[l, l+1] / 10^places` containing the value.
    pub(crate) fn floor_at(&self, places: usize, name: &str) -> Result<BigInt> {
        match self {
            Embedding::Rational(r) => {
                let scaled = r * BigRational::from_integer(pow10(places));
                Ok(scaled.floor().to_integer())
            }
            Embedding::Sqrt(n) => {
                let scaled = n * pow10u(2 * places);
                Ok(BigInt::from(scaled.sqrt()))
            }
            Embedding::Decimal { floor, places: have } => {
                if places > *have {
                    return Err(Error::PrecisionExhausted {
                        basis: name.to_string(),
                        available: *have,
                        requested: places,
                    });
                }
                Ok(floor.div_floor(&pow10(*have - places)))
            }
        }
    }

    pub fn available_places(&self) -> Option<usize> {
        match self {
            Embedding::Decimal { places, .. } => Some(*places),
            _ => None,
        }
    }
}

pub(crate) fn pow10(k: usize) -> BigInt {
    num_traits::pow(BigInt::from(10u32), k)
}

fn pow10u(k: usize) -> BigUint {
    num_traits::pow(BigUint::from(10u32), k)
}

/// A finite-dimensional commutative Q-algebra with a chosen real embedding.
///
/// Basis element 0 is always the unit. Elements are [`ExactReal`](super::ExactReal)s
/// holding a rational coefficient per basis element.
pub struct NumberField {
    basis_names: Vec<String>,
    /// `product[i][j]` expresses `b_i * b_j` in the basis.
    product: Vec<Vec<Vec<BigRational>>>,
    embeddings: Vec<Embedding>,
    independence_asserted: bool,
    max_digits: usize,
}

impl fmt::Debug for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumberField")
            .field("basis", &self.basis_names)
            .finish()
    }
}

impl NumberField {
    pub fn new(
        basis_names: Vec<String>,
        product: Vec<Vec<Vec<BigRational>>>,
        embeddings: Vec<Embedding>,
        independence_asserted: bool,
    ) -> Result<Arc<Self>> {
        let n = basis_names.len();
        if n == 0 {
            return Err(Error::InvalidField("empty basis".into()));
        }
        if embeddings.len() != n || product.len() != n {
            return Err(Error::InvalidField("basis, product table and embeddings disagree in size".into()));
        }
        for row in &product {
            if row.len() != n || row.iter().any(|v| v.len() != n) {
                return Err(Error::InvalidField("product table is not n x n x n".into()));
            }
        }
        let field = NumberField {
            basis_names,
            product,
            embeddings,
            independence_asserted,
            max_digits: DEFAULT_MAX_DIGITS,
        };
        field.check_algebra()?;
        Ok(Arc::new(field))
    }

    /// The field Q itself.
    pub fn rationals() -> Arc<Self> {
        NumberField::new(
            vec!["1".into()],
            vec![vec![vec![BigRational::one()]]],
            vec![Embedding::Rational(BigRational::one())],
            true,
        )
        .expect("Q is a valid field")
    }

    /// `Q(sqrt r_1, ..., sqrt r_k)` for pairwise coprime squarefree radicands.
    ///
    /// The basis is indexed by subsets `S` of the radicands, `b_S = sqrt(prod_S r)`,
    /// named `sqrtN` with `N` the product; the empty subset is the unit.
    pub fn multiquadratic(radicands: &[u64]) -> Result<Arc<Self>> {
        for (i, &r) in radicands.iter().enumerate() {
            if r < 2 || !is_squarefree(r) {
                return Err(Error::InvalidField(format!("radicand {} is not squarefree > 1", r)));
            }
            for &s in &radicands[..i] {
                if r.gcd(&s) != 1 {
                    return Err(Error::InvalidField(format!("radicands {} and {} share a factor", s, r)));
                }
            }
        }
        let k = radicands.len();
        let n = 1usize << k;
        let value = |mask: usize| -> u64 {
            (0..k).filter(|b| mask >> b & 1 == 1).map(|b| radicands[b]).product()
        };
        let names = (0..n)
            .map(|m| if m == 0 { "1".to_string() } else { format!("sqrt{}", value(m)) })
            .collect();
        let mut product = vec![vec![vec![BigRational::zero(); n]; n]; n];
        for i in 0..n {
            for j in 0..n {
                let common = value(i & j);
                product[i][j][i ^ j] = BigRational::from_integer(BigInt::from(common));
            }
        }
        let embeddings = (0..n)
            .map(|m| {
                if m == 0 {
                    Embedding::Rational(BigRational::one())
                } else {
                    Embedding::Sqrt(BigUint::from(value(m)))
                }
            })
            .collect();
        NumberField::new(names, product, embeddings, true)
    }

    pub fn with_max_digits(self: Arc<Self>, max_digits: usize) -> Arc<Self> {
        let mut f = Arc::try_unwrap(self).unwrap_or_else(|a| (*a).clone_inner());
        f.max_digits = max_digits;
        Arc::new(f)
    }

    fn clone_inner(&self) -> Self {
        NumberField {
            basis_names: self.basis_names.clone(),
            product: self.product.clone(),
            embeddings: self.embeddings.clone(),
            independence_asserted: self.independence_asserted,
            max_digits: self.max_digits,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis_names.len()
    }

    pub fn basis_names(&self) -> &[String] {
        &self.basis_names
    }

    pub fn basis_index(&self, name: &str) -> Option<usize> {
        self.basis_names.iter().position(|b| b == name)
    }

    pub fn product_of(&self, i: usize, j: usize) -> &[BigRational] {
        &self.product[i][j]
    }

    pub fn embedding(&self, i: usize) -> &Embedding {
        &self.embeddings[i]
    }

    pub fn independence_asserted(&self) -> bool {
        self.independence_asserted
    }

    pub fn max_digits(&self) -> usize {
        self.max_digits
    }

    /// Digits actually usable for refinement: the cap, limited by any fixed decimal expansion.
    pub fn usable_digits(&self) -> usize {
        self.embeddings
            .iter()
            .filter_map(Embedding::available_places)
            .fold(self.max_digits, usize::min)
    }

    fn check_algebra(&self) -> Result<()> {
        let n = self.dim();
        for j in 0..n {
            let unit_row = &self.product[0][j];
            for (k, c) in unit_row.iter().enumerate() {
                let want = if k == j { BigRational::one() } else { BigRational::zero() };
                if *c != want {
                    return Err(Error::InvalidField(format!(
                        "basis element 0 does not act as the unit on `{}`",
                        self.basis_names[j]
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if self.product[i][j] != self.product[j][i] {
                    return Err(Error::InvalidField(format!(
                        "product table not commutative at ({}, {})",
                        self.basis_names[i], self.basis_names[j]
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let left = self.mul_vec(&self.mul_vec(&unit(n, i), &unit(n, j)), &unit(n, k));
                    let right = self.mul_vec(&unit(n, i), &self.mul_vec(&unit(n, j), &unit(n, k)));
                    if left != right {
                        return Err(Error::InvalidField(format!(
                            "product table not associative at ({}, {}, {})",
                            self.basis_names[i], self.basis_names[j], self.basis_names[k]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub(crate) fn mul_vec(&self, x: &[BigRational], y: &[BigRational]) -> Vec<BigRational> {
        let n = self.dim();
        let mut out = vec![BigRational::zero(); n];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let c = xi * yj;
                for (k, t) in self.product[i][j].iter().enumerate() {
                    if !t.is_zero() {
                        out[k] += &c * t;
                    }
                }
            }
        }
        out
    }

    /// Checks that the embedding respects the product table: for every basis pair the
    /// interval of `b_i * b_j` (via the table) meets the product of the two intervals.
    pub fn check_embedding(&self, places: usize) -> Result<()> {
        let n = self.dim();
        let scale = BigRational::from_integer(pow10(places));
        let iv = |i: usize| -> Result<(BigRational, BigRational)> {
            let l = self.embeddings[i].floor_at(places, &self.basis_names[i])?;
            Ok((
                BigRational::from_integer(l.clone()) / &scale,
                BigRational::from_integer(l + 1) / &scale,
            ))
        };
        let ivs: Vec<_> = (0..n).map(iv).collect::<Result<_>>()?;
        for i in 0..n {
            for j in i..n {
                let (a, b) = &ivs[i];
                let (c, d) = &ivs[j];
                let cands = [a * c, a * d, b * c, b * d];
                let lo = cands.iter().min().unwrap().clone();
                let hi = cands.iter().max().unwrap().clone();
                let mut tlo = BigRational::zero();
                let mut thi = BigRational::zero();
                for (k, t) in self.product[i][j].iter().enumerate() {
                    let (l, h) = &ivs[k];
                    if t.is_positive() {
                        tlo += t * l;
                        thi += t * h;
                    } else if t.is_negative() {
                        tlo += t * h;
                        thi += t * l;
                    }
                }
                if thi < lo || tlo > hi {
                    return Err(Error::InvalidField(format!(
                        "embedding disagrees with product table at ({}, {})",
                        self.basis_names[i], self.basis_names[j]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Parses the structured-text field definition (TOML):
    ///
    /// ```toml
    /// schema = "bohr-chowla/field/1"
    /// basis = ["1", "sqrt2"]
    /// product = [ { i = 1, j = 1, coeffs = ["2", "0"] } ]
    /// [decimals]
    /// sqrt2 = "1.414213562373095048801688724209698078569671875376948073176679..."
    /// ```
    pub fn from_definition(text: &str) -> Result<Arc<Self>> {
        let def: FieldDefinition = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        def.build()
    }
}

fn unit(n: usize, i: usize) -> Vec<BigRational> {
    let mut v = vec![BigRational::zero(); n];
    v[i] = BigRational::one();
    v
}

fn is_squarefree(mut n: u64) -> bool {
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

pub(crate) fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| Error::Parse(format!("bad rational `{}`", s)))?;
        let d: BigInt = b.trim().parse().map_err(|_| Error::Parse(format!("bad rational `{}`", s)))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{}`", s)));
        }
        Ok(BigRational::new(n, d))
    } else if s.contains('.') {
        let neg = s.starts_with('-');
        let body = s.trim_start_matches(['-', '+']);
        let (a, b) = body.split_once('.').unwrap();
        let digits: BigInt = format!("{}{}", a, b)
            .parse()
            .map_err(|_| Error::Parse(format!("bad decimal `{}`", s)))?;
        let r = BigRational::new(digits, pow10(b.len()));
        Ok(if neg { -r } else { r })
    } else {
        let n: BigInt = s.parse().map_err(|_| Error::Parse(format!("bad rational `{}`", s)))?;
        Ok(BigRational::from_integer(n))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldDefinition {
    schema: Option<String>,
    basis: Vec<String>,
    #[serde(default)]
    product: Vec<ProductEntry>,
    #[serde(default)]
    decimals: std::collections::BTreeMap<String, String>,
    #[serde(default = "yes")]
    independence_asserted: bool,
    max_digits: Option<usize>,
}

fn yes() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductEntry {
    i: usize,
    j: usize,
    coeffs: Vec<String>,
}

pub const FIELD_SCHEMA: &str = "bohr-chowla/field/1";

impl FieldDefinition {
    fn build(self) -> Result<Arc<NumberField>> {
        if let Some(s) = &self.schema {
            if s != FIELD_SCHEMA {
                return Err(Error::Parse(format!("unsupported field schema `{}`", s)));
            }
        }
        let n = self.basis.len();
        if n == 0 || self.basis[0] != "1" {
            return Err(Error::Parse("basis must start with the unit `1`".into()));
        }
        let mut product: Vec<Vec<Option<Vec<BigRational>>>> = vec![vec![None; n]; n];
        for j in 0..n {
            product[0][j] = Some(unit(n, j));
            product[j][0] = Some(unit(n, j));
        }
        for e in &self.product {
            if e.i >= n || e.j >= n || e.coeffs.len() != n {
                return Err(Error::Parse(format!("product entry ({}, {}) out of range", e.i, e.j)));
            }
            let v: Vec<BigRational> = e.coeffs.iter().map(|c| parse_rational(c)).collect::<Result<_>>()?;
            product[e.i][e.j] = Some(v.clone());
            if product[e.j][e.i].is_none() {
                product[e.j][e.i] = Some(v);
            }
        }
        let mut table = Vec::with_capacity(n);
        for (i, row) in product.into_iter().enumerate() {
            let mut out = Vec::with_capacity(n);
            for (j, cell) in row.into_iter().enumerate() {
                out.push(cell.ok_or_else(|| {
                    Error::Parse(format!("product table is missing entry `{} * {}`", self.basis[i], self.basis[j]))
                })?);
            }
            table.push(out);
        }
        let mut embeddings = vec![Embedding::Rational(BigRational::one())];
        for name in &self.basis[1..] {
            let text = self
                .decimals
                .get(name)
                .ok_or_else(|| Error::Parse(format!("missing decimal expansion for `{}`", name)))?;
            embeddings.push(Embedding::from_decimal(text)?);
        }
        let field = NumberField::new(self.basis, table, embeddings, self.independence_asserted)?;
        let field = match self.max_digits {
            Some(d) => field.with_max_digits(d),
            None => field,
        };
        let check = field.usable_digits().min(40);
        field.check_embedding(check)?;
        Ok(field)
    }
}
