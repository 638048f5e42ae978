use std::cmp::Ordering;

use num_integer::Integer;
use rayon::prelude::*;

use super::sequence::{shifted_bohr_sets, BeattySequence, FracCondition};
use crate::bohr::{BohrSet, ConvexRegion, Interval};
use crate::error::{Error, Result};
use crate::realfield::{AffineForm, ExactReal};

/// Default half-width of the window checked on construction.
pub const DEFAULT_WINDOW: i64 = 100_000;

#[derive(Clone, Debug)]
pub enum PartitionKind {
    IrrationalRatio {
        /// `u_i = i + γβ₁ − β₂` for the first piece; later pieces add one each.
        u0: ExactReal,
        /// Grid size of the Bohr-set form.
        grid: usize,
    },
    RationalRatio {
        p: u64,
        q: u64,
        theta: ExactReal,
        theta_rational: bool,
    },
}

/// One cell of a Beatty partition.
#[derive(Clone, Debug)]
pub struct BeattyPiece {
    /// `n_i` in `L_i(x) = γx + n_i` (irrational kind) or `r_i` (rational kind).
    pub offset: i64,
    /// Leading coefficient of `L_i`: `α₂/α₁`, or `q/p` for the rational kind.
    pub slope: ExactReal,
    /// Rational kind: the exact cell as a disjoint union. Irrational kind: the grid
    /// sets `B_{i,k}`, equal to the cell outside its error set.
    pub bohr_sets: Vec<BohrSet>,
    /// Rational kind: the `(i, j)` with `r = pj − qi` merged into this piece.
    pub indices: Vec<(i64, i64)>,
    line: AffineForm,
}

#[derive(Clone, Debug)]
pub struct BeattyPartition {
    pub kind: PartitionKind,
    pub pieces: Vec<BeattyPiece>,
    pub s1: BeattySequence,
    pub s2: BeattySequence,
    gamma: ExactReal,
    /// `(γ, u₀)` in floating point for screening.
    approx: (f64, f64),
    /// Rational kind: `n ↦ θn`.
    theta_form: Option<AffineForm>,
}

/// Outcome of an exhaustive check over `[-window, window]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PartitionReport {
    pub checked: u64,
    /// Integers not in exactly one piece.
    pub coverage_failures: u64,
    /// Integers where the piece's floor identity fails.
    pub identity_failures: u64,
    /// Irrational kind: integers where the grid sets disagree with the exact cell.
    pub grid_mismatches: u64,
    /// Irrational kind: grid disagreements outside the error set (must be zero).
    pub unexplained_mismatches: u64,
    /// Irrational kind: integers in some piece's error set.
    pub error_set_hits: u64,
}

impl PartitionReport {
    pub fn ok(&self) -> bool {
        self.coverage_failures == 0 && self.identity_failures == 0 && self.unexplained_mismatches == 0
    }

    pub fn error_set_density(&self) -> f64 {
        self.error_set_hits as f64 / self.checked.max(1) as f64
    }

    fn merge(mut self, o: Self) -> Self {
        self.checked += o.checked;
        self.coverage_failures += o.coverage_failures;
        self.identity_failures += o.identity_failures;
        self.grid_mismatches += o.grid_mismatches;
        self.unexplained_mismatches += o.unexplained_mismatches;
        self.error_set_hits += o.error_set_hits;
        self
    }
}

fn ceil_i64(x: &ExactReal) -> Result<i64> {
    Ok(-(-x).floor_i64()?)
}

/// `α₂n + β₂ = γ⌊α₁n + β₁⌋ + r_n` with `γ = α₂/α₁` irrational.
pub fn partition_irrational_pair(s1: &BeattySequence, s2: &BeattySequence, epsilon: f64) -> Result<BeattyPartition> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {}", epsilon)));
    }
    if !s1.alpha().same_field(s2.alpha()) {
        return Err(Error::FieldMismatch);
    }
    let closure = |e: Error| match e {
        Error::DivisionByZero => e,
        _ => Error::FieldClosure("α₂/α₁".into()),
    };
    let gamma = s2.alpha().try_div(s1.alpha()).map_err(closure)?;
    if gamma.is_rational() {
        return Err(Error::RationalRatio);
    }
    let gamma_inv = s1.alpha().try_div(s2.alpha()).map_err(closure)?;
    let (b1, b2) = (s1.beta(), s2.beta());
    let base = &(&gamma * b1) - b2;
    // the piece index is ⌈γ{α₁n+β₁} − γβ₁ + β₂ − {α₂n+β₂}⌉
    let shift = -&base;
    let i_min = shift.floor_i64()?;
    let i_max = ceil_i64(&(&shift + &gamma))?;
    let grid = (1.0 / epsilon).ceil() as usize;
    let field = s1.field().clone();
    let k_inv = ExactReal::from_ratio(&field, 1, grid as i64);
    let alphas = [s1.alpha().clone(), s2.alpha().clone()];
    let betas = [b1.clone(), b2.clone()];
    let mut pieces = Vec::new();
    for i in i_min..=i_max {
        let u = &base + &ExactReal::from_int(&field, i);
        let mut sets = Vec::new();
        for k in 0..grid as i64 {
            let kk = k_inv.mul_int(k);
            // u − γx₁ ∈ (−k/K, 1 − k/K)  ⇔  x₁ ∈ ((u − 1 + k/K)/γ, (u + k/K)/γ)
            let lo = &(&(&u - &ExactReal::one(&field)) + &kk) * &gamma_inv;
            let hi = &(&u + &kk) * &gamma_inv;
            let conds = [
                FracCondition::open(lo, hi),
                FracCondition::half_open(kk.clone(), &kk + &k_inv),
            ];
            sets.extend(shifted_bohr_sets(&alphas, &betas, &conds, &format!("A{}k{}", i, k))?);
        }
        let line = AffineForm::new(&gamma, &ExactReal::from_int(&field, i))?;
        pieces.push(BeattyPiece { offset: i, slope: gamma.clone(), bohr_sets: sets, indices: Vec::new(), line });
    }
    let u0 = &base + &ExactReal::from_int(&field, i_min);
    let approx = (gamma.to_f64(), u0.to_f64());
    Ok(BeattyPartition {
        kind: PartitionKind::IrrationalRatio { u0, grid },
        pieces,
        s1: s1.clone(),
        s2: s2.clone(),
        approx,
        theta_form: None,
        gamma,
    })
}

/// `p⌊qθn + β_q⌋ − q⌊pθn + β_p⌋` is constant on cells cut out by `{θn}`.
pub fn partition_rational_pair(
    p: u64,
    q: u64,
    theta: &ExactReal,
    beta_p: &ExactReal,
    beta_q: &ExactReal,
) -> Result<BeattyPartition> {
    if p == 0 || q == 0 || p.gcd(&q) != 1 {
        return Err(Error::InvalidArgument(format!("p = {} and q = {} must be coprime and positive", p, q)));
    }
    if theta.signum()? != Ordering::Greater {
        return Err(Error::InvalidArgument("theta must be positive".into()));
    }
    let field = theta.field().clone();
    let s1 = BeattySequence::new(theta.mul_int(p as i64), beta_p.clone())?;
    let s2 = BeattySequence::new(theta.mul_int(q as i64), beta_q.clone())?;
    // breakpoints of x ↦ ⌊px + β_p⌋ and ⌊qx + β_q⌋ inside (0, 1)
    let mut cuts = vec![ExactReal::zero(&field)];
    for (m, b) in [(p as i64, beta_p), (q as i64, beta_q)] {
        let first = b.floor_i64()? + 1;
        for t in first..first + m {
            let x = (&ExactReal::from_int(&field, t) - b).mul_rational(&num_rational::BigRational::new(1.into(), m.into()));
            if x.signum()? == Ordering::Greater && x.cmp_exact(&ExactReal::one(&field))? == Ordering::Less {
                cuts.push(x);
            }
        }
    }
    let mut err = None;
    cuts.sort_by(|a, b| a.cmp_exact(b).unwrap_or_else(|e| {
        err = Some(e);
        Ordering::Equal
    }));
    if let Some(e) = err {
        return Err(e);
    }
    cuts.dedup();
    cuts.push(ExactReal::one(&field));
    let mut pieces: Vec<BeattyPiece> = Vec::new();
    let slope = ExactReal::from_ratio(&field, q as i64, p as i64);
    for w in cuts.windows(2) {
        let i = (&w[0].mul_int(p as i64) + beta_p).floor_i64()?;
        let j = (&w[0].mul_int(q as i64) + beta_q).floor_i64()?;
        let r = p as i64 * j - q as i64 * i;
        let region = ConvexRegion::from_intervals(&field, vec![Interval::half_open(w[0].clone(), w[1].clone())])?;
        let set = BohrSet::new(vec![theta.clone()], region, format!("r{}i{}j{}", r, i, j))?;
        match pieces.iter_mut().find(|pc| pc.offset == r) {
            Some(pc) => {
                pc.bohr_sets.push(set);
                pc.indices.push((i, j));
            }
            None => {
                let line = AffineForm::new(&slope, &ExactReal::from_ratio(&field, r, p as i64))?;
                pieces.push(BeattyPiece { offset: r, slope: slope.clone(), bohr_sets: vec![set], indices: vec![(i, j)], line });
            }
        }
    }
    pieces.sort_by_key(|pc| pc.offset);
    Ok(BeattyPartition {
        kind: PartitionKind::RationalRatio { p, q, theta: theta.clone(), theta_rational: theta.is_rational() },
        pieces,
        s1,
        s2,
        approx: (slope.to_f64(), 0.0),
        theta_form: Some(AffineForm::new(theta, &ExactReal::zero(&field))?),
        gamma: slope,
    })
}

/// Margin under which the floating screen defers to exact arithmetic.
const SCREEN: f64 = 1e-9;

impl BeattyPartition {
    /// Runs [`verify`](Self::verify) and fails unless the report is clean.
    pub fn verified(self, window: i64) -> Result<(Self, PartitionReport)> {
        let rep = self.verify(window)?;
        if !rep.ok() {
            return Err(Error::InvalidArgument(format!("partition check failed: {:?}", rep)));
        }
        Ok((self, rep))
    }

    pub fn gamma(&self) -> &ExactReal {
        &self.gamma
    }

    /// The piece containing `n`, decided from exact fractional-part conditions.
    pub fn piece_of(&self, n: i64) -> Result<usize> {
        match &self.kind {
            PartitionKind::IrrationalRatio { u0, .. } => {
                let w = self.cell(n, u0)?;
                let i = match w.screen {
                    Some(i) => i,
                    None => ceil_i64(&w.exact(self)?)?,
                };
                if i < 0 || i as usize >= self.pieces.len() {
                    return Err(Error::InvalidArgument(format!("{} lies in no piece", n)));
                }
                Ok(i as usize)
            }
            PartitionKind::RationalRatio { .. } => {
                let form = self.theta_form.as_ref().expect("rational kind");
                let fr = [form.floor_and_frac(n)?.1];
                for (k, pc) in self.pieces.iter().enumerate() {
                    for b in &pc.bohr_sets {
                        if b.region().contains_frac(&fr, &|_| form.frac_exact(n))? {
                            return Ok(k);
                        }
                    }
                }
                Err(Error::InvalidArgument(format!("{} lies in no piece", n)))
            }
        }
    }

    /// `w = γ{α₁n+β₁} − u₀ − {α₂n+β₂}`; the piece index is `⌈w⌉`.
    fn cell(&self, n: i64, u0: &ExactReal) -> Result<Cell> {
        let x1 = self.s1.form().floor_and_frac(n)?.1;
        let x2 = self.s2.form().floor_and_frac(n)?.1;
        let wf = self.approx.0 * x1.to_f64() - self.approx.1 - x2.to_f64();
        let screen = ((wf - wf.round()).abs() > SCREEN).then(|| wf.ceil() as i64);
        Ok(Cell { n, wf, screen, u0: u0.clone() })
    }

    /// Whether the floor identity of piece `k` holds at `n`.
    pub fn identity_holds(&self, k: usize, n: i64) -> Result<bool> {
        let pc = &self.pieces[k];
        let lhs = self.s2.eval(n)?;
        let x = self.s1.eval(n)?;
        Ok(match &self.kind {
            PartitionKind::IrrationalRatio { .. } => lhs == pc.line.floor(x)?,
            PartitionKind::RationalRatio { p, q, .. } => *p as i64 * lhs == *q as i64 * x + pc.offset,
        })
    }

    /// Pieces whose exact membership condition holds at `n`, one for a partition.
    fn coverage(&self, n: i64) -> Result<u64> {
        match &self.kind {
            PartitionKind::IrrationalRatio { u0, .. } => {
                let c = self.cell(n, u0)?;
                if let Some(i) = c.screen {
                    return Ok((0..self.pieces.len() as i64).contains(&i) as u64);
                }
                let w = c.exact(self)?;
                let f = w.field();
                let mut hits = 0;
                for k in 0..self.pieces.len() {
                    // −{α₂n+β₂} ≤ u_k − γ{α₁n+β₁} < 1 − {α₂n+β₂}  ⇔  k − 1 < w ≤ k
                    let t = &w - &ExactReal::from_int(f, k as i64);
                    let above = t.cmp_exact(&ExactReal::from_int(f, -1))? == Ordering::Greater;
                    hits += (above && t.signum()? != Ordering::Greater) as u64;
                }
                Ok(hits)
            }
            PartitionKind::RationalRatio { .. } => {
                let form = self.theta_form.as_ref().expect("rational kind");
                let fr = [form.floor_and_frac(n)?.1];
                let mut hits = 0;
                for pc in &self.pieces {
                    for b in &pc.bohr_sets {
                        hits += b.region().contains_frac(&fr, &|_| form.frac_exact(n))? as u64;
                    }
                }
                Ok(hits)
            }
        }
    }

    /// `(u_k − γ{α₁n+β₁} + {α₂n+β₂}) mod 1` within `1/K` of an integer: where the grid
    /// sets may disagree with the exact cell.
    pub fn in_error_set(&self, k: usize, n: i64) -> Result<bool> {
        let PartitionKind::IrrationalRatio { u0, grid } = &self.kind else { return Ok(false) };
        let c = self.cell(n, u0)?;
        let kinv = 1.0 / *grid as f64;
        let vf = (k as f64 - c.wf).rem_euclid(1.0);
        let d = vf.min(1.0 - vf);
        if (d - kinv).abs() > SCREEN {
            return Ok(d < kinv);
        }
        let w = c.exact(self)?;
        let f = w.field();
        let v = (&ExactReal::from_int(f, k as i64) - &w).frac()?;
        let kinv = ExactReal::from_ratio(f, 1, *grid as i64);
        Ok(v.cmp_exact(&kinv)? != Ordering::Greater || v.cmp_exact(&(&ExactReal::one(f) - &kinv))? != Ordering::Less)
    }

    /// Exhaustive check of coverage, floor identities and (irrational kind) the grid
    /// sets over `[-window, window]`.
    pub fn verify(&self, window: i64) -> Result<PartitionReport> {
        const CHUNK: i64 = 1 << 12;
        let starts: Vec<i64> = (-window..=window).step_by(CHUNK as usize).collect();
        let forms = [self.s1.form(), self.s2.form()];
        let homogeneous: Vec<AffineForm> = forms
            .iter()
            .map(|f| AffineForm::new(f.slope(), &ExactReal::zero(f.slope().field())))
            .collect::<Result<_>>()?;
        let reports: Vec<PartitionReport> = starts
            .par_iter()
            .map(|&s| {
                let mut r = PartitionReport::default();
                for n in s..(s + CHUNK).min(window + 1) {
                    r.checked += 1;
                    if self.coverage(n)? != 1 {
                        r.coverage_failures += 1;
                        continue;
                    }
                    let k = self.piece_of(n)?;
                    if !self.identity_holds(k, n)? {
                        r.identity_failures += 1;
                    }
                    if !matches!(self.kind, PartitionKind::IrrationalRatio { .. }) {
                        continue;
                    }
                    let fr = [homogeneous[0].floor_and_frac(n)?.1, homogeneous[1].floor_and_frac(n)?.1];
                    let exact = |i: usize| homogeneous[i].frac_exact(n);
                    let mut in_err = false;
                    for (m, pc) in self.pieces.iter().enumerate() {
                        let mut g = 0u32;
                        for b in &pc.bohr_sets {
                            g += b.region().contains_frac(&fr, &exact)? as u32;
                        }
                        let e = self.in_error_set(m, n)?;
                        in_err |= e;
                        if g != (m == k) as u32 {
                            r.grid_mismatches += 1;
                            r.unexplained_mismatches += !e as u64;
                        }
                    }
                    r.error_set_hits += in_err as u64;
                }
                Ok(r)
            })
            .collect::<Result<_>>()?;
        Ok(reports.into_iter().fold(PartitionReport::default(), PartitionReport::merge))
    }
}

struct Cell {
    n: i64,
    wf: f64,
    screen: Option<i64>,
    u0: ExactReal,
}

impl Cell {
    fn exact(&self, p: &BeattyPartition) -> Result<ExactReal> {
        let x1 = p.s1.frac(self.n)?;
        let x2 = p.s2.frac(self.n)?;
        Ok(&(&(&p.gamma * &x1) - &self.u0) - &x2)
    }
}
