//! Logarithmic and natural averages with checkpointed convergence series.
//!
//! Sums are compensated (Neumaier). Parallel passes split `[1, X_max]` at checkpoints
//! and at multiples of [`PARTITION_BLOCK`]; pieces are combined in index order, so the
//! result depends only on that fixed partition, not on the thread count.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Block length of the fixed partition used by parallel passes.
pub const PARTITION_BLOCK: u64 = 1 << 20;

/// Neumaier-compensated sum of `f64`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Compensated) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated complex sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexSum {
    re: Compensated,
    im: Compensated,
}

impl ComplexSum {
    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        if z.im != 0.0 {
            self.im.add(z.im);
        }
    }

    #[inline]
    pub fn add_real(&mut self, x: f64) {
        self.re.add(x);
    }

    pub fn merge(&mut self, other: &ComplexSum) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Sums over a range of `n`: `Σ a(n)` and `Σ a(n)/n`.
#[derive(Clone, Copy, Debug, Default)]
pub struct RangeSums {
    pub plain: ComplexSum,
    pub harmonic: ComplexSum,
}

impl RangeSums {
    #[inline]
    pub fn push(&mut self, n: u64, value: Complex64) {
        if value.re == 0.0 && value.im == 0.0 {
            return;
        }
        self.plain.add(value);
        self.harmonic.add(value / n as f64);
    }

    #[inline]
    pub fn push_real(&mut self, n: u64, value: f64) {
        if value == 0.0 {
            return;
        }
        self.plain.add_real(value);
        self.harmonic.add_real(value / n as f64);
    }

    pub fn merge(&mut self, other: &RangeSums) {
        self.plain.merge(&other.plain);
        self.harmonic.merge(&other.harmonic);
    }
}

/// Which averages a series carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AverageKind {
    Logarithmic,
    Natural,
    Both,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AverageSeries {
    pub checkpoints: Vec<u64>,
    pub log_values: Vec<Complex64>,
    pub natural_values: Vec<Complex64>,
    pub kind: AverageKind,
    /// Block length of the partition the sums were reduced over.
    pub partition_block: u64,
}

impl AverageSeries {
    pub fn is_empty(&self) -> bool {
        self.checkpoints.is_empty()
    }

    pub fn last_log(&self) -> Option<Complex64> {
        self.log_values.last().copied()
    }

    pub fn last_natural(&self) -> Option<Complex64> {
        self.natural_values.last().copied()
    }

    /// CSV with columns `X, log_avg, natural_avg` (real parts).
    pub fn write_real_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "X,log_avg,natural_avg")?;
        for i in 0..self.checkpoints.len() {
            writeln!(
                w,
                "{},{},{}",
                self.checkpoints[i],
                fmt17(self.log_values[i].re),
                fmt17(self.natural_values[i].re)
            )?;
        }
        Ok(())
    }

    /// CSV with columns `X, log_avg_re, log_avg_im, natural_avg_re, natural_avg_im`.
    pub fn write_complex_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "X,log_avg_re,log_avg_im,natural_avg_re,natural_avg_im")?;
        for i in 0..self.checkpoints.len() {
            let (l, n) = (self.log_values[i], self.natural_values[i]);
            writeln!(
                w,
                "{},{},{},{},{}",
                self.checkpoints[i],
                fmt17(l.re),
                fmt17(l.im),
                fmt17(n.re),
                fmt17(n.im)
            )?;
        }
        Ok(())
    }

    pub fn save_complex_csv(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_complex_csv(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    /// Parses the output of [`write_complex_csv`](Self::write_complex_csv).
    pub fn read_complex_csv(text: &str) -> Result<AverageSeries> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
        if header.trim() != "X,log_avg_re,log_avg_im,natural_avg_re,natural_avg_im" {
            return Err(Error::Parse(format!("unexpected CSV header `{}`", header)));
        }
        let mut s = AverageSeries {
            checkpoints: Vec::new(),
            log_values: Vec::new(),
            natural_values: Vec::new(),
            kind: AverageKind::Both,
            partition_block: PARTITION_BLOCK,
        };
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 5 {
                return Err(Error::Parse(format!("bad CSV row `{}`", line)));
            }
            let p = |i: usize| -> Result<f64> {
                cols[i].trim().parse().map_err(|_| Error::Parse(format!("bad number `{}`", cols[i])))
            };
            s.checkpoints.push(cols[0].trim().parse().map_err(|_| Error::Parse(cols[0].into()))?);
            s.log_values.push(Complex64::new(p(1)?, p(2)?));
            s.natural_values.push(Complex64::new(p(3)?, p(4)?));
        }
        Ok(s)
    }
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}

/// `(1 / ln X) Σ_{n ≤ X} a(n) / n`.
pub fn log_average(sequence: impl Fn(u64) -> f64, x: u64) -> f64 {
    assert!(x >= 2, "logarithmic average needs X >= 2");
    let mut s = Compensated::default();
    for n in 1..=x {
        s.add(sequence(n) / n as f64);
    }
    s.value() / (x as f64).ln()
}

/// `H_x = Σ_{n ≤ x} 1/n`: summed directly up to 10^4, asymptotic expansion beyond.
pub fn harmonic_number(x: u64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    if x <= 10_000 {
        let mut s = Compensated::default();
        for n in (1..=x).rev() {
            s.add(1.0 / n as f64);
        }
        return s.value();
    }
    let t = x as f64;
    let t2 = t * t;
    t.ln() + EULER_GAMMA + 0.5 / t - 1.0 / (12.0 * t2) + 1.0 / (120.0 * t2 * t2)
}

/// `(1 / X) Σ_{n ≤ X} a(n)`.
pub fn natural_average(sequence: impl Fn(u64) -> f64, x: u64) -> f64 {
    assert!(x >= 1, "natural average needs X >= 1");
    let mut s = Compensated::default();
    for n in 1..=x {
        s.add(sequence(n));
    }
    s.value() / x as f64
}

/// Checkpoints `⌈ratio^k⌉` for `k ≥ 1`, deduplicated, at least 2, with `x_max` last.
pub fn checkpoints(x_max: u64, ratio: f64) -> Result<Vec<u64>> {
    if !(ratio > 1.0 && ratio <= 10.0) {
        return Err(Error::InvalidArgument(format!("checkpoint ratio {} outside (1, 10]", ratio)));
    }
    if x_max < 2 {
        return Err(Error::InvalidArgument("X_max must be at least 2".into()));
    }
    let mut out = Vec::new();
    let mut k = 1i32;
    loop {
        let c = ratio.powi(k).ceil();
        // snap values within rounding of an integer (e.g. 10^k) onto it
        let c = if (ratio.powi(k) - ratio.powi(k).round()).abs() < 1e-9 * ratio.powi(k) {
            ratio.powi(k).round()
        } else {
            c
        };
        if c >= x_max as f64 {
            break;
        }
        let c = c as u64;
        if c >= 2 && out.last() != Some(&c) {
            out.push(c);
        }
        k += 1;
    }
    out.push(x_max);
    Ok(out)
}

/// The fixed partition of `[1, x_max]`: cuts at every checkpoint and every multiple
/// of `block`. Returns inclusive `(start, end)` pairs.
pub fn partition(x_max: u64, cps: &[u64], block: u64) -> Vec<(u64, u64)> {
    let mut cuts: Vec<u64> = (1..=x_max / block).map(|k| k * block).collect();
    cuts.extend_from_slice(cps);
    cuts.push(x_max);
    cuts.sort_unstable();
    cuts.dedup();
    let mut out = Vec::with_capacity(cuts.len());
    let mut start = 1;
    for c in cuts {
        if c >= start && c <= x_max {
            out.push((start, c));
            start = c + 1;
        }
    }
    out
}

/// Generic checkpointed pass: `range_sums(start, end)` returns the sums over the
/// inclusive range; ranges are evaluated in parallel and reduced in order.
pub fn checkpoint_series_ranges<F>(x_max: u64, ratio: f64, range_sums: F) -> Result<AverageSeries>
where
    F: Fn(u64, u64) -> Result<RangeSums> + Sync,
{
    let cps = checkpoints(x_max, ratio)?;
    let pieces = partition(x_max, &cps, PARTITION_BLOCK);
    let partial: Vec<RangeSums> =
        pieces.par_iter().map(|&(a, b)| range_sums(a, b)).collect::<Result<Vec<_>>>()?;
    let mut acc = RangeSums::default();
    let mut series = AverageSeries {
        checkpoints: Vec::with_capacity(cps.len()),
        log_values: Vec::with_capacity(cps.len()),
        natural_values: Vec::with_capacity(cps.len()),
        kind: AverageKind::Both,
        partition_block: PARTITION_BLOCK,
    };
    let mut next_cp = cps.iter().peekable();
    for (&(_, end), sums) in pieces.iter().zip(&partial) {
        acc.merge(sums);
        if next_cp.peek() == Some(&&end) {
            next_cp.next();
            series.checkpoints.push(end);
            series.log_values.push(acc.harmonic.value() / (end as f64).ln());
            series.natural_values.push(acc.plain.value() / end as f64);
        }
    }
    Ok(series)
}

/// Single pass over `n ≤ x_max` emitting both averages at every checkpoint.
pub fn checkpoint_series(sequence: impl Fn(u64) -> f64 + Sync, x_max: u64, ratio: f64) -> Result<AverageSeries> {
    if x_max < 10 {
        return Err(Error::InvalidArgument("checkpoint series needs X_max >= 10".into()));
    }
    checkpoint_series_ranges(x_max, ratio, |a, b| {
        let mut s = RangeSums::default();
        for n in a..=b {
            s.push_real(n, sequence(n));
        }
        Ok(s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn harmonic(n: u64) -> f64 {
        // pairwise-free oracle: exact rational harmonic number would be huge; sum in
        // reverse, which is accurate to a few ulps for these n
        (1..=n).rev().map(|k| 1.0 / k as f64).sum()
    }

    #[test]
    fn harmonic_number_matches_direct_sum() {
        for x in [1u64, 2, 10, 9_999, 10_000, 10_001, 250_000] {
            let h = harmonic_number(x);
            assert!((h - harmonic(x)).abs() < 1e-12 * h, "x = {}", x);
        }
    }

    #[test]
    fn zero_sequence() {
        assert_eq!(log_average(|_| 0.0, 1000), 0.0);
        let s = checkpoint_series(|_| 0.0, 1000, 10.0).unwrap();
        assert!(s.log_values.iter().chain(&s.natural_values).all(|v| v.norm() == 0.0));
    }

    #[test]
    fn constant_one_log_average() {
        let v = log_average(|_| 1.0, 100);
        assert!((v - harmonic(100) / 100f64.ln()).abs() < 1e-14);
        assert!((v - 1.1264).abs() < 1e-4);
    }

    #[test]
    fn alternating_log_average() {
        let v = log_average(|n| if n % 2 == 0 { 1.0 } else { -1.0 }, 1_000_000);
        // Σ (-1)^n / n → -ln 2, with error below 1/X
        assert!((v + 2f64.ln() / 1e6f64.ln()).abs() < 1e-6);
        assert!((v + 0.0502).abs() < 1e-4);
    }

    #[test]
    fn natural_examples() {
        assert_eq!(natural_average(|_| 1.0, 37), 1.0);
        assert_eq!(natural_average(|n| (n % 2 == 0) as u8 as f64, 10), 0.5);
        let lam = [1.0, -1.0, -1.0, 1.0, -1.0, 1.0, -1.0, -1.0, 1.0, 1.0];
        assert_eq!(natural_average(|n| lam[n as usize - 1], 10), 0.0);
    }

    #[test]
    fn checkpoint_values_for_constant_one() {
        let s = checkpoint_series(|_| 1.0, 1000, 10.0).unwrap();
        assert_eq!(s.checkpoints, vec![10, 100, 1000]);
        let logs: Vec<f64> = s.log_values.iter().map(|z| z.re).collect();
        assert!(logs.iter().all(|&v| (1.0..=1.3).contains(&v)));
        assert!(logs.windows(2).all(|w| w[1] < w[0]));
        assert!((logs[0] - harmonic(10) / 10f64.ln()).abs() < 1e-12);
        assert!((logs[2] - harmonic(1000) / 1000f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn checkpoints_include_x_max() {
        assert_eq!(checkpoints(1500, 10.0).unwrap(), vec![10, 100, 1000, 1500]);
        assert_eq!(checkpoints(16, 2.0).unwrap(), vec![2, 4, 8, 16]);
        assert!(checkpoints(100, 1.0).is_err());
        assert!(checkpoints(100, 11.0).is_err());
    }

    #[test]
    fn partition_covers_range() {
        let cps = checkpoints(5_000_000, 10.0).unwrap();
        let parts = partition(5_000_000, &cps, PARTITION_BLOCK);
        assert_eq!(parts[0].0, 1);
        assert_eq!(parts.last().unwrap().1, 5_000_000);
        assert!(parts.windows(2).all(|w| w[0].1 + 1 == w[1].0));
        for c in cps {
            assert!(parts.iter().any(|p| p.1 == c));
        }
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let s = checkpoint_series(|n| ((n as f64).sqrt() * 7.3).sin(), 12_345, 3.7).unwrap();
        let mut buf = Vec::new();
        s.write_complex_csv(&mut buf).unwrap();
        let back = AverageSeries::read_complex_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.checkpoints, s.checkpoints);
        for (a, b) in back.log_values.iter().zip(&s.log_values) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
        }
        for (a, b) in back.natural_values.iter().zip(&s.natural_values) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
        }
    }

    #[test]
    fn real_csv_header_only_when_empty() {
        let s = AverageSeries {
            checkpoints: vec![],
            log_values: vec![],
            natural_values: vec![],
            kind: AverageKind::Both,
            partition_block: PARTITION_BLOCK,
        };
        let mut buf = Vec::new();
        s.write_real_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "X,log_avg,natural_avg\n");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn streaming_matches_single_shot(seed in 0u64..1000, x in 10u64..30_000, ratio in 1.5f64..10.0) {
            let seq = move |n: u64| (((n ^ seed).wrapping_mul(0x9E3779B97F4A7C15) >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0;
            let s = checkpoint_series(seq, x, ratio).unwrap();
            for (i, &c) in s.checkpoints.iter().enumerate() {
                prop_assert!((s.log_values[i].re - log_average(seq, c)).abs() <= 1e-12);
                prop_assert!((s.natural_values[i].re - natural_average(seq, c)).abs() <= 1e-12);
            }
        }

        #[test]
        fn log_average_bound(seed in 0u64..1000, x in 2u64..5000) {
            let seq = move |n: u64| if (n.wrapping_mul(seed + 7) >> 3) % 3 == 0 { 0.5 } else { -0.75 };
            let h: f64 = (1..=x).map(|k| 1.0 / k as f64).sum();
            prop_assert!(log_average(seq, x).abs() <= 0.75 * h / (x as f64).ln() + 1e-12);
        }
    }
}
