use bohr_chowla::averaging::{checkpoint_series, harmonic_number};
use bohr_chowla::bohr::{BohrSet, ConvexRegion};
use bohr_chowla::realfield::{ExactReal, NumberField};

fn half_set(lo: (i64, i64), hi: (i64, i64)) -> BohrSet {
    let f = NumberField::multiquadratic(&[2]).unwrap();
    let region =
        ConvexRegion::boxed(&f, vec![(ExactReal::from_ratio(&f, lo.0, lo.1), ExactReal::from_ratio(&f, hi.0, hi.1))]).unwrap();
    BohrSet::new(vec![ExactReal::parse(&f, "sqrt2").unwrap()], region, "B").unwrap()
}

/// `(H_X-normalised log average, natural average)` of `1_B` at each decade up to `x`.
fn averages(b: &BohrSet, x: u64) -> Vec<(u64, f64, f64)> {
    let s = checkpoint_series(|n| b.contains(n as i64).unwrap() as u8 as f64, x, 10.0).unwrap();
    s.checkpoints
        .iter()
        .zip(s.log_values.iter().zip(&s.natural_values))
        .map(|(&x, (l, n))| (x, l.re * (x as f64).ln() / harmonic_number(x), n.re))
        .collect()
}

#[test]
fn natural_average_of_half_set() {
    let (_, _, nat) = *averages(&half_set((0, 1), (1, 2)), 1_000_000).last().unwrap();
    assert!((nat - 0.5).abs() <= 0.01, "{}", nat);
}

/// `H_X·(log − natural)` tends to `Σ (1_B(n) − δ)/n`; values from an independent
/// double-precision summation to 10^6.
#[test]
fn log_natural_gap_is_a_constant_over_h_x() {
    for (b, c) in [(half_set((0, 1), (1, 2)), 0.42311), (half_set((1, 4), (3, 4)), 0.19690), (half_set((0, 1), (3, 8)), -0.41007)] {
        for (x, log, nat) in averages(&b, 1_000_000).into_iter().filter(|t| t.0 >= 10_000) {
            let scaled = (log - nat) * harmonic_number(x);
            assert!((scaled - c).abs() < 2e-3, "X = {}: {} vs {}", x, scaled, c);
        }
    }
}

// The gap is C/H_X with |C| ≈ 0.42 for this set: 0.029 at 10^6, so ±0.01 would need X near 10^18.
#[test]
#[ignore = "logarithmic average converges like 1/log X; 0.029 off at 10^6"]
fn log_average_of_half_set() {
    let (_, log, _) = *averages(&half_set((0, 1), (1, 2)), 1_000_000).last().unwrap();
    assert!((log - 0.5).abs() <= 0.01, "{}", log);
}
