//! Log-Gamma and log-Gamma ratios.
//!
//! Scaling factors between ambient and subspace sliced distances are ratios of
//! the form `Γ(x + a) / Γ(x)` with `x` up to half the ambient dimension.
//! Differencing two large `ln Γ` values loses about `log10(ln Γ(x))` digits,
//! so [`ln_gamma_ratio`] works on the difference directly: the argument is
//! shifted past [`ASYMPTOTIC_FROM`] with the exact recurrence and the
//! remainder is taken from the difference of two Stirling series, with the
//! leading terms rearranged around `ln_1p`.

use std::f64::consts::PI;

/// Below this argument the Stirling series is not used directly.
const ASYMPTOTIC_FROM: f64 = 20.0;

/// `B_{2n} / (2n (2n - 1))` for n = 1..=7.
const STIRLING: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

/// Tail of the Stirling series, `Σ c_n / z^(2n-1)`, for `z >= ASYMPTOTIC_FROM`.
fn stirling_tail(z: f64) -> f64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    for c in STIRLING.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv
}

/// Number of unit shifts needed to move `x` into the asymptotic range.
fn shift_count(x: f64) -> usize {
    if x >= ASYMPTOTIC_FROM {
        0
    } else {
        (ASYMPTOTIC_FROM - x).ceil() as usize
    }
}

/// Natural logarithm of the Gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    let m = shift_count(x);
    let y = x + m as f64;
    let mut correction = 0.0;
    for j in 0..m {
        correction += (x + j as f64).ln();
    }
    (y - 0.5) * y.ln() - y + 0.5 * (2.0 * PI).ln() + stirling_tail(y) - correction
}

/// `ln Γ(x + a) - ln Γ(x)` for `x > 0`, `a >= 0`, without cancellation.
pub fn ln_gamma_ratio(x: f64, a: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma_ratio requires x > 0, got {x}");
    assert!(a >= 0.0, "ln_gamma_ratio requires a >= 0, got {a}");
    if a == 0.0 {
        return 0.0;
    }
    let m = shift_count(x);
    let mut correction = 0.0;
    for j in 0..m {
        correction += (a / (x + j as f64)).ln_1p();
    }
    let y = x + m as f64;
    let ya = y + a;
    let ratio = (y - 0.5) * (a / y).ln_1p() + a * ya.ln() - a + stirling_tail(ya) - stirling_tail(y);
    ratio - correction
}
