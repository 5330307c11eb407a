//! Reference implementations that share no code with the library.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

/// `n` points log-spaced over `[lo, hi]`, both ends included.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Exact dyadic decomposition `x = m · 2^e` of a positive normal double.
fn dyadic(x: f64) -> (u64, i64) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    assert!(exp > 0, "normal input expected");
    ((bits & ((1 << 52) - 1)) | (1 << 52), exp - 1075)
}

/// J₀ from its power series `Σ (−x²/4)^m / (m!)²` in 1100-bit fixed point.
/// Cancellation at x = 200 costs under 300 bits.
pub fn j0_power_series(x: f64) -> f64 {
    const P: i64 = 1100;
    let x = x.abs();
    if x == 0.0 {
        return 1.0;
    }
    let (m, e) = dyadic(x);
    let shift = 2 * e - 2 + P;
    assert!(shift >= 0, "argument too small for this fixed-point layout");
    let t = (BigInt::from(m) * BigInt::from(m)) << shift as usize;
    let mut term = BigInt::from(1) << P as usize;
    let mut sum = term.clone();
    let mut k: u64 = 1;
    loop {
        term = -((&term * &t) >> P as usize) / BigInt::from(k * k);
        if term.is_zero() {
            break;
        }
        sum += &term;
        k += 1;
    }
    let head = sum >> (P - 120) as usize;
    head.to_f64().unwrap() * 2f64.powi(-120)
}

/// K₁ from `∫₀^∞ e^{−x cosh t} cosh t dt`, trapezoid in `t`.
///
/// The integrand is even and entire, so the trapezoid rule converges
/// geometrically; `e^{−x}` is factored out (`cosh t − 1 = 2 sinh²(t/2)`) to
/// stay clear of underflow at large x.
pub fn k1_integral(x: f64) -> f64 {
    let h = 1.0 / 64.0;
    let f = |t: f64| {
        let s = (0.5 * t).sinh();
        (-2.0 * x * s * s).exp() * t.cosh()
    };
    let mut sum = 0.5 * f(0.0);
    let mut comp = 0.0;
    let mut i = 1;
    loop {
        let t = i as f64 * h;
        let s = (0.5 * t).sinh();
        if 2.0 * x * s * s > 60.0 + t {
            break;
        }
        // Kahan summation
        let y = f(t) - comp;
        let next = sum + y;
        comp = (next - sum) - y;
        sum = next;
        i += 1;
    }
    sum * h * (-x).exp()
}

/// `P(g_f·g_b ≤ r) = ∫₀^∞ e^{−s}(1 − e^{−r/s}) ds`, trapezoid after `s = e^y`.
pub fn product_cdf_integral(r: f64) -> f64 {
    let h = 1.0 / 128.0;
    let (lo, hi) = (-45.0, 4.5);
    let n = ((hi - lo) / h) as usize;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for i in 0..=n {
        let y = lo + i as f64 * h;
        let v = (y - y.exp()).exp() * -(-r * (-y).exp()).exp_m1();
        let w = if i == 0 || i == n { 0.5 * v } else { v };
        let a = w - comp;
        let next = sum + a;
        comp = (next - sum) - a;
        sum = next;
    }
    sum * h
}

/// γ from `H_n − ln n − 1/(2n) + Σ_k B_{2k}/(2k·n^{2k})`, Bernoulli terms
/// through `n^{−12}`. A small `n` keeps the cancellation between `H_n` and
/// `ln n` harmless.
pub fn euler_gamma_from_harmonic(n: u32) -> f64 {
    let harmonic: f64 = (1..=n).rev().map(|k| 1.0 / k as f64).sum();
    let nf = n as f64;
    let tail = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
    ]
    .iter()
    .enumerate()
    .map(|(k, c)| c / nf.powi(2 * k as i32 + 2))
    .sum::<f64>();
    harmonic - nf.ln() - 1.0 / (2.0 * nf) + tail
}

/// `|p̂ − p| / max(se(p̂), se(p))` for `hits` out of `n`.
pub fn z_score(hits: usize, n: usize, p: f64) -> f64 {
    let nf = n as f64;
    let ph = hits as f64 / nf;
    let se = (ph * (1.0 - ph) / nf)
        .sqrt()
        .max((p * (1.0 - p) / nf).sqrt());
    if ph == p {
        0.0
    } else {
        (ph - p).abs() / se
    }
}
