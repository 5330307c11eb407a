//! Scalar special functions: J₀, K₁, the small-argument K₁ expansion and the
//! Euler–Mascheroni constant.
//!
//! J₀ is evaluated by its power series for |x| ≤ 4, Miller's backward
//! recurrence normalised by `J₀ + 2ΣJ₂ₖ = 1` up to |x| = 25, and the Hankel
//! asymptotic expansion beyond. K₁ uses the ascending series (A&S 9.6.11)
//! for x ≤ 2 and Steed's continued fraction (Temme's CF2) above.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// Arguments above this make `K₁` underflow; the function returns 0 there.
pub const K1_UNDERFLOW_ARG: f64 = 700.0;

/// Relative/absolute error bound used to judge special-function accuracy.
///
/// A value `a` is accepted against a reference `r` when
/// `|a - r| <= max(rel_tol * |r|, abs_tol)`; the absolute term only matters
/// close to zeros of the function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyBudget {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for AccuracyBudget {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
        }
    }
}

impl AccuracyBudget {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Result<Self> {
        if !(rel_tol > 0.0) || !(abs_tol > 0.0) {
            return Err(Error::invalid(
                "accuracy budget",
                format!("tolerances must be positive (rel {rel_tol}, abs {abs_tol})"),
            ));
        }
        Ok(Self { rel_tol, abs_tol })
    }

    pub fn admits(&self, value: f64, reference: f64) -> bool {
        (value - reference).abs() <= (self.rel_tol * reference.abs()).max(self.abs_tol)
    }
}

pub fn euler_mascheroni() -> f64 {
    EULER_MASCHERONI
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("bessel_j0", x, "argument must be finite"));
    }
    let ax = x.abs();
    Ok(if ax <= 4.0 {
        j0_series(ax)
    } else if ax < 25.0 {
        j0_miller(ax)
    } else {
        j0_hankel(ax)
    })
}

fn j0_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= -y / (kf * kf);
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

fn j0_miller(x: f64) -> f64 {
    // J_N(x) is negligible well past x + O(x^{1/3}).
    let start = (x + 30.0 + 4.0 * x.cbrt()) as usize;
    let start = start + start % 2;
    let two_over_x = 2.0 / x;
    let mut next = 0.0; // J_{n+1}
    let mut cur = 1e-30; // J_n
    let mut even_sum = 0.0;
    for n in (1..=start).rev() {
        let prev = n as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        if (n - 1) % 2 == 0 && n > 1 {
            even_sum += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            even_sum *= 1e-250;
        }
    }
    cur / (cur + even_sum)
}

fn j0_hankel(x: f64) -> f64 {
    // Terms of the asymptotic series: t_k = t_{k-1} * (-(2k-1)^2) / (8kx).
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let next = term * (-odd * odd) / (k as f64 * eight_x);
        if next.abs() >= last || next.abs() < 1e-18 {
            break;
        }
        last = next.abs();
        term = next;
        // t1 -> Q, t2 -> -P, t3 -> -Q, t4 -> +P, ...
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
    }
    let (s, c) = x.sin_cos();
    let cos_chi = (c + s) * FRAC_1_SQRT_2;
    let sin_chi = (s - c) * FRAC_1_SQRT_2;
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// Modified Bessel function of the second kind, order one.
///
/// Returns `+inf` where `1/x` overflows and `0` for `x > 700`.
pub fn bessel_k1(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::domain("bessel_k1", x, "K1 requires x > 0"));
    }
    if x > K1_UNDERFLOW_ARG {
        return Ok(0.0);
    }
    Ok(if x <= 2.0 { k1_series(x) } else { k1_steed(x) })
}

fn k1_series(x: f64) -> f64 {
    let half = 0.5 * x;
    let y = half * half;
    let mut term = 1.0; // y^k / (k! (k+1)!)
    let mut psi_a = -EULER_MASCHERONI; // psi(k+1)
    let mut psi_b = 1.0 - EULER_MASCHERONI; // psi(k+2)
    let mut i_sum = 0.0;
    let mut psi_sum = 0.0;
    for k in 0..40 {
        i_sum += term;
        psi_sum += (psi_a + psi_b) * term;
        let kf = k as f64;
        term *= y / ((kf + 1.0) * (kf + 2.0));
        psi_a += 1.0 / (kf + 1.0);
        psi_b += 1.0 / (kf + 2.0);
        if term < 1e-18 * i_sum {
            break;
        }
    }
    1.0 / x + half.ln() * half * i_sum - 0.5 * half * psi_sum
}

fn k1_steed(x: f64) -> f64 {
    const EPS: f64 = 1e-17;
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    k0 * (x + 0.5 - h) / x
}

/// Three-term small-argument expansion
/// `K₁(r) ≈ 1/r + (r/4)(2ζ − 1) + (r/2)·ln(r/2)`.
pub fn k1_small_arg(r: f64) -> Result<f64> {
    if r.is_nan() || r <= 0.0 || r >= 1.0 {
        return Err(Error::domain(
            "k1_small_arg",
            r,
            "expansion is defined for 0 < r < 1",
        ));
    }
    Ok(1.0 / r + 0.25 * r * (2.0 * EULER_MASCHERONI - 1.0) + 0.5 * r * (0.5 * r).ln())
}
