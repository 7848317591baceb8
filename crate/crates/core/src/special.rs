//! Special-function kernels behind the closed forms.
//!
//! The Erlang sums in the CDF and LCR expressions run up to `N = 128` terms,
//! where `x^k` and `k!` overflow long before the ratio does, so every sum here
//! is accumulated from log-domain terms.

use crate::error::{domain, Result};

/// ln(sqrt(2 pi))
pub(crate) const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

const MAX_ITER: usize = 100_000;
const SERIES_EPS: f64 = 1e-17;
const CF_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;

/// Stirling-series coefficients B_2k / (2k (2k - 1)), k = 1..8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Natural logarithm of the gamma function for `a > 0`.
pub fn log_gamma(a: f64) -> Result<f64> {
    if !a.is_finite() || a <= 0.0 {
        return Err(domain(format!("log_gamma requires a finite a > 0, got {a}")));
    }
    Ok(ln_gamma(a))
}

/// Unchecked `ln Γ(a)`; callers guarantee `a > 0`.
pub(crate) fn ln_gamma(a: f64) -> f64 {
    if a == 1.0 || a == 2.0 {
        return 0.0;
    }
    if a >= 10.0 {
        return stirling(a);
    }
    // Shift up with Γ(a) = Γ(a + n) / (a (a + 1) ... (a + n - 1)).
    let mut shifted = a;
    let mut prod = 1.0;
    while shifted < 10.0 {
        prod *= shifted;
        shifted += 1.0;
    }
    stirling(shifted) - prod.ln()
}

fn stirling(a: f64) -> f64 {
    let inv = a.recip();
    let inv2 = inv * inv;
    let tail = STIRLING
        .iter()
        .rev()
        .fold(0.0, |acc, &c| acc * inv2 + c);
    (a - 0.5) * a.ln() - a + LN_SQRT_2PI + inv * tail
}

/// Regularized upper incomplete gamma function `Q(a, x) = Γ(a, x) / Γ(a)`.
///
/// Uses the power series of `P = 1 - Q` below `x = a + 1` and a modified
/// Lentz continued fraction above it.
pub fn upper_gamma_regularized(a: f64, x: f64) -> Result<f64> {
    if !a.is_finite() || a <= 0.0 {
        return Err(domain(format!("upper_gamma_regularized requires a > 0, got a = {a}")));
    }
    if x.is_nan() || x < 0.0 {
        return Err(domain(format!("upper_gamma_regularized requires x >= 0, got x = {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let lga = ln_gamma(a);
    let q = if x < a + 1.0 {
        1.0 - lower_series(a, x, lga)
    } else {
        (ln_upper_cf(a, x) - lga).exp()
    };
    Ok(q.clamp(0.0, 1.0))
}

/// `P(a, x)` by its power series; converges for all x but is only used below `a + 1`.
fn lower_series(a: f64, x: f64, lga: f64) -> f64 {
    let mut denom = a;
    let mut term = a.recip();
    let mut sum = term;
    for _ in 0..MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term < sum * SERIES_EPS {
            break;
        }
    }
    (a * x.ln() - x - lga + sum.ln()).exp()
}

/// `ln Γ(a, x)` (unnormalized) from the continued fraction, for `x >= a + 1`.
fn ln_upper_cf(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = CF_TINY.recip();
    let mut d = b.recip();
    let mut h = d;
    for i in 1..MAX_ITER {
        let i = i as f64;
        let an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = b + an / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = d.recip();
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < CF_EPS {
            break;
        }
    }
    a * x.ln() - x + h.ln()
}

/// `ln Γ(a, x)` without normalization. Stays finite where `Q(a, x)` itself
/// would underflow, which the LCR expression needs once it multiplies by `e^x`.
pub(crate) fn ln_upper_gamma(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return ln_gamma(a);
    }
    if x < a + 1.0 {
        let lga = ln_gamma(a);
        lga + (-lower_series(a, x, lga)).ln_1p()
    } else {
        ln_upper_cf(a, x)
    }
}

/// Erlang CDF in its finite-sum form, `1 - e^{-x} Σ_{k<n} x^k / k!`.
///
/// This is `P(n, x)` for integer `n`. The sum is built from log-domain terms;
/// when it exceeds 1/2 the lower tail is summed directly instead, so small
/// CDF values keep their relative precision.
pub fn erlang_sum_cdf(n: u32, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(domain("erlang_sum_cdf requires n >= 1"));
    }
    if x.is_nan() || x < 0.0 {
        return Err(domain(format!("erlang_sum_cdf requires x >= 0, got {x}")));
    }
    Ok(erlang_cdf_pair(n, x).0)
}

/// `(P, Q)` for the Erlang distribution of order `n` at `x`, each accurate
/// in relative terms when small.
pub(crate) fn erlang_cdf_pair(n: u32, x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (0.0, 1.0);
    }
    if x.is_infinite() {
        return (1.0, 0.0);
    }
    let lx = x.ln();
    let mut ln_fact = 0.0;
    let mut q = 0.0;
    for k in 0..n {
        if k > 1 {
            ln_fact += f64::from(k).ln();
        }
        q += (f64::from(k) * lx - x - ln_fact).exp();
    }
    if q <= 0.5 {
        return (1.0 - q, q);
    }
    // e^{-x} Σ_{k>=n} x^k / k! = e^{-x} x^n / n! Σ_j x^j / ((n+1)...(n+j))
    let nf = f64::from(n);
    let lead = nf * lx - x - ln_gamma(nf + 1.0);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut j = 1.0;
    for _ in 0..MAX_ITER {
        term *= x / (nf + j);
        sum += term;
        if term < sum * SERIES_EPS {
            break;
        }
        j += 1.0;
    }
    ((lead + sum.ln()).exp(), q)
}

/// `ln(e^a + e^b)` without overflow.
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
