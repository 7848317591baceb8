//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the library's special functions: incomplete gamma
//! values come from finite sums or quadrature written from scratch.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::OnceLock;

use noma_link::{MobilityProfile, SystemConfig};

pub fn cfg(n: u32, alpha1: f64, snr: f64, gamma_th: f64, f1: f64, f2: f64) -> SystemConfig {
    SystemConfig::new(
        n,
        alpha1,
        snr,
        gamma_th,
        1e-3,
        MobilityProfile::from_doppler(f1).unwrap(),
        MobilityProfile::from_doppler(f2).unwrap(),
    )
    .unwrap()
}

// 15-point Kronrod nodes and weights with the embedded 7-point Gauss rule.
const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let s = f(c - h * XK[i]) + f(c + h * XK[i]);
        kronrod += WK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (v, e) = gk15(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut err = e;
    let mut magnitude = v.abs();
    for _ in 0..2000 {
        // Demands below rounding level of the integral itself are unreachable.
        if err <= tol.max(1e-15 * magnitude) {
            break;
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, v0, e0) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            parts.push((lo, hi, v0, 0.0));
            err -= e0;
            continue;
        }
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        err += e1 + e2 - e0;
        magnitude += v1.abs() + v2.abs() - v0.abs();
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    // Summing small parts first limits rounding error.
    let mut values: Vec<f64> = parts.iter().map(|p| p.2).collect();
    values.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    values.iter().sum()
}

/// Adaptive Gauss–Kronrod quadrature of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    adapt(&f, a, b, tol)
}

/// Integral over `[a, ∞)`. Pieces start at width `first` and double; every
/// piece up to `a + horizon` is integrated, later ones until they vanish.
pub fn integrate_to_infinity(f: impl Fn(f64) -> f64, a: f64, first: f64, horizon: f64, tol: f64) -> f64 {
    let mut total = 0.0;
    let mut lo = a;
    let mut width = first;
    for _ in 0..200 {
        let piece = adapt(&f, lo, lo + width, tol * 1e-2);
        total += piece;
        lo += width;
        width *= 2.0;
        if lo >= a + horizon && piece.abs() <= tol * 1e-3 * total.abs().max(1e-300) {
            break;
        }
    }
    total
}

fn ln_factorial(k: u32) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; 4096];
        for i in 1..t.len() {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    match table.get(k as usize) {
        Some(v) => *v,
        None => table[table.len() - 1] + (table.len() as u32..=k).map(|i| f64::from(i).ln()).sum::<f64>(),
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// `ln Q(k + 1, z)` for integer `k`, from `Q = e^{-z} Σ_{l<=k} z^l / l!`.
pub fn ln_q_integer(k: u32, z: f64) -> f64 {
    let terms: Vec<f64> = (0..=k).map(|l| -z + f64::from(l) * z.ln() - ln_factorial(l)).collect();
    log_sum_exp(&terms)
}

/// Erlang(N) CDF at `x`, summing whichever tail is smaller.
pub fn erlang_cdf(n: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < f64::from(n) {
        // P = e^{-x} Σ_{k>=N} x^k / k!
        let mut terms = Vec::new();
        let mut k = n;
        loop {
            let t = -x + f64::from(k) * x.ln() - ln_factorial(k);
            terms.push(t);
            if t < terms[0] - 40.0 {
                break;
            }
            k += 1;
        }
        log_sum_exp(&terms).exp()
    } else {
        1.0 - ln_q_integer(n - 1, x).exp()
    }
}

/// Erlang(N) density at `x`.
pub fn erlang_pdf(n: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return if n == 1 { 1.0 } else { 0.0 };
    }
    (f64::from(n - 1) * x.ln() - x - ln_factorial(n - 1)).exp()
}

/// Stage-1 outage by quadrature over the interference power:
/// `F = ∫ F_{α1 X}(yγ + γ/ρ) f_{α2 Y}(y) dy`.
pub fn cdf1_quadrature(c: &SystemConfig) -> f64 {
    let (a1, a2, rho, g, n) = (c.alpha1(), c.alpha2(), c.snr_linear(), c.gamma_th(), c.n_antennas());
    let integrand = |y: f64| erlang_cdf(n, (y * g + g / rho) / a1) * (-y / a2).exp() / a2;
    // The integrand decays like e^{-y/α2}; resolve the Erlang transition too.
    let first = a2.min(a1 / g) * 1e-3;
    integrate_to_infinity(integrand, 0.0, first, 80.0 * a2, 1e-14)
}

/// Stage-1 outage from the incomplete-gamma series (middle form), with
/// `(γ/α1)^k` in the numerator.
pub fn cdf1_middle_form(c: &SystemConfig) -> f64 {
    let (a1, a2, rho, g, n) = (c.alpha1(), c.alpha2(), c.snr_linear(), c.gamma_th(), c.n_antennas());
    let cc = g / a1 + 1.0 / a2;
    let z = cc / rho;
    let terms: Vec<f64> = (0..n)
        .map(|k| {
            let kf = f64::from(k);
            1.0 / (rho * a2) - a2.ln() + kf * (g / a1).ln() - ln_factorial(k) - (kf + 1.0) * cc.ln()
                + ln_factorial(k)
                + ln_q_integer(k, z)
        })
        .collect();
    1.0 - log_sum_exp(&terms).exp()
}

/// Stage-2 outage, `1 - Q(N, γ/(ρ α2))`, by the independent Erlang CDF.
pub fn cdf2_reference(c: &SystemConfig) -> f64 {
    erlang_cdf(c.n_antennas(), c.gamma_th() / (c.snr_linear() * c.alpha2()))
}

/// `Γ(a, x)` (unnormalized) by quadrature.
pub fn upper_gamma_quadrature(a: f64, x: f64) -> f64 {
    // Substitute t = x + s to start the tail at zero.
    let peak = (a - 1.0).max(x);
    let shift = -x + (a - 1.0) * peak.max(1e-300).ln();
    let g = |s: f64| ((a - 1.0) * (x + s).ln() - (x + s) - shift).exp();
    let horizon = (a - 1.0 - x).max(0.0) + 60.0 + 10.0 * a.sqrt();
    integrate_to_infinity(g, 0.0, 0.01, horizon, 1e-14) * shift.exp()
}

/// Rice's formula for the stage-1 down-crossing rate with the combining
/// direction held fixed, by quadrature over the interference power.
pub fn lcr1_rice_quadrature(c: &SystemConfig) -> f64 {
    let (a1, a2, rho, g, n) = (c.alpha1(), c.alpha2(), c.snr_linear(), c.gamma_th(), c.n_antennas());
    let (f1, f2) = (c.doppler1_hz(), c.doppler2_hz());
    let integrand = |y: f64| {
        let s = y + 1.0 / rho;
        let spread = g * f1 * f1 * a1 * s + g * g * f2 * f2 * a2 * y;
        (2.0 * PI).sqrt() * (-y / a2).exp() / a2 * erlang_pdf(n, g * s / a1) / a1 * spread.sqrt()
    };
    let first = a2.min(a1 / g) * 1e-3;
    integrate_to_infinity(integrand, 0.0, first, 80.0 * a2, 1e-13)
}

/// The stage-1 crossing rate in its published arrangement, with the
/// exponential in the denominator taken as `e^{-w}`.
pub fn lcr1_published_arrangement(c: &SystemConfig) -> f64 {
    let (a1, a2, rho, g, n) = (c.alpha1(), c.alpha2(), c.snr_linear(), c.gamma_th(), c.n_antennas());
    let (f1, f2) = (c.doppler1_hz(), c.doppler2_hz());
    let nf = f64::from(n);
    let q = g * a2 * f2 * f2 / (a1 * f1 * f1);
    let w = f1 * f1 * (a1 + a2 * g) / (a2 * rho * (a1 * f1 * f1 + a2 * f2 * f2 * g));
    let x = g / (rho * a1);
    let prefactor = (2.0 * PI).sqrt() * f1 * x.powf(nf - 0.5) * (-x).exp() * w.exp()
        / ((1.0 + q).powf(nf - 1.0) * (1.0 + g * a2 / a1));
    let sum: f64 = (0..n)
        .map(|l| {
            let lf = f64::from(l);
            q.powf(nf - lf - 1.0) * upper_gamma_quadrature(lf + 1.5, w)
                / ((ln_factorial(l) + ln_factorial(n - l - 1)).exp() * w.powf(lf + 0.5))
        })
        .sum();
    prefactor * sum
}

/// `J0(x) = (1/π) ∫_0^π cos(x sin θ) dθ`.
pub fn bessel_j0(x: f64) -> f64 {
    integrate(|t| (x * t.sin()).cos(), 0.0, PI, 1e-13) / PI
}

/// Kolmogorov–Smirnov distance between `samples` and `cdf`.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.627_6 / (n as f64).sqrt()
}

/// Stage-1 down-crossing rate with the combining direction following the
/// channel, by Monte Carlo over Gaussian `(h, ḣ)` pairs.
///
/// For a Jakes path with unit power the derivative is CN(0, 2π²f²) and
/// independent of the value at the same instant. The rate is the Rice
/// integrand averaged over samples landing within ±`width`·γ of the level.
pub fn lcr1_rotating_monte_carlo(c: &SystemConfig, samples: usize, seed: u64) -> (f64, f64) {
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;
    use rayon::prelude::*;

    let n = c.n_antennas() as usize;
    let (a1, a2, rho, g) = (c.alpha1(), c.alpha2(), c.snr_linear(), c.gamma_th());
    let sd1 = (2.0 * PI * PI).sqrt() * c.doppler1_hz();
    let sd2 = (2.0 * PI * PI).sqrt() * c.doppler2_hz();
    let half_width = 0.01 * g;
    let gamma1 = |h1: &[Complex64], h2: &[Complex64]| {
        let n1: f64 = h1.iter().map(|v| v.norm_sqr()).sum();
        let cross: Complex64 = h1.iter().zip(h2).map(|(a, b)| a.conj() * b).sum();
        rho * a1 * n1 / (rho * a2 * cross.norm_sqr() / n1 + 1.0)
    };
    let blocks = 256;
    let per_block = samples / blocks;
    let sums: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut cn = |scale: f64| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * (scale * std::f64::consts::FRAC_1_SQRT_2)
            };
            let (mut s, mut s2) = (0.0, 0.0);
            let mut buf = vec![Complex64::new(0.0, 0.0); 4 * n];
            for _ in 0..per_block {
                for (i, v) in buf.iter_mut().enumerate() {
                    *v = match i / n {
                        0 | 1 => cn(1.0),
                        2 => cn(sd1),
                        _ => cn(sd2),
                    };
                }
                let (h1, rest) = buf.split_at(n);
                let (h2, rest) = rest.split_at(n);
                let (d1, d2) = rest.split_at(n);
                let value = gamma1(h1, h2);
                if (value - g).abs() >= half_width {
                    continue;
                }
                let eps = 1e-7 / (sd1.max(sd2) + 1.0);
                let shift = |sign: f64| -> (Vec<Complex64>, Vec<Complex64>) {
                    (
                        h1.iter().zip(d1).map(|(h, d)| h + d * (sign * eps)).collect(),
                        h2.iter().zip(d2).map(|(h, d)| h + d * (sign * eps)).collect(),
                    )
                };
                let (p1, p2) = shift(1.0);
                let (m1, m2) = shift(-1.0);
                let slope = (gamma1(&p1, &p2) - gamma1(&m1, &m2)) / (2.0 * eps);
                let contribution = (-slope).max(0.0) / (2.0 * half_width);
                s += contribution;
                s2 += contribution * contribution;
            }
            (s, s2)
        })
        .collect();
    let total = (blocks * per_block) as f64;
    let (s, s2): (f64, f64) = sums.iter().fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1));
    let mean = s / total;
    (mean, ((s2 / total - mean * mean) / total).sqrt())
}
