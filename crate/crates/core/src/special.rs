//! Transcendental kernels: physicists' Hermite polynomials, the standard
//! normal density and distribution, and the gamma family.
//!
//! The incomplete gamma functions use the classic split: a power series for
//! `x < a + 1` and a modified-Lentz continued fraction otherwise. Whichever
//! tail is not computed directly is taken as the complement of `Γ(a)`, so
//! `lower_gamma(a, x) + upper_gamma(a, x) == gamma_fn(a)` up to one rounding.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

/// Largest Hermite order the crate evaluates.
pub const MAX_ORDER: usize = 64;

const GAMMA_EPS: f64 = 1e-15;
const GAMMA_MAX_ITER: usize = 500;
const LENTZ_FLOOR: f64 = 1e-300;

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// `H_0(x) ..= H_n(x)` for a single abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteValues {
    x: f64,
    values: Vec<f64>,
}

impl HermiteValues {
    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Highest order held, i.e. `n` for `H_0..=H_n`.
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, k: usize) -> Option<f64> {
        self.values.get(k).copied()
    }

    /// The orthonormal Hermite function
    /// `h_k(x) = (2^k k! √π)^{-1/2} e^{-x²/2} H_k(x)`.
    pub fn hermite_function(&self, k: usize) -> Option<f64> {
        let h = self.get(k)?;
        let log_norm = k as f64 * std::f64::consts::LN_2 + ln_factorial(k) + 0.5 * PI.ln();
        Some(h * (-0.5 * self.x * self.x - 0.5 * log_norm).exp())
    }
}

/// Evaluates `H_0(x) ..= H_n(x)` with the upward three-term recurrence
/// `H_{k+1} = 2x H_k - 2k H_{k-1}`.
pub fn hermite_all(x: f64, n: usize) -> Result<HermiteValues> {
    if !x.is_finite() {
        return Err(domain(format!("Hermite abscissa must be finite, got {x}")));
    }
    if n > MAX_ORDER {
        return Err(domain(format!("Hermite order {n} exceeds {MAX_ORDER}")));
    }
    let mut values = vec![0.0; n + 1];
    hermite_fill(x, &mut values);
    Ok(HermiteValues { x, values })
}

/// Fills `out[k] = H_k(x)` for `k < out.len()`.
pub(crate) fn hermite_fill(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = 2.0 * x;
    for k in 1..out.len() - 1 {
        out[k + 1] = 2.0 * x * out[k] - 2.0 * k as f64 * out[k - 1];
    }
}

/// Standard normal density `Z(x) = e^{-x²/2} / √(2π)`.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard normal distribution function, via `Φ(x) = Γ(1/2, x²/2) / (2√π)`
/// for `x < 0` and its complement otherwise.
pub fn normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let tail = upper_gamma(0.5, 0.5 * x * x).unwrap_or(0.0) / (2.0 * PI.sqrt());
    if x < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Standard normal quantile function. Acklam's rational approximation
/// polished with two Halley steps against [`normal_cdf`].
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!(
            "normal quantile needs p in (0, 1), got {p}"
        )));
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let mut x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    for _ in 0..2 {
        let e = normal_cdf(x) - p;
        let u = e * SQRT_2PI * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(z: f64) -> f64 {
    // z is the shifted argument (a - 1)
    LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (z + i as f64 + 1.0))
}

/// `Γ(a)` for `a > 0`. Integer and half-integer arguments are built exactly
/// from `Γ(1) = 1`, `Γ(1/2) = √π` and `Γ(a+1) = aΓ(a)`; other arguments use
/// a Lanczos approximation.
pub fn gamma_fn(a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain(format!("gamma function needs a > 0, got {a}")));
    }
    let twice = 2.0 * a;
    if twice.fract() == 0.0 && a <= 171.0 {
        let (mut value, mut at) = if (twice as u64).is_multiple_of(2) {
            (1.0, 1.0)
        } else {
            (PI.sqrt(), 0.5)
        };
        while at < a {
            value *= at;
            at += 1.0;
        }
        return Ok(value);
    }
    if a < 0.5 {
        // reflection keeps the Lanczos sum in its accurate range
        return Ok(PI / ((PI * a).sin() * gamma_fn(1.0 - a)?));
    }
    let z = a - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(SQRT_2PI * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z))
}

/// `ln Γ(a)` for `a > 0`.
pub fn ln_gamma(a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain(format!("log-gamma needs a > 0, got {a}")));
    }
    if a < 0.5 {
        return Ok((PI / (PI * a).sin()).ln() - ln_gamma(1.0 - a)?);
    }
    let z = a - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// `ln k!` by direct summation (exact to rounding for the small `k` used here).
pub fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Lower incomplete gamma `γ(a, x) = ∫_0^x t^{a-1} e^{-t} dt`.
pub fn lower_gamma(a: f64, x: f64) -> Result<f64> {
    check_incomplete_args(a, x)?;
    let g = gamma_fn(a)?;
    incomplete_gamma_parts(a, x, g).map(|(lower, _)| lower)
}

/// Upper incomplete gamma `Γ(a, x) = ∫_x^∞ t^{a-1} e^{-t} dt`.
pub fn upper_gamma(a: f64, x: f64) -> Result<f64> {
    check_incomplete_args(a, x)?;
    let g = gamma_fn(a)?;
    incomplete_gamma_parts(a, x, g).map(|(_, upper)| upper)
}

fn check_incomplete_args(a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain(format!("incomplete gamma needs a > 0, got a = {a}")));
    }
    if !(x >= 0.0) {
        return Err(domain(format!(
            "incomplete gamma needs x >= 0, got x = {x}"
        )));
    }
    Ok(())
}

/// Returns `(γ(a, x), Γ(a, x))` given a precomputed `Γ(a)`.
/// Arguments are assumed valid.
pub(crate) fn incomplete_gamma_parts(a: f64, x: f64, gamma_a: f64) -> Result<(f64, f64)> {
    if x == 0.0 {
        return Ok((0.0, gamma_a));
    }
    if x.is_infinite() {
        return Ok((gamma_a, 0.0));
    }
    if x < a + 1.0 {
        let lower = lower_series(a, x)?;
        Ok((lower, gamma_a - lower))
    } else {
        let upper = upper_continued_fraction(a, x)?;
        Ok((gamma_a - upper, upper))
    }
}

fn lower_series(a: f64, x: f64) -> Result<f64> {
    let mut denom = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..GAMMA_MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() <= sum.abs() * GAMMA_EPS {
            return Ok(sum * (a * x.ln() - x).exp());
        }
    }
    Err(Error::NoConvergence {
        what: "incomplete gamma series",
        iterations: GAMMA_MAX_ITER,
    })
}

fn upper_continued_fraction(a: f64, x: f64) -> Result<f64> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / LENTZ_FLOOR;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < LENTZ_FLOOR {
            d = LENTZ_FLOOR;
        }
        c = b + an / c;
        if c.abs() < LENTZ_FLOOR {
            c = LENTZ_FLOOR;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() <= GAMMA_EPS {
            return Ok(h * (a * x.ln() - x).exp());
        }
    }
    Err(Error::NoConvergence {
        what: "incomplete gamma continued fraction",
        iterations: GAMMA_MAX_ITER,
    })
}
