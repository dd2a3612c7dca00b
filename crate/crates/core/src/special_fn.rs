//! Special functions consumed by the kinematics and quadrature modules:
//! normalized Hermite polynomials and Hermite functions, the two confluent
//! hypergeometric cases that seed the cosine-like coefficients, and real and
//! complex log-Gamma.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Normalized Hermite polynomial `Ĥ_n(y) = H_n(y) / sqrt(2^n n!)`.
///
/// Orthonormal under the weight `exp(-y²)/√π`. Evaluated by the symmetric
/// forward recursion `y Ĥ_n = sqrt(n/2) Ĥ_{n-1} + sqrt((n+1)/2) Ĥ_{n+1}`.
pub fn hermite_normalized(n: usize, y: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for m in 0..n {
        let next = (y * cur - (m as f64 / 2.0).sqrt() * prev) / ((m as f64 + 1.0) / 2.0).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// `Ĥ_0(y), ..., Ĥ_{n_max}(y)`.
pub fn hermite_normalized_upto(n_max: usize, y: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut prev = 0.0;
    let mut cur = 1.0;
    out.push(cur);
    for m in 0..n_max {
        let next = (y * cur - (m as f64 / 2.0).sqrt() * prev) / ((m as f64 + 1.0) / 2.0).sqrt();
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

/// Hermite functions `exp(-y²/2) Ĥ_m(y)` for `m = 0..=n_max`.
///
/// The Gaussian factor is carried as a running log-scale so that neither the
/// polynomial nor the exponential overflows on its own.
pub fn hermite_functions(n_max: usize, y: f64) -> Vec<f64> {
    const BIG: f64 = 1e100;
    let ln_big = BIG.ln();
    let mut log_scale = -0.5 * y * y;
    let mut out = Vec::with_capacity(n_max + 1);
    let mut prev = 0.0;
    let mut cur = 1.0;
    out.push(log_scale.exp());
    for m in 0..n_max {
        let next = (y * cur - (m as f64 / 2.0).sqrt() * prev) / ((m as f64 + 1.0) / 2.0).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            cur /= BIG;
            prev /= BIG;
            log_scale += ln_big;
        }
        out.push(cur * log_scale.exp());
    }
    out
}

/// Single Hermite function `exp(-y²/2) Ĥ_n(y)`.
pub fn hermite_function(n: usize, y: f64) -> f64 {
    hermite_functions(n, y)[n]
}

/// The two confluent hypergeometric cases behind the cosine-like seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KummerCase {
    /// `₁F₁(1/2; 3/2; z)`
    CosineEven,
    /// `₁F₁(-1/2; 1/2; z)`
    CosineOdd,
}

impl KummerCase {
    fn params(self) -> (f64, f64) {
        match self {
            KummerCase::CosineEven => (0.5, 1.5),
            KummerCase::CosineOdd => (-0.5, 0.5),
        }
    }
}

/// Kummer series `₁F₁(a; b; z)` at `z ≥ 0` as `(sign, ln|sum|, ratio)`, where
/// `ratio` is the largest term over the sum and bounds the rounding loss.
///
/// Once `k > -a` every term has one sign, so cancellation is confined to the
/// finite head of the series.
fn kummer_series_log(a: f64, b: f64, z: f64) -> Result<(f64, f64, f64)> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!(
            "Kummer argument must be finite and ≥ 0, got {z}"
        )));
    }
    if !(b > 0.0) {
        return Err(Error::Domain(format!(
            "Kummer lower parameter must be positive, got {b}"
        )));
    }
    const RESCALE: f64 = 1e250;
    let max_terms = (10.0 * z) as usize + (-a).max(0.0) as usize + 2000;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut largest = 1.0f64;
    let mut log_scale = 0.0f64;
    for k in 0..max_terms {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * z / (kf + 1.0);
        sum += term;
        largest = largest.max(term.abs());
        if largest > RESCALE {
            sum /= RESCALE;
            term /= RESCALE;
            largest /= RESCALE;
            log_scale += RESCALE.ln();
        }
        if term == 0.0 || (kf > z && kf > -a && term.abs() <= 1e-17 * sum.abs()) {
            return Ok((sum.signum(), sum.abs().ln() + log_scale, largest / sum.abs()));
        }
    }
    Err(Error::Convergence(format!("Kummer series did not converge at z = {z}")))
}

/// `exp(-z/2) · ₁F₁(a; b; z)` for the two seed cases.
///
/// This is the combination the cosine-like seeds need; it stays finite far
/// beyond the point where `₁F₁` alone overflows.
pub fn scaled_kummer(case: KummerCase, z: f64) -> Result<f64> {
    let (a, b) = case.params();
    Ok(scaled_kummer_general(a, b, z)?.0)
}

/// `exp(-z/2) · ₁F₁(a; b; z)` for `z ≥ 0`, `b > 0`, with the largest-term to
/// sum ratio of the series (relative error is about that times ε).
pub fn scaled_kummer_general(a: f64, b: f64, z: f64) -> Result<(f64, f64)> {
    let (sign, ln_abs, ratio) = kummer_series_log(a, b, z)?;
    let ln_scaled = ln_abs - 0.5 * z;
    if ln_scaled > f64::MAX.ln() {
        return Err(Error::Range(format!("exp(-z/2)·1F1 overflows at z = {z}")));
    }
    Ok((sign * ln_scaled.exp(), ratio))
}

/// `₁F₁(1/2; 3/2; z)` or `₁F₁(-1/2; 1/2; z)` for `z = μ² ≥ 0`.
pub fn kummer_1f1_half(case: KummerCase, z: f64) -> Result<f64> {
    let (a, b) = case.params();
    let (sign, ln_abs, _) = kummer_series_log(a, b, z)?;
    if ln_abs > f64::MAX.ln() {
        return Err(Error::Range(format!("1F1 overflows at z = {z}")));
    }
    Ok(sign * ln_abs.exp())
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn ln_gamma_lanczos(x: f64) -> f64 {
    // x >= 0.5
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Stirling correction `ln Γ(x) - [(x - 1/2) ln x - x + ln(2π)/2]` for x ≥ 15.
fn stirling_tail(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0
        - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 * (1.0 / 1188.0 - r2 * 691.0 / 360_360.0)))))
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("ln Γ requires a positive argument, got {x}")));
    }
    if x < 0.5 {
        // Γ(x) = Γ(x+1)/x
        return Ok(ln_gamma_lanczos(x + 1.0) - x.ln());
    }
    Ok(ln_gamma_lanczos(x))
}

/// `ln Γ(a) - ln Γ(b)` for positive `a`, `b`.
///
/// For large arguments the leading Stirling terms are differenced with
/// `ln_1p` so nearby arguments do not lose their common magnitude.
pub fn log_gamma_ratio(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::Domain(format!(
            "log_gamma_ratio requires positive arguments, got ({a}, {b})"
        )));
    }
    if a.min(b) < 15.0 {
        return Ok(ln_gamma(a)? - ln_gamma(b)?);
    }
    let d = a - b;
    let lead = d * a.ln() + (b - 0.5) * (d / b).ln_1p() - d;
    Ok(lead + stirling_tail(a) - stirling_tail(b))
}

/// Complex `ln Γ(z)`; the imaginary part is only meaningful modulo 2π.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // reflection: Γ(z) Γ(1-z) = π / sin(πz)
        let s = (Complex64::from(PI) * z).sin();
        return Complex64::from(PI).ln() - s.ln() - ln_gamma_complex(Complex64::new(1.0, 0.0) - z);
    }
    let x = z - 1.0;
    let mut acc = Complex64::from(LANCZOS_COEF[0]);
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += Complex64::from(*c) / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    Complex64::from(0.5 * (2.0 * PI).ln()) + (x + 0.5) * t.ln() - t + acc.ln()
}
