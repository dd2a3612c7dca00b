//! Analytic solution of the free reference problem in the Hermite basis.
//!
//! Even functions `φ_n⁺(x) = √λ π^{-1/4} e^{-y²/2} Ĥ_{2n}(y)` and odd functions
//! `φ_n⁻` with `Ĥ_{2n+1}`, `y = λx`, are orthonormal. In this basis `H₀ - E` is
//! tridiagonal in each parity channel, and the expansion coefficients of
//! `A cos(kx)`, `B sin(kx)` (sine-like) and of the regularized cosine-like
//! partners obey three-term recursions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::special_fn::{
    hermite_function, hermite_functions, log_gamma_ratio, scaled_kummer, scaled_kummer_general, KummerCase,
};

/// Parity channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Offset of the Hermite degree: `2n` for even, `2n + 1` for odd.
    pub fn degree(self, n: usize) -> usize {
        match self {
            Parity::Even => 2 * n,
            Parity::Odd => 2 * n + 1,
        }
    }

    /// Diagonal of `(2/λ²) J` at `E = 0`: `2n + 1/2` or `2n + 3/2`.
    pub fn diagonal(self, n: usize) -> f64 {
        match self {
            Parity::Even => 2.0 * n as f64 + 0.5,
            Parity::Odd => 2.0 * n as f64 + 1.5,
        }
    }

    /// Coupling `√(n(n∓1/2))` between channel indices `n - 1` and `n`.
    pub fn coupling(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            Parity::Even => (n * (n - 0.5)).sqrt(),
            Parity::Odd => (n * (n + 0.5)).sqrt(),
        }
    }
}

/// Basis scale and asymptotic amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisParams {
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
}

impl BasisParams {
    /// `A = B = 1`.
    pub fn new(lambda: f64) -> Result<Self> {
        Self::with_amplitudes(lambda, 1.0, 1.0)
    }

    pub fn with_amplitudes(lambda: f64, a: f64, b: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("λ must be positive, got {lambda}")));
        }
        if a == 0.0 || b == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(Error::Domain(format!(
                "amplitudes must be finite and nonzero, got A = {a}, B = {b}"
            )));
        }
        Ok(Self { lambda, a, b })
    }

    fn amplitude(&self, parity: Parity) -> f64 {
        match parity {
            Parity::Even => self.a,
            Parity::Odd => self.b,
        }
    }
}

/// Energy with its wave number `k = √(2E)` and reduced momentum `μ = k/λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyPoint {
    pub e: f64,
    pub k: f64,
    pub mu: f64,
}

impl EnergyPoint {
    pub fn new(e: f64, params: &BasisParams) -> Result<Self> {
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::Domain(format!("energy must be positive, got {e}")));
        }
        let k = (2.0 * e).sqrt();
        Ok(Self {
            e,
            k,
            mu: k / params.lambda,
        })
    }

    /// The point with reduced momentum `mu`.
    pub fn from_mu(mu: f64, params: &BasisParams) -> Result<Self> {
        let k = mu * params.lambda;
        Self::new(0.5 * k * k, params)
    }
}

/// Element `J_{nm}(E) = ⟨φ_n|H₀ - E|φ_m⟩` of the given channel; pass `e = 0`
/// for `H₀` itself.
pub fn j_element(parity: Parity, n: i64, m: i64, params: &BasisParams, e: f64) -> Result<f64> {
    if n < 0 || m < 0 {
        return Err(Error::Index {
            index: n.min(m),
            lo: 0,
            hi: i64::MAX,
        });
    }
    let half_l2 = 0.5 * params.lambda * params.lambda;
    let mu2 = 2.0 * e / (params.lambda * params.lambda);
    Ok(match n - m {
        0 => half_l2 * (parity.diagonal(n as usize) - mu2),
        1 => -half_l2 * parity.coupling(n as usize),
        -1 => -half_l2 * parity.coupling(m as usize),
        _ => 0.0,
    })
}

/// Orthonormal basis function `φ_n^±(x)`.
pub fn basis_function(parity: Parity, n: usize, x: f64, params: &BasisParams) -> f64 {
    params.lambda.sqrt() * PI.powf(-0.25) * hermite_function(parity.degree(n), params.lambda * x)
}

/// `φ_0^±(x), ..., φ_{count-1}^±(x)`.
pub fn basis_functions(parity: Parity, count: usize, x: f64, params: &BasisParams) -> Vec<f64> {
    if count == 0 {
        return vec![];
    }
    let scale = params.lambda.sqrt() * PI.powf(-0.25);
    let h = hermite_functions(parity.degree(count - 1), params.lambda * x);
    (0..count).map(|n| scale * h[parity.degree(n)]).collect()
}

/// `s_0^±`.
pub fn sine_seed(parity: Parity, params: &BasisParams, energy: &EnergyPoint) -> f64 {
    sine_coefficient_analytic(parity, 0, params, energy)
}

/// Closed-form `s_n^± = (-1)^n √2 π^{1/4} {A,B} λ^{-1/2} e^{-μ²/2} Ĥ_{2n(+1)}(μ)`.
pub fn sine_coefficient_analytic(parity: Parity, n: usize, params: &BasisParams, energy: &EnergyPoint) -> f64 {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * 2f64.sqrt() * PI.powf(0.25) * params.amplitude(parity) / params.lambda.sqrt()
        * hermite_function(parity.degree(n), energy.mu)
}

/// All `s_n^±` for `n ≤ n_max` from the closed form.
pub fn sine_coefficients_analytic(
    parity: Parity,
    n_max: usize,
    params: &BasisParams,
    energy: &EnergyPoint,
) -> Vec<f64> {
    let pref = 2f64.sqrt() * PI.powf(0.25) * params.amplitude(parity) / params.lambda.sqrt();
    let h = hermite_functions(parity.degree(n_max), energy.mu);
    (0..=n_max)
        .map(|n| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sign * pref * h[parity.degree(n)]
        })
        .collect()
}

/// Second coefficient from the `n = 0` row of the homogeneous relation:
/// `μ² y_0 = d_0 y_0 - √(d_0) y_1`, `d_0 = 1/2` or `3/2`.
pub fn sine_second(parity: Parity, s0: f64, mu: f64) -> f64 {
    let d0 = parity.diagonal(0);
    (d0 - mu * mu) * s0 / d0.sqrt()
}

/// One step of the homogeneous three-term relation, `n ≥ 1`:
/// `y_{n+1} = [(d_n - μ²) y_n - √(n(n∓1/2)) y_{n-1}] / √((n+1)(n+1∓1/2))`.
pub fn sine_recursion_step(parity: Parity, n: usize, y_n: f64, y_nm1: f64, mu: f64) -> f64 {
    ((parity.diagonal(n) - mu * mu) * y_n - parity.coupling(n) * y_nm1) / parity.coupling(n + 1)
}

/// `c_0^±` via the fused `e^{-μ²/2} ₁F₁` evaluator.
pub fn cosine_seed(parity: Parity, params: &BasisParams, energy: &EnergyPoint) -> Result<f64> {
    let mu = energy.mu;
    let z = mu * mu;
    Ok(match parity {
        Parity::Even => {
            2.0 * (2.0 / params.lambda).sqrt()
                * PI.powf(-0.25)
                * params.a
                * mu
                * scaled_kummer(KummerCase::CosineEven, z)?
        }
        Parity::Odd => {
            2.0 / params.lambda.sqrt() * PI.powf(-0.25) * params.b * scaled_kummer(KummerCase::CosineOdd, z)?
        }
    })
}

/// Right-hand side of the `n = 0` row for the cosine-like coefficients:
/// `-2^{-1/2} π^{-1/4} λ^{3/2} A μ e^{μ²/2}` (even) and
/// `(1/2) π^{-1/4} λ^{3/2} B e^{μ²/2}` (odd).
pub fn cosine_source(parity: Parity, params: &BasisParams, energy: &EnergyPoint) -> Result<f64> {
    let mu = energy.mu;
    let growth = (0.5 * mu * mu).exp();
    if !growth.is_finite() {
        return Err(Error::Range(format!("e^(μ²/2) overflows at μ = {mu}")));
    }
    let base = PI.powf(-0.25) * params.lambda.powf(1.5) * growth;
    Ok(match parity {
        Parity::Even => -base * params.a * mu / 2f64.sqrt(),
        Parity::Odd => 0.5 * base * params.b,
    })
}

/// `c_1 = (source - J₀₀ c_0) / J₀₁`.
pub fn cosine_second(parity: Parity, params: &BasisParams, energy: &EnergyPoint, c0: f64) -> Result<f64> {
    let j00 = j_element(parity, 0, 0, params, energy.e)?;
    let j01 = j_element(parity, 0, 1, params, energy.e)?;
    if j01 == 0.0 {
        return Err(Error::Degenerate("J₀₁ vanishes".into()));
    }
    Ok((cosine_source(parity, params, energy)? - j00 * c0) / j01)
}

/// Closed form of `c_n` with the cancellation ratio of its series:
/// `c_n⁺ = 2√2 (A/√λ) √(Γ(n+1)/Γ(n+1/2)) μ e^{-μ²/2} ₁F₁(1/2-n; 3/2; μ²)` and
/// `c_n⁻ = √2 (B/√λ) √(Γ(n+1)/Γ(n+3/2)) e^{-μ²/2} ₁F₁(-1/2-n; 1/2; μ²)`.
fn cosine_closed(parity: Parity, n: usize, params: &BasisParams, energy: &EnergyPoint) -> Result<(f64, f64)> {
    let nf = n as f64;
    let z = energy.mu * energy.mu;
    let (a, b, front, gamma_den, extra) = match parity {
        Parity::Even => (0.5 - nf, 1.5, 2.0 * 2f64.sqrt() * params.a, nf + 0.5, energy.mu),
        Parity::Odd => (-0.5 - nf, 0.5, 2f64.sqrt() * params.b, nf + 1.5, 1.0),
    };
    let (series, ratio) = scaled_kummer_general(a, b, z)?;
    let gamma = (0.5 * log_gamma_ratio(nf + 1.0, gamma_den)?).exp();
    Ok((front / params.lambda.sqrt() * gamma * extra * series, ratio))
}

/// `c_n` from its closed form.
pub fn cosine_coefficient_analytic(
    parity: Parity,
    n: usize,
    params: &BasisParams,
    energy: &EnergyPoint,
) -> Result<f64> {
    Ok(cosine_closed(parity, n, params, energy)?.0)
}

/// Largest cancellation ratio accepted from the closed-form series.
const CLOSED_FORM_RATIO: f64 = 1e3;

/// Sine-like and cosine-like coefficients of one channel.
///
/// `s` comes from forward recursion. Below `n ≈ μ²/4` the cosine-like
/// solution is the one decaying in `n`, so forward recursion would amplify
/// rounding there; `c_n` is taken from its closed form up to that point, or
/// until the series starts to cancel, and recursed beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelCoefficients {
    pub parity: Parity,
    pub s: Vec<f64>,
    pub c: Vec<f64>,
}

impl ChannelCoefficients {
    /// Coefficients `0..=n_max`.
    pub fn compute(parity: Parity, n_max: usize, params: &BasisParams, energy: &EnergyPoint) -> Result<Self> {
        let mu = energy.mu;
        let s0 = sine_seed(parity, params, energy);
        let mut s = vec![s0];
        if n_max >= 1 {
            s.push(sine_second(parity, s0, mu));
        }
        for n in 1..n_max {
            s.push(sine_recursion_step(parity, n, s[n], s[n - 1], mu));
        }
        let mut c = vec![cosine_seed(parity, params, energy)?];
        let turning = (0.25 * mu * mu).ceil() as usize + 1;
        for n in 1..=n_max.min(turning.max(1)) {
            let (v, ratio) = cosine_closed(parity, n, params, energy)?;
            if n > 1 && ratio > CLOSED_FORM_RATIO {
                break;
            }
            c.push(v);
        }
        while c.len() <= n_max {
            let n = c.len() - 1;
            c.push(sine_recursion_step(parity, n, c[n], c[n - 1], mu));
        }
        Ok(Self { parity, s, c })
    }

    pub fn n_max(&self) -> usize {
        self.s.len() - 1
    }

    /// `w_n = s_n c_{n-1} - c_n s_{n-1}`.
    pub fn wronskian(&self, n: usize) -> f64 {
        self.s[n] * self.c[n - 1] - self.c[n] * self.s[n - 1]
    }

    /// `√(n(n∓1/2)) w_n`, which the three-term relation keeps independent
    /// of `n` for `n ≥ 1`.
    pub fn casoratian(&self, n: usize) -> f64 {
        self.parity.coupling(n) * self.wronskian(n)
    }
}

/// Central-difference residual of
/// `[d²/dμ² - μ² + 2(2n+1) ∓ 1] y(μ) = 0`.
pub fn energy_ode_residual(parity: Parity, n: usize, coeff_fn: impl Fn(f64) -> f64, mu: f64, h: f64) -> f64 {
    let f0 = coeff_fn(mu);
    let d2 = (coeff_fn(mu + h) - 2.0 * f0 + coeff_fn(mu - h)) / (h * h);
    let shift = match parity {
        Parity::Even => -1.0,
        Parity::Odd => 1.0,
    };
    d2 + (-mu * mu + 2.0 * (2 * n + 1) as f64 + shift) * f0
}

/// Sine-like or cosine-like solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Sine,
    Cosine,
}

/// Whether the plane wave travels away from or toward the interaction region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Outgoing,
    Incoming,
}

/// Sign choice in the confined combinations: `+` keeps the right half-line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Both channels of the reference problem at one energy, able to evaluate the
/// full solutions and their tails with the first `N` terms removed.
///
/// The coefficients decay only like `n^{-1/4}`, so summing the series upward
/// does not converge pointwise; tails are computed as the full function minus
/// the finite head. The full cosine-like function is the regular Green
/// integral `C(x) = -(q/k) ∫ sin(k|x-t|) φ_0(t) dt` of its source term.
#[derive(Debug, Clone)]
pub struct ReferenceSolutions {
    pub params: BasisParams,
    pub energy: EnergyPoint,
    pub even: ChannelCoefficients,
    pub odd: ChannelCoefficients,
    source_even: f64,
    source_odd: f64,
}

impl ReferenceSolutions {
    pub fn new(params: BasisParams, energy: EnergyPoint, n_max: usize) -> Result<Self> {
        Ok(Self {
            even: ChannelCoefficients::compute(Parity::Even, n_max, &params, &energy)?,
            odd: ChannelCoefficients::compute(Parity::Odd, n_max, &params, &energy)?,
            source_even: cosine_source(Parity::Even, &params, &energy)?,
            source_odd: cosine_source(Parity::Odd, &params, &energy)?,
            params,
            energy,
        })
    }

    fn channel(&self, parity: Parity) -> &ChannelCoefficients {
        match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }

    /// `A cos(kx)` or `B sin(kx)` for the sine kind; the regular cosine-like
    /// partner for the cosine kind.
    pub fn full(&self, parity: Parity, kind: Kind, x: f64) -> f64 {
        let k = self.energy.k;
        match (kind, parity) {
            (Kind::Sine, Parity::Even) => self.params.a * (k * x).cos(),
            (Kind::Sine, Parity::Odd) => self.params.b * (k * x).sin(),
            (Kind::Cosine, _) => self.green_integral(parity, x),
        }
    }

    fn green_integral(&self, parity: Parity, x: f64) -> f64 {
        let lambda = self.params.lambda;
        let k = self.energy.k;
        let source = match parity {
            Parity::Even => self.source_even,
            Parity::Odd => self.source_odd,
        };
        let reach = 9.5 / lambda;
        let integrand = |t: f64| (k * (x - t).abs()).sin() * basis_function(parity, 0, t, &self.params);
        let panel = (0.5 / lambda).min(1.0 / k);
        let mut total = 0.0;
        let inner = x.clamp(-reach, reach);
        for (lo, hi) in [(-reach, inner), (inner, reach)] {
            if hi > lo {
                total += integrate_panels(&integrand, lo, hi, panel);
            }
        }
        -source / k * total
    }

    /// `Σ_{n≥N} y_n φ_n(x)` evaluated as the full function minus the first
    /// `N` terms.
    pub fn partial_sum(&self, parity: Parity, kind: Kind, n: usize, x: f64) -> Result<f64> {
        let ch = self.channel(parity);
        let coeffs = match kind {
            Kind::Sine => &ch.s,
            Kind::Cosine => &ch.c,
        };
        if n > coeffs.len() {
            return Err(Error::Convergence(format!(
                "partial sum from N = {n} needs {n} coefficients, only {} available",
                coeffs.len()
            )));
        }
        let phi = basis_functions(parity, n, x, &self.params);
        let head: f64 = coeffs.iter().zip(&phi).map(|(c, p)| c * p).sum();
        Ok(self.full(parity, kind, x) - head)
    }

    /// `S_N⁺/A ± C_N⁻/B`, tending to `2cos(kx)` on one half-line and to zero
    /// on the other.
    pub fn cosine_combination(&self, side: Side, n: usize, x: f64) -> Result<f64> {
        Ok(self.partial_sum(Parity::Even, Kind::Sine, n, x)? / self.params.a
            + side.sign() * self.partial_sum(Parity::Odd, Kind::Cosine, n, x)? / self.params.b)
    }

    /// `S_N⁻/B ± C_N⁺/A`, tending to `2sin(kx)` on one half-line and to zero
    /// on the other.
    pub fn sine_combination(&self, side: Side, n: usize, x: f64) -> Result<f64> {
        Ok(self.partial_sum(Parity::Odd, Kind::Sine, n, x)? / self.params.b
            + side.sign() * self.partial_sum(Parity::Even, Kind::Cosine, n, x)? / self.params.a)
    }

    /// `½[S_N⁺/A ± C_N⁻/B] ± (i/2)[S_N⁻/B ± C_N⁺/A]` for outgoing waves,
    /// the complex conjugate for incoming ones. For `Side::Plus` this tends to
    /// `e^{ikx}` as `x → +∞` and to zero as `x → -∞`.
    pub fn asymptotic_combination(
        &self,
        side: Side,
        direction: Direction,
        n: usize,
        x: f64,
    ) -> Result<num_complex::Complex64> {
        let re = 0.5 * self.cosine_combination(side, n, x)?;
        let im = 0.5 * side.sign() * self.sine_combination(side, n, x)?;
        Ok(match direction {
            Direction::Outgoing => num_complex::Complex64::new(re, im),
            Direction::Incoming => num_complex::Complex64::new(re, -im),
        })
    }
}

fn integrate_panels(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, max_panel: f64) -> f64 {
    let rule = gauss_legendre_20();
    let panels = ((hi - lo) / max_panel).ceil().max(1.0) as usize;
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * h;
        for (t, w) in rule.iter() {
            total += 0.5 * h * w * f(mid + 0.5 * h * t);
        }
    }
    total
}

fn gauss_legendre_20() -> &'static [(f64, f64)] {
    static RULE: std::sync::OnceLock<Vec<(f64, f64)>> = std::sync::OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20).expect("20-point Gauss-Legendre rule"))
}
