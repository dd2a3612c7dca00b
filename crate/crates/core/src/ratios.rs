//! Ratios of the complex asymptotic coefficients.
//!
//! With `f_n^± = (s_n⁺ ± i c_n⁺)/2A` (even channel) and
//! `g_n^± = (c_n⁻ ± i s_n⁻)/2B` (odd channel) the amplitudes only need
//! `α_n = f_n/f_{n-1}`, `β_n = g_n/g_{n-1}`, `γ_n = f_n/g_n`, `ρ_n = f_n⁻/f_n⁺`
//! and `σ_n = g_n⁻/g_n⁺`. These are seeded from the first two coefficients
//! and advanced by forward recursion, so the `e^{∓μ²/2}` factors carried by
//! the raw coefficients cancel.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinematics::{BasisParams, ChannelCoefficients, EnergyPoint, Parity};

/// `f_0^±, f_1^±, g_0^±, g_1^±`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seeds {
    pub f0: [Complex64; 2],
    pub f1: [Complex64; 2],
    pub g0: [Complex64; 2],
    pub g1: [Complex64; 2],
}

/// Index of the `+` branch in the `[+, -]` arrays.
pub const PLUS: usize = 0;
/// Index of the `-` branch.
pub const MINUS: usize = 1;

/// First two sine-like and cosine-like coefficients of each channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadingCoefficients {
    pub s_even: [f64; 2],
    pub c_even: [f64; 2],
    pub s_odd: [f64; 2],
    pub c_odd: [f64; 2],
}

impl LeadingCoefficients {
    pub fn compute(params: &BasisParams, energy: &EnergyPoint) -> Result<Self> {
        let even = ChannelCoefficients::compute(Parity::Even, 1, params, energy)?;
        let odd = ChannelCoefficients::compute(Parity::Odd, 1, params, energy)?;
        Ok(Self {
            s_even: [even.s[0], even.s[1]],
            c_even: [even.c[0], even.c[1]],
            s_odd: [odd.s[0], odd.s[1]],
            c_odd: [odd.c[0], odd.c[1]],
        })
    }
}

/// Builds the complex seeds; `g` is formed from the odd channel with the
/// roles of `s` and `c` exchanged.
pub fn fg_seeds(lead: &LeadingCoefficients, params: &BasisParams) -> Seeds {
    let f = |n: usize, sign: f64| Complex64::new(lead.s_even[n], sign * lead.c_even[n]) / (2.0 * params.a);
    let g = |n: usize, sign: f64| Complex64::new(lead.c_odd[n], sign * lead.s_odd[n]) / (2.0 * params.b);
    Seeds {
        f0: [f(0, 1.0), f(0, -1.0)],
        f1: [f(1, 1.0), f(1, -1.0)],
        g0: [g(0, 1.0), g(0, -1.0)],
        g1: [g(1, 1.0), g(1, -1.0)],
    }
}

fn checked_div(num: Complex64, den: Complex64, stage: usize) -> Result<Complex64> {
    let q = num / den;
    if den.norm() == 0.0 || !q.re.is_finite() || !q.im.is_finite() {
        return Err(Error::DivideByZero { stage });
    }
    Ok(q)
}

fn step(parity: Parity, ratio: Complex64, n: usize, mu: f64) -> Result<Complex64> {
    let nf = n as f64;
    let norm = parity.coupling(n + 1);
    let lead = (parity.diagonal(n) - mu * mu) / norm;
    let tail = match parity {
        Parity::Even => (nf * (nf - 0.5)).sqrt(),
        Parity::Odd => (nf * (nf + 0.5)).sqrt(),
    } / norm;
    Ok(lead - tail * checked_div(Complex64::new(1.0, 0.0), ratio, n)?)
}

/// `α_{n+1}` from `α_n`, `n ≥ 1`.
pub fn alpha_step(alpha_n: Complex64, n: usize, mu: f64) -> Result<Complex64> {
    step(Parity::Even, alpha_n, n, mu)
}

/// `β_{n+1}` from `β_n`, `n ≥ 1`.
pub fn beta_step(beta_n: Complex64, n: usize, mu: f64) -> Result<Complex64> {
    step(Parity::Odd, beta_n, n, mu)
}

/// `α_n` from `α_1` as a finite continued fraction evaluated bottom-up:
/// with `t_m = √(m(m-1/2)) α_m`,
/// `t_m = (2m - 3/2 - μ²) - (m-1)(m-3/2)/t_{m-1}`, `t_1 = √(1/2) α_1`.
pub fn alpha_continued_fraction(n: usize, alpha_1: Complex64, mu: f64) -> Result<Complex64> {
    if n < 2 {
        return Err(Error::Domain(format!("continued fraction needs n ≥ 2, got {n}")));
    }
    let mu2 = mu * mu;
    let mut t = alpha_1 * 0.5f64.sqrt();
    for m in 2..=n {
        let mf = m as f64;
        let partial = (mf - 1.0) * (mf - 1.5);
        t = (2.0 * mf - 1.5 - mu2) - checked_div(Complex64::new(partial, 0.0), t, m - 1)?;
    }
    Ok(t / (n as f64 * (n as f64 - 0.5)).sqrt())
}

/// Ratios at one stage `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSet {
    pub n: usize,
    pub alpha: [Complex64; 2],
    pub beta: [Complex64; 2],
    pub gamma: [Complex64; 2],
    pub rho: Complex64,
    pub sigma: Complex64,
}

/// All ratio stages `1..=n_max` at one energy.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioChain {
    pub mu: f64,
    alpha: Vec<[Complex64; 2]>,
    beta: Vec<[Complex64; 2]>,
    gamma: Vec<[Complex64; 2]>,
    rho: Vec<Complex64>,
    sigma: Vec<Complex64>,
}

impl RatioChain {
    /// Advances the seeds through stage `n_max`.
    pub fn from_seeds(seeds: &Seeds, mu: f64, n_max: usize) -> Result<Self> {
        let mut alpha = vec![[Complex64::new(f64::NAN, 0.0); 2]];
        let mut beta = alpha.clone();
        let mut gamma = Vec::with_capacity(n_max + 1);
        let mut a1 = [Complex64::default(); 2];
        let mut b1 = [Complex64::default(); 2];
        let mut g0 = [Complex64::default(); 2];
        for br in [PLUS, MINUS] {
            a1[br] = checked_div(seeds.f1[br], seeds.f0[br], 0)?;
            b1[br] = checked_div(seeds.g1[br], seeds.g0[br], 0)?;
            g0[br] = checked_div(seeds.f0[br], seeds.g0[br], 0)?;
        }
        alpha.push(a1);
        beta.push(b1);
        gamma.push(g0);
        let mut rho = vec![checked_div(seeds.f0[MINUS], seeds.f0[PLUS], 0)?];
        let mut sigma = vec![checked_div(seeds.g0[MINUS], seeds.g0[PLUS], 0)?];
        for n in 1..=n_max {
            if n >= 2 {
                let (pa, pb) = (alpha[n - 1], beta[n - 1]);
                alpha.push([alpha_step(pa[0], n - 1, mu)?, alpha_step(pa[1], n - 1, mu)?]);
                beta.push([beta_step(pb[0], n - 1, mu)?, beta_step(pb[1], n - 1, mu)?]);
            }
            let (a, b) = (alpha[n], beta[n]);
            let prev = gamma[n - 1];
            gamma.push([
                checked_div(a[PLUS], b[PLUS], n)? * prev[PLUS],
                checked_div(a[MINUS], b[MINUS], n)? * prev[MINUS],
            ]);
            rho.push(checked_div(a[MINUS], a[PLUS], n)? * rho[n - 1]);
            sigma.push(checked_div(b[MINUS], b[PLUS], n)? * sigma[n - 1]);
        }
        Ok(Self {
            mu,
            alpha,
            beta,
            gamma,
            rho,
            sigma,
        })
    }

    /// Seeds and chain for one energy. A zero divisor (a coefficient node)
    /// triggers one retry at `μ(1 + 1e-10)`; if that fails too the energy is
    /// reported as unevaluable.
    pub fn compute(params: &BasisParams, energy: &EnergyPoint, n_max: usize) -> Result<Self> {
        let attempt = |e: &EnergyPoint| -> Result<Self> {
            let lead = LeadingCoefficients::compute(params, e)?;
            Self::from_seeds(&fg_seeds(&lead, params), e.mu, n_max)
        };
        match attempt(energy) {
            Err(Error::DivideByZero { stage }) => {
                let nudged = EnergyPoint::from_mu(energy.mu * (1.0 + 1e-10), params)?;
                attempt(&nudged).map_err(|err| Error::Unevaluable {
                    energy: energy.e,
                    reason: format!("zero divisor at stage {stage}, retry failed: {err}"),
                })
            }
            other => other,
        }
    }

    pub fn n_max(&self) -> usize {
        self.rho.len() - 1
    }

    /// Ratios at stage `n`, `1 ≤ n ≤ n_max`.
    pub fn stage(&self, n: usize) -> Result<RatioSet> {
        if n == 0 || n > self.n_max() {
            return Err(Error::Index {
                index: n as i64,
                lo: 1,
                hi: self.n_max() as i64,
            });
        }
        Ok(RatioSet {
            n,
            alpha: self.alpha[n],
            beta: self.beta[n],
            gamma: self.gamma[n],
            rho: self.rho[n],
            sigma: self.sigma[n],
        })
    }

    pub fn rho(&self, n: usize) -> Complex64 {
        self.rho[n]
    }

    pub fn sigma(&self, n: usize) -> Complex64 {
        self.sigma[n]
    }

    pub fn gamma(&self, n: usize) -> [Complex64; 2] {
        self.gamma[n]
    }
}

/// The stage-`target_n` ratios, computed from the seeds step by step.
pub fn ratio_pipeline(target_n: usize, seeds: &Seeds, mu: f64) -> Result<RatioSet> {
    if target_n == 0 {
        return Err(Error::Domain("target stage must be at least 1".into()));
    }
    RatioChain::from_seeds(seeds, mu, target_n)?.stage(target_n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::ChannelCoefficients;

    struct Raw {
        f: [Vec<Complex64>; 2],
        g: [Vec<Complex64>; 2],
    }

    fn raw(params: &BasisParams, e: &EnergyPoint, n: usize) -> Raw {
        let ev = ChannelCoefficients::compute(Parity::Even, n, params, e).unwrap();
        let od = ChannelCoefficients::compute(Parity::Odd, n, params, e).unwrap();
        let mk = |sign: f64| -> (Vec<Complex64>, Vec<Complex64>) {
            (
                (0..=n)
                    .map(|i| Complex64::new(ev.s[i], sign * ev.c[i]) / (2.0 * params.a))
                    .collect(),
                (0..=n)
                    .map(|i| Complex64::new(od.c[i], sign * od.s[i]) / (2.0 * params.b))
                    .collect(),
            )
        };
        let (fp, gp) = mk(1.0);
        let (fm, gm) = mk(-1.0);
        Raw {
            f: [fp, fm],
            g: [gp, gm],
        }
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn seed_definitions() {
        let p = BasisParams::with_amplitudes(1.2, 0.7, 1.9).unwrap();
        let e = EnergyPoint::new(0.8, &p).unwrap();
        let lead = LeadingCoefficients::compute(&p, &e).unwrap();
        let s = fg_seeds(&lead, &p);
        assert!((s.f0[PLUS].im * 2.0 * p.a - lead.c_even[0]).abs() < 1e-15);
        assert!((s.f0[MINUS].im * 2.0 * p.a + lead.c_even[0]).abs() < 1e-15);
        assert!((s.g0[PLUS] * 2.0 * p.b - Complex64::new(lead.c_odd[0], lead.s_odd[0])).norm() < 1e-15);
        let zero_c = LeadingCoefficients {
            c_even: [0.0, 0.0],
            ..lead
        };
        let s = fg_seeds(&zero_c, &p);
        assert_eq!(s.f0[PLUS], Complex64::new(lead.s_even[0] / (2.0 * p.a), 0.0));
    }

    #[test]
    fn stage_one_is_seed_ratios() {
        let p = BasisParams::new(1.0).unwrap();
        let e = EnergyPoint::new(1.1, &p).unwrap();
        let s = fg_seeds(&LeadingCoefficients::compute(&p, &e).unwrap(), &p);
        let r = ratio_pipeline(1, &s, e.mu).unwrap();
        for br in [PLUS, MINUS] {
            assert!(close(r.alpha[br], s.f1[br] / s.f0[br], 1e-15));
            assert!(close(r.beta[br], s.g1[br] / s.g0[br], 1e-15));
            assert!(close(r.gamma[br], s.f1[br] / s.g1[br], 1e-14));
        }
        assert!(close(r.rho, s.f1[MINUS] / s.f1[PLUS], 1e-14));
        assert!(close(r.sigma, s.g1[MINUS] / s.g1[PLUS], 1e-14));
    }

    #[test]
    fn chain_matches_raw_division() {
        for (lambda, e) in [(1.0, 2.0), (1.5, 0.3), (0.8, 1.0)] {
            let p = BasisParams::new(lambda).unwrap();
            let e = EnergyPoint::new(e, &p).unwrap();
            let n = 40;
            let chain = RatioChain::compute(&p, &e, n).unwrap();
            let r = raw(&p, &e, n);
            for m in 1..=n {
                let st = chain.stage(m).unwrap();
                for br in [PLUS, MINUS] {
                    assert!(close(st.alpha[br], r.f[br][m] / r.f[br][m - 1], 1e-8), "α m={m}");
                    assert!(close(st.beta[br], r.g[br][m] / r.g[br][m - 1], 1e-8), "β m={m}");
                    assert!(close(st.gamma[br], r.f[br][m] / r.g[br][m], 1e-8), "γ m={m}");
                }
                assert!(close(st.rho, r.f[MINUS][m] / r.f[PLUS][m], 1e-8), "ρ m={m}");
                assert!(close(st.sigma, r.g[MINUS][m] / r.g[PLUS][m], 1e-8), "σ m={m}");
            }
        }
    }

    #[test]
    fn rho_sigma_consistency_and_unimodularity() {
        let p = BasisParams::new(1.0).unwrap();
        let e = EnergyPoint::new(0.9, &p).unwrap();
        let chain = RatioChain::compute(&p, &e, 30).unwrap();
        for n in 2..=30 {
            let (a, b) = (chain.stage(n).unwrap(), chain.stage(n - 1).unwrap());
            let lhs = (a.rho / b.rho) * (b.sigma / a.sigma);
            let rhs = (a.alpha[MINUS] * a.beta[PLUS]) / (a.alpha[PLUS] * a.beta[MINUS]);
            assert!(close(lhs, rhs, 1e-12));
            assert!((a.rho.norm() - 1.0).abs() < 1e-12);
            assert!((a.sigma.norm() - 1.0).abs() < 1e-12);
            assert!(close(a.alpha[MINUS], a.alpha[PLUS].conj(), 1e-14));
        }
    }

    #[test]
    fn continued_fraction_equals_steps() {
        let a1 = Complex64::new(0.3, -1.2);
        for mu in [0.4, 1.5, 3.0] {
            let mut a = a1;
            for n in 1..50 {
                a = alpha_step(a, n, mu).unwrap();
                let cf = alpha_continued_fraction(n + 1, a1, mu).unwrap();
                assert!(close(cf, a, 1e-10), "μ={mu} n={}", n + 1);
            }
        }
        // a huge α₁ leaves only the leading term
        let cf = alpha_continued_fraction(2, Complex64::new(1e300, 0.0), 1.1).unwrap();
        assert!((cf.re - (2.5 - 1.21) / 3f64.sqrt()).abs() < 1e-14);
        assert!(alpha_continued_fraction(1, a1, 1.0).is_err());
    }

    #[test]
    fn zero_ratio_is_reported() {
        assert_eq!(
            alpha_step(Complex64::default(), 3, 1.0),
            Err(Error::DivideByZero { stage: 3 })
        );
        assert!(beta_step(Complex64::default(), 2, 1.0).is_err());
    }

    #[test]
    fn high_energy_chain_is_finite() {
        let p = BasisParams::new(1.0).unwrap();
        for e in [50.0, 120.0, 200.0] {
            let e = EnergyPoint::new(e, &p).unwrap();
            let chain = RatioChain::compute(&p, &e, 60).unwrap();
            for n in 1..=60 {
                let s = chain.stage(n).unwrap();
                for v in s.alpha.iter().chain(&s.beta).chain(&s.gamma).chain([&s.rho, &s.sigma]) {
                    assert!(v.re.is_finite() && v.im.is_finite());
                }
            }
        }
    }
}
