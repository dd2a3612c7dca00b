//! Finite Hamiltonian, its spectral Green's function, and the scattering
//! amplitudes obtained by matching the interior block to the free
//! asymptotic recursions.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinematics::{BasisParams, EnergyPoint, Kind, Parity, ReferenceSolutions};
use crate::linalg::{eig_symmetric, SpectralDecomposition, SymmetricMatrix};
use crate::potentials::PotentialSpec;
use crate::quadrature::{potential_elements, quadrature_size_for, xi_index, PotentialMatrix};
use crate::ratios::{RatioChain, MINUS, PLUS};

/// `H₀ + V` truncated to `2N × 2N` in the interleaved ordering, with its
/// eigendecomposition.
#[derive(Debug, Clone)]
pub struct FiniteHamiltonian {
    pub params: BasisParams,
    pub n: usize,
    pub matrix: SymmetricMatrix,
    pub decomposition: SpectralDecomposition,
    /// Whether the potential passed the parity test.
    pub even: bool,
}

/// Adds the free Hamiltonian (`J` at `E = 0`) to `potential` and decomposes.
pub fn assemble_hamiltonian(params: &BasisParams, potential: &PotentialMatrix) -> Result<FiniteHamiltonian> {
    let n = potential.n;
    let mut matrix = potential.interleaved.clone();
    let half_l2 = 0.5 * params.lambda * params.lambda;
    for parity in [Parity::Even, Parity::Odd] {
        for i in 0..n {
            let a = xi_index(parity, i, n);
            matrix.add(a, a, half_l2 * parity.diagonal(i));
            if i + 1 < n {
                let b = xi_index(parity, i + 1, n);
                matrix.add(a, b, -half_l2 * parity.coupling(i + 1));
            }
        }
    }
    let decomposition = eig_symmetric(&matrix)?;
    Ok(FiniteHamiltonian {
        params: *params,
        n,
        matrix,
        decomposition,
        even: potential.even,
    })
}

impl FiniteHamiltonian {
    /// Row of the even-channel boundary function `φ_{N-1}⁺`.
    pub fn row_plus(&self) -> usize {
        2 * self.n - 1
    }

    /// Row of the odd-channel boundary function `φ_{N-1}⁻`.
    pub fn row_minus(&self) -> usize {
        0
    }

    pub fn spectral_range(&self) -> f64 {
        let v = &self.decomposition.values;
        (v[v.len() - 1] - v[0]).max(f64::MIN_POSITIVE)
    }

    /// Distance below which an energy is treated as sitting on an eigenvalue.
    pub fn pole_guard(&self) -> f64 {
        1e-8 * self.spectral_range()
    }

    /// `G_{ab}(E) = Σ_k Λ_{ak} Λ_{bk} / (ε_k - E)`.
    pub fn green(&self, a: usize, b: usize, e: f64) -> f64 {
        let ra = self.decomposition.row(a);
        let rb = self.decomposition.row(b);
        self.decomposition
            .values
            .iter()
            .zip(ra.iter().zip(rb))
            .map(|(eps, (x, y))| x * y / (eps - e))
            .sum()
    }

    /// Nearest eigenvalue to `e` and its distance.
    pub fn nearest_eigenvalue(&self, e: f64) -> (f64, f64) {
        self.decomposition
            .values
            .iter()
            .map(|&v| (v, (v - e).abs()))
            .fold((f64::NAN, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
    }
}

/// Boundary components of the Green's function and the couplings to the
/// outer recursions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenCorners {
    pub gpp: f64,
    pub gmm: f64,
    pub gpm: f64,
    pub gmp: f64,
    /// `-(λ²/2)√(N(N-1/2))`
    pub jp: f64,
    /// `-(λ²/2)√(N(N+1/2))`
    pub jm: f64,
}

/// Green's function corners at `e`; fails if `e` is within the pole guard of
/// an eigenvalue.
pub fn green_corners(h: &FiniteHamiltonian, e: f64) -> Result<GreenCorners> {
    let (eigenvalue, distance) = h.nearest_eigenvalue(e);
    if distance <= h.pole_guard() {
        return Err(Error::Pole {
            energy: e,
            eigenvalue,
            distance,
        });
    }
    let (p, m) = (h.row_plus(), h.row_minus());
    let half_l2 = 0.5 * h.params.lambda * h.params.lambda;
    Ok(GreenCorners {
        gpp: h.green(p, p, e),
        gmm: h.green(m, m, e),
        gpm: h.green(p, m, e),
        gmp: h.green(m, p, e),
        jp: -half_l2 * Parity::Even.coupling(h.n),
        jm: -half_l2 * Parity::Odd.coupling(h.n),
    })
}

/// Amplitudes at one energy. `W± = T ± R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringAmplitudes {
    pub e: f64,
    pub t: Complex64,
    pub r: Complex64,
    pub wp: Complex64,
    pub wm: Complex64,
}

impl ScatteringAmplitudes {
    pub fn from_w(e: f64, wp: Complex64, wm: Complex64) -> Self {
        Self {
            e,
            t: 0.5 * (wp + wm),
            r: 0.5 * (wp - wm),
            wp,
            wm,
        }
    }

    /// `|T|² + |R|² - 1`.
    pub fn unitarity_defect(&self) -> f64 {
        self.t.norm_sqr() + self.r.norm_sqr() - 1.0
    }
}

fn check_denominator(d: Complex64, what: &str) -> Result<Complex64> {
    if d.norm() < 1e-14 {
        return Err(Error::Degenerate(format!("{what} vanishes: |{d}| < 1e-14")));
    }
    Ok(d)
}

fn boundary_needs(chain: &RatioChain, n: usize) -> Result<()> {
    if n == 0 || chain.n_max() < n {
        return Err(Error::Domain(format!(
            "ratio chain reaches stage {}, stage {n} required",
            chain.n_max()
        )));
    }
    Ok(())
}

/// Amplitudes for a potential of any parity from the two boundary rows of the
/// matrix wave equation, solved as a `2 × 2` system for `(W₊, W₋)`.
pub fn amplitudes_general(c: &GreenCorners, chain: &RatioChain, n: usize, e: f64) -> Result<ScatteringAmplitudes> {
    boundary_needs(chain, n)?;
    let st = chain.stage(n)?;
    let (ap, am) = (st.alpha[PLUS], st.alpha[MINUS]);
    let (bp, bm) = (st.beta[PLUS], st.beta[MINUS]);
    let g = st.gamma[PLUS];
    let (rho_prev, rho) = (chain.rho(n - 1), st.rho);
    let (sigma_prev, sigma) = (chain.sigma(n - 1), st.sigma);
    let one = Complex64::new(1.0, 0.0);

    let a11 = one + c.gpp * c.jp * ap;
    let a12 = c.gpm * c.jm * ap / g;
    let r1 = -rho_prev * (one + c.gpp * c.jp * am) + c.gpm * c.jm * ap * sigma / g;
    let a21 = c.gmp * c.jp * bp * g;
    let a22 = one + c.gmm * c.jm * bp;
    let r2 = sigma_prev * (one + c.gmm * c.jm * bm) - c.gmp * c.jp * bp * g * rho;

    let det = check_denominator(a11 * a22 - a12 * a21, "boundary determinant")?;
    let wp = (r1 * a22 - a12 * r2) / det;
    let wm = (a11 * r2 - a21 * r1) / det;
    Ok(ScatteringAmplitudes::from_w(e, wp, wm))
}

/// Amplitudes when the potential is even: the channels decouple and each
/// `W` is a unimodular ratio.
pub fn amplitudes_even(c: &GreenCorners, chain: &RatioChain, n: usize, e: f64) -> Result<ScatteringAmplitudes> {
    boundary_needs(chain, n)?;
    let st = chain.stage(n)?;
    let one = Complex64::new(1.0, 0.0);
    let dp = check_denominator(one + c.gpp * c.jp * st.alpha[PLUS], "even-channel denominator")?;
    let dm = check_denominator(one + c.gmm * c.jm * st.beta[PLUS], "odd-channel denominator")?;
    let wp = -chain.rho(n - 1) * (one + c.gpp * c.jp * st.alpha[MINUS]) / dp;
    let wm = chain.sigma(n - 1) * (one + c.gmm * c.jm * st.beta[MINUS]) / dm;
    Ok(ScatteringAmplitudes::from_w(e, wp, wm))
}

/// `θ₊ = arg(W₊)/2`, `θ₋ = arg(-W₋)/2`, both in `(-π/2, π/2]`, so that
/// `T = (e^{2iθ₊} - e^{2iθ₋})/2`.
pub fn phase_angles(a: &ScatteringAmplitudes) -> Result<(f64, f64)> {
    let (np, nm) = (a.wp.norm(), a.wm.norm());
    if (np - 1.0).abs() > 1e-6 || (nm - 1.0).abs() > 1e-6 {
        return Err(Error::NotUnimodular {
            w_plus: np,
            w_minus: nm,
        });
    }
    Ok((0.5 * a.wp.arg(), 0.5 * (-a.wm).arg()))
}

/// Interior expansion coefficients and the boundary coefficients of the
/// outer regions.
#[derive(Debug, Clone, PartialEq)]
pub struct MiddleCoefficients {
    /// `a_m` stored at `m + N`.
    pub a: Vec<Complex64>,
    /// `[b⁺_{N-1}, b⁻_{N-1}]` from the asymptotic form.
    pub boundary_inner: [Complex64; 2],
    /// `[b⁺_N, b⁻_N]`.
    pub boundary_outer: [Complex64; 2],
    pub amplitudes: ScatteringAmplitudes,
}

/// `f_n^±` and `g_n^±` rebuilt from the seeds and ratios.
fn fg_at(lead: &crate::ratios::Seeds, chain: &RatioChain, n: usize) -> Result<([Complex64; 2], [Complex64; 2])> {
    let mut f = lead.f0;
    let mut g = lead.g0;
    for m in 1..=n {
        let st = chain.stage(m)?;
        for br in [PLUS, MINUS] {
            f[br] *= st.alpha[br];
            g[br] *= st.beta[br];
        }
    }
    Ok((f, g))
}

/// Solves `(H - E) a = -J b_N` on the boundary rows for every interior
/// coefficient, with `b_n⁺ = W₊ f_n⁺ + f_n⁻` and `b_n⁻ = W₋ g_n⁺ - g_n⁻`.
pub fn middle_coefficients(
    h: &FiniteHamiltonian,
    energy: &EnergyPoint,
    chain: &RatioChain,
    corners: &GreenCorners,
    amplitudes: &ScatteringAmplitudes,
) -> Result<MiddleCoefficients> {
    green_corners(h, energy.e)?;
    let n = h.n;
    let lead = crate::ratios::LeadingCoefficients::compute(&h.params, energy)?;
    let seeds = crate::ratios::fg_seeds(&lead, &h.params);
    let (f_prev, g_prev) = fg_at(&seeds, chain, n - 1)?;
    let (f_n, g_n) = fg_at(&seeds, chain, n)?;
    let (wp, wm) = (amplitudes.wp, amplitudes.wm);
    let b_out = [wp * f_n[PLUS] + f_n[MINUS], wm * g_n[PLUS] - g_n[MINUS]];
    let b_in = [wp * f_prev[PLUS] + f_prev[MINUS], wm * g_prev[PLUS] - g_prev[MINUS]];
    let src_p = -corners.jp * b_out[0];
    let src_m = -corners.jm * b_out[1];
    let (rp, rm) = (h.row_plus(), h.row_minus());
    let a = (0..2 * n)
        .map(|i| h.green(i, rp, energy.e) * src_p + h.green(i, rm, energy.e) * src_m)
        .collect();
    Ok(MiddleCoefficients {
        a,
        boundary_inner: b_in,
        boundary_outer: b_out,
        amplitudes: *amplitudes,
    })
}

impl MiddleCoefficients {
    /// `ψ(x)`: the interior expansion plus both outer tails, the tails taken
    /// from the closed-form reference solutions.
    pub fn wavefunction(&self, refs: &ReferenceSolutions, x: f64) -> Result<Complex64> {
        let n = self.a.len() / 2;
        let params = &refs.params;
        let mut psi = Complex64::default();
        for parity in [Parity::Even, Parity::Odd] {
            let phi = crate::kinematics::basis_functions(parity, n, x, params);
            for (i, p) in phi.iter().enumerate() {
                psi += self.a[xi_index(parity, i, n)] * p;
            }
        }
        let (wp, wm) = (self.amplitudes.wp, self.amplitudes.wm);
        let i = Complex64::i();
        let se = refs.partial_sum(Parity::Even, Kind::Sine, n, x)? / params.a;
        let ce = refs.partial_sum(Parity::Even, Kind::Cosine, n, x)? / params.a;
        let so = refs.partial_sum(Parity::Odd, Kind::Sine, n, x)? / params.b;
        let co = refs.partial_sum(Parity::Odd, Kind::Cosine, n, x)? / params.b;
        psi += 0.5 * (wp * (se + i * ce) + (se - i * ce));
        psi += 0.5 * (wm * (co + i * so) - (co - i * so));
        Ok(psi)
    }
}

/// Truncation, basis scale and quadrature size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub n: usize,
    pub lambda: f64,
    /// Quadrature size; `None` picks `max(2N + 50, 4N)`.
    pub quadrature: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n: 50,
            lambda: 1.0,
            quadrature: None,
        }
    }
}

/// Which amplitude formula to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    /// Even formula when the potential samples as even, general otherwise.
    Auto,
    General,
    Even,
}

/// Result of evaluating one grid energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Energy requested.
    pub requested: f64,
    pub amplitudes: ScatteringAmplitudes,
    /// Set when the energy sat on an eigenvalue and was shifted.
    pub nudged: bool,
}

/// One potential, one `(N, λ)`: the Hamiltonian is decomposed once and
/// shared read-only across energies.
#[derive(Debug, Clone)]
pub struct JMatrixSolver {
    pub potential: PotentialSpec,
    pub config: SolverConfig,
    pub hamiltonian: FiniteHamiltonian,
}

impl JMatrixSolver {
    pub fn new(potential: PotentialSpec, config: SolverConfig) -> Result<Self> {
        if config.n < 1 {
            return Err(Error::Domain("truncation N must be at least 1".into()));
        }
        let params = BasisParams::new(config.lambda)?;
        let k = config
            .quadrature
            .unwrap_or_else(|| quadrature_size_for(&potential, config.n));
        let vmat = potential_elements(&potential, config.n, k, config.lambda)?;
        let hamiltonian = assemble_hamiltonian(&params, &vmat)?;
        Ok(Self {
            potential,
            config,
            hamiltonian,
        })
    }

    pub fn params(&self) -> &BasisParams {
        &self.hamiltonian.params
    }

    pub fn is_even(&self) -> bool {
        self.hamiltonian.even
    }

    /// Amplitudes at exactly `e` with the chosen formula.
    pub fn amplitudes_with(&self, e: f64, formula: Formula) -> Result<ScatteringAmplitudes> {
        let energy = EnergyPoint::new(e, self.params())?;
        let corners = green_corners(&self.hamiltonian, e)?;
        let chain = RatioChain::compute(self.params(), &energy, self.config.n)?;
        let even = match formula {
            Formula::Auto => self.is_even(),
            Formula::General => false,
            Formula::Even => true,
        };
        if even {
            amplitudes_even(&corners, &chain, self.config.n, e)
        } else {
            amplitudes_general(&corners, &chain, self.config.n, e)
        }
    }

    /// Amplitudes at `e`; an energy on an eigenvalue is moved up by ten pole
    /// guards (down if that also lands on one) and flagged.
    pub fn evaluate(&self, e: f64) -> Result<Evaluation> {
        match self.amplitudes_with(e, Formula::Auto) {
            Ok(amplitudes) => Ok(Evaluation {
                requested: e,
                amplitudes,
                nudged: false,
            }),
            Err(Error::Pole { .. }) => {
                let shift = 10.0 * self.hamiltonian.pole_guard();
                let retry = self
                    .amplitudes_with(e + shift, Formula::Auto)
                    .or_else(|_| self.amplitudes_with(e - shift, Formula::Auto))?;
                Ok(Evaluation {
                    requested: e,
                    amplitudes: retry,
                    nudged: true,
                })
            }
            Err(other) => Err(other),
        }
    }

    /// Evaluates every energy in parallel; output order follows the input.
    pub fn sweep(&self, energies: &[f64]) -> Vec<Result<Evaluation>> {
        energies.par_iter().map(|&e| self.evaluate(e)).collect()
    }

    /// Interior coefficients at `e` (no pole nudging).
    pub fn middle_coefficients(&self, e: f64) -> Result<MiddleCoefficients> {
        let energy = EnergyPoint::new(e, self.params())?;
        let corners = green_corners(&self.hamiltonian, e)?;
        let chain = RatioChain::compute(self.params(), &energy, self.config.n)?;
        let amps = if self.is_even() {
            amplitudes_even(&corners, &chain, self.config.n, e)?
        } else {
            amplitudes_general(&corners, &chain, self.config.n, e)?
        };
        middle_coefficients(&self.hamiltonian, &energy, &chain, &corners, &amps)
    }
}

/// `|T|²` on the `(N, λ)` grid with the widest stable λ-run per `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateauReport {
    /// Probe energies.
    pub energies: Vec<f64>,
    pub tolerance: f64,
    pub lambdas: Vec<f64>,
    /// One row per `N`: `(N, |T|² at each probe energy per λ, None where
    /// evaluation failed)`.
    pub table: Vec<(usize, Vec<Option<Vec<f64>>>)>,
    /// Per `N`, the widest run `[λ_lo, λ_hi]` whose `|T|²` spread, maximized
    /// over the probe energies, is below tolerance.
    pub plateaus: Vec<Option<Plateau>>,
    /// `(N, λ)` at the centre of the widest plateau.
    pub recommended: (usize, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub variation: f64,
    pub center: f64,
}

impl Plateau {
    pub fn width(&self) -> f64 {
        self.lambda_hi - self.lambda_lo
    }
}

fn widest_run(lambdas: &[f64], values: &[Option<Vec<f64>>], tol: f64) -> (Option<Plateau>, f64) {
    let mut best: Option<Plateau> = None;
    let mut best_pair = f64::INFINITY;
    for start in 0..values.len() {
        let Some(first) = &values[start] else { continue };
        let (mut lo, mut hi) = (first.clone(), first.clone());
        for end in start + 1..values.len() {
            let Some(v) = &values[end] else { break };
            let mut spread: f64 = 0.0;
            for j in 0..v.len() {
                lo[j] = lo[j].min(v[j]);
                hi[j] = hi[j].max(v[j]);
                spread = spread.max(hi[j] - lo[j]);
            }
            if end == start + 1 {
                best_pair = best_pair.min(spread);
            }
            if spread >= tol {
                break;
            }
            let p = Plateau {
                lambda_lo: lambdas[start],
                lambda_hi: lambdas[end],
                variation: spread,
                center: lambdas[(start + end) / 2],
            };
            if best.is_none_or(|b| p.width() > b.width()) {
                best = Some(p);
            }
        }
    }
    (best, best_pair)
}

/// Scans `|T|²(E)` over `N × λ` at one probe energy. Fails with `NoPlateau`
/// when no two adjacent λ values agree within `tolerance` for any `N`.
pub fn plateau_scan(
    potential: &PotentialSpec,
    energy: f64,
    ns: &[usize],
    lambdas: &[f64],
    tolerance: f64,
) -> Result<PlateauReport> {
    plateau_scan_energies(potential, &[energy], ns, lambdas, tolerance)
}

/// As [`plateau_scan`], requiring stability at every probe energy at once.
pub fn plateau_scan_energies(
    potential: &PotentialSpec,
    energies: &[f64],
    ns: &[usize],
    lambdas: &[f64],
    tolerance: f64,
) -> Result<PlateauReport> {
    if ns.is_empty() || lambdas.is_empty() || energies.is_empty() {
        return Err(Error::Domain(
            "plateau scan needs nonempty energy, N and λ grids".into(),
        ));
    }
    let cells: Vec<(usize, f64)> = ns.iter().flat_map(|&n| lambdas.iter().map(move |&l| (n, l))).collect();
    let values: Vec<Option<Vec<f64>>> = cells
        .par_iter()
        .map(|&(n, lambda)| {
            let cfg = SolverConfig {
                n,
                lambda,
                quadrature: None,
            };
            let solver = JMatrixSolver::new(potential.clone(), cfg).ok()?;
            energies
                .iter()
                .map(|&e| {
                    solver
                        .evaluate(e)
                        .ok()
                        .map(|ev| ev.amplitudes.t.norm_sqr())
                        .filter(|v| v.is_finite())
                })
                .collect()
        })
        .collect();
    let mut table = Vec::new();
    let mut plateaus = Vec::new();
    let mut best_pair = f64::INFINITY;
    let mut recommended: Option<(usize, Plateau)> = None;
    for (row, &n) in ns.iter().enumerate() {
        let vals = values[row * lambdas.len()..(row + 1) * lambdas.len()].to_vec();
        let (p, pair) = widest_run(lambdas, &vals, tolerance);
        best_pair = best_pair.min(pair);
        if let Some(p) = p {
            if recommended.is_none_or(|(_, b)| p.width() >= b.width()) {
                recommended = Some((n, p));
            }
        }
        table.push((n, vals));
        plateaus.push(p);
    }
    let Some((n, p)) = recommended else {
        return Err(Error::NoPlateau {
            tolerance,
            best_variation: best_pair,
        });
    };
    Ok(PlateauReport {
        energies: energies.to_vec(),
        tolerance,
        lambdas: lambdas.to_vec(),
        table,
        plateaus,
        recommended: (n, p.center),
    })
}
