//! Gauss quadrature from Jacobi matrices, potential matrix elements in the
//! Hermite basis, and the interleaved single-index ordering of both parity
//! channels.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinematics::Parity;
use crate::linalg::{eig_symmetric_tridiagonal, eigenvalues_symmetric_tridiagonal, SymmetricMatrix};
use crate::potentials::PotentialSpec;
use crate::special_fn::hermite_functions;

/// Nodes `ω_k` and eigenvectors `Ω_{nk}` of the `K × K` Jacobi matrix of the
/// normalized Hermite polynomials. `Ω_{0k}²` are the Gauss weights of
/// `e^{-y²}/√π`. Only the leading rows of `Ω` may be stored.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    rows: usize,
    /// Row-major `rows × K`.
    omega: Vec<f64>,
}

impl QuadratureRule {
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// Number of stored rows of `Ω`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `Ω_{nk}`.
    pub fn omega(&self, n: usize, k: usize) -> f64 {
        self.omega_row(n)[k]
    }

    /// Row `n` of `Ω`.
    pub fn omega_row(&self, n: usize) -> &[f64] {
        let k = self.size();
        &self.omega[n * k..(n + 1) * k]
    }
}

/// `K`-point rule; the Jacobi matrix has zero diagonal and off-diagonal
/// `√((n+1)/2)`.
pub fn gauss_hermite_rule(k: usize) -> Result<QuadratureRule> {
    gauss_hermite_rows(k, k)
}

/// `K`-point rule keeping only rows `0..rows` of `Ω`.
///
/// Column `k` of `Ω` is the eigenvector for `ω_k`, whose entries are the
/// Hermite functions at `ω_k` up to normalization, so only the nodes need an
/// eigensolve. The first component is taken positive.
pub fn gauss_hermite_rows(k: usize, rows: usize) -> Result<QuadratureRule> {
    if k == 0 {
        return Err(Error::Domain("quadrature size must be at least 1".into()));
    }
    let rows = rows.min(k);
    let off: Vec<f64> = (1..k).map(|n| (n as f64 / 2.0).sqrt()).collect();
    let nodes = eigenvalues_symmetric_tridiagonal(&vec![0.0; k], &off)?;
    let columns: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|&w| {
            let h = hermite_functions(k - 1, w);
            let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
            h[..rows].iter().map(|v| v / norm).collect()
        })
        .collect();
    let mut omega = vec![0.0; rows * k];
    for (q, col) in columns.iter().enumerate() {
        for (n, v) in col.iter().enumerate() {
            omega[n * k + q] = *v;
        }
    }
    Ok(QuadratureRule { nodes, rows, omega })
}

/// Rules are independent of λ and the potential, so scans over λ share them.
fn cached_rule(k: usize, rows: usize) -> Result<Arc<QuadratureRule>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&(k, rows)) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(gauss_hermite_rows(k, rows)?);
    cache
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert((k, rows), Arc::clone(&rule));
    Ok(rule)
}

/// `(node, weight)` pairs of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Err(Error::Domain("quadrature size must be at least 1".into()));
    }
    let off: Vec<f64> = (1..n)
        .map(|j| {
            let j = j as f64;
            j / (4.0 * j * j - 1.0).sqrt()
        })
        .collect();
    let dec = eig_symmetric_tridiagonal(&vec![0.0; n], &off)?;
    Ok((0..n)
        .map(|k| {
            let v = dec.component(0, k);
            (dec.values[k], 2.0 * v * v)
        })
        .collect())
}

/// Default quadrature size for truncation `n`: `max(2n + 50, 4n)`.
pub fn default_quadrature_size(n: usize) -> usize {
    (2 * n + 50).max(4 * n)
}

/// Quadrature size for `potential` at truncation `n`: the default for
/// continuous potentials, `16n` when V jumps, since the sampling error of a
/// step falls off only with the node spacing.
pub fn quadrature_size_for(potential: &PotentialSpec, n: usize) -> usize {
    let base = default_quadrature_size(n);
    if potential.has_jumps() {
        base.max(16 * n)
    } else {
        base
    }
}

/// `(parity, channel index)` of `ξ_m`, `-N ≤ m ≤ N - 1`: `m ≥ 0` is the even
/// function `m`, `m < 0` the odd function `-m - 1`.
pub fn xi_map(m: i64, n: usize) -> Result<(Parity, usize)> {
    let n_i = n as i64;
    if m < -n_i || m >= n_i {
        return Err(Error::Index {
            index: m,
            lo: -n_i,
            hi: n_i - 1,
        });
    }
    Ok(if m >= 0 {
        (Parity::Even, m as usize)
    } else {
        (Parity::Odd, (-m - 1) as usize)
    })
}

/// Storage index `m + N` of channel function `(parity, index)`.
pub fn xi_index(parity: Parity, index: usize, n: usize) -> usize {
    match parity {
        Parity::Even => n + index,
        Parity::Odd => n - index - 1,
    }
}

/// Potential matrix elements for truncation `N`.
#[derive(Debug, Clone)]
pub struct PotentialMatrix {
    pub n: usize,
    /// `⟨φ_i⁺|V⁺|φ_j⁺⟩`, row-major `N × N`.
    pub vpp: Vec<f64>,
    /// `⟨φ_i⁻|V⁺|φ_j⁻⟩`.
    pub vmm: Vec<f64>,
    /// `⟨φ_i⁺|V⁻|φ_j⁻⟩`.
    pub vpm: Vec<f64>,
    /// All blocks in the interleaved `2N × 2N` ordering.
    pub interleaved: SymmetricMatrix,
    /// Whether the sampled potential is even to `1e-12` of its scale.
    pub even: bool,
}

impl PotentialMatrix {
    /// `⟨φ_i⁻|V⁻|φ_j⁺⟩`, the transpose of `vpm`.
    pub fn vmp(&self) -> Vec<f64> {
        let n = self.n;
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                t[j * n + i] = self.vpm[i * n + j];
            }
        }
        t
    }
}

/// Elements `Σ_k Ω_{ik} Ω_{jk} V^±(ω_k/λ)` with `V^± = [V(x) ± V(-x)]/2`.
pub fn potential_elements(v: &PotentialSpec, n: usize, k: usize, lambda: f64) -> Result<PotentialMatrix> {
    if n == 0 {
        return Err(Error::Domain("truncation N must be at least 1".into()));
    }
    if k <= 2 * n {
        return Err(Error::Domain(format!("quadrature size {k} must exceed 2N = {}", 2 * n)));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("λ must be positive, got {lambda}")));
    }
    let rule = cached_rule(k, 2 * n)?;
    potential_elements_with_rule(v, n, &rule, lambda)
}

/// As [`potential_elements`] with a prebuilt rule.
pub fn potential_elements_with_rule(
    v: &PotentialSpec,
    n: usize,
    rule: &QuadratureRule,
    lambda: f64,
) -> Result<PotentialMatrix> {
    let k = rule.size();
    if k <= 2 * n || rule.rows() < 2 * n {
        return Err(Error::Domain(format!(
            "rule with {k} nodes and {} rows cannot resolve 2N = {}",
            rule.rows(),
            2 * n
        )));
    }
    let samples: Vec<(f64, f64)> = rule
        .nodes()
        .par_iter()
        .map(|&w| {
            let x = w / lambda;
            Ok((v.evaluate(x)?, v.evaluate(-x)?))
        })
        .collect::<Result<_>>()?;
    let scale = samples.iter().fold(0.0f64, |m, (a, b)| m.max(a.abs()).max(b.abs()));
    let asym = samples.iter().fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let even = asym <= 1e-12 * scale.max(f64::MIN_POSITIVE);
    let v_even: Vec<f64> = samples.iter().map(|(a, b)| 0.5 * (a + b)).collect();
    let v_odd: Vec<f64> = samples.iter().map(|(a, b)| 0.5 * (a - b)).collect();

    // Hermite degree of channel index i is 2i + shift
    let block = |shift_i: usize, shift_j: usize, weight: &[f64], sym: bool| {
        let mut out = vec![0.0; n * n];
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let oi = rule.omega_row(2 * i + shift_i);
                let lo = if sym { i } else { 0 };
                let mut row = vec![0.0; n];
                for (j, slot) in row.iter_mut().enumerate().skip(lo) {
                    let oj = rule.omega_row(2 * j + shift_j);
                    let mut s = 0.0;
                    for q in 0..k {
                        s += oi[q] * oj[q] * weight[q];
                    }
                    *slot = s;
                }
                row
            })
            .collect();
        for (i, row) in rows.into_iter().enumerate() {
            for j in 0..n {
                if !sym || j >= i {
                    out[i * n + j] = row[j];
                    if sym {
                        out[j * n + i] = row[j];
                    }
                }
            }
        }
        out
    };
    let vpp = block(0, 0, &v_even, true);
    let vmm = block(1, 1, &v_even, true);
    let vpm = if even {
        vec![0.0; n * n]
    } else {
        block(0, 1, &v_odd, false)
    };

    let mut interleaved = SymmetricMatrix::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            let (pi, pj) = (xi_index(Parity::Even, i, n), xi_index(Parity::Even, j, n));
            interleaved.set(pi, pj, vpp[i * n + j]);
            let (mi, mj) = (xi_index(Parity::Odd, i, n), xi_index(Parity::Odd, j, n));
            interleaved.set(mi, mj, vmm[i * n + j]);
            interleaved.set(pi, mj, vpm[i * n + j]);
        }
    }
    Ok(PotentialMatrix {
        n,
        vpp,
        vmm,
        vpm,
        interleaved,
        even,
    })
}
