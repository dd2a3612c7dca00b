//! Real-symmetric eigendecompositions.
//!
//! The tridiagonal path is an implicit-shift QL iteration that accumulates
//! eigenvectors; the dense path goes through `nalgebra`.

use crate::error::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 80;

/// Dense real symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    order: usize,
    entries: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            entries: vec![0.0; order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds from row-major data; fails if the data is not symmetric.
    pub fn from_row_major(order: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != order * order {
            return Err(Error::Domain(format!(
                "expected {} entries for order {order}, got {}",
                order * order,
                entries.len()
            )));
        }
        for i in 0..order {
            for j in 0..i {
                let (a, b) = (entries[i * order + j], entries[j * order + i]);
                if a != b {
                    return Err(Error::Domain(format!(
                        "entries ({i},{j}) and ({j},{i}) differ: {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self { order, entries })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.order + j] = value;
        self.entries[j * self.order + i] = value;
    }

    /// Adds to both `(i, j)` and `(j, i)` (once on the diagonal).
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.order + j] += value;
        if i != j {
            self.entries[j * self.order + i] += value;
        }
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.entries
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `M v`
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.order)
            .map(|i| {
                self.entries[i * self.order..(i + 1) * self.order]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvectors.
///
/// `vector(k)` pairs with `values[k]`; storage is row-major with
/// `vectors[i * n + k]` the i-th component of the k-th eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub values: Vec<f64>,
    vectors: Vec<f64>,
    order: usize,
}

impl SpectralDecomposition {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Component `i` of eigenvector `k`.
    pub fn component(&self, i: usize, k: usize) -> f64 {
        self.vectors[i * self.order + k]
    }

    /// Row `i` of the eigenvector matrix: component `i` of every eigenvector.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.order..(i + 1) * self.order]
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.order).map(|i| self.component(i, k)).collect()
    }

    fn sorted(values: Vec<f64>, vectors: Vec<f64>, order: usize) -> Self {
        let mut idx: Vec<usize> = (0..order).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut v = vec![0.0; order * order];
        for i in 0..order {
            for (new_k, &old_k) in idx.iter().enumerate() {
                v[i * order + new_k] = vectors[i * order + old_k];
            }
        }
        Self {
            values: idx.iter().map(|&k| values[k]).collect(),
            vectors: v,
            order,
        }
    }
}

/// Full decomposition of a dense symmetric matrix.
pub fn eig_symmetric(m: &SymmetricMatrix) -> Result<SpectralDecomposition> {
    let n = m.order();
    if n == 0 {
        return Ok(SpectralDecomposition {
            values: vec![],
            vectors: vec![],
            order: 0,
        });
    }
    if m.as_row_major().iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let dm = nalgebra::DMatrix::from_row_slice(n, n, m.as_row_major());
    let eig = nalgebra::SymmetricEigen::try_new(dm, 1e-15 * m.max_abs().max(f64::MIN_POSITIVE), 0)
        .ok_or_else(|| Error::Convergence("dense symmetric eigensolver".into()))?;
    let mut vectors = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            vectors[i * n + k] = eig.eigenvectors[(i, k)];
        }
    }
    Ok(SpectralDecomposition::sorted(
        eig.eigenvalues.iter().copied().collect(),
        vectors,
        n,
    ))
}

/// Full decomposition of the symmetric tridiagonal matrix with diagonal
/// `diag` and super-diagonal `offdiag` (`offdiag.len() + 1 == diag.len()`).
pub fn eig_symmetric_tridiagonal(diag: &[f64], offdiag: &[f64]) -> Result<SpectralDecomposition> {
    let n = diag.len();
    if n == 0 {
        return Ok(SpectralDecomposition {
            values: vec![],
            vectors: vec![],
            order: 0,
        });
    }
    if offdiag.len() + 1 != n {
        return Err(Error::Domain(format!(
            "off-diagonal length {} does not match order {n}",
            offdiag.len()
        )));
    }
    if diag.iter().chain(offdiag).any(|v| !v.is_finite()) {
        return Err(Error::Domain("tridiagonal matrix has non-finite entries".into()));
    }
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql_implicit(&mut d, &mut e, Some(&mut z), n)?;
    Ok(SpectralDecomposition::sorted(d, z, n))
}

/// Eigenvalues only, ascending. Quadratic in the order.
pub fn eigenvalues_symmetric_tridiagonal(diag: &[f64], offdiag: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(vec![]);
    }
    if offdiag.len() + 1 != n {
        return Err(Error::Domain(format!(
            "off-diagonal length {} does not match order {n}",
            offdiag.len()
        )));
    }
    if diag.iter().chain(offdiag).any(|v| !v.is_finite()) {
        return Err(Error::Domain("tridiagonal matrix has non-finite entries".into()));
    }
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    tql_implicit(&mut d, &mut e, None, n)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix, accumulating the
/// rotations into `z` (row-major, columns are eigenvectors) when given.
fn tql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>, n: usize) -> Result<()> {
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS_PER_EIGENVALUE {
                return Err(Error::Convergence(format!("QL iteration stalled at eigenvalue {l}")));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let zk1 = z[k * n + i + 1];
                        let zk = z[k * n + i];
                        z[k * n + i + 1] = s * zk + c * zk1;
                        z[k * n + i] = c * zk - s * zk1;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
