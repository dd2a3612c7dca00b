//! Potential catalog, tabulated and user-expression potentials, and the
//! closed-form amplitudes used as references.

pub mod expr;

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special_fn::ln_gamma_complex;
use expr::{parse_expression, Expr};

/// A real potential of finite (or effectively finite) range.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// V ≡ 0.
    Zero,
    /// `-(η²/2) ν(ν-1) / cosh²(ηx)`
    PoschlTeller { eta: f64, nu: f64 },
    /// `V0` on `[offset, offset + width]`, zero elsewhere.
    SquareBarrier { v0: f64, width: f64, offset: f64 },
    /// `V0 sin²(πx/a)` on `|x| ≤ a`, zero elsewhere.
    DoubleBarrier { v0: f64, a: f64 },
    /// Linear interpolation of ascending samples, zero outside the table.
    Tabulated { xs: Vec<f64>, vs: Vec<f64> },
    /// User expression, zero for `|x| > cutoff`.
    Expression { source: String, expr: Expr, cutoff: f64 },
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg()))
    }
}

impl PotentialSpec {
    pub fn poschl_teller(eta: f64, nu: f64) -> Result<Self> {
        require(eta > 0.0 && eta.is_finite(), || {
            format!("η must be positive, got {eta}")
        })?;
        require(nu.is_finite(), || format!("ν must be finite, got {nu}"))?;
        Ok(Self::PoschlTeller { eta, nu })
    }

    /// Barrier on `[0, width]`, the placement without definite parity.
    pub fn square_barrier(v0: f64, width: f64) -> Result<Self> {
        Self::square_barrier_at(v0, width, 0.0)
    }

    pub fn square_barrier_at(v0: f64, width: f64, offset: f64) -> Result<Self> {
        require(v0.is_finite(), || format!("V0 must be finite, got {v0}"))?;
        require(width > 0.0 && width.is_finite(), || {
            format!("width must be positive, got {width}")
        })?;
        require(offset.is_finite(), || format!("offset must be finite, got {offset}"))?;
        Ok(Self::SquareBarrier { v0, width, offset })
    }

    pub fn double_barrier(v0: f64, a: f64) -> Result<Self> {
        require(v0.is_finite(), || format!("V0 must be finite, got {v0}"))?;
        require(a > 0.0 && a.is_finite(), || {
            format!("half-width must be positive, got {a}")
        })?;
        Ok(Self::DoubleBarrier { v0, a })
    }

    pub fn tabulated(xs: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        require(xs.len() == vs.len(), || "table columns differ in length".into())?;
        require(xs.len() >= 2, || "table needs at least two samples".into())?;
        require(xs.iter().chain(&vs).all(|v| v.is_finite()), || {
            "table has non-finite entries".into()
        })?;
        require(xs.windows(2).all(|w| w[0] < w[1]), || {
            "table x values must be strictly ascending".into()
        })?;
        Ok(Self::Tabulated { xs, vs })
    }

    /// Parses the plain-text table format: one `x value` pair per line,
    /// whitespace separated, `#` starts a comment.
    pub fn tabulated_from_text(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Domain(format!("line {}: '{s}' is not a number", lineno + 1)))
            };
            if fields.len() != 2 {
                return Err(Error::Domain(format!(
                    "line {}: expected 2 fields, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            xs.push(parse(fields[0])?);
            vs.push(parse(fields[1])?);
        }
        Self::tabulated(xs, vs)
    }

    pub fn tabulated_from_path(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Domain(format!("cannot read {}: {e}", path.display())))?;
        Self::tabulated_from_text(&text)
    }

    pub fn expression(source: &str, cutoff: f64) -> Result<Self> {
        require(cutoff > 0.0 && cutoff.is_finite(), || {
            format!("cutoff must be positive, got {cutoff}")
        })?;
        let expr = parse_expression(source)?;
        Ok(Self::Expression {
            source: source.to_string(),
            expr,
            cutoff,
        })
    }

    /// Short name used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::PoschlTeller { .. } => "poschl-teller",
            Self::SquareBarrier { .. } => "square-barrier",
            Self::DoubleBarrier { .. } => "double-barrier",
            Self::Tabulated { .. } => "tabulated",
            Self::Expression { .. } => "expression",
        }
    }

    /// `V(x)`.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        Ok(match self {
            Self::Zero => 0.0,
            Self::PoschlTeller { eta, nu } => {
                let c = (eta * x).cosh();
                -0.5 * eta * eta * nu * (nu - 1.0) / (c * c)
            }
            Self::SquareBarrier { v0, width, offset } => {
                if x >= *offset && x <= offset + width {
                    *v0
                } else {
                    0.0
                }
            }
            Self::DoubleBarrier { v0, a } => {
                if x.abs() <= *a {
                    let s = (PI * x / a).sin();
                    v0 * s * s
                } else {
                    0.0
                }
            }
            Self::Tabulated { xs, vs } => {
                let n = xs.len();
                if x < xs[0] || x > xs[n - 1] {
                    0.0
                } else {
                    let j = xs.partition_point(|&t| t <= x).clamp(1, n - 1);
                    let t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
                    vs[j - 1] + t * (vs[j] - vs[j - 1])
                }
            }
            Self::Expression { expr, cutoff, .. } => {
                if x.abs() > *cutoff {
                    0.0
                } else {
                    let v = expr.eval(x);
                    if !v.is_finite() {
                        return Err(Error::PotentialEval {
                            x,
                            reason: format!("expression evaluates to {v}"),
                        });
                    }
                    v
                }
            }
        })
    }

    /// Interval outside of which the potential vanishes (effectively, for
    /// the Pöschl-Teller well: `|V| < 1e-12 |V(0)|`).
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Zero => (0.0, 0.0),
            Self::PoschlTeller { eta, .. } => {
                // cosh²(ηX) = 1e12
                let x = 1e6f64.acosh() / eta;
                (-x, x)
            }
            Self::SquareBarrier { width, offset, .. } => (*offset, offset + width),
            Self::DoubleBarrier { a, .. } => (-a, *a),
            Self::Tabulated { xs, .. } => (xs[0], xs[xs.len() - 1]),
            Self::Expression { cutoff, .. } => (-cutoff, *cutoff),
        }
    }

    /// Whether `V` vanishes exactly outside [`support`](Self::support).
    pub fn is_compact(&self) -> bool {
        !matches!(self, Self::PoschlTeller { .. })
    }

    /// Range `X` with `V(x) = 0` for `|x| > X`.
    pub fn cutoff(&self) -> f64 {
        let (lo, hi) = self.support();
        lo.abs().max(hi.abs())
    }

    /// Points where V or its low derivatives jump; transfer-matrix grids
    /// place segment boundaries here.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Zero | Self::PoschlTeller { .. } => vec![],
            Self::SquareBarrier { width, offset, .. } => vec![*offset, offset + width],
            Self::DoubleBarrier { a, .. } => vec![-a, 0.0, *a],
            Self::Tabulated { xs, .. } => xs.clone(),
            Self::Expression { cutoff, .. } => vec![-cutoff, *cutoff],
        }
    }

    /// Whether V jumps somewhere, which node sampling resolves only slowly.
    /// Edge values below `1e-12` in magnitude count as continuous.
    pub fn has_jumps(&self) -> bool {
        let jump = |v: f64| v.abs() > 1e-12;
        match self {
            Self::Zero | Self::PoschlTeller { .. } | Self::DoubleBarrier { .. } => false,
            Self::SquareBarrier { v0, .. } => jump(*v0),
            Self::Tabulated { vs, .. } => jump(vs[0]) || jump(vs[vs.len() - 1]),
            Self::Expression { expr, cutoff, .. } => jump(expr.eval(*cutoff)) || jump(expr.eval(-cutoff)),
        }
    }

    /// Smallest distance between consecutive breakpoints, if any.
    pub fn feature_width(&self) -> Option<f64> {
        let b = self.breakpoints();
        b.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).reduce(f64::min)
    }
}

/// Reflection and transmission amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactAmplitudes {
    pub t: Complex64,
    pub r: Complex64,
}

/// Closed-form amplitudes of the Pöschl-Teller well at energy `e`.
///
/// `T = (e^{2iθ₊} - e^{2iθ₋})/2`, `R = (e^{2iθ₊} + e^{2iθ₋})/2` with
/// `θ₊ = arg[Γ(z) 2^{-z} / (Γ(z/2 + ν/2) Γ(z/2 + (1-ν)/2))]`,
/// `θ₋ = arg[Γ(z) 2^{-z} / (Γ(z/2 + (1+ν)/2) Γ(z/2 + (2-ν)/2))]`, `z = ik/η`.
pub fn exact_poschl_teller(eta: f64, nu: f64, e: f64) -> Result<ExactAmplitudes> {
    require(e > 0.0 && e.is_finite(), || format!("energy must be positive, got {e}"))?;
    require(eta > 0.0, || format!("η must be positive, got {eta}"))?;
    let k = (2.0 * e).sqrt();
    let z = Complex64::new(0.0, k / eta);
    let lg = |w: Complex64| ln_gamma_complex(w);
    let common = lg(z) - z * 2f64.ln();
    let half = Complex64::new(0.5, 0.0);
    let theta_p = (common - lg(z * half + nu / 2.0) - lg(z * half + (1.0 - nu) / 2.0)).im;
    let theta_m = (common - lg(z * half + (1.0 + nu) / 2.0) - lg(z * half + (2.0 - nu) / 2.0)).im;
    let wp = Complex64::from_polar(1.0, 2.0 * theta_p);
    let wm = -Complex64::from_polar(1.0, 2.0 * theta_m);
    Ok(ExactAmplitudes {
        t: 0.5 * (wp + wm),
        r: 0.5 * (wp - wm),
    })
}

/// `|T|²` of the Pöschl-Teller well, `1/(1 + p⁻²)` with `p = sinh(πk/η)/sin(νπ)`.
pub fn poschl_teller_transmission(eta: f64, nu: f64, e: f64) -> f64 {
    let k = (2.0 * e).sqrt();
    let s = (nu * PI).sin();
    let sh = (PI * k / eta).sinh();
    // 1/(1 + s²/sh²), written to stay finite for integer ν and large k
    sh * sh / (sh * sh + s * s)
}

/// `(|T|², |R|²)` for a rectangular barrier of height `v0` and width `width`.
pub fn exact_square_barrier(v0: f64, width: f64, e: f64) -> Result<(f64, f64)> {
    require(e > 0.0 && e.is_finite(), || format!("energy must be positive, got {e}"))?;
    let k = (2.0 * e).sqrt();
    let d = e - v0;
    let q = if d == 0.0 {
        v0 * width / k
    } else {
        let kh = (2.0 * d.abs()).sqrt();
        let s = if d < 0.0 {
            (kh * width).sinh()
        } else {
            (kh * width).sin()
        };
        v0 * s / (k * kh)
    };
    let q2 = q * q;
    if !q2.is_finite() {
        return Ok((0.0, 1.0));
    }
    Ok((1.0 / (1.0 + q2), q2 / (1.0 + q2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn catalog_values() {
        let db = PotentialSpec::double_barrier(5.0, 1.0).unwrap();
        assert!(db.evaluate(1.0).unwrap().abs() < 1e-14);
        assert!(db.evaluate(-1.0).unwrap().abs() < 1e-14);
        assert_relative_eq!(db.evaluate(0.5).unwrap(), 5.0, epsilon = 1e-14);
        assert_relative_eq!(db.evaluate(-0.5).unwrap(), 5.0, epsilon = 1e-14);
        assert_eq!(db.evaluate(1.2).unwrap(), 0.0);

        let sq = PotentialSpec::square_barrier(2.0, 3.5).unwrap();
        assert_eq!(sq.evaluate(-0.1).unwrap(), 0.0);
        assert_eq!(sq.evaluate(0.0).unwrap(), 2.0);
        assert_eq!(sq.evaluate(3.5).unwrap(), 2.0);
        assert_eq!(sq.evaluate(3.6).unwrap(), 0.0);

        let pt = PotentialSpec::poschl_teller(2.0, 2.5).unwrap();
        assert_relative_eq!(pt.evaluate(0.0).unwrap(), -4.0 * 2.5 * 1.5 / 2.0, epsilon = 1e-14);
        let (_, hi) = pt.support();
        assert_relative_eq!(pt.evaluate(hi).unwrap().abs(), 1e-12 * 7.5, max_relative = 1e-6);
    }

    #[test]
    fn constructors_validate() {
        assert!(PotentialSpec::poschl_teller(0.0, 1.0).is_err());
        assert!(PotentialSpec::square_barrier(1.0, -1.0).is_err());
        assert!(PotentialSpec::double_barrier(1.0, 0.0).is_err());
        assert!(PotentialSpec::tabulated(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(PotentialSpec::expression("x+", 1.0).is_err());
        assert!(PotentialSpec::expression("x", 0.0).is_err());
    }

    #[test]
    fn tabulated_interpolates_and_parses() {
        let t = PotentialSpec::tabulated_from_text("# header\n-1 0\n0 2 # peak\n\n1 0\n").unwrap();
        assert_eq!(t.evaluate(-0.5).unwrap(), 1.0);
        assert_eq!(t.evaluate(0.0).unwrap(), 2.0);
        assert_eq!(t.evaluate(0.25).unwrap(), 1.5);
        assert_eq!(t.evaluate(1.0).unwrap(), 0.0);
        assert_eq!(t.evaluate(2.0).unwrap(), 0.0);
        assert!(PotentialSpec::tabulated_from_text("0 1 2\n").is_err());
        assert!(PotentialSpec::tabulated_from_text("0 a\n1 2\n").is_err());
    }

    #[test]
    fn expression_potential() {
        let e = PotentialSpec::expression("5*sin(3.141592653589793*x/1.0)^2", 1.0).unwrap();
        let db = PotentialSpec::double_barrier(5.0, 1.0).unwrap();
        for x in [-1.5, -0.7, -0.1, 0.0, 0.33, 0.9, 2.0] {
            assert!((e.evaluate(x).unwrap() - db.evaluate(x).unwrap()).abs() < 1e-13);
        }
        let bad = PotentialSpec::expression("1/x", 1.0).unwrap();
        assert!(matches!(bad.evaluate(0.0), Err(Error::PotentialEval { .. })));
    }

    #[test]
    fn poschl_teller_moduli_match_closed_form() {
        for nu in [1.5, 2.5, 0.5, 2.0, 3.3] {
            for i in 0..60 {
                let e = 0.05 + i as f64 * (10.0 - 0.05) / 59.0;
                let a = exact_poschl_teller(2.0, nu, e).unwrap();
                let t2 = poschl_teller_transmission(2.0, nu, e);
                assert!((a.t.norm_sqr() - t2).abs() < 1e-12, "ν={nu} E={e}");
                assert!((a.t.norm_sqr() + a.r.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }
        // ν = 5/2: tanh²(πk/η)
        let e = 0.8f64;
        let k = (2.0 * e).sqrt();
        assert_relative_eq!(
            poschl_teller_transmission(2.0, 2.5, e),
            (PI * k / 2.0).tanh().powi(2),
            max_relative = 1e-13
        );
        assert!((poschl_teller_transmission(2.0, 2.0, 0.3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn square_barrier_closed_form() {
        let (v0, l) = (2.0, 3.5);
        // resonance k̂L = π
        let e = v0 + (PI / l).powi(2) / 2.0;
        assert!((exact_square_barrier(v0, l, e).unwrap().0 - 1.0).abs() < 1e-14);
        assert!(exact_square_barrier(v0, l, 1e-10).unwrap().0 < 1e-6);
        let at = exact_square_barrier(v0, l, v0).unwrap().0;
        let below = exact_square_barrier(v0, l, v0 - 1e-9).unwrap().0;
        let above = exact_square_barrier(v0, l, v0 + 1e-9).unwrap().0;
        assert!((at - below).abs() < 1e-9 && (at - above).abs() < 1e-9);
        let (t2, r2) = exact_square_barrier(v0, l, 1.0).unwrap();
        assert!((t2 + r2 - 1.0).abs() < 1e-15);
    }
}
