//! J-matrix scattering in one dimension.
//!
//! The free Hamiltonian is represented exactly as a tridiagonal operator in a
//! parity-split Hermite basis; a finite-range potential is truncated to a
//! `2N × 2N` block whose spectral Green's function is matched to the analytic
//! outer recursions. The result is the transmission and reflection amplitude
//! at every energy from a single eigendecomposition.
//!
//! ```
//! use jmatrix::{JMatrixSolver, PotentialSpec, SolverConfig};
//!
//! let well = PotentialSpec::poschl_teller(2.0, 2.0).unwrap();
//! let solver = JMatrixSolver::new(well, SolverConfig { n: 40, lambda: 2.0, quadrature: None }).unwrap();
//! let amps = solver.evaluate(1.0).unwrap().amplitudes;
//! assert!((amps.t.norm_sqr() - 1.0).abs() < 1e-3);
//! ```

pub mod error;
pub mod kinematics;
pub mod linalg;
pub mod oracle;
pub mod potentials;
pub mod quadrature;
pub mod ratios;
pub mod scattering;
pub mod special_fn;

pub use error::{Error, Result};

/// Library version, echoed in output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use kinematics::{BasisParams, EnergyPoint, Parity};
pub use oracle::{solve_rt, OracleResult, OracleSettings};
pub use potentials::PotentialSpec;
pub use scattering::{
    plateau_scan, plateau_scan_energies, Evaluation, Formula, JMatrixSolver, PlateauReport, ScatteringAmplitudes,
    SolverConfig,
};
