//! Numerical tolerances shared by every module.

/// Probability mass conservation.
pub const MASS: f64 = 1e-12;

/// Slack on the favourable side of every checked inequality.
pub const INEQUALITY: f64 = 1e-9;

/// Unitarity of generator matrices and relator evaluation.
pub const UNITARY: f64 = 1e-10;

/// Self-adjointness of Markov operators.
pub const HERMITIAN: f64 = 1e-10;

/// Eigenvalues closer than this are merged into one spectral atom; also the
/// distance from 1 below which an eigenvalue counts as 1.
pub const EIGEN_CLUSTER: f64 = 1e-8;

/// Jacobi stopping criterion on the off-diagonal Frobenius norm.
pub const JACOBI_OFF_DIAGONAL: f64 = 1e-12;

/// Relator consistency of cocycles and harmonicity of projected cocycles.
pub const COCYCLE: f64 = 1e-9;

/// Direct and spectral Cesaro norms must agree to this (relative to
/// `max(1, |zeta|)`) or the computation is reported as inconsistent.
pub const CESARO_HARD: f64 = 1e-6;

/// Rank threshold on Gram-matrix eigenvalues.
pub const RANK: f64 = 1e-8;
