//! Numeric policy shared by every module.

/// Structural equalities (unitarity, idempotence, reconstruction).
pub const STRUCTURAL: f64 = 1e-10;
/// Statistical / accumulated-round-off comparisons.
pub const STATISTICAL: f64 = 1e-9;
/// Eigenvalues above `-PSD_CLAMP` are rounded to zero.
pub const PSD_CLAMP: f64 = 1e-12;
/// Eigenvalues below `-PSD_REJECT` mark an input as not positive semidefinite.
pub const PSD_REJECT: f64 = 1e-9;
/// Probabilities below this are treated as zero.
pub const DEGENERATE: f64 = 1e-14;
/// Largest polynomial degree any factory will produce.
pub const DEGREE_CAP: usize = 2001;
/// Number of Chebyshev points used for every grid check.
pub const GRID_POINTS: usize = 4096;
/// Full-operator dimension envelope (circuit tier).
pub const MAX_OPERATOR_DIM: usize = 1 << 12;
/// Vector / isometry row envelope (spectrum tier).
pub const MAX_VECTOR_DIM: usize = 1 << 16;
