//! Low-energy Trotter simulation toolkit for k-local spin Hamiltonians.
//!
//! The library is organized around one question: when a product formula
//! `W_p(s) = ∏_j exp(-i c_j s H_{l_j})` approximates `exp(-i s H)` for a
//! Hamiltonian `H = Σ_l H_l` split into layers of commuting k-local terms,
//! how much better does it do on the low-energy subspace `Π_{≤Δ} ℋ` than on
//! the whole space — and can the improvement be certified against closed-form
//! leakage and error bounds?
//!
//! Modules, bottom up:
//!
//! - [`linalg`]: dense Hermitian eigendecomposition, matrix exponentials
//!   `exp(-i s A)`, spectral norms, and checked complex matrix algebra.
//! - [`hamiltonian`]: Pauli term tables, greedy coloring into commuting
//!   layers, positivity shifts, structural parameters `(N, k, d, J, M, L)`,
//!   dense assembly, and a small model gallery.
//! - [`spectral`]: energy projectors `Π_{≤Λ}`, effective (band-truncated)
//!   operators `X̄ = Π_{≤Δ'} X Π_{≤Δ'}`, and seeded low-energy state sampling.
//! - [`formulas`]: Trotter–Suzuki schedules of order p, the four evolution
//!   variants (exact layers, effective layers, projector ladders), and ladder
//!   construction.
//! - [`bounds`]: closed-form leakage/error bounds, the effective cutoff
//!   `Δ'(s)`, and Trotter-number planning with self-certification.
//! - [`lab`]: measurement drivers that pit every bound against exact
//!   diagonalization, order-scaling fits, sweeps with CSV/JSON artifacts,
//!   and planner comparison tables.
//! - [`cli`]: the `lowtrot` command-line front end.
//!
//! All energies are in the shifted convention (`H_l ≥ 0` after
//! [`hamiltonian::shift_positive`]), all randomness is seeded ChaCha, and all
//! sweep artifacts are byte-deterministic for a fixed configuration.

pub mod bounds;
pub mod cli;
pub mod formulas;
pub mod hamiltonian;
pub mod lab;
pub mod linalg;
pub mod spectral;

use thiserror::Error;

/// Default numerical tolerances. Constructors that validate invariants use
/// these unless a caller supplies its own figure.
pub mod tol {
    /// Max entrywise deviation `‖A - A†‖_max` accepted as Hermitian.
    pub const HERMITICITY: f64 = 1e-12;
    /// Frobenius-norm deviation `‖U†U - I‖_F` accepted as unitary, per unit
    /// dimension (scaled by `dim`). Frobenius dominates the spectral norm,
    /// so this is stricter than the nominal spectral-norm contract.
    pub const UNITARITY_PER_DIM: f64 = 1e-10;
    /// Eigendecomposition reconstruction residual per unit dimension and
    /// unit norm: `‖A - VΛV†‖ ≤ RECONSTRUCTION_PER_DIM · dim · ‖A‖`.
    pub const RECONSTRUCTION_PER_DIM: f64 = 1e-9;
    /// Degenerate-eigenvalue tie-breaking width for projector thresholds.
    pub const TIE: f64 = 1e-9;
    /// Slack added to bound comparisons: `measured ≤ bound + BOUND_SLACK_PER_DIM · dim`.
    pub const BOUND_SLACK_PER_DIM: f64 = 1e-9;
    /// First-order consistency: layer coefficients of a schedule sum to 1.
    pub const SCHEDULE_CONSISTENCY: f64 = 1e-12;
}

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },

    #[error("dimension {dim} is not a power of two")]
    NotPowerOfTwo { dim: usize },

    #[error("matrix is not Hermitian: max|A - A†| = {deviation:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix is not unitary: ‖U†U - I‖_F = {deviation:.3e} exceeds {tolerance:.3e}")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("dense eigensolver failed: {0}")]
    Eigen(String),

    #[error("singular value decomposition failed: {0}")]
    Svd(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty energy band: no eigenvalue at or below {threshold}")]
    EmptyBand { threshold: f64 },

    #[error("system of {n} sites needs dimension 2^{n}, above the cap 2^{cap} (set LOWTROT_NMAX to raise)")]
    DimensionCap { n: usize, cap: usize },

    #[error("unknown model {0:?} (known: heisenberg_chain, tfim_chain, xy_chain, random_klocal)")]
    UnknownModel(String),

    #[error("degenerate error series: {0}")]
    DegenerateSeries(String),

    #[error("bound violated: {0}")]
    BoundViolated(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
