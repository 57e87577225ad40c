//! Spectral calculus for harmonic and biharmonic analysis on annuli and balls.
//!
//! The crate evaluates the explicit constants, norm identities and inequalities
//! that drive neck-region analysis of biharmonic maps in dimension four:
//!
//! * [`specfun`] — Gamma, sphere areas, Gegenbauer polynomials, Bessel zeros,
//!   Lambert W;
//! * [`harmonics`] — spherical harmonics on `S^{d-1}` (pointwise bases for
//!   `d = 3, 4`), angular quadrature, Bochner-type Hessian integrals;
//! * [`annulus`] — exact `L^2` / Dirichlet / weighted / Hessian norms of
//!   harmonic expansions, flux, dyadic comparison lemmas, coefficient lower
//!   bounds, pointwise bounds and Lorentz-norm scaling checks;
//! * [`lorentz`] — decreasing rearrangements and exact Lorentz norms of simple
//!   functions, the sphere-averaging lemma, duality and exponentiation checks,
//!   the improved Sobolev embedding;
//! * [`poisson`] — mode-wise Poisson solver on the unit ball and the dyadic
//!   weighted (Wente-type) gradient estimates;
//! * [`calculus`] — inversion pullbacks, cutoffs, the Whitney extension with
//!   its constant ledger, Poincaré–Wirtinger and Poincaré–Sobolev inequalities;
//! * [`stability`] — second variation of the biharmonic energy for sphere
//!   targets, Pohozaev flux, Hardy–Rellich Rayleigh quotients, neck positivity;
//! * [`harness`] — named verification suites with reproducible JSON reports.
//!
//! Every verification operation returns a [`check::LemmaCheck`] recording both
//! sides of the inequality it certifies. Run `cargo run --bin verify -- all`
//! for the full battery, or see the `examples/` directory for one runnable
//! walkthrough per capability.

pub mod annulus;
pub mod calculus;
pub mod check;
pub mod field;
pub mod harmonics;
pub mod harness;
pub(crate) mod linalg;
pub mod lorentz;
pub mod poisson;
pub mod specfun;
pub mod stability;

pub use check::LemmaCheck;

/// Errors shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A lemma-specific side condition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Root bracketing, overflow, or loss of convergence.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// Unknown lemma or theorem identifier.
    #[error("unknown lemma id: {0}")]
    UnknownLemma(String),
    /// Pointwise bases exist only for d = 3, 4.
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(u32),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
