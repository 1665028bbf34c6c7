//! Non-asymptotic, time-uniform concentration bounds for sums of i.i.d.
//! random variables, and the e-processes obtained by inverting them.
//!
//! The crate has three layers:
//!
//! * [`dist`] — zero-mean distribution families with exact truncated-moment
//!   functionals and an independent adaptive-quadrature oracle;
//! * [`bounds`] — the right-hand sides of the strong-law and
//!   iterated-logarithm inequalities (with explicit constants), plus the
//!   boundary curves the partial sums are compared against;
//! * [`eprocess`] / [`sim`] — threshold schedules `m_j` built by inverting a
//!   tail bound at level `2^-j`, online e-process evaluation, and a Monte
//!   Carlo engine that checks every inequality empirically.
//!
//! [`suite`] pins the verification grids (the same ones the `verify` and
//! `table` CLI subcommands run), and [`cli`] is the command-line front end.
//!
//! # Reproducibility
//!
//! All randomness flows through ChaCha8 keyed by a caller-supplied 64-bit
//! seed; replication `r` reads stream `r` of the same key. Estimates are
//! bit-identical across runs and worker counts.
//!
//! # Quick start
//!
//! ```
//! use stronglaw::bounds::{l1_bound, L1Params};
//! use stronglaw::dist::{DistributionSpec, TruncatedMomentKind};
//!
//! let spec = DistributionSpec::two_point(1.0).unwrap();
//! let p = L1Params::new(100, 0.5, 0.25).unwrap();
//! let u = |x: f64| spec.trunc_moment(TruncatedMomentKind::AbsQ { q: 1.0 }, x).unwrap();
//! let b = l1_bound(&p, u);
//! assert!((b.raw - 104.8).abs() < 1e-9);
//! assert_eq!(b.clamped(), 1.0);
//! ```

pub mod bounds;
pub mod cli;
pub mod dist;
pub mod eprocess;
mod quad;
pub mod sim;
pub mod suite;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A requested moment does not exist for the distribution.
    #[error("moment not finite: {0}")]
    MomentNotFinite(String),
    /// The adaptive integrator failed to reach the requested tolerance.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    /// The Riemann zeta function was evaluated at `s <= 1`.
    #[error("zeta domain: s = {s} must exceed 1")]
    ZetaDomain { s: f64 },
    /// `q` outside `[1, 2)` where the bound divides by `2 - q`.
    #[error("q out of range: q = {q} must lie in [1, 2)")]
    QOutOfRange { q: f64 },
    /// An iterated-logarithm boundary has a negative radicand at index `k`.
    #[error("boundary undefined at k = {k}")]
    BoundaryUndefined { k: u64 },
    /// The scale-invariant statistic divides by |X_1| = 0.
    #[error("scale-invariant statistic undefined: first observation is zero")]
    ScaleInvariantUndefined,
    /// A bound declared nonincreasing in `m` increased during a search.
    #[error("certificate violated: bound not nonincreasing in m near m = {m}")]
    CertificateViolated { m: u64 },
    /// The chosen statistic requires a moment the distribution lacks.
    #[error("moment hypothesis violated: {0}")]
    MomentHypothesisViolated(String),
    /// A parameter failed validation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub use bounds::BoundValue;
pub use dist::{DistributionSpec, TruncatedMomentKind};
pub use eprocess::{EProcessSchedule, EProcessState, Threshold};
pub use sim::{CrossingEstimate, SimConfig};
