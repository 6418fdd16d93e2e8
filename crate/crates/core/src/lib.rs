//! Phase-space densities evolved along Hamiltonian characteristic flow.
//!
//! The state of a particle is a normalized probability density on phase
//! space, not a point. Densities are transported by pulling the initial
//! density back along the flow of Hamilton's equations; expectation values
//! are Gauss-Hermite quadratures of observables composed with the flow.
//!
//! Modules:
//! - [`phase_density`]: the Gaussian density family and its free-motion
//!   closed forms (marginals, moments, dispersion growth).
//! - [`flow`]: Hamiltonian flow maps, the pullback solution of the
//!   transport equation, expectations, and the point-concentration limit.
//! - [`corrections`]: reference Newtonian dynamics for the cubic-force
//!   system and the leading correction to the mean trajectory.
//! - [`box_dynamics`]: free particle on [0, 1] with reflecting ends via
//!   image sums, with its uniform and two-sided-Gaussian limit laws.
//! - [`quantum`]: Gaussian wave packets, the width condition under which
//!   quantum and classical coordinate densities coincide, Wigner
//!   correspondence, and the boxed packet built from image sums.
//!
//! All quantities are dimensionless. Widths `a` and `b` follow the
//! exponential-scale convention exp(-(q-q0)^2/a^2); variances are a^2/2
//! and b^2/2, not a^2 and b^2.

pub mod box_dynamics;
pub mod corrections;
mod error;
pub mod flow;
pub mod phase_density;
pub mod poly;
pub mod quadrature;
pub mod quantum;

pub use error::{Error, Result};
pub use flow::{FlowControls, FlowResult, HamiltonianSpec, PhasePoint};
pub use phase_density::{GaussianState, Marginal, MarginalKind, MomentReport};
pub use poly::Polynomial;
pub use quadrature::QuadratureSpec;
