//! Abelian integrals, limit wave speeds and limit cycles for periodic
//! traveling waves of the perturbed generalized KdV equation
//! `U_t + U^n U_x + U_xxx + ε(U_xx + U_xxxx) = 0`.
//!
//! After the traveling-wave reduction the dynamics live on the planar
//! near-Hamiltonian system
//!
//! ```text
//! u' = y,   y' = u - u^(n+1)/(n+1) + ε√c (u^n y - (1 + 1/c) y)
//! ```
//!
//! whose unperturbed part is handled by [`hamiltonian`], the first-order
//! Abelian integrals by [`abelian`] and [`identities`], and direct
//! simulation by [`dynamics`].

pub mod abelian;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod identities;
pub mod ode;
pub mod quadrature;
pub mod roots;
pub mod verify;

pub use abelian::{AbelianResult, AnnulusEnd, HomoclinicValues, QuadratureValue};
pub use dynamics::{Crossing, LimitCycleReport, PerturbedParams, State, Trajectory};
pub use error::{Error, Result};
pub use hamiltonian::{FixedPoint, FixedPointKind, LevelCurveGeometry, ModelParams};
