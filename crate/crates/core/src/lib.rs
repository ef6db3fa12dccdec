//! Simulation and limit theory for eigenvector overlap processes of
//! heavy-tailed symmetric random matrices.
//!
//! The crate has three layers:
//!
//! * **Simulation** — sample matrices from the supported ensembles
//!   ([`ensembles`]), eigendecompose them with an exchangeable-basis
//!   convention and build the empirical processes `B^n`, `C^n`, `X^n`
//!   ([`eigenprocess`]), and estimate their covariances over replicates
//!   ([`montecarlo`]).
//! * **Limit theory** — closed-form characteristic exponents and their
//!   kernel representations ([`philib`]), fixed-point integral equations
//!   for the limiting covariance ([`fixedpoint`]), and Cauchy/Stieltjes
//!   inversion back to spectral CDFs and process covariances
//!   ([`inversion`]).
//! * **Cross-checks** — exact linear-algebra identities used as test
//!   oracles ([`identities`]).

pub mod ensembles;
pub mod error;
pub mod philib;
pub mod special;
pub mod linalg;
pub mod eigenprocess;
pub mod identities;
pub mod montecarlo;
pub mod fixedpoint;
pub mod inversion;

pub use error::{Error, Result};
