//! Model-agnostic super-resolution on the d-dimensional torus.
//!
//! Signals are finite signed measures ([`DiracComb`]) on `[0,1)^d` with
//! opposite faces identified. The crate provides:
//!
//! * Fourier coefficients of combs over ℓ∞/ℓ1 frequency balls and a bounded
//!   noise model ([`fourier`]).
//! * Jackson's kernel with closed-form Fourier coefficients ([`jackson`]).
//! * A dense, deterministic simplex solver ([`lp`]).
//! * Wasserstein reconstruction by Jackson smoothing plus a grid LP ([`recon`]).
//! * Exact Wasserstein distances and certified heavy-hitter intervals ([`metrics`]).
//! * The trigonometric bump polynomial used for heavy-hitter certificates ([`bump`]).
//! * Generators and verifiers for the hard instance pairs ([`adversarial`]).

pub mod adversarial;
pub mod bump;
mod error;
pub mod fourier;
pub mod jackson;
pub mod lp;
pub mod metrics;
pub mod recon;
pub mod torus;

pub use error::{Error, Result};
pub use fourier::{FourierTable, FrequencyIndex, IndexSet};
pub use torus::{DiracComb, TorusPoint};
