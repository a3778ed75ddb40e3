//! Robust secure beamforming with artificial noise for an underlay
//! cognitive multicast network: channel scenarios, secrecy-rate
//! evaluation, convex surrogates, a conic modelling layer, the SCA
//! loop, and experiment drivers.

use openblas_src as _;

pub mod conic;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod par;
pub mod rates;
pub mod rng;
pub mod sca;
pub mod scenario;
pub mod surrogate;

pub use error::{Error, Result};
