//! Sampling and accuracy diagnostics for the Ginibre point process on a disc.
//!
//! The crate builds the spectral decomposition of the Ginibre kernel
//! restricted to a centered disc, samples the associated determinantal point
//! process exactly by inverse-transform conditional draws, and quantifies the
//! accuracy of truncations and ring approximations in optimal-transport
//! metrics.
//!
//! Modules, roughly bottom-up:
//!
//! * [`specfun`]: regularized incomplete gamma functions, log radial weights.
//! * [`rng`]: seeded ChaCha streams with substream addressing.
//! * [`kernel`]: truncated spectrum, eigenfunctions, radial CDFs, ring basis.
//! * [`active_set`]: Bernoulli index sampling, coupled sets, count law.
//! * [`sampler`]: the conditional inverse-transform sampler and a rejection
//!   baseline.
//! * [`transport`]: matchings, Wasserstein-type costs, a priori bounds.
//! * [`diagnostics`]: intensity profiles, count moments, two-sample tests.
//! * [`formats`]: CSV/JSON/SVG serialization used by the command-line tool.

pub mod active_set;
pub mod diagnostics;
pub mod error;
pub mod formats;
pub mod kernel;
pub mod rng;
pub mod sampler;
pub mod specfun;
pub mod transport;

pub use error::{Error, Result};
pub use kernel::{GinibreSpectrum, RingBasis, SpectrumParams};
pub use rng::SampleStream;
pub use sampler::{sample_ginibre, GinibreSample, SamplerMode, SamplerOptions};
pub use transport::Configuration;

/// Version string embedded in sample metadata and the CLI.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
