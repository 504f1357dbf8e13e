//! Simulation and verification toolkit for functional limits of sums of a
//! function of partial sums.
//!
//! The crate is organised bottom-up:
//!
//! * [`stable`]: stable laws in the dispersion parametrisation: characteristic
//!   function, exact sampling, CDF by Fourier inversion, and the limit constant
//!   `Γ(α+1)^{1/α}`.
//! * [`paths`]: input distributions in a stable domain of attraction, the
//!   rescaled partial-sum process and stable Lévy motion on `[0, 1]`.
//! * [`norming`]: centering and scaling sequences per distribution family and
//!   the Karamata-type sums used to bound `Σ E|S_k − kμ|/k`.
//! * [`functionals`]: the functional statistic, product-of-partial-sums
//!   statistic, truncated Riemann integral `∫ L(x)/x dx` and its closed-form law.
//! * [`verification`]: goodness-of-fit machinery and the seeded campaigns that
//!   produce [`verification::VerificationReport`]s.
//!
//! Every random quantity is drawn from a [`rng::SeedStream`], so results are
//! bit-identical regardless of how replicates are scheduled across threads.

pub mod error;
pub mod functionals;
pub mod norming;
pub mod numerics;
pub mod paths;
pub mod rng;
pub mod stable;
pub mod verification;

pub use error::{Error, Result};
pub use rng::SeedStream;
pub use stable::{ComplexValue, StableParams};
