//! Gas pipeline flow simulation with observer-based PDE backstepping
//! boundary control of the outlet density.
//!
//! The crate is organised bottom-up:
//!
//! * [`exosystem`] generates the outlet-flow fluctuation and provides the
//!   small dense linear algebra (matrix exponential, eigenvalues, pole
//!   placement) used by the gains.
//! * [`pipeline`] holds the physical parameters, the equilibrium profile and
//!   the canonical (Riemann) coordinates of the linearised pipe.
//! * [`kernels`] solves the Goursat kernel equations and builds the feedback
//!   and output-injection gains.
//! * [`simulate`] steps the nonlinear and canonical plants, the observers and
//!   the control laws, and orchestrates closed-loop runs.
//! * [`scenario`], [`report`] and [`run`] provide configuration, presets,
//!   CSV/JSON/SVG output and the batch driver used by the CLI.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod exosystem;
pub mod kernels;
pub mod pipeline;
pub mod report;
pub mod run;
pub mod scenario;
pub mod simulate;

pub use error::{Error, Result};
