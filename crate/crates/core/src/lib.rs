//! Analysis and simulation of a single-server status-update queue shared by
//! two Poisson streams with exponential service:
//!
//! - an ordinary stream served first-come first-served with an unbounded
//!   buffer, and
//! - a priority stream whose arrivals discard any in-service priority packet
//!   and preempt (with resume) any in-service ordinary packet.
//!
//! The crate provides the stability condition, the stationary distribution
//! of the two-row Markov chain, the ordinary stream's occupancy MGF and
//! mean, its average peak age and an M/G/1 lower bound on its average age,
//! and the priority stream's average age. A truncated-generator solver
//! ([`ctmc`]) and a discrete-event simulator ([`sim`]) provide independent
//! checks, and [`validate`] bundles the cross-checks into a suite.
//!
//! ```
//! use prioage::{analytic, age, ModelParams};
//!
//! let p = ModelParams::new(2.0, 5.0, 10.0, 5.0)?;
//! assert!(analytic::check_stability(&p).is_stable);
//! assert!((analytic::peak_age_ordinary(&p)? - 1.0).abs() < 1e-12);
//! assert!((analytic::priority_age(&p)? - 0.4).abs() < 1e-12);
//! let lb = age::age_lower_bound(&p)?;
//! assert!(lb < 1.0);
//! # Ok::<(), prioage::Error>(())
//! ```

// NaN-rejecting guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::needless_range_loop))]

pub mod age;
pub mod analytic;
pub mod cli;
pub mod ctmc;
pub mod error;
pub mod oracle;
pub mod params;
pub mod sim;
pub mod validate;

pub use error::{Error, Result};
pub use params::{ModelParams, Rate};
