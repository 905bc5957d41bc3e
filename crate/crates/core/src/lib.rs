//! Elephant random walks with growing memory.
//!
//! The crate is organised bottom-up:
//!
//! * [`walk`] defines the walk parameters, memory schedules, the one-step
//!   conditional law and single-trajectory simulation.
//! * [`exact`] holds exact finite-n computations: exhaustive path enumeration
//!   and closed-form / recursive moments.
//! * [`limits`] classifies a parameter set into its regime and supplies the
//!   normalisation and limit moments / limit CDF.
//! * [`ensemble`] runs seeded ensembles of trajectories in parallel and
//!   compares them with the limit targets.
//! * [`experiment`] wires everything into the named experiments exposed by
//!   the `erwlab` command line tool.

pub mod ensemble;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod limits;
pub mod walk;

pub use error::{Error, Result};
