//! Queueing-based performance analysis of double-track railway junctions.
//!
//! The junction is decomposed into routes with a symmetric conflict relation.
//! Demand-weighted minimum headway times yield per-route service times and
//! variation coefficients; arrival and service processes are fitted as
//! two-segment hypoexponential (generalized Erlang) distributions and embedded
//! in a continuous-time Markov chain whose stationary distribution gives the
//! expected queue length per route. The timetable capacity is the largest
//! total train count for which every route's queue length stays below its
//! quality threshold, located with Brent's method. Classical Hertel/Kingman
//! scaling factors and a discrete-event simulation are provided for
//! cross-validation.
//!
//! Entry points: [`config::ScenarioConfig`] describes a scenario,
//! [`capacity::find_capacity`] runs the capacity search, and
//! [`runner`] implements the CLI commands on top of both.

pub mod approx;
pub mod capacity;
pub mod config;
pub mod ctmc;
pub mod error;
pub mod junction;
pub mod par;
pub mod phase;
pub mod runner;
pub mod sim;
pub mod steady;

pub use error::{Error, Result};
