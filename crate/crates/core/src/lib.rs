// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

//! Quantum systems coupled to classical event recorders.
//!
//! A model pairs an `n`-level quantum system with a recorder that has `m`
//! classical states. [`pdp`] generates individual sample paths of the pair,
//! [`master`] integrates the equation for their statistics, and
//! [`ensemble`] averages paths and measures how far the average is from
//! the exact solution. [`io`] holds the configuration format and the
//! commands behind the `eeqt` binary.
//!
//! ```
//! use eeqt::linalg::ComplexVector;
//! use eeqt::model::{builtin_model, BuiltinParams, PureHybridState, Sector};
//! use eeqt::pdp::{run_trajectory, TrajectoryParams, TrajectorySeed};
//!
//! let model = builtin_model("qubit-detector", &BuiltinParams::default())?;
//! let start = PureHybridState::new(ComplexVector::from_real(&[1.0, 0.0]), Sector::new(1))?;
//! let path = run_trajectory(&model, &start, &TrajectoryParams::fixed_dt(1e-3, 5.0), TrajectorySeed::new(1))?;
//! for e in &path.events {
//!     println!("{} -> {} at t = {}", e.from, e.to, e.time);
//! }
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod ensemble;
pub mod io;
pub mod linalg;
pub mod master;
pub mod model;
pub mod pdp;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/hybrid-models.md")]
    mod hybrid_models {}
    #[doc = include_str!("../../../book/src/trajectories.md")]
    mod trajectories {}
    #[doc = include_str!("../../../book/src/master-equation.md")]
    mod master_equation {}
    #[doc = include_str!("../../../book/src/ensembles.md")]
    mod ensembles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
