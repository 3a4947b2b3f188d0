//! Fluid–solid growth of a cylindrical vessel.
//!
//! The solid is an equilibrated constrained mixture solved patch by patch in
//! thin-wall statics ([`mixture`]); the fluid is either Poiseuille or a steady
//! axisymmetric Navier–Stokes solve ([`fluid`]); the two are coupled by a
//! partitioned interface iteration with IQN-ILS acceleration ([`coupling`]).
//! [`simulation`] drives load-stepped scenarios and [`verify`] holds the
//! independent oracles.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod coupling;
pub mod error;
pub mod fluid;
pub mod mixture;
pub mod simulation;
pub mod verify;

pub use error::{Error, Result};

/// kPa per mmHg.
pub const KPA_PER_MMHG: f64 = 0.1333;
