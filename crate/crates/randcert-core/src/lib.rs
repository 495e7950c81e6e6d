//! Certified randomness in the two-party, two-setting, two-outcome Bell scenario.
//!
//! Behaviors are stored as 16 probabilities indexed by `(x, y, a, b)` with
//! settings `x, y ∈ {0, 1}` and outcomes `a, b ∈ {0, 1}`, where outcome index 0
//! stands for the value +1 and index 1 for −1. See [`behavior::idx`].
//!
//! The crate is `no_std` (with `alloc`). Enable the `std` feature to get
//! `std::error::Error` impls through `thiserror`.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod behavior;
pub mod bounds;
pub mod error;
pub mod extremal;
pub mod lp;
pub mod npa;
pub mod optim;
pub mod dd;
pub mod quantum;
pub mod sdp;
pub mod vertices;

mod math;

pub use behavior::{Behavior, Correlators, WitnessKind, WitnessSpec};
pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
