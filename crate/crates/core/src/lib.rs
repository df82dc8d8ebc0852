//! Monte Carlo laboratory for norm-ratio push-forwards and concentration transfer.

pub mod concentration;
pub mod error;
pub mod measures;
pub mod normspace;
pub mod parameters;
pub mod rng;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};
pub use measures::{sample, MeasureSpec, Points, SampleBatch};
pub use normspace::{ContainmentConstant, Exponent, NormSpec, Transform};
