//! Secure multi-hop routing and power control against randomly located
//! eavesdroppers, with optional friendly jamming.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod geometry;
pub mod jamming;
pub mod montecarlo;
pub mod outage;
pub mod polyblock;
pub mod power;
pub mod quadrature;
pub mod routing;
pub mod sca;

pub use error::{Error, Result};
