#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod convex_core;
pub mod error;
pub mod oracle;
pub mod physics;
pub mod polyblock;
pub mod problem;
pub mod rate_model;
pub mod rollout;
pub mod sca;
pub mod scenario;

pub use error::{Error, Result};
