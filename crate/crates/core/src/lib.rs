#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::suspicious_arithmetic_impl)]

pub mod channel;
pub mod cli;
pub mod design_io;
pub mod error;
pub mod gp;
pub mod harvester;
pub mod optimizer;
pub mod oracle;
pub mod scenario;
pub mod waveform;

pub use error::{Error, Result};
