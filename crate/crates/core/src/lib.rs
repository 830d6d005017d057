#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod autocorr;
#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod llr_oracle;
pub mod output;
pub mod quad;
pub mod spectrum;
pub mod stats;
pub mod stopping_time;
mod streams;
pub mod waveform_sim;

pub use error::{Error, Result};
pub use stopping_time::{calibrate_threshold, ChannelParams, Form, LengthDistribution};
