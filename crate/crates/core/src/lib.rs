pub mod cli;
pub mod error;
pub mod eval;
pub mod features;
pub mod forest;
pub mod pipeline;
pub mod seed;
pub mod signal_io;
pub mod synth;
pub mod wflc;

pub use error::{Error, Result};
