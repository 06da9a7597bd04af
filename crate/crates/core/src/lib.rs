pub mod channel;
pub mod classifiers;
pub mod datagen;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod hierarchy;
pub mod io;
pub mod mode;
pub mod seed;
pub mod selection;
pub mod signal;

pub use error::{Error, Result};
pub use mode::{ModeLabel, ModePair};
