pub mod bessel;
pub mod cmath;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod events;
pub mod filters;
pub mod grid;
pub mod io;
pub mod motion;
pub mod oracle;
pub mod recovery;
pub mod response;
pub mod selfcheck;
pub mod simulate;
pub mod target;
pub mod units;

pub use error::{Error, Result};
