pub mod costs;
pub mod error;
pub mod game_value;
pub mod harness;
pub mod geometry;
pub mod md;
pub mod prox;
pub mod regularizers;

pub use error::{Error, Result};
