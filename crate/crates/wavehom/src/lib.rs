pub mod cascade;
pub mod classical;
pub mod config;
pub mod dispersive;
pub mod error;
pub mod filter;
pub mod fit;
pub mod harness;
pub mod modal;
pub mod normal_form;
pub mod operators;
pub mod poly;
pub mod reference;
pub mod source;
pub mod spectral;
pub mod torus;
pub mod two_scale;

pub use error::{Error, Result};
