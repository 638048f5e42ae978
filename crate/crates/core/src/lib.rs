pub mod averaging;
pub mod beatty;
pub mod bohr;
pub mod correlator;
pub mod error;
pub mod lattice;
pub mod multfunc;
pub mod realfield;

pub use error::{Error, Result};
