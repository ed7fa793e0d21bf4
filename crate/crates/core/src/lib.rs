pub mod cli;
pub mod error;
pub mod green;
pub mod mittag_leffler;
pub mod par;
pub mod phi;
pub mod quadrature;
pub mod solver;
pub mod special;
pub mod spectral;
pub mod temporal;

pub use error::{Error, Result};
