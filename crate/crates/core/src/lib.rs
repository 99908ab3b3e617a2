pub mod classsets;
pub mod error;
pub mod exactnum;
pub mod heckedeg;
pub mod orders;
pub mod quatalg;
pub mod verify;
pub mod weilmatch;

pub use error::{Error, Result};
