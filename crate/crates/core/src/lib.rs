pub mod error;
pub mod func_ext;
pub mod kvn;
pub mod numkit;
pub mod oracle;
pub mod parrott;
pub mod sa_ext;

pub use error::{ErrorClass, ExtError, Result};
pub use numkit::{ComplexMatrix, HermitianMatrix, PsdMatrix, Tolerances};
