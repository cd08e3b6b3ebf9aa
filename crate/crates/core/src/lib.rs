pub mod autonomous;
pub mod error;
pub mod kashiwara;
pub mod krein;
pub mod maslov;
pub mod numerics;
pub mod suite;
pub mod symplectic;

pub use error::{IndexError, Result};
pub use maslov::HalfInt;
pub use numerics::{Inertia, Tolerances};
