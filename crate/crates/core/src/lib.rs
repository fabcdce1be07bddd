//! Analytic center of the passivity LMI for continuous- and discrete-time
//! LTI systems, extremal Riccati solutions, passivity-radius bounds and
//! bilinear transforms.

pub mod bilinear;
pub mod center;
pub mod error;
pub mod hermitian;
pub mod io;
pub mod lmi;
pub mod model;
pub mod radius;
pub mod riccati;
pub mod schur;

pub use error::{Error, Result};
pub use hermitian::{CMatrix, HermitianMatrix};
pub use model::{GeneralizedWeight, StateSpaceModel, TimeDomain};
