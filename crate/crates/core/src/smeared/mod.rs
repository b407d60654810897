//! Checks of the radial identities after pairing with bump functions, and of
//! the damped Fourier-side identity.

pub mod bump;
pub mod fourier;
pub mod pairing;
pub mod report;

pub use bump::{make_bump, BumpFunction, BumpNorms, Quadrature};
pub use fourier::fourier_check;
pub use pairing::{
    nd_residuals, pair_counting, NdResidual, verify_delta_identity, verify_nd_identity, verify_smeared_expansion,
};
pub use report::{PairingReport, TailStatus, Verdict};
