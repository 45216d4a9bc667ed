//! Wavelet-based entanglement renormalization for free-fermion hopping models.

pub mod bounds;
pub mod dwt;
pub mod error;
pub mod fermion1d;
pub mod fermion2d;
pub mod filters;
pub mod laurent;
pub mod linalg;
pub mod seq;
pub mod spectral;

pub use error::{Error, Result};
pub use filters::FilterPair;
pub use laurent::LaurentPoly;
pub use seq::ModeSeq;
