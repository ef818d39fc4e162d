//! Theta-function solution of the N x N Riemann-Hilbert problem with
//! quasi-permutation monodromy on the cyclic curves y^N = p q^(N-1).

pub mod cli;
pub mod curve;
pub mod error;
pub mod kernels;
pub mod n3m1;
pub mod numerics;
pub mod periods;
pub mod rh;
pub mod schlesinger;
pub mod theta;

pub use curve::{Side, ZnCurve};
pub use error::{Error, Result};
pub use periods::PeriodData;
pub use theta::{Characteristics, ThetaParams};
