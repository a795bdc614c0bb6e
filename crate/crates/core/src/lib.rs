//! Linear involutions, their Rauzy-Veech renormalization, and numerical tests of weak mixing.

pub mod cocycle;
pub mod genperm;
pub mod involution;
pub mod lp;
pub mod matrix;
pub mod rauzy;
pub mod sampler;
pub mod scalar;
pub mod suspension;
pub mod weakmix;

pub use genperm::{GenPermError, GeneralizedPermutation, LetterClass, LetterClasses};
pub use involution::{InvolutionError, LengthVector, LinearInvolution, MarkedPoint};
pub use matrix::IntMatrix;
pub use scalar::Scalar;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Rational = num_rational::BigRational;
pub type ExactLengths = LengthVector<Rational>;
pub type FloatLengths = LengthVector<f64>;
pub type ExactInvolution = LinearInvolution<Rational>;
pub type FloatInvolution = LinearInvolution<f64>;
