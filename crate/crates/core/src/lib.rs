pub mod algebra;
pub mod boundary;
pub mod closures;
pub mod cone;
pub mod corner;
mod dense;
pub mod error;
pub mod expfam;
pub mod matrix;
pub mod maximizer;
pub mod report;
pub mod sample;
pub mod scalar;
pub mod spectral;
pub mod state;

pub use algebra::{hs_inner, Algebra, Hermitian};
pub use error::{Error, Result};
pub use scalar::Real;
pub use state::{OrthoProjector, QuantumState};

pub type HermitianElement = Hermitian<f64>;
pub type State = QuantumState<f64>;
pub type Projector = OrthoProjector<f64>;

pub type HermitianElementF32 = Hermitian<f32>;
pub type StateF32 = QuantumState<f32>;
