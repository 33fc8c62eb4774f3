//! Hypervector mathematics: random-projection encoding, bundling, cosine
//! classification, the perceptron loss and its update rule.

mod checkpoint;
mod encoder;
mod hypervector;
mod model;

pub use encoder::{Encoder, EncoderParams, DEFAULT_EPSILON};
pub use hypervector::Hypervector;
pub use model::{ClassModel, Prediction, StepOutcome};
