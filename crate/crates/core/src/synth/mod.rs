//! Synthetic single-electron EFTEM frame stacks.
//!
//! Pixels are independent Poisson counts drawn from a sample/vacuum phantom
//! whose vacuum side carries an exponential evanescent tail. Every
//! (frame, row) pair owns a ChaCha8 substream, so a stack is a pure function
//! of `(phantom, n_frames, kind, seed)` whatever the thread count.

pub mod io;
mod phantom;
mod poisson;
mod rng;
mod spectrum;
mod stack;

pub use phantom::{DecayModel, ScenePhantom, MAX_MEAN};
pub use poisson::PoissonSampler;
pub use rng::{derive_seed, StreamKey, Substream};
pub use spectrum::{spectral_weight, GaussianPeak, LorentzianPeak, Spectrum};
pub use stack::{difference_stack, generate_from_mean, generate_stack, Frame, FrameStack, StackGeometry, StackKind};
