//! Tangent-plane ("Gravilon") gradient descent and the machinery needed to
//! benchmark it.
//!
//! The Gravilon rule steps along the negative gradient by exactly the
//! distance at which the tangent hyperplane of the loss surface meets the
//! height-zero plane:
//!
//! ```text
//! θ ← θ − (f(θ) / |∇f(θ)|²) · ∇f(θ)
//! ```
//!
//! It has no learning rate. It assumes the objective is nonnegative with
//! minima at height 0, which holds for cross-entropy and for the analytic
//! functions in [`testbed`].
//!
//! Crate layout:
//!
//! - [`optim`]: Gravilon, its momentum/weight-decay variant and the six
//!   baseline optimizers (SGD, Adagrad, Adam, Adamax, Nadam, RMSprop) over
//!   flat parameter vectors, plus global-norm gradient clipping.
//! - [`nn`]: a dense row-major [`nn::Matrix`], the sigmoid MLP
//!   (784–128–128–10 by default), cross-entropy, backpropagation and a
//!   finite-difference gradient checker.
//! - [`data`]: MNIST IDX reader/writer, normalization, the 50k/10k split,
//!   mini-batching and a synthetic offline dataset.
//! - [`testbed`]: analytic objectives with known height-0 minima, descent
//!   trajectories and convergence-rate estimates.
//! - [`harness`]: trial and experiment runner, CSV output and run manifests.
//!
//! All arithmetic is `f64`, and every random choice flows from an explicit
//! `u64` seed through ChaCha8, so runs are bitwise reproducible on a given
//! build.
//!
//! ```
//! use gravilon::optim::{gravilon_step, FlatGrads, FlatParams};
//!
//! // f(x) = 3x - 6 at x = 5: one step lands on the root.
//! let x = FlatParams::from_slice(&[5.0]);
//! let g = FlatGrads::from_slice(&[3.0]);
//! let next = gravilon_step(&x, &g, 9.0).unwrap();
//! assert_eq!(next.values(), &[2.0]);
//! ```

pub mod data;
pub mod error;
pub mod harness;
pub mod nn;
pub mod optim;
pub mod testbed;

pub use error::{Error, Result};
