//! Dense matrices and the sigmoid/softmax multilayer perceptron.
//!
//! Samples are columns: a batch of N images is a `784 × N` matrix, and the
//! network's output is a `10 × N` matrix of class probabilities.

mod gradcheck;
mod matrix;
mod mlp;

pub use gradcheck::{
    grad_check, grad_check_against, numeric_partial, relative_error, sample_coordinates,
    GradCheckReport, ABS_FALLBACK,
};
pub use matrix::Matrix;
pub use mlp::{
    accuracy, argmax_columns, backward, cross_entropy_loss, forward, init_params, init_params_for,
    layout_for, loss_and_grad, predict, sigmoid, sigmoid_scalar, softmax, ForwardTrace, LabelBatch,
    ParamSet, MNIST_LAYERS, PROB_FLOOR,
};
