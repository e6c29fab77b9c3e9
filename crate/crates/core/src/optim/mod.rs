//! Optimizer update rules over flat parameter vectors.
//!
//! Every rule reads a [`FlatGrads`] and updates a [`FlatParams`] that share
//! one [`Layout`]. Stateful methods thread an explicit [`OptimizerState`];
//! nothing here holds global or shared mutable state.
//!
//! Gravilon needs the current loss as well as the gradient, so the uniform
//! entry point [`OptimizerState::step`] takes both and ignores the loss for
//! methods that do not use it.

mod baselines;
mod gravilon;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use baselines::{adagrad_step, adam_step, adamax_step, nadam_step, rmsprop_step, sgd_step};
pub use gravilon::{gravilon_beta, gravilon_momentum_step, gravilon_step, GRAD_FLOOR};

/// One named, shaped block inside a flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

impl Segment {
    pub fn new(name: impl Into<String>, rows: usize, cols: usize) -> Self {
        Segment {
            name: name.into(),
            rows,
            cols,
        }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Ordered description of how a flat vector splits into named blocks.
///
/// Cloning is cheap; equality short-circuits on pointer identity.
#[derive(Debug, Clone)]
pub struct Layout(Arc<[Segment]>);

impl Layout {
    pub fn new(segments: Vec<Segment>) -> Self {
        Layout(segments.into())
    }

    /// A single column segment named `x`, used for plain vectors.
    pub fn vector(len: usize) -> Self {
        Layout::new(vec![Segment::new("x", len, 1)])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.0
    }

    /// Total number of scalars.
    pub fn len(&self) -> usize {
        self.0.iter().map(Segment::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Start offset of each segment in the flat vector.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.0
            .iter()
            .map(|s| {
                let start = acc;
                acc += s.len();
                start
            })
            .collect()
    }
}

impl PartialEq for Layout {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Layout {}

macro_rules! flat_vector {
    ($name:ident) => {
        impl $name {
            /// Wraps `values`, checking the length against `layout`.
            pub fn new(values: Vec<f64>, layout: Layout) -> Result<Self> {
                if values.len() != layout.len() {
                    return Err(Error::contract(format!(
                        "{} has {} values but layout describes {}",
                        stringify!($name),
                        values.len(),
                        layout.len()
                    )));
                }
                Ok($name { values, layout })
            }

            /// Plain vector with a single-segment layout.
            pub fn from_slice(values: &[f64]) -> Self {
                $name {
                    values: values.to_vec(),
                    layout: Layout::vector(values.len()),
                }
            }

            pub fn zeros(layout: Layout) -> Self {
                $name {
                    values: vec![0.0; layout.len()],
                    layout,
                }
            }

            pub fn values(&self) -> &[f64] {
                &self.values
            }

            pub fn values_mut(&mut self) -> &mut [f64] {
                &mut self.values
            }

            pub fn into_values(self) -> Vec<f64> {
                self.values
            }

            pub fn layout(&self) -> &Layout {
                &self.layout
            }

            pub fn len(&self) -> usize {
                self.values.len()
            }

            pub fn is_empty(&self) -> bool {
                self.values.is_empty()
            }

            /// Slice belonging to segment `index` of the layout.
            pub fn segment(&self, index: usize) -> &[f64] {
                let start = self.layout.offsets()[index];
                &self.values[start..start + self.layout.segments()[index].len()]
            }

            /// Sum of squared entries.
            pub fn norm_sq(&self) -> f64 {
                self.values.iter().map(|v| v * v).sum()
            }

            pub fn norm(&self) -> f64 {
                self.norm_sq().sqrt()
            }

            pub fn is_finite(&self) -> bool {
                self.values.iter().all(|v| v.is_finite())
            }
        }
    };
}

/// Flattened model parameters θ.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatParams {
    values: Vec<f64>,
    layout: Layout,
}

/// Flattened gradient ∇f(θ), laid out like the matching [`FlatParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct FlatGrads {
    values: Vec<f64>,
    layout: Layout,
}

flat_vector!(FlatParams);
flat_vector!(FlatGrads);

impl FlatGrads {
    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: f64) -> FlatGrads {
        FlatGrads {
            values: self.values.iter().map(|v| v * factor).collect(),
            layout: self.layout.clone(),
        }
    }
}

/// Optimization method tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Sgd,
    Adagrad,
    Adam,
    Adamax,
    Nadam,
    Rmsprop,
    Gravilon,
    /// Gravilon with heavy-ball momentum, L2 weight decay and a β scale.
    GravilonM,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Sgd,
        Method::Adagrad,
        Method::Adam,
        Method::Adamax,
        Method::Nadam,
        Method::Rmsprop,
        Method::Gravilon,
        Method::GravilonM,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Sgd => "sgd",
            Method::Adagrad => "adagrad",
            Method::Adam => "adam",
            Method::Adamax => "adamax",
            Method::Nadam => "nadam",
            Method::Rmsprop => "rmsprop",
            Method::Gravilon => "gravilon",
            Method::GravilonM => "gravilon-m",
        }
    }

    pub fn from_name(name: &str) -> Option<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(name))
    }

    /// Whether the method has a learning rate at all.
    pub fn uses_learning_rate(self) -> bool {
        !matches!(self, Method::Gravilon | Method::GravilonM)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Hyperparameters for every method; each method reads only its own fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub initial_accumulator: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub beta_scale: f64,
}

impl HyperParams {
    /// Benchmark defaults for `method`: α = 0.001, β₁ = 0.9, β₂ = 0.999,
    /// ρ = 0.9, ε = 1e-7, Adagrad accumulator 0.1; GravilonM uses momentum
    /// 0.9, weight decay 5e-4 and β scale 50.
    pub fn defaults_for(method: Method) -> Self {
        let mut h = HyperParams {
            alpha: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            rho: 0.9,
            epsilon: 1e-7,
            initial_accumulator: 0.1,
            momentum: 0.0,
            weight_decay: 0.0,
            beta_scale: 1.0,
        };
        if method == Method::GravilonM {
            h.momentum = 0.9;
            h.weight_decay = 5e-4;
            h.beta_scale = 50.0;
        }
        h
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }
}

/// Per-method optimizer state.
///
/// Buffers that a method does not use stay `None` forever. Buffers it does
/// use are `None` until the first step, which allocates them zeroed to the
/// parameter length.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub method: Method,
    pub step_count: u64,
    /// First moment m (Adam, Adamax, Nadam).
    pub moment1: Option<Vec<f64>>,
    /// Second moment v (Adam, Nadam, RMSprop) or the infinity norm u (Adamax).
    pub moment2: Option<Vec<f64>>,
    /// Running sum of squared gradients (Adagrad).
    pub accumulator: Option<Vec<f64>>,
    /// Velocity buffer (GravilonM).
    pub momentum_buf: Option<Vec<f64>>,
    /// Running product of Nadam's momentum schedule, ∏ μᵢ for i ≤ t.
    pub mu_product: f64,
    pub hyper: HyperParams,
}

impl OptimizerState {
    pub fn new(method: Method, hyper: HyperParams) -> Self {
        OptimizerState {
            method,
            step_count: 0,
            moment1: None,
            moment2: None,
            accumulator: None,
            momentum_buf: None,
            mu_product: 1.0,
            hyper,
        }
    }

    /// Plain Gravilon. There is nothing to configure.
    pub fn gravilon() -> Self {
        Self::new(Method::Gravilon, HyperParams::defaults_for(Method::Gravilon))
    }

    pub fn gravilon_momentum(momentum: f64, weight_decay: f64, beta_scale: f64) -> Self {
        let mut hyper = HyperParams::defaults_for(Method::GravilonM);
        hyper.momentum = momentum;
        hyper.weight_decay = weight_decay;
        hyper.beta_scale = beta_scale;
        Self::new(Method::GravilonM, hyper)
    }

    pub fn sgd(alpha: f64) -> Self {
        Self::with_alpha(Method::Sgd, alpha)
    }

    pub fn adagrad(alpha: f64) -> Self {
        Self::with_alpha(Method::Adagrad, alpha)
    }

    pub fn adam(alpha: f64) -> Self {
        Self::with_alpha(Method::Adam, alpha)
    }

    pub fn adamax(alpha: f64) -> Self {
        Self::with_alpha(Method::Adamax, alpha)
    }

    pub fn nadam(alpha: f64) -> Self {
        Self::with_alpha(Method::Nadam, alpha)
    }

    pub fn rmsprop(alpha: f64) -> Self {
        Self::with_alpha(Method::Rmsprop, alpha)
    }

    /// `method` with its default hyperparameters and learning rate `alpha`.
    pub fn with_alpha(method: Method, alpha: f64) -> Self {
        Self::new(method, HyperParams::defaults_for(method).with_alpha(alpha))
    }

    /// `method` with all defaults.
    pub fn default_for(method: Method) -> Self {
        Self::new(method, HyperParams::defaults_for(method))
    }

    /// Applies one update of `self.method` to `params` in place.
    ///
    /// `loss` is the objective value at `params`; only the Gravilon variants
    /// read it. Returns the scalar step coefficient: β for the Gravilon
    /// variants, α for SGD, and the effective ratio |Δθ| / |g| for the
    /// adaptive methods (0 when g = 0).
    pub fn step(&mut self, params: &mut FlatParams, grads: &FlatGrads, loss: f64) -> Result<f64> {
        match self.method {
            Method::Gravilon => {
                let beta = gravilon::apply(params, grads, loss)?;
                self.step_count += 1;
                Ok(beta)
            }
            Method::GravilonM => gravilon_momentum_step(self, params, grads, loss),
            Method::Sgd => {
                sgd_step(self, params, grads)?;
                Ok(self.hyper.alpha)
            }
            adaptive => {
                let before = params.values().to_vec();
                match adaptive {
                    Method::Adagrad => adagrad_step(self, params, grads)?,
                    Method::Adam => adam_step(self, params, grads)?,
                    Method::Adamax => adamax_step(self, params, grads)?,
                    Method::Nadam => nadam_step(self, params, grads)?,
                    Method::Rmsprop => rmsprop_step(self, params, grads)?,
                    _ => unreachable!(),
                }
                let moved: f64 = before
                    .iter()
                    .zip(params.values())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let g = grads.norm();
                Ok(if g > 0.0 { moved / g } else { 0.0 })
            }
        }
    }

    pub(crate) fn expect_method(&self, method: Method) -> Result<()> {
        if self.method != method {
            return Err(Error::contract(format!(
                "state belongs to {} but a {} step was requested",
                self.method, method
            )));
        }
        Ok(())
    }
}

/// Checks the shared preconditions of every update rule.
pub(crate) fn check_inputs(params: &FlatParams, grads: &FlatGrads) -> Result<()> {
    if params.layout() != grads.layout() {
        return Err(Error::contract("parameter and gradient layouts differ"));
    }
    if !grads.is_finite() {
        return Err(Error::invalid("gradient contains a non-finite entry"));
    }
    if !params.is_finite() {
        return Err(Error::invalid("parameters contain a non-finite entry"));
    }
    Ok(())
}

pub(crate) fn check_loss(loss: f64) -> Result<()> {
    if !loss.is_finite() || loss < 0.0 {
        return Err(Error::invalid(format!(
            "loss must be finite and nonnegative, got {loss}"
        )));
    }
    Ok(())
}

/// Global L2-norm clipping.
///
/// If |g| exceeds `threshold` the whole vector is rescaled to norm
/// `threshold`; otherwise it is returned unchanged.
pub fn clip_gradient(grads: &FlatGrads, threshold: f64) -> Result<FlatGrads> {
    let mut out = grads.clone();
    clip_gradient_in_place(&mut out, threshold)?;
    Ok(out)
}

/// In-place form of [`clip_gradient`]. Returns the norm before clipping.
pub fn clip_gradient_in_place(grads: &mut FlatGrads, threshold: f64) -> Result<f64> {
    if threshold <= 0.0 || !threshold.is_finite() {
        return Err(Error::invalid(format!(
            "clip threshold must be positive and finite, got {threshold}"
        )));
    }
    if !grads.is_finite() {
        return Err(Error::invalid("gradient contains a non-finite entry"));
    }
    let norm = grads.norm();
    if norm > threshold {
        let scale = threshold / norm;
        grads.values_mut().iter_mut().for_each(|v| *v *= scale);
    }
    Ok(norm)
}
