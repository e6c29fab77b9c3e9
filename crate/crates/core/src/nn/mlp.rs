use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Matrix;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::optim::{FlatGrads, FlatParams, Layout, Segment};

/// Layer widths of the benchmark network: 784 inputs, two sigmoid hidden
/// layers of 128, and a 10-way softmax output.
pub const MNIST_LAYERS: [usize; 4] = [784, 128, 128, 10];

/// Lower clamp applied to probabilities before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

/// Columns per chunk when evaluating large datasets.
const EVAL_CHUNK: usize = 4096;

/// Logistic function, evaluated in the branch that cannot overflow.
#[inline]
pub fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Elementwise sigmoid.
pub fn sigmoid(x: &Matrix) -> Matrix {
    x.map(sigmoid_scalar)
}

/// Column-wise softmax with per-column max subtraction.
pub fn softmax(x: &Matrix) -> Matrix {
    let mut out = x.clone();
    softmax_in_place(&mut out);
    out
}

fn softmax_in_place(m: &mut Matrix) {
    let (rows, cols) = m.shape();
    let data = m.data_mut();
    for c in 0..cols {
        let mut max = f64::NEG_INFINITY;
        for r in 0..rows {
            max = max.max(data[r * cols + c]);
        }
        let mut sum = 0.0;
        for r in 0..rows {
            let e = (data[r * cols + c] - max).exp();
            data[r * cols + c] = e;
            sum += e;
        }
        for r in 0..rows {
            data[r * cols + c] /= sum;
        }
    }
}

/// Weights and biases of a sigmoid MLP with a softmax output layer.
///
/// `weights[i]` maps layer i to layer i+1 and has shape
/// `(sizes[i+1], sizes[i])`; `biases[i]` is the matching column.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Matrix>,
}

impl ParamSet {
    /// All-zero parameters for the given layer widths.
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        check_sizes(sizes)?;
        Ok(ParamSet {
            weights: sizes.windows(2).map(|w| Matrix::zeros(w[1], w[0])).collect(),
            biases: sizes.windows(2).map(|w| Matrix::zeros(w[1], 1)).collect(),
        })
    }

    /// Layer widths, input first.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.weights[0].cols()];
        s.extend(self.weights.iter().map(Matrix::rows));
        s
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    /// Flat layout: `A1..AL` followed by `b1..bL`.
    pub fn layout(&self) -> Layout {
        layout_for(&self.sizes())
    }

    pub fn num_params(&self) -> usize {
        self.weights
            .iter()
            .chain(&self.biases)
            .map(|m| m.data().len())
            .sum()
    }

    pub fn to_flat(&self) -> FlatParams {
        let mut values = Vec::with_capacity(self.num_params());
        for m in self.weights.iter().chain(&self.biases) {
            values.extend_from_slice(m.data());
        }
        FlatParams::new(values, self.layout()).expect("layout matches parameter count")
    }

    /// Rebuilds a parameter set from a flat vector with a compatible layout.
    pub fn from_flat(flat: &FlatParams) -> Result<Self> {
        let sizes = sizes_from_layout(flat.layout())?;
        let mut out = ParamSet::zeros(&sizes)?;
        out.load_flat(flat)?;
        Ok(out)
    }

    /// Overwrites every entry from `flat`, whose layout must equal ours.
    pub fn load_flat(&mut self, flat: &FlatParams) -> Result<()> {
        if flat.layout() != &self.layout() {
            return Err(Error::contract("flat layout does not match the network"));
        }
        let mut src = flat.values();
        for m in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            let n = m.data().len();
            m.data_mut().copy_from_slice(&src[..n]);
            src = &src[n..];
        }
        Ok(())
    }
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::invalid(format!("bad layer widths {sizes:?}")));
    }
    Ok(())
}

pub fn layout_for(sizes: &[usize]) -> Layout {
    let layers = sizes.len() - 1;
    let mut segs = Vec::with_capacity(2 * layers);
    for (i, w) in sizes.windows(2).enumerate() {
        segs.push(Segment::new(format!("A{}", i + 1), w[1], w[0]));
    }
    for (i, w) in sizes.windows(2).enumerate() {
        segs.push(Segment::new(format!("b{}", i + 1), w[1], 1));
    }
    Layout::new(segs)
}

fn sizes_from_layout(layout: &Layout) -> Result<Vec<usize>> {
    let segs = layout.segments();
    if segs.len() < 2 || !segs.len().is_multiple_of(2) {
        return Err(Error::contract("layout is not a weights-then-biases MLP layout"));
    }
    let weights = &segs[..segs.len() / 2];
    let mut sizes = vec![weights[0].cols];
    sizes.extend(weights.iter().map(|s| s.rows));
    if layout_for(&sizes) != *layout {
        return Err(Error::contract("layout is not a weights-then-biases MLP layout"));
    }
    Ok(sizes)
}

/// Glorot-uniform weights and zero biases for the 784–128–128–10 network.
pub fn init_params(seed: u64) -> ParamSet {
    init_params_for(&MNIST_LAYERS, seed).expect("benchmark widths are valid")
}

/// Glorot-uniform initialization for arbitrary widths.
///
/// Each weight of a layer with fan-in `i` and fan-out `o` is drawn from
/// U[−√(6/(i+o)), +√(6/(i+o))] using ChaCha8 seeded with `seed`, layer by
/// layer in row-major order. Biases start at zero.
pub fn init_params_for(sizes: &[usize], seed: u64) -> Result<ParamSet> {
    let mut params = ParamSet::zeros(sizes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for w in &mut params.weights {
        let bound = (6.0 / (w.rows() + w.cols()) as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound);
        w.data_mut().iter_mut().for_each(|v| *v = dist.sample(&mut rng));
    }
    Ok(params)
}

/// Intermediate values of one forward pass over a batch of columns.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub input: Matrix,
    /// `A_i z_{i-1} + b_i` for every layer, output logits last.
    pub pre_activations: Vec<Matrix>,
    /// Sigmoid outputs of the hidden layers.
    pub activations: Vec<Matrix>,
    /// Softmax of the output logits; one probability column per sample.
    pub probs: Matrix,
}

impl ForwardTrace {
    pub fn batch_size(&self) -> usize {
        self.probs.cols()
    }
}

/// Integer class labels together with their one-hot matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelBatch {
    pub labels: Vec<u8>,
    /// `classes × N`, a single 1 per column.
    pub one_hot: Matrix,
}

impl LabelBatch {
    pub fn new(labels: &[u8], classes: usize) -> Result<Self> {
        let mut one_hot = Matrix::zeros(classes, labels.len());
        for (j, &l) in labels.iter().enumerate() {
            if l as usize >= classes {
                return Err(Error::invalid(format!(
                    "label {l} out of range for {classes} classes"
                )));
            }
            one_hot.set(l as usize, j, 1.0);
        }
        Ok(LabelBatch {
            labels: labels.to_vec(),
            one_hot,
        })
    }

    /// Ten-class labels.
    pub fn digits(labels: &[u8]) -> Result<Self> {
        Self::new(labels, 10)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Runs the network on a `features × N` batch.
pub fn forward(params: &ParamSet, batch: &Matrix) -> Result<ForwardTrace> {
    let layers = params.num_layers();
    let mut pre_activations = Vec::with_capacity(layers);
    let mut activations = Vec::with_capacity(layers - 1);
    for i in 0..layers {
        let input = if i == 0 { batch } else { &activations[i - 1] };
        let mut z = params.weights[i].matmul(input)?;
        z.add_column_in_place(&params.biases[i])?;
        if i + 1 < layers {
            activations.push(sigmoid(&z));
        }
        pre_activations.push(z);
    }
    let probs = softmax(pre_activations.last().expect("at least one layer"));
    Ok(ForwardTrace {
        input: batch.clone(),
        pre_activations,
        activations,
        probs,
    })
}

/// Mean cross-entropy −(1/N) Σ log p[label], probabilities clamped at
/// [`PROB_FLOOR`].
pub fn cross_entropy_loss(trace: &ForwardTrace, labels: &LabelBatch) -> Result<f64> {
    let n = trace.batch_size();
    if labels.len() != n || labels.one_hot.rows() != trace.probs.rows() {
        return Err(Error::contract(format!(
            "{} labels for a batch of {n}",
            labels.len()
        )));
    }
    if n == 0 {
        return Err(Error::invalid("empty batch"));
    }
    let total: f64 = labels
        .labels
        .iter()
        .enumerate()
        .map(|(j, &l)| -trace.probs.get(l as usize, j).max(PROB_FLOOR).ln())
        .sum();
    Ok(total / n as f64)
}

/// Gradient of the mean cross-entropy with respect to every weight and
/// bias, in [`ParamSet::layout`] order.
///
/// The output delta uses the fused softmax/cross-entropy form
/// `(probs − one_hot) / N`; hidden deltas are `(A_{i+1}ᵀ δ_{i+1}) ⊙ σ(1 − σ)`.
pub fn backward(params: &ParamSet, trace: &ForwardTrace, labels: &LabelBatch) -> Result<FlatGrads> {
    let layers = params.num_layers();
    let n = trace.batch_size();
    if trace.pre_activations.len() != layers
        || trace.activations.len() + 1 != layers
        || trace.input.rows() != params.weights[0].cols()
        || trace.probs.rows() != params.weights[layers - 1].rows()
    {
        return Err(Error::contract("forward trace does not belong to these parameters"));
    }
    if labels.len() != n || labels.one_hot.rows() != trace.probs.rows() {
        return Err(Error::contract(format!(
            "{} labels for a batch of {n}",
            labels.len()
        )));
    }

    let inv_n = 1.0 / n as f64;
    let mut delta = Matrix::from_fn(trace.probs.rows(), n, |r, c| {
        (trace.probs.get(r, c) - labels.one_hot.get(r, c)) * inv_n
    });

    let mut weight_grads = vec![Matrix::zeros(0, 0); layers];
    let mut bias_grads = vec![Matrix::zeros(0, 0); layers];
    for i in (0..layers).rev() {
        let input = if i == 0 { &trace.input } else { &trace.activations[i - 1] };
        weight_grads[i] = delta.matmul_t(input)?;
        bias_grads[i] = delta.row_sums();
        if i > 0 {
            let mut back = params.weights[i].t_matmul(&delta)?;
            for (b, s) in back.data_mut().iter_mut().zip(trace.activations[i - 1].data()) {
                *b *= s * (1.0 - s);
            }
            delta = back;
        }
    }

    let mut values = Vec::with_capacity(params.num_params());
    for m in weight_grads.iter().chain(&bias_grads) {
        values.extend_from_slice(m.data());
    }
    FlatGrads::new(values, params.layout())
}

/// Loss and gradient for one batch.
pub fn loss_and_grad(params: &ParamSet, batch: &Matrix, labels: &LabelBatch) -> Result<(f64, FlatGrads)> {
    let trace = forward(params, batch)?;
    let loss = cross_entropy_loss(&trace, labels)?;
    let grads = backward(params, &trace, labels)?;
    Ok((loss, grads))
}

/// Index of the largest entry of each column; ties go to the lowest index.
pub fn argmax_columns(m: &Matrix) -> Vec<usize> {
    (0..m.cols())
        .map(|c| {
            let mut best = 0;
            for r in 1..m.rows() {
                if m.get(r, c) > m.get(best, c) {
                    best = r;
                }
            }
            best
        })
        .collect()
}

/// Predicted class for each column of `images`.
pub fn predict(params: &ParamSet, images: &Matrix) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(images.cols());
    let mut start = 0;
    while start < images.cols() {
        let end = (start + EVAL_CHUNK).min(images.cols());
        let chunk = if start == 0 && end == images.cols() {
            forward(params, images)?
        } else {
            forward(params, &images.column_range(start, end))?
        };
        out.extend(argmax_columns(&chunk.probs));
        start = end;
    }
    Ok(out)
}

/// Fraction of samples whose argmax prediction equals the label.
pub fn accuracy(params: &ParamSet, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::invalid(format!("dataset {} is empty", data.name)));
    }
    let predicted = predict(params, &data.images)?;
    let correct = predicted
        .iter()
        .zip(&data.labels)
        .filter(|(p, &l)| **p == l as usize)
        .count();
    Ok(correct as f64 / data.len() as f64)
}
