//! Central finite-difference verification of [`backward`](super::backward).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    cross_entropy_loss, forward, loss_and_grad, sigmoid_scalar, ForwardTrace, LabelBatch, Matrix,
    ParamSet, PROB_FLOOR,
};
use crate::error::{Error, Result};
use crate::optim::FlatGrads;

/// Below this magnitude the relative error falls back to the absolute difference.
pub const ABS_FALLBACK: f64 = 1e-8;

/// Result of comparing analytic and numeric partial derivatives.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Flat index with the largest discrepancy.
    pub worst_index: usize,
    /// `(flat index, analytic, numeric)` for every checked coordinate.
    pub entries: Vec<(usize, f64, f64)>,
}

/// |a − n| / max(|a|, |n|), or |a − n| when both are below [`ABS_FALLBACK`].
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    let scale = analytic.abs().max(numeric.abs());
    if scale < ABS_FALLBACK {
        diff
    } else {
        diff / scale
    }
}

/// `count` distinct flat indices in `0..n`, sorted.
pub fn sample_coordinates(n: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n, count.min(n)).into_vec();
    idx.sort_unstable();
    idx
}

/// (L(θ + εeᵢ) − L(θ − εeᵢ)) / 2ε for flat coordinate `index`.
///
/// Both loss differences L(θ ± εeᵢ) − L(θ) are evaluated by pushing the
/// perturbation through the network in difference form (expm1/ln1p), so the
/// quotient does not lose digits to cancellation between two nearly equal
/// losses. When a true-label probability sits near the clamp the plain
/// two-evaluation quotient is used instead.
pub fn numeric_partial(
    params: &ParamSet,
    batch: &Matrix,
    labels: &LabelBatch,
    index: usize,
    epsilon: f64,
) -> Result<f64> {
    if index >= params.num_params() {
        return Err(Error::invalid(format!(
            "coordinate {index} out of range for {} parameters",
            params.num_params()
        )));
    }
    let base = forward(params, batch)?;
    if labels.len() != base.batch_size() {
        return Err(Error::contract("label count does not match batch"));
    }
    let near_clamp = labels
        .labels
        .iter()
        .enumerate()
        .any(|(j, &l)| base.probs.get(l as usize, j) < 1e3 * PROB_FLOOR);
    if near_clamp {
        return plain_partial(params, batch, labels, index, epsilon);
    }
    let plus = loss_shift(params, &base, labels, index, epsilon)?;
    let minus = loss_shift(params, &base, labels, index, -epsilon)?;
    Ok((plus - minus) / (2.0 * epsilon))
}

fn plain_partial(
    params: &ParamSet,
    batch: &Matrix,
    labels: &LabelBatch,
    index: usize,
    epsilon: f64,
) -> Result<f64> {
    let mut flat = params.to_flat();
    let original = flat.values()[index];
    let mut probe = params.clone();
    let mut loss_at = |value: f64| -> Result<f64> {
        flat.values_mut()[index] = value;
        probe.load_flat(&flat)?;
        cross_entropy_loss(&forward(&probe, batch)?, labels)
    };
    let plus = loss_at(original + epsilon)?;
    let minus = loss_at(original - epsilon)?;
    Ok((plus - minus) / (2.0 * epsilon))
}

/// Where a flat index lives: layer, output row, and input column (`None`
/// for a bias).
fn locate(params: &ParamSet, index: usize) -> (usize, usize, Option<usize>) {
    let mut rest = index;
    for (l, w) in params.weights.iter().enumerate() {
        let n = w.rows() * w.cols();
        if rest < n {
            return (l, rest / w.cols(), Some(rest % w.cols()));
        }
        rest -= n;
    }
    for (l, b) in params.biases.iter().enumerate() {
        if rest < b.rows() {
            return (l, rest, None);
        }
        rest -= b.rows();
    }
    unreachable!("index checked against num_params")
}

/// L(θ + h·eᵢ) − L(θ), computed from the base trace without subtracting losses.
fn loss_shift(
    params: &ParamSet,
    base: &ForwardTrace,
    labels: &LabelBatch,
    index: usize,
    h: f64,
) -> Result<f64> {
    let (layer, row, col) = locate(params, index);
    let n = base.batch_size();
    let layers = params.num_layers();
    let mut dz = Matrix::zeros(params.weights[layer].rows(), n);
    for j in 0..n {
        let shift = match col {
            Some(c) if layer == 0 => h * base.input.get(c, j),
            Some(c) => h * base.activations[layer - 1].get(c, j),
            None => h,
        };
        dz.set(row, j, shift);
    }
    for k in layer..layers - 1 {
        let z = &base.pre_activations[k];
        // σ(z + d) − σ(z) = −σ(z + d)·σ(−z)·expm1(−d)
        let da = Matrix::from_fn(z.rows(), n, |r, j| {
            let (zr, d) = (z.get(r, j), dz.get(r, j));
            -sigmoid_scalar(zr + d) * sigmoid_scalar(-zr) * (-d).exp_m1()
        });
        dz = params.weights[k + 1].matmul(&da)?;
    }
    // per sample: ln Σ p·e^{dz} − dz[label] = ln1p(Σ p·expm1(dz)) − dz[label]
    let total: f64 = labels
        .labels
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let s: f64 = (0..dz.rows())
                .map(|r| base.probs.get(r, j) * dz.get(r, j).exp_m1())
                .sum();
            s.ln_1p() - dz.get(l as usize, j)
        })
        .sum();
    Ok(total / n as f64)
}

/// Checks `analytic` against finite differences on the given coordinates.
pub fn grad_check_against(
    params: &ParamSet,
    batch: &Matrix,
    labels: &LabelBatch,
    analytic: &FlatGrads,
    coords: &[usize],
    epsilon: f64,
) -> Result<GradCheckReport> {
    if !(1e-7..=1e-3).contains(&epsilon) {
        return Err(Error::invalid(format!(
            "finite-difference step {epsilon} outside [1e-7, 1e-3]"
        )));
    }
    if analytic.len() != params.num_params() {
        return Err(Error::contract("gradient length does not match parameters"));
    }
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_index: coords.first().copied().unwrap_or(0),
        entries: Vec::with_capacity(coords.len()),
    };
    for &i in coords {
        let a = analytic.values()[i];
        let n = numeric_partial(params, batch, labels, i, epsilon)?;
        let err = relative_error(a, n);
        if err > report.max_rel_error {
            report.max_rel_error = err;
            report.worst_index = i;
        }
        report.entries.push((i, a, n));
    }
    Ok(report)
}

/// Runs backpropagation and compares it against finite differences on
/// `samples` seeded random coordinates.
pub fn grad_check(
    params: &ParamSet,
    batch: &Matrix,
    labels: &LabelBatch,
    epsilon: f64,
    samples: usize,
    seed: u64,
) -> Result<GradCheckReport> {
    let (_, grads) = loss_and_grad(params, batch, labels)?;
    let coords = sample_coordinates(params.num_params(), samples, seed);
    grad_check_against(params, batch, labels, &grads, &coords, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::init_params_for;

    fn tiny() -> (ParamSet, Matrix, LabelBatch) {
        let p = init_params_for(&[6, 5, 4, 3], 9).unwrap();
        let x = Matrix::from_fn(6, 4, |r, c| ((r * 4 + c) as f64 * 0.61).sin().abs());
        let y = LabelBatch::new(&[0, 2, 1, 2], 3).unwrap();
        (p, x, y)
    }

    #[test]
    fn every_coordinate_of_small_net_agrees() {
        let (p, x, y) = tiny();
        let all: Vec<usize> = (0..p.num_params()).collect();
        let (_, g) = loss_and_grad(&p, &x, &y).unwrap();
        let r = grad_check_against(&p, &x, &y, &g, &all, 1e-5).unwrap();
        assert!(r.max_rel_error < 1e-6, "{}", r.max_rel_error);
    }

    #[test]
    fn doubled_entry_is_caught() {
        let (p, x, y) = tiny();
        let (_, mut g) = loss_and_grad(&p, &x, &y).unwrap();
        let coords = sample_coordinates(p.num_params(), 10, 3);
        g.values_mut()[coords[4]] *= 2.0;
        let r = grad_check_against(&p, &x, &y, &g, &coords, 1e-5).unwrap();
        assert!(r.max_rel_error > 1e-2);
        assert_eq!(r.worst_index, coords[4]);
    }

    #[test]
    fn difference_form_matches_plain_quotient() {
        let (p, x, y) = tiny();
        for i in [0, 7, 29, 50, p.num_params() - 1] {
            let a = numeric_partial(&p, &x, &y, i, 1e-4).unwrap();
            let b = plain_partial(&p, &x, &y, i, 1e-4).unwrap();
            assert!((a - b).abs() < 1e-10, "{i}: {a} vs {b}");
        }
    }

    #[test]
    fn relative_error_fallback() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert!((relative_error(1e-10, 3e-10) - 2e-10).abs() < 1e-24);
        assert!((relative_error(1.0, 1.5) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn epsilon_range_enforced() {
        let (p, x, y) = tiny();
        assert!(grad_check(&p, &x, &y, 1e-2, 5, 0).is_err());
        assert!(grad_check(&p, &x, &y, 1e-9, 5, 0).is_err());
    }

    #[test]
    fn coordinates_are_distinct_and_seeded() {
        let a = sample_coordinates(1000, 50, 1);
        assert_eq!(a, sample_coordinates(1000, 50, 1));
        let mut d = a.clone();
        d.dedup();
        assert_eq!(d.len(), 50);
        assert_eq!(sample_coordinates(5, 50, 1), vec![0, 1, 2, 3, 4]);
    }
}
