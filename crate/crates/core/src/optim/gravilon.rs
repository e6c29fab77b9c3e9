//! The tangent-plane step.
//!
//! At a point a on the graph of f ≥ 0, the tangent hyperplane meets the
//! plane z = 0 along the negative gradient direction at distance
//! f(a)/|∇f(a)|, which gives the update
//!
//! ```text
//! a ← a − β ∇f(a),   β = f(a) / |∇f(a)|²
//! ```
//!
//! For an affine f this lands exactly on the zero set; for |x|² it halves x.

use super::{check_inputs, check_loss, FlatGrads, FlatParams, Method, OptimizerState};
use crate::error::Result;

/// Lower bound applied to |g|² in the β denominator.
///
/// Only a vanishing gradient reaches it, and then the move β·g is 0. Above
/// the floor β is the exact ratio at every scale.
pub const GRAD_FLOOR: f64 = 1e-300;

/// β = loss / max(|g|², [`GRAD_FLOOR`]), capped at `f64::MAX`; exactly 0
/// when `loss` is 0.
pub fn gravilon_beta(loss: f64, grads: &FlatGrads) -> Result<f64> {
    check_loss(loss)?;
    if !grads.is_finite() {
        return Err(crate::Error::invalid("gradient contains a non-finite entry"));
    }
    Ok(beta_from(loss, grads.norm_sq()))
}

fn beta_from(loss: f64, norm_sq: f64) -> f64 {
    if loss == 0.0 {
        0.0
    } else {
        (loss / norm_sq.max(GRAD_FLOOR)).min(f64::MAX)
    }
}

/// One Gravilon update, returning the new parameters.
pub fn gravilon_step(params: &FlatParams, grads: &FlatGrads, loss: f64) -> Result<FlatParams> {
    let mut next = params.clone();
    apply(&mut next, grads, loss)?;
    Ok(next)
}

pub(super) fn apply(params: &mut FlatParams, grads: &FlatGrads, loss: f64) -> Result<f64> {
    check_inputs(params, grads)?;
    let beta = gravilon_beta(loss, grads)?;
    for (p, g) in params.values_mut().iter_mut().zip(grads.values()) {
        *p -= beta * g;
    }
    Ok(beta)
}

/// Gravilon with heavy-ball momentum and L2 weight decay.
///
/// ```text
/// g' = g + λ θ
/// β  = s · loss / max(|g'|², floor)
/// v  ← μ v + g'
/// θ  ← θ − β v
/// ```
///
/// `loss` is the unregularized objective; the penalty only enters through g'.
/// Returns β.
pub fn gravilon_momentum_step(
    state: &mut OptimizerState,
    params: &mut FlatParams,
    grads: &FlatGrads,
    loss: f64,
) -> Result<f64> {
    state.expect_method(Method::GravilonM)?;
    check_inputs(params, grads)?;
    check_loss(loss)?;
    let h = state.hyper;

    let regularized: Vec<f64> = grads
        .values()
        .iter()
        .zip(params.values())
        .map(|(g, p)| g + h.weight_decay * p)
        .collect();
    let norm_sq: f64 = regularized.iter().map(|v| v * v).sum();
    let beta = h.beta_scale * beta_from(loss, norm_sq);

    let buf = state
        .momentum_buf
        .get_or_insert_with(|| vec![0.0; regularized.len()]);
    for ((b, g), p) in buf
        .iter_mut()
        .zip(&regularized)
        .zip(params.values_mut().iter_mut())
    {
        *b = h.momentum * *b + g;
        *p -= beta * *b;
    }
    state.step_count += 1;
    Ok(beta)
}
