//! Baseline optimizers in their standard published forms.
//!
//! With t the step count after increment, g the gradient and all operations
//! elementwise:
//!
//! - **SGD**: θ ← θ − α g
//! - **Adagrad**: a ← a + g², θ ← θ − α g / (√a + ε), with a₀ = the initial
//!   accumulator value (0.1 by default).
//! - **Adam**: m ← β₁m + (1−β₁)g, v ← β₂v + (1−β₂)g²,
//!   m̂ = m/(1−β₁ᵗ), v̂ = v/(1−β₂ᵗ), θ ← θ − α m̂ / (√v̂ + ε).
//! - **Adamax**: m ← β₁m + (1−β₁)g, u ← max(β₂u, |g|),
//!   θ ← θ − (α/(1−β₁ᵗ)) m / (u + ε). The ε keeps the first step finite
//!   for coordinates whose gradient is exactly 0.
//! - **Nadam** (Dozat): momentum schedule μₜ = β₁(1 − ½·0.96^(t/250)),
//!   ĝ = g/(1 − ∏ᵢ≤ₜ μᵢ), m ← β₁m + (1−β₁)g, m̂ = m/(1 − ∏ᵢ≤ₜ₊₁ μᵢ),
//!   v ← β₂v + (1−β₂)g², v̂ = v/(1−β₂ᵗ),
//!   m̄ = (1−μₜ)ĝ + μₜ₊₁m̂, θ ← θ − α m̄ / (√v̂ + ε).
//! - **RMSprop**: v ← ρv + (1−ρ)g², θ ← θ − α g / (√v + ε), v₀ = 0.

use super::{check_inputs, FlatGrads, FlatParams, Method, OptimizerState};
use crate::error::Result;

fn buffer(slot: &mut Option<Vec<f64>>, len: usize, fill: f64) -> &mut Vec<f64> {
    slot.get_or_insert_with(|| vec![fill; len])
}

fn begin(state: &mut OptimizerState, method: Method, params: &FlatParams, grads: &FlatGrads) -> Result<()> {
    state.expect_method(method)?;
    check_inputs(params, grads)?;
    state.step_count += 1;
    Ok(())
}

pub fn sgd_step(state: &mut OptimizerState, params: &mut FlatParams, grads: &FlatGrads) -> Result<()> {
    begin(state, Method::Sgd, params, grads)?;
    let alpha = state.hyper.alpha;
    for (p, g) in params.values_mut().iter_mut().zip(grads.values()) {
        *p -= alpha * g;
    }
    Ok(())
}

pub fn adagrad_step(state: &mut OptimizerState, params: &mut FlatParams, grads: &FlatGrads) -> Result<()> {
    begin(state, Method::Adagrad, params, grads)?;
    let h = state.hyper;
    let acc = buffer(&mut state.accumulator, grads.len(), h.initial_accumulator);
    for ((p, g), a) in params.values_mut().iter_mut().zip(grads.values()).zip(acc.iter_mut()) {
        *a += g * g;
        *p -= h.alpha * g / (a.sqrt() + h.epsilon);
    }
    Ok(())
}

pub fn adam_step(state: &mut OptimizerState, params: &mut FlatParams, grads: &FlatGrads) -> Result<()> {
    begin(state, Method::Adam, params, grads)?;
    let h = state.hyper;
    let t = state.step_count as i32;
    let c1 = 1.0 - h.beta1.powi(t);
    let c2 = 1.0 - h.beta2.powi(t);
    let n = grads.len();
    let m = buffer(&mut state.moment1, n, 0.0);
    let v = buffer(&mut state.moment2, n, 0.0);
    for (((p, g), m), v) in params
        .values_mut()
        .iter_mut()
        .zip(grads.values())
        .zip(m.iter_mut())
        .zip(v.iter_mut())
    {
        *m = h.beta1 * *m + (1.0 - h.beta1) * g;
        *v = h.beta2 * *v + (1.0 - h.beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= h.alpha * m_hat / (v_hat.sqrt() + h.epsilon);
    }
    Ok(())
}

pub fn adamax_step(state: &mut OptimizerState, params: &mut FlatParams, grads: &FlatGrads) -> Result<()> {
    begin(state, Method::Adamax, params, grads)?;
    let h = state.hyper;
    let t = state.step_count as i32;
    let lr = h.alpha / (1.0 - h.beta1.powi(t));
    let n = grads.len();
    let m = buffer(&mut state.moment1, n, 0.0);
    let u = buffer(&mut state.moment2, n, 0.0);
    for (((p, g), m), u) in params
        .values_mut()
        .iter_mut()
        .zip(grads.values())
        .zip(m.iter_mut())
        .zip(u.iter_mut())
    {
        *m = h.beta1 * *m + (1.0 - h.beta1) * g;
        *u = (h.beta2 * *u).max(g.abs());
        *p -= lr * *m / (*u + h.epsilon);
    }
    Ok(())
}

/// Nadam momentum schedule μₜ.
pub(crate) fn nadam_mu(beta1: f64, t: u64) -> f64 {
    beta1 * (1.0 - 0.5 * 0.96_f64.powf(t as f64 / 250.0))
}

pub fn nadam_step(state: &mut OptimizerState, params: &mut FlatParams, grads: &FlatGrads) -> Result<()> {
    begin(state, Method::Nadam, params, grads)?;
    let h = state.hyper;
    let t = state.step_count;
    let mu_t = nadam_mu(h.beta1, t);
    let mu_next = nadam_mu(h.beta1, t + 1);
    let prod_t = state.mu_product * mu_t;
    let prod_next = prod_t * mu_next;
    state.mu_product = prod_t;
    let c2 = 1.0 - h.beta2.powi(t as i32);
    let n = grads.len();
    let m = buffer(&mut state.moment1, n, 0.0);
    let v = buffer(&mut state.moment2, n, 0.0);
    for (((p, g), m), v) in params
        .values_mut()
        .iter_mut()
        .zip(grads.values())
        .zip(m.iter_mut())
        .zip(v.iter_mut())
    {
        let g_hat = g / (1.0 - prod_t);
        *m = h.beta1 * *m + (1.0 - h.beta1) * g;
        let m_hat = *m / (1.0 - prod_next);
        *v = h.beta2 * *v + (1.0 - h.beta2) * g * g;
        let v_hat = *v / c2;
        let m_bar = (1.0 - mu_t) * g_hat + mu_next * m_hat;
        *p -= h.alpha * m_bar / (v_hat.sqrt() + h.epsilon);
    }
    Ok(())
}

pub fn rmsprop_step(state: &mut OptimizerState, params: &mut FlatParams, grads: &FlatGrads) -> Result<()> {
    begin(state, Method::Rmsprop, params, grads)?;
    let h = state.hyper;
    let v = buffer(&mut state.moment2, grads.len(), 0.0);
    for ((p, g), v) in params.values_mut().iter_mut().zip(grads.values()).zip(v.iter_mut()) {
        *v = h.rho * *v + (1.0 - h.rho) * g * g;
        *p -= h.alpha * g / (v.sqrt() + h.epsilon);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    fn g(v: &[f64]) -> FlatGrads {
        FlatGrads::from_slice(v)
    }

    fn p(v: &[f64]) -> FlatParams {
        FlatParams::from_slice(v)
    }

    #[test]
    fn sgd_examples() {
        let mut s = OptimizerState::sgd(0.001);
        let mut x = p(&[1.0]);
        sgd_step(&mut s, &mut x, &g(&[1.0])).unwrap();
        assert_eq!(x.values(), &[0.999]);

        let mut x = p(&[1.0, 2.0]);
        sgd_step(&mut s, &mut x, &g(&[0.0, 0.0])).unwrap();
        assert_eq!(x.values(), &[1.0, 2.0]);

        // α = 1 is the plain x − f'(x) rule; f(x) = x², x = 3.
        let mut s = OptimizerState::sgd(1.0);
        let mut x = p(&[3.0]);
        sgd_step(&mut s, &mut x, &g(&[6.0])).unwrap();
        assert_eq!(x.values(), &[-3.0]);
    }

    #[test]
    fn adam_first_step_moves_by_alpha() {
        let mut s = OptimizerState::adam(0.001);
        let mut x = p(&[0.0]);
        adam_step(&mut s, &mut x, &g(&[1.0])).unwrap();
        let expected = -0.001 / (1.0 + 1e-7);
        assert!((x.values()[0] - expected).abs() < 1e-18);
    }

    #[test]
    fn adagrad_first_step() {
        let mut s = OptimizerState::adagrad(0.1);
        let mut x = p(&[0.0]);
        adagrad_step(&mut s, &mut x, &g(&[1.0])).unwrap();
        let acc = s.accumulator.as_ref().unwrap()[0];
        assert!((acc - 1.1).abs() < 1e-15);
        let expected = -0.1 / (1.1_f64.sqrt() + 1e-7);
        assert!((x.values()[0] - expected).abs() < 1e-16);
    }

    #[test]
    fn rmsprop_zero_gradient_decays_accumulator() {
        let mut s = OptimizerState::rmsprop(0.001);
        s.moment2 = Some(vec![2.0]);
        let mut x = p(&[0.5]);
        rmsprop_step(&mut s, &mut x, &g(&[0.0])).unwrap();
        assert_eq!(x.values(), &[0.5]);
        assert!((s.moment2.as_ref().unwrap()[0] - 1.8).abs() < 1e-15);
    }

    #[test]
    fn adamax_zero_gradient_is_finite() {
        let mut s = OptimizerState::adamax(0.001);
        let mut x = p(&[1.0, 1.0]);
        adamax_step(&mut s, &mut x, &g(&[0.0, 2.0])).unwrap();
        assert_eq!(x.values()[0], 1.0);
        assert!(x.values()[1] < 1.0);
    }

    #[test]
    fn nadam_mu_schedule() {
        assert!((nadam_mu(0.9, 250) - 0.9 * (1.0 - 0.5 * 0.96)).abs() < 1e-15);
        assert!((nadam_mu(0.9, 0) - 0.45).abs() < 1e-15);
    }

    #[test]
    fn nonfinite_gradient_rejected() {
        type StepFn = fn(&mut OptimizerState, &mut FlatParams, &FlatGrads) -> Result<()>;
        let steps: [StepFn; 6] =
            [sgd_step, adagrad_step, adam_step, adamax_step, nadam_step, rmsprop_step];
        let methods = [
            Method::Sgd,
            Method::Adagrad,
            Method::Adam,
            Method::Adamax,
            Method::Nadam,
            Method::Rmsprop,
        ];
        for (step, m) in steps.into_iter().zip(methods) {
            let mut s = OptimizerState::default_for(m);
            let mut x = p(&[1.0]);
            let r = step(&mut s, &mut x, &g(&[f64::INFINITY]));
            assert!(matches!(r, Err(Error::InvalidInput(_))), "{m}");
            assert_eq!(s.step_count, 0);
            assert_eq!(x.values(), &[1.0]);
        }
    }
}
