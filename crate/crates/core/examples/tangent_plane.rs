// Geometry of the tangent-plane step on analytic objectives.
//
// ```text
// cargo run --example tangent_plane
// ```

use gravilon::optim::OptimizerState;
use gravilon::testbed::{geometric_rate, run_descent, Objective};

pub fn run(rosenbrock_steps: usize) -> gravilon::Result<()> {
    // |3x - 6| from x = 5: the tangent line hits zero at the root
    let mut state = OptimizerState::gravilon();
    let affine = run_descent(&Objective::abs_affine_1d(), &mut state, &[5.0], 3, 0.0)?;
    println!("affine: x = {:?}, f = {:?}", affine.points, affine.values);

    // |x|^2: every step halves x, so f quarters
    let mut state = OptimizerState::gravilon();
    let quad = run_descent(&Objective::quadratic(1), &mut state, &[1.0], 20, 0.0)?;
    let xs: Vec<f64> = quad.points.iter().take(6).map(|p| p[0]).collect();
    println!("quadratic: x = {xs:?} ...");
    println!("quadratic: fitted rate {:.12}", geometric_rate(&quad)?);

    // same start with a fixed learning rate
    let mut state = OptimizerState::sgd(0.001);
    let slow = run_descent(&Objective::quadratic(1), &mut state, &[1.0], 20, 0.0)?;
    println!("sgd(0.001): fitted rate {:.6}", geometric_rate(&slow)?);

    let mut state = OptimizerState::gravilon();
    let rosen = run_descent(&Objective::Rosenbrock, &mut state, &[-1.2, 1.0], rosenbrock_steps, 0.0)?;
    println!(
        "rosenbrock: f {:.3e} -> {:.3e} after {} steps, first increase at {:?}",
        rosen.values[0],
        rosen.last_value(),
        rosen.steps(),
        rosen.first_increase()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> gravilon::Result<()> {
    run(1000)
}
