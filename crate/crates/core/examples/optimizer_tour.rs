// Every optimizer on the same 3-D quadratic bowl.
//
// ```text
// cargo run --example optimizer_tour
// ```

use gravilon::optim::{FlatGrads, FlatParams, Method, OptimizerState};
use gravilon::testbed::{run_descent, Objective};

pub fn run(steps: usize) -> gravilon::Result<()> {
    let bowl = Objective::Quadratic {
        center: vec![1.0, -2.0, 0.5],
    };
    let start = [3.0, 0.0, -1.0];
    println!("{:<12} {:>14} {:>14}", "method", "f(start)", format!("f({steps} steps)"));
    for method in Method::ALL {
        let mut state = match method {
            // undamped and unscaled so it stays comparable to plain Gravilon
            Method::GravilonM => OptimizerState::gravilon_momentum(0.5, 0.0, 1.0),
            m => OptimizerState::default_for(m),
        };
        let traj = run_descent(&bowl, &mut state, &start, steps, 0.0)?;
        println!("{:<12} {:>14.6e} {:>14.6e}", method.name(), traj.values[0], traj.last_value());
    }

    // the state carries moments between calls
    let mut adam = OptimizerState::adam(0.001);
    let mut theta = FlatParams::from_slice(&[1.5]);
    for g in [0.8, -0.3] {
        let coef = adam.step(&mut theta, &FlatGrads::from_slice(&[g]), 0.0)?;
        println!("adam step {}: theta = {:.12}, |dtheta|/|g| = {coef:.6e}", adam.step_count, theta.values()[0]);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> gravilon::Result<()> {
    run(100)
}
