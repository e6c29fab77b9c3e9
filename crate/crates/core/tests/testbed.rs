use gravilon::optim::OptimizerState;
use gravilon::testbed::{builtin_objectives, geometric_rate, run_descent, Objective};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn central_difference(obj: &Objective, x: &[f64], i: usize, h: f64) -> f64 {
    let mut up = x.to_vec();
    let mut down = x.to_vec();
    up[i] += h;
    down[i] -= h;
    (obj.eval(&up).unwrap() - obj.eval(&down).unwrap()) / (2.0 * h)
}

#[test]
fn builtin_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for obj in builtin_objectives() {
        let mut checked = 0;
        while checked < 100 {
            let x: Vec<f64> = (0..obj.arity()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            // keep the difference stencil off the kink of |m·x − k|
            if let Objective::AbsAffine { .. } = obj {
                if obj.eval(&x).unwrap() < 1e-3 {
                    continue;
                }
            }
            let g = obj.grad(&x).unwrap();
            for (i, &gi) in g.iter().enumerate() {
                let n = central_difference(&obj, &x, i, 1e-5);
                let err = (gi - n).abs() / gi.abs().max(n.abs()).max(1e-8);
                assert!(err <= 1e-6, "{} at {x:?}, coord {i}: {gi} vs {n}", obj.name());
            }
            checked += 1;
        }
    }
}

#[test]
fn values_are_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for obj in builtin_objectives() {
        for _ in 0..200 {
            let x: Vec<f64> = (0..obj.arity()).map(|_| rng.gen_range(-50.0..50.0)).collect();
            assert!(obj.eval(&x).unwrap() >= 0.0);
        }
        if let Some(m) = obj.minimizer() {
            assert_eq!(obj.eval(&m).unwrap(), 0.0);
        }
    }
}

#[test]
fn sgd_on_quadratic_is_linear_iteration() {
    let mut s = OptimizerState::sgd(0.001);
    let t = run_descent(&Objective::quadratic(1), &mut s, &[1.0], 50, 0.0).unwrap();
    assert!((t.points[1][0] - 0.998).abs() < 1e-15);
    let rate = geometric_rate(&t).unwrap();
    assert!((rate - 0.998f64.powi(2)).abs() < 1e-9, "{rate}");
}

#[test]
fn constant_trajectory_has_unit_rate() {
    let mut s = OptimizerState::sgd(0.0);
    let t = run_descent(&Objective::quadratic(2), &mut s, &[1.0, 1.0], 8, 0.0).unwrap();
    assert!((geometric_rate(&t).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn rosenbrock_descent_diagnostic() {
    let mut s = OptimizerState::gravilon();
    let t = run_descent(&Objective::Rosenbrock, &mut s, &[-1.2, 1.0], 1000, 0.0).unwrap();
    assert_eq!(t.steps(), 1000);
    assert!(t.values.iter().all(|v| v.is_finite() && *v >= 0.0));
    match t.first_increase() {
        None => println!("rosenbrock: f non-increasing over 1000 steps, final {:e}", t.last_value()),
        Some(k) => println!(
            "rosenbrock: first increase at step {k} ({:e} -> {:e}), final {:e}",
            t.values[k],
            t.values[k + 1],
            t.last_value()
        ),
    }
    assert!(t.last_value() < t.values[0]);
}

#[test]
fn divergence_keeps_the_partial_trajectory() {
    let mut s = OptimizerState::sgd(1e155);
    let err = run_descent(&Objective::quadratic(1), &mut s, &[1.0], 10, 0.0).unwrap_err();
    assert!(err.step >= 1);
    assert_eq!(err.partial.points.len(), err.step);
}

proptest! {
    #[test]
    fn gravilon_halves_distance_on_every_quadratic(
        center in prop::collection::vec(-5.0f64..5.0, 1..5),
        offset in prop::collection::vec(0.1f64..3.0, 5),
    ) {
        let obj = Objective::Quadratic { center: center.clone() };
        let x0: Vec<f64> = center.iter().zip(&offset).map(|(c, o)| c + o).collect();
        let mut s = OptimizerState::gravilon();
        let t = run_descent(&obj, &mut s, &x0, 20, 0.0).unwrap();
        let dist = |p: &[f64]| p.iter().zip(&center).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
        for w in t.points.windows(2) {
            let (d0, d1) = (dist(&w[0]), dist(&w[1]));
            prop_assert!((d1 - d0 / 2.0).abs() <= 1e-12 * d0.max(1.0), "{d0} -> {d1}");
        }
    }

    #[test]
    fn gravilon_solves_affine_in_one_step(
        slope in prop::collection::vec(0.5f64..4.0, 1..4),
        offset in -10.0f64..10.0,
        x0 in prop::collection::vec(-10.0f64..10.0, 4),
    ) {
        let obj = Objective::AbsAffine { slope: slope.clone(), offset };
        let x0 = &x0[..slope.len()];
        let f0 = obj.eval(x0).unwrap();
        prop_assume!(f0 > 1e-6);
        let mut s = OptimizerState::gravilon();
        let t = run_descent(&obj, &mut s, x0, 3, 0.0).unwrap();
        prop_assert!(t.values[1] <= 1e-12 * f0.max(1.0), "{:?}", t.values);
        prop_assert!(t.values[2..].iter().all(|&v| v <= 1e-12 * f0.max(1.0)));
    }
}
