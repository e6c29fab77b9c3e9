//! Analytic objectives with minima at height 0, and descent runs over them.
//!
//! These make the geometric behavior of the Gravilon step checkable without
//! any data: one step solves an affine function, and on |x − x*|² every step
//! halves the distance to x*. No gradient clipping is applied here.

use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

use crate::error::{Error, Result};
use crate::optim::{FlatGrads, FlatParams, OptimizerState};

/// Nonnegative test function with known minimum value 0.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// f(x) = |m·x − k|. The gradient at the root is taken to be 0.
    AbsAffine { slope: Vec<f64>, offset: f64 },
    /// f(x) = |x − x*|².
    Quadratic { center: Vec<f64> },
    /// f(x, y) = (1 − x)² + 100 (y − x²)², minimized at (1, 1).
    Rosenbrock,
}

impl Objective {
    /// f(x) = |3x − 6|, root at x = 2.
    pub fn abs_affine_1d() -> Self {
        Objective::AbsAffine {
            slope: vec![3.0],
            offset: 6.0,
        }
    }

    /// |x|² in `dim` dimensions.
    pub fn quadratic(dim: usize) -> Self {
        Objective::Quadratic {
            center: vec![0.0; dim],
        }
    }

    /// Looks up a builtin by name, sized to `arity` where that is free.
    ///
    /// `affine` uses slope 3 in every coordinate and offset 6; `quadratic`
    /// is centered at the origin; `rosenbrock` is always 2-D.
    pub fn by_name(name: &str, arity: usize) -> Option<Self> {
        match name {
            "affine" | "abs-affine" => Some(Objective::AbsAffine {
                slope: vec![3.0; arity],
                offset: 6.0,
            }),
            "quadratic" => Some(Objective::quadratic(arity)),
            "rosenbrock" => Some(Objective::Rosenbrock),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Objective::AbsAffine { .. } => "affine",
            Objective::Quadratic { .. } => "quadratic",
            Objective::Rosenbrock => "rosenbrock",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Objective::AbsAffine { slope, .. } => slope.len(),
            Objective::Quadratic { center } => center.len(),
            Objective::Rosenbrock => 2,
        }
    }

    pub fn min_value(&self) -> f64 {
        0.0
    }

    /// The minimizer when it is a single point.
    pub fn minimizer(&self) -> Option<Vec<f64>> {
        match self {
            Objective::AbsAffine { slope, offset } if slope.len() == 1 && slope[0] != 0.0 => {
                Some(vec![offset / slope[0]])
            }
            Objective::AbsAffine { .. } => None,
            Objective::Quadratic { center } => Some(center.clone()),
            Objective::Rosenbrock => Some(vec![1.0, 1.0]),
        }
    }

    fn check_arity(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.arity() {
            return Err(Error::contract(format!(
                "{} takes {} coordinates, got {}",
                self.name(),
                self.arity(),
                x.len()
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_arity(x)?;
        Ok(match self {
            Objective::AbsAffine { slope, offset } => (dot(slope, x) - offset).abs(),
            Objective::Quadratic { center } => x
                .iter()
                .zip(center)
                .map(|(a, c)| (a - c) * (a - c))
                .sum(),
            Objective::Rosenbrock => {
                let (a, b) = (x[0], x[1]);
                (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
            }
        })
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_arity(x)?;
        Ok(match self {
            Objective::AbsAffine { slope, offset } => {
                let r = dot(slope, x) - offset;
                let s = if r > 0.0 {
                    1.0
                } else if r < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                slope.iter().map(|m| s * m).collect()
            }
            Objective::Quadratic { center } => {
                x.iter().zip(center).map(|(a, c)| 2.0 * (a - c)).collect()
            }
            Objective::Rosenbrock => {
                let (a, b) = (x[0], x[1]);
                let inner = b - a * a;
                vec![-2.0 * (1.0 - a) - 400.0 * a * inner, 200.0 * inner]
            }
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The catalog: 1-D affine |3x − 6|, 1-D and 3-D quadratics, Rosenbrock.
pub fn builtin_objectives() -> Vec<Objective> {
    vec![
        Objective::abs_affine_1d(),
        Objective::quadratic(1),
        Objective::Quadratic {
            center: vec![1.0, -2.0, 0.5],
        },
        Objective::Rosenbrock,
    ]
}

/// Iterates and objective values of one descent run.
///
/// `betas[t]` is the step coefficient used to move from `points[t]` to
/// `points[t + 1]`, so `values` is one longer than `betas`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub betas: Vec<f64>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.betas.len()
    }

    pub fn last_value(&self) -> f64 {
        *self.values.last().expect("trajectory holds the start point")
    }

    /// First step index t at which f(t+1) > f(t).
    pub fn first_increase(&self) -> Option<usize> {
        self.values.windows(2).position(|w| w[1] > w[0])
    }

    /// Writes `step,f,beta,x0..x{n-1}`. The final row has an empty beta.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let dim = self.points.first().map_or(0, Vec::len);
        write!(out, "step,f,beta")?;
        for i in 0..dim {
            write!(out, ",x{i}")?;
        }
        writeln!(out)?;
        for (t, (x, f)) in self.points.iter().zip(&self.values).enumerate() {
            write!(out, "{t},{f:e},")?;
            if let Some(b) = self.betas.get(t) {
                write!(out, "{b:e}")?;
            }
            for v in x {
                write!(out, ",{v:e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// A descent run that produced a non-finite value.
#[derive(Debug, Error)]
pub struct Diverged {
    pub step: usize,
    pub detail: String,
    pub partial: Trajectory,
}

impl fmt::Display for Diverged {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "descent diverged at step {}: {}", self.step, self.detail)
    }
}

impl From<Diverged> for Error {
    fn from(d: Diverged) -> Self {
        Error::Diverged {
            step: d.step,
            detail: d.detail,
        }
    }
}

/// Runs `state`'s method on `objective` from `x0` with exact values and
/// gradients, stopping once f < `stop_tol` or after `max_steps` updates.
pub fn run_descent(
    objective: &Objective,
    state: &mut OptimizerState,
    x0: &[f64],
    max_steps: usize,
    stop_tol: f64,
) -> std::result::Result<Trajectory, Diverged> {
    let mut traj = Trajectory::default();
    let fail = |traj: Trajectory, step: usize, detail: String| Diverged {
        step,
        detail,
        partial: traj,
    };
    if max_steps == 0 {
        return Err(fail(traj, 0, "max_steps must be at least 1".into()));
    }
    let mut f = match objective.eval(x0) {
        Ok(f) if f.is_finite() => f,
        Ok(f) => return Err(fail(traj, 0, format!("f(x0) = {f}"))),
        Err(e) => return Err(fail(traj, 0, e.to_string())),
    };
    let mut params = FlatParams::from_slice(x0);
    traj.points.push(x0.to_vec());
    traj.values.push(f);

    for step in 0..max_steps {
        if f < stop_tol {
            break;
        }
        let g = objective
            .grad(params.values())
            .expect("arity checked at x0");
        if g.iter().any(|v| !v.is_finite()) {
            return Err(fail(traj, step, "non-finite gradient".into()));
        }
        let grads = FlatGrads::new(g, params.layout().clone()).expect("same length");
        let beta = match state.step(&mut params, &grads, f) {
            Ok(b) => b,
            Err(e) => return Err(fail(traj, step, e.to_string())),
        };
        f = objective.eval(params.values()).expect("arity unchanged");
        if !f.is_finite() || !params.is_finite() {
            return Err(fail(traj, step + 1, format!("f = {f}")));
        }
        traj.betas.push(beta);
        traj.points.push(params.values().to_vec());
        traj.values.push(f);
    }
    Ok(traj)
}

/// Per-step decay ratio exp(slope) from a least-squares fit of ln f_t on t.
pub fn geometric_rate(traj: &Trajectory) -> Result<f64> {
    let n = traj.values.len();
    if n < 5 {
        return Err(Error::UndefinedRate(format!(
            "need at least 5 values, have {n}"
        )));
    }
    if let Some(t) = traj.values.iter().position(|&v| v <= 0.0 || v.is_nan()) {
        return Err(Error::UndefinedRate(format!(
            "value at step {t} is {} (must be positive)",
            traj.values[t]
        )));
    }
    let logs: Vec<f64> = traj.values.iter().map(|v| v.ln()).collect();
    let t_mean = (n - 1) as f64 / 2.0;
    let l_mean = logs.iter().sum::<f64>() / n as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for (t, l) in logs.iter().enumerate() {
        let dt = t as f64 - t_mean;
        num += dt * (l - l_mean);
        den += dt * dt;
    }
    Ok((num / den).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(Objective::quadratic(2).eval(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(Objective::Rosenbrock.eval(&[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(Objective::Rosenbrock.eval(&[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(Objective::abs_affine_1d().eval(&[5.0]).unwrap(), 9.0);
        assert_eq!(Objective::abs_affine_1d().grad(&[2.0]).unwrap(), vec![0.0]);
        assert_eq!(Objective::abs_affine_1d().grad(&[0.0]).unwrap(), vec![-3.0]);
        assert!(Objective::Rosenbrock.eval(&[1.0]).is_err());
    }

    #[test]
    fn gravilon_halves_on_quadratic() {
        let mut s = OptimizerState::gravilon();
        let t = run_descent(&Objective::quadratic(1), &mut s, &[1.0], 5, 0.0).unwrap();
        let xs: Vec<f64> = t.points.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]);
        assert_eq!(t.values.len(), t.betas.len() + 1);
        assert!(t.betas.iter().all(|&b| b == 0.25));
    }

    #[test]
    fn gravilon_solves_affine_in_one_step() {
        let mut s = OptimizerState::gravilon();
        let t = run_descent(&Objective::abs_affine_1d(), &mut s, &[5.0], 10, 1e-300).unwrap();
        assert_eq!(t.steps(), 1);
        assert_eq!(t.last_value(), 0.0);
        assert_eq!(t.points[1], vec![2.0]);
    }

    #[test]
    fn root_is_a_fixed_point() {
        let mut s = OptimizerState::gravilon();
        let t = run_descent(&Objective::abs_affine_1d(), &mut s, &[5.0], 4, 0.0).unwrap();
        assert_eq!(t.steps(), 4);
        assert!(t.points[1..].iter().all(|p| p == &vec![2.0]));
    }

    #[test]
    fn sgd_first_step_on_quadratic() {
        let mut s = OptimizerState::sgd(0.001);
        let t = run_descent(&Objective::quadratic(1), &mut s, &[1.0], 1, 0.0).unwrap();
        assert!((t.points[1][0] - 0.998).abs() < 1e-15);
    }

    #[test]
    fn rates() {
        let mut s = OptimizerState::gravilon();
        let t = run_descent(&Objective::quadratic(1), &mut s, &[1.0], 20, 0.0).unwrap();
        assert!((geometric_rate(&t).unwrap() - 0.25).abs() < 1e-9);

        let flat = Trajectory {
            points: vec![vec![0.0]; 6],
            values: vec![3.0; 6],
            betas: vec![0.0; 5],
        };
        assert!((geometric_rate(&flat).unwrap() - 1.0).abs() < 1e-15);

        let mut s = OptimizerState::sgd(0.001);
        let t = run_descent(&Objective::quadratic(1), &mut s, &[1.0], 50, 0.0).unwrap();
        assert!((geometric_rate(&t).unwrap() - 0.998f64.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn rate_errors() {
        let short = Trajectory {
            points: vec![vec![0.0]; 3],
            values: vec![1.0; 3],
            betas: vec![0.0; 2],
        };
        assert!(matches!(geometric_rate(&short), Err(Error::UndefinedRate(_))));
        let zero = Trajectory {
            points: vec![vec![0.0]; 6],
            values: vec![1.0, 0.5, 0.0, 0.1, 0.1, 0.1],
            betas: vec![0.0; 5],
        };
        assert!(matches!(geometric_rate(&zero), Err(Error::UndefinedRate(_))));
    }

    #[test]
    fn divergence_keeps_partial_trajectory() {
        let mut s = OptimizerState::sgd(1e200);
        let err = run_descent(&Objective::quadratic(1), &mut s, &[1.0], 10, 0.0).unwrap_err();
        assert!(err.step >= 1);
        assert!(!err.partial.points.is_empty());
        assert!(err.partial.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn csv_export() {
        let mut s = OptimizerState::gravilon();
        let t = run_descent(&Objective::quadratic(2), &mut s, &[1.0, 2.0], 2, 0.0).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,f,beta,x0,x1");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "0,5e0,2.5e-1,1e0,2e0");
        assert!(lines[3].starts_with("2,") && lines[3].contains(",,"));
    }
}
