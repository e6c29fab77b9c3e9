#![allow(dead_code)]

use std::path::PathBuf;

use gravilon::data::{TEST_IMAGES, TEST_LABELS, TRAIN_IMAGES, TRAIN_LABELS};
use gravilon::optim::{FlatGrads, FlatParams, Method, OptimizerState};

/// Directory with the four MNIST files: `$MNIST_DIR`, else `<workspace>/data/mnist`.
pub fn mnist_dir() -> Option<PathBuf> {
    let dir = std::env::var_os("MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"));
    let complete = [TRAIN_IMAGES, TRAIN_LABELS, TEST_IMAGES, TEST_LABELS]
        .iter()
        .all(|f| dir.join(f).is_file());
    complete.then_some(dir)
}

pub fn rel_err(actual: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        actual.abs()
    } else {
        ((actual - expected) / expected).abs()
    }
}

/// One scripted two-step run on a scalar parameter.
pub struct OracleCase {
    pub method: Method,
    pub expected: [f64; 2],
}

pub const THETA0: f64 = 1.5;
pub const GRADS: [f64; 2] = [0.8, -0.3];
pub const LOSSES: [f64; 2] = [2.0, 1.1];

/// Hand-derived parameter values after each of two steps, default
/// hyperparameters (α = 1e-3, β₁ = 0.9, β₂ = 0.999, ρ = 0.9, ε = 1e-7).
pub fn oracle_cases() -> Vec<OracleCase> {
    let eps = 1e-7;
    let (g1, g2) = (GRADS[0], GRADS[1]);
    let mut cases = Vec::new();

    // sgd
    cases.push(OracleCase {
        method: Method::Sgd,
        expected: [1.4992, 1.4995],
    });

    // adagrad, accumulator starts at 0.1: a = 0.74 then 0.83
    let t1 = 1.5 - 0.001 * 0.8 / (0.74f64.sqrt() + eps);
    let t2 = t1 + 0.001 * 0.3 / (0.83f64.sqrt() + eps);
    cases.push(OracleCase {
        method: Method::Adagrad,
        expected: [t1, t2],
    });

    // adam: m = 0.08, 0.042; v = 0.00064, 0.00072936
    let t1 = 1.5 - 0.001 * 0.8 / (0.8 + eps);
    let m_hat = 0.042 / 0.19;
    let v_hat: f64 = 0.00072936 / 0.001999;
    let t2 = t1 - 0.001 * m_hat / (v_hat.sqrt() + eps);
    cases.push(OracleCase {
        method: Method::Adam,
        expected: [t1, t2],
    });

    // adamax: u = 0.8, then max(0.999 * 0.8, 0.3) = 0.7992
    let t1 = 1.5 - (0.001 / 0.1) * 0.08 / (0.8 + eps);
    let t2 = t1 - (0.001 / 0.19) * 0.042 / (0.7992 + eps);
    cases.push(OracleCase {
        method: Method::Adamax,
        expected: [t1, t2],
    });

    // nadam with the 0.96^(t/250) momentum schedule
    let mu = |t: f64| 0.9 * (1.0 - 0.5 * 0.96f64.powf(t / 250.0));
    let (mu1, mu2, mu3) = (mu(1.0), mu(2.0), mu(3.0));
    let m_bar1 = (1.0 - mu1) * g1 / (1.0 - mu1) + mu2 * 0.08 / (1.0 - mu1 * mu2);
    let t1 = 1.5 - 0.001 * m_bar1 / (0.8 + eps);
    let m_bar2 = (1.0 - mu2) * g2 / (1.0 - mu1 * mu2) + mu3 * 0.042 / (1.0 - mu1 * mu2 * mu3);
    let t2 = t1 - 0.001 * m_bar2 / (v_hat.sqrt() + eps);
    cases.push(OracleCase {
        method: Method::Nadam,
        expected: [t1, t2],
    });

    // rmsprop: v = 0.064, then 0.0576 + 0.009 = 0.0666
    let t1 = 1.5 - 0.001 * 0.8 / (0.064f64.sqrt() + eps);
    let t2 = t1 + 0.001 * 0.3 / (0.0666f64.sqrt() + eps);
    cases.push(OracleCase {
        method: Method::Rmsprop,
        expected: [t1, t2],
    });

    // gravilon: β = 2/0.64 lands on −1; then β = 1.1/0.09
    cases.push(OracleCase {
        method: Method::Gravilon,
        expected: [-1.0, -1.0 + 1.1 / 0.09 * 0.3],
    });

    // gravilon-m: momentum 0.9, decay 5e-4, β scale 50
    let r1 = g1 + 5e-4 * 1.5;
    let t1 = 1.5 - 50.0 * 2.0 / (r1 * r1) * r1;
    let r2 = g2 + 5e-4 * t1;
    let buf = 0.9 * r1 + r2;
    let t2 = t1 - 50.0 * 1.1 / (r2 * r2) * buf;
    cases.push(OracleCase {
        method: Method::GravilonM,
        expected: [t1, t2],
    });

    cases
}

/// Runs the scripted steps through [`OptimizerState::step`].
pub fn run_case(method: Method) -> [f64; 2] {
    let mut state = OptimizerState::default_for(method);
    let mut theta = FlatParams::from_slice(&[THETA0]);
    let mut out = [0.0; 2];
    for k in 0..2 {
        state
            .step(&mut theta, &FlatGrads::from_slice(&[GRADS[k]]), LOSSES[k])
            .expect("scripted step");
        out[k] = theta.values()[0];
    }
    out
}

/// Largest relative deviation over all scripted cases, with the worst method.
pub fn worst_oracle_error() -> (f64, Method) {
    oracle_cases()
        .iter()
        .flat_map(|c| {
            let got = run_case(c.method);
            (0..2).map(move |k| (rel_err(got[k], c.expected[k]), c.method))
        })
        .fold((0.0, Method::Sgd), |a, b| if b.0 > a.0 { b } else { a })
}
