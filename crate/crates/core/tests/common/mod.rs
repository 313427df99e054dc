//! Shared test oracles, independent of the solver under test.

#![allow(dead_code)]

use junctionq_core::ctmc::{CtmcModel, ModeledRoute};
use junctionq_core::phase::fit_hypoexp;

/// Stationary distribution via dense Gaussian elimination with partial
/// pivoting on the transposed generatoruated with one balance equation
/// replaced by the normalization constraint.
pub fn dense_stationary(model: &CtmcModel) -> Vec<f64> {
    let n = model.state_count();
    assert!(n <= 2_000, "dense oracle is for small chains");
    let mut a = vec![0.0f64; n * n];
    // A = Q^T, row 0 <- ones
    for (src, dst, rate) in model.edges() {
        let (src, dst) = (src as usize, dst as usize);
        if dst != 0 {
            a[dst * n + src] += rate;
        }
        if src != 0 {
            a[src * n + src] -= rate;
        }
    }
    for j in 0..n {
        a[j] = 1.0;
    }
    let mut b = vec![0.0f64; n];
    b[0] = 1.0;

    // partial-pivot elimination
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r1, &r2| a[r1 * n + col].abs().total_cmp(&a[r2 * n + col].abs()))
            .unwrap();
        assert!(a[pivot * n + col].abs() > 1e-300, "singular system");
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row * n + k] * x[k];
        }
        x[row] = acc / a[row * n + row];
    }
    x
}

/// Truncated single-server queue with `k_total` places in the system
/// (one in service plus the waiting slots): state probabilities of the
/// birth-death chain.
pub fn mm1k_distribution(lambda: f64, mu: f64, k_total: usize) -> Vec<f64> {
    let rho = lambda / mu;
    let weights: Vec<f64> = (0..=k_total).map(|i| rho.powi(i as i32)).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Expected number waiting (excluding the one in service).
pub fn mm1k_queue_length(lambda: f64, mu: f64, k_total: usize) -> f64 {
    mm1k_distribution(lambda, mu, k_total)
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, p)| (i - 1) as f64 * p)
        .sum()
}

pub fn exponential_route(route: usize, lambda: f64, mu: f64) -> ModeledRoute {
    ModeledRoute {
        route,
        arrival: fit_hypoexp(1.0 / lambda, 1.0).unwrap(),
        service: fit_hypoexp(1.0 / mu, 1.0).unwrap(),
    }
}
