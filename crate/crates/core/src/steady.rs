//! Stationary distribution of a [`CtmcModel`] and queue-length rewards.
//!
//! The solver runs Gauss-Seidel sweeps on the global balance equations
//! pi_j * exit_j = sum_i pi_i * q_ij over the incoming-edge structure,
//! equivalent to uniformized power iteration accelerated by in-place updates.
//! Sweeps alternate direction (states are in breadth-first order, so forward
//! sweeps push mass outward from the empty state and backward sweeps relax the
//! high-occupancy tail), with periodic renormalization against floating-point
//! drift.

use crate::ctmc::CtmcModel;
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Convergence bound on the max-norm of pi * Q.
    pub tol: f64,
    pub max_sweeps: usize,
    pub renorm_every: usize,
    /// Residual evaluation cadence, in sweeps.
    pub check_every: usize,
    /// Use the rayon path for residual and normalization passes.
    pub parallel: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_sweeps: 1_000_000,
            renorm_every: 100,
            check_every: 10,
            parallel: cfg!(feature = "parallel"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
    /// Max-norm of pi * Q at termination.
    pub residual: f64,
    /// Sweeps performed.
    pub iterations: usize,
}

fn normalize(pi: &mut [f64], parallel: bool) {
    let total = par::sum_chunked(pi.len(), parallel, |i| pi[i]);
    let inv = 1.0 / total;
    for x in pi.iter_mut() {
        *x *= inv;
    }
}

/// Solves pi * Q = 0, sum(pi) = 1 for the reachable chain.
///
/// `warm_start` seeds the iteration when its length matches; the usual source
/// is the previous solve of a structurally identical model.
pub fn stationary(
    model: &CtmcModel,
    opts: &SolveOptions,
    warm_start: Option<&[f64]>,
) -> Result<StationaryDistribution> {
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("solver tolerance must be positive"));
    }
    let n = model.state_count();
    let (in_ptr, in_src, in_rate, exit) = model.in_csr();

    // every state is forward-reachable from 0 by construction; strong
    // connectivity additionally needs 0 reachable from every state, i.e. a
    // full backward sweep over predecessor lists
    {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1usize;
        while let Some(v) = stack.pop() {
            for k in in_ptr[v]..in_ptr[v + 1] {
                let p = in_src[k] as usize;
                if !seen[p] {
                    seen[p] = true;
                    count += 1;
                    stack.push(p);
                }
            }
        }
        if count != n {
            return Err(Error::ReducibleChain {
                states: n,
                unreachable: n - count,
            });
        }
    }

    let mut pi: Vec<f64> = match warm_start {
        Some(w) if w.len() == n => w.to_vec(),
        _ => vec![1.0 / n as f64; n],
    };

    let residual_pass = |pi: &[f64]| -> f64 {
        par::fold_max(n, opts.parallel, |j| {
            let mut inflow = 0.0;
            for k in in_ptr[j]..in_ptr[j + 1] {
                inflow += pi[in_src[k] as usize] * in_rate[k];
            }
            (inflow - pi[j] * exit[j]).abs()
        })
    };

    let mut sweeps = 0usize;
    let mut residual = f64::INFINITY;
    while sweeps < opts.max_sweeps {
        let burst = opts.check_every.min(opts.max_sweeps - sweeps).max(1);
        for _ in 0..burst {
            if sweeps % 2 == 0 {
                for j in 0..n {
                    let mut inflow = 0.0;
                    for k in in_ptr[j]..in_ptr[j + 1] {
                        inflow += pi[in_src[k] as usize] * in_rate[k];
                    }
                    pi[j] = inflow / exit[j];
                }
            } else {
                for j in (0..n).rev() {
                    let mut inflow = 0.0;
                    for k in in_ptr[j]..in_ptr[j + 1] {
                        inflow += pi[in_src[k] as usize] * in_rate[k];
                    }
                    pi[j] = inflow / exit[j];
                }
            }
            sweeps += 1;
            if sweeps % opts.renorm_every == 0 {
                normalize(&mut pi, opts.parallel);
            }
        }
        normalize(&mut pi, opts.parallel);
        residual = residual_pass(&pi);
        if residual <= opts.tol {
            return Ok(StationaryDistribution {
                pi,
                residual,
                iterations: sweeps,
            });
        }
    }
    Err(Error::SolverDidNotConverge {
        residual,
        sweeps,
        tol: opts.tol,
    })
}

/// Expected queue length of modelled route `i`: sum over states with waiting
/// requests of probability times queue length.
pub fn expected_queue_length(dist: &StationaryDistribution, model: &CtmcModel, i: usize) -> f64 {
    let mut total = 0.0;
    for (u, &p) in dist.pi.iter().enumerate() {
        let q = model.queue_len(u, i);
        if q > 0 {
            total += p * f64::from(q);
        }
    }
    total
}
