//! Stationary-solver equivalence against independent oracles: a dense direct
//! solve and the closed-form truncated single-server queue.

mod common;

use common::{dense_stationary, exponential_route, mm1k_queue_length};
use junctionq_core::ctmc::{build_model, BuildOptions, ModeledRoute};
use junctionq_core::junction::ConflictMatrix;
use junctionq_core::phase::fit_hypoexp;
use junctionq_core::steady::{expected_queue_length, stationary, SolveOptions};

fn tight() -> SolveOptions {
    SolveOptions {
        tol: 1e-13,
        ..Default::default()
    }
}

#[test]
fn single_route_matches_dense_solve() {
    let conflicts = ConflictMatrix::from_pairs(1, &[]).unwrap();
    let modeled = vec![exponential_route(0, 0.15, 0.3)];
    let model = build_model(&conflicts, &modeled, &BuildOptions::default()).unwrap();
    let dist = stationary(&model, &tight(), None).unwrap();
    let oracle = dense_stationary(&model);
    for (a, b) in dist.pi.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-10, "pi mismatch {a} vs {b}");
    }
}

#[test]
fn single_route_matches_truncated_queue_closed_form() {
    // with an effectively instantaneous choice transition the chain is the
    // classic birth-death queue with m waiting slots plus the server
    let conflicts = ConflictMatrix::from_pairs(1, &[]).unwrap();
    let (lambda, mu, m) = (0.15, 0.3, 5u32);
    let modeled = vec![exponential_route(0, lambda, mu)];
    let opts = BuildOptions {
        m,
        choice_rate: 1e12,
        ..Default::default()
    };
    let model = build_model(&conflicts, &modeled, &opts).unwrap();
    let dist = stationary(&model, &tight(), None).unwrap();
    let l = expected_queue_length(&dist, &model, 0);
    let expect = mm1k_queue_length(lambda, mu, m as usize + 1);
    assert!(
        (l - expect).abs() < 1e-10,
        "queue length {l} vs closed form {expect}"
    );

    // occupancy distribution matches state for state
    let oracle = common::mm1k_distribution(lambda, mu, m as usize + 1);
    let mut by_n = vec![0.0f64; m as usize + 2];
    for u in 0..model.state_count() {
        let rs = model.decode(u)[0];
        by_n[rs.q as usize + usize::from(rs.s)] += dist.pi[u];
    }
    for (a, b) in by_n.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-10, "occupancy {a} vs {b}");
    }
}

#[test]
fn two_route_conflict_matches_dense_solve() {
    let conflicts = ConflictMatrix::from_pairs(2, &[(0, 1)]).unwrap();
    let modeled = vec![
        exponential_route(0, 0.11, 0.3),
        exponential_route(1, 0.07, 0.22),
    ];
    // m = 3 keeps the chain at 108 states
    let opts = BuildOptions {
        m: 3,
        ..Default::default()
    };
    let model = build_model(&conflicts, &modeled, &opts).unwrap();
    assert!(model.state_count() <= 300);
    let dist = stationary(&model, &tight(), None).unwrap();
    let oracle = dense_stationary(&model);
    for (a, b) in dist.pi.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-10);
    }
    for i in 0..2 {
        let l = expected_queue_length(&dist, &model, i);
        let l_oracle: f64 = (0..model.state_count())
            .map(|u| oracle[u] * f64::from(model.queue_len(u, i)))
            .sum();
        assert!((l - l_oracle).abs() < 1e-10);
    }
}

#[test]
fn phase_type_route_matches_dense_solve() {
    // small general-independent instance: arrival cv 0.8, service cv 0.5
    let conflicts = ConflictMatrix::from_pairs(2, &[(0, 1)]).unwrap();
    let modeled = vec![
        ModeledRoute {
            route: 0,
            arrival: fit_hypoexp(1.0 / 0.1, 0.8).unwrap(),
            service: fit_hypoexp(3.0, 0.5).unwrap(),
        },
        ModeledRoute {
            route: 1,
            arrival: fit_hypoexp(1.0 / 0.08, 0.8).unwrap(),
            service: fit_hypoexp(4.0, 0.8).unwrap(),
        },
    ];
    let opts = BuildOptions {
        m: 1,
        ..Default::default()
    };
    let model = build_model(&conflicts, &modeled, &opts).unwrap();
    assert!(model.state_count() <= 2_000, "{} states", model.state_count());
    let dist = stationary(&model, &tight(), None).unwrap();
    let oracle = dense_stationary(&model);
    for (a, b) in dist.pi.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-10);
    }
}
