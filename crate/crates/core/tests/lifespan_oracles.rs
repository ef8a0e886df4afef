//! Expected replicative lifespan: independent oracles, the reduced/full
//! solver agreement, Monte Carlo cross-checks, and strict monotonicity.

use gwcell::lifespan::{expected_lifespan, expected_lifespan_full, recursion_residual};
use gwcell::model::{transition_kernel, MAlphaParams, ModelParams};
use gwcell::simulator::{simulate_lifespan, DEFAULT_STEP_CAP};

/// Independent oracle: fixed-point iteration of lambda = beta + P0 lambda.
/// The sub-stochastic restriction of an absorbing chain contracts, so the
/// iteration converges without any linear algebra.
fn lifespan_by_iteration(params: &ModelParams) -> Vec<f64> {
    let n = params.n();
    let kernel = transition_kernel(params);
    let beta: Vec<f64> = (0..n).map(|i| params.mean_division_prob(i)).collect();
    let mut lambda = vec![0.0; n];
    for _ in 0..2_000_000 {
        let mut next = beta.clone();
        let mut delta = 0.0f64;
        for i in 0..n {
            let row = kernel.p().row(i);
            let mut acc = next[i];
            for j in 0..n {
                acc += row[j] * lambda[j];
            }
            next[i] = acc;
            delta = delta.max((next[i] - lambda[i]).abs());
        }
        let done = delta <= 1e-13 * (1.0 + lambda[0].abs());
        lambda = next;
        if done {
            break;
        }
    }
    lambda
}

#[test]
fn solver_matches_fixed_point_iteration() {
    for &(n, m, p, alpha) in &[
        (5usize, 1usize, 0.5, 1.0),
        (10, 3, 0.3, 2.0),
        (20, 6, 0.8, 1.5),
        (30, 10, 0.5, 3.0),
    ] {
        let params = MAlphaParams::new(n, m, p, alpha).unwrap().params();
        let solved = expected_lifespan(&params).unwrap();
        let iterated = lifespan_by_iteration(&params);
        for (i, (s, it)) in solved.lambda.iter().zip(&iterated).take(n).enumerate() {
            assert!(
                (s - it).abs() <= 1e-9 * (1.0 + it),
                "lambda[{i}]: {s} vs {it} at ({n},{m},{p},{alpha})"
            );
        }
    }
}

#[test]
fn reduced_and_full_solvers_agree() {
    for &(n, m, p, alpha) in &[
        (2usize, 1usize, 0.5, 1.0),
        (10, 1, 0.0, 1.0),
        (10, 9, 1.0, 5.0),
        (40, 7, 0.35, 2.5),
        (100, 15, 0.5, 2.0),
        (100, 45, 0.5, 2.0),
    ] {
        let params = MAlphaParams::new(n, m, p, alpha).unwrap().params();
        let reduced = expected_lifespan(&params).unwrap();
        let full = expected_lifespan_full(&params).unwrap();
        assert!(reduced.truncated);
        assert!(!full.truncated);
        for i in 0..=n {
            assert!(
                (reduced.lambda[i] - full.lambda[i]).abs() <= 1e-9,
                "lambda[{i}]: reduced {} vs full {} at ({n},{m},{p},{alpha})",
                reduced.lambda[i],
                full.lambda[i]
            );
        }
    }
}

#[test]
fn family_lifespans_vanish_once_division_is_unreachable() {
    let params = MAlphaParams::new(50, 12, 0.4, 2.0).unwrap().params();
    let res = expected_lifespan(&params).unwrap();
    for i in 0..=50 {
        if i >= 50 - 12 {
            assert_eq!(res.lambda[i], 0.0, "lambda[{i}] should be exactly zero");
        } else {
            assert!(res.lambda[i] > 0.0);
        }
    }
}

#[test]
fn recursion_residual_vanishes_across_models() {
    for &(n, m, p, alpha) in &[(10usize, 3usize, 0.3, 2.0), (60, 20, 0.7, 1.0)] {
        let params = MAlphaParams::new(n, m, p, alpha).unwrap().params();
        let res = expected_lifespan(&params).unwrap();
        let residual = recursion_residual(&params, &res.lambda);
        assert!(residual <= 1e-10, "residual {residual} at ({n},{m},{p},{alpha})");
    }
}

#[test]
fn monte_carlo_confirms_analytic_lifespans() {
    let params = MAlphaParams::new(10, 3, 0.6, 2.0).unwrap().params();
    let analytic = expected_lifespan(&params).unwrap();
    for &start in &[0usize, 2, 5] {
        let mc = simulate_lifespan(&params, start, 100_000, 41, DEFAULT_STEP_CAP).unwrap();
        let gap = (mc.mean - analytic.lambda[start]).abs();
        assert!(
            gap <= 3.0 * mc.std_error,
            "start {start}: MC {} +- {} vs analytic {}",
            mc.mean,
            mc.std_error,
            analytic.lambda[start]
        );
    }
}

fn lambda_vec(n: usize, m: usize, p: f64, alpha: f64) -> Vec<f64> {
    expected_lifespan(&MAlphaParams::new(n, m, p, alpha).unwrap().params())
        .unwrap()
        .lambda
}

/// Strictly longer lifespans for younger cells, lower retention, lower
/// inflow, and sharper division probability, on ages that can still divide.
#[test]
fn lifespan_is_strictly_monotone_in_every_parameter()  {
    const GAP: f64 = 1e-6;
    let n = 60;
    let ms = [5usize, 10, 20];
    let ps = [0.2, 0.5, 0.8];
    // Steeper alpha at low retention drives lifespans past ~1e13, where the
    // linear system is too ill-conditioned to solve; stay inside that range.
    let alphas = [1.0, 1.5, 2.0];

    for &m in &ms {
        for &p in &ps {
            for &alpha in &alphas {
                let l = lambda_vec(n, m, p, alpha);
                for i in 0..(n - m) {
                    assert!(l[i] > l[i + 1] + GAP, "age: lambda[{i}] !> lambda[{}] at ({m},{p},{alpha})", i + 1);
                }
            }
        }
    }
    for &m in &ms {
        for &alpha in &alphas {
            for w in ps.windows(2) {
                let (a, b) = (lambda_vec(n, m, w[0], alpha), lambda_vec(n, m, w[1], alpha));
                for i in 0..(n - m) {
                    assert!(a[i] > b[i] + GAP, "retention: lambda[{i}] at p={:?} ({m},{alpha})", w);
                }
            }
        }
    }
    for &p in &ps {
        for &alpha in &alphas {
            for w in ms.windows(2) {
                let (a, b) = (lambda_vec(n, w[0], p, alpha), lambda_vec(n, w[1], p, alpha));
                for i in 0..(n - w[1]) {
                    assert!(a[i] > b[i] + GAP, "inflow: lambda[{i}] at m={:?} ({p},{alpha})", w);
                }
            }
        }
    }
    for &m in &ms {
        for &p in &ps {
            for w in alphas.windows(2) {
                let (a, b) = (lambda_vec(n, m, p, w[0]), lambda_vec(n, m, p, w[1]));
                for i in 0..(n - m) {
                    assert!(b[i] > a[i] + GAP, "division rate: lambda[{i}] at alpha={:?} ({m},{p})", w);
                }
            }
        }
    }
}

#[test]
fn hand_solved_two_state_family() {
    // n=2, m=1: from age 0 the load is always 1; division keeps the mother
    // at Bin(1, p). One division happens with probability b_1 = 1/2, after
    // which the mother restarts from 0 with probability 1-p. Solving the
    // one-unknown recursion gives lambda_0 = 1/(1+p).
    for &p in &[0.0, 0.3, 0.5, 1.0] {
        let l = lambda_vec(2, 1, p, 1.0);
        assert!((l[0] - 1.0 / (1.0 + p)).abs() <= 1e-12);
        assert_eq!(l[1], 0.0);
        assert_eq!(l[2], 0.0);
    }
}
