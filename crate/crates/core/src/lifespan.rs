//! Expected replicative lifespan: the mean number of divisions a cell of a
//! given age performs before absorption in the senescence state.
//!
//! The lifespans satisfy lambda_i = beta_i + sum_j p_ij lambda_j over the
//! transient states, with beta_i the expected division probability after
//! inflow; in matrix form (I - P0) lambda = beta where P0 is the transient
//! block of the kernel.

use crate::error::Error;
use crate::model::{transition_kernel, ModelParams};
use crate::numerics::{solve_linear, DenseMatrix};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct LifespanResult {
    /// lambda_0 .. lambda_n (the senescent entry is 0).
    pub lambda: Vec<f64>,
    /// beta_0 .. beta_{n-1}.
    pub beta: Vec<f64>,
    /// Whether the reduced (m, alpha) system was solved instead of the full
    /// n x n one.
    pub truncated: bool,
}

/// Expected lifespans for every starting age. Parameters carrying the
/// (m, alpha) tag are solved on the reduced system of size n - m (ages
/// n - m .. n - 1 jump straight to senescence and have lifespan 0); general
/// parameters go through the full n x n solve.
pub fn expected_lifespan(params: &ModelParams) -> Result<LifespanResult> {
    match params.malpha() {
        Some(ma) => {
            let n = params.n();
            let m = ma.m();
            let dim = n - m;
            let kern = transition_kernel(params);
            let mut a = DenseMatrix::identity(dim);
            for i in 0..dim {
                for j in 0..dim {
                    a.set(i, j, a.get(i, j) - kern.p().get(i, j));
                }
            }
            let rhs: Vec<f64> = (0..dim).map(|i| params.division_prob(i + m)).collect();
            let reduced = solve_system(&a, &rhs)?;
            let mut lambda = vec![0.0; n + 1];
            lambda[..dim].copy_from_slice(&reduced);
            let beta = (0..n).map(|i| params.mean_division_prob(i)).collect();
            check_lifespans(&lambda)?;
            Ok(LifespanResult {
                lambda,
                beta,
                truncated: true,
            })
        }
        None => expected_lifespan_full(params),
    }
}

/// Full-system solve, regardless of any (m, alpha) structure. Also serves as
/// the cross-check companion of the reduced path.
pub fn expected_lifespan_full(params: &ModelParams) -> Result<LifespanResult> {
    let n = params.n();
    let kern = transition_kernel(params);
    let mut a = DenseMatrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            a.set(i, j, a.get(i, j) - kern.p().get(i, j));
        }
    }
    let beta: Vec<f64> = (0..n).map(|i| params.mean_division_prob(i)).collect();
    let solved = solve_system(&a, &beta)?;
    let mut lambda = solved;
    lambda.push(0.0);
    check_lifespans(&lambda)?;
    Ok(LifespanResult {
        lambda,
        beta,
        truncated: false,
    })
}

fn solve_system(a: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    solve_linear(a, rhs).map_err(|e| match e {
        Error::SingularSystem => Error::NonAbsorbingChain(
            "the lifespan system (I - P0) is numerically singular: the chain never \
             reaches n, or the expected lifespans are too large for double precision"
                .into(),
        ),
        other => other,
    })
}

fn check_lifespans(lambda: &[f64]) -> Result<()> {
    for (i, l) in lambda.iter().enumerate() {
        if !l.is_finite() || *l < -1e-9 {
            return Err(Error::NonAbsorbingChain(format!(
                "lifespan of age {i} solved to {l}"
            )));
        }
    }
    Ok(())
}

/// Maximum defect of a candidate lifespan vector against the recursion
/// lambda_i = beta_i + sum_{j<n} p_ij lambda_j over the transient states.
pub fn recursion_residual(params: &ModelParams, lambda: &[f64]) -> f64 {
    let n = params.n();
    assert_eq!(lambda.len(), n + 1, "lambda must cover ages 0..=n");
    let kern = transition_kernel(params);
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut acc = params.mean_division_prob(i) - lambda[i];
        for (pij, l) in kern.p().row(i)[..n].iter().zip(&lambda[..n]) {
            acc += pij * l;
        }
        worst = worst.max(acc.abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MAlphaParams;

    #[test]
    fn two_state_closed_form() {
        // n=2, m=1: lambda_0 = 1 / (1 + p).
        for p in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let params = MAlphaParams::new(2, 1, p, 1.0).unwrap().params();
            let res = expected_lifespan(&params).unwrap();
            assert!((res.lambda[0] - 1.0 / (1.0 + p)).abs() < 1e-12, "p = {p}");
            assert_eq!(res.lambda[1], 0.0);
            assert_eq!(res.lambda[2], 0.0);
            assert!(res.truncated);
        }
    }

    #[test]
    fn reduced_and_full_agree() {
        let params = MAlphaParams::new(40, 7, 0.35, 2.5).unwrap().params();
        let reduced = expected_lifespan(&params).unwrap();
        let full = expected_lifespan_full(&params).unwrap();
        assert!(!full.truncated);
        for i in 0..=40 {
            assert!(
                (reduced.lambda[i] - full.lambda[i]).abs() < 1e-9,
                "age {i}: {} vs {}",
                reduced.lambda[i],
                full.lambda[i]
            );
        }
    }

    #[test]
    fn residual_vanishes_on_solution_and_catches_perturbation() {
        let params = MAlphaParams::new(30, 5, 0.4, 2.0).unwrap().params();
        let res = expected_lifespan(&params).unwrap();
        assert!(recursion_residual(&params, &res.lambda) < 1e-9);
        let mut off = res.lambda.clone();
        off[0] += 1.0;
        let kern = transition_kernel(&params);
        let floor = 1.0 - kern.p().get(0, 0);
        assert!(recursion_residual(&params, &off) >= floor - 1e-12);
    }

    #[test]
    fn non_absorbing_chain_is_reported() {
        // No inflow and certain division from age 0 keeps the chain below n
        // forever: absorption at n is unreachable.
        let params = ModelParams::new(2, vec![1.0], 0.5, vec![1.0, 1.0]).unwrap();
        match expected_lifespan(&params) {
            Err(Error::NonAbsorbingChain(_)) => {}
            other => panic!("expected non-absorbing error, got {other:?}"),
        }
    }
}
