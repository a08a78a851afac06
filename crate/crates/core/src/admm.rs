//! ADMM solver for the per-QSI resource-fraction problem.
//!
//! Maximizes `sum_k log(R_k + alpha B_k)` over licensed and unlicensed
//! fraction vectors, subject to each vector summing to one and every
//! fraction lying in [0, 1]. `R_k` is linear in the fractions, so the
//! problem is concave with linear constraints.
//!
//! The augmented Lagrangian relaxes the two sum constraints with multipliers
//! `lambda`, `mu` and penalty `rho`. Each outer iteration maximizes over one
//! block at a time (Gauss-Seidel sweeps of per-coordinate scalar Newton
//! solves, each coordinate projected onto [0, 1] as it is updated), then
//! takes the standard dual ascent step `lambda += rho (sum x_L - 1)`,
//! `mu += rho (sum x_U - 1)`. Convergence requires both constraint
//! residuals and the projected stationarity of the true Lagrangian to fall
//! below tolerance.

use crate::error::{Error, Result};
use crate::quality::UtilityInputs;

/// Solver controls; defaults match the documented tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmSettings {
    /// Penalty parameter, > 0.
    pub rho: f64,
    /// Constraint and stationarity tolerance.
    pub tolerance: f64,
    /// Inner Gauss-Seidel block residual target.
    pub block_tolerance: f64,
    /// Outer iteration cap. Instances where two UEs have nearly equal
    /// unlicensed-to-licensed coefficient ratios make the two-block scheme
    /// crawl along an almost-flat manifold; typical solves need tens of
    /// iterations, but the cap leaves room for those rare instances.
    pub max_iterations: usize,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        Self {
            rho: 1.0,
            tolerance: 1e-6,
            block_tolerance: 1e-8,
            max_iterations: 400_000,
        }
    }
}

/// Converged allocation: fractions, multipliers, and derived per-UE rates.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationSolution {
    /// Licensed fractions, one per UE, each in [0, 1], summing to 1.
    pub x_l: Vec<f64>,
    /// Unlicensed fractions, one per UE, each in [0, 1], summing to 1.
    pub x_u: Vec<f64>,
    /// Multiplier of the licensed sum constraint.
    pub lambda: f64,
    /// Multiplier of the unlicensed sum constraint.
    pub mu_mult: f64,
    /// Penalty parameter used.
    pub rho: f64,
    /// Outer iterations to convergence.
    pub iterations: usize,
    /// Achievable rate per UE at the solution, bits/s.
    pub rates_bps: Vec<f64>,
}

/// Solves the sum-utility maximization for one QSI.
pub fn solve_p1(inputs: &UtilityInputs, settings: &AdmmSettings) -> Result<AllocationSolution> {
    inputs.validate()?;
    if settings.rho <= 0.0 {
        return Err(Error::domain("rho must be positive"));
    }
    let k = inputs.num_ues();
    let c_l: Vec<f64> = (0..k).map(|i| inputs.licensed_coefficient(i)).collect();
    let c_u: Vec<f64> = (0..k).map(|i| inputs.unlicensed_coefficient(i)).collect();
    let bias: Vec<f64> = inputs
        .buffer_seconds
        .iter()
        .map(|&b| inputs.alpha * b)
        .collect();

    if c_l.iter().all(|&c| c <= 0.0) {
        return Err(Error::DegenerateInput(
            "every UE has a zero licensed rate coefficient".into(),
        ));
    }
    for i in 0..k {
        if c_l[i] + c_u[i] + bias[i] <= 0.0 {
            return Err(Error::DegenerateInput(format!(
                "UE {i} has zero rate coefficients and zero buffer bias; its utility is unbounded below"
            )));
        }
    }

    let rho = settings.rho;
    let mut x_l = vec![1.0 / k as f64; k];
    let mut x_u = vec![1.0 / k as f64; k];
    let mut lambda = 0.0;
    let mut mu = 0.0;

    let mut primal_l = f64::INFINITY;
    let mut primal_u = f64::INFINITY;
    let mut stationarity = f64::INFINITY;

    // Inner solves must leave gradient residue well under the outer
    // stationarity tolerance; coordinate-change targets alone are not
    // enough because high-SNR coefficients amplify position error.
    let block_grad_tol = (settings.tolerance * 0.05).min(settings.block_tolerance.sqrt());

    for iteration in 1..=settings.max_iterations {
        // Fixed per-UE offsets while the other block is held constant.
        let off_l: Vec<f64> = (0..k).map(|i| c_u[i] * x_u[i] + bias[i]).collect();
        maximize_block(&mut x_l, &c_l, &off_l, lambda, rho, block_grad_tol);
        let off_u: Vec<f64> = (0..k).map(|i| c_l[i] * x_l[i] + bias[i]).collect();
        maximize_block(&mut x_u, &c_u, &off_u, mu, rho, block_grad_tol);

        let res_l: f64 = x_l.iter().sum::<f64>() - 1.0;
        let res_u: f64 = x_u.iter().sum::<f64>() - 1.0;
        lambda += rho * res_l;
        mu += rho * res_u;

        primal_l = res_l.abs();
        primal_u = res_u.abs();
        stationarity =
            projected_stationarity(&x_l, &x_u, &c_l, &c_u, &bias, lambda, mu, rho, res_l, res_u);

        if primal_l <= settings.tolerance
            && primal_u <= settings.tolerance
            && stationarity <= settings.tolerance
        {
            let rates_bps = (0..k).map(|i| c_l[i] * x_l[i] + c_u[i] * x_u[i]).collect();
            return Ok(AllocationSolution {
                x_l,
                x_u,
                lambda,
                mu_mult: mu,
                rho,
                iterations: iteration,
                rates_bps,
            });
        }
    }

    Err(Error::SolverNoConvergence {
        iterations: settings.max_iterations,
        primal_l,
        primal_u,
        stationarity,
    })
}

/// Gauss-Seidel sweeps over one block: each coordinate solves its scalar
/// stationarity condition by safeguarded Newton and is clamped to [0, 1]
/// immediately, so the sweep is a projected coordinate ascent. Sweeps stop
/// once the block's projected gradient falls below `grad_tol`.
fn maximize_block(
    x: &mut [f64],
    coeff: &[f64],
    offset: &[f64],
    multiplier: f64,
    rho: f64,
    grad_tol: f64,
) {
    let max_sweeps = 500;
    for _ in 0..max_sweeps {
        let mut sum: f64 = x.iter().sum();
        for i in 0..x.len() {
            let rest = sum - x[i];
            // Stationarity: c/(c t + a) - (multiplier + rho (t + rest - 1)) = 0.
            let linear_term = multiplier + rho * (rest - 1.0);
            let root = solve_coordinate(coeff[i], offset[i], linear_term, rho, x[i]);
            let clamped = root.clamp(0.0, 1.0);
            sum += clamped - x[i];
            x[i] = clamped;
        }
        let residual = sum - 1.0;
        let mut worst = 0.0f64;
        for i in 0..x.len() {
            let marginal = if coeff[i] > 0.0 {
                coeff[i] / (coeff[i] * x[i] + offset[i])
            } else {
                0.0
            };
            let grad = marginal - multiplier - rho * residual;
            let violation = if x[i] <= 0.0 {
                grad.max(0.0)
            } else if x[i] >= 1.0 {
                (-grad).max(0.0)
            } else {
                grad.abs()
            };
            worst = worst.max(violation);
        }
        if worst <= grad_tol {
            break;
        }
    }
}

/// Root of `g(t) = c/(c t + a) - A - rho t` for `t` above the pole.
/// `g` is strictly decreasing on its domain, so the root is unique;
/// Newton steps are kept inside a shrinking bracket.
fn solve_coordinate(c: f64, a: f64, linear_term: f64, rho: f64, start: f64) -> f64 {
    if c <= 0.0 {
        // Utility does not depend on this coordinate; only the penalty does.
        return -linear_term / rho;
    }
    let g = |t: f64| c / (c * t + a) - linear_term - rho * t;

    // Domain lower edge: keep the log argument positive.
    let mut lo = if a > 0.0 {
        -a / c + f64::MIN_POSITIVE
    } else {
        f64::MIN_POSITIVE
    };
    let mut hi = lo.max(1.0);
    let mut guard = 0;
    while g(hi) > 0.0 {
        hi = hi * 2.0 + 1.0;
        guard += 1;
        if guard > 200 {
            break;
        }
    }

    let mut t = start.clamp(lo + 1e-12, hi);
    if g(t) > 0.0 {
        lo = t;
    } else {
        hi = t;
    }
    for _ in 0..100 {
        let gt = g(t);
        if gt.abs() < 1e-13 {
            break;
        }
        if gt > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let slope = -c * c / (c * t + a).powi(2) - rho;
        let newton = t - gt / slope;
        t = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 * (1.0 + t.abs()) {
            break;
        }
    }
    t
}

/// Largest violation of the projected first-order conditions of the
/// augmented Lagrangian at the current point. Coordinates at the box edges
/// use one-sided conditions.
#[allow(clippy::too_many_arguments)]
fn projected_stationarity(
    x_l: &[f64],
    x_u: &[f64],
    c_l: &[f64],
    c_u: &[f64],
    bias: &[f64],
    lambda: f64,
    mu: f64,
    rho: f64,
    res_l: f64,
    res_u: f64,
) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..x_l.len() {
        let arg = c_l[i] * x_l[i] + c_u[i] * x_u[i] + bias[i];
        let grad_l = c_l[i] / arg - lambda - rho * res_l;
        let grad_u = c_u[i] / arg - mu - rho * res_u;
        for (value, grad) in [(x_l[i], grad_l), (x_u[i], grad_u)] {
            let violation = if value <= 0.0 {
                grad.max(0.0)
            } else if value >= 1.0 {
                (-grad).max(0.0)
            } else {
                grad.abs()
            };
            worst = worst.max(violation);
        }
    }
    worst
}
