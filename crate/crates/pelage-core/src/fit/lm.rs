//! Levenberg–Marquardt with multiplicative damping on a parameter subset.

use alloc::vec::Vec;
use nalgebra::DMatrix;

use super::energy::Energy;

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub tolerance: f64,
    pub initial_damping: f64,
    pub damping_cap: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct LmOutcome {
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimize the energy over the `active` parameter subset of `x`.
///
/// Damping is multiplicative (x10 on reject, x0.1 on accept). An accepted
/// step never increases the cost; the stage converges when the relative cost
/// decrease of an accepted step falls below the tolerance, and reports
/// `converged = false` if damping reaches its cap (divergence) or the
/// iteration budget runs out first.
pub fn minimize(
    energy: &Energy<'_>,
    x: &mut Vec<f64>,
    active: &[usize],
    max_iterations: usize,
    opts: &LmOptions,
) -> LmOutcome {
    let mut cost = match energy.residuals(x) {
        Ok(r) => r.norm_squared(),
        Err(_) => return LmOutcome { cost: f64::INFINITY, iterations: 0, converged: false },
    };
    if cost < 1e-18 {
        return LmOutcome { cost, iterations: 0, converged: true };
    }
    let mut damping = opts.initial_damping;
    let mut iterations = 0usize;
    let mut converged = false;

    while iterations < max_iterations {
        iterations += 1;
        let (jac, r) = match (energy.jacobian(x, active), energy.residuals(x)) {
            (Ok(j), Ok(r)) => (j, r),
            _ => break,
        };
        // Reduced normal equations over the active columns.
        let k = active.len();
        let mut jr = DMatrix::zeros(r.len(), k);
        for (col, &q) in active.iter().enumerate() {
            jr.set_column(col, &jac.column(q));
        }
        let jtj = jr.transpose() * &jr;
        let jtr = jr.transpose() * &r;

        let mut accepted = false;
        while damping <= opts.damping_cap {
            let mut a = jtj.clone();
            for i in 0..k {
                a[(i, i)] += damping;
            }
            let delta = match a.lu().solve(&(-&jtr)) {
                Some(d) => d,
                None => {
                    damping *= 10.0;
                    continue;
                }
            };
            let mut trial = x.clone();
            for (col, &q) in active.iter().enumerate() {
                trial[q] += delta[col];
            }
            let trial_cost = match energy.residuals(&trial) {
                Ok(r) => r.norm_squared(),
                Err(_) => f64::INFINITY,
            };
            if trial_cost <= cost {
                debug_assert!(trial_cost <= cost, "accepted LM step must not increase the energy");
                let rel = (cost - trial_cost) / cost.max(f64::MIN_POSITIVE);
                *x = trial;
                cost = trial_cost;
                damping = (damping * 0.1).max(1e-12);
                accepted = true;
                if rel < opts.tolerance || cost < 1e-18 {
                    converged = true;
                }
                break;
            }
            damping *= 10.0;
        }
        if !accepted {
            // Divergence: damping at cap without an acceptable step.
            converged = false;
            break;
        }
        if converged {
            break;
        }
    }
    LmOutcome { cost, iterations, converged }
}
