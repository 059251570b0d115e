//! Fully digital reference design by projected gradient descent.

use alloc::vec::Vec;

use super::objective::ObjectiveEvaluator;
use super::{DesignProblem, SolverConfig, Status};
use crate::linalg::{eigh_sorted, fro2, is_finite, normalize_power, CMat, C64};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FullyDigitalDesign {
    /// `F[k]`, each with power `P / K`.
    pub blocks: Vec<CMat>,
    pub objective_trace: Vec<f64>,
    pub status: Status,
    pub values: super::ObjectiveValues,
}

/// Comm-only matched precoder: user `u`'s streams use the dominant right
/// singular vectors of `H[k][u]`, scaled to `P / K` per subcarrier.
pub fn matched_precoder(problem: &DesignProblem<'_>) -> Vec<CMat> {
    let dims = problem.dims;
    let ch = problem.channel;
    (0..dims.n_subcarriers)
        .map(|k| {
            let mut f = CMat::zeros(dims.n_tx_antennas, dims.n_streams);
            for u in 0..dims.n_users {
                let h = ch.get(k, u);
                let (_, vecs) = eigh_sorted(&h.ad_mul(h));
                let n = vecs.ncols();
                for (i, col) in dims.user_streams(u).enumerate() {
                    let src = n - 1 - (i % n);
                    f.set_column(col, &vecs.column(src));
                }
            }
            normalize_power(&mut f, problem.per_carrier_power());
            f
        })
        .collect()
}

/// Penalty weights for the epsilon and min-max formulations, one
/// projected-gradient stage each.
pub(crate) const PENALTY_STAGES: [f64; 6] = [1e1, 1e2, 1e3, 1e4, 1e5, 1e6];

pub(crate) fn penalty_schedule(uses_penalty: bool) -> &'static [f64] {
    if uses_penalty {
        &PENALTY_STAGES
    } else {
        &PENALTY_STAGES[..1]
    }
}

fn project_power(blocks: &mut [CMat], per_carrier: f64) {
    for b in blocks.iter_mut() {
        normalize_power(b, per_carrier);
    }
}

/// Projected-gradient descent on `{F[k]}` with per-subcarrier power
/// renormalization. Steps are accepted only when the smooth objective
/// decreases, so the trace is nonincreasing within each penalty stage.
pub(crate) fn projected_gradient(
    ev: &ObjectiveEvaluator<'_>,
    mut f: Vec<CMat>,
    mu: f64,
    max_iterations: usize,
    tol: f64,
    trace: &mut Vec<f64>,
) -> Result<(Vec<CMat>, bool)> {
    let per_carrier = ev.problem().per_carrier_power();
    project_power(&mut f, per_carrier);
    let mut grads = ev.gradients(&f, mu);
    let mut current = grads.values.scalarized;
    if !current.is_finite() {
        return Err(Error::NonFinite { iteration: 0 });
    }
    trace.push(current);
    let f_norm = libm::sqrt(f.iter().map(fro2).sum::<f64>());
    let mut step = 0.1 * f_norm / grad_norm(&grads.total).max(1e-300);
    let mut stalls = 0;
    for it in 1..=max_iterations {
        let g_norm = grad_norm(&grads.total);
        if g_norm == 0.0 {
            return Ok((f, true));
        }
        let mut accepted = false;
        while step * g_norm > 1e-13 * f_norm {
            let mut cand: Vec<CMat> = f
                .iter()
                .zip(&grads.total)
                .map(|(fk, gk)| fk - gk * C64::new(step, 0.0))
                .collect();
            project_power(&mut cand, per_carrier);
            let val = ev.values(&cand, mu).scalarized;
            if !val.is_finite() || cand.iter().any(|c| !is_finite(c)) {
                return Err(Error::NonFinite { iteration: it });
            }
            if val < current {
                let gain = current - val;
                f = cand;
                grads = ev.gradients(&f, mu);
                current = grads.values.scalarized;
                trace.push(current);
                step *= 1.5;
                accepted = true;
                stalls = if gain <= tol * current.abs().max(1.0) { stalls + 1 } else { 0 };
                break;
            }
            step *= 0.5;
        }
        if !accepted || stalls >= 5 {
            return Ok((f, true));
        }
    }
    Ok((f, false))
}

fn grad_norm(g: &[CMat]) -> f64 {
    libm::sqrt(g.iter().map(fro2).sum::<f64>())
}

/// Fully digital design: starts from [`matched_precoder`] and runs
/// projected gradient on the scalarized objective (Wiener receivers enter the
/// MMSE metric in closed form).
pub fn design_fully_digital(problem: &DesignProblem<'_>, cfg: &SolverConfig) -> Result<FullyDigitalDesign> {
    problem.validate()?;
    cfg.validate()?;
    let ev = ObjectiveEvaluator::new(problem)?;
    let mut f = matched_precoder(problem);
    let mut trace = Vec::new();
    let mut converged = true;
    let stages = penalty_schedule(ev.scalarizer().uses_penalty());
    for &mu in stages {
        let (next, ok) = projected_gradient(&ev, f, mu, cfg.max_iterations, cfg.objective_tol, &mut trace)?;
        f = next;
        converged = ok;
    }
    let mu = *stages.last().unwrap_or(&0.0);
    let values = ev.values(&f, mu);
    let status = if !ev.scalarizer().constraint_met(values.normalized, 1e-3) {
        Status::Infeasible
    } else if converged {
        Status::Converged
    } else {
        Status::MaxIter
    };
    Ok(FullyDigitalDesign {
        blocks: f,
        objective_trace: trace,
        status,
        values,
    })
}
