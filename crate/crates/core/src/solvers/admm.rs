//! Consensus ADMM on per-(subcarrier, user) copies `Y[k][u]` of the hybrid
//! precoder `F_RF F_D[k]`.
//!
//! Scaled augmented Lagrangian:
//! `sum_{k,u} f_{k,u}(Y[k][u]) + (rho/2) ||Y[k][u] - F_RF F_D[k] + L[k][u]||^2`,
//! where `f_{k,u}` is user `u`'s share of the scalarized objective on
//! subcarrier `k`. Updates run Y -> F_RF -> F_D -> L.

use alloc::vec::Vec;

use super::digital::penalty_schedule;
use super::polish::polish;
use super::factorize::{analog_update, concat, ls_fit, split};
use super::objective::ObjectiveEvaluator;
use super::{combiners::design_combiners, DesignProblem, DesignResult, Method, SolverConfig, Status};
use crate::architecture::{random_feasible, AnalogPrecoder, ArchitectureSpec};
use crate::linalg::{fro2, is_finite, normalize_power, solve_hpd, CMat, C64};
use crate::metrics::HybridPrecoder;
use crate::scalarize::CommMetric;
use crate::{Error, Result};

struct Iterate {
    analog: AnalogPrecoder,
    digital: Vec<CMat>,
}

impl Iterate {
    fn effective(&self) -> Vec<CMat> {
        self.digital.iter().map(|d| self.analog.matrix() * d).collect()
    }

    fn normalize(&mut self, per_carrier: f64) {
        for d in self.digital.iter_mut() {
            let p = fro2(&(self.analog.matrix() * &*d));
            if p > 0.0 {
                *d *= C64::new(libm::sqrt(per_carrier / p), 0.0);
            }
        }
    }
}

fn max_norm_diff(a: &[CMat], b: &[CMat]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| libm::sqrt(fro2(&(x - y))))
        .fold(0.0, f64::max)
}

/// Consensus-ADMM hybrid design followed by an L-BFGS refinement of the
/// best iterate (analog phases on the fixed support plus digital blocks).
pub fn design_consensus_admm(
    problem: &DesignProblem<'_>,
    spec: &ArchitectureSpec,
    cfg: &SolverConfig,
) -> Result<DesignResult> {
    problem.validate()?;
    cfg.validate()?;
    spec.validate()?;
    let ev = ObjectiveEvaluator::new(problem)?;
    let dims = problem.dims;
    let n_users = dims.n_users;
    let k_count = dims.n_subcarriers;
    let per_carrier = problem.per_carrier_power();

    let analog = random_feasible(spec, cfg.seed);
    let matched = super::matched_precoder(problem);
    let (d0, _) = ls_fit(analog.matrix(), &concat(&matched), cfg.ridge);
    let mut it_state = Iterate {
        digital: split(&d0, k_count),
        analog,
    };
    it_state.normalize(per_carrier);
    let mut f = it_state.effective();
    let mut y: Vec<Vec<CMat>> = f.iter().map(|fk| alloc::vec![fk.clone(); n_users]).collect();
    let mut lam: Vec<Vec<CMat>> = f
        .iter()
        .map(|fk| alloc::vec![CMat::zeros(fk.nrows(), fk.ncols()); n_users])
        .collect();

    let stages = penalty_schedule(ev.scalarizer().uses_penalty());
    let mu_final = *stages.last().unwrap_or(&0.0);
    let mut mu = stages[0];
    let rho_max = 1e3 * cfg.rho;
    let mut rho = cfg.rho;
    let mut objective_trace = Vec::new();
    let mut primal_trace: Vec<f64> = Vec::new();
    let mut dual_trace = Vec::new();
    let mut status = Status::MaxIter;
    let mut best: Option<(f64, AnalogPrecoder, Vec<CMat>)> = None;
    let comm_scale = problem.objective.comm_norm.scale;

    for it in 0..cfg.max_iterations {
        let g = ev.gradients(&f, mu);
        let merit = g.values.merit;
        if !merit.is_finite() {
            return Err(Error::NonFinite { iteration: it });
        }
        objective_trace.push(merit);
        if best.as_ref().is_none_or(|b| merit < b.0) {
            best = Some((merit, it_state.analog.clone(), it_state.digital.clone()));
        }
        let (cr, cc) = g.values.coeffs;
        let half_rho = 0.5 * rho;

        // (i) local Y updates
        for k in 0..k_count {
            for u in 0..n_users {
                let v = &f[k] - &lam[k][u];
                let radar_lin = &g.radar[k] * C64::new(cr / n_users as f64, 0.0);
                let mut yk = match problem.objective.comm {
                    CommMetric::NegSe => {
                        let lin = radar_lin + &g.comm[k][u] * C64::new(cc, 0.0);
                        v - lin * C64::new(1.0 / half_rho, 0.0)
                    }
                    CommMetric::Mmse => {
                        // min c ||E - A Y||^2 + (rho/2)||Y - V||^2 + 2 Re<G, Y>
                        let c = cc / comm_scale;
                        let w = &g.wiener[k][u];
                        let a = w.ad_mul(problem.channel.get(k, u));
                        let mut e = CMat::zeros(a.nrows(), dims.n_streams);
                        for (i, j) in dims.user_streams(u).enumerate() {
                            e[(i, j)] = C64::new(1.0, 0.0);
                        }
                        let rhs = a.ad_mul(&e) * C64::new(c, 0.0) + v * C64::new(half_rho, 0.0) - radar_lin;
                        if c > 0.0 {
                            let small = &a * a.adjoint();
                            let inner = solve_hpd(&small, &(&a * &rhs), half_rho / c);
                            (rhs - a.ad_mul(&inner)) * C64::new(1.0 / half_rho, 0.0)
                        } else {
                            rhs * C64::new(1.0 / half_rho, 0.0)
                        }
                    }
                };
                normalize_power(&mut yk, per_carrier);
                y[k][u] = yk;
            }
        }

        // (ii) consensus analog update on the dual-adjusted average
        let avg: Vec<CMat> = (0..k_count)
            .map(|k| {
                let mut s = CMat::zeros(f[k].nrows(), f[k].ncols());
                for u in 0..n_users {
                    s += &y[k][u] + &lam[k][u];
                }
                s * C64::new(1.0 / n_users as f64, 0.0)
            })
            .collect();
        let x = concat(&avg);
        let d_cur = concat(&it_state.digital);
        let r_cur = fro2(&(&x - it_state.analog.matrix() * &d_cur));
        let (analog, d_new, _) = analog_update(&x, &it_state.analog, &d_cur, r_cur, spec, cfg.ridge);
        // (iii) digital least squares (refit by analog_update) + power
        it_state = Iterate {
            analog,
            digital: split(&d_new, k_count),
        };
        it_state.normalize(per_carrier);
        let f_new = it_state.effective();
        if f_new.iter().any(|b| !is_finite(b)) {
            return Err(Error::NonFinite { iteration: it });
        }

        // (iv) scaled dual updates
        let mut primal = 0.0f64;
        for k in 0..k_count {
            for u in 0..n_users {
                let r = &y[k][u] - &f_new[k];
                primal = primal.max(libm::sqrt(fro2(&r)));
                lam[k][u] += r;
            }
        }
        let dual = rho * max_norm_diff(&f_new, &f);
        primal_trace.push(primal);
        dual_trace.push(dual);
        f = f_new;

        if primal < cfg.primal_tol && dual < cfg.dual_tol {
            status = Status::Converged;
            break;
        }
        if it >= 50 && primal > 10.0 * primal_trace[it - 50] {
            break;
        }
        let rho_next = (rho * cfg.rho_growth).min(rho_max);
        let rescale = C64::new(rho / rho_next, 0.0);
        for row in lam.iter_mut() {
            for l in row.iter_mut() {
                *l *= rescale;
            }
        }
        rho = rho_next;
        mu = (mu * 1.2).min(mu_final);
    }

    let final_values = ev.values(&f, mu_final);
    if best.as_ref().is_none_or(|b| final_values.merit < b.0) {
        best = Some((final_values.merit, it_state.analog.clone(), it_state.digital.clone()));
    }
    let (_, mut analog, mut digital) = best.expect("at least one iterate");
    for &stage_mu in stages {
        (analog, digital) = polish(&ev, &analog, &digital, stage_mu, cfg.polish_iterations, cfg.objective_tol)?;
    }
    let state = Iterate { analog, digital };

    let precoder = HybridPrecoder::normalized(state.analog, state.digital, problem.total_power)?;
    let values = ev.values(crate::metrics::Precoder::blocks(&precoder), mu_final);
    if !ev.scalarizer().constraint_met(values.normalized, 1e-3) {
        status = Status::Infeasible;
    }
    let combiners = design_combiners(problem.channel, &precoder, dims.n_rx_rf)?;
    Ok(DesignResult {
        precoder,
        combiners,
        objective_trace,
        primal_trace,
        dual_trace,
        status,
        seed: cfg.seed,
        method: Method::Admm,
        scalarization: problem.scalarization,
        eta: ev.scalarizer().eta(values.normalized),
        values,
    })
}
