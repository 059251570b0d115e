//! Scalarized design objective and its gradient with respect to the
//! effective precoders `F[k]`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use super::DesignProblem;
use crate::channel::steering_unchecked;
use crate::linalg::{fro2, logdet_hpd, solve_hpd, CMat, C64};
use crate::metrics::{ssme_from_pattern, target_response};
use crate::scalarize::{normalize_metrics, CommMetric, RadarMetric, Scalarized, Scalarizer};
use crate::Result;

/// Raw and normalized objective values of one design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValues {
    pub radar: f64,
    pub comm: f64,
    pub normalized: (f64, f64),
    /// Smooth scalarized value at the evaluation penalty weight.
    pub scalarized: f64,
    /// Exact scalarized value used for ranking designs.
    pub merit: f64,
    pub coeffs: (f64, f64),
}

pub(crate) struct Gradients {
    pub values: ObjectiveValues,
    /// Gradient of the smooth scalarized objective, per subcarrier.
    pub total: Vec<CMat>,
    /// Gradient of the normalized radar metric, per subcarrier.
    pub radar: Vec<CMat>,
    /// Gradient of the normalized comm metric, per `[k][u]` term.
    pub comm: Vec<Vec<CMat>>,
    /// Fully digital Wiener receivers `[k][u]` at the evaluation point.
    pub wiener: Vec<Vec<CMat>>,
}

/// Precomputed data for evaluating one design problem.
pub struct ObjectiveEvaluator<'a> {
    problem: DesignProblem<'a>,
    scalarizer: Scalarizer,
    /// Steering vectors on the grid as columns (N_t x G).
    grid_steering: CMat,
    /// `diag(alpha) A^T` (Q x N_t) and its Gram matrix.
    response: CMat,
    response_gram: CMat,
}

impl<'a> ObjectiveEvaluator<'a> {
    pub fn new(problem: &DesignProblem<'a>) -> Result<Self> {
        let n_t = problem.dims.n_tx_antennas;
        let pts = problem.scene.grid.points();
        let mut grid_steering = CMat::zeros(n_t, pts.len());
        for (g, &u) in pts.iter().enumerate() {
            grid_steering.set_column(g, &steering_unchecked(u, n_t));
        }
        let response = target_response(problem.scene, n_t);
        let response_gram = response.ad_mul(&response);
        Ok(Self {
            problem: *problem,
            scalarizer: Scalarizer::new(problem.scalarization)?,
            grid_steering,
            response,
            response_gram,
        })
    }

    pub fn scalarizer(&self) -> &Scalarizer {
        &self.scalarizer
    }

    pub fn problem(&self) -> &DesignProblem<'a> {
        &self.problem
    }

    fn user_range(&self, u: usize) -> core::ops::Range<usize> {
        self.problem.dims.user_streams(u)
    }

    /// Raw radar metric and, optionally, its gradient.
    fn radar(&self, f: &[CMat], grad: bool) -> (f64, Option<Vec<CMat>>) {
        match self.problem.objective.radar {
            RadarMetric::Ssme => {
                let a = &self.grid_steering;
                let g_count = a.ncols();
                // S_k = A^T F_k, P_g = sum_k ||row g of S_k||^2
                let s: Vec<CMat> = f.iter().map(|fk| a.transpose() * fk).collect();
                let mut pattern = vec![0.0; g_count];
                for sk in &s {
                    for (g, p) in pattern.iter_mut().enumerate() {
                        *p += sk.row(g).iter().map(|z| z.norm_sqr()).sum::<f64>();
                    }
                }
                let v = ssme_from_pattern(&pattern, &self.problem.scene.desired);
                if !grad {
                    return (v.value, None);
                }
                let e: Vec<f64> = pattern
                    .iter()
                    .zip(&self.problem.scene.desired)
                    .map(|(p, d)| p - v.beta * d)
                    .collect();
                let a_conj = a.conjugate();
                let scale = 2.0 / g_count as f64;
                let grads = s
                    .into_iter()
                    .map(|mut sk| {
                        for (g, mut row) in sk.row_iter_mut().enumerate() {
                            row *= C64::new(scale * e[g], 0.0);
                        }
                        &a_conj * sk
                    })
                    .collect();
                (v.value, Some(grads))
            }
            RadarMetric::NegRadarMi => {
                let sigma2 = self.problem.radar_noise_variance;
                let mut total = 0.0;
                let mut grads = Vec::with_capacity(f.len());
                for fk in f {
                    let t = &self.response * fk;
                    let n = fk.ncols();
                    let mut m = t.ad_mul(&t) / C64::new(sigma2, 0.0);
                    for i in 0..n {
                        m[(i, i)] += C64::new(1.0, 0.0);
                    }
                    total -= logdet_hpd(&m).unwrap_or(0.0) / LN_2;
                    if grad {
                        // -(1/(sigma^2 ln 2)) B^H B F (I + F^H B^H B F / sigma^2)^-1
                        let bf = &self.response_gram * fk;
                        let sol = solve_hpd(&m, &bf.adjoint(), 0.0).adjoint();
                        grads.push(sol * C64::new(-1.0 / (sigma2 * LN_2), 0.0));
                    }
                }
                (total, grad.then_some(grads))
            }
        }
    }

    /// Raw comm metric, per-(k, u) gradients and Wiener receivers.
    fn comm(&self, f: &[CMat], grad: bool) -> (f64, Vec<Vec<CMat>>, Vec<Vec<CMat>>) {
        let ch = self.problem.channel;
        let sigma2 = ch.noise_variance;
        let n_users = self.problem.dims.n_users;
        let k_count = f.len();
        let mut total = 0.0;
        let mut grads = Vec::new();
        let mut wiener = Vec::new();
        for (k, fk) in f.iter().enumerate() {
            let mut gk = Vec::new();
            let mut wk = Vec::new();
            for u in 0..n_users {
                let h = ch.get(k, u);
                let hf = h * fk;
                let n_r = hf.nrows();
                let cols = self.user_range(u);
                let mut r_all = &hf * hf.adjoint();
                for i in 0..n_r {
                    r_all[(i, i)] += C64::new(sigma2, 0.0);
                }
                match self.problem.objective.comm {
                    CommMetric::Mmse => {
                        let target = hf.columns(cols.start, cols.len()).into_owned();
                        let w = solve_hpd(&r_all, &target, 0.0);
                        let mut err = -w.ad_mul(&hf);
                        for (i, j) in cols.clone().enumerate() {
                            err[(i, j)] += C64::new(1.0, 0.0);
                        }
                        total += fro2(&err) + sigma2 * fro2(&w);
                        if grad {
                            gk.push(-(h.ad_mul(&w) * &err));
                        }
                        wk.push(w);
                    }
                    CommMetric::NegSe => {
                        let mut hf_int = hf.clone();
                        hf_int.columns_mut(cols.start, cols.len()).fill(C64::new(0.0, 0.0));
                        let mut r_int = &hf_int * hf_int.adjoint();
                        for i in 0..n_r {
                            r_int[(i, i)] += C64::new(sigma2, 0.0);
                        }
                        let ld_all = logdet_hpd(&r_all).unwrap_or(0.0);
                        let ld_int = logdet_hpd(&r_int).unwrap_or(0.0);
                        let scale = 1.0 / (k_count as f64 * LN_2);
                        total -= scale * (ld_all - ld_int);
                        let target = hf.columns(cols.start, cols.len()).into_owned();
                        let w = solve_hpd(&r_all, &target, 0.0);
                        if grad {
                            let a = h.ad_mul(&solve_hpd(&r_all, &hf, 0.0));
                            let b = h.ad_mul(&solve_hpd(&r_int, &hf_int, 0.0));
                            gk.push((a - b) * C64::new(-scale, 0.0));
                        }
                        wk.push(w);
                    }
                }
            }
            grads.push(gk);
            wiener.push(wk);
        }
        (total, grads, wiener)
    }

    fn assemble(&self, radar: f64, comm: f64, mu: f64) -> ObjectiveValues {
        let normalized = normalize_metrics(radar, comm, &self.problem.objective);
        let Scalarized { value, coeffs } = self.scalarizer.smooth(normalized, mu);
        ObjectiveValues {
            radar,
            comm,
            normalized,
            scalarized: value,
            merit: self.scalarizer.merit(normalized),
            coeffs,
        }
    }

    /// Objective values at penalty weight `mu`.
    pub fn values(&self, f: &[CMat], mu: f64) -> ObjectiveValues {
        let (r, _) = self.radar(f, false);
        let (c, _, _) = self.comm(f, false);
        self.assemble(r, c, mu)
    }

    pub(crate) fn gradients(&self, f: &[CMat], mu: f64) -> Gradients {
        let (r, rg) = self.radar(f, true);
        let (c, cg, wiener) = self.comm(f, true);
        let values = self.assemble(r, c, mu);
        let rs = C64::new(1.0 / self.problem.objective.radar_norm.scale, 0.0);
        let cs = C64::new(1.0 / self.problem.objective.comm_norm.scale, 0.0);
        let radar: Vec<CMat> = rg.unwrap_or_default().into_iter().map(|g| g * rs).collect();
        let comm: Vec<Vec<CMat>> = cg
            .into_iter()
            .map(|gk| gk.into_iter().map(|g| g * cs).collect())
            .collect();
        let (cr, cc) = values.coeffs;
        let total = radar
            .iter()
            .zip(&comm)
            .map(|(gr, gk)| {
                let mut t = gr * C64::new(cr, 0.0);
                for g in gk {
                    t += g * C64::new(cc, 0.0);
                }
                t
            })
            .collect();
        Gradients {
            values,
            total,
            radar,
            comm,
            wiener,
        }
    }

    /// Public gradient of the smooth scalarized objective.
    pub fn gradient(&self, f: &[CMat], mu: f64) -> (ObjectiveValues, Vec<CMat>) {
        let g = self.gradients(f, mu);
        (g.values, g.total)
    }
}
