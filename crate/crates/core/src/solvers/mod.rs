//! Hybrid beamformer design: fully digital reference, two-stage
//! factorization, consensus ADMM and receive combiners.
//!
//! Gradients are Wirtinger derivatives `G = df/d conj(F)`, so a first-order
//! change is `df = 2 Re tr(G^H dF)` and `-G` is a descent direction.

mod admm;
mod combiners;
mod digital;
mod factorize;
mod objective;
mod polish;

use alloc::vec::Vec;

use crate::architecture::{AnalogPrecoder, ArchitectureSpec};
use crate::channel::{ChannelSet, SystemDims};
use crate::error::{domain, shape};
use crate::linalg::{cis, CMat};
use crate::metrics::{HybridCombiner, HybridPrecoder, RadarScene};
use crate::scalarize::{Normalizer, ObjectiveSpec, ScalarizationSpec};
use crate::{Error, Result};

pub use admm::design_consensus_admm;
pub use combiners::{design_combiners, design_digital_combiners, wiener_combiners};
pub use digital::{design_fully_digital, matched_precoder, FullyDigitalDesign};
pub use factorize::{constructive_split, factorize_two_stage, factorize_two_stage_from, Factorization};
pub use objective::{ObjectiveValues, ObjectiveEvaluator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub primal_tol: f64,
    pub dual_tol: f64,
    /// Initial ADMM penalty.
    pub rho: f64,
    /// Per-iteration ADMM penalty growth (capped at `1e3 * rho`).
    pub rho_growth: f64,
    /// Ridge for every least-squares subproblem.
    pub ridge: f64,
    /// Relative objective change treated as stagnation.
    pub objective_tol: f64,
    /// Gradient refinement steps applied to the final hybrid design.
    pub polish_iterations: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 300,
            primal_tol: 1e-4,
            dual_tol: 1e-4,
            rho: 1.0,
            rho_growth: 1.05,
            ridge: crate::linalg::LS_RIDGE,
            objective_tol: 1e-9,
            polish_iterations: 200,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(domain!("max_iterations must be at least 1"));
        }
        if !(self.primal_tol > 0.0 && self.dual_tol > 0.0 && self.objective_tol > 0.0) {
            return Err(domain!("tolerances must be positive"));
        }
        if !(self.rho > 0.0) || !(self.rho_growth >= 1.0) {
            return Err(domain!("need rho > 0 and rho_growth >= 1"));
        }
        if !(self.ridge >= 0.0) {
            return Err(domain!("ridge must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Converged,
    MaxIter,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    TwoStage,
    Admm,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::TwoStage => "twostage",
            Method::Admm => "admm",
        }
    }
}

/// Everything that defines one design instance.
#[derive(Debug, Clone, Copy)]
pub struct DesignProblem<'a> {
    pub channel: &'a ChannelSet,
    pub scene: &'a RadarScene,
    pub dims: SystemDims,
    pub total_power: f64,
    pub radar_noise_variance: f64,
    pub objective: ObjectiveSpec,
    pub scalarization: ScalarizationSpec,
}

impl<'a> DesignProblem<'a> {
    pub fn validate(&self) -> Result<()> {
        self.dims.validate()?;
        self.objective.validate()?;
        self.scalarization.validate()?;
        let ch = self.channel;
        if ch.n_subcarriers() != self.dims.n_subcarriers || ch.n_users() != self.dims.n_users {
            return Err(shape!(
                "channel is {}x{} (K x U), dims say {}x{}",
                ch.n_subcarriers(),
                ch.n_users(),
                self.dims.n_subcarriers,
                self.dims.n_users
            ));
        }
        let h = ch.get(0, 0);
        if h.shape() != (self.dims.n_rx_antennas, self.dims.n_tx_antennas) {
            return Err(shape!("channel blocks are {:?}, dims need N_r x N_t", h.shape()));
        }
        if !(self.total_power > 0.0) || !(self.radar_noise_variance > 0.0) || !(ch.noise_variance > 0.0) {
            return Err(domain!("power and noise variances must be positive"));
        }
        Ok(())
    }

    pub fn with_scalarization(&self, scalarization: ScalarizationSpec) -> Self {
        Self { scalarization, ..*self }
    }

    pub fn with_objective(&self, objective: ObjectiveSpec) -> Self {
        Self { objective, ..*self }
    }

    pub fn per_carrier_power(&self) -> f64 {
        self.total_power / self.dims.n_subcarriers as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub precoder: HybridPrecoder,
    pub combiners: HybridCombiner,
    /// Scalarized objective per iteration.
    pub objective_trace: Vec<f64>,
    /// ADMM: max consensus residual per iteration. Two-stage: factorization
    /// residual per iteration.
    pub primal_trace: Vec<f64>,
    pub dual_trace: Vec<f64>,
    pub status: Status,
    pub seed: u64,
    pub method: Method,
    pub scalarization: ScalarizationSpec,
    pub values: ObjectiveValues,
    /// Achieved level for min-max problems.
    pub eta: Option<f64>,
}

/// Represents fully digital precoders as a Full-connection hybrid with
/// `N_RF = N_t` and a unit-modulus DFT analog stage.
pub fn hybrid_from_fully_digital(blocks: &[CMat]) -> Result<HybridPrecoder> {
    let n_t = blocks[0].nrows();
    let spec = ArchitectureSpec::full(n_t, n_t)?;
    let dft = CMat::from_fn(n_t, n_t, |m, n| {
        cis(-2.0 * core::f64::consts::PI * (m * n % n_t) as f64 / n_t as f64)
    });
    let scale = crate::linalg::C64::new(1.0 / n_t as f64, 0.0);
    let digital = blocks.iter().map(|f| dft.ad_mul(f) * scale).collect();
    HybridPrecoder::new(AnalogPrecoder::new(dft, spec)?, digital)
}

/// Normalizers from two fully digital single-objective pre-solves: each
/// metric's offset is its best value and its scale the gap to its value at
/// the other objective's optimum.
pub fn compute_normalizers(problem: &DesignProblem<'_>, cfg: &SolverConfig) -> Result<(Normalizer, Normalizer)> {
    let raw = ObjectiveSpec::raw(problem.objective.radar, problem.objective.comm);
    let base = problem.with_objective(raw);
    let radar_only = design_fully_digital(&base.with_scalarization(ScalarizationSpec::weighted(1.0)), cfg)?;
    let comm_only = design_fully_digital(&base.with_scalarization(ScalarizationSpec::weighted(0.0)), cfg)?;
    let (r_best, c_worst) = (radar_only.values.radar, radar_only.values.comm);
    let (r_worst, c_best) = (comm_only.values.radar, comm_only.values.comm);
    Ok((
        Normalizer::from_bracket(r_best, r_worst),
        Normalizer::from_bracket(c_best, c_worst),
    ))
}

/// Dispatches to the requested method.
pub fn solve(problem: &DesignProblem<'_>, method: Method, spec: &ArchitectureSpec, cfg: &SolverConfig) -> Result<DesignResult> {
    problem.validate()?;
    cfg.validate()?;
    spec.validate()?;
    if spec.n_antennas != problem.dims.n_tx_antennas || spec.n_rf != problem.dims.n_tx_rf {
        return Err(shape!("architecture does not match the system dimensions"));
    }
    match method {
        Method::Admm => design_consensus_admm(problem, spec, cfg),
        Method::TwoStage => {
            if let ScalarizationSpec::EpsilonConstraint { .. } = problem.scalarization {
                return Err(Error::Unsupported(alloc::string::String::from(
                    "two-stage design does not support the epsilon-constraint formulation",
                )));
            }
            let fd = design_fully_digital(problem, cfg)?;
            design_two_stage_from(problem, &fd, spec, cfg)
        }
    }
}

/// Second stage of the two-stage method: factorizes an existing fully
/// digital design onto `spec` and designs the combiners.
pub fn design_two_stage_from(
    problem: &DesignProblem<'_>,
    fd: &FullyDigitalDesign,
    spec: &ArchitectureSpec,
    cfg: &SolverConfig,
) -> Result<DesignResult> {
    let fac = factorize_two_stage(&fd.blocks, spec, problem.total_power, cfg)?;
    let ev = ObjectiveEvaluator::new(problem)?;
    let values = ev.values(crate::metrics::Precoder::blocks(&fac.precoder), 0.0);
    let combiners = design_combiners(problem.channel, &fac.precoder, problem.dims.n_rx_rf)?;
    Ok(DesignResult {
        precoder: fac.precoder,
        combiners,
        objective_trace: fd.objective_trace.clone(),
        primal_trace: fac.residual_trace,
        dual_trace: Vec::new(),
        status: fd.status,
        seed: cfg.seed,
        method: Method::TwoStage,
        scalarization: problem.scalarization,
        eta: ev.scalarizer().eta(values.normalized),
        values,
    })
}
