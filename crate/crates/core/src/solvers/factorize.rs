//! Two-stage design: factorize a fully digital precoder into
//! `F_RF F_D[k]` by alternating minimization.

use alloc::vec::Vec;

use super::SolverConfig;
use crate::architecture::{project_analog, random_feasible, AnalogPrecoder, ArchitectureKind, ArchitectureSpec};
use crate::linalg::{angle, cis, dominant_left_subspace, eigh_sorted, fro2, ridge_lstsq, CMat, C64};
use crate::metrics::HybridPrecoder;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub precoder: HybridPrecoder,
    /// `sum_k ||F*[k] - F_RF F_D[k]||^2` after every iteration (before the
    /// final power renormalization); nonincreasing.
    pub residual_trace: Vec<f64>,
}

/// Stacks `[F[1] .. F[K]]` horizontally.
pub(crate) fn concat(blocks: &[CMat]) -> CMat {
    let n = blocks[0].ncols();
    let mut x = CMat::zeros(blocks[0].nrows(), n * blocks.len());
    for (k, b) in blocks.iter().enumerate() {
        x.columns_mut(k * n, n).copy_from(b);
    }
    x
}

pub(crate) fn split(x: &CMat, parts: usize) -> Vec<CMat> {
    let n = x.ncols() / parts;
    (0..parts).map(|k| x.columns(k * n, n).into_owned()).collect()
}

/// Least-squares digital part and the remaining residual.
pub(crate) fn ls_fit(analog: &CMat, x: &CMat, ridge: f64) -> (CMat, f64) {
    let d = ridge_lstsq(analog, x, ridge);
    let r = fro2(&(x - analog * &d));
    (d, r)
}

/// Constructive Full-connection analog matrix for `x`.
///
/// With `N_RF = 2r`, the dominant rank-`r` basis `B` of `x` is written as
/// `c (P1 + P2)` with unit-modulus `P1`, `P2`: every entry `b` becomes
/// `c (e^{j(arg b + t)} + e^{j(arg b - t)})`, `t = arccos(|b| / 2c)`. Any
/// matrix of rank `<= r` is then exactly representable. Returns `None` for
/// other architectures or an odd RF-chain count.
pub fn constructive_split(x: &CMat, spec: &ArchitectureSpec) -> Option<AnalogPrecoder> {
    if spec.kind != ArchitectureKind::Full || spec.n_rf < 2 || spec.n_rf % 2 != 0 {
        return None;
    }
    let r = spec.n_rf / 2;
    let n_t = spec.n_antennas;
    let basis = dominant_left_subspace(x, r);
    let mut f = CMat::zeros(n_t, spec.n_rf);
    for j in 0..basis.ncols() {
        let col = basis.column(j);
        let c = 0.5 * col.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        for i in 0..n_t {
            let b = col[i];
            let t = if c > 0.0 { libm::acos((b.norm() / (2.0 * c)).min(1.0)) } else { 0.5 * core::f64::consts::PI };
            let phi = angle(b);
            f[(i, j)] = cis(phi + t);
            f[(i, j + r)] = cis(phi - t);
        }
    }
    AnalogPrecoder::new(f, *spec).ok()
}

/// One analog update of `min ||X - F_RF D||^2` over feasible `F_RF` with `D`
/// refit by least squares. Candidates are the current matrix, the projected
/// cross-term `proj(X D^H)`, a majorization-minimization step and (Full,
/// even `N_RF`) the constructive split; the best one is kept, so the
/// residual never increases.
pub(crate) fn analog_update(
    x: &CMat,
    current: &AnalogPrecoder,
    d: &CMat,
    residual: f64,
    spec: &ArchitectureSpec,
    ridge: f64,
) -> (AnalogPrecoder, CMat, f64) {
    let mut best = (current.clone(), d.clone(), residual);
    let mut consider = |cand: AnalogPrecoder| {
        let (dd, r) = ls_fit(cand.matrix(), x, ridge);
        if r < best.2 {
            best = (cand, dd, r);
        }
    };
    let xdh = x * d.adjoint();
    if let Ok(c) = project_analog(&xdh, spec) {
        consider(c);
    }
    let ddh = d * d.adjoint();
    let (vals, _) = eigh_sorted(&ddh);
    let lmax = vals.last().copied().unwrap_or(0.0);
    if lmax > 0.0 {
        let f = current.matrix();
        let z = f - (f * &ddh - &xdh) * C64::new(1.0 / lmax, 0.0);
        if let Ok(c) = project_analog(&z, spec) {
            consider(c);
        }
    }
    if let Some(c) = constructive_split(x, spec) {
        consider(c);
    }
    best
}

/// Alternating minimization from a given analog start.
pub fn factorize_two_stage_from(
    f_star: &[CMat],
    start: AnalogPrecoder,
    total_power: f64,
    cfg: &SolverConfig,
) -> Result<Factorization> {
    let spec = *start.spec();
    let x = concat(f_star);
    let (mut d, mut residual) = ls_fit(start.matrix(), &x, cfg.ridge);
    let mut analog = start;
    let mut trace = alloc::vec![residual];
    let floor = 1e-30 * fro2(&x).max(1e-300);
    for _ in 0..cfg.max_iterations {
        let (a, dd, r) = analog_update(&x, &analog, &d, residual, &spec, cfg.ridge);
        let improvement = residual - r;
        analog = a;
        d = dd;
        residual = r;
        trace.push(residual);
        if improvement <= cfg.objective_tol * residual || residual <= floor {
            break;
        }
    }
    let precoder = HybridPrecoder::normalized(analog, split(&d, f_star.len()), total_power)?;
    Ok(Factorization {
        precoder,
        residual_trace: trace,
    })
}

/// Two-stage factorization. The analog start is the constructive split when
/// it represents `F*` exactly in principle (Full, `N_RF >= 2 N_s`) and
/// `random_feasible(seed)` otherwise.
pub fn factorize_two_stage(
    f_star: &[CMat],
    spec: &ArchitectureSpec,
    total_power: f64,
    cfg: &SolverConfig,
) -> Result<Factorization> {
    spec.validate()?;
    let n_s = f_star[0].ncols();
    let start = match constructive_split(&concat(f_star), spec) {
        Some(c) if spec.n_rf >= 2 * n_s => c,
        _ => random_feasible(spec, cfg.seed),
    };
    factorize_two_stage_from(f_star, start, total_power, cfg)
}
