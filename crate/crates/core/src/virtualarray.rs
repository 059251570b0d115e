//! Multi-carrier virtual array, MUSIC and the DOA resolution study.
//!
//! Matched filtering `K` orthogonal subcarriers at an `M_r`-channel radar
//! receiver yields a `K M_r` virtual data vector. Element `k M_r + m` of the
//! model vector at direction `u` is `(D^T a_t(u))_k a_r(u)_m`, where column
//! `k` of `D` is the transmitted cross-term `F[k] s_k`.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::architecture::{AnalogPrecoder, ArchitectureSpec};
use crate::channel::{steering_derivative, steering_unchecked};
use crate::error::domain;
use crate::linalg::{cis, eigh_sorted, CMat, CVec, C64};
use crate::metrics::{HybridPrecoder, Precoder, RadarScene, Target};
use crate::rng::{complex_gaussian, substream, uniform_phase};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct VirtualArrayModel {
    cross_terms: CMat,
    n_rx: usize,
    noise_variance: f64,
    snapshots: CMat,
}

impl VirtualArrayModel {
    /// Model without data, from explicit cross-terms `D` (N_t x K).
    pub fn from_cross_terms(cross_terms: CMat, n_rx: usize, noise_variance: f64) -> Result<Self> {
        if n_rx == 0 || cross_terms.ncols() == 0 {
            return Err(domain!("virtual array needs M_r >= 1 and K >= 1"));
        }
        Ok(Self {
            cross_terms,
            n_rx,
            noise_variance,
            snapshots: CMat::zeros(0, 0),
        })
    }

    /// Data-free model with all-ones probing symbols.
    pub fn noise_free<P: Precoder + ?Sized>(p: &P, n_rx: usize, noise_variance: f64) -> Self {
        let blocks = p.blocks();
        let n_t = blocks[0].nrows();
        let d = CMat::from_fn(n_t, blocks.len(), |i, k| blocks[k].row(i).sum());
        Self {
            cross_terms: d,
            n_rx: n_rx.max(1),
            noise_variance,
            snapshots: CMat::zeros(0, 0),
        }
    }

    pub fn n_subcarriers(&self) -> usize {
        self.cross_terms.ncols()
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Virtual array dimension `K M_r`.
    pub fn dimension(&self) -> usize {
        self.n_subcarriers() * self.n_rx
    }

    pub fn cross_terms(&self) -> &CMat {
        &self.cross_terms
    }

    /// Snapshots as columns (`K M_r` x T).
    pub fn snapshots(&self) -> &CMat {
        &self.snapshots
    }

    pub fn snapshot(&self, t: usize) -> CVec {
        self.snapshots.column(t).into_owned()
    }

    fn transmit_factor(&self, a_t: &CVec) -> CVec {
        self.cross_terms.transpose() * a_t
    }

    /// Virtual model vector `(D^T a_t(u)) kron a_r(u)`.
    pub fn model_vector(&self, u: f64) -> CVec {
        let n_t = self.cross_terms.nrows();
        let t = self.transmit_factor(&steering_unchecked(u, n_t));
        t.kronecker(&steering_unchecked(u, self.n_rx))
    }

    /// Derivative of [`Self::model_vector`] with respect to `u`.
    pub fn model_derivative(&self, u: f64) -> CVec {
        let n_t = self.cross_terms.nrows();
        let t = self.transmit_factor(&steering_unchecked(u, n_t));
        let dt = self.transmit_factor(&steering_derivative(u, n_t));
        dt.kronecker(&steering_unchecked(u, self.n_rx))
            + t.kronecker(&steering_derivative(u, self.n_rx))
    }

    /// Noise-free mean `sum_q alpha_q v(u_q)`.
    pub fn mean(&self, targets: &[Target]) -> CVec {
        targets
            .iter()
            .fold(CVec::zeros(self.dimension()), |acc, t| acc + self.model_vector(t.u) * t.gain)
    }

    /// Real Fisher information for one snapshot, parameters ordered
    /// `[u_q, Re alpha_q, Im alpha_q]` per target:
    /// `(2 / sigma^2) Re(J^H J)`.
    pub fn fisher_information(&self, targets: &[Target], noise_variance: f64) -> DMatrix<f64> {
        let dim = self.dimension();
        let mut jac = CMat::zeros(dim, 3 * targets.len());
        for (q, t) in targets.iter().enumerate() {
            let v = self.model_vector(t.u);
            let dv = self.model_derivative(t.u) * t.gain;
            jac.set_column(3 * q, &dv);
            jac.set_column(3 * q + 1, &v);
            jac.set_column(3 * q + 2, &(v * C64::new(0.0, 1.0)));
        }
        jac.ad_mul(&jac).map(|z| 2.0 * z.re / noise_variance)
    }

    /// Sample covariance of the stored snapshots.
    pub fn sample_covariance(&self) -> CMat {
        let t = self.snapshots.ncols().max(1) as f64;
        (&self.snapshots * self.snapshots.adjoint()) / C64::new(t, 0.0)
    }
}

/// Diagonal of the direction block of the inverse Fisher matrix; parameters
/// are laid out as in [`VirtualArrayModel::fisher_information`]. A singular
/// matrix gives infinite bounds.
pub fn theta_crlb(fim: &DMatrix<f64>, n_targets: usize) -> Vec<f64> {
    let scale = fim.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let inverse = if scale > 0.0 {
        fim.clone().cholesky().and_then(|c| {
            let l = c.l_dirty();
            let min_pivot = (0..l.nrows()).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min);
            (min_pivot * min_pivot > 1e-13 * scale).then(|| c.inverse())
        })
    } else {
        None
    };
    match inverse {
        Some(inv) => (0..n_targets).map(|q| inv[(3 * q, 3 * q)]).collect(),
        None => vec![f64::INFINITY; n_targets],
    }
}

/// Draws unit-modulus probing symbols (N_s per carrier) and simulates
/// `n_snapshots` virtual snapshots.
///
/// Column `k` of `D` is `F[k] s_k`; snapshot `t` is
/// `sum_q alpha_q e^{j psi_qt} v(u_q) + n_t` with independent uniform target
/// phases `psi_qt` and `n_t ~ CN(0, sigma^2 I)`.
pub fn build_virtual_data<P: Precoder + ?Sized>(
    p: &P,
    scene: &RadarScene,
    n_rx: usize,
    noise_variance: f64,
    n_snapshots: usize,
    seed: u64,
) -> Result<VirtualArrayModel> {
    let blocks = p.blocks();
    let mut rng = substream(seed, 0);
    let symbols: Vec<CVec> = blocks
        .iter()
        .map(|f| CVec::from_fn(f.ncols(), |_, _| cis(uniform_phase(&mut rng))))
        .collect();
    build_virtual_data_with_symbols(p, scene, &symbols, n_rx, noise_variance, n_snapshots, seed)
}

/// As [`build_virtual_data`] with caller-supplied symbols `s_k`.
pub fn build_virtual_data_with_symbols<P: Precoder + ?Sized>(
    p: &P,
    scene: &RadarScene,
    symbols: &[CVec],
    n_rx: usize,
    noise_variance: f64,
    n_snapshots: usize,
    seed: u64,
) -> Result<VirtualArrayModel> {
    let blocks = p.blocks();
    if n_rx == 0 {
        return Err(domain!("M_r must be at least 1"));
    }
    if symbols.len() != blocks.len() || symbols.iter().zip(blocks).any(|(s, f)| s.len() != f.ncols()) {
        return Err(domain!("one symbol vector of length N_s per subcarrier is required"));
    }
    if !(noise_variance >= 0.0) {
        return Err(domain!("noise variance must be nonnegative"));
    }
    let n_t = blocks[0].nrows();
    let mut d = CMat::zeros(n_t, blocks.len());
    for (k, (f, s)) in blocks.iter().zip(symbols).enumerate() {
        d.set_column(k, &(f * s));
    }
    let mut model = VirtualArrayModel::from_cross_terms(d, n_rx, noise_variance)?;
    let dim = model.dimension();
    let vectors: Vec<CVec> = scene.targets.iter().map(|t| model.model_vector(t.u)).collect();
    let mut rng = substream(seed, 1);
    let mut x = CMat::zeros(dim, n_snapshots);
    for t in 0..n_snapshots {
        let mut col = CVec::zeros(dim);
        for (target, v) in scene.targets.iter().zip(&vectors) {
            col.axpy(target.gain * cis(uniform_phase(&mut rng)), v, C64::new(1.0, 0.0));
        }
        if noise_variance > 0.0 {
            for z in col.iter_mut() {
                *z += complex_gaussian(&mut rng, noise_variance);
            }
        }
        x.set_column(t, &col);
    }
    model.snapshots = x;
    Ok(model)
}

/// Signal subspace (dominant `q` eigenvectors of the sample covariance).
pub struct MusicEstimator<'a> {
    model: &'a VirtualArrayModel,
    signal: CMat,
}

impl<'a> MusicEstimator<'a> {
    pub fn new(model: &'a VirtualArrayModel, q: usize) -> Result<Self> {
        let dim = model.dimension();
        if q == 0 || q >= dim {
            return Err(domain!("MUSIC needs 1 <= Q < {dim}, got {q}"));
        }
        if model.snapshots().ncols() < dim {
            return Err(domain!(
                "MUSIC needs at least {dim} snapshots, got {}",
                model.snapshots().ncols()
            ));
        }
        let (_, vecs) = eigh_sorted(&model.sample_covariance());
        let signal = vecs.columns(dim - q, q).into_owned();
        Ok(Self { model, signal })
    }

    /// `1 / ||E_n^H v(u)||^2` with `v` normalized to unit norm.
    pub fn value(&self, u: f64) -> f64 {
        let v = self.model.model_vector(u);
        let norm2 = v.norm_squared();
        if norm2 == 0.0 {
            return 1.0;
        }
        let in_signal = self.signal.ad_mul(&v).norm_squared() / norm2;
        1.0 / (1.0 - in_signal).max(1e-16)
    }

    pub fn spectrum(&self, points: &[f64]) -> Vec<f64> {
        points.iter().map(|&u| self.value(u)).collect()
    }

    /// Continuous maximizer of the spectrum in `[lo, hi]` by golden-section
    /// search.
    pub fn refine_peak(&self, lo: f64, hi: f64) -> f64 {
        let inv_phi = 0.5 * (libm::sqrt(5.0) - 1.0);
        let (mut a, mut b) = (lo.max(-1.0), hi.min(1.0));
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (self.value(c), self.value(d));
        while b - a > 1e-10 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = self.value(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = self.value(d);
            }
        }
        0.5 * (a + b)
    }
}

/// MUSIC pseudo-spectrum on `points` for `q` sources.
pub fn music_spectrum(model: &VirtualArrayModel, points: &[f64], q: usize) -> Result<Vec<f64>> {
    Ok(MusicEstimator::new(model, q)?.spectrum(points))
}

/// Snapshot count used for covariance estimation: `10 K M_r`.
pub fn default_snapshot_count(n_subcarriers: usize, n_rx: usize) -> usize {
    10 * n_subcarriers * n_rx
}

/// DOA probing precoder on an `n_t`-element Full-connection array with
/// `N_RF = n_t` (unit-modulus DFT analog stage). Carrier `k` excites only
/// element `k M_r`, so the virtual array is a filled `K M_r`-element ULA.
/// Power per carrier is `total_power / K`.
pub fn probing_precoder(n_t: usize, n_subcarriers: usize, n_rx: usize, total_power: f64) -> Result<HybridPrecoder> {
    if n_subcarriers == 0 || n_rx == 0 || (n_subcarriers - 1) * n_rx >= n_t {
        return Err(domain!(
            "probing precoder needs n_t > (K - 1) M_r, got n_t={n_t}, K={n_subcarriers}, M_r={n_rx}"
        ));
    }
    let spec = ArchitectureSpec::full(n_t, n_t)?;
    let dft = CMat::from_fn(n_t, n_t, |m, n| {
        cis(-2.0 * core::f64::consts::PI * (m * n % n_t) as f64 / n_t as f64)
    });
    let amp = libm::sqrt(total_power / n_subcarriers as f64);
    let digital = (0..n_subcarriers)
        .map(|k| {
            let row = dft.row(k * n_rx).adjoint();
            CMat::from_fn(n_t, 1, |i, _| row[i] * (amp / n_t as f64))
        })
        .collect();
    HybridPrecoder::new(AnalogPrecoder::new(dft, spec)?, digital)
}

/// Whether two sources are resolved: the two largest local maxima of the
/// spectrum on a fine grid over `[u1 - d, u2 + d]` (`d = u2 - u1`) lie on
/// opposite sides of the midpoint, each within `d / 2` of its source.
pub fn is_resolved(music: &MusicEstimator<'_>, u1: f64, u2: f64) -> bool {
    let d = u2 - u1;
    let n = 241;
    let pts: Vec<f64> = (0..n).map(|i| u1 - d + 3.0 * d * i as f64 / (n - 1) as f64).collect();
    let spec: Vec<f64> = pts.iter().map(|&u| music.value(u.clamp(-1.0, 1.0))).collect();
    let mut peaks: Vec<usize> = (1..n - 1)
        .filter(|&i| spec[i] > spec[i - 1] && spec[i] >= spec[i + 1])
        .collect();
    if peaks.len() < 2 {
        return false;
    }
    peaks.sort_by(|&a, &b| spec[b].total_cmp(&spec[a]));
    let (mut a, mut b) = (pts[peaks[0]], pts[peaks[1]]);
    if a > b {
        core::mem::swap(&mut a, &mut b);
    }
    (a - u1).abs() < 0.5 * d && (b - u2).abs() < 0.5 * d
}

/// Settings shared by the resolution and RMSE studies.
#[derive(Debug, Clone, PartialEq)]
pub struct DoaStudyConfig {
    pub k_values: Vec<usize>,
    /// Total-power SNR `P |alpha|^2 / sigma^2` in dB.
    pub snr_db: Vec<f64>,
    pub n_rx: usize,
    pub total_power: f64,
    /// Direction of the single source used for RMSE.
    pub source_u: f64,
    /// Midpoint of the two-source pair used for resolution.
    pub pair_center: f64,
    pub rmse_trials: usize,
    pub resolution_trials: usize,
    pub seed: u64,
}

impl Default for DoaStudyConfig {
    fn default() -> Self {
        Self {
            k_values: vec![1, 2, 4, 8],
            snr_db: vec![10.0, 20.0, 30.0],
            n_rx: 8,
            total_power: 1.0,
            source_u: 0.2,
            pair_center: 0.1,
            rmse_trials: 200,
            resolution_trials: 5,
            seed: 1,
        }
    }
}

impl DoaStudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_values.is_empty() || self.snr_db.is_empty() {
            return Err(domain!("DOA study sweep lists must be nonempty"));
        }
        if self.k_values.contains(&0) || self.n_rx == 0 {
            return Err(domain!("K and M_r must be at least 1"));
        }
        if self.rmse_trials == 0 || self.resolution_trials == 0 {
            return Err(domain!("trial counts must be at least 1"));
        }
        if !(self.total_power > 0.0) || self.source_u.abs() >= 1.0 || self.pair_center.abs() >= 1.0 {
            return Err(domain!("invalid power or source directions"));
        }
        Ok(())
    }

    /// Transmit array size: large enough for the largest K.
    pub fn n_tx(&self) -> usize {
        self.k_values.iter().copied().max().unwrap_or(1) * self.n_rx
    }

    fn noise_variance(&self, snr_db: f64) -> f64 {
        self.total_power / libm::pow(10.0, snr_db / 10.0)
    }
}

/// One (K, SNR) cell of the DOA study. `crlb` is the square root of the
/// direction bound for the simulated snapshot count, comparable to `rmse`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoaCell {
    pub k: usize,
    pub snr_db: f64,
    pub delta_u_threshold: f64,
    pub rmse: f64,
    pub crlb: f64,
}

fn single_target_scene(targets: Vec<Target>) -> RadarScene {
    RadarScene {
        targets,
        mainlobe: Vec::new(),
        grid: crate::channel::make_grid(2).expect("two-point grid"),
        desired: vec![0.0, 0.0],
    }
}

/// Fraction of `trials` in which two equal-power sources `delta_u` apart are
/// resolved by MUSIC.
pub fn resolution_rate(
    cfg: &DoaStudyConfig,
    k: usize,
    snr_db: f64,
    delta_u: f64,
    seed: u64,
) -> Result<f64> {
    let p = probing_precoder(cfg.n_tx(), k, cfg.n_rx, cfg.total_power)?;
    let sigma2 = cfg.noise_variance(snr_db);
    let (u1, u2) = (cfg.pair_center - 0.5 * delta_u, cfg.pair_center + 0.5 * delta_u);
    let scene = single_target_scene(vec![
        Target { u: u1, gain: C64::new(1.0, 0.0) },
        Target { u: u2, gain: C64::new(1.0, 0.0) },
    ]);
    let t = default_snapshot_count(k, cfg.n_rx);
    let mut hits = 0;
    for trial in 0..cfg.resolution_trials {
        let s = seed.wrapping_mul(1_000_003).wrapping_add(trial as u64);
        let model = build_virtual_data(&p, &scene, cfg.n_rx, sigma2, t, s)?;
        if is_resolved(&MusicEstimator::new(&model, 2)?, u1, u2) {
            hits += 1;
        }
    }
    Ok(hits as f64 / cfg.resolution_trials as f64)
}

/// Smallest separation resolved in at least half of the trials, by bisection
/// over `[1e-4, 1]` (fixed seeds, so the predicate is deterministic).
pub fn resolution_threshold(cfg: &DoaStudyConfig, k: usize, snr_db: f64) -> Result<f64> {
    let resolved = |du: f64| -> Result<bool> { Ok(resolution_rate(cfg, k, snr_db, du, cfg.seed)? >= 0.5) };
    let (mut lo, mut hi) = (1e-4, 1.0);
    if !resolved(hi)? {
        return Ok(f64::INFINITY);
    }
    if resolved(lo)? {
        return Ok(lo);
    }
    for _ in 0..24 {
        let mid = libm::sqrt(lo * hi);
        if resolved(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Monte Carlo RMSE of single-source MUSIC peak picking (grid search plus
/// golden-section refinement) and the matching CRLB.
pub fn single_source_rmse(cfg: &DoaStudyConfig, k: usize, snr_db: f64) -> Result<(f64, f64)> {
    let p = probing_precoder(cfg.n_tx(), k, cfg.n_rx, cfg.total_power)?;
    let sigma2 = cfg.noise_variance(snr_db);
    let target = Target { u: cfg.source_u, gain: C64::new(1.0, 0.0) };
    let scene = single_target_scene(vec![target]);
    let dim = k * cfg.n_rx;
    let t = default_snapshot_count(k, cfg.n_rx);
    let n_grid = 8 * dim + 1;
    let grid: Vec<f64> = (0..n_grid).map(|i| -1.0 + 2.0 * i as f64 / (n_grid - 1) as f64).collect();
    let step = 2.0 / (n_grid - 1) as f64;
    let mut sq = 0.0;
    let mut crlb = 0.0;
    for trial in 0..cfg.rmse_trials {
        let s = cfg.seed.wrapping_mul(7_919).wrapping_add(0x5eed_0000 + trial as u64);
        let model = build_virtual_data(&p, &scene, cfg.n_rx, sigma2, t, s)?;
        let music = MusicEstimator::new(&model, 1)?;
        let spec = music.spectrum(&grid);
        let best = (0..n_grid).fold(0, |b, i| if spec[i] > spec[b] { i } else { b });
        let est = music.refine_peak(grid[best] - step, grid[best] + step);
        sq += (est - cfg.source_u) * (est - cfg.source_u);
        if trial == 0 {
            let fim = model.fisher_information(&[target], sigma2);
            crlb = theta_crlb(&fim, 1)[0] / t as f64;
        }
    }
    Ok((libm::sqrt(sq / cfg.rmse_trials as f64), libm::sqrt(crlb)))
}

/// Runs every (K, SNR) cell, ordered by K then SNR.
pub fn doa_study(cfg: &DoaStudyConfig) -> Result<Vec<DoaCell>> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &k in &cfg.k_values {
        for &snr_db in &cfg.snr_db {
            cells.push(doa_cell(cfg, k, snr_db)?);
        }
    }
    Ok(cells)
}

pub fn doa_cell(cfg: &DoaStudyConfig, k: usize, snr_db: f64) -> Result<DoaCell> {
    let delta_u_threshold = resolution_threshold(cfg, k, snr_db)?;
    let (rmse, crlb) = single_source_rmse(cfg, k, snr_db)?;
    Ok(DoaCell {
        k,
        snr_db,
        delta_u_threshold,
        rmse,
        crlb,
    })
}
