//! Radar and communication figures of merit.

use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::architecture::{feasibility_check, AnalogPrecoder};
use crate::channel::{steering_unchecked, ChannelSet, SinGrid};
use crate::error::{domain, shape};
use crate::linalg::{fro2, logdet_hpd, CMat, CVec, C64, LS_RIDGE};
use crate::Result;

/// Anything that yields per-subcarrier effective precoders `F[k]`
/// (N_t x N_s).
pub trait Precoder {
    fn blocks(&self) -> &[CMat];

    fn n_subcarriers(&self) -> usize {
        self.blocks().len()
    }

    fn total_power(&self) -> f64 {
        self.blocks().iter().map(fro2).sum()
    }
}

/// Fully digital precoder: one unconstrained `F[k]` per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalPrecoder {
    blocks: Vec<CMat>,
}

impl DigitalPrecoder {
    pub fn new(blocks: Vec<CMat>) -> Result<Self> {
        check_block_shapes(&blocks)?;
        Ok(Self { blocks })
    }

    pub fn into_blocks(self) -> Vec<CMat> {
        self.blocks
    }
}

impl Precoder for DigitalPrecoder {
    fn blocks(&self) -> &[CMat] {
        &self.blocks
    }
}

impl Precoder for [CMat] {
    fn blocks(&self) -> &[CMat] {
        self
    }
}

impl Precoder for Vec<CMat> {
    fn blocks(&self) -> &[CMat] {
        self
    }
}

fn check_block_shapes(blocks: &[CMat]) -> Result<()> {
    let Some(first) = blocks.first() else {
        return Err(domain!("precoder needs at least one subcarrier"));
    };
    if blocks.iter().any(|b| b.shape() != first.shape()) {
        return Err(shape!("per-subcarrier precoders differ in shape"));
    }
    Ok(())
}

/// Hybrid precoder `F[k] = F_RF F_D[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridPrecoder {
    analog: AnalogPrecoder,
    digital: Vec<CMat>,
    effective: Vec<CMat>,
}

impl HybridPrecoder {
    /// Builds the precoder, rejecting an infeasible analog part.
    pub fn new(analog: AnalogPrecoder, digital: Vec<CMat>) -> Result<Self> {
        let report = feasibility_check(&analog);
        if !report.feasible {
            return Err(crate::Error::Contract(alloc::format!(
                "infeasible analog precoder: {:?}",
                report.violations.first()
            )));
        }
        check_block_shapes(&digital)?;
        if digital[0].nrows() != analog.matrix().ncols() {
            return Err(shape!(
                "digital precoder has {} rows, analog has {} RF chains",
                digital[0].nrows(),
                analog.matrix().ncols()
            ));
        }
        let effective = digital.iter().map(|d| analog.matrix() * d).collect();
        Ok(Self {
            analog,
            digital,
            effective,
        })
    }

    /// Builds the precoder and rescales every nonzero digital block so that
    /// `||F_RF F_D[k]||_F^2 = total_power / K`.
    pub fn normalized(analog: AnalogPrecoder, mut digital: Vec<CMat>, total_power: f64) -> Result<Self> {
        let per_carrier = total_power / digital.len().max(1) as f64;
        for d in digital.iter_mut() {
            let p = fro2(&(analog.matrix() * &*d));
            if p > 0.0 {
                *d *= C64::new(libm::sqrt(per_carrier / p), 0.0);
            }
        }
        Self::new(analog, digital)
    }

    pub fn analog(&self) -> &AnalogPrecoder {
        &self.analog
    }

    pub fn digital(&self) -> &[CMat] {
        &self.digital
    }

    /// Whether every subcarrier carries `total_power / K` within `tol`
    /// (relative to the per-carrier budget).
    pub fn satisfies_power(&self, total_power: f64, tol: f64) -> bool {
        let per = total_power / self.effective.len() as f64;
        self.effective
            .iter()
            .all(|f| (fro2(f) - per).abs() <= tol * per.max(1.0))
    }
}

impl Precoder for HybridPrecoder {
    fn blocks(&self) -> &[CMat] {
        &self.effective
    }
}

/// Per-user hybrid combiner: analog `W_RF[u]` (N_r x N_RF^r) and digital
/// `W_D[k][u]` (N_RF^r x streams of user u).
#[derive(Debug, Clone, PartialEq)]
pub struct HybridCombiner {
    pub analog: Vec<CMat>,
    pub digital: Vec<Vec<CMat>>,
}

impl HybridCombiner {
    /// Combined `W_RF[u] W_D[k][u]`.
    pub fn combined(&self, k: usize, u: usize) -> CMat {
        &self.analog[u] * &self.digital[k][u]
    }

    /// Fully digital combiner wrapper: identity "analog" stage.
    pub fn fully_digital(w: Vec<Vec<CMat>>) -> Self {
        let n_r = w[0][0].nrows();
        let analog = (0..w[0].len()).map(|_| CMat::identity(n_r, n_r)).collect();
        Self { analog, digital: w }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    /// Sin-space direction.
    pub u: f64,
    pub gain: C64,
}

/// Radar targets, main-lobe region and the sampled desired pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarScene {
    pub targets: Vec<Target>,
    pub mainlobe: Vec<(f64, f64)>,
    pub grid: SinGrid,
    pub desired: Vec<f64>,
}

impl RadarScene {
    /// Scene with the desired pattern set to the main-lobe indicator.
    pub fn new(targets: Vec<Target>, mainlobe: Vec<(f64, f64)>, grid: SinGrid) -> Result<Self> {
        for &(lo, hi) in &mainlobe {
            if !(-1.0..=1.0).contains(&lo) || !(-1.0..=1.0).contains(&hi) || lo > hi {
                return Err(domain!("main-lobe interval [{lo}, {hi}] not inside [-1, 1]"));
            }
        }
        for t in &targets {
            if !(-1.0..=1.0).contains(&t.u) {
                return Err(domain!("target direction {} outside [-1, 1]", t.u));
            }
        }
        let desired = grid
            .points()
            .iter()
            .map(|&u| if in_region(&mainlobe, u) { 1.0 } else { 0.0 })
            .collect();
        Ok(Self {
            targets,
            mainlobe,
            grid,
            desired,
        })
    }

    pub fn with_desired(mut self, desired: Vec<f64>) -> Result<Self> {
        if desired.len() != self.grid.len() || desired.iter().any(|&d| !(d >= 0.0)) {
            return Err(domain!("desired pattern must be nonnegative, one value per grid point"));
        }
        self.desired = desired;
        Ok(self)
    }

    pub fn in_mainlobe(&self, u: f64) -> bool {
        in_region(&self.mainlobe, u)
    }

    pub fn with_gains_scaled(&self, factor: f64) -> Self {
        let mut s = self.clone();
        for t in s.targets.iter_mut() {
            t.gain *= factor;
        }
        s
    }
}

fn in_region(region: &[(f64, f64)], u: f64) -> bool {
    region.iter().any(|&(lo, hi)| u >= lo && u <= hi)
}

/// Covariance `sum_k F[k] F[k]^H`.
pub fn transmit_covariance<P: Precoder + ?Sized>(p: &P) -> CMat {
    let blocks = p.blocks();
    let n = blocks[0].nrows();
    blocks.iter().fold(CMat::zeros(n, n), |acc, f| acc + f * f.adjoint())
}

/// `a^T R conj(a)` for Hermitian PSD `R`.
pub(crate) fn pattern_value(r: &CMat, a: &CVec) -> f64 {
    let w = r * a.conjugate();
    let v: C64 = a.iter().zip(w.iter()).map(|(x, y)| x * y).sum();
    let scale = r.diagonal().iter().map(|z| z.re.abs()).sum::<f64>().max(1.0);
    assert!(
        v.im.abs() < 1e-10 * scale,
        "beampattern quadratic form has imaginary part {}",
        v.im
    );
    v.re.max(0.0)
}

/// Transmit beampattern `P(u) = a_t(u)^T F_RF (sum_k F_D F_D^H) F_RF^H conj(a_t(u))`
/// on every grid point.
pub fn beampattern<P: Precoder + ?Sized>(p: &P, grid: &SinGrid) -> Vec<f64> {
    let r = transmit_covariance(p);
    pattern_on(&r, grid.points())
}

pub(crate) fn pattern_on(r: &CMat, points: &[f64]) -> Vec<f64> {
    let n = r.nrows();
    points
        .iter()
        .map(|&u| pattern_value(r, &steering_unchecked(u, n)))
        .collect()
}

/// Per-subcarrier beampatterns (`[k][g]`), for space-frequency spectra.
pub fn beampattern_per_subcarrier<P: Precoder + ?Sized>(p: &P, grid: &SinGrid) -> Vec<Vec<f64>> {
    p.blocks()
        .iter()
        .map(|f| pattern_on(&(f * f.adjoint()), grid.points()))
        .collect()
}

/// Trapezoid-rule mean of the beampattern over `[-1, 1]`; equals the total
/// transmit power for grids with more than `N_t` points.
pub fn mean_power<P: Precoder + ?Sized>(p: &P, grid: &SinGrid) -> f64 {
    grid.trapezoid_mean(&beampattern(p, grid))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsmeValue {
    pub value: f64,
    pub beta: f64,
}

/// Scaled least-squares mismatch `min_{beta >= 0} mean_g (beta d_g - P_g)^2`.
pub fn ssme_from_pattern(pattern: &[f64], desired: &[f64]) -> SsmeValue {
    assert_eq!(pattern.len(), desired.len());
    let dd: f64 = desired.iter().map(|d| d * d).sum();
    let dp: f64 = desired.iter().zip(pattern).map(|(d, p)| d * p).sum();
    let beta = if dd > 0.0 { (dp / dd).max(0.0) } else { 1.0 };
    let n = pattern.len().max(1) as f64;
    let value = desired
        .iter()
        .zip(pattern)
        .map(|(d, p)| {
            let e = beta * d - p;
            e * e
        })
        .sum::<f64>()
        / n;
    SsmeValue { value, beta }
}

pub fn ssme<P: Precoder + ?Sized>(p: &P, scene: &RadarScene) -> SsmeValue {
    ssme_from_pattern(&beampattern(p, &scene.grid), &scene.desired)
}

/// Floor used for `-inf` dB values.
pub const DB_FLOOR: f64 = -300.0;

pub fn to_db(ratio: f64) -> f64 {
    if ratio > 0.0 {
        (10.0 * libm::log10(ratio)).clamp(DB_FLOOR, -DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Peak and integrated sidelobe levels (dB) relative to the main lobe.
pub fn psl_isl(pattern: &[f64], scene: &RadarScene) -> Result<(f64, f64)> {
    let pts = scene.grid.points();
    if pattern.len() != pts.len() {
        return Err(shape!("pattern length {} != grid length {}", pattern.len(), pts.len()));
    }
    let (mut main_max, mut main_sum, mut side_max, mut side_sum) = (0.0f64, 0.0, 0.0f64, 0.0);
    let (mut n_main, mut n_side) = (0, 0);
    for (&u, &p) in pts.iter().zip(pattern) {
        if scene.in_mainlobe(u) {
            n_main += 1;
            main_max = main_max.max(p);
            main_sum += p;
        } else {
            n_side += 1;
            side_max = side_max.max(p);
            side_sum += p;
        }
    }
    if n_main == 0 {
        return Err(domain!("main-lobe region contains no grid point"));
    }
    if n_side == 0 {
        return Err(domain!("main-lobe region covers the whole grid"));
    }
    let ratio = |side: f64, main: f64| {
        if main > 0.0 {
            to_db(side / main)
        } else if side > 0.0 {
            -DB_FLOOR
        } else {
            DB_FLOOR
        }
    };
    Ok((ratio(side_max, main_max), ratio(side_sum, main_sum)))
}

/// Radar SINR `sum_q |alpha_q|^2 P(u_q) / sigma^2` (orthogonal returns).
pub fn radar_sinr<P: Precoder + ?Sized>(p: &P, scene: &RadarScene, noise_variance: f64) -> Result<f64> {
    if !(noise_variance > 0.0) {
        return Err(domain!("radar noise variance must be positive, got {noise_variance}"));
    }
    if scene.targets.is_empty() {
        return Err(domain!("radar SINR needs at least one target"));
    }
    let r = transmit_covariance(p);
    let n = r.nrows();
    Ok(scene
        .targets
        .iter()
        .map(|t| t.gain.norm_sqr() * pattern_value(&r, &steering_unchecked(t.u, n)))
        .sum::<f64>()
        / noise_variance)
}

/// Marcum Q-function of order one.
///
/// Evaluated as the survival function of a noncentral chi-square with two
/// degrees of freedom, written as a Poisson mixture of Erlang tails. Every
/// term is nonnegative, so the sum is free of cancellation.
pub fn marcum_q1(a: f64, b: f64) -> f64 {
    let lambda = 0.5 * a * a;
    let x = 0.5 * b * b;
    if x == 0.0 {
        return 1.0;
    }
    let log_pmf = |j: usize, mean: f64| -> f64 {
        if mean == 0.0 {
            if j == 0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            -mean + j as f64 * libm::log(mean) - libm::lgamma(j as f64 + 1.0)
        }
    };
    let j_max = (lambda + 12.0 * libm::sqrt(lambda) + 40.0) as usize;
    let mut cdf_x = 0.0;
    let mut total = 0.0;
    for j in 0..=j_max {
        cdf_x += libm::exp(log_pmf(j, x));
        total += libm::exp(log_pmf(j, lambda)) * cdf_x.min(1.0);
    }
    total.clamp(0.0, 1.0)
}

/// Detection probability of a nonfluctuating target with a coherent
/// (matched-filter, square-law) detector at false-alarm rate `pfa`.
pub fn detection_probability(sinr: f64, pfa: f64) -> Result<f64> {
    if !(pfa > 0.0 && pfa <= 1.0) {
        return Err(domain!("pfa must lie in (0, 1], got {pfa}"));
    }
    if !(sinr >= 0.0) {
        return Err(domain!("sinr must be nonnegative, got {sinr}"));
    }
    Ok(marcum_q1(libm::sqrt(2.0 * sinr), libm::sqrt(-2.0 * libm::log(pfa))))
}

/// Radar mutual information `sum_k log2 det(I + T_k^H T_k / sigma^2)` with
/// `T_k = diag(alpha) A^T F[k]` and `A = [a_t(u_1) .. a_t(u_Q)]`.
pub fn radar_mi<P: Precoder + ?Sized>(p: &P, scene: &RadarScene, noise_variance: f64) -> f64 {
    let blocks = p.blocks();
    let n_t = blocks[0].nrows();
    let b = target_response(scene, n_t);
    blocks
        .iter()
        .map(|f| {
            let t = &b * f;
            let mut m = t.ad_mul(&t) / C64::new(noise_variance, 0.0);
            for i in 0..m.nrows() {
                m[(i, i)] += C64::new(1.0, 0.0);
            }
            logdet_hpd(&m).unwrap_or(0.0) / LN_2
        })
        .sum::<f64>()
        .max(0.0)
}

/// `diag(alpha) A^T` (Q x N_t).
pub(crate) fn target_response(scene: &RadarScene, n_t: usize) -> CMat {
    let q = scene.targets.len();
    let mut b = CMat::zeros(q, n_t);
    for (i, t) in scene.targets.iter().enumerate() {
        let a = steering_unchecked(t.u, n_t);
        for m in 0..n_t {
            b[(i, m)] = t.gain * a[m];
        }
    }
    b
}

fn user_columns(n_streams: usize, n_users: usize, u: usize) -> core::ops::Range<usize> {
    let d = n_streams / n_users;
    u * d..(u + 1) * d
}

fn check_comm_dims<P: Precoder + ?Sized>(ch: &ChannelSet, p: &P) -> Result<(usize, usize)> {
    let blocks = p.blocks();
    if blocks.len() != ch.n_subcarriers() {
        return Err(shape!(
            "precoder has {} subcarriers, channel has {}",
            blocks.len(),
            ch.n_subcarriers()
        ));
    }
    let n_s = blocks[0].ncols();
    let n_users = ch.n_users();
    if n_users == 0 || n_s % n_users != 0 {
        return Err(shape!("{n_s} streams cannot be split across {n_users} users"));
    }
    if ch.get(0, 0).ncols() != blocks[0].nrows() {
        return Err(shape!("channel and precoder disagree on N_t"));
    }
    Ok((n_s, n_users))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEfficiency {
    pub bits: f64,
    /// Whether any interference-plus-noise covariance needed the ridge.
    pub regularized: bool,
}

/// Sum spectral efficiency `(1/K) sum_k sum_u log2 det(I + R^-1 G G^H)` with
/// hybrid combiners.
pub fn spectral_efficiency<P: Precoder + ?Sized>(
    ch: &ChannelSet,
    p: &P,
    c: &HybridCombiner,
) -> Result<SpectralEfficiency> {
    let (n_s, n_users) = check_comm_dims(ch, p)?;
    let sigma2 = ch.noise_variance;
    let k_count = ch.n_subcarriers();
    let mut total = 0.0;
    let mut regularized = false;
    for (k, f) in p.blocks().iter().enumerate() {
        for u in 0..n_users {
            let w = c.combined(k, u);
            let z = w.ad_mul(&(ch.get(k, u) * f)); // d x N_s
            let cols = user_columns(n_s, n_users, u);
            let d = cols.len();
            let g = z.columns(cols.start, d).into_owned();
            let mut r = w.ad_mul(&w) * C64::new(sigma2, 0.0);
            for j in (0..n_s).filter(|j| !cols.contains(j)) {
                let col = z.column(j);
                r += &col * col.adjoint();
            }
            let signal = &g * g.adjoint();
            let (ld_r, ld_all) = match (logdet_hpd(&r), logdet_hpd(&(&r + &signal))) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    regularized = true;
                    let ridge = CMat::identity(d, d) * C64::new(LS_RIDGE, 0.0);
                    let r2 = &r + &ridge;
                    (
                        logdet_hpd(&r2).unwrap_or(0.0),
                        logdet_hpd(&(&r2 + &signal)).unwrap_or(0.0),
                    )
                }
            };
            total += (ld_all - ld_r).max(0.0) / LN_2;
        }
    }
    Ok(SpectralEfficiency {
        bits: total / k_count as f64,
        regularized,
    })
}

/// Communication mutual information with optimal (fully digital) receivers,
/// `(1/K) sum_k sum_u [log2 det(R_all) - log2 det(R_-u)]`. Equals the
/// spectral efficiency obtained with fully digital MMSE combiners.
pub fn comm_mutual_information<P: Precoder + ?Sized>(ch: &ChannelSet, p: &P) -> Result<f64> {
    let (n_s, n_users) = check_comm_dims(ch, p)?;
    let sigma2 = ch.noise_variance;
    let mut total = 0.0;
    for (k, f) in p.blocks().iter().enumerate() {
        for u in 0..n_users {
            let z = ch.get(k, u) * f;
            let n_r = z.nrows();
            let cols = user_columns(n_s, n_users, u);
            let mut r_int = CMat::identity(n_r, n_r) * C64::new(sigma2, 0.0);
            let mut r_all = r_int.clone();
            for j in 0..n_s {
                let col = z.column(j);
                let outer = &col * col.adjoint();
                if !cols.contains(&j) {
                    r_int += &outer;
                }
                r_all += outer;
            }
            let a = logdet_hpd(&r_all).unwrap_or(0.0);
            let b = logdet_hpd(&r_int).unwrap_or(0.0);
            total += (a - b).max(0.0) / LN_2;
        }
    }
    Ok(total / ch.n_subcarriers() as f64)
}

/// Sum over subcarriers and users of `E ||s_{k,u} - s_hat_{k,u}||^2` for
/// unit-variance independent symbols:
/// `||E_u^T - W^H H F||_F^2 + sigma^2 ||W||_F^2`.
pub fn multiuser_mmse<P: Precoder + ?Sized>(ch: &ChannelSet, p: &P, c: &HybridCombiner) -> Result<f64> {
    let (n_s, n_users) = check_comm_dims(ch, p)?;
    let sigma2 = ch.noise_variance;
    let mut total = 0.0;
    for (k, f) in p.blocks().iter().enumerate() {
        for u in 0..n_users {
            let w = c.combined(k, u);
            let mut e = w.ad_mul(&(ch.get(k, u) * f));
            for (i, j) in user_columns(n_s, n_users, u).enumerate() {
                e[(i, j)] -= C64::new(1.0, 0.0);
            }
            total += fro2(&e) + sigma2 * fro2(&w);
        }
    }
    Ok(total)
}

/// Radar-side settings used by [`metric_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarSettings {
    pub noise_variance: f64,
    pub pfa: f64,
    /// Radar receive channels used for the CRLB (M_r).
    pub n_radar_rx: usize,
}

/// Named scalar metrics in a fixed column order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub se_bits: f64,
    pub mmse: f64,
    pub mi_comm: f64,
    pub mi_radar: f64,
    pub ssme: f64,
    pub psl_db: f64,
    pub isl_db: f64,
    pub sinr_db: f64,
    pub pd: f64,
    pub crlb: f64,
    pub se_regularized: bool,
}

impl MetricReport {
    /// Column names, in serialization order.
    pub const COLUMNS: [&'static str; 10] = [
        "se_bits", "mmse", "mi_comm", "mi_radar", "ssme", "psl_db", "isl_db", "sinr_db", "pd", "crlb",
    ];
    /// Units matching [`Self::COLUMNS`].
    pub const UNITS: [&'static str; 10] = [
        "bit/s/Hz", "symbol energy", "bit/s/Hz", "bit", "power^2", "dB", "dB", "dB", "probability",
        "sin-space^2",
    ];

    pub fn values(&self) -> [f64; 10] {
        [
            self.se_bits,
            self.mmse,
            self.mi_comm,
            self.mi_radar,
            self.ssme,
            self.psl_db,
            self.isl_db,
            self.sinr_db,
            self.pd,
            self.crlb,
        ]
    }
}

/// Evaluates every metric for one design. The CRLB entry is the mean
/// single-snapshot bound over targets for a noise-free virtual model with
/// all-ones symbols.
pub fn metric_report<P: Precoder + ?Sized>(
    ch: &ChannelSet,
    p: &P,
    c: &HybridCombiner,
    scene: &RadarScene,
    radar: &RadarSettings,
) -> Result<MetricReport> {
    let se = spectral_efficiency(ch, p, c)?;
    let pattern = beampattern(p, &scene.grid);
    let (psl_db, isl_db) = psl_isl(&pattern, scene)?;
    let sinr = radar_sinr(p, scene, radar.noise_variance)?;
    let model = crate::virtualarray::VirtualArrayModel::noise_free(p, radar.n_radar_rx, radar.noise_variance);
    let crlb = crlb_doa(p, scene, radar.noise_variance, Some(&model))?;
    let crlb_mean = crlb.iter().sum::<f64>() / crlb.len().max(1) as f64;
    Ok(MetricReport {
        se_bits: se.bits,
        mmse: multiuser_mmse(ch, p, c)?,
        mi_comm: comm_mutual_information(ch, p)?,
        mi_radar: radar_mi(p, scene, radar.noise_variance),
        ssme: ssme_from_pattern(&pattern, &scene.desired).value,
        psl_db,
        isl_db,
        sinr_db: to_db(sinr),
        pd: detection_probability(sinr, radar.pfa)?,
        crlb: if crlb_mean.is_finite() { crlb_mean } else { f64::MAX },
        se_regularized: se.regularized,
    })
}

/// Deterministic single-snapshot CRLB on each target direction (sin-space).
///
/// The data model is the multi-carrier virtual array of `virtual`; when it is
/// `None` a noise-free model with all-ones symbols and `M_r = N_t` (receive
/// array collocated with the transmit array) is used. A singular Fisher
/// matrix yields `f64::INFINITY` entries.
pub fn crlb_doa<P: Precoder + ?Sized>(
    p: &P,
    scene: &RadarScene,
    noise_variance: f64,
    virtual_model: Option<&crate::virtualarray::VirtualArrayModel>,
) -> Result<Vec<f64>> {
    if !(noise_variance > 0.0) {
        return Err(domain!("noise variance must be positive"));
    }
    let owned;
    let model = match virtual_model {
        Some(m) => m,
        None => {
            let n_t = p.blocks()[0].nrows();
            owned = crate::virtualarray::VirtualArrayModel::noise_free(p, n_t, noise_variance);
            &owned
        }
    };
    let q = scene.targets.len();
    if q >= model.dimension() {
        return Err(domain!(
            "{q} targets not identifiable with a {}-dimensional virtual array",
            model.dimension()
        ));
    }
    let fim = model.fisher_information(&scene.targets, noise_variance);
    Ok(crate::virtualarray::theta_crlb(&fim, q))
}
