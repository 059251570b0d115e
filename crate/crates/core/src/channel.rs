//! Steering vectors, sin-space grids and clustered mmWave channels.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::domain;
use crate::linalg::{cis, CMat, CVec, C64};
use crate::rng::{complex_gaussian, laplacian, substream};
use crate::Result;
use rand::Rng;

/// Array and system dimensions shared by every design.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemDims {
    pub n_tx_antennas: usize,
    pub n_rx_antennas: usize,
    pub n_tx_rf: usize,
    pub n_rx_rf: usize,
    pub n_streams: usize,
    pub n_users: usize,
    pub n_subcarriers: usize,
    pub n_radar_rx_rf: usize,
}

impl SystemDims {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            self.n_tx_antennas,
            self.n_rx_antennas,
            self.n_tx_rf,
            self.n_rx_rf,
            self.n_streams,
            self.n_users,
            self.n_subcarriers,
            self.n_radar_rx_rf,
        ];
        if counts.iter().any(|&c| c == 0) {
            return Err(domain!("all dimension counts must be >= 1: {:?}", self));
        }
        if !(self.n_streams <= self.n_tx_rf && self.n_tx_rf <= self.n_tx_antennas) {
            return Err(domain!(
                "need n_streams <= n_tx_rf <= n_tx_antennas, got {} / {} / {}",
                self.n_streams,
                self.n_tx_rf,
                self.n_tx_antennas
            ));
        }
        if self.n_rx_rf > self.n_rx_antennas {
            return Err(domain!("n_rx_rf exceeds n_rx_antennas"));
        }
        if self.n_streams % self.n_users != 0 {
            return Err(domain!(
                "n_streams ({}) must split evenly across n_users ({})",
                self.n_streams,
                self.n_users
            ));
        }
        Ok(())
    }

    /// Streams carried to each user.
    pub fn streams_per_user(&self) -> usize {
        self.n_streams / self.n_users
    }

    /// Column range of the digital precoder feeding user `u`.
    pub fn user_streams(&self, u: usize) -> core::ops::Range<usize> {
        let d = self.streams_per_user();
        u * d..(u + 1) * d
    }
}

/// Half-wavelength ULA steering vector: element `m` is `exp(j pi m u)`.
pub fn steering_vector(u: f64, n: usize) -> Result<CVec> {
    if !(-1.0..=1.0).contains(&u) || n == 0 {
        return Err(domain!("steering_vector needs |u| <= 1 and n >= 1, got u={u}, n={n}"));
    }
    Ok(steering_unchecked(u, n))
}

pub(crate) fn steering_unchecked(u: f64, n: usize) -> CVec {
    CVec::from_fn(n, |m, _| cis(PI * m as f64 * u))
}

/// Derivative of the steering vector with respect to `u`.
pub(crate) fn steering_derivative(u: f64, n: usize) -> CVec {
    CVec::from_fn(n, |m, _| C64::new(0.0, PI * m as f64) * cis(PI * m as f64 * u))
}

/// Uniform sin-space grid over `[-1, 1]`, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct SinGrid {
    points: Vec<f64>,
}

impl SinGrid {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        2.0 / (self.points.len() - 1) as f64
    }

    /// Trapezoid-rule average over `[-1, 1]` of a function sampled on the grid.
    ///
    /// For trigonometric polynomials in `pi u` of degree below `len - 1` this is
    /// exact, which makes it the right mean for beampattern power accounting.
    pub fn trapezoid_mean(&self, values: &[f64]) -> f64 {
        let n = values.len();
        assert_eq!(n, self.points.len());
        let inner: f64 = values[1..n - 1].iter().sum();
        (inner + 0.5 * (values[0] + values[n - 1])) / (n - 1) as f64
    }
}

pub fn make_grid(n_points: usize) -> Result<SinGrid> {
    if n_points < 2 {
        return Err(domain!("grid needs at least 2 points, got {n_points}"));
    }
    let step = 2.0 / (n_points - 1) as f64;
    let mut points: Vec<f64> = (0..n_points).map(|i| -1.0 + step * i as f64).collect();
    points[n_points - 1] = 1.0;
    Ok(SinGrid { points })
}

/// Clustered channel model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterParams {
    pub n_clusters: usize,
    pub rays_per_cluster: usize,
    /// Laplacian angular spread (standard deviation, radians) of rays around
    /// their cluster mean.
    pub angular_spread: f64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            n_clusters: 5,
            rays_per_cluster: 10,
            angular_spread: 7.5_f64.to_radians(),
        }
    }
}

/// Per-subcarrier, per-user channel matrices `H[k][u]` (N_r x N_t).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub h: Vec<Vec<CMat>>,
    pub noise_variance: f64,
    pub seed: u64,
}

impl ChannelSet {
    pub fn n_subcarriers(&self) -> usize {
        self.h.len()
    }

    pub fn n_users(&self) -> usize {
        self.h.first().map_or(0, Vec::len)
    }

    pub fn get(&self, k: usize, u: usize) -> &CMat {
        &self.h[k][u]
    }

    pub fn with_noise_variance(mut self, noise_variance: f64) -> Self {
        self.noise_variance = noise_variance;
        self
    }

    /// Sets the noise variance so that per-subcarrier transmit power over
    /// noise equals `snr_db`, with total power split evenly across carriers.
    pub fn with_snr_db(self, snr_db: f64, total_power: f64) -> Self {
        let per_carrier = total_power / self.n_subcarriers() as f64;
        self.with_noise_variance(per_carrier / libm::pow(10.0, snr_db / 10.0))
    }
}

fn wrap_half_pi(theta: f64) -> f64 {
    theta.clamp(-PI / 2.0, PI / 2.0)
}

/// Draws a clustered multi-user, multi-carrier channel.
///
/// Each user has `n_clusters * rays_per_cluster` rays with complex Gaussian
/// gains, Laplacian-spread departure/arrival angles around uniformly drawn
/// cluster means and a random delay that turns into a linear phase ramp
/// across subcarriers. Users draw from independent substreams of `seed`.
/// The normalization gives `E ||H||_F^2 = N_t N_r`. Noise variance starts
/// at 1.
pub fn gen_channel(dims: &SystemDims, model: &ClusterParams, seed: u64) -> Result<ChannelSet> {
    if model.n_clusters == 0 || model.rays_per_cluster == 0 {
        return Err(domain!("need at least one cluster and one ray per cluster"));
    }
    let n_t = dims.n_tx_antennas;
    let n_r = dims.n_rx_antennas;
    let k_count = dims.n_subcarriers;
    let n_paths = model.n_clusters * model.rays_per_cluster;
    let gamma = 1.0 / libm::sqrt(n_paths as f64);

    let mut per_user: Vec<Vec<CMat>> = Vec::with_capacity(dims.n_users);
    for u in 0..dims.n_users {
        let mut rng = substream(seed, u as u64 + 1);
        let mut h_k = alloc::vec![CMat::zeros(n_r, n_t); k_count];
        for _ in 0..model.n_clusters {
            let aod_mean = (rng.random::<f64>() - 0.5) * PI;
            let aoa_mean = (rng.random::<f64>() - 0.5) * PI;
            for _ in 0..model.rays_per_cluster {
                let aod = wrap_half_pi(aod_mean + laplacian(&mut rng, model.angular_spread));
                let aoa = wrap_half_pi(aoa_mean + laplacian(&mut rng, model.angular_spread));
                let gain = complex_gaussian(&mut rng, 1.0);
                let delay: f64 = rng.random();
                let a_t = steering_unchecked(libm::sin(aod), n_t);
                let a_r = steering_unchecked(libm::sin(aoa), n_r);
                let outer = &a_r * a_t.adjoint();
                for (k, h) in h_k.iter_mut().enumerate() {
                    let ramp = cis(-2.0 * PI * delay * k as f64 / k_count as f64);
                    *h += &outer * (gain * ramp * gamma);
                }
            }
        }
        per_user.push(h_k);
    }
    // transpose to [k][u]
    let h = (0..k_count)
        .map(|k| per_user.iter().map(|hu| hu[k].clone()).collect())
        .collect();
    Ok(ChannelSet {
        h,
        noise_variance: 1.0,
        seed,
    })
}
