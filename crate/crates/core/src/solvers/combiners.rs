//! Receive combiner design.

use alloc::vec::Vec;

use crate::architecture::{project_analog, ArchitectureSpec};
use crate::channel::ChannelSet;
use crate::error::shape;
use crate::linalg::{dominant_left_subspace, solve_hpd, CMat, C64};
use crate::metrics::{HybridCombiner, Precoder};
use crate::Result;

fn streams(n_s: usize, n_users: usize, u: usize) -> core::ops::Range<usize> {
    let d = n_s / n_users;
    u * d..(u + 1) * d
}

/// Received covariance `H F F^H H^H + sigma^2 I` and `H F`.
fn received(ch: &ChannelSet, f: &CMat, k: usize, u: usize) -> (CMat, CMat) {
    let hf = ch.get(k, u) * f;
    let n_r = hf.nrows();
    let mut r = &hf * hf.adjoint();
    for i in 0..n_r {
        r[(i, i)] += C64::new(ch.noise_variance, 0.0);
    }
    (r, hf)
}

/// Fully digital Wiener receivers `[k][u]` (N_r x streams of user u).
pub fn wiener_combiners<P: Precoder + ?Sized>(ch: &ChannelSet, p: &P) -> Vec<Vec<CMat>> {
    let blocks = p.blocks();
    let n_users = ch.n_users();
    let n_s = blocks[0].ncols();
    blocks
        .iter()
        .enumerate()
        .map(|(k, f)| {
            (0..n_users)
                .map(|u| {
                    let (r, hf) = received(ch, f, k, u);
                    let cols = streams(n_s, n_users, u);
                    solve_hpd(&r, &hf.columns(cols.start, cols.len()).into_owned(), 0.0)
                })
                .collect()
        })
        .collect()
}

/// Per-subcarrier MMSE digital combiners given the analog parts:
/// `W_D = (W_RF^H R W_RF)^-1 W_RF^H H F E_u`.
pub fn design_digital_combiners<P: Precoder + ?Sized>(ch: &ChannelSet, p: &P, analog: &[CMat]) -> Result<Vec<Vec<CMat>>> {
    let blocks = p.blocks();
    let n_users = ch.n_users();
    if analog.len() != n_users {
        return Err(shape!("need one analog combiner per user"));
    }
    let n_s = blocks[0].ncols();
    Ok(blocks
        .iter()
        .enumerate()
        .map(|(k, f)| {
            (0..n_users)
                .map(|u| {
                    let (r, hf) = received(ch, f, k, u);
                    let w = &analog[u];
                    let cols = streams(n_s, n_users, u);
                    let rhs = w.ad_mul(&hf.columns(cols.start, cols.len()).into_owned());
                    solve_hpd(&(w.ad_mul(&(r * w))), &rhs, crate::linalg::LS_RIDGE)
                })
                .collect()
        })
        .collect())
}

/// Hybrid MMSE combiners: the analog part of user `u` is the Full-connection
/// projection of the dominant `N_RF^r`-dimensional left subspace of
/// `[H[1][u] F[1] .. H[K][u] F[K]]`; the digital part is the Wiener solution
/// given it.
pub fn design_combiners<P: Precoder + ?Sized>(ch: &ChannelSet, p: &P, n_rx_rf: usize) -> Result<HybridCombiner> {
    let blocks = p.blocks();
    let n_users = ch.n_users();
    let n_r = ch.get(0, 0).nrows();
    let spec = ArchitectureSpec::full(n_r, n_rx_rf)?;
    let mut analog = Vec::with_capacity(n_users);
    for u in 0..n_users {
        let n_s = blocks[0].ncols();
        let mut stacked = CMat::zeros(n_r, n_s * blocks.len());
        for (k, f) in blocks.iter().enumerate() {
            stacked.columns_mut(k * n_s, n_s).copy_from(&(ch.get(k, u) * f));
        }
        let basis = dominant_left_subspace(&stacked, n_rx_rf);
        let mut target = CMat::zeros(n_r, n_rx_rf);
        target.columns_mut(0, basis.ncols()).copy_from(&basis);
        analog.push(project_analog(&target, &spec)?.matrix().clone());
    }
    let digital = design_digital_combiners(ch, p, &analog)?;
    Ok(HybridCombiner { analog, digital })
}
