//! Local refinement of a hybrid design by L-BFGS over an unconstrained
//! parametrization: analog phases on the fixed support plus real and
//! imaginary parts of the digital blocks. Per-carrier power normalization
//! is part of the map, so every point is feasible.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use nalgebra::DVector;

use super::objective::ObjectiveEvaluator;
use crate::architecture::{AnalogPrecoder, ArchitectureSpec};
use crate::linalg::{cis, fro2, CMat, C64};
use crate::{Error, Result};

const MEMORY: usize = 8;
const ARMIJO: f64 = 1e-4;

pub(super) struct Layout {
    spec: ArchitectureSpec,
    support: Vec<(usize, usize)>,
    n_streams: usize,
    n_subcarriers: usize,
    per_carrier: f64,
    /// Digital coordinates are `kappa * d`, balancing their effect on F
    /// against a unit phase change.
    kappa: f64,
}

impl Layout {
    fn len(&self) -> usize {
        self.support.len() + 2 * self.spec.n_rf * self.n_streams * self.n_subcarriers
    }

    pub(super) fn pack(&self, analog: &CMat, digital: &[CMat]) -> DVector<f64> {
        let mut x = DVector::zeros(self.len());
        for (p, &(i, j)) in self.support.iter().enumerate() {
            x[p] = crate::linalg::angle(analog[(i, j)]);
        }
        let mut p = self.support.len();
        for d in digital {
            for z in d.iter() {
                x[p] = self.kappa * z.re;
                x[p + 1] = self.kappa * z.im;
                p += 2;
            }
        }
        x
    }

    fn analog(&self, x: &DVector<f64>) -> CMat {
        let mut a = CMat::zeros(self.spec.n_antennas, self.spec.n_rf);
        for (p, &(i, j)) in self.support.iter().enumerate() {
            a[(i, j)] = cis(x[p]);
        }
        a
    }

    fn digital(&self, x: &DVector<f64>) -> Vec<CMat> {
        let (r, c) = (self.spec.n_rf, self.n_streams);
        let mut p = self.support.len();
        (0..self.n_subcarriers)
            .map(|_| {
                // column-major, matching `pack`
                let m = CMat::from_fn(r, c, |i, j| {
                    let q = p + 2 * (j * r + i);
                    C64::new(x[q], x[q + 1]) / self.kappa
                });
                p += 2 * r * c;
                m
            })
            .collect()
    }

    /// Power-normalized digital blocks and per-carrier scale factors.
    fn normalized(&self, analog: &CMat, digital: &[CMat]) -> (Vec<CMat>, Vec<f64>) {
        digital
            .iter()
            .map(|d| {
                let p = fro2(&(analog * d));
                let c = if p > 0.0 { libm::sqrt(self.per_carrier / p) } else { 1.0 };
                (d * C64::new(c, 0.0), c)
            })
            .unzip()
    }

    pub(super) fn unpack(&self, x: &DVector<f64>) -> (AnalogPrecoder, Vec<CMat>) {
        let analog = self.analog(x);
        let (digital, _) = self.normalized(&analog, &self.digital(x));
        (AnalogPrecoder::new_unchecked(analog, self.spec), digital)
    }
}

struct Problem<'e, 'a> {
    ev: &'e ObjectiveEvaluator<'a>,
    layout: Layout,
    mu: f64,
}

impl Problem<'_, '_> {
    fn effective(&self, x: &DVector<f64>) -> (CMat, Vec<CMat>, Vec<f64>) {
        let a = self.layout.analog(x);
        let raw = self.layout.digital(x);
        let (d, scales) = self.layout.normalized(&a, &raw);
        let f = d.iter().map(|dk| &a * dk).collect();
        (a, f, scales)
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let (_, f, _) = self.effective(x);
        self.ev.values(&f, self.mu).scalarized
    }

    fn value_and_gradient(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let (a, f, scales) = self.effective(x);
        let raw = self.layout.digital(x);
        let (v, g) = self.ev.gradient(&f, self.mu);
        let mut out = DVector::zeros(x.len());
        let mut g_rf = CMat::zeros(a.nrows(), a.ncols());
        let mut p = self.layout.support.len();
        for ((gk, fk), (dk, &c)) in g.iter().zip(&f).zip(raw.iter().zip(&scales)) {
            // chain rule through F = c(d) F_RF d: the radial part drops out
            let radial = gk.dotc(fk).re / fro2(fk);
            let gt = (gk - fk * C64::new(radial, 0.0)) * C64::new(c, 0.0);
            g_rf += &gt * dk.adjoint();
            for z in a.ad_mul(&gt).iter() {
                out[p] = 2.0 * z.re / self.layout.kappa;
                out[p + 1] = 2.0 * z.im / self.layout.kappa;
                p += 2;
            }
        }
        for (q, &(i, j)) in self.layout.support.iter().enumerate() {
            out[q] = -2.0 * (g_rf[(i, j)].conj() * a[(i, j)]).im;
        }
        (v.scalarized, out)
    }
}

/// Runs at most `iterations` L-BFGS steps from `(analog, digital)` and
/// returns the refined, power-normalized pair. Stops after five
/// consecutive relative decreases below `tol` or a failed line search.
pub(super) fn polish(
    ev: &ObjectiveEvaluator<'_>,
    analog: &AnalogPrecoder,
    digital: &[CMat],
    mu: f64,
    iterations: usize,
    tol: f64,
) -> Result<(AnalogPrecoder, Vec<CMat>)> {
    let spec = *analog.spec();
    let a = analog.matrix();
    let support = (0..spec.n_antennas)
        .flat_map(|i| (0..spec.n_rf).map(move |j| (i, j)))
        .filter(|&(i, j)| a[(i, j)].norm_sqr() > 0.0)
        .collect();
    let support_len: usize = support_count(a);
    let d_rms = libm::sqrt(digital.iter().map(fro2).sum::<f64>() / (digital.len() * digital[0].len()) as f64);
    let col_norm = libm::sqrt(support_len as f64 / spec.n_rf as f64);
    let kappa = if d_rms > 0.0 { col_norm / d_rms } else { 1.0 };
    let layout = Layout {
        kappa,
        spec,
        support,
        n_streams: digital[0].ncols(),
        n_subcarriers: digital.len(),
        per_carrier: ev.problem().per_carrier_power(),
    };
    let mut x = layout.pack(a, digital);
    let prob = Problem { ev, layout, mu };
    let (mut h, mut g) = prob.value_and_gradient(&x);
    if !h.is_finite() {
        return Err(Error::NonFinite { iteration: 0 });
    }
    let mut memory: VecDeque<(DVector<f64>, DVector<f64>, f64)> = VecDeque::new();
    let mut stalls = 0;
    for _ in 0..iterations {
        let mut dir = two_loop(&g, &memory);
        let mut slope = g.dot(&dir);
        if !(slope < 0.0) {
            memory.clear();
            dir = -&g;
            slope = -g.norm_squared();
        }
        if slope == 0.0 {
            break;
        }
        let mut t = if memory.is_empty() { 1e-2 / g.amax().max(1e-300) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..40 {
            let cand = &x + &dir * t;
            let v = prob.value(&cand);
            if v.is_finite() && v <= h + ARMIJO * t * slope {
                accepted = Some(cand);
                break;
            }
            t *= 0.5;
        }
        let Some(next) = accepted else { break };
        let (h_next, g_next) = prob.value_and_gradient(&next);
        let s = &next - &x;
        let y = &g_next - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if memory.len() == MEMORY {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }
        let gain = h - h_next;
        stalls = if gain <= tol * h_next.abs().max(1.0) { stalls + 1 } else { 0 };
        x = next;
        h = h_next;
        g = g_next;
        if stalls >= 5 {
            break;
        }
    }
    Ok(prob.layout.unpack(&x))
}

fn two_loop(g: &DVector<f64>, memory: &VecDeque<(DVector<f64>, DVector<f64>, f64)>) -> DVector<f64> {
    let mut q = g.clone();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, r) in memory.iter().rev() {
        let a = r * s.dot(&q);
        q -= y * a;
        alphas.push(a);
    }
    if let Some((s, y, _)) = memory.back() {
        q *= s.dot(y) / y.norm_squared();
    }
    for ((s, y, r), a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = r * y.dot(&q);
        q += s * (a - b);
    }
    -q
}

fn support_count(a: &CMat) -> usize {
    a.iter().filter(|z| z.norm_sqr() > 0.0).count()
}
