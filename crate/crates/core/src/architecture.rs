//! Analog precoder architectures (full, partial and dynamic connection) as
//! feasible sets, with nearest-point projections.

use alloc::vec::Vec;

use crate::error::{domain, shape};
use crate::linalg::{angle, cis, CMat, C64};
use crate::rng::{substream, uniform_phase};
use crate::Result;
use rand::seq::index::sample;

/// Modulus tolerance used by [`feasibility_check`].
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchitectureKind {
    /// Every RF chain drives every antenna.
    Full,
    /// RF chain `r` drives the contiguous antenna block `r`.
    Partial,
    /// `n_phase_shifters` phase shifters split evenly across RF chains; each
    /// chain's shifters are switched onto a re-selectable antenna subset.
    Dynamic { n_phase_shifters: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArchitectureSpec {
    pub kind: ArchitectureKind,
    pub n_antennas: usize,
    pub n_rf: usize,
}

impl ArchitectureSpec {
    pub fn new(kind: ArchitectureKind, n_antennas: usize, n_rf: usize) -> Result<Self> {
        let spec = Self {
            kind,
            n_antennas,
            n_rf,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn full(n_antennas: usize, n_rf: usize) -> Result<Self> {
        Self::new(ArchitectureKind::Full, n_antennas, n_rf)
    }

    pub fn partial(n_antennas: usize, n_rf: usize) -> Result<Self> {
        Self::new(ArchitectureKind::Partial, n_antennas, n_rf)
    }

    pub fn dynamic(n_antennas: usize, n_rf: usize, n_phase_shifters: usize) -> Result<Self> {
        Self::new(
            ArchitectureKind::Dynamic { n_phase_shifters },
            n_antennas,
            n_rf,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_antennas == 0 || self.n_rf == 0 || self.n_rf > self.n_antennas {
            return Err(domain!(
                "need 1 <= n_rf <= n_antennas, got {} RF chains for {} antennas",
                self.n_rf,
                self.n_antennas
            ));
        }
        match self.kind {
            ArchitectureKind::Full => Ok(()),
            ArchitectureKind::Partial => {
                if self.n_antennas % self.n_rf != 0 {
                    return Err(domain!(
                        "partial connection needs n_rf ({}) to divide n_antennas ({})",
                        self.n_rf,
                        self.n_antennas
                    ));
                }
                Ok(())
            }
            ArchitectureKind::Dynamic { n_phase_shifters } => {
                if n_phase_shifters < self.n_rf || n_phase_shifters % self.n_rf != 0 {
                    return Err(domain!(
                        "dynamic connection needs L >= n_rf and n_rf | L, got L={n_phase_shifters}, n_rf={}",
                        self.n_rf
                    ));
                }
                if n_phase_shifters / self.n_rf > self.n_antennas {
                    return Err(domain!(
                        "per-chain budget {} exceeds antenna count {}",
                        n_phase_shifters / self.n_rf,
                        self.n_antennas
                    ));
                }
                Ok(())
            }
        }
    }

    /// Number of phase shifters the architecture uses.
    pub fn phase_shifter_count(&self) -> usize {
        match self.kind {
            ArchitectureKind::Full => self.n_antennas * self.n_rf,
            ArchitectureKind::Partial => self.n_antennas,
            ArchitectureKind::Dynamic { n_phase_shifters } => n_phase_shifters,
        }
    }

    /// Antennas connected to each RF chain.
    pub fn budget_per_chain(&self) -> usize {
        match self.kind {
            ArchitectureKind::Full => self.n_antennas,
            ArchitectureKind::Partial => self.n_antennas / self.n_rf,
            ArchitectureKind::Dynamic { n_phase_shifters } => n_phase_shifters / self.n_rf,
        }
    }

    /// Whether `(antenna, chain)` may be nonzero for fixed-support kinds.
    /// Always true for dynamic connection, whose support is data dependent.
    pub fn allows(&self, antenna: usize, chain: usize) -> bool {
        match self.kind {
            ArchitectureKind::Partial => antenna / self.budget_per_chain() == chain,
            _ => true,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ArchitectureKind::Full => "full",
            ArchitectureKind::Partial => "partial",
            ArchitectureKind::Dynamic { .. } => "dynamic",
        }
    }
}

/// A feasible analog precoder `F_RF` (N_t x N_RF).
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogPrecoder {
    matrix: CMat,
    spec: ArchitectureSpec,
}

impl AnalogPrecoder {
    /// Wraps `matrix`, rejecting it unless it passes [`feasibility_check`].
    pub fn new(matrix: CMat, spec: ArchitectureSpec) -> Result<Self> {
        let p = Self { matrix, spec };
        let report = feasibility_check(&p);
        if report.feasible {
            Ok(p)
        } else {
            Err(crate::Error::Contract(alloc::format!(
                "infeasible analog precoder: {:?}",
                report.violations.first()
            )))
        }
    }

    /// Wraps `matrix` without checking feasibility.
    pub fn new_unchecked(matrix: CMat, spec: ArchitectureSpec) -> Self {
        Self { matrix, spec }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn spec(&self) -> &ArchitectureSpec {
        &self.spec
    }

    pub fn phase_shifter_count(&self) -> usize {
        self.spec.phase_shifter_count()
    }

    /// Binary switch map `G` (N_t x L) for the dynamic architecture: phase
    /// shifter `l` (chain-major order) is connected to the antenna holding a
    /// one in column `l`. Returns `None` for fixed architectures.
    pub fn switch_map(&self) -> Option<Vec<Vec<u8>>> {
        let ArchitectureKind::Dynamic { n_phase_shifters } = self.spec.kind else {
            return None;
        };
        let n_t = self.spec.n_antennas;
        let mut g = alloc::vec![alloc::vec![0u8; n_phase_shifters]; n_t];
        let mut l = 0;
        for r in 0..self.spec.n_rf {
            for n in 0..n_t {
                if self.matrix[(n, r)].norm() > 0.5 && l < n_phase_shifters {
                    g[n][l] = 1;
                    l += 1;
                }
            }
        }
        Some(g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape { rows: usize, cols: usize },
    NonUnitModulus { row: usize, col: usize, modulus: f64 },
    OffSupport { row: usize, col: usize, modulus: f64 },
    Budget { chain: usize, count: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

pub fn feasibility_check(f: &AnalogPrecoder) -> FeasibilityReport {
    let spec = &f.spec;
    let m = &f.matrix;
    let mut violations = Vec::new();
    if m.shape() != (spec.n_antennas, spec.n_rf) {
        violations.push(Violation::Shape {
            rows: m.nrows(),
            cols: m.ncols(),
        });
        return FeasibilityReport {
            feasible: false,
            violations,
        };
    }
    let dynamic = matches!(spec.kind, ArchitectureKind::Dynamic { .. });
    for r in 0..spec.n_rf {
        let mut count = 0;
        for n in 0..spec.n_antennas {
            let modulus = m[(n, r)].norm();
            let unit = (modulus - 1.0).abs() <= FEASIBILITY_TOL;
            let zero = modulus <= FEASIBILITY_TOL;
            if dynamic {
                if unit {
                    count += 1;
                } else if !zero {
                    violations.push(Violation::NonUnitModulus { row: n, col: r, modulus });
                }
            } else if spec.allows(n, r) {
                if !unit {
                    violations.push(Violation::NonUnitModulus { row: n, col: r, modulus });
                }
            } else if !zero {
                violations.push(Violation::OffSupport { row: n, col: r, modulus });
            }
        }
        if dynamic && count != spec.budget_per_chain() {
            violations.push(Violation::Budget {
                chain: r,
                count,
                expected: spec.budget_per_chain(),
            });
        }
    }
    FeasibilityReport {
        feasible: violations.is_empty(),
        violations,
    }
}

/// Projects `x` onto the feasible set of `spec`.
///
/// Full and partial connection keep their fixed support and take
/// `exp(j angle(x))` entrywise, which is the Euclidean-nearest feasible
/// point. Dynamic connection re-selects each chain's support as the
/// `budget_per_chain` antennas with the largest `|x|` (ties to the lower
/// index) and phase-projects those. Because every feasible point of a given
/// architecture has the same Frobenius norm, the result also maximizes
/// `Re <F, x>` over the feasible set.
pub fn project_analog(x: &CMat, spec: &ArchitectureSpec) -> Result<AnalogPrecoder> {
    if x.shape() != (spec.n_antennas, spec.n_rf) {
        return Err(shape!(
            "project_analog expects {}x{}, got {}x{}",
            spec.n_antennas,
            spec.n_rf,
            x.nrows(),
            x.ncols()
        ));
    }
    let n_t = spec.n_antennas;
    let mut out = CMat::zeros(n_t, spec.n_rf);
    match spec.kind {
        ArchitectureKind::Full | ArchitectureKind::Partial => {
            for r in 0..spec.n_rf {
                for n in 0..n_t {
                    if spec.allows(n, r) {
                        out[(n, r)] = unit_phase(x[(n, r)]);
                    }
                }
            }
        }
        ArchitectureKind::Dynamic { .. } => {
            let budget = spec.budget_per_chain();
            let mut order: Vec<usize> = (0..n_t).collect();
            for r in 0..spec.n_rf {
                order.sort_by(|&a, &b| {
                    x[(b, r)]
                        .norm_sqr()
                        .total_cmp(&x[(a, r)].norm_sqr())
                        .then(a.cmp(&b))
                });
                for &n in &order[..budget] {
                    out[(n, r)] = unit_phase(x[(n, r)]);
                }
            }
        }
    }
    Ok(AnalogPrecoder {
        matrix: out,
        spec: *spec,
    })
}

/// Uniform random phases on a (for dynamic: uniformly drawn) support.
pub fn random_feasible(spec: &ArchitectureSpec, seed: u64) -> AnalogPrecoder {
    let mut rng = substream(seed, 0xA7);
    let n_t = spec.n_antennas;
    let mut m = CMat::zeros(n_t, spec.n_rf);
    match spec.kind {
        ArchitectureKind::Full | ArchitectureKind::Partial => {
            for r in 0..spec.n_rf {
                for n in 0..n_t {
                    if spec.allows(n, r) {
                        m[(n, r)] = cis(uniform_phase(&mut rng));
                    }
                }
            }
        }
        ArchitectureKind::Dynamic { .. } => {
            let budget = spec.budget_per_chain();
            for r in 0..spec.n_rf {
                let mut chosen: Vec<usize> = sample(&mut rng, n_t, budget).into_vec();
                chosen.sort_unstable();
                for n in chosen {
                    m[(n, r)] = cis(uniform_phase(&mut rng));
                }
            }
        }
    }
    AnalogPrecoder {
        matrix: m,
        spec: *spec,
    }
}

/// `exp(j angle(z))` with `angle(0) = 0`.
///
/// Entries that are already unit modulus to within a few ulps are returned
/// as is, so projecting an already projected matrix reproduces it bit for
/// bit.
pub fn unit_phase(z: C64) -> C64 {
    if (z.norm_sqr() - 1.0).abs() <= 8.0 * f64::EPSILON {
        z
    } else {
        cis(angle(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::fro2;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMat {
        let mut rng = substream(seed, 99);
        CMat::from_fn(rows, cols, |_, _| crate::rng::complex_gaussian(&mut rng, 1.0))
    }

    fn specs(n_t: usize, n_rf: usize) -> [ArchitectureSpec; 3] {
        [
            ArchitectureSpec::full(n_t, n_rf).unwrap(),
            ArchitectureSpec::partial(n_t, n_rf).unwrap(),
            ArchitectureSpec::dynamic(n_t, n_rf, 2 * n_t).unwrap(),
        ]
    }

    #[test]
    fn spec_validation() {
        assert!(ArchitectureSpec::partial(6, 4).is_err());
        assert!(ArchitectureSpec::dynamic(8, 4, 2).is_err());
        assert!(ArchitectureSpec::dynamic(8, 4, 6).is_err());
        assert!(ArchitectureSpec::dynamic(8, 2, 4).is_ok());
    }

    #[test]
    fn phase_shifter_counts() {
        let [f, p, d] = specs(32, 4);
        assert_eq!(f.phase_shifter_count(), 128);
        assert_eq!(p.phase_shifter_count(), 32);
        assert_eq!(d.phase_shifter_count(), 64);
    }

    #[test]
    fn full_projection_is_identity_on_feasible() {
        let spec = ArchitectureSpec::full(4, 2).unwrap();
        let f = random_feasible(&spec, 3);
        let p = project_analog(f.matrix(), &spec).unwrap();
        assert!(fro2(&(p.matrix() - f.matrix())) < 1e-28);
    }

    #[test]
    fn full_projection_strips_modulus() {
        let spec = ArchitectureSpec::full(2, 1).unwrap();
        let x = CMat::from_element(2, 1, cis(PI / 4.0) * 2.0);
        let p = project_analog(&x, &spec).unwrap();
        for z in p.matrix().iter() {
            assert!((z - cis(PI / 4.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_entries_map_to_phase_zero() {
        let spec = ArchitectureSpec::full(2, 1).unwrap();
        let p = project_analog(&CMat::zeros(2, 1), &spec).unwrap();
        assert!(p.matrix().iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn projection_matches_quantized_exhaustive_search() {
        let spec = ArchitectureSpec::full(2, 1).unwrap();
        let levels = 1usize << 12;
        let phases: Vec<C64> = (0..levels)
            .map(|i| cis(2.0 * PI * i as f64 / levels as f64))
            .collect();
        for seed in 0..3 {
            let x = random_matrix(2, 1, seed);
            let proj = project_analog(&x, &spec).unwrap();
            let dist = libm::sqrt(fro2(&(&x - proj.matrix())));
            let mut best = f64::INFINITY;
            for p0 in &phases {
                let d0 = (x[(0, 0)] - p0).norm_sqr();
                if d0 >= best {
                    continue;
                }
                for p1 in &phases {
                    let d = d0 + (x[(1, 0)] - p1).norm_sqr();
                    if d < best {
                        best = d;
                    }
                }
            }
            assert!((dist - libm::sqrt(best)).abs() < 1e-3, "{dist} vs {}", libm::sqrt(best));
        }
    }

    #[test]
    fn feasibility_reports_bad_modulus() {
        let spec = ArchitectureSpec::full(2, 2).unwrap();
        let mut m = random_feasible(&spec, 1).matrix().clone();
        m[(1, 0)] *= 0.5;
        let report = feasibility_check(&AnalogPrecoder::new_unchecked(m, spec));
        assert!(!report.feasible);
        assert!(matches!(
            report.violations[0],
            Violation::NonUnitModulus { row: 1, col: 0, .. }
        ));
    }

    #[test]
    fn feasibility_reports_off_block_entry() {
        let spec = ArchitectureSpec::partial(4, 2).unwrap();
        let mut m = random_feasible(&spec, 1).matrix().clone();
        m[(3, 0)] = C64::new(1.0, 0.0);
        let report = feasibility_check(&AnalogPrecoder::new_unchecked(m, spec));
        assert!(!report.feasible);
        assert!(matches!(report.violations[0], Violation::OffSupport { row: 3, col: 0, .. }));
        assert!(AnalogPrecoder::new(CMat::zeros(4, 2), spec).is_err());
    }

    #[test]
    fn random_feasible_examples() {
        let f = random_feasible(&ArchitectureSpec::full(2, 2).unwrap(), 0);
        assert!(f.matrix().iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        let p = random_feasible(&ArchitectureSpec::partial(4, 2).unwrap(), 0);
        let nz: Vec<(usize, usize)> = (0..4)
            .flat_map(|n| (0..2).map(move |r| (n, r)))
            .filter(|&(n, r)| p.matrix()[(n, r)].norm() > 0.5)
            .collect();
        assert_eq!(nz, alloc::vec![(0, 0), (1, 0), (2, 1), (3, 1)]);
        let spec = ArchitectureSpec::dynamic(8, 2, 8).unwrap();
        let d = random_feasible(&spec, 0);
        let support = d.matrix().iter().filter(|z| z.norm() > 0.5).count();
        assert_eq!(support, 8);
        assert!(feasibility_check(&d).feasible);
        let g = d.switch_map().unwrap();
        assert_eq!(g.len(), 8);
        for l in 0..8 {
            assert_eq!(g.iter().map(|row| row[l] as usize).sum::<usize>(), 1);
        }
        assert_eq!(random_feasible(&spec, 4), random_feasible(&spec, 4));
    }

    #[test]
    fn dynamic_with_full_budget_reduces_to_full() {
        let n_t = 6;
        let n_rf = 3;
        let full = ArchitectureSpec::full(n_t, n_rf).unwrap();
        let dynamic = ArchitectureSpec::dynamic(n_t, n_rf, n_t * n_rf).unwrap();
        for seed in 0..20 {
            let x = random_matrix(n_t, n_rf, seed);
            let a = project_analog(&x, &full).unwrap();
            let b = project_analog(&x, &dynamic).unwrap();
            assert!(fro2(&(a.matrix() - b.matrix())) < 1e-28);
        }
    }

    #[test]
    fn projections_always_feasible() {
        for seed in 0..1000u64 {
            let x = random_matrix(8, 2, seed);
            for spec in specs(8, 2) {
                let p = project_analog(&x, &spec).unwrap();
                assert!(feasibility_check(&p).feasible, "{spec:?} seed {seed}");
            }
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let spec = ArchitectureSpec::full(4, 2).unwrap();
        assert!(matches!(
            project_analog(&CMat::zeros(3, 2), &spec),
            Err(crate::Error::Shape(_))
        ));
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(seed in 0u64..10_000) {
            let x = random_matrix(8, 2, seed);
            for spec in specs(8, 2) {
                let once = project_analog(&x, &spec).unwrap();
                let twice = project_analog(once.matrix(), &spec).unwrap();
                prop_assert_eq!(once.matrix(), twice.matrix());
            }
        }

        #[test]
        fn projection_is_nearest_among_random_feasible(seed in 0u64..10_000) {
            let x = random_matrix(8, 2, seed);
            for spec in [specs(8, 2)[0], specs(8, 2)[1]] {
                let proj = project_analog(&x, &spec).unwrap();
                let d_proj = fro2(&(&x - proj.matrix()));
                for trial in 0..20 {
                    let f = random_feasible(&spec, seed * 31 + trial);
                    prop_assert!(d_proj <= fro2(&(&x - f.matrix())) + 1e-12);
                }
            }
        }
    }
}
