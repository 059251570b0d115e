//! Normalization and scalarization of the (radar, communication) pair.
//!
//! Every metric is minimized. A [`Scalarizer`] turns normalized values into a
//! single smooth objective plus the coefficients that combine the two metric
//! gradients, so one gradient-based solver core serves all formulations.

use crate::error::domain;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RadarMetric {
    Ssme,
    NegRadarMi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CommMetric {
    Mmse,
    NegSe,
}

/// Affine map `v -> (v - offset) / scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizer {
    pub offset: f64,
    pub scale: f64,
}

impl Normalizer {
    pub const IDENTITY: Self = Self { offset: 0.0, scale: 1.0 };

    pub fn new(offset: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite() && offset.is_finite()) {
            return Err(domain!("normalizer needs finite offset and scale > 0, got ({offset}, {scale})"));
        }
        Ok(Self { offset, scale })
    }

    /// Maps `best -> 0` and `worst -> 1`. A degenerate bracket falls back to
    /// a unit-sized scale so the metric stays usable.
    pub fn from_bracket(best: f64, worst: f64) -> Self {
        let span = worst - best;
        let floor = 1e-9 * best.abs().max(1.0);
        Self {
            offset: best,
            scale: if span > floor { span } else { best.abs().max(1.0) },
        }
    }

    pub fn apply(&self, v: f64) -> f64 {
        (v - self.offset) / self.scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveSpec {
    pub radar: RadarMetric,
    pub comm: CommMetric,
    pub radar_norm: Normalizer,
    pub comm_norm: Normalizer,
}

impl ObjectiveSpec {
    pub fn raw(radar: RadarMetric, comm: CommMetric) -> Self {
        Self {
            radar,
            comm,
            radar_norm: Normalizer::IDENTITY,
            comm_norm: Normalizer::IDENTITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        Normalizer::new(self.radar_norm.offset, self.radar_norm.scale)?;
        Normalizer::new(self.comm_norm.offset, self.comm_norm.scale)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    Radar,
    Comm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarizationSpec {
    WeightedSum { w_radar: f64, w_comm: f64 },
    EpsilonConstraint { primary: Objective, epsilon: f64 },
    MinMax,
}

impl ScalarizationSpec {
    pub fn weighted(w_radar: f64) -> Self {
        Self::WeightedSum {
            w_radar,
            w_comm: 1.0 - w_radar,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::WeightedSum { w_radar, w_comm } => {
                if !(w_radar >= 0.0 && w_comm >= 0.0) {
                    return Err(domain!("weights must be nonnegative, got ({w_radar}, {w_comm})"));
                }
                if (w_radar + w_comm - 1.0).abs() > 1e-9 {
                    return Err(domain!("weights must add up to 1, got {}", w_radar + w_comm));
                }
            }
            Self::EpsilonConstraint { epsilon, .. } => {
                if !epsilon.is_finite() {
                    return Err(domain!("epsilon must be finite"));
                }
            }
            Self::MinMax => {}
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::WeightedSum { .. } => "weighted_sum",
            Self::EpsilonConstraint { .. } => "epsilon_constraint",
            Self::MinMax => "minmax",
        }
    }
}

/// Normalized `(radar, comm)` values.
pub fn normalize_metrics(radar: f64, comm: f64, spec: &ObjectiveSpec) -> (f64, f64) {
    (spec.radar_norm.apply(radar), spec.comm_norm.apply(comm))
}

pub fn weighted_sum(normalized: (f64, f64), w_radar: f64, w_comm: f64) -> Result<f64> {
    ScalarizationSpec::WeightedSum { w_radar, w_comm }.validate()?;
    Ok(w_radar * normalized.0 + w_comm * normalized.1)
}

/// `min primary s.t. secondary <= epsilon`, handled by a quadratic penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonProblem {
    pub primary: Objective,
    pub epsilon: f64,
}

/// Feasibility slack on normalized values.
pub const CONSTRAINT_TOL: f64 = 1e-6;

/// Builds the constrained problem. `secondary_min` is a certified lower
/// bound on the normalized secondary metric (0 when the normalizer offset is
/// its single-objective optimum).
pub fn epsilon_wrap(primary: Objective, epsilon: f64, secondary_min: f64) -> Result<EpsilonProblem> {
    if !epsilon.is_finite() {
        return Err(domain!("epsilon must be finite"));
    }
    if secondary_min > epsilon + CONSTRAINT_TOL {
        return Err(crate::Error::Infeasible {
            gap: secondary_min - epsilon,
        });
    }
    Ok(EpsilonProblem { primary, epsilon })
}

/// `min eta s.t. f_i <= eta`, handled by a quadratic penalty on `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinMaxProblem;

pub fn minmax_wrap() -> MinMaxProblem {
    MinMaxProblem
}

/// Penalized level for `min_eta eta + mu sum_i (f_i - eta)_+^2`, with the
/// multipliers `lambda_i = 2 mu (f_i - eta)_+` (they sum to 1).
pub fn minmax_level(values: &[f64], mu: f64) -> (f64, [f64; 2]) {
    let mut sorted = [values[0], *values.get(1).unwrap_or(&f64::NEG_INFINITY)];
    let swapped = sorted[1] > sorted[0];
    if swapped {
        sorted.swap(0, 1);
    }
    let single = sorted[0] - 0.5 / mu;
    let eta = if values.len() == 1 || sorted[1] <= single {
        single
    } else {
        0.5 * (sorted[0] + sorted[1]) - 0.25 / mu
    };
    let mut lambda = [0.0; 2];
    for (i, &v) in values.iter().enumerate().take(2) {
        lambda[i] = 2.0 * mu * (v - eta).max(0.0);
    }
    (eta, lambda)
}

/// Smooth scalarized objective on normalized values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalarized {
    pub value: f64,
    /// Gradient weights on the normalized radar and comm metrics.
    pub coeffs: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalarizer {
    pub spec: ScalarizationSpec,
}

impl Scalarizer {
    pub fn new(spec: ScalarizationSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }

    /// Smooth surrogate at penalty weight `mu` (ignored by weighted sums).
    pub fn smooth(&self, n: (f64, f64), mu: f64) -> Scalarized {
        match self.spec {
            ScalarizationSpec::WeightedSum { w_radar, w_comm } => Scalarized {
                value: w_radar * n.0 + w_comm * n.1,
                coeffs: (w_radar, w_comm),
            },
            ScalarizationSpec::EpsilonConstraint { primary, epsilon } => {
                let (fp, fs) = order(primary, n);
                let viol = (fs - epsilon).max(0.0);
                let value = fp + mu * viol * viol;
                let cs = 2.0 * mu * viol;
                Scalarized {
                    value,
                    coeffs: match primary {
                        Objective::Radar => (1.0, cs),
                        Objective::Comm => (cs, 1.0),
                    },
                }
            }
            ScalarizationSpec::MinMax => {
                let (eta, l) = minmax_level(&[n.0, n.1], mu);
                let pen: f64 = [n.0, n.1].iter().map(|v| (v - eta).max(0.0)).map(|x| x * x).sum();
                Scalarized {
                    value: eta + mu * pen,
                    coeffs: (l[0], l[1]),
                }
            }
        }
    }

    /// Exact (possibly nonsmooth) objective used to rank candidate designs.
    /// Constraint violations of the epsilon form dominate the primary value.
    pub fn merit(&self, n: (f64, f64)) -> f64 {
        match self.spec {
            ScalarizationSpec::WeightedSum { w_radar, w_comm } => w_radar * n.0 + w_comm * n.1,
            ScalarizationSpec::EpsilonConstraint { primary, epsilon } => {
                let (fp, fs) = order(primary, n);
                fp + 1e6 * (fs - epsilon - CONSTRAINT_TOL).max(0.0)
            }
            ScalarizationSpec::MinMax => n.0.max(n.1),
        }
    }

    /// Whether penalty weights need to grow during a solve.
    pub fn uses_penalty(&self) -> bool {
        !matches!(self.spec, ScalarizationSpec::WeightedSum { .. })
    }

    /// Reported level `eta` for min-max solutions.
    pub fn eta(&self, n: (f64, f64)) -> Option<f64> {
        matches!(self.spec, ScalarizationSpec::MinMax).then_some(n.0.max(n.1))
    }

    /// Whether an epsilon constraint is met within [`CONSTRAINT_TOL`].
    pub fn constraint_met(&self, n: (f64, f64), tol: f64) -> bool {
        match self.spec {
            ScalarizationSpec::EpsilonConstraint { primary, epsilon } => order(primary, n).1 <= epsilon + tol,
            _ => true,
        }
    }
}

fn order(primary: Objective, n: (f64, f64)) -> (f64, f64) {
    match primary {
        Objective::Radar => (n.0, n.1),
        Objective::Comm => (n.1, n.0),
    }
}
