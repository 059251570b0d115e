//! Experiment configuration: TOML with dotted keys
//! (`dims.n_tx_antennas = 32`). Every key has a default, unknown keys are
//! rejected, and the resolved configuration is what gets hashed.

use std::path::{Path, PathBuf};

use dfrc_core::architecture::ArchitectureSpec;
use dfrc_core::channel::{make_grid, ClusterParams, SystemDims};
use dfrc_core::metrics::{RadarScene, RadarSettings, Target};
use dfrc_core::scalarize::{CommMetric, Normalizer, Objective, ObjectiveSpec, RadarMetric, ScalarizationSpec};
use dfrc_core::solvers::{Method, SolverConfig};
use dfrc_core::virtualarray::DoaStudyConfig;
use dfrc_core::C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Total transmit power `P`, split evenly across subcarriers.
    pub total_power: f64,
    pub dims: DimsConfig,
    pub channel: ChannelConfig,
    pub architecture: ArchitectureConfig,
    pub scene: SceneConfig,
    pub radar: RadarConfig,
    pub objective: ObjectiveConfig,
    pub scalarization: ScalarizationConfig,
    pub solver: SolverSection,
    pub sweep: SweepConfig,
    pub doa: DoaConfig,
    /// Where artifacts go. Not part of the hash.
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            total_power: 1.0,
            dims: DimsConfig::default(),
            channel: ChannelConfig::default(),
            architecture: ArchitectureConfig::default(),
            scene: SceneConfig::default(),
            radar: RadarConfig::default(),
            objective: ObjectiveConfig::default(),
            scalarization: ScalarizationConfig::default(),
            solver: SolverSection::default(),
            sweep: SweepConfig::default(),
            doa: DoaConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimsConfig {
    pub n_tx_antennas: usize,
    pub n_rx_antennas: usize,
    pub n_tx_rf: usize,
    pub n_rx_rf: usize,
    pub n_streams: usize,
    pub n_users: usize,
    pub n_subcarriers: usize,
    pub n_radar_rx_rf: usize,
}

impl Default for DimsConfig {
    fn default() -> Self {
        Self {
            n_tx_antennas: 32,
            n_rx_antennas: 4,
            n_tx_rf: 4,
            n_rx_rf: 2,
            n_streams: 4,
            n_users: 4,
            n_subcarriers: 8,
            n_radar_rx_rf: 8,
        }
    }
}

impl DimsConfig {
    pub fn system(&self) -> SystemDims {
        SystemDims {
            n_tx_antennas: self.n_tx_antennas,
            n_rx_antennas: self.n_rx_antennas,
            n_tx_rf: self.n_tx_rf,
            n_rx_rf: self.n_rx_rf,
            n_streams: self.n_streams,
            n_users: self.n_users,
            n_subcarriers: self.n_subcarriers,
            n_radar_rx_rf: self.n_radar_rx_rf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub n_clusters: usize,
    pub rays_per_cluster: usize,
    pub angular_spread_deg: f64,
    /// Per-subcarrier transmit power over noise (dB); overridden by
    /// `sweep.snr_db` in SNR sweeps.
    pub snr_db: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            n_clusters: 5,
            rays_per_cluster: 10,
            angular_spread_deg: 7.5,
            snr_db: 10.0,
        }
    }
}

impl ChannelConfig {
    pub fn cluster_params(&self) -> ClusterParams {
        ClusterParams {
            n_clusters: self.n_clusters,
            rays_per_cluster: self.rays_per_cluster,
            angular_spread: self.angular_spread_deg.to_radians(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArchitectureKind {
    Full,
    Dynamic,
    Partial,
}

impl ArchitectureKind {
    pub fn name(&self) -> &'static str {
        match self {
            ArchitectureKind::Full => "full",
            ArchitectureKind::Dynamic => "dynamic",
            ArchitectureKind::Partial => "partial",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArchitectureConfig {
    /// Architectures swept by `pareto`; the first one is used by the
    /// single-architecture experiments.
    pub kinds: Vec<ArchitectureKind>,
    /// Phase shifter count `L` for the dynamic architecture; 0 means `2 N_t`.
    pub phase_shifters: usize,
}

impl Default for ArchitectureConfig {
    fn default() -> Self {
        Self {
            kinds: vec![ArchitectureKind::Full, ArchitectureKind::Dynamic, ArchitectureKind::Partial],
            phase_shifters: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    /// Target directions (sin-space).
    pub targets: Vec<f64>,
    /// Common real target gain `alpha`.
    pub target_gain: f64,
    /// Main-lobe intervals `[lo, hi]` (sin-space).
    pub mainlobe: Vec<[f64; 2]>,
    pub grid_points: usize,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            targets: vec![-0.563, 0.375],
            target_gain: 1.0,
            mainlobe: vec![[-0.7891, -0.337], [0.0939, 0.657]],
            grid_points: 181,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadarConfig {
    pub noise_variance: f64,
    pub pfa: f64,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self {
            noise_variance: 0.1,
            pfa: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadarMetricName {
    Ssme,
    NegRadarMi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommMetricName {
    Mmse,
    NegSe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub radar: RadarMetricName,
    pub comm: CommMetricName,
    /// Normalize both metrics by fully digital single-objective brackets.
    pub normalize: bool,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            radar: RadarMetricName::NegRadarMi,
            comm: CommMetricName::NegSe,
            normalize: true,
        }
    }
}

impl ObjectiveConfig {
    pub fn raw_spec(&self) -> ObjectiveSpec {
        let radar = match self.radar {
            RadarMetricName::Ssme => RadarMetric::Ssme,
            RadarMetricName::NegRadarMi => RadarMetric::NegRadarMi,
        };
        let comm = match self.comm {
            CommMetricName::Mmse => CommMetric::Mmse,
            CommMetricName::NegSe => CommMetric::NegSe,
        };
        ObjectiveSpec {
            radar,
            comm,
            radar_norm: Normalizer::IDENTITY,
            comm_norm: Normalizer::IDENTITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarizationKind {
    Weighted,
    Epsilon,
    Minmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveName {
    Radar,
    Comm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalarizationConfig {
    pub kind: ScalarizationKind,
    /// Radar weight `w`; the comm weight is `1 - w`.
    pub weight: f64,
    /// Objective minimized under the epsilon constraint.
    pub primary: ObjectiveName,
    /// Bound on the other (normalized) objective.
    pub epsilon: f64,
}

impl Default for ScalarizationConfig {
    fn default() -> Self {
        Self {
            kind: ScalarizationKind::Weighted,
            weight: 0.5,
            primary: ObjectiveName::Radar,
            epsilon: 0.5,
        }
    }
}

impl ScalarizationConfig {
    pub fn spec(&self) -> ScalarizationSpec {
        match self.kind {
            ScalarizationKind::Weighted => ScalarizationSpec::weighted(self.weight),
            ScalarizationKind::Epsilon => ScalarizationSpec::EpsilonConstraint {
                primary: match self.primary {
                    ObjectiveName::Radar => Objective::Radar,
                    ObjectiveName::Comm => Objective::Comm,
                },
                epsilon: self.epsilon,
            },
            ScalarizationKind::Minmax => ScalarizationSpec::MinMax,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Admm,
    Twostage,
}

impl MethodName {
    pub fn method(&self) -> Method {
        match self {
            MethodName::Admm => Method::Admm,
            MethodName::Twostage => Method::TwoStage,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    /// Method used by `design`.
    pub method: MethodName,
    pub max_iterations: usize,
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub rho: f64,
    pub rho_growth: f64,
    pub ridge: f64,
    pub objective_tol: f64,
    pub polish_iterations: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            method: MethodName::Admm,
            max_iterations: d.max_iterations,
            primal_tol: d.primal_tol,
            dual_tol: d.dual_tol,
            rho: d.rho,
            rho_growth: d.rho_growth,
            ridge: d.ridge,
            objective_tol: d.objective_tol,
            polish_iterations: d.polish_iterations,
        }
    }
}

impl SolverSection {
    pub fn config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            max_iterations: self.max_iterations,
            primal_tol: self.primal_tol,
            dual_tol: self.dual_tol,
            rho: self.rho,
            rho_growth: self.rho_growth,
            ridge: self.ridge,
            objective_tol: self.objective_tol,
            polish_iterations: self.polish_iterations,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Radar weights for `pareto`.
    pub weights: Vec<f64>,
    /// SNR points (dB) for `se-vs-snr`.
    pub snr_db: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            weights: (0..=10).map(|i| i as f64 / 10.0).collect(),
            snr_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0],
            seeds: (0..20).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DoaConfig {
    pub k_values: Vec<usize>,
    pub snr_db: Vec<f64>,
    pub n_rx: usize,
    pub source_u: f64,
    pub pair_center: f64,
    pub rmse_trials: usize,
    pub resolution_trials: usize,
}

impl Default for DoaConfig {
    fn default() -> Self {
        let d = DoaStudyConfig::default();
        Self {
            k_values: d.k_values,
            snr_db: d.snr_db,
            n_rx: d.n_rx,
            source_u: d.source_u,
            pair_center: d.pair_center,
            rmse_trials: d.rmse_trials,
            resolution_trials: d.resolution_trials,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(config_error)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Replaces the seed list with a single seed.
    pub fn override_seed(&mut self, seed: u64) {
        self.sweep.seeds = vec![seed];
    }

    /// SHA-256 of the resolved configuration without the output section.
    pub fn hash(&self) -> String {
        let mut hashed = self.clone();
        hashed.output = OutputConfig { dir: PathBuf::new() };
        let digest = Sha256::digest(hashed.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_power > 0.0) {
            return Err(config_error("total_power must be positive"));
        }
        self.dims.system().validate().map_err(config_error)?;
        if self.channel.n_clusters == 0 || self.channel.rays_per_cluster == 0 {
            return Err(config_error("channel needs at least one cluster and one ray"));
        }
        if !(self.channel.angular_spread_deg >= 0.0) || !self.channel.snr_db.is_finite() {
            return Err(config_error("channel angular spread and snr must be finite"));
        }
        if self.architecture.kinds.is_empty() {
            return Err(config_error("architecture.kinds is empty"));
        }
        for &kind in &self.architecture.kinds {
            self.architecture_spec(kind)?;
        }
        let scene = self.scene()?;
        let inside = scene.grid.points().iter().filter(|&&u| scene.in_mainlobe(u)).count();
        if inside == 0 || inside == scene.grid.len() {
            return Err(config_error("scene.mainlobe must cover some but not all grid points"));
        }
        if !(self.radar.noise_variance > 0.0) || !(self.radar.pfa > 0.0 && self.radar.pfa < 1.0) {
            return Err(config_error("radar needs noise_variance > 0 and pfa in (0, 1)"));
        }
        self.scalarization.spec().validate().map_err(config_error)?;
        self.solver.config(0).validate().map_err(config_error)?;
        let s = &self.sweep;
        if s.weights.is_empty() || s.snr_db.is_empty() || s.seeds.is_empty() {
            return Err(config_error("sweep lists must be nonempty"));
        }
        if s.weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(config_error("sweep.weights must lie in [0, 1]"));
        }
        if s.snr_db.iter().any(|x| !x.is_finite()) {
            return Err(config_error("sweep.snr_db must be finite"));
        }
        self.doa_study(0).validate().map_err(config_error)?;
        Ok(())
    }

    pub fn architecture_spec(&self, kind: ArchitectureKind) -> Result<ArchitectureSpec> {
        let (n_t, n_rf) = (self.dims.n_tx_antennas, self.dims.n_tx_rf);
        let spec = match kind {
            ArchitectureKind::Full => ArchitectureSpec::full(n_t, n_rf),
            ArchitectureKind::Partial => ArchitectureSpec::partial(n_t, n_rf),
            ArchitectureKind::Dynamic => {
                let l = if self.architecture.phase_shifters == 0 {
                    2 * n_t
                } else {
                    self.architecture.phase_shifters
                };
                ArchitectureSpec::dynamic(n_t, n_rf, l)
            }
        };
        spec.map_err(config_error)
    }

    pub fn scene(&self) -> Result<RadarScene> {
        let targets = self
            .scene
            .targets
            .iter()
            .map(|&u| Target {
                u,
                gain: C64::new(self.scene.target_gain, 0.0),
            })
            .collect();
        let mainlobe = self.scene.mainlobe.iter().map(|&[a, b]| (a, b)).collect();
        let grid = make_grid(self.scene.grid_points).map_err(config_error)?;
        RadarScene::new(targets, mainlobe, grid).map_err(config_error)
    }

    pub fn radar_settings(&self) -> RadarSettings {
        RadarSettings {
            noise_variance: self.radar.noise_variance,
            pfa: self.radar.pfa,
            n_radar_rx: self.dims.n_radar_rx_rf,
        }
    }

    pub fn doa_study(&self, seed: u64) -> DoaStudyConfig {
        DoaStudyConfig {
            k_values: self.doa.k_values.clone(),
            snr_db: self.doa.snr_db.clone(),
            n_rx: self.doa.n_rx,
            total_power: self.total_power,
            source_u: self.doa.source_u,
            pair_center: self.doa.pair_center,
            rmse_trials: self.doa.rmse_trials,
            resolution_trials: self.doa.resolution_trials,
            seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn dotted_keys_and_tables_agree() {
        let a = ExperimentConfig::from_toml("dims.n_tx_antennas = 16\nsweep.seeds = [3]\n").unwrap();
        let b = ExperimentConfig::from_toml("[dims]\nn_tx_antennas = 16\n[sweep]\nseeds = [3]\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dims.n_tx_antennas, 16);
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "dims.n_tx_antenas = 4",
            "sweep.weights = []",
            "sweep.weights = [0.0, 1.5]",
            "dims.n_streams = 3",
            "architecture.kinds = [\"ring\"]",
            "scene.mainlobe = [[-1.0, 1.0]]",
            "solver.rho = -1.0",
            "total_power = 0.0",
        ] {
            let err = ExperimentConfig::from_toml(text).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}: {err}");
        }
    }

    #[test]
    fn output_dir_does_not_change_hash() {
        let mut cfg = ExperimentConfig::default();
        let h = cfg.hash();
        cfg.output.dir = "elsewhere".into();
        assert_eq!(cfg.hash(), h);
        assert_eq!(h.len(), 64);
    }

    /// Perturbs every leaf of the resolved TOML tree and checks the hash
    /// moves each time.
    #[test]
    fn every_result_field_changes_hash() {
        let base = ExperimentConfig::default();
        let base_hash = base.hash();
        let tree: toml::Value = toml::from_str(&base.to_toml()).unwrap();
        let mut paths = Vec::new();
        collect_leaves(&tree, String::new(), &mut paths);
        let mut checked = 0;
        for path in paths.iter().filter(|p| !p.starts_with("output.")) {
            let mut t = tree.clone();
            perturb(&mut t, path);
            let Ok(cfg) = toml::from_str::<ExperimentConfig>(&toml::to_string(&t).unwrap()) else {
                panic!("perturbing {path} broke parsing");
            };
            assert_ne!(cfg.hash(), base_hash, "{path}");
            checked += 1;
        }
        assert!(checked > 40, "only {checked} fields");
    }

    fn collect_leaves(v: &toml::Value, prefix: String, out: &mut Vec<String>) {
        match v {
            toml::Value::Table(t) => {
                for (k, v) in t {
                    let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    collect_leaves(v, p, out);
                }
            }
            _ => out.push(prefix),
        }
    }

    fn perturb(v: &mut toml::Value, path: &str) {
        let mut cur = v;
        for key in path.split('.') {
            cur = cur.get_mut(key).unwrap();
        }
        *cur = match cur.clone() {
            toml::Value::Integer(i) => toml::Value::Integer(i + 1),
            toml::Value::Float(x) => toml::Value::Float(x + 0.125),
            toml::Value::Boolean(b) => toml::Value::Boolean(!b),
            toml::Value::String(s) => toml::Value::String(match s.as_str() {
                "neg_radar_mi" => "ssme".into(),
                "neg_se" => "mmse".into(),
                "weighted" => "minmax".into(),
                "radar" => "comm".into(),
                "admm" => "twostage".into(),
                other => format!("{other}x"),
            }),
            toml::Value::Array(mut a) => {
                match a.first().cloned() {
                    Some(toml::Value::String(_)) => {
                        a.pop();
                    }
                    Some(first) => a.push(first),
                    None => {}
                }
                toml::Value::Array(a)
            }
            other => other,
        };
    }
}
