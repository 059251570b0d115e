//! The five CLI experiments. Each returns in-memory artifacts; cells run on
//! a rayon pool and results are collected in sweep order, so output bytes
//! do not depend on `--jobs`.

use dfrc_core::channel::{gen_channel, ChannelSet};
use dfrc_core::metrics::{
    beampattern, beampattern_per_subcarrier, comm_mutual_information, mean_power, metric_report, psl_isl,
    radar_mi, spectral_efficiency, ssme, to_db, Precoder, RadarScene,
};
use dfrc_core::scalarize::{ObjectiveSpec, ScalarizationSpec};
use dfrc_core::solvers::{
    compute_normalizers, design_combiners, design_fully_digital, design_two_stage_from, hybrid_from_fully_digital,
    solve, DesignProblem, DesignResult, Method,
};
use dfrc_core::virtualarray::doa_cell;
use rayon::prelude::*;

use crate::config::{ArchitectureKind, ExperimentConfig};
use crate::error::{Error, Result};
use crate::io::{channel_table, design_tables, status_name};
use crate::plot;
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Pareto,
    SeVsSnr,
    Beampattern,
    Doa,
    Design,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Pareto => "pareto",
            Experiment::SeVsSnr => "se-vs-snr",
            Experiment::Beampattern => "beampattern",
            Experiment::Doa => "doa",
            Experiment::Design => "design",
        }
    }
}

/// Files produced by one experiment, relative to the output directory.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    fn table(&mut self, name: &str, t: &Table) -> Result<()> {
        self.files.push((name.to_string(), t.to_bytes()?));
        Ok(())
    }

    fn text(&mut self, name: &str, s: String) {
        self.files.push((name.to_string(), s.into_bytes()));
    }
}

fn pool(jobs: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool")
}

pub fn median(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Channel and (optionally normalized) objective for one seed.
pub struct SeedContext {
    pub seed: u64,
    pub channel: ChannelSet,
    pub objective: ObjectiveSpec,
}

impl SeedContext {
    pub fn new(cfg: &ExperimentConfig, scene: &RadarScene, seed: u64, snr_db: f64) -> Result<Self> {
        let channel = gen_channel(&cfg.dims.system(), &cfg.channel.cluster_params(), seed)?
            .with_snr_db(snr_db, cfg.total_power);
        let mut ctx = Self {
            seed,
            channel,
            objective: cfg.objective.raw_spec(),
        };
        if cfg.objective.normalize {
            let (radar_norm, comm_norm) = compute_normalizers(&ctx.problem(cfg, scene), &cfg.solver.config(seed))?;
            ctx.objective.radar_norm = radar_norm;
            ctx.objective.comm_norm = comm_norm;
        }
        Ok(ctx)
    }

    pub fn problem<'a>(&'a self, cfg: &ExperimentConfig, scene: &'a RadarScene) -> DesignProblem<'a> {
        DesignProblem {
            channel: &self.channel,
            scene,
            dims: cfg.dims.system(),
            total_power: cfg.total_power,
            radar_noise_variance: cfg.radar.noise_variance,
            objective: self.objective,
            scalarization: cfg.scalarization.spec(),
        }
    }
}

fn error_status(e: &Error) -> String {
    format!("error: {e}")
}

// ---------------------------------------------------------------- pareto

/// Radar and comm values of one design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoPoint {
    pub mi_radar: f64,
    pub mi_comm: f64,
    /// Normalized objective values.
    pub radar_obj: f64,
    pub comm_obj: f64,
    /// Weighted objective at the weight it was solved for.
    pub scalarized: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoRow {
    pub architecture: ArchitectureKind,
    pub weight: f64,
    pub seed: u64,
    pub status: String,
    /// The design solved at this weight.
    pub solved: Option<ParetoPoint>,
    /// Best design for this weight among all designs solved for the same
    /// (architecture, seed), and the weight it was solved at.
    pub frontier: Option<(ParetoPoint, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoMedian {
    pub architecture: ArchitectureKind,
    pub weight: f64,
    pub mi_radar: f64,
    pub mi_comm: f64,
    pub n_seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoOutput {
    pub rows: Vec<ParetoRow>,
    pub medians: Vec<ParetoMedian>,
}

fn pareto_point(ctx: &SeedContext, cfg: &ExperimentConfig, scene: &RadarScene, r: &DesignResult) -> Result<ParetoPoint> {
    let blocks = r.precoder.blocks();
    Ok(ParetoPoint {
        mi_radar: radar_mi(blocks, scene, cfg.radar.noise_variance),
        mi_comm: comm_mutual_information(&ctx.channel, blocks)?,
        radar_obj: r.values.normalized.0,
        comm_obj: r.values.normalized.1,
        scalarized: r.values.scalarized,
    })
}

/// Index of the candidate minimizing the weighted objective at `w`; ties go
/// to the candidate solved nearest to `w`.
fn pool_select(candidates: &[(f64, ParetoPoint)], w: f64) -> Option<usize> {
    let score = |p: &ParetoPoint| w * p.radar_obj + (1.0 - w) * p.comm_obj;
    (0..candidates.len()).min_by(|&a, &b| {
        let (wa, pa) = &candidates[a];
        let (wb, pb) = &candidates[b];
        score(pa)
            .total_cmp(&score(pb))
            .then((wa - w).abs().total_cmp(&(wb - w).abs()))
    })
}

pub fn run_pareto(cfg: &ExperimentConfig, jobs: usize) -> Result<ParetoOutput> {
    let scene = cfg.scene()?;
    let weights = &cfg.sweep.weights;
    let lo = weights.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if weights.len() < 2 || lo != 0.0 || hi != 1.0 {
        return Err(Error::Config("pareto needs sweep.weights spanning [0, 1]".into()));
    }
    let kinds = &cfg.architecture.kinds;
    let specs = kinds.iter().map(|&k| cfg.architecture_spec(k)).collect::<Result<Vec<_>>>()?;
    let seeds = &cfg.sweep.seeds;
    let pool = pool(jobs);
    let contexts: Vec<Result<SeedContext>> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&s| SeedContext::new(cfg, &scene, s, cfg.channel.snr_db))
            .collect()
    });
    let tasks: Vec<(usize, usize, usize)> = (0..kinds.len())
        .flat_map(|a| (0..seeds.len()).flat_map(move |s| (0..weights.len()).map(move |w| (a, s, w))))
        .collect();
    let solved: Vec<std::result::Result<(ParetoPoint, String), String>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(a, s, w)| {
                let ctx = contexts[s].as_ref().map_err(error_status)?;
                let problem = ctx
                    .problem(cfg, &scene)
                    .with_scalarization(ScalarizationSpec::weighted(weights[w]));
                let r = solve(&problem, Method::Admm, &specs[a], &cfg.solver.config(ctx.seed))
                    .map_err(|e| error_status(&e.into()))?;
                let p = pareto_point(ctx, cfg, &scene, &r).map_err(|e| error_status(&e))?;
                Ok((p, status_name(r.status).to_string()))
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(tasks.len());
    for (a, &kind) in kinds.iter().enumerate() {
        for (s, &seed) in seeds.iter().enumerate() {
            let base = (a * seeds.len() + s) * weights.len();
            let cell = &solved[base..base + weights.len()];
            let candidates: Vec<(f64, ParetoPoint)> = cell
                .iter()
                .zip(weights)
                .filter_map(|(r, &w)| r.as_ref().ok().map(|(p, _)| (w, *p)))
                .collect();
            for (r, &w) in cell.iter().zip(weights) {
                let (solved, status) = match r {
                    Ok((p, st)) => (Some(*p), st.clone()),
                    Err(e) => (None, e.clone()),
                };
                let frontier = pool_select(&candidates, w).map(|i| (candidates[i].1, candidates[i].0));
                rows.push(ParetoRow {
                    architecture: kind,
                    weight: w,
                    seed,
                    status,
                    solved,
                    frontier,
                });
            }
        }
    }
    let mut medians = Vec::new();
    for &kind in kinds {
        for &w in weights {
            let pts: Vec<ParetoPoint> = rows
                .iter()
                .filter(|r| r.architecture == kind && r.weight == w)
                .filter_map(|r| r.frontier.map(|f| f.0))
                .collect();
            medians.push(ParetoMedian {
                architecture: kind,
                weight: w,
                mi_radar: median(pts.iter().map(|p| p.mi_radar)),
                mi_comm: median(pts.iter().map(|p| p.mi_comm)),
                n_seeds: pts.len(),
            });
        }
    }
    Ok(ParetoOutput { rows, medians })
}

impl ParetoOutput {
    pub fn rows_table(&self) -> Table {
        let mut t = Table::new(&[
            "architecture",
            "weight",
            "seed",
            "status",
            "mi_radar",
            "mi_comm",
            "solved_mi_radar",
            "solved_mi_comm",
            "solved_objective",
            "source_weight",
        ]);
        let nan = f64::NAN;
        for r in &self.rows {
            let (f, src) = r.frontier.map_or((None, nan), |(p, w)| (Some(p), w));
            t.push(vec![
                r.architecture.name().into(),
                r.weight.into(),
                r.seed.into(),
                r.status.clone().into(),
                f.map_or(nan, |p| p.mi_radar).into(),
                f.map_or(nan, |p| p.mi_comm).into(),
                r.solved.map_or(nan, |p| p.mi_radar).into(),
                r.solved.map_or(nan, |p| p.mi_comm).into(),
                r.solved.map_or(nan, |p| p.scalarized).into(),
                src.into(),
            ]);
        }
        t
    }

    pub fn medians_table(&self) -> Table {
        let mut t = Table::new(&["architecture", "weight", "mi_radar", "mi_comm", "n_seeds"]);
        for m in &self.medians {
            t.push(vec![
                m.architecture.name().into(),
                m.weight.into(),
                m.mi_radar.into(),
                m.mi_comm.into(),
                m.n_seeds.into(),
            ]);
        }
        t
    }

    /// Count of steps along each median frontier where `mi_radar` rises by
    /// more than `slack` while `mi_comm` rises.
    pub fn monotonicity_violations(&self, kind: ArchitectureKind, slack: f64) -> usize {
        let mut pts: Vec<(f64, f64)> = self
            .medians
            .iter()
            .filter(|m| m.architecture == kind)
            .map(|m| (m.mi_comm, m.mi_radar))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
        pts.windows(2).filter(|w| w[1].1 > w[0].1 + slack).count()
    }
}

// ------------------------------------------------------------- se-vs-snr

#[derive(Debug, Clone, PartialEq)]
pub struct SeRow {
    pub snr_db: f64,
    pub seed: u64,
    pub status: String,
    pub se_fd: f64,
    pub se_admm: f64,
    pub se_twostage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeOutput {
    pub rows: Vec<SeRow>,
    /// `(snr_db, se_fd, se_admm, se_twostage)` medians over seeds.
    pub medians: Vec<[f64; 4]>,
}

fn se_cell(cfg: &ExperimentConfig, scene: &RadarScene, snr_db: f64, seed: u64) -> Result<[f64; 3]> {
    let spec = cfg.architecture_spec(cfg.architecture.kinds[0])?;
    let ctx = SeedContext::new(cfg, scene, seed, snr_db)?;
    let problem = ctx.problem(cfg, scene);
    let solver = cfg.solver.config(seed);
    let n_rx_rf = cfg.dims.n_rx_rf;
    let fd = design_fully_digital(&problem, &solver)?;
    let fd_hybrid = hybrid_from_fully_digital(&fd.blocks)?;
    let fd_comb = design_combiners(&ctx.channel, &fd_hybrid, n_rx_rf)?;
    let se_fd = spectral_efficiency(&ctx.channel, &fd_hybrid, &fd_comb)?.bits;
    let admm = solve(&problem, Method::Admm, &spec, &solver)?;
    let se_admm = spectral_efficiency(&ctx.channel, &admm.precoder, &admm.combiners)?.bits;
    let two = design_two_stage_from(&problem, &fd, &spec, &solver)?;
    let se_two = spectral_efficiency(&ctx.channel, &two.precoder, &two.combiners)?.bits;
    Ok([se_fd, se_admm, se_two])
}

pub fn run_se_vs_snr(cfg: &ExperimentConfig, jobs: usize) -> Result<SeOutput> {
    let scene = cfg.scene()?;
    if let ScalarizationSpec::EpsilonConstraint { .. } = cfg.scalarization.spec() {
        return Err(Error::Config("se-vs-snr runs the two-stage method, which has no epsilon-constraint form".into()));
    }
    let cells: Vec<(f64, u64)> = cfg
        .sweep
        .snr_db
        .iter()
        .flat_map(|&snr| cfg.sweep.seeds.iter().map(move |&s| (snr, s)))
        .collect();
    let results: Vec<Result<[f64; 3]>> =
        pool(jobs).install(|| cells.par_iter().map(|&(snr, s)| se_cell(cfg, &scene, snr, s)).collect());
    let rows: Vec<SeRow> = cells
        .iter()
        .zip(results)
        .map(|(&(snr_db, seed), r)| {
            let (status, [a, b, c]) = match r {
                Ok(v) => ("ok".to_string(), v),
                Err(e) => (error_status(&e), [f64::NAN; 3]),
            };
            SeRow {
                snr_db,
                seed,
                status,
                se_fd: a,
                se_admm: b,
                se_twostage: c,
            }
        })
        .collect();
    let medians = cfg
        .sweep
        .snr_db
        .iter()
        .map(|&snr| {
            let at: Vec<&SeRow> = rows.iter().filter(|r| r.snr_db == snr).collect();
            [
                snr,
                median(at.iter().map(|r| r.se_fd)),
                median(at.iter().map(|r| r.se_admm)),
                median(at.iter().map(|r| r.se_twostage)),
            ]
        })
        .collect();
    Ok(SeOutput { rows, medians })
}

impl SeOutput {
    pub fn medians_table(&self) -> Table {
        let mut t = Table::new(&["snr_db", "se_fd", "se_admm", "se_twostage"]);
        for m in &self.medians {
            t.push(m.iter().map(|&x| Cell::Num(x)).collect());
        }
        t
    }

    pub fn rows_table(&self) -> Table {
        let mut t = Table::new(&["snr_db", "seed", "status", "se_fd", "se_admm", "se_twostage"]);
        for r in &self.rows {
            t.push(vec![
                r.snr_db.into(),
                r.seed.into(),
                r.status.clone().into(),
                r.se_fd.into(),
                r.se_admm.into(),
                r.se_twostage.into(),
            ]);
        }
        t
    }
}

// ----------------------------------------------------------- beampattern

#[derive(Debug, Clone, PartialEq)]
pub struct PatternSummary {
    pub method: &'static str,
    pub seed: u64,
    pub status: String,
    /// Share of grid power (trapezoid rule) inside the main lobe.
    pub mainlobe_fraction: f64,
    pub ssme: f64,
    pub psl_db: f64,
    pub isl_db: f64,
    pub mean_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeampatternOutput {
    pub patterns: Table,
    pub summary: Vec<PatternSummary>,
}

fn pattern_rows<P: Precoder + ?Sized>(t: &mut Table, method: &str, seed: u64, p: &P, scene: &RadarScene) {
    let per_k = beampattern_per_subcarrier(p, &scene.grid);
    let total = beampattern(p, &scene.grid);
    for (g, &u) in scene.grid.points().iter().enumerate() {
        for (k, pk) in per_k.iter().enumerate() {
            t.push(vec![
                method.into(),
                seed.into(),
                u.into(),
                k.into(),
                to_db(pk[g]).into(),
                to_db(total[g]).into(),
            ]);
        }
    }
}

fn summarize<P: Precoder + ?Sized>(method: &'static str, seed: u64, status: &str, p: &P, scene: &RadarScene) -> Result<PatternSummary> {
    let pattern = beampattern(p, &scene.grid);
    let inside: Vec<f64> = scene
        .grid
        .points()
        .iter()
        .zip(&pattern)
        .map(|(&u, &v)| if scene.in_mainlobe(u) { v } else { 0.0 })
        .collect();
    let (psl_db, isl_db) = psl_isl(&pattern, scene)?;
    Ok(PatternSummary {
        method,
        seed,
        status: status.to_string(),
        mainlobe_fraction: scene.grid.trapezoid_mean(&inside) / scene.grid.trapezoid_mean(&pattern),
        ssme: ssme(p, scene).value,
        psl_db,
        isl_db,
        mean_power: mean_power(p, &scene.grid),
    })
}

fn failed_summary(method: &'static str, seed: u64, e: &Error) -> PatternSummary {
    PatternSummary {
        method,
        seed,
        status: error_status(e),
        mainlobe_fraction: f64::NAN,
        ssme: f64::NAN,
        psl_db: f64::NAN,
        isl_db: f64::NAN,
        mean_power: f64::NAN,
    }
}

pub fn run_beampattern(cfg: &ExperimentConfig, jobs: usize) -> Result<BeampatternOutput> {
    let scene = cfg.scene()?;
    let spec = cfg.architecture_spec(cfg.architecture.kinds[0])?;
    let per_seed: Vec<(Table, Vec<PatternSummary>)> = pool(jobs).install(|| {
        cfg.sweep
            .seeds
            .par_iter()
            .map(|&seed| {
                let mut t = Table::new(&["method", "seed", "u", "k", "power_db", "aggregate_db"]);
                let mut summary = Vec::new();
                let ctx = match SeedContext::new(cfg, &scene, seed, cfg.channel.snr_db) {
                    Ok(c) => c,
                    Err(e) => {
                        for m in ["fd", "admm", "twostage"] {
                            summary.push(failed_summary(m, seed, &e));
                        }
                        return (t, summary);
                    }
                };
                let problem = ctx.problem(cfg, &scene);
                let solver = cfg.solver.config(seed);
                let fd = design_fully_digital(&problem, &solver).map_err(Error::from);
                match &fd {
                    Ok(fd) => {
                        pattern_rows(&mut t, "fd", seed, &fd.blocks, &scene);
                        summary.push(
                            summarize("fd", seed, status_name(fd.status), &fd.blocks, &scene)
                                .unwrap_or_else(|e| failed_summary("fd", seed, &e.into())),
                        );
                    }
                    Err(e) => summary.push(failed_summary("fd", seed, e)),
                }
                let admm = solve(&problem, Method::Admm, &spec, &solver).map_err(Error::from);
                let two = match &fd {
                    Ok(fd) if !matches!(problem.scalarization, ScalarizationSpec::EpsilonConstraint { .. }) => {
                        design_two_stage_from(&problem, fd, &spec, &solver).map_err(Error::from)
                    }
                    Ok(_) => solve(&problem, Method::TwoStage, &spec, &solver).map_err(Error::from),
                    Err(e) => Err(Error::Config(e.to_string())),
                };
                for (name, r) in [("admm", admm), ("twostage", two)] {
                    match r {
                        Ok(r) => {
                            pattern_rows(&mut t, name, seed, &r.precoder, &scene);
                            summary.push(
                                summarize(name, seed, status_name(r.status), &r.precoder, &scene)
                                    .unwrap_or_else(|e| failed_summary(name, seed, &e.into())),
                            );
                        }
                        Err(e) => summary.push(failed_summary(name, seed, &e)),
                    }
                }
                (t, summary)
            })
            .collect()
    });
    let mut patterns = Table::new(&["method", "seed", "u", "k", "power_db", "aggregate_db"]);
    let mut summary = Vec::new();
    for (t, s) in per_seed {
        patterns.rows.extend(t.rows);
        summary.extend(s);
    }
    Ok(BeampatternOutput { patterns, summary })
}

impl BeampatternOutput {
    pub fn summary_table(&self) -> Table {
        let mut t = Table::new(&[
            "method",
            "seed",
            "status",
            "mainlobe_fraction",
            "ssme",
            "psl_db",
            "isl_db",
            "mean_power",
        ]);
        for s in &self.summary {
            t.push(vec![
                s.method.into(),
                s.seed.into(),
                s.status.clone().into(),
                s.mainlobe_fraction.into(),
                s.ssme.into(),
                s.psl_db.into(),
                s.isl_db.into(),
                s.mean_power.into(),
            ]);
        }
        t
    }
}

// ------------------------------------------------------------------- doa

pub fn run_doa(cfg: &ExperimentConfig, jobs: usize) -> Result<Table> {
    let study = cfg.doa_study(cfg.sweep.seeds[0]);
    study.validate()?;
    let cells: Vec<(usize, f64)> = study
        .k_values
        .iter()
        .flat_map(|&k| study.snr_db.iter().map(move |&s| (k, s)))
        .collect();
    let results: Vec<_> = pool(jobs).install(|| cells.par_iter().map(|&(k, s)| doa_cell(&study, k, s)).collect());
    let mut t = Table::new(&["k", "snr_db", "delta_u_threshold", "rmse", "crlb"]);
    for r in results {
        let c = r?;
        t.push(vec![
            c.k.into(),
            c.snr_db.into(),
            c.delta_u_threshold.into(),
            c.rmse.into(),
            c.crlb.into(),
        ]);
    }
    Ok(t)
}

// ---------------------------------------------------------------- design

/// Single design at the first seed and first architecture. Solver errors
/// propagate (exit code 3).
pub fn run_design(cfg: &ExperimentConfig) -> Result<(ChannelSet, DesignResult, Vec<(String, Table)>)> {
    let scene = cfg.scene()?;
    let seed = cfg.sweep.seeds[0];
    let spec = cfg.architecture_spec(cfg.architecture.kinds[0])?;
    let ctx = SeedContext::new(cfg, &scene, seed, cfg.channel.snr_db)?;
    let problem = ctx.problem(cfg, &scene);
    let r = solve(&problem, cfg.solver.method.method(), &spec, &cfg.solver.config(seed))?;
    let report = metric_report(&ctx.channel, &r.precoder, &r.combiners, &scene, &cfg.radar_settings())?;
    let tables = design_tables(&r, &report);
    Ok((ctx.channel, r, tables))
}

// ------------------------------------------------------------------- run

pub fn run(experiment: Experiment, cfg: &ExperimentConfig, jobs: usize) -> Result<Artifacts> {
    let mut out = Artifacts::default();
    match experiment {
        Experiment::Pareto => {
            let p = run_pareto(cfg, jobs)?;
            out.table("pareto.csv", &p.rows_table())?;
            out.table("pareto_median.csv", &p.medians_table())?;
            out.text("pareto.gp", plot::pareto(&cfg.architecture.kinds));
        }
        Experiment::SeVsSnr => {
            let s = run_se_vs_snr(cfg, jobs)?;
            out.table("se_vs_snr.csv", &s.medians_table())?;
            out.table("se_vs_snr_seeds.csv", &s.rows_table())?;
            out.text("se_vs_snr.gp", plot::se_vs_snr());
        }
        Experiment::Beampattern => {
            let b = run_beampattern(cfg, jobs)?;
            out.table("beampattern.csv", &b.patterns)?;
            out.table("beampattern_summary.csv", &b.summary_table())?;
            out.text("beampattern.gp", plot::beampattern(cfg.dims.n_subcarriers));
        }
        Experiment::Doa => {
            out.table("doa.csv", &run_doa(cfg, jobs)?)?;
            out.text("doa.gp", plot::doa());
        }
        Experiment::Design => {
            let (channel, _, tables) = run_design(cfg)?;
            out.table("channel.csv", &channel_table(&channel))?;
            for (name, t) in tables {
                out.table(&format!("design/{name}"), &t)?;
            }
        }
    }
    Ok(out)
}
