use std::path::Path;

use dfrc::config::ArchitectureKind;
use dfrc::experiments::{median, run_beampattern, run_doa, run_pareto, run_se_vs_snr, SeedContext};
use dfrc::ExperimentConfig;
use dfrc_core::metrics::{comm_mutual_information, radar_mi, Precoder};
use dfrc_core::scalarize::ScalarizationSpec;
use dfrc_core::solvers::{solve, Method};

fn smoke() -> ExperimentConfig {
    ExperimentConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/smoke.toml")).unwrap()
}

#[test]
fn pareto_endpoints_match_single_objective_solves() {
    let mut cfg = smoke();
    cfg.sweep.weights = vec![0.0, 1.0];
    cfg.sweep.seeds = vec![3];
    let out = run_pareto(&cfg, 1).unwrap();
    assert_eq!(out.rows.len(), 2 * cfg.architecture.kinds.len());
    let scene = cfg.scene().unwrap();
    let ctx = SeedContext::new(&cfg, &scene, 3, cfg.channel.snr_db).unwrap();
    for row in &out.rows {
        assert!(!row.status.starts_with("error"), "{}", row.status);
        let spec = cfg.architecture_spec(row.architecture).unwrap();
        let problem = ctx.problem(&cfg, &scene).with_scalarization(ScalarizationSpec::weighted(row.weight));
        let r = solve(&problem, Method::Admm, &spec, &cfg.solver.config(3)).unwrap();
        let solved = row.solved.unwrap();
        assert_eq!(solved.mi_radar, radar_mi(r.precoder.blocks(), &scene, cfg.radar.noise_variance));
        assert_eq!(solved.mi_comm, comm_mutual_information(&ctx.channel, r.precoder.blocks()).unwrap());
        // pooling never does worse than the design solved at the weight itself
        let (best, _) = row.frontier.unwrap();
        if row.weight == 1.0 {
            assert!(best.radar_obj <= solved.radar_obj);
        } else {
            assert!(best.comm_obj <= solved.comm_obj);
        }
    }
    // the radar endpoint carries more radar MI than the comm endpoint
    for kind in &cfg.architecture.kinds {
        let at = |w: f64| out.medians.iter().find(|m| m.architecture == *kind && m.weight == w).unwrap();
        assert!(at(1.0).mi_radar > at(0.0).mi_radar);
        assert!(at(0.0).mi_comm > at(1.0).mi_comm);
    }
}

#[test]
fn pareto_median_frontier_is_monotone() {
    let mut cfg = smoke();
    cfg.sweep.weights = (0..=5).map(|i| i as f64 / 5.0).collect();
    let out = run_pareto(&cfg, 1).unwrap();
    assert_eq!(out.rows.len(), 3 * 6 * cfg.sweep.seeds.len());
    for kind in [ArchitectureKind::Full, ArchitectureKind::Dynamic, ArchitectureKind::Partial] {
        assert_eq!(out.monotonicity_violations(kind, 1e-6), 0, "{kind:?}");
    }
}

#[test]
fn se_single_point_gives_one_row() {
    let mut cfg = smoke();
    cfg.sweep.snr_db = vec![5.0];
    cfg.sweep.seeds = vec![0];
    let out = run_se_vs_snr(&cfg, 1).unwrap();
    assert_eq!(out.rows.len(), 1);
    assert_eq!(out.medians.len(), 1);
    assert_eq!(out.medians_table().rows.len(), 1);
    assert_eq!(out.rows[0].status, "ok");
}

#[test]
fn se_increases_with_snr_per_method() {
    let mut cfg = smoke();
    cfg.sweep.snr_db = vec![-10.0, 0.0, 10.0, 20.0];
    cfg.sweep.seeds = vec![0, 1, 2];
    let out = run_se_vs_snr(&cfg, 1).unwrap();
    for w in out.medians.windows(2) {
        for col in 1..4 {
            assert!(w[1][col] > w[0][col], "column {col}: {:?} -> {:?}", w[0], w[1]);
        }
    }
}

#[test]
fn beampattern_claims_on_defaults() {
    let mut cfg = ExperimentConfig::default();
    cfg.sweep.seeds = vec![0, 1, 2];
    let out = run_beampattern(&cfg, 1).unwrap();
    let stat = |method: &str, f: fn(&dfrc::experiments::PatternSummary) -> f64| {
        median(out.summary.iter().filter(|s| s.method == method).map(f))
    };
    let fd_fraction = stat("fd", |s| s.mainlobe_fraction);
    assert!(fd_fraction >= 0.7, "fd main-lobe fraction {fd_fraction}");
    assert!(stat("twostage", |s| s.ssme) >= stat("admm", |s| s.ssme));
    for s in &out.summary {
        assert!((s.mean_power - cfg.total_power).abs() <= 1e-3 * cfg.total_power, "{s:?}");
    }
    // one row per (method, seed, u, k)
    let expected = 3 * 3 * cfg.scene.grid_points * cfg.dims.n_subcarriers;
    assert_eq!(out.patterns.rows.len(), expected);
}

#[test]
fn doa_table_has_one_row_per_cell() {
    let cfg = smoke();
    let t = run_doa(&cfg, 1).unwrap();
    assert_eq!(t.header, ["k", "snr_db", "delta_u_threshold", "rmse", "crlb"]);
    assert_eq!(t.rows.len(), cfg.doa.k_values.len() * cfg.doa.snr_db.len());
}
