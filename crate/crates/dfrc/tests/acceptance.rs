//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs single-threaded; AC-3 reuses the AC-1 sweep.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use dfrc::config::ArchitectureKind;
use dfrc::experiments::{median, run_pareto, run_se_vs_snr, ParetoOutput};
use dfrc::ExperimentConfig;
use dfrc_core::architecture::{random_feasible, ArchitectureSpec};
use dfrc_core::channel::{gen_channel, make_grid, ClusterParams, SystemDims};
use dfrc_core::linalg::{fro2, CMat, CVec, C64};
use dfrc_core::metrics::{
    detection_probability, mean_power, multiuser_mmse, spectral_efficiency, HybridCombiner, HybridPrecoder, Precoder,
    RadarScene, Target,
};
use dfrc_core::rng::{complex_gaussian, substream};
use dfrc_core::scalarize::{CommMetric, ObjectiveSpec, RadarMetric, ScalarizationSpec};
use dfrc_core::solvers::{
    design_combiners, design_fully_digital, factorize_two_stage, hybrid_from_fully_digital, solve, wiener_combiners,
    DesignProblem, Method, ObjectiveEvaluator, SolverConfig,
};
use dfrc_core::virtualarray::{build_virtual_data, resolution_threshold, DoaStudyConfig, VirtualArrayModel};

/// Verdict and a one-line measurement summary.
type Check = Result<(bool, String), String>;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn load(name: &str) -> Result<ExperimentConfig, String> {
    ExperimentConfig::load(&configs().join(name)).map_err(|e| e.to_string())
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMat {
    let mut rng = substream(seed, 99);
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(&mut rng, 1.0))
}

fn random_hybrid(spec: ArchitectureSpec, n_s: usize, k: usize, power: f64, seed: u64) -> HybridPrecoder {
    let digital = (0..k).map(|i| random_matrix(spec.n_rf, n_s, seed * 31 + i as u64)).collect();
    HybridPrecoder::normalized(random_feasible(&spec, seed), digital, power).unwrap()
}

// ------------------------------------------------------------------ AC-1

fn ac1(cfg: &ExperimentConfig, out: &ParetoOutput, seconds: f64) -> Check {
    let d = &cfg.dims;
    if (d.n_tx_antennas, d.n_tx_rf, d.n_streams, d.n_subcarriers) != (32, 4, 4, 8)
        || cfg.scene.targets.len() != 2
        || cfg.sweep.weights.len() != 11
        || cfg.sweep.seeds.len() != 20
    {
        return Err("configs/pareto.toml does not pin the criterion instance".into());
    }
    let failed = out.rows.iter().filter(|r| r.status.starts_with("error")).count();
    let mut parts = Vec::new();
    let mut ok = seconds <= 900.0;
    for &kind in &cfg.architecture.kinds {
        let v = out.monotonicity_violations(kind, 1e-6);
        ok &= v == 0;
        parts.push(format!("{kind:?}={v}"));
    }
    Ok((
        ok,
        format!("violations {} | {failed} failed rows | {seconds:.0} s single-threaded (target 900 s)", parts.join(" ")),
    ))
}

// ------------------------------------------------------------------ AC-2

fn ac2() -> Check {
    let cfg = load("se_vs_snr.toml")?;
    let d = &cfg.dims;
    if (d.n_users, d.n_tx_antennas, d.n_tx_rf) != (4, 32, 4) || cfg.sweep.seeds.len() != 20 {
        return Err("configs/se_vs_snr.toml does not pin the criterion instance".into());
    }
    let out = run_se_vs_snr(&cfg, 1).map_err(|e| e.to_string())?;
    let mut ok = out.rows.iter().all(|r| r.status == "ok");
    let mut cells = Vec::new();
    for &[snr, fd, admm, two] in &out.medians {
        ok &= fd >= admm && admm >= two && admm - two > 0.0;
        cells.push(format!("{snr} dB {fd:.2}/{admm:.2}/{two:.2}"));
    }
    Ok((ok, format!("median se fd/admm/twostage: {}", cells.join(", "))))
}

// ------------------------------------------------------------------ AC-3

fn ac3(out: &ParetoOutput) -> Check {
    let at = |kind: ArchitectureKind| {
        median(
            out.rows
                .iter()
                .filter(|r| r.architecture == kind && r.weight == 0.5)
                .map(|r| r.solved.map_or(f64::NAN, |p| p.scalarized)),
        )
    };
    let (full, dynamic, partial) = (at(ArchitectureKind::Full), at(ArchitectureKind::Dynamic), at(ArchitectureKind::Partial));
    Ok((
        full <= dynamic && dynamic <= partial,
        format!("median weighted objective at w=0.5: full {full:.4} <= dynamic {dynamic:.4} <= partial {partial:.4}"),
    ))
}

// ------------------------------------------------------------------ AC-4

fn ac4() -> Check {
    // one carrier, so N_RF = 2 N_s spans any fully digital precoder, and
    // N_RF^r = N_r makes the hybrid receivers fully digital MMSE
    let dims = SystemDims {
        n_tx_antennas: 32,
        n_rx_antennas: 4,
        n_tx_rf: 8,
        n_rx_rf: 4,
        n_streams: 4,
        n_users: 4,
        n_subcarriers: 1,
        n_radar_rx_rf: 8,
    };
    let scene = RadarScene::new(
        vec![Target { u: -0.563, gain: c(1.0) }, Target { u: 0.375, gain: c(1.0) }],
        vec![(-0.7891, -0.337), (0.0939, 0.657)],
        make_grid(181).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let spec = ArchitectureSpec::full(32, 8).map_err(|e| e.to_string())?;
    let (mut worst_residual, mut worst_gap) = (0.0f64, 0.0f64);
    for seed in 0..5 {
        let ch = gen_channel(&dims, &ClusterParams::default(), seed).map_err(|e| e.to_string())?.with_snr_db(10.0, 1.0);
        let problem = DesignProblem {
            channel: &ch,
            scene: &scene,
            dims,
            total_power: 1.0,
            radar_noise_variance: 0.1,
            objective: ObjectiveSpec::raw(RadarMetric::Ssme, CommMetric::NegSe),
            scalarization: ScalarizationSpec::weighted(0.0),
        };
        let cfg = SolverConfig { seed, ..SolverConfig::default() };
        let fd = design_fully_digital(&problem, &cfg).map_err(|e| e.to_string())?;
        let fac = factorize_two_stage(&fd.blocks, &spec, 1.0, &cfg).map_err(|e| e.to_string())?;
        let scale = fd.blocks.iter().map(fro2).sum::<f64>();
        worst_residual = worst_residual.max(fac.residual_trace[0] / scale);
        let fd_hybrid = hybrid_from_fully_digital(&fd.blocks).map_err(|e| e.to_string())?;
        let fd_comb = design_combiners(&ch, &fd_hybrid, dims.n_rx_rf).map_err(|e| e.to_string())?;
        let se_fd = spectral_efficiency(&ch, &fd_hybrid, &fd_comb).map_err(|e| e.to_string())?.bits;
        let r = solve(&problem, Method::Admm, &spec, &cfg).map_err(|e| e.to_string())?;
        let se_admm = spectral_efficiency(&ch, &r.precoder, &r.combiners).map_err(|e| e.to_string())?.bits;
        worst_gap = worst_gap.max((se_fd - se_admm).abs() / se_fd);
    }
    Ok((
        worst_residual <= 1e-6 && worst_gap <= 0.02,
        format!("5 seeds: worst relative residual {worst_residual:.1e} (<= 1e-6), worst SE gap {:.2}% (<= 2%)", 100.0 * worst_gap),
    ))
}

// ------------------------------------------------------------------ AC-5

fn ac5() -> Check {
    let grid = make_grid(2001).map_err(|e| e.to_string())?;
    let specs = [
        ArchitectureSpec::full(32, 4).map_err(|e| e.to_string())?,
        ArchitectureSpec::partial(32, 4).map_err(|e| e.to_string())?,
        ArchitectureSpec::dynamic(32, 4, 64).map_err(|e| e.to_string())?,
    ];
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let spec = specs[(seed % 3) as usize];
        let power = 0.5 + seed as f64 / 20.0;
        let p = random_hybrid(spec, 4, 8, power, seed);
        worst = worst.max((mean_power(&p, &grid) - power).abs() / power);
    }
    Ok((worst <= 1e-3, format!("100 precoders, 2001-point grid: worst relative error {worst:.2e} (<= 1e-3)")))
}

// ------------------------------------------------------------------ AC-6

fn ac6() -> Check {
    let dims = SystemDims {
        n_tx_antennas: 2,
        n_rx_antennas: 2,
        n_tx_rf: 1,
        n_rx_rf: 1,
        n_streams: 1,
        n_users: 1,
        n_subcarriers: 1,
        n_radar_rx_rf: 2,
    };
    let scene = RadarScene::new(vec![Target { u: 0.3, gain: c(1.0) }], vec![(0.1, 0.5)], make_grid(91).unwrap())
        .map_err(|e| e.to_string())?;
    let spec = ArchitectureSpec::full(2, 1).map_err(|e| e.to_string())?;
    // every feasible design is sqrt(P/2) [e^{j a}, e^{j b}]
    let n = 256;
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let phase = |i: usize| 2.0 * std::f64::consts::PI * i as f64 / n as f64;
    let mut worst = f64::NEG_INFINITY;
    for (radar, comm) in [(RadarMetric::Ssme, CommMetric::Mmse), (RadarMetric::NegRadarMi, CommMetric::NegSe)] {
        for seed in 0..10 {
            let ch = gen_channel(&dims, &ClusterParams::default(), seed).map_err(|e| e.to_string())?.with_snr_db(0.0, 1.0);
            let problem = DesignProblem {
                channel: &ch,
                scene: &scene,
                dims,
                total_power: 1.0,
                radar_noise_variance: 0.1,
                objective: ObjectiveSpec::raw(radar, comm),
                scalarization: ScalarizationSpec::weighted(0.5),
            };
            let ev = ObjectiveEvaluator::new(&problem).map_err(|e| e.to_string())?;
            let r = solve(&problem, Method::Admm, &spec, &SolverConfig { seed, ..SolverConfig::default() })
                .map_err(|e| e.to_string())?;
            let got = ev.values(r.precoder.blocks(), 0.0).scalarized;
            let mut best = f64::INFINITY;
            for a in 0..n {
                for b in 0..n {
                    let f = CMat::from_column_slice(2, 1, &[C64::from_polar(amp, phase(a)), C64::from_polar(amp, phase(b))]);
                    best = best.min(ev.values(&[f], 0.0).scalarized);
                }
            }
            worst = worst.max((got - best) / best.abs());
        }
    }
    Ok((worst <= 0.05, format!("20 instances vs 2^16-point grid: worst relative excess {:.3}% (<= 5%)", 100.0 * worst)))
}

// ------------------------------------------------------------------ AC-7

fn mmse_gap() -> f64 {
    let dims = SystemDims {
        n_tx_antennas: 6,
        n_rx_antennas: 2,
        n_tx_rf: 2,
        n_rx_rf: 2,
        n_streams: 2,
        n_users: 2,
        n_subcarriers: 2,
        n_radar_rx_rf: 4,
    };
    let ch = gen_channel(&dims, &ClusterParams::default(), 9).unwrap().with_noise_variance(0.4);
    let p = random_hybrid(ArchitectureSpec::full(6, 2).unwrap(), 2, 2, 2.0, 3);
    let comb = HybridCombiner::fully_digital(wiener_combiners(&ch, &p));
    let closed = multiuser_mmse(&ch, &p, &comb).unwrap();
    let mut rng = substream(77, 5);
    let trials = 100_000;
    let mut acc = 0.0;
    for _ in 0..trials {
        for (k, f) in p.blocks().iter().enumerate() {
            let s = CVec::from_fn(2, |_, _| complex_gaussian(&mut rng, 1.0));
            let tx = f * &s;
            for u in 0..2 {
                let noise = CVec::from_fn(2, |_, _| complex_gaussian(&mut rng, 0.4));
                let est = comb.combined(k, u).ad_mul(&(ch.get(k, u) * &tx + noise));
                acc += (est[0] - s[u]).norm_sqr();
            }
        }
    }
    (acc / trials as f64 - closed).abs() / closed
}

fn pd_gap() -> f64 {
    let mut worst = 0.0f64;
    for (i, (sinr, pfa)) in [(10.0, 1e-3), (3.0, 1e-2), (20.0, 1e-6)].into_iter().enumerate() {
        let threshold = -(pfa as f64).ln();
        let mut rng = substream(2024, i as u64);
        let trials = 1_000_000;
        let amp = f64::sqrt(sinr);
        let hits = (0..trials)
            .filter(|_| (c(amp) + complex_gaussian(&mut rng, 1.0)).norm_sqr() > threshold)
            .count();
        let pd = detection_probability(sinr, pfa).unwrap();
        worst = worst.max((hits as f64 / trials as f64 - pd).abs());
    }
    worst
}

fn fisher_gap() -> f64 {
    let p = random_hybrid(ArchitectureSpec::full(8, 2).unwrap(), 2, 4, 1.0, 12);
    let targets = [Target { u: -0.3, gain: C64::new(0.8, 0.4) }, Target { u: 0.45, gain: C64::new(-0.5, 0.6) }];
    let sigma2 = 0.1;
    let model = VirtualArrayModel::noise_free(&p, 4, sigma2);
    let fim = model.fisher_information(&targets, sigma2);
    let h = 1e-5;
    let mean_at = |i: usize, step: f64| {
        let mut t = targets;
        match i % 3 {
            0 => t[i / 3].u += step,
            1 => t[i / 3].gain.re += step,
            _ => t[i / 3].gain.im += step,
        }
        model.mean(&t)
    };
    let jac: Vec<CVec> = (0..6).map(|i| (mean_at(i, h) - mean_at(i, -h)) / c(2.0 * h)).collect();
    let mut worst = 0.0f64;
    for i in 0..6 {
        for j in 0..6 {
            let fd = 2.0 / sigma2 * jac[i].dotc(&jac[j]).re;
            let scale = (fim[(i, i)] * fim[(j, j)]).sqrt();
            worst = worst.max((fd - fim[(i, j)]).abs() / scale);
        }
    }
    worst
}

fn ac7() -> Check {
    let (mmse, pd, fisher) = (mmse_gap(), pd_gap(), fisher_gap());
    Ok((
        mmse <= 0.01 && pd <= 1e-2 && fisher <= 1e-4,
        format!(
            "mmse vs Monte Carlo {:.3}% (<= 1%), pd vs Monte Carlo {pd:.1e} (<= 1e-2), Fisher vs finite differences {fisher:.1e} (<= 1e-4)",
            100.0 * mmse
        ),
    ))
}

// ------------------------------------------------------------------ AC-8

fn ac8() -> Check {
    let scene = RadarScene::new(vec![Target { u: 0.3, gain: c(1.0) }], Vec::new(), make_grid(2).unwrap())
        .map_err(|e| e.to_string())?;
    let per_element = |k: usize| -> f64 {
        let seeds = 500;
        (0..seeds)
            .map(|seed| {
                let p = random_hybrid(ArchitectureSpec::full(16, 4).unwrap(), 2, k, 1.0, seed);
                let m = build_virtual_data(&p, &scene, 8, 0.0, 1, seed).unwrap();
                fro2(m.snapshots()) / m.dimension() as f64
            })
            .sum::<f64>()
            / seeds as f64
    };
    let ratio = per_element(4) / per_element(8);
    let study = DoaStudyConfig::default();
    let ks = [1, 2, 4, 8];
    let mut monotone = true;
    let mut rows = Vec::new();
    for &snr in &study.snr_db {
        let t: Vec<f64> = ks
            .iter()
            .map(|&k| resolution_threshold(&study, k, snr))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        monotone &= t.windows(2).all(|w| w[1] <= w[0]);
        rows.push(format!("{snr} dB [{}]", t.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")));
    }
    Ok((
        (ratio - 2.0).abs() <= 0.1 && monotone,
        format!(
            "power ratio K=4/K=8 {ratio:.3} (2 within 5%); threshold over K=1,2,4,8 at M_r={}: {}",
            study.n_rx,
            rows.join("; ")
        ),
    ))
}

// ------------------------------------------------------------------ AC-9

fn csv_files(dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            csv_files(&path, out);
        } else if path.extension().is_some_and(|e| e == "csv") {
            out.insert(path.clone(), std::fs::read(&path).unwrap());
        }
    }
}

fn ac9() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = configs().join("smoke.toml");
    let mut compared = 0;
    for experiment in ["pareto", "se-vs-snr", "beampattern", "doa", "design"] {
        let out = tmp.path().join(experiment);
        let mut runs = Vec::new();
        for jobs in ["1", "2"] {
            let status = Command::new(env!("CARGO_BIN_EXE_dfrc"))
                .args([experiment, "--config"])
                .arg(&config)
                .arg("--out")
                .arg(&out)
                .args(["--jobs", jobs])
                .output()
                .map_err(|e| e.to_string())?;
            if !status.status.success() {
                return Ok((false, format!("{experiment} exited with {}", status.status)));
            }
            let mut files = BTreeMap::new();
            csv_files(&out, &mut files);
            runs.push(files);
        }
        if runs[0] != runs[1] {
            return Ok((false, format!("{experiment}: CSV bytes differ between reruns")));
        }
        compared += runs[0].len();
    }
    Ok((true, format!("5 experiments rerun, {compared} CSV files byte-identical")))
}

// ------------------------------------------------------------------ main

fn guarded<T>(f: impl FnOnce() -> Result<T, String>) -> Result<T, String> {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |id: &str, check: Check, seconds: f64| {
        let (pass, detail) = check.unwrap_or_else(|e| (false, format!("error: {e}")));
        failures += usize::from(!pass);
        println!("{id} {}: {detail} [{seconds:.1} s]", if pass { "PASS" } else { "FAIL" });
    };
    let timed = |f: &dyn Fn() -> Check| {
        let t = Instant::now();
        let r = guarded(f);
        (r, t.elapsed().as_secs_f64())
    };

    let t = Instant::now();
    let pareto = guarded(|| {
        let cfg = load("pareto.toml")?;
        let out = run_pareto(&cfg, 1).map_err(|e| e.to_string())?;
        Ok((cfg, out))
    });
    let pareto_seconds = t.elapsed().as_secs_f64();
    match &pareto {
        Ok((cfg, out)) => {
            report("AC-1", guarded(|| ac1(cfg, out, pareto_seconds)), pareto_seconds);
        }
        Err(e) => report("AC-1", Err(e.clone()), pareto_seconds),
    }
    let (r, s) = timed(&ac2);
    report("AC-2", r, s);
    match &pareto {
        Ok((_, out)) => report("AC-3", guarded(|| ac3(out)), 0.0),
        Err(e) => report("AC-3", Err(format!("no AC-1 sweep: {e}")), 0.0),
    }
    for (id, f) in [
        ("AC-4", ac4 as fn() -> Check),
        ("AC-5", ac5),
        ("AC-6", ac6),
        ("AC-7", ac7),
        ("AC-8", ac8),
        ("AC-9", ac9),
    ] {
        let (r, s) = timed(&f);
        report(id, r, s);
    }
    println!("{} of 9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
