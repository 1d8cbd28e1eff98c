//! Acceptance criteria of the library, run in one pass. Each criterion prints
//! one `PASS` or `FAIL` line with its measurements and runtime; the test fails
//! if any criterion fails.

use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use logsynth::fitting::log::{fit_log, summary_table, KnotReportRow};
use logsynth::fitting::{fit_knot, KnotFitOptions, LogFitReport};
use logsynth::io::{export_generated, from_json_str, to_json_string, DatasetManifest, ExportSettings};
use logsynth::knotmodel::resolve_knot;
use logsynth::logcentric::{build_heightmap_on, from_knot_frame, LogCentricPoint, LogFrame};
use logsynth::optim::{levenberg_marquardt, LmOptions};
use logsynth::stats::{hadamard_covariance, repair_correlation, sample_mvn, HierarchicalGaussian};
use logsynth::surface::surface_knot::dog_1d;
use logsynth::surface::{compose_heightmap, fit_base_shape, fit_thickness, surface_knot_imprint, SurfaceLayers, ThicknessCluster};
use logsynth::synth::{generate_log, generate_logs, OutputToggles};
use logsynth::{BaseShape, GenerationConfig, GridSpec, KnotFramePoint, KnotParams, LogModel, ModelStatistics, ThicknessModel};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn report(line: &str) {
    // written past the harness capture so the lines show up in every run
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}

fn run(id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Check) -> bool {
    // ACCEPTANCE_ONLY=3,8 runs a subset while iterating
    if let Ok(only) = std::env::var("ACCEPTANCE_ONLY") {
        if !only.split(',').any(|t| t.trim() == id.to_string()) {
            report(&format!("SKIP criterion {id} ({name})"));
            return true;
        }
    }
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    });
    let elapsed = start.elapsed();
    let outcome = match outcome {
        Ok(detail) if elapsed > limit => Err(format!("{detail}; runtime {elapsed:.1?} exceeds {limit:?}")),
        other => other,
    };
    let ok = outcome.is_ok();
    let (tag, detail) = match outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    report(&format!("{tag} criterion {id} ({name}) [{elapsed:.1?}]: {detail}"));
    ok
}

fn random_knot(rng: &mut impl Rng) -> (KnotParams, f64) {
    let p = KnotParams {
        s0: rng.random_range(-50.0..50.0),
        l0: rng.random_range(0.0..4000.0),
        gamma: rng.random_range(0.3..3.0),
        rho_max: rng.random_range(10.0..300.0),
        phi0: rng.random_range(0.02..=1.0),
        phi1: rng.random_range(0.02..=1.0),
        r_max: rng.random_range(1.0..40.0),
        psi0: rng.random_range(0.02..=1.0),
        psi1: rng.random_range(0.02..=1.0),
    };
    let delta = rng.random_range(1.0..150.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
    (p, delta)
}

fn knot_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_origin, mut worst_end, mut worst_radius, mut worst_curv) = (0.0f64, 0.0f64, 0.0f64, f64::NEG_INFINITY);
    for _ in 0..10_000 {
        let (p, d) = random_knot(&mut rng);
        let k = resolve_knot(&p, d).map_err(|e| format!("{p:?}: {e}"))?;
        worst_origin = worst_origin.max(k.axis(0.0).abs());
        worst_end = worst_end.max((k.axis(p.rho_max) - d.abs()).abs() / d.abs());
        worst_radius = worst_radius.max((k.radius(k.c_max) - p.r_max).abs() / p.r_max);
        ensure(k.alpha_l >= 0.0 && k.alpha_r >= 0.0, || format!("negative alpha for {p:?}"))?;
        let n = 100;
        let kl: Vec<f64> = (0..=n).map(|i| k.axis(p.rho_max * i as f64 / n as f64)).collect();
        let kr: Vec<f64> = (0..=n).map(|i| k.radius(k.c_max * i as f64 / n as f64)).collect();
        for v in [&kl, &kr] {
            for w in v.windows(3) {
                worst_curv = worst_curv.max(w[0] - 2.0 * w[1] + w[2]);
            }
        }
    }
    ensure(worst_origin < 1e-12, || format!("|K_l(0)| = {worst_origin:e}"))?;
    ensure(worst_end < 1e-9, || format!("K_l(rho_max) relative error {worst_end:e}"))?;
    ensure(worst_radius < 1e-9, || format!("K_r(c_max) relative error {worst_radius:e}"))?;
    ensure(worst_curv <= 1e-9, || format!("second difference {worst_curv:e} > 1e-9"))?;
    Ok(format!(
        "10^4 draws; max |K_l(0)| {worst_origin:.1e}, K_l(rho_max) rel {worst_end:.1e}, K_r(c_max) rel {worst_radius:.1e}, max second difference {worst_curv:.1e}"
    ))
}

fn dog_zero_crossing() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (alpha, m, r) = (rng.random_range(0.01..0.99), rng.random_range(1.01..20.0), rng.random_range(0.5..100.0));
        worst = worst.max(dog_1d(r, r, alpha, m).map_err(|e| e.to_string())?.abs());
        let k = logsynth::SurfaceKnot {
            theta: 0.0,
            l: 0.0,
            arc_radius: 100.0,
            r_theta: r,
            r_l: r * rng.random_range(0.5..2.0),
            alpha_theta: alpha,
            alpha_l: rng.random_range(0.01..0.99),
            m,
            amplitude: 1.0,
        };
        let centre = surface_knot_imprint(&k, 0.0, 0.0).map_err(|e| e.to_string())?;
        ensure(centre == m - 1.0, || format!("center {centre} != m - 1 = {}", m - 1.0))?;
        worst = worst.max(surface_knot_imprint(&k, k.r_theta, 0.0).unwrap().abs());
        worst = worst.max(surface_knot_imprint(&k, 0.0, k.r_l).unwrap().abs());
    }
    ensure(worst < 1e-12, || format!("|K(r)| = {worst:e}"))?;
    Ok(format!("10^3 draws; max |K(r)| {worst:.1e}; center = m - 1 exactly"))
}

fn knot_round_trip() -> Check {
    let opts = KnotFitOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sample_truth = |rng: &mut ChaCha8Rng| {
        let p = KnotParams {
            s0: 0.0,
            l0: 1500.0,
            gamma: rng.random_range(0.9..1.5),
            rho_max: rng.random_range(100.0..160.0),
            phi0: rng.random_range(0.4..0.8),
            phi1: rng.random_range(0.3..0.7),
            r_max: rng.random_range(9.0..18.0),
            psi0: rng.random_range(0.5..0.9),
            psi1: rng.random_range(0.4..0.8),
        };
        (p, rng.random_range(30.0..80.0))
    };
    let mut worst_clean = 0.0f64;
    let mut worst_rel = 0.0f64;
    for _ in 0..10 {
        let (p, d) = sample_truth(&mut rng);
        let pts = resolve_knot(&p, d).unwrap().body_points(1.0, 40, 24).unwrap();
        let fit = fit_knot(&pts, None, &opts).map_err(|e| e.to_string())?;
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        worst_clean = worst_clean.max(fit.rmse);
        worst_rel = worst_rel.max(rel(fit.delta_l, d)).max(rel(fit.params.rho_max, p.rho_max)).max(rel(fit.params.r_max, p.r_max));
    }
    ensure(worst_clean < 0.1, || format!("noiseless rmse {worst_clean}"))?;
    ensure(worst_rel < 0.02, || format!("noiseless parameter error {:.2}%", 100.0 * worst_rel))?;

    let noise = Normal::new(0.0, 2.0).unwrap();
    let mut rmses = Vec::new();
    let mut rows = Vec::new();
    for _ in 0..50 {
        let (p, d) = sample_truth(&mut rng);
        let k = resolve_knot(&p, d).unwrap();
        // isotropic noise in the knot frame (arc length, l, rho)
        let pts: Vec<LogCentricPoint> = k
            .body_frame_points(40, 24)
            .unwrap()
            .into_iter()
            .map(|q| {
                let q = KnotFramePoint {
                    s: q.s + noise.sample(&mut rng),
                    l: q.l + noise.sample(&mut rng),
                    rho: (q.rho + noise.sample(&mut rng)).abs(),
                };
                from_knot_frame(&q, 1.0)
            })
            .collect();
        let fit = fit_knot(&pts, None, &opts).map_err(|e| e.to_string())?;
        rows.push(KnotReportRow { id: rows.len() as u32 + 1, cluster: 0, points: fit.point_count, rmse: fit.rmse, converged: fit.converged });
        rmses.push(fit.rmse);
    }
    let n = rows.len() as f64;
    let mean = rmses.iter().sum::<f64>() / n;
    let sd = (rmses.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let table = LogFitReport {
        log_id: "noise2".into(),
        knot_count: rows.len(),
        knots: rows,
        skipped: Vec::new(),
        rmse_mean: mean,
        rmse_sd: sd,
        surface_rmse: 0.0,
        thickness_rmse: None,
        stage_failures: Vec::new(),
    };
    report(&summary_table(&[table]));
    let (lo, hi) = rmses.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    ensure(lo >= 1.6 && hi <= 2.4, || format!("noisy rmse range [{lo:.3}, {hi:.3}] outside [1.6, 2.4]"))?;
    Ok(format!(
        "noiseless: max rmse {worst_clean:.4} mm, max (delta_l, rho_max, r_max) error {:.3}%; sigma = 2 mm: rmse in [{lo:.3}, {hi:.3}] mm, mean {mean:.3} over 50 trials",
        100.0 * worst_rel
    ))
}

fn surface_decomposition() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let grid = GridSpec::new(128, 200, 0.0, 3000.0).unwrap();
    let mut truth = BaseShape::zeros(10, 10, grid.l_min, grid.l_max).unwrap();
    for j in 0..10 {
        for k in 0..10 {
            let im = if k == 0 { 0.0 } else { rng.random_range(-1.0..1.0) };
            let re = if (j, k) == (0, 0) { 150.0 } else { rng.random_range(-1.0..1.0) };
            truth.set_coeff(j, k, Complex64::new(re, im));
        }
    }
    let h = compose_heightmap(&grid, &SurfaceLayers { base: Some(&truth), ..Default::default() }).map_err(|e| e.to_string())?;
    let fit = fit_base_shape(&h, 10, 10).map_err(|e| e.to_string())?;
    let worst = truth.coeffs.iter().zip(&fit.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    ensure(fit.coefficient_count() == 100, || format!("{} coefficients", fit.coefficient_count()))?;
    ensure(worst < 1e-6, || format!("coefficient error {worst:e}"))?;
    // On a 2^-46 lattice, theta + k * 2pi is exact for power-of-two k, so the
    // shifted argument lies exactly one or more periods away.
    let tau = std::f64::consts::TAU;
    let lattice = (-46f64).exp2();
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let t = (rng.random_range(0.0..tau) / lattice).floor() * lattice;
        let l = rng.random_range(0.0..3000.0);
        let v = fit.eval(t, l);
        for k in [-2.0, -1.0, 1.0, 2.0, 4.0] {
            let shifted = t + k * tau;
            assert_eq!(shifted - k * tau, t, "lattice angle not exact");
            if fit.eval(shifted, l).to_bits() != v.to_bits() {
                mismatches += 1;
            }
        }
    }
    ensure(mismatches == 0, || format!("{mismatches} of 50000 shifted evaluations differ in the last bit"))?;
    ensure(fit.eval(0.0, 1500.0).to_bits() == fit.eval(tau, 1500.0).to_bits(), || "eval(0) != eval(2pi)".into())?;
    Ok(format!("100 coefficients recovered, max error {worst:.1e}; eval bit-identical under 5 x 10^4 shifts by whole periods"))
}

fn thickness_fit() -> Check {
    let grid = GridSpec::new(64, 750, 0.0, 3000.0).unwrap();
    let truth = ThicknessModel {
        a: -0.004,
        b: 130.0,
        clusters: vec![
            ThicknessCluster { center: 700.0, alpha: 2.0, beta: 12.0, gamma: 35.0 },
            ThicknessCluster { center: 1200.0, alpha: 1.4, beta: -8.0, gamma: 28.0 },
            ThicknessCluster { center: 1650.0, alpha: 2.6, beta: 5.0, gamma: 45.0 },
            ThicknessCluster { center: 2300.0, alpha: 1.1, beta: -15.0, gamma: 30.0 },
        ],
        rmse: None,
    };
    let h = compose_heightmap(&grid, &SurfaceLayers { thickness: Some(&truth), ..Default::default() }).map_err(|e| e.to_string())?;
    let centers: Vec<f64> = truth.clusters.iter().map(|c| c.center).collect();
    let fit = fit_thickness(&h, &centers).map_err(|e| e.to_string())?;
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let mut worst = rel(fit.a, truth.a).max(rel(fit.b, truth.b));
    for (f, t) in fit.clusters.iter().zip(&truth.clusters) {
        worst = worst.max(rel(f.alpha, t.alpha)).max(rel(f.beta, t.beta)).max(rel(f.gamma, t.gamma));
    }
    ensure(fit.clusters.len() == truth.clusters.len(), || "cluster count differs".into())?;
    ensure(worst < 1e-3, || format!("worst relative parameter error {worst:e}"))?;
    // structure: a line plus one local bump per cluster
    let bump = |l: f64| fit.eval(l) - (fit.a * l + fit.b);
    let peaks = (1..2999).filter(|&i| {
        let l = i as f64;
        bump(l) > bump(l - 1.0) && bump(l) >= bump(l + 1.0) && bump(l) > 0.1
    });
    let peaks: Vec<usize> = peaks.collect();
    ensure(peaks.len() == 4, || format!("profile has {} bumps: {peaks:?}", peaks.len()))?;
    Ok(format!("noiseless fit, worst relative error {worst:.1e}; profile = line + bumps at l = {peaks:?} mm"))
}

fn sampling_law() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let sigma = [0.5, 2.0, 1.0, 3.0];
    let raw = DMatrix::from_row_slice(4, 4, &[1.0, 0.6, -0.3, 0.2, 0.6, 1.0, 0.1, -0.4, -0.3, 0.1, 1.0, 0.5, 0.2, -0.4, 0.5, 1.0]);
    let p = repair_correlation(&raw);
    let target = hadamard_covariance(&sigma, &p);
    let mu = [1.0, -2.0, 0.0, 5.0];
    let n = 100_000;
    let draws: Vec<Vec<f64>> = (0..n).map(|_| sample_mvn(&mu, &sigma, &p, &mut rng)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let mean: Vec<f64> = (0..4).map(|k| draws.iter().map(|d| d[k]).sum::<f64>() / n as f64).collect();
    let emp = DMatrix::from_fn(4, 4, |i, j| draws.iter().map(|d| (d[i] - mean[i]) * (d[j] - mean[j])).sum::<f64>() / (n - 1) as f64);
    let frob = (emp - &target).norm() / target.norm();
    ensure(frob < 0.05, || format!("Frobenius-relative covariance error {frob:.4}"))?;

    // hierarchy: spread of cluster means exceeds the mean within-cluster spread
    let names = ["a", "b", "c"];
    let mut h = HierarchicalGaussian::point_mass(&names, &[0.0, 10.0, -3.0]);
    h.global_mu_sd = vec![2.0, 1.5, 3.0];
    h.global_sigma_mean = vec![1.0, 0.8, 1.5];
    h.global_sigma_sd = vec![0.2, 0.1, 0.3];
    let (clusters, per) = (1000usize, 5usize);
    let groups: Vec<Vec<Vec<f64>>> = (0..clusters)
        .map(|_| {
            let log_mean = h.sample_log_mean(&mut rng);
            let c = h.sample_cluster(&log_mean, &mut rng);
            h.sample_knots(&c, per, &mut rng)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let (df1, df2) = ((clusters - 1) as f64, (clusters * (per - 1)) as f64);
    let f_crit = FisherSnedecor::new(df1, df2).map_err(|e| e.to_string())?.inverse_cdf(0.99);
    let mut fs = Vec::new();
    for k in 0..names.len() {
        let grand = groups.iter().flatten().map(|x| x[k]).sum::<f64>() / (clusters * per) as f64;
        let (mut between, mut within) = (0.0, 0.0);
        for g in &groups {
            let m = g.iter().map(|x| x[k]).sum::<f64>() / per as f64;
            between += per as f64 * (m - grand).powi(2);
            within += g.iter().map(|x| (x[k] - m).powi(2)).sum::<f64>();
        }
        let f = (between / df1) / (within / df2);
        ensure(f > 1.0 && f > f_crit, || format!("dimension {k}: F = {f:.2}, critical {f_crit:.3}"))?;
        fs.push(f);
    }
    Ok(format!(
        "10^5 draws, covariance error {:.2}% Frobenius; 10^3 clusters: ANOVA F = {:.1?} > F_0.99 = {f_crit:.3}",
        100.0 * frob,
        fs
    ))
}

fn lm_engine() -> Check {
    let rosen = |x: &[f64]| vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]];
    let opts = LmOptions { max_iterations: 1000, relative_cost_tolerance: 1e-30, step_tolerance: 1e-16, ..Default::default() };
    let (x, rep) = levenberg_marquardt(rosen, &[-1.2, 1.0], &opts).map_err(|e| e.to_string())?;
    let err = (x[0] - 1.0).abs().max((x[1] - 1.0).abs());
    ensure(err < 1e-8, || format!("Rosenbrock ended at {x:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let mut accepted = 0;
    for _ in 0..100 {
        let (a, b, c) = (rng.random_range(0.5..5.0), rng.random_range(0.1..2.0), rng.random_range(-1.0..1.0));
        let ts: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = ts.iter().map(|t| a * (-b * t).exp() + c + noise.sample(&mut rng)).collect();
        let f = |p: &[f64]| ts.iter().zip(&ys).map(|(t, y)| p[0] * (-p[1] * t).exp() + p[2] - y).collect::<Vec<_>>();
        let start = [rng.random_range(0.1..8.0), rng.random_range(0.01..4.0), rng.random_range(-3.0..3.0)];
        let (_, rep) = levenberg_marquardt(f, &start, &LmOptions::default()).map_err(|e| e.to_string())?;
        ensure(rep.cost_trace.windows(2).all(|w| w[1] <= w[0]), || format!("cost trace increases: {:?}", rep.cost_trace))?;
        accepted += rep.cost_trace.len() - 1;
    }
    Ok(format!(
        "Rosenbrock -> (1, 1) within {err:.1e} in {} iterations; 100 random problems, {accepted} accepted steps, all cost traces monotone",
        rep.iterations
    ))
}

const E2E_LOGS: u64 = 20;
const E2E_DENSITY: f64 = 0.2;
const KNOT_COLUMNS: [&str; 10] = ["s0", "l0", "gamma", "rho_max", "phi0", "phi1", "r_max", "psi0", "psi1", "delta_l"];

fn knot_row(k: &logsynth::KnotRecord) -> Vec<f64> {
    let mut v = k.params.to_array().to_vec();
    v.push(k.delta_l);
    v
}

fn end_to_end() -> Check {
    let stats = ModelStatistics::reference();
    let cfg = GenerationConfig { seed: 7, log_length: Some(2000.0), ..Default::default() };
    struct LogOutcome {
        gen: Vec<Vec<f64>>,
        fit: Vec<Vec<f64>>,
        counts: (usize, usize),
        surface_rmse: f64,
        bound: f64,
        report: LogFitReport,
    }
    let outcomes: Vec<LogOutcome> = (0..E2E_LOGS)
        .into_par_iter()
        .map(|i| {
            let g = generate_log(&stats, &cfg, i).map_err(|e| format!("generate {i}: {e}"))?;
            let data = g.annotated(&format!("g{i}"), E2E_DENSITY, 100 + i).map_err(|e| e.to_string())?;
            let (m, report) = fit_log(&data, &Default::default()).map_err(|e| format!("fit {i}: {e}"))?;
            // binning error of this sampling density on the generator's own frame and grid
            let frame = LogFrame::new(&g.model.centerline).map_err(|e| e.to_string())?;
            let pts: Vec<LogCentricPoint> = data.surface_points.iter().filter_map(|p| frame.to_log_centric(p).ok()).collect();
            let binned = build_heightmap_on(&pts, g.model.grid).map_err(|e| e.to_string())?;
            let diffs: Vec<f64> = binned.values.iter().zip(&g.heightmap.values).zip(&binned.observed).filter(|(_, o)| **o).map(|((a, b), _)| a - b).collect();
            let binning = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();
            let mut gen = Vec::new();
            let mut fit = Vec::new();
            for k in &g.model.knots {
                if let Some(f) = m.knots.iter().find(|f| f.id == k.id) {
                    gen.push(knot_row(k));
                    fit.push(knot_row(f));
                }
            }
            Ok(LogOutcome {
                gen,
                fit,
                counts: (g.model.knots.len(), m.knots.len()),
                surface_rmse: report.surface_rmse,
                bound: g.model.grain.amplitude + binning,
                report,
            })
        })
        .collect::<Result<_, String>>()?;

    for (i, o) in outcomes.iter().enumerate() {
        ensure(o.counts.0 == o.counts.1, || format!("log {i}: {} knots generated, {} refitted", o.counts.0, o.counts.1))?;
        ensure(o.surface_rmse < o.bound, || format!("log {i}: surface rmse {:.3} >= bound {:.3}", o.surface_rmse, o.bound))?;
    }
    let gen: Vec<&Vec<f64>> = outcomes.iter().flat_map(|o| &o.gen).collect();
    let fit: Vec<&Vec<f64>> = outcomes.iter().flat_map(|o| &o.fit).collect();
    let n = gen.len() as f64;
    let mut worst = (0.0f64, "");
    for (k, name) in KNOT_COLUMNS.iter().enumerate() {
        let mg = gen.iter().map(|r| r[k]).sum::<f64>() / n;
        let mf = fit.iter().map(|r| r[k]).sum::<f64>() / n;
        let sd = (gen.iter().map(|r| (r[k] - mg).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let z = (mf - mg) / (sd / n.sqrt());
        ensure(z.abs() < 3.0, || format!("{name}: refit mean {mf:.4} vs generator {mg:.4}, {z:.2} standard errors"))?;
        if z.abs() > worst.0 {
            worst = (z.abs(), name);
        }
    }
    let reports: Vec<LogFitReport> = outcomes.iter().map(|o| o.report.clone()).collect();
    report(&summary_table(&reports));
    let max_ratio = outcomes.iter().map(|o| o.surface_rmse / o.bound).fold(0.0, f64::max);
    Ok(format!(
        "{E2E_LOGS} logs, {} knots, counts exact; largest mean shift {:.2} SE ({}); surface rmse at most {:.0}% of grain + binning bound",
        gen.len(),
        worst.0,
        worst.1,
        100.0 * max_ratio
    ))
}

fn files_in(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn mini_dataset() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/mini/manifest.json")
}

fn determinism_and_pipeline() -> Check {
    // two identical generation runs
    let stats = ModelStatistics::reference();
    let cfg = GenerationConfig { seed: 7, log_length: Some(1000.0), ..Default::default() };
    let toggles = OutputToggles { heightmap: true, point_cloud: true, mesh: true, knot_labels: true };
    let settings = ExportSettings::default();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        for (i, log) in generate_logs(&stats, &cfg, 2).map_err(|e| e.to_string())?.iter().enumerate() {
            export_generated(&dir, &format!("log{i}"), log, &toggles, cfg.point_density, cfg.seed, &settings).map_err(|e| e.to_string())?;
        }
    }
    let (a, b) = (files_in(&tmp.path().join("a")), files_in(&tmp.path().join("b")));
    ensure(a.len() == b.len() && a.len() > 10, || format!("{} vs {} artifacts", a.len(), b.len()))?;
    for (x, y) in a.iter().zip(&b) {
        ensure(x.file_name() == y.file_name(), || format!("{x:?} vs {y:?}"))?;
        ensure(std::fs::read(x).unwrap() == std::fs::read(y).unwrap(), || format!("{:?} differs between runs", x.file_name().unwrap()))?;
    }

    // fit -> stats -> generate -> validate on the bundled dataset
    let manifest = DatasetManifest::load(mini_dataset()).map_err(|e| e.to_string())?;
    let mut models = Vec::new();
    for entry in &manifest.logs {
        let (data, _) = manifest.load_log(entry).map_err(|e| e.to_string())?;
        let (model, _) = fit_log(&data, &Default::default()).map_err(|e| format!("fit {}: {e}", entry.id))?;
        model.validate().map_err(|e| e.to_string())?;
        let back: LogModel = from_json_str(&to_json_string(&model).unwrap()).map_err(|e| e.to_string())?;
        ensure(back == model, || format!("{} changes through JSON", entry.id))?;
        models.push(model);
    }
    let fitted = ModelStatistics::fit(&models).map_err(|e| e.to_string())?;
    fitted.validate().map_err(|e| e.to_string())?;
    let gen_cfg = GenerationConfig { seed: 7, log_length: Some(900.0), ..Default::default() };
    let logs = generate_logs(&fitted, &gen_cfg, 2).map_err(|e| e.to_string())?;
    for log in &logs {
        log.model.validate().map_err(|e| e.to_string())?;
        log.heightmap.check_physical().map_err(|e| e.to_string())?;
    }
    Ok(format!(
        "{} artifacts byte-identical across two seed-7 runs; golden pipeline on {} bundled logs -> statistics -> {} generated logs validated",
        a.len(),
        models.len(),
        logs.len()
    ))
}

#[test]
fn acceptance_criteria() {
    let s = Duration::from_secs;
    let results = [
        run(1, "knot-model identities", s(10), knot_identities),
        run(2, "DoG zero crossing", s(1), dog_zero_crossing),
        run(3, "knot fit round trip", s(120), knot_round_trip),
        run(4, "surface decomposition", s(10), surface_decomposition),
        run(5, "thickness fit", s(5), thickness_fit),
        run(6, "sampling law", s(30), sampling_law),
        run(7, "LM engine", s(10), lm_engine),
        run(8, "end-to-end self-consistency", s(600), end_to_end),
        run(9, "determinism and golden pipeline", s(300), determinism_and_pipeline),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
