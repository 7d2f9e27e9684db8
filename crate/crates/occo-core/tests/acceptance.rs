//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).
//!
//! The timed criteria serialize through a mutex so wall-clock budgets are
//! measured without interference from sibling tests.

use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use rand::Rng;

use occo_core::camera::{project_to_camera, sample_views, unproject};
use occo_core::cloud::{Point3, PointCloud};
use occo_core::dataset::{generate_dataset, CompletionSample, GenParams, SourceObject};
use occo_core::delaunay::delaunay_2d;
use occo_core::losses::{alpha_schedule, chamfer, chamfer_bruteforce, emd_auction, emd_exact};
use occo_core::net::{backward, forward, init_params, ModelDims, ModelParams};
use occo_core::occlusion::{visibility_reference, visibility_zbuffer, DEFAULT_EPS_DEPTH};
use occo_core::probe::{
    activation_mask, ami, count_detected_concepts, dissection_miou, embed_cloud,
    filter_normalized_direction, kmeans, landscape_slice, linear_probe, robustness_probe,
    Clustering, ProbeConfig,
};
use occo_core::seed::{derive_seed, rng_for};
use occo_core::synth::{benchmark_objects, PoseMode};
use occo_core::train::{dataset_loss, evaluate, lr_schedule, pretrain, TrainConfig};

fn heavy_lock() -> std::sync::MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(name: &str, pass: bool, detail: &str) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

fn random_cloud(n: usize, seed: u64) -> PointCloud {
    let mut rng = rng_for(seed, "accept-cloud", &[]);
    PointCloud::new(
        (0..n)
            .map(|_| {
                Point3::new(
                    rng.gen::<f64>() * 2.0 - 1.0,
                    rng.gen::<f64>() * 2.0 - 1.0,
                    rng.gen::<f64>() * 2.0 - 1.0,
                )
            })
            .collect(),
    )
}

// -------------------------------------------------------------------------
// Criterion 1: occlusion oracle equivalence
// -------------------------------------------------------------------------

#[test]
fn c01_occlusion_oracle_equivalence() {
    let _guard = heavy_lock();
    let started = Instant::now();
    let mut mismatches = 0usize;
    for trial in 0..500u64 {
        let mut rng = rng_for(1, "oracle-eq", &[trial]);
        let n = rng.gen_range(4..=300);
        let cloud = random_cloud(n, 10_000 + trial);
        let view = sample_views(1, 20_000 + trial)[0].clone();
        let cps = project_to_camera(&cloud, &view).unwrap();
        let pixels: Vec<(f64, f64)> = cps.iter().map(|c| (c.u, c.v)).collect();
        let tris = delaunay_2d(&pixels);
        let fast = visibility_zbuffer(&cps, &tris, DEFAULT_EPS_DEPTH);
        let slow = visibility_reference(&cps, &tris, DEFAULT_EPS_DEPTH);
        if fast != slow {
            mismatches += 1;
        }
    }
    let elapsed = started.elapsed();
    report(
        "occlusion oracle equivalence",
        mismatches == 0 && elapsed < Duration::from_secs(60),
        &format!("{mismatches} mismatches over 500 clouds in {elapsed:.2?} (< 60 s)"),
    );
}

// -------------------------------------------------------------------------
// Criterion 2: projection round-trip
// -------------------------------------------------------------------------

#[test]
fn c02_projection_round_trip() {
    let _guard = heavy_lock();
    let started = Instant::now();
    let mut max_err = 0.0_f64;
    for trial in 0..1000u64 {
        let mut rng = rng_for(2, "round-trip", &[trial]);
        let n = rng.gen_range(1..=128);
        let cloud = random_cloud(n, 30_000 + trial);
        let view = sample_views(1, 40_000 + trial)[0].clone();
        let back = unproject(&project_to_camera(&cloud, &view).unwrap(), &view).unwrap();
        for (a, b) in cloud.points.iter().zip(&back.points) {
            max_err = max_err
                .max((a.x - b.x).abs())
                .max((a.y - b.y).abs())
                .max((a.z - b.z).abs());
        }
    }
    let elapsed = started.elapsed();
    report(
        "projection round-trip",
        max_err < 1e-9 && elapsed < Duration::from_secs(10),
        &format!("max abs error {max_err:.3e} over 1000 pairs in {elapsed:.2?} (< 10 s)"),
    );
}

// -------------------------------------------------------------------------
// Criterion 3: Delaunay validity (independent brute-force oracle)
// -------------------------------------------------------------------------

/// Test-local naive in-circumcircle determinant with a relative tolerance
/// band, independent of the library's predicates.
fn incircle_naive(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> f64 {
    let (adx, ady) = (a.0 - d.0, a.1 - d.1);
    let (bdx, bdy) = (b.0 - d.0, b.1 - d.1);
    let (cdx, cdy) = (c.0 - d.0, c.1 - d.1);
    let alift = adx * adx + ady * ady;
    let blift = bdx * bdx + bdy * bdy;
    let clift = cdx * cdx + cdy * cdy;
    alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy)
        + clift * (adx * bdy - bdx * ady)
}

fn orient_naive(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (a.0 - c.0) * (b.1 - c.1) - (a.1 - c.1) * (b.0 - c.0)
}

/// Test-local Andrew monotone chain hull vertex count.
fn hull_size_naive(points: &[(f64, f64)]) -> usize {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts.len();
    }
    let chain = |iter: Box<dyn Iterator<Item = (f64, f64)> + '_>| -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for p in iter {
            while out.len() >= 2 && orient_naive(out[out.len() - 2], out[out.len() - 1], p) <= 0.0 {
                out.pop();
            }
            out.push(p);
        }
        out
    };
    let lower = chain(Box::new(pts.iter().copied()));
    let upper = chain(Box::new(pts.iter().rev().copied()));
    lower.len() + upper.len() - 2
}

#[test]
fn c03_delaunay_validity() {
    let _guard = heavy_lock();
    let mut circumcircle_violations = 0usize;
    let mut euler_violations = 0usize;
    for trial in 0..200u64 {
        let mut rng = rng_for(3, "delaunay", &[trial]);
        let n = rng.gen_range(4..=300);
        let pixels: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen::<f64>() * 1600.0, rng.gen::<f64>() * 1200.0))
            .collect();
        let mesh = delaunay_2d(&pixels);
        for face in &mesh.faces {
            let (a, b, c) = (pixels[face[0]], pixels[face[1]], pixels[face[2]]);
            let (a, b, c) = if orient_naive(a, b, c) > 0.0 { (a, b, c) } else { (a, c, b) };
            for (i, &p) in pixels.iter().enumerate() {
                if face.contains(&i) {
                    continue;
                }
                let det = incircle_naive(a, b, c, p);
                // Scale-aware tolerance: the determinant grows like coord^4.
                let scale = 1600.0_f64.powi(4);
                if det > 1e-9 * scale {
                    circumcircle_violations += 1;
                }
            }
        }
        if mesh.faces.len() != 2 * n - 2 - hull_size_naive(&pixels) {
            euler_violations += 1;
        }
    }
    report(
        "delaunay validity",
        circumcircle_violations == 0 && euler_violations == 0,
        &format!(
            "{circumcircle_violations} circumcircle violations, {euler_violations} Euler violations over 200 sets"
        ),
    );
}

// -------------------------------------------------------------------------
// Criterion 4: Chamfer oracle + gradient
// -------------------------------------------------------------------------

fn flatten(p: &ModelParams) -> Vec<f64> {
    let mut out = Vec::new();
    for stack in p.stacks() {
        for d in stack {
            out.extend_from_slice(&d.w.data);
            out.extend_from_slice(&d.b);
        }
    }
    out
}

fn assign(p: &mut ModelParams, flat: &[f64]) {
    let mut k = 0;
    for stack in p.stacks_mut() {
        for d in stack.iter_mut() {
            for v in &mut d.w.data {
                *v = flat[k];
                k += 1;
            }
            for v in &mut d.b {
                *v = flat[k];
                k += 1;
            }
        }
    }
}

#[test]
fn c04_chamfer_oracle_and_gradient() {
    let _guard = heavy_lock();
    // Accelerated vs brute-force CD on 1000 pairs.
    let mut worst_rel = 0.0_f64;
    for trial in 0..1000u64 {
        let mut rng = rng_for(4, "cd", &[trial]);
        let n = rng.gen_range(1..=512);
        let m = rng.gen_range(1..=512);
        let a = random_cloud(n, 50_000 + trial);
        let b = random_cloud(m, 60_000 + trial);
        let fast = chamfer(&a, &b).unwrap().value;
        let slow = chamfer_bruteforce(&a, &b).unwrap().value;
        let rel = (fast - slow).abs() / slow.abs().max(1e-300);
        worst_rel = worst_rel.max(rel);
    }
    let cd_ok = worst_rel <= 1e-12;

    // Full-model analytic gradients vs central finite differences, every
    // parameter tensor, 10 seeds.
    let dims = ModelDims::tiny();
    let h = 1e-6;
    let mut worst_grad = 0.0_f64;
    for seed in 0..10u64 {
        let params = init_params(&dims, 70_000 + seed).unwrap();
        let input = random_cloud(32, 80_000 + seed);
        let coarse_gt = random_cloud(dims.n_coarse, 90_000 + seed);
        let fine_gt = random_cloud(dims.fine_size(), 95_000 + seed);
        let (_, _, cache) = forward(&input, &params).unwrap();
        let (_, grads) = backward(&coarse_gt, &fine_gt, &params, &cache, 0).unwrap();
        let analytic = flatten(&grads);
        let theta = flatten(&params);
        for k in 0..theta.len() {
            let eval = |delta: f64| -> f64 {
                let mut t = theta.clone();
                t[k] += delta;
                let mut p = params.clone();
                assign(&mut p, &t);
                let (_, _, c) = forward(&input, &p).unwrap();
                backward(&coarse_gt, &fine_gt, &p, &c, 0).unwrap().0.value
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            let denom = analytic[k].abs().max(fd.abs()).max(1e-4);
            worst_grad = worst_grad.max((analytic[k] - fd).abs() / denom);
        }
    }
    let grad_ok = worst_grad < 1e-4;
    report(
        "chamfer oracle + gradient",
        cd_ok && grad_ok,
        &format!("CD worst relative {worst_rel:.3e} (<= 1e-12); gradient worst relative {worst_grad:.3e} (< 1e-4)"),
    );
}

// -------------------------------------------------------------------------
// Criterion 5: EMD auction gap
// -------------------------------------------------------------------------

#[test]
fn c05_emd_gap() {
    let _guard = heavy_lock();
    let started = Instant::now();
    let mut worst_gap = f64::NEG_INFINITY;
    for trial in 0..500u64 {
        let a = random_cloud(12, 100_000 + trial);
        let b = random_cloud(12, 110_000 + trial);
        let exact = emd_exact(&a, &b).unwrap().cost;
        let approx = emd_auction(&a, &b, 1e-6).unwrap().cost;
        worst_gap = worst_gap.max(approx - exact);
    }
    let elapsed = started.elapsed();
    report(
        "emd auction gap",
        worst_gap <= 1e-6 && elapsed < Duration::from_secs(30),
        &format!("worst cost gap {worst_gap:.3e} (<= 1e-6) over 500 pairs in {elapsed:.2?} (< 30 s)"),
    );
}

// -------------------------------------------------------------------------
// Criterion 6: schedules
// -------------------------------------------------------------------------

#[test]
fn c06_schedules() {
    let alpha_ok = alpha_schedule(0) == 0.01
        && alpha_schedule(9_999) == 0.01
        && alpha_schedule(10_000) == 0.1
        && alpha_schedule(20_000) == 0.5
        && alpha_schedule(49_999) == 0.5
        && alpha_schedule(50_000) == 1.0
        && alpha_schedule(u64::MAX) == 1.0;
    let config = TrainConfig::default();
    let lr_ok = (0..200usize).all(|epoch| {
        lr_schedule(epoch, &config) == 1e-4 * 0.7_f64.powi((epoch / 10) as i32)
    });
    report(
        "schedules",
        alpha_ok && lr_ok,
        "alpha plateaus at {0, 10000, 20000, 50000} and lr = 1e-4 * 0.7^floor(e/10), exactly",
    );
}

// -------------------------------------------------------------------------
// Criterion 7: training smoke (shared with the landscape criterion)
// -------------------------------------------------------------------------

struct SmokeArtifacts {
    dataset: Vec<CompletionSample>,
    outcome: occo_core::train::TrainOutcome,
    initial_fine_cd: f64,
    final_fine_cd: f64,
    rerun_identical: bool,
    elapsed: Duration,
}

fn smoke_config() -> TrainConfig {
    TrainConfig {
        epochs: 100_000,
        batch_size: 8,
        lr0: 1e-3,
        lr_every: 100_000,
        seed: 77,
        max_steps: Some(200),
        ..TrainConfig::default()
    }
}

fn smoke_artifacts() -> &'static SmokeArtifacts {
    static ARTIFACTS: OnceLock<SmokeArtifacts> = OnceLock::new();
    ARTIFACTS.get_or_init(|| {
        let objects: Vec<SourceObject> = benchmark_objects(20, 1001, PoseMode::Canonical);
        let gen = GenParams::new(1, 256, 64, 1024, 1001);
        let (dataset, _) = generate_dataset(&objects, &gen).unwrap();
        let dims = ModelDims::desk();
        let config = smoke_config();
        let initial = init_params(&dims, derive_seed(config.seed, "init", &[])).unwrap();
        let (_, initial_fine_cd) = evaluate(&dataset, &initial).unwrap();
        let started = Instant::now();
        let outcome = pretrain(&dataset, &dims, &config).unwrap();
        let elapsed = started.elapsed();
        let rerun = pretrain(&dataset, &dims, &config).unwrap();
        let rerun_identical = rerun.params == outcome.params
            && rerun.log.records.len() == outcome.log.records.len();
        let (_, final_fine_cd) = evaluate(&dataset, &outcome.params).unwrap();
        SmokeArtifacts { dataset, outcome, initial_fine_cd, final_fine_cd, rerun_identical, elapsed }
    })
}

#[test]
fn c07_training_smoke() {
    let _guard = heavy_lock();
    let artifacts = smoke_artifacts();
    let ratio = artifacts.final_fine_cd / artifacts.initial_fine_cd;
    report(
        "training smoke",
        ratio <= 0.5 && artifacts.rerun_identical && artifacts.elapsed < Duration::from_secs(300),
        &format!(
            "fine CD {:.4} -> {:.4} (ratio {ratio:.3} <= 0.5), rerun bit-identical: {}, 200 steps in {:.2?} (< 5 min)",
            artifacts.initial_fine_cd, artifacts.final_fine_cd, artifacts.rerun_identical, artifacts.elapsed
        ),
    );
}

// -------------------------------------------------------------------------
// Criterion 11: landscape center identity and filter norms
// -------------------------------------------------------------------------

#[test]
fn c11_landscape() {
    let _guard = heavy_lock();
    let artifacts = smoke_artifacts();
    let params = &artifacts.outcome.params;
    let step = artifacts.outcome.adam.step;
    // A 3x3 grid suffices for the center-node identity.
    let slice = landscape_slice(params, &artifacts.dataset, 3, 5, step).unwrap();
    let direct = dataset_loss(&artifacts.dataset, params, step).unwrap();
    let center_err = (slice.center() - direct).abs();
    let center_ok = center_err <= 1e-12 * direct.abs().max(1.0);

    let mut worst_norm = 0.0_f64;
    for dir_seed in [5u64, 6] {
        let dir = filter_normalized_direction(params, dir_seed);
        for (d_stack, r_stack) in dir.stacks().into_iter().zip(params.stacks()) {
            for (d, r) in d_stack.iter().zip(r_stack) {
                for j in 0..d.w.cols {
                    let dn = (0..d.w.rows).map(|i| d.w.get(i, j).powi(2)).sum::<f64>().sqrt();
                    let rn = (0..r.w.rows).map(|i| r.w.get(i, j).powi(2)).sum::<f64>().sqrt();
                    worst_norm = worst_norm.max((dn - rn).abs());
                }
                let dbn = d.b.iter().map(|v| v * v).sum::<f64>().sqrt();
                let rbn = r.b.iter().map(|v| v * v).sum::<f64>().sqrt();
                worst_norm = worst_norm.max((dbn - rbn).abs());
            }
        }
    }
    report(
        "landscape",
        center_ok && worst_norm < 1e-9,
        &format!("center |f(0,0) - L(theta*)| = {center_err:.3e} (<= 1e-12 rel); worst filter-norm mismatch {worst_norm:.3e} (< 1e-9)"),
    );
}

// -------------------------------------------------------------------------
// Criterion 10: dissection mechanics
// -------------------------------------------------------------------------

#[test]
fn c10_dissection() {
    let mut cardinality_ok = true;
    for n in 1..=50usize {
        let mut rng = rng_for(10, "mask", &[n as u64]);
        let acts: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let count = activation_mask(&acts, 0.2).iter().filter(|&&m| m).count();
        cardinality_ok &= count == (0.2 * n as f64).ceil() as usize;
    }
    let m = vec![vec![vec![true, false, true, false]]];
    let identical = dissection_miou(&m, &m.clone()).unwrap()[0][0] == 1.0;
    let disjoint_masks = vec![vec![vec![false, true, false, true]]];
    let disjoint = dissection_miou(&m, &disjoint_masks).unwrap()[0][0] == 0.0;
    let matrix = vec![vec![0.5, 0.500001, 0.0], vec![0.9, 0.4, 0.5]];
    let (total, unique) = count_detected_concepts(&matrix, 0.5);
    let counting_ok = total == 2 && unique == 2;
    report(
        "dissection",
        cardinality_ok && identical && disjoint && counting_ok,
        &format!("mask cardinality ceil(0.2 n) for n in 1..50: {cardinality_ok}; mIoU identical/disjoint: {identical}/{disjoint}; strict >0.5 counting: {counting_ok}"),
    );
}

// -------------------------------------------------------------------------
// Criterion 9 (part 1): AMI formula behavior
// -------------------------------------------------------------------------

#[test]
fn c09a_ami_behavior() {
    let a = Clustering { labels: (0..60).map(|i| i % 4).collect(), k: 4 };
    let identical_ok = ami(&a, &a).unwrap() == 1.0;

    let mut rng = rng_for(9, "ami-null", &[]);
    let mut sum = 0.0;
    let trials = 100;
    for _ in 0..trials {
        let x = Clustering { labels: (0..200).map(|_| rng.gen_range(0..10)).collect(), k: 10 };
        let y = Clustering { labels: (0..200).map(|_| rng.gen_range(0..10)).collect(), k: 10 };
        sum += ami(&x, &y).unwrap();
    }
    let mean = sum / trials as f64;
    report(
        "ami behavior",
        identical_ok && mean.abs() < 0.05,
        &format!("identical -> 1.0 exactly: {identical_ok}; |mean AMI| of 100 random labelings = {:.4} (< 0.05)", mean.abs()),
    );
}
