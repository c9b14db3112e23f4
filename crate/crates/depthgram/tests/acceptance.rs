//! The eight acceptance gates for this library.
//!
//! Each test covers one numbered criterion and prints a single
//! `criterion N: PASS (x.x s)` line on success (visible with
//! `--nocapture`); a failure panics with the offending numbers. The tests
//! share one process, so a static mutex serializes them — the wall-clock
//! and peak-memory measurements in criterion 7 must not interleave with
//! other work, and the statistical suites are heavyweight anyway.
//!
//! Only criterion 7 asserts its runtime budget; the other budgets are
//! printed for inspection so a slow box degrades loudly, not flakily.

use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use depthgram::depth::{
    mbd, mbd_brute, mei, mei_brute, parabola_f, parabola_f_exact, parabola_g, parabola_g_exact,
    FunctionalSample,
};
use depthgram::engine::{analyze, AnalyzeConfig, Variant};
use depthgram::hdfd::{DatasetShape, MemoryDataset};
use depthgram::report::report_json;
use depthgram::synth::{
    run_study, GpNoise, Model, ModelConfig, Role, StudyConfig, SynthSource,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

static GATE: Mutex<()> = Mutex::new(());

fn serialized() -> MutexGuard<'static, ()> {
    // A failed criterion poisons the mutex; later criteria still run.
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

fn pass(criterion: usize, detail: &str, start: Instant) {
    println!(
        "criterion {criterion}: PASS ({:.1} s) {detail}",
        start.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// Criterion 1: fast depth kernels match brute-force definitions.
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_oracle_equivalence() {
    let _gate = serialized();
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE_0001);
    for trial in 0..500 {
        let n = rng.gen_range(2..=15);
        let m = rng.gen_range(1..=20);
        let mut rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..m)
                    // Quarter-integer levels force plenty of cross-curve ties.
                    .map(|_| rng.gen_range(-8i32..=8) as f64 / 4.0)
                    .collect()
            })
            .collect();
        // Every third trial duplicates a row verbatim: identical curves are
        // the harshest tie case.
        if trial % 3 == 0 && n >= 2 {
            let from = rng.gen_range(0..n);
            let to = rng.gen_range(0..n);
            let copy = rows[from].clone();
            rows[to] = copy;
        }
        let sample = FunctionalSample::from_rows(rows).expect("finite sample");
        for (kind, fast, brute) in [
            ("band", mbd(&sample), mbd_brute(&sample)),
            ("epigraph", mei(&sample), mei_brute(&sample)),
        ] {
            assert_eq!(
                fast.numerators, brute.numerators,
                "trial {trial}: {kind} numerators diverge (n={n}, m={m})"
            );
            for i in 0..n {
                let gap = (fast.value(i) - brute.value(i)).abs();
                assert!(
                    gap <= 1e-12,
                    "trial {trial}: {kind} value gap {gap:e} at curve {i} (n={n}, m={m})"
                );
            }
        }
    }
    pass(1, "500 tied/duplicated samples, numerators exact", start);
}

// ---------------------------------------------------------------------------
// Criterion 2: first-level parabola bound and its equality case.
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_band_depth_parabola_bound() {
    let _gate = serialized();
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE_0002);

    // Bound on tie-free random samples: continuous draws never tie.
    for trial in 0..200 {
        let n = rng.gen_range(2..=15);
        let m = rng.gen_range(1..=20);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.gen::<f64>() * 10.0 - 5.0).collect())
            .collect();
        let sample = FunctionalSample::from_rows(rows).expect("finite sample");
        let band = mbd(&sample);
        let epi = mei(&sample);
        for i in 0..n {
            let bound = parabola_f(n, epi.value(i));
            assert!(
                band.value(i) <= bound + 1e-12,
                "trial {trial}: band depth {} above f_n bound {} (n={n}, m={m}, curve {i})",
                band.value(i),
                bound
            );
        }
    }

    // Exact equality on constructed non-crossing samples, as an integer
    // identity rather than a float comparison.
    for trial in 0..50 {
        let n = rng.gen_range(2..=12);
        let m = rng.gen_range(1..=15);
        let bases: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
        let gaps: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 0.05).collect();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..m).map(|k| bases[k] + i as f64 * gaps[k]).collect())
            .collect();
        let sample = FunctionalSample::from_rows(rows).expect("finite sample");
        let band = mbd(&sample);
        let epi = mei(&sample);
        assert!(
            parabola_f_exact(&band, &epi),
            "trial {trial}: ordered sample left the parabola (n={n}, m={m})"
        );
    }
    pass(2, "bound on 200 random samples, exact equality on 50 ordered ones", start);
}

// ---------------------------------------------------------------------------
// Criterion 3: second-level parabola — equality under full ordering,
// inequality under per-direction ordering alone.
// ---------------------------------------------------------------------------

/// Dataset where observation `order[rank]`'s curve sits at height `rank`,
/// with shared per-(j, k) bases and positive gaps. One global `order`
/// makes every direction non-crossing with one common ranking.
fn ordered_dataset(
    n: usize,
    p: usize,
    n_points: usize,
    rank_of: impl Fn(usize, usize, usize) -> usize,
    rng: &mut ChaCha12Rng,
) -> MemoryDataset {
    let shape = DatasetShape { n, p, n_points };
    let mut values = vec![0.0; n * p * n_points];
    for j in 0..p {
        let base: Vec<f64> = (0..n_points).map(|_| rng.gen::<f64>() - 0.5).collect();
        let gap: Vec<f64> = (0..n_points).map(|_| rng.gen::<f64>() + 0.1).collect();
        for i in 0..n {
            for k in 0..n_points {
                values[(j * n + i) * n_points + k] =
                    base[k] + rank_of(i, j, k) as f64 * gap[k];
            }
        }
    }
    MemoryDataset::new(shape, values, None).expect("valid dataset")
}

fn shuffled(n: usize, rng: &mut ChaCha12Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    order
}

#[test]
fn criterion_3_second_level_parabola() {
    let _gate = serialized();
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE_0003);
    let cfg = AnalyzeConfig::default();

    // Fully ordered (one ranking shared by every dimension and time point):
    // exact equality in all three variants, checked on integer numerators.
    for _ in 0..10 {
        let n = rng.gen_range(3..=9);
        let p = rng.gen_range(1..=6);
        let n_points = rng.gen_range(1..=7);
        let ranks = shuffled(n, &mut rng);
        let data = ordered_dataset(n, p, n_points, |i, _, _| ranks[i], &mut rng);
        let output = analyze(&data, &cfg).expect("analyze");
        for gram in &output.depthgrams {
            assert!(
                parabola_g_exact(n, gram.columns, &gram.band_numerators, &gram.epi_numerators),
                "fully ordered sample off the g_n parabola in {:?} (n={n}, p={p}, N={n_points})",
                gram.variant
            );
        }
    }

    // Each dimension ordered, but by its own ranking: the dimensions-variant
    // points may fall below g_n yet never above it.
    for _ in 0..10 {
        let n = rng.gen_range(3..=9);
        let p = rng.gen_range(2..=6);
        let n_points = rng.gen_range(1..=7);
        let per_dim: Vec<Vec<usize>> = (0..p).map(|_| shuffled(n, &mut rng)).collect();
        let data = ordered_dataset(n, p, n_points, |i, j, _| per_dim[j][i], &mut rng);
        let output = analyze(&data, &cfg).expect("analyze");
        let gram = &output.depthgrams[0];
        assert_eq!(gram.variant, Variant::Dimensions);
        for i in 0..n {
            assert!(
                gram.dg2[i] <= parabola_g(n, gram.dg1[i]) + 1e-12,
                "dimension-wise ordered sample above g_n at observation {}",
                i + 1
            );
        }
    }

    // Each time point ordered across dimensions, but by its own ranking:
    // same one-sided statement for the time variant.
    for _ in 0..10 {
        let n = rng.gen_range(3..=9);
        let p = rng.gen_range(1..=6);
        let n_points = rng.gen_range(2..=7);
        let per_time: Vec<Vec<usize>> = (0..n_points).map(|_| shuffled(n, &mut rng)).collect();
        let data = ordered_dataset(n, p, n_points, |i, _, k| per_time[k][i], &mut rng);
        let output = analyze(&data, &cfg).expect("analyze");
        let gram = &output.depthgrams[1];
        assert_eq!(gram.variant, Variant::Time);
        for i in 0..n {
            assert!(
                gram.dg2[i] <= parabola_g(n, gram.dg1[i]) + 1e-12,
                "time-wise ordered sample above g_n at observation {}",
                i + 1
            );
        }
    }

    // The hand-computed n = 3 example: three stacked constant curves put the
    // middle one at exactly (2/3, 1), and g_3(2/3) = 1.
    let shape = DatasetShape { n: 3, p: 2, n_points: 4 };
    let mut values = Vec::new();
    for _ in 0..shape.p {
        for level in [1.0, 2.0, 3.0] {
            values.extend(std::iter::repeat(level).take(shape.n_points));
        }
    }
    let data = MemoryDataset::new(shape, values, None).expect("valid dataset");
    let output = analyze(&data, &cfg).expect("analyze");
    for gram in &output.depthgrams {
        assert_eq!(gram.dg1[1], 2.0 / 3.0, "{:?}", gram.variant);
        assert_eq!(gram.dg2[1], 1.0, "{:?}", gram.variant);
    }
    assert_eq!(parabola_g(3, 2.0 / 3.0), 1.0);

    pass(3, "equality when fully ordered, one-sided otherwise, n=3 example exact", start);
}

// ---------------------------------------------------------------------------
// Criterion 4: detection-rate reproduction at p = 50, c = 1.
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_low_dimensional_study() {
    let _gate = serialized();
    let start = Instant::now();
    let mut summaries = Vec::new();
    for model in [Model::One, Model::Two, Model::Three, Model::Four] {
        let config = StudyConfig {
            c_grid: vec![1.0],
            replicates: 200,
            marginal_rule: false,
            collect_points: false,
            ..StudyConfig::standard(model, 50, 0x51AB + model.number() as u64)
        };
        let output = run_study(&config).expect("study runs");
        let rates = output.summary.rows[0].depthgram.clone();
        println!(
            "criterion 4: model {} magnitude {:.3} shape {:.3} joint {:.3} false {:.4}",
            model.number(),
            rates.magnitude.mean,
            rates.shape.mean,
            rates.joint.mean,
            rates.false_rate.mean
        );
        summaries.push(rates);
    }
    let m1 = &summaries[0];
    assert!(m1.joint.mean >= 0.95, "model 1 joint rate {:.3} < 0.95", m1.joint.mean);
    assert!(m1.shape.mean >= 0.90, "model 1 shape rate {:.3} < 0.90", m1.shape.mean);
    assert!(
        m1.false_rate.mean <= 0.02,
        "model 1 false rate {:.4} > 0.02",
        m1.false_rate.mean
    );
    assert!(
        m1.magnitude.mean <= 0.5,
        "model 1 magnitude rate {:.3} > 0.5 (the joint rule barely sees pure shifts here)",
        m1.magnitude.mean
    );
    let m2 = &summaries[1];
    assert!(m2.magnitude.mean >= 0.99, "model 2 magnitude rate {:.3} < 0.99", m2.magnitude.mean);
    assert!(m2.joint.mean >= 0.95, "model 2 joint rate {:.3} < 0.95", m2.joint.mean);
    pass(4, "200 replicates per model, Models 1-2 rate bands hold", start);
}

// ---------------------------------------------------------------------------
// Criterion 5: marginal screen rates at p = 1000.
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_marginal_screen_rates() {
    let _gate = serialized();
    let start = Instant::now();
    let config = StudyConfig {
        c_grid: vec![0.0, 1.0],
        replicates: 50,
        collect_points: false,
        ..StudyConfig::standard(Model::One, 1000, 0x5C8EE)
    };
    let output = run_study(&config).expect("study runs");
    let clean = output.summary.rows[0]
        .marginal
        .clone()
        .expect("marginal rates requested");
    let contaminated = output.summary.rows[1]
        .marginal
        .clone()
        .expect("marginal rates requested");
    println!(
        "criterion 5: c=1 magnitude {:.3}/{:.4} shape {:.3}/{:.4}; c=0 shape false {:.4}",
        contaminated.magnitude_correct.mean,
        contaminated.magnitude_false.mean,
        contaminated.shape_correct.mean,
        contaminated.shape_false.mean,
        clean.shape_false.mean
    );
    assert!(
        contaminated.magnitude_correct.mean >= 0.99,
        "magnitude detection {:.3} < 0.99",
        contaminated.magnitude_correct.mean
    );
    let shape = contaminated.shape_correct.mean;
    assert!(
        (0.90..=0.99).contains(&shape),
        "shape detection {shape:.3} outside [0.90, 0.99]"
    );
    let shape_false = contaminated.shape_false.mean;
    assert!(
        (0.015..=0.04).contains(&shape_false),
        "shape false rate {shape_false:.4} outside [0.015, 0.04]"
    );
    let clean_shape_false = clean.shape_false.mean;
    assert!(
        (0.03..=0.05).contains(&clean_shape_false),
        "clean shape false rate {clean_shape_false:.4} outside [0.03, 0.05]"
    );
    pass(5, "50 replicates at p=1000, all four screen-rate bands hold", start);
}

// ---------------------------------------------------------------------------
// Criterion 6: high-dimensional joint-outlier separation.
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_high_dimensional_separation() {
    let _gate = serialized();
    let start = Instant::now();
    let config = ModelConfig {
        model: Model::Four,
        n: 100,
        p: 10_000,
        n_points: 100,
        c: 1.0,
        seed: 0x6D1A,
    };
    let source = SynthSource::new(config).expect("source builds");
    let joint = source.ground_truth().ids_with_role(Role::Joint);
    let typical = source.ground_truth().ids_with_role(Role::Typical);
    assert_eq!(joint.len(), 5);
    let output = analyze(&source, &AnalyzeConfig::default()).expect("analyze");

    let time = &output.depthgrams[1];
    let tc = &output.depthgrams[2];
    assert_eq!(tc.variant, Variant::TimeCorrelation);

    let worst_joint = joint
        .iter()
        .map(|&id| tc.d_scores[id - 1])
        .fold(f64::INFINITY, f64::min);
    let best_typical = typical
        .iter()
        .map(|&id| tc.d_scores[id - 1])
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(
        worst_joint > best_typical,
        "weakest joint outlier d {worst_joint:.4} not above strongest typical d {best_typical:.4}"
    );

    assert_eq!(time.dg1, tc.dg1, "sign alignment must not move the first coordinate");

    for id in &joint {
        assert!(
            output.report.outlier_union.contains(id),
            "joint outlier {id} missing from the flag union {:?}",
            output.report.outlier_union
        );
    }
    pass(6, "p=10000 joint/typical separation, DG1 invariance, flags cover joint", start);
}

// ---------------------------------------------------------------------------
// Criterion 7: wall-clock, peak memory, and cross-thread determinism at
// n=100, p=50000, N=100.
// ---------------------------------------------------------------------------

/// Peak resident set size in KiB from /proc, if available.
fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

/// Asks the kernel to restart the peak-RSS watermark for this process;
/// harmless if the interface is unavailable.
fn reset_peak_rss() -> bool {
    std::fs::write("/proc/self/clear_refs", "5").is_ok()
}

#[test]
fn criterion_7_performance_and_determinism() {
    let _gate = serialized();
    let start = Instant::now();
    let config = ModelConfig {
        model: Model::One,
        n: 100,
        p: 50_000,
        n_points: 100,
        c: 1.0,
        seed: 7,
    };
    let source = SynthSource::new(config).expect("source builds");
    let watermark_reset = reset_peak_rss();

    let run = |workers: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("pool builds");
        let timer = Instant::now();
        let output = pool
            .install(|| analyze(&source, &AnalyzeConfig::default()))
            .expect("analyze");
        (report_json(&output.report), timer.elapsed().as_secs_f64())
    };

    let (report_1, secs_1) = run(1);
    let (report_2, secs_2) = run(2);
    let (report_8, secs_8) = run(8);
    println!(
        "criterion 7: analyze wall 1/2/8 workers = {secs_1:.1}/{secs_2:.1}/{secs_8:.1} s"
    );
    assert_eq!(report_1, report_2, "1-worker and 2-worker reports differ");
    assert_eq!(report_1, report_8, "1-worker and 8-worker reports differ");

    let fastest = secs_1.min(secs_2).min(secs_8);
    assert!(
        fastest <= 120.0,
        "analyze at p=50000 took {fastest:.1} s, over the 120 s budget"
    );

    match peak_rss_kib() {
        Some(kib) => {
            let reset_note = if watermark_reset { "watermark reset" } else { "process-lifetime watermark" };
            println!("criterion 7: peak rss {:.1} MiB ({reset_note})", kib as f64 / 1024.0);
            assert!(
                kib <= 1024 * 1024,
                "peak resident memory {:.1} MiB exceeds 1 GiB",
                kib as f64 / 1024.0
            );
        }
        None => println!("criterion 7: peak rss unavailable on this system"),
    }
    pass(7, "p=50000 within budget, byte-identical across 1/2/8 workers", start);
}

// ---------------------------------------------------------------------------
// Criterion 8: generator statistics.
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_generator_statistics() {
    let _gate = serialized();
    let start = Instant::now();

    // Noise moments over 1e5 draws of a 100-point grid.
    let n_points = 100;
    let draws = 100_000usize;
    let gp = GpNoise::new(n_points).expect("kernel factorizes");
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE_0008);
    let mut buffer = vec![0.0f64; n_points];
    let mut sum_sq = 0.0f64;
    let mut lag_cross = 0.0f64;
    let mut lag_left_sq = 0.0f64;
    let mut lag_right_sq = 0.0f64;
    for _ in 0..draws {
        gp.sample_into(&mut rng, &mut buffer);
        for k in 0..n_points {
            sum_sq += buffer[k] * buffer[k];
        }
        for k in 0..n_points - 1 {
            lag_cross += buffer[k] * buffer[k + 1];
            lag_left_sq += buffer[k] * buffer[k];
            lag_right_sq += buffer[k + 1] * buffer[k + 1];
        }
    }
    let variance = sum_sq / (draws * n_points) as f64;
    assert!(
        (variance - 0.3).abs() <= 0.01,
        "marginal variance {variance:.4} is not 0.3 +/- 0.01"
    );
    let lag1 = lag_cross / (lag_left_sq.sqrt() * lag_right_sq.sqrt());
    let spacing = 1.0 / (n_points as f64 - 1.0);
    let expected = (-spacing / 0.3).exp();
    assert!(
        (lag1 - expected).abs() <= 0.01,
        "lag-1 autocorrelation {lag1:.4} is not {expected:.4} +/- 0.01"
    );

    // Contaminated-dimension counts are exactly round(c * p) for every
    // outlier at every grid value.
    for (c, p) in [(0.25, 50), (0.5, 50), (0.75, 47), (1.0, 31), (0.1, 1000)] {
        let config = ModelConfig {
            model: Model::Three,
            n: 25,
            p,
            n_points: 5,
            c,
            seed: 99,
        };
        let source = SynthSource::new(config).expect("source builds");
        let expected = (c * p as f64).round() as usize;
        assert_eq!(source.ground_truth().contaminated_per_outlier, expected);
        for obs in &source.ground_truth().observations {
            if obs.role != Role::Typical {
                assert_eq!(
                    obs.contaminated_dimensions.len(),
                    expected,
                    "observation {} at c={c}, p={p}",
                    obs.id
                );
            }
        }
    }
    pass(8, &format!("variance {variance:.4}, lag-1 {lag1:.4}, counts exact"), start);
}
