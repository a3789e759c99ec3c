//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Every tolerance is pinned here, in code. Streams are generated at fixed
//! seeds; the heavyweight gapped fixtures are shared across criteria.

use std::sync::LazyLock;
use std::time::Instant;

use pps_core::analytics::{
    g2_gapped, g2_two_level, kim_g2_from_w, uniform_grid, wn_gapped,
};
use pps_core::estimators::{
    count_coincidences, estimate_g2, estimate_rate, estimate_waiting, pair_counts_range,
    CorrelationHistogram,
};
use pps_core::generate::gen_poisson;
use pps_core::transforms::{
    delay_insert, gap_insert, gap_remove, gap_remove_probabilistic, gen_pulsed, DelaySpec,
    GapSpec, JitterSpec, RemovalProbability,
};
use pps_core::{EventStream, Rate, Seed};

fn rate(v: f64) -> Rate {
    Rate::new(v).unwrap()
}

fn gap(v: f64) -> GapSpec {
    GapSpec::new(v).unwrap()
}

/// γ = 1, t_G = 1 gapped stream with ≥ 1e7 events.
static GAPPED_1: LazyLock<EventStream> = LazyLock::new(|| {
    let raw = gen_poisson(rate(1.0), 2.05e7, Seed(201)).unwrap();
    gap_remove(&raw, gap(1.0))
});

/// γ = 1, t_G = 3 gapped stream with ≥ 1e7 events.
static GAPPED_3: LazyLock<EventStream> = LazyLock::new(|| {
    let raw = gen_poisson(rate(1.0), 4.05e7, Seed(202)).unwrap();
    gap_remove(&raw, gap(3.0))
});

/// g² of GAPPED_3 at the criterion binning (t_G/100, out to 10 t_G).
static HIST_3: LazyLock<CorrelationHistogram> =
    LazyLock::new(|| estimate_g2(&GAPPED_3, 0.03, 30.0).unwrap());

fn report(criterion: &str, ok: bool, detail: &str) {
    println!(
        "[acceptance] {criterion}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "{criterion} failed: {detail}");
}

#[test]
fn c01_exact_gap_no_coincidences() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let inserted_1 = gap_insert(&gen_poisson(rate(1.0), 1.005e7, Seed(203)).unwrap(), gap(1.0));
    let inserted_3 = gap_insert(&gen_poisson(rate(1.0), 1.005e7, Seed(204)).unwrap(), gap(3.0));
    let cases: [(&str, &EventStream, f64); 4] = [
        ("remove t_G=1", &GAPPED_1, 1.0),
        ("remove t_G=3", &GAPPED_3, 3.0),
        ("insert t_G=1", &inserted_1, 1.0),
        ("insert t_G=3", &inserted_3, 3.0),
    ];
    for (name, stream, t_gap) in cases {
        if stream.len() < 10_000_000 {
            failures.push(format!("{name}: only {} events", stream.len()));
        }
        let window = t_gap * (1.0 - 1e-9);
        for k in [2usize, 3, 4] {
            let c = count_coincidences(stream, window, k).unwrap();
            if c != 0 {
                failures.push(format!("{name}: {c} {k}-fold coincidences below the gap"));
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    if elapsed >= 60.0 {
        failures.push(format!("runtime {elapsed:.1}s exceeds 60s"));
    }
    report(
        "C1 exact-gap",
        failures.is_empty(),
        &format!(
            "k=2,3,4 coincidence counts all zero below t_G for both constructions, {elapsed:.1}s{}",
            failures.join("; ")
        ),
    );
}

#[test]
fn c02_rate_law() {
    let mut detail = Vec::new();
    let mut ok = true;
    // (γt_G, stream, t_G); the two big fixtures are reused, the edge regimes
    // get their own streams.
    let dim = gap_remove(&gen_poisson(rate(1.0), 1e6, Seed(205)).unwrap(), gap(0.001));
    let strong = gap_remove(&gen_poisson(rate(1.0), 2.6e7, Seed(206)).unwrap(), gap(25.0));
    let cases: [(&EventStream, f64); 4] = [
        (&dim, 0.001),
        (&GAPPED_1, 1.0),
        (&GAPPED_3, 3.0),
        (&strong, 25.0),
    ];
    for (stream, t_gap) in cases {
        let measured = estimate_rate(stream).unwrap().per_sec();
        let law = 1.0 / (1.0 + t_gap);
        let rel = (measured - law).abs() / law;
        if rel > 0.01 {
            ok = false;
        }
        detail.push(format!("γt_G={t_gap}: {measured:.6} vs {law:.6} ({:+.3}%)", rel * 100.0));
    }
    report("C2 rate-law", ok, &detail.join(", "));
}

#[test]
fn c03_discontinuity_height() {
    let h = &*HIST_3;
    assert!(GAPPED_3.len() >= 10_000_000);
    // First bin at or above t_G: edges are aligned, so bin 100 starts at 3.
    let first = (0..h.n_bins())
        .find(|&b| h.bin_edges()[b] >= 3.0 * (1.0 - 1e-12))
        .unwrap();
    let value = h.g2()[first];
    let target = 4.0; // 1 + γt_G
    let rel = (value - target).abs() / target;
    report(
        "C3 discontinuity-height",
        rel <= 0.05,
        &format!("first bin above t_G: g2 = {value:.4} vs {target} ({:+.2}%)", rel * 100.0),
    );
}

#[test]
fn c04_full_curve_agreement() {
    let h = &*HIST_3;
    let curve_vals: Vec<f64> = (0..h.n_bins())
        .map(|b| {
            let c = h.bin_center(b);
            g2_gapped(vec![c], rate(1.0), gap(3.0)).values()[0]
        })
        .collect();
    let mut max_z = 0.0f64;
    let mut worst = 0.0f64;
    let mut zero_failures = 0usize;
    let mut scored = 0usize;
    for (b, &reference) in curve_vals.iter().enumerate() {
        let lo = h.bin_edges()[b];
        let hi = h.bin_edges()[b + 1];
        if hi <= 3.0 {
            if h.pair_counts()[b] != 0 {
                zero_failures += 1;
            }
            continue;
        }
        if lo < 3.0 {
            continue; // straddling bin tested by the alignment rule in C3
        }
        // τ ∈ (t_G, 10 t_G]
        let z = (h.g2()[b] - reference) / h.stderr()[b];
        if z.abs() > max_z {
            max_z = z.abs();
            worst = h.bin_center(b);
        }
        scored += 1;
    }
    let ok = max_z <= 5.0 && zero_failures == 0 && scored >= 890;
    report(
        "C4 full-curve",
        ok,
        &format!(
            "max|z| = {max_z:.3} at τ = {worst:.3} over {scored} bins, {zero_failures} zero-bin failures"
        ),
    );
}

#[test]
fn c05_kim_oracle() {
    let mut detail = Vec::new();
    let mut ok = true;
    for t_gap in [0.5, 1.0, 3.0, 25.0] {
        // Trapezoid error grows like (γh)²·(1+γt_G), so the strongly gapped
        // case needs a finer grid than h = t_G/1000 to stay under 1e-3.
        let n_div = if t_gap > 10.0 { 4000 } else { 1000 };
        let h = t_gap / n_div as f64;
        let grid = uniform_grid(h, 10 * n_div); // [0, 10 t_G]
        let w1 = wn_gapped(grid.clone(), 1, rate(1.0), gap(t_gap)).unwrap();
        let emission = rate(1.0 / (1.0 + t_gap));
        let oracle = kim_g2_from_w(&w1, emission, 12).unwrap();
        let exact = g2_gapped(grid, rate(1.0), gap(t_gap));
        let dev = oracle
            .values()
            .iter()
            .zip(exact.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if dev > 1e-3 {
            ok = false;
        }
        detail.push(format!("γt_G={t_gap}: max|Δ| = {dev:.2e}"));
        // wₙ areas over the criterion set.
        for n in [1usize, 2, 3] {
            let start = n as f64 * t_gap;
            let step = 5e-4;
            let pts = ((60.0 + start) / step) as usize;
            let local: Vec<f64> = (0..=pts).map(|i| start + i as f64 * step).collect();
            let w = wn_gapped(local, n, rate(1.0), gap(t_gap)).unwrap();
            let v = w.values();
            let mut area = 0.5 * (v[0] + v[v.len() - 1]);
            area += v[1..v.len() - 1].iter().sum::<f64>();
            area *= step;
            if (area - 1.0).abs() > 1e-6 {
                ok = false;
                detail.push(format!("γt_G={t_gap} w{n} area = {area}"));
            }
        }
    }
    report("C5 kim-oracle", ok, &detail.join(", "));
}

#[test]
fn c06_waiting_time_laws() {
    let stream = &*GAPPED_1;
    assert!(stream.len() >= 10_000_000);
    let mut max_z1 = 0.0f64;
    let mut max_z2 = 0.0f64;
    let mut zero_bad = 0usize;

    let w1 = estimate_waiting(stream, 1, 0.01, 8.0).unwrap();
    let per1 = w1.n_samples() as f64 * w1.bin_width();
    for b in 0..w1.counts().len() {
        let c = w1.bin_center(b);
        let expect = if c >= 1.0 { (-(c - 1.0)).exp() } else { 0.0 };
        if expect == 0.0 {
            if w1.counts()[b] != 0 {
                zero_bad += 1;
            }
            continue;
        }
        let sigma = (expect / per1).sqrt();
        max_z1 = max_z1.max(((w1.density()[b] - expect) / sigma).abs());
    }

    let w2 = estimate_waiting(stream, 2, 0.02, 12.0).unwrap();
    let per2 = w2.n_samples() as f64 * w2.bin_width();
    for b in 0..w2.counts().len() {
        let c = w2.bin_center(b);
        let expect = if c >= 2.0 {
            (c - 2.0) * (-(c - 2.0)).exp()
        } else {
            0.0
        };
        if expect == 0.0 {
            if w2.counts()[b] != 0 {
                zero_bad += 1;
            }
            continue;
        }
        let sigma = (expect / per2).sqrt();
        max_z2 = max_z2.max(((w2.density()[b] - expect) / sigma).abs());
    }

    let ok = max_z1 <= 5.0 && max_z2 <= 5.0 && zero_bad == 0;
    report(
        "C6 waiting-laws",
        ok,
        &format!("order-1 max|z| = {max_z1:.3}, order-2 max|z| = {max_z2:.3}, {zero_bad} counts below support"),
    );
}

#[test]
fn c07_dim_source_step_profile() {
    let t_gap = 0.001;
    let raw = gen_poisson(rate(1.0), 4e7, Seed(207)).unwrap();
    let dim = gap_remove(&raw, gap(t_gap));
    drop(raw);
    let h = estimate_g2(&dim, t_gap, 20.0 * t_gap).unwrap();
    let mut ok = true;
    let mut worst = 0.0f64;
    for b in 0..h.n_bins() {
        if h.bin_edges()[b + 1] <= t_gap {
            if h.pair_counts()[b] != 0 {
                ok = false;
            }
            continue;
        }
        let dev = (h.g2()[b] - 1.0).abs();
        worst = worst.max(dev);
        if dev > 0.02 {
            ok = false;
        }
    }
    report(
        "C7 dim-source-step",
        ok,
        &format!("below-gap bins exactly zero, above-gap max |g2−1| = {worst:.4} (≤ 0.02)"),
    );
}

#[test]
fn c08_probabilistic_removal_bunching() {
    let mut ok = true;
    let mut detail = Vec::new();
    let raw = gen_poisson(rate(1.0), 1e7, Seed(208)).unwrap();
    for (p, seed) in [(1.0 / 3.0, 301u64), (2.0 / 3.0, 302), (0.9, 303)] {
        let out = gap_remove_probabilistic(
            &raw,
            gap(3.0),
            RemovalProbability::new(p).unwrap(),
            Seed(seed),
        );
        let h = estimate_g2(&out, 0.03, 0.33).unwrap();
        let measured = h.g2()[0];
        let target = (1.0 - p) * (p * 3.0 + 1.0);
        let rel = (measured - target).abs() / target;
        if rel > 0.05 {
            ok = false;
        }
        detail.push(format!("p={p:.3}: g2(0) = {measured:.4} vs {target:.4} ({:+.2}%)", rel * 100.0));
    }
    // The p = 1/3 point is the maximum-bunching optimum (1+γt_G)²/(4γt_G) =
    // 4/3 and the p = 2/3 point sits exactly at the bunching threshold.
    report("C8 probabilistic-removal", ok, &detail.join(", "));
}

#[test]
fn c09_two_level_reconstruction() {
    let raw = gen_poisson(rate(1.0), 2e7, Seed(209)).unwrap();
    let out = delay_insert(&raw, &DelaySpec::Exponential { rate: 1.0 }, Seed(210)).unwrap();
    drop(raw);
    let measured_rate = estimate_rate(&out).unwrap().per_sec();
    let rate_ok = (measured_rate - 0.5).abs() <= 0.005;
    let h = estimate_g2(&out, 0.05, 5.0).unwrap();
    let reference = g2_two_level(
        (0..h.n_bins()).map(|b| h.bin_center(b)).collect(),
        rate(2.0),
    );
    let mut max_z = 0.0f64;
    for b in 0..h.n_bins() {
        let z = (h.g2()[b] - reference.values()[b]) / h.stderr()[b];
        max_z = max_z.max(z.abs());
    }
    let ok = rate_ok && max_z <= 5.0;
    report(
        "C9 two-level",
        ok,
        &format!("rate = {measured_rate:.5} (vs 0.5 ± 1%), g2 vs 1−e^(−2τ) max|z| = {max_z:.3}"),
    );
}

struct PeakShape {
    area_over_period: f64,
    skew: f64,
    max_value: f64,
    position: f64,
}

fn peak_shape(h: &CorrelationHistogram, lo: f64, hi: f64, period: f64) -> PeakShape {
    let mut total = 0.0f64;
    let mut mean = 0.0f64;
    let mut area = 0.0f64;
    let mut max_value = 0.0f64;
    let mut position = lo;
    for b in 0..h.n_bins() {
        let c = h.bin_center(b);
        if c < lo || c >= hi {
            continue;
        }
        let w = h.pair_counts()[b] as f64;
        total += w;
        mean += w * c;
        area += h.g2()[b] * h.bin_width();
        if h.g2()[b] > max_value {
            max_value = h.g2()[b];
            position = c;
        }
    }
    mean /= total;
    let (mut m2, mut m3) = (0.0, 0.0);
    for b in 0..h.n_bins() {
        let c = h.bin_center(b);
        if c < lo || c >= hi {
            continue;
        }
        let w = h.pair_counts()[b] as f64;
        m2 += w * (c - mean).powi(2);
        m3 += w * (c - mean).powi(3);
    }
    m2 /= total;
    m3 /= total;
    PeakShape {
        area_over_period: area / period,
        skew: m3 / m2.powf(1.5),
        max_value,
        position,
    }
}

#[test]
fn c10_pulsed_regime() {
    let mut ok = true;
    let mut detail = Vec::new();
    let period = 1.0;

    for (name, jitter, seed) in [
        ("gaussian", JitterSpec::Gaussian { sigma: 0.05 }, 211u64),
        ("exponential", JitterSpec::Exponential { rate: 10.0 }, 212),
    ] {
        let s = gen_pulsed(period, 1_000_000, &jitter, Seed(seed)).unwrap();
        let h = estimate_g2(&s, 0.01, 5.5).unwrap();
        for n in 1..=5usize {
            let p = peak_shape(&h, n as f64 - 0.5, n as f64 + 0.5, period);
            if (p.area_over_period - 1.0).abs() > 0.02 {
                ok = false;
                detail.push(format!("{name} peak {n} area = {:.4}", p.area_over_period));
            }
            if p.skew.abs() >= 0.1 {
                ok = false;
                detail.push(format!("{name} peak {n} skew = {:.3}", p.skew));
            }
        }
        detail.push(format!("{name}: 5 peaks, areas ±2%, |skew| < 0.1"));
    }

    // Strongly gapped stationary source, the contrast case.
    let raw = gen_poisson(rate(1.0), 5.2e7, Seed(213)).unwrap();
    let gapped25 = gap_remove(&raw, gap(25.0));
    drop(raw);
    let h = estimate_g2(&gapped25, 0.25, 150.0).unwrap();
    let peaks: Vec<PeakShape> = (1..=5)
        .map(|n| {
            let lo = n as f64 * 25.0;
            peak_shape(&h, lo, lo + 25.0, 25.0)
        })
        .collect();
    if peaks[0].skew <= 0.5 {
        ok = false;
        detail.push(format!("gapped first-peak skew {:.3} not asymmetric", peaks[0].skew));
    }
    let maxima: Vec<f64> = peaks.iter().map(|p| p.max_value).collect();
    if !maxima.windows(2).all(|w| w[0] > w[1]) {
        ok = false;
        detail.push(format!("gapped maxima not strictly decreasing: {maxima:?}"));
    }
    let excesses: Vec<f64> = peaks
        .iter()
        .enumerate()
        .map(|(i, p)| p.position - (i as f64 + 1.0) * 25.0)
        .collect();
    if !excesses.iter().all(|&e| e >= 0.0) || !excesses.windows(2).all(|w| w[1] > w[0]) {
        ok = false;
        detail.push(format!("gapped peak positions do not lag: {excesses:?}"));
    }
    detail.push(format!(
        "gapped γt_G=25: skew₁ = {:.2}, maxima decreasing, excess growing {excesses:?}",
        peaks[0].skew
    ));
    report("C10 pulsed-regime", ok, &detail.join("; "));
}

#[test]
fn c11_engineering() {
    let mut ok = true;
    let mut detail = Vec::new();

    // Two-pointer sweep vs brute force, 20 seeds, bit-identical.
    for seed in 400..420u64 {
        let s = gen_poisson(rate(2.0), 5000.0, Seed(seed)).unwrap();
        assert!(s.len() <= 10_500);
        let sweep = pair_counts_range(s.times(), 0..s.len(), 0.05, 100);
        let mut brute = vec![0u64; 100];
        let times = s.times();
        for i in 0..times.len() {
            for j in i + 1..times.len() {
                let b = pps_core::estimators::bin_index(times[j] - times[i], 0.05);
                if b >= 100 {
                    break;
                }
                brute[b] += 1;
            }
        }
        if sweep != brute {
            ok = false;
            detail.push(format!("seed {seed}: sweep != brute force"));
        }
    }
    detail.push("sweep ≡ brute force over 20 seeds".into());

    // Parallel sharding bit-identical to sequential.
    let s = gen_poisson(rate(5.0), 2e5, Seed(420)).unwrap();
    let seq = estimate_g2(&s, 0.02, 10.0).unwrap();
    for threads in [2usize, 3, 5, 8] {
        let par = pps_cli::parallel::estimate_g2_parallel(&s, 0.02, 10.0, threads).unwrap();
        if par.pair_counts() != seq.pair_counts() {
            ok = false;
            detail.push(format!("{threads} threads differ from sequential"));
        }
    }
    detail.push("parallel ≡ sequential for 2,3,5,8 threads".into());

    // Binary round trip bit-exact.
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.pps");
    let p2 = dir.path().join("b.pps");
    pps_cli::formats::write_stream_binary(&p1, &s).unwrap();
    let back = pps_cli::formats::read_stream(&p1).unwrap();
    pps_cli::formats::write_stream_binary(&p2, &back).unwrap();
    if std::fs::read(&p1).unwrap() != std::fs::read(&p2).unwrap() {
        ok = false;
        detail.push("binary round trip not byte-identical".into());
    } else {
        detail.push("binary round trip byte-identical".into());
    }

    // Full reproduce suite under its budget.
    let started = Instant::now();
    for recipe in [
        pps_cli::cli::Recipe::Fig1b,
        pps_cli::cli::Recipe::Fig3,
        pps_cli::cli::Recipe::Fig4c,
    ] {
        let code = pps_cli::reproduce::run(recipe, dir.path()).unwrap();
        if code != 0 {
            ok = false;
            detail.push(format!("reproduce recipe exited {code}"));
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    if elapsed >= 600.0 {
        ok = false;
    }
    detail.push(format!("reproduce suite {elapsed:.1}s (< 600s)"));

    report("C11 engineering", ok, &detail.join("; "));
}
