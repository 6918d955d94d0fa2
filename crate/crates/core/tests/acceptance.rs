//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `--nocapture`). Run with
//! `cargo test --test acceptance`.
//!
//! Criterion 2 pins the literature figure 3e-12 for the unambiguous
//! discrimination success at (M=2000, nbar=10000). Exact evaluation of the
//! published formula gives 3.034e-21 — verified here against two
//! independent routes and frozen 60-digit references — so that single
//! assertion is expected to fail; it is kept as stated rather than
//! silently retuned. See the test body for the numbers.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use y00sim::attacks::{break_conventional, heterodyne_kpa, AttackConfig};
use y00sim::channel::derive_rng;
use y00sim::keystream::{maximal_taps, BitSource, Lfsr, SecretKey};
use y00sim::modem::{design_levels, Scheme};
use y00sim::receiver::neighbor_error_prob;
use y00sim::secmetrics::{
    bayes_success_symmetric, discriminate_symmetric, helstrom_binary_mixed,
    helstrom_binary_pure, max_distance, qum_success, DistanceParams,
};
use y00sim::sim::{ber_distance_sweep, run_eye, run_transmission, LinkConfig};
use y00sim::Error;

fn pass(criterion: u32, detail: &str) {
    println!("ACCEPTANCE criterion {criterion}: PASS - {detail}");
}

/// Criterion 1: the neighbor-error design figure and its Monte Carlo
/// oracle at the designed operating point (amplitudes 80..100, M = 100,
/// intensity scheme).
#[test]
fn criterion_01_neighbor_error_figure() {
    let table = design_levels(80.0, 100.0, 100, Scheme::Intensity).unwrap();
    let closed = neighbor_error_prob(table.delta(), table.mid_sigma(1.0)).unwrap();
    assert!(
        (closed - 0.460).abs() <= 0.005,
        "closed form {closed} vs 0.460 +/- 0.005"
    );

    // 1e7 two-neighbor trials over the mid-range pair with exact per-level
    // shot noise.
    let n = 10_000_000u64;
    let (i0, i1) = (94usize, 95usize);
    let mut rng = derive_rng(0xACCE_0001, 0);
    let d0 = Normal::new(table.intensity(i0), table.amplitude(i0)).unwrap();
    let d1 = Normal::new(table.intensity(i1), table.amplitude(i1)).unwrap();
    let threshold = (table.intensity(i0) + table.intensity(i1)) / 2.0;
    let mut errors = 0u64;
    for _ in 0..n {
        let upper: bool = rng.random();
        let y = if upper {
            d1.sample(&mut rng)
        } else {
            d0.sample(&mut rng)
        };
        if (y > threshold) != upper {
            errors += 1;
        }
    }
    let mc = errors as f64 / n as f64;
    let se = (closed * (1.0 - closed) / n as f64).sqrt();
    assert!(
        (mc - closed).abs() <= 3.0 * se,
        "Monte Carlo {mc} vs closed {closed} (3se = {})",
        3.0 * se
    );
    pass(1, &format!("closed {closed:.6}, Monte Carlo {mc:.6} within 3se"));
}

/// Criterion 2: the discrimination figures at (M=2000, nbar=10000).
///
/// All clauses are asserted as stated. The band [3e-13, 3e-11] around the
/// quoted literature value 3e-12 is EXPECTED TO FAIL: the formula
/// evaluates to 3.0340e-21 (two independent in-crate routes agree, and a
/// 60-digit arbitrary-precision evaluation of both the trigonometric sum
/// and the equivalent Poisson-sector identity gives 3.0340253663568716e-21;
/// the quoted exponent looks like a digit transposition of -21). The
/// remaining clauses — P_D < 1/M, the Bayes band, and the full ordering —
/// hold.
#[test]
fn criterion_02_discrimination_figures() {
    let start = std::time::Instant::now();
    let r = discriminate_symmetric(2000, 10_000.0).unwrap();
    assert!(
        r.p_qum < 5e-4,
        "P_D(QUM) {} must stay below 1/M = 5e-4",
        r.p_qum
    );
    assert!(
        (0.05..=0.6).contains(&r.p_bayes),
        "P(Bayes) {} outside [0.05, 0.6]",
        r.p_bayes
    );
    assert!(
        r.p_qum < r.p_guess && r.p_guess < r.p_bayes,
        "ordering P_D(QUM) < 1/M < P(Bayes) violated: {} vs {} vs {}",
        r.p_qum,
        r.p_guess,
        r.p_bayes
    );
    assert!(
        start.elapsed().as_secs_f64() < 10.0,
        "runtime {}s",
        start.elapsed().as_secs_f64()
    );
    let in_band = (3e-13..=3e-11).contains(&r.p_qum);
    assert!(
        in_band,
        "P_D(QUM)(2000, 10000) = {:.6e} is outside the pinned literature band \
         [3e-13, 3e-11]. The exact value of the success-probability formula at \
         this point is 3.0340253663568716e-21 (60-digit reference; the in-crate \
         sector and trigonometric routes agree) — about nine orders below the \
         quoted 3e-12, consistent with an exponent digit transposition in the \
         quote. The remaining clauses of this criterion all hold.",
        r.p_qum
    );
    pass(2, &format!("P_D {:.3e}, Bayes {:.3}", r.p_qum, r.p_bayes));
}

/// Criterion 3: the binary-ensemble analytic oracle, 20 points.
#[test]
fn criterion_03_qum_binary_oracle() {
    for i in 0..20 {
        let nbar = 0.1 + (20.0 - 0.1) * i as f64 / 19.0;
        let expect = -(-2.0 * nbar).exp_m1();
        let got = qum_success(2, nbar).unwrap();
        assert!(
            (got - expect).abs() / expect < 1e-10,
            "nbar {nbar}: {got} vs {expect}"
        );
    }
    pass(3, "P_D(2, nbar) = 1 - e^(-2 nbar) to 1e-10 relative at 20 points");
}

/// Criterion 4: error-exponent slopes for binary +/-alpha signals.
#[test]
fn criterion_04_error_exponents() {
    let ss: Vec<f64> = (0..9).map(|i| 2.0 + 0.5 * i as f64).collect();
    let slope = |ys: &[f64]| {
        let n = ss.len() as f64;
        let mx = ss.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let num: f64 = ss.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = ss.iter().map(|x| (x - mx) * (x - mx)).sum();
        num / den
    };
    let helstrom: Vec<f64> = ss
        .iter()
        .map(|&s| {
            helstrom_binary_pure((-2.0 * s).exp(), 0.5, 0.5)
                .unwrap()
                .ln()
        })
        .collect();
    let s_h = slope(&helstrom);
    assert!((s_h + 4.0).abs() <= 0.2, "Helstrom log-slope {s_h}");

    let homodyne: Vec<f64> = ss
        .iter()
        .map(|&s| {
            let x = 2.0 * s.sqrt();
            (0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)).ln()
        })
        .collect();
    let s_q = slope(&homodyne);
    assert!((s_q + 2.0).abs() <= 0.2, "homodyne log-slope {s_q}");
    pass(4, &format!("Helstrom slope {s_h:.3}, homodyne slope {s_q:.3}"));
}

/// Criterion 5: the conventional cipher breaks from exactly 2|K| bits and
/// refuses one bit less.
#[test]
fn criterion_05_conventional_break() {
    let start = std::time::Instant::now();
    for key_len in [8usize, 12, 16, 20] {
        let mut rng = derive_rng(0xACCE_0005, key_len as u64);
        let total = 2 * key_len + 1000;
        let plaintext: Vec<bool> = (0..total).map(|_| rng.random()).collect();
        let seed = rng.random_range(1..(1u64 << key_len));
        let mut lfsr = Lfsr::new(
            maximal_taps(key_len as u32).unwrap(),
            &SecretKey::from_u64(seed, key_len as u32).unwrap(),
        )
        .unwrap();
        let keystream = lfsr.next_bits(total);
        let ciphertext: Vec<bool> = plaintext
            .iter()
            .zip(&keystream)
            .map(|(x, k)| x ^ k)
            .collect();

        let brk = break_conventional(&plaintext[..2 * key_len], &ciphertext, key_len).unwrap();
        assert_eq!(
            brk.plaintext, plaintext,
            "K={key_len}: residual must decode error-free"
        );
        assert_eq!(brk.key.bits(), &keystream[..key_len], "K={key_len}: key");

        match break_conventional(&plaintext[..2 * key_len - 1], &ciphertext, key_len) {
            Err(Error::InsufficientBits { .. }) => {}
            other => panic!("K={key_len}: expected failure at 2K-1 bits, got {other:?}"),
        }
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 5.0, "runtime {dt}s");
    pass(5, &format!("keys recovered for K in 8,12,16,20 in {dt:.2}s"));
}

/// Criterion 6: the quantum attack degrades at the designed operating
/// point — |K| = 16, M = 64, a 2|K|-bit known-plaintext budget, 200 trials.
#[test]
fn criterion_06_y00_attack_degradation() {
    let start = std::time::Instant::now();
    let mut cfg = AttackConfig::new(16, 64);
    cfg.known_plaintext_bits = 32; // 2|K| generator bits -> 4 known symbols
    cfg.trials = 200;
    cfg.residual_symbols = 1000;
    cfg.master_seed = 0xACCE_0006;
    let rep = heterodyne_kpa(&cfg).unwrap();
    let brute = rep.brute_force.expect("within the brute-force cap");
    assert!(
        brute.rank1_fraction < 0.5,
        "true-key rank 1 in {:.1}% of trials (need < 50%)",
        100.0 * brute.rank1_fraction
    );
    assert!(rep.empirical_j >= 3, "empirical J {}", rep.empirical_j);
    assert!(
        (0.4..=0.6).contains(&brute.mean_residual_ber_best_wrong),
        "residual BER {}",
        brute.mean_residual_ber_best_wrong
    );
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 600.0, "runtime {dt}s");
    pass(
        6,
        &format!(
            "rank-1 {:.1}%, J = {}, residual BER {:.3} in {dt:.1}s",
            100.0 * brute.rank1_fraction,
            rep.empirical_j,
            brute.mean_residual_ber_best_wrong
        ),
    );
}

/// Criterion 7: the demonstration profile — 20-bit key, M = 128, OSK on,
/// 20 km at 0.2 dB/km. Bob's eye opens and he is error-free over 1e6 bits;
/// Eve's eye is closed and her symbol error is large.
#[test]
fn criterion_07_demonstration_profile() {
    let start = std::time::Instant::now();
    let cfg = LinkConfig {
        master_seed: 0xACCE_0007,
        ..LinkConfig::default()
    };
    assert_eq!(cfg.key_len, 20);
    assert_eq!(cfg.m, 128);
    assert!(cfg.osk);
    let report = run_transmission(&cfg).unwrap();
    assert_eq!(report.n_bits, 1_000_000);
    assert_eq!(report.bob.errors, 0, "Bob must be error-free at 20 km");
    assert!(
        report.eve_symbol.ber >= 0.4,
        "Eve per-symbol error {}",
        report.eve_symbol.ber
    );

    let eyes = run_eye(&cfg, 60_000, 4, 8, 64).unwrap();
    let bob_open = eyes.bob.opening.unwrap();
    let eve_open = eyes.eve.opening.unwrap();
    assert!(bob_open > 0.0, "Bob's eye opening {bob_open}");
    assert!(eve_open <= 0.0, "Eve's eye opening {eve_open}");
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 300.0, "runtime {dt}s");
    pass(
        7,
        &format!(
            "Bob errors 0/1e6, eye {bob_open:.1}; Eve error {:.3}, eye {eve_open:.1}; {dt:.1}s",
            report.eve_symbol.ber
        ),
    );
}

/// Criterion 8: the advantage condition holds at every simulated length up
/// to the closed-form maximum distance, the Monte Carlo crossing lands
/// within one sweep step of it, and the designed table reaches at least
/// 100 km at 0.2 dB/km.
#[test]
fn criterion_08_communication_distance() {
    let table = design_levels(80.0, 100.0, 100, Scheme::Intensity).unwrap();
    let closed = max_distance(&table, &DistanceParams::default()).unwrap();
    assert!(
        closed.max_km >= 100.0,
        "closed-form distance {} km",
        closed.max_km
    );

    let cfg = LinkConfig {
        m: 100,
        master_seed: 0xACCE_0008,
        ..LinkConfig::default()
    };
    let step = 20.0;
    let sweep = ber_distance_sweep(&cfg, step, 400.0, 1_000_000).unwrap();
    assert!((sweep.closed_form_max_km - closed.max_km).abs() < 1e-9);
    for p in &sweep.points {
        if p.km <= sweep.closed_form_max_km {
            assert!(
                p.bob_ber_mc < p.eve_bit_err_mc,
                "advantage lost at {} km: Bob {} vs Eve {}",
                p.km,
                p.bob_ber_mc,
                p.eve_bit_err_mc
            );
        }
    }
    let mc = sweep
        .mc_crossing_km
        .expect("the sweep extends past the closed-form crossing");
    assert!(
        (mc - sweep.closed_form_max_km).abs() <= step + 1e-9,
        "MC crossing {mc} vs closed form {} (step {step})",
        sweep.closed_form_max_km
    );
    pass(
        8,
        &format!(
            "closed-form max {:.1} km, MC crossing {mc} km (step {step})",
            sweep.closed_form_max_km
        ),
    );
}

/// Criterion 9: figures that are out of desk-scale reach are substituted
/// by property tests, as declared: the mixed-state bound is validated
/// against a truncation-refinement oracle at small scale, and the
/// collective-measurement claim is reported as its scalar ordering.
#[test]
fn criterion_09_desk_scale_substitutions() {
    // Truncation-refinement oracle within 1e-8 at M <= 4, alpha <= 2.
    let t = design_levels(1.0, 2.0, 4, Scheme::Intensity).unwrap();
    let base = helstrom_binary_mixed(&t, 40).unwrap();
    let refined = helstrom_binary_mixed(&t, 50).unwrap();
    assert!(
        (base - refined).abs() < 1e-8,
        "truncation drift {base} vs {refined}"
    );
    assert!((0.0..=0.5).contains(&base));

    // The collective-measurement figure is carried as the scalar ordering
    // only: individual success ~ 3e-21 at the operating scale, so a
    // 20-bit-key sequence measurement sits below pure key guessing.
    let single = qum_success(2000, 10_000.0).unwrap();
    let key_guess = 2f64.powi(-20);
    assert!(
        single < key_guess,
        "scalar ordering: {single} < 2^-20 = {key_guess}"
    );

    // Hardware line rates (1 Gbps demonstrated, 10 Gbps components) are
    // documentation only; the simulation makes no timing claims.
    pass(
        9,
        &format!("oracle drift {:.2e}; scalar ordering {single:.2e} < 2^-20", (base - refined).abs()),
    );
}

/// Criterion 10: cross-module invariant suites, including determinism
/// under varying worker counts.
#[test]
fn criterion_10_invariant_suites() {
    // The module-level suites run under `cargo test`; here the pieces that
    // span modules: identical attack reports from 1-thread and 4-thread
    // pools, and identical transmission reports across repeated runs.
    let mut cfg = AttackConfig::new(12, 64);
    cfg.trials = 30;
    cfg.residual_symbols = 200;
    cfg.master_seed = 0xACCE_0010;

    let pool1 = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let pool4 = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let a = pool1.install(|| serde_json::to_vec(&heterodyne_kpa(&cfg).unwrap()).unwrap());
    let b = pool4.install(|| serde_json::to_vec(&heterodyne_kpa(&cfg).unwrap()).unwrap());
    assert_eq!(a, b, "attack reports must not depend on worker count");

    let link = LinkConfig {
        n_bits: 20_000,
        master_seed: 0xACCE_0011,
        ..LinkConfig::default()
    };
    let x = serde_json::to_vec(&run_transmission(&link).unwrap()).unwrap();
    let y = serde_json::to_vec(&run_transmission(&link).unwrap()).unwrap();
    assert_eq!(x, y, "transmission reports must be reproducible");

    // Spot re-assertions of the per-module invariants exercised in depth
    // by the unit and property suites.
    let qum = qum_success(64, 50.0).unwrap();
    let bayes = bayes_success_symmetric(64, 50.0).unwrap();
    assert!(qum <= bayes && bayes <= 1.0);
    pass(10, "worker-count and rerun determinism, ordering spot checks");
}
