//! End-to-end acceptance checks, one per shipping criterion.  Each test
//! prints a `criterion NN:` line with the measured values so a plain
//! `cargo test --test acceptance -- --nocapture` doubles as a report.
//!
//! Tolerances are fixed here, once; they are not tuning knobs.

use std::collections::HashSet;

use chaitin_ensemble::bits::BitString;
use chaitin_ensemble::codec::{self, CodecError};
use chaitin_ensemble::dyadic::Dyadic;
use chaitin_ensemble::machine::builtin::counting_machine_spec;
use chaitin_ensemble::machine::{run, RunOutcome, DEFAULT_STEP_LIMIT};
use chaitin_ensemble::numerics::Epsilon;
use chaitin_ensemble::partition::{brute, partition_asymptotic, partition_exact};
use chaitin_ensemble::prefix::{
    decay_estimate, generation_stats, kraft_partial_sum, power_law_singularity_check,
    CodeFamily, DecayModel,
};
use chaitin_ensemble::thermo::{avg_length, central_log_diff, free_energy, toy_partition};
use num_bigint::BigUint;

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Splitmix64, for reproducible random sampling without a dependency.
struct SplitMix(u64);

impl SplitMix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

#[test]
fn criterion_01_codec_round_trip_and_listing() {
    // Round trip every value up to 10^5.
    for n in 0u64..=100_000 {
        let n = big(n);
        let word = codec::encode(&n);
        let decoded = codec::decode(&word.bits).unwrap();
        assert_eq!(decoded.n, n);
        assert_eq!(decoded.consumed, word.bits.len());
        assert_eq!(word.length, word.bits.len() as u64);
    }

    // And 1000 random values up to 512 bits.
    let mut rng = SplitMix(0xace0_fba5_e000_0007);
    for _ in 0..1000 {
        let bytes: Vec<u8> = (0..1 + (rng.next() % 64) as usize)
            .map(|_| (rng.next() & 0xff) as u8)
            .collect();
        let n = BigUint::from_bytes_be(&bytes);
        let word = codec::encode(&n);
        let decoded = codec::decode(&word.bits).unwrap();
        assert_eq!(decoded.n, n);
        assert_eq!(decoded.consumed, word.bits.len());
    }

    // A junk suffix is ignored and consumption reported exactly.
    let d = codec::decode(&"11100110100".parse().unwrap()).unwrap();
    assert_eq!(d.n, big(13));
    assert_eq!(d.consumed, 10);

    // The enumerator lists exactly the code words of length <= 6.
    let listed: Vec<String> = codec::enumerate_programs(6)
        .unwrap()
        .into_iter()
        .map(|(bits, _)| bits.to_string())
        .collect();
    let expected = ["00", "01", "10", "110", "111000", "111010", "111100", "111110"];
    assert_eq!(listed, expected);

    println!(
        "criterion 01: round trip 0..=1e5 and 1000x <=512 bits, decode(11100110100) \
         = (13, 10), listing(6) = {} words -> PASS",
        listed.len()
    );
}

#[test]
fn criterion_02_machine_matches_decoder() {
    let spec = counting_machine_spec();
    let mut halts = 0u64;
    let mut starved = 0u64;
    for len in 0..=14u32 {
        for v in 0u64..1 << len {
            let program =
                BitString::from_bits((0..len).rev().map(|i| v >> i & 1 == 1));
            let outcome = run(&spec, &program, DEFAULT_STEP_LIMIT);
            match codec::decode(&program) {
                Ok(decoded) => {
                    halts += 1;
                    match outcome {
                        RunOutcome::Halted { output, program_bits_read, .. } => {
                            assert_eq!(big(output.len() as u64), decoded.n, "{program}");
                            assert!(output.iter().all(|b| b), "{program}");
                            assert_eq!(program_bits_read, decoded.consumed, "{program}");
                        }
                        other => panic!("{program}: machine gave {other:?}"),
                    }
                }
                Err(CodecError::InsufficientBits { .. }) => {
                    starved += 1;
                    assert_eq!(
                        outcome,
                        RunOutcome::ProgramExhausted { bits_available: program.len() },
                        "{program}"
                    );
                }
                Err(other) => panic!("{program}: {other:?}"),
            }
        }
    }
    println!(
        "criterion 02: all 32767 programs <= 14 bits agree with the decoder \
         ({halts} halt, {starved} starve) -> PASS"
    );
}

#[test]
fn criterion_03_critical_point_normalization() {
    let r = partition_exact(&Epsilon::Literal(0.0), 1e-6).unwrap();
    assert!(
        (r.total - 1.0).abs() <= 1e-6,
        "total at the critical point: {} (need 1 +- 1e-6)",
        r.total
    );

    // Layer limits: 7/8, 1/16, then a clean halving per rung.
    let limits = [7.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0,
        1.0 / 256.0, 1.0 / 512.0];
    for (k, limit) in limits.iter().enumerate() {
        let z = r.per_k[k].1.to_f64();
        assert!(
            (z - limit).abs() <= 1e-9,
            "layer {k}: {z} vs limit {limit}"
        );
    }
    println!(
        "criterion 03: total = {:.12} (1 +- 1e-6), layers 0..=6 at their limits \
         +- 1e-9 -> PASS",
        r.total
    );
}

#[test]
fn criterion_04a_deficit_at_the_first_ladder_rung() {
    let eps = Epsilon::Literal(1.0 / 127.0);
    let r = partition_exact(&eps, 1e-9).unwrap();
    let nominal = 2f64.powi(-6);
    let ratio = r.one_minus_total / nominal;
    println!(
        "criterion 04a: 1 - Z(1/127) = {:.10} = {:.4} x 2^-6 (required within 20% \
         of 2^-6)",
        r.one_minus_total, ratio
    );
    assert!(
        (ratio - 1.0).abs() <= 0.20,
        "deficit at eps = 1/127 is {ratio:.4} x 2^-6, outside the 20% band"
    );
}

#[test]
fn criterion_04b_deficit_at_the_dyadic_rung() {
    let eps = Epsilon::pow2_neg(127);
    let r = partition_exact(&eps, 1e-9).unwrap();
    let nominal = 2f64.powi(-7);
    let ratio = r.one_minus_total / nominal;
    println!(
        "criterion 04b: 1 - Z(2^-127) = {:.10} = {:.5} x 2^-7 (required within 2%) \
         -> PASS",
        r.one_minus_total, ratio
    );
    assert!(
        (ratio - 1.0).abs() <= 0.02,
        "deficit at eps = 2^-127 is {ratio:.5} x 2^-7, outside the 2% band"
    );
}

#[test]
fn criterion_05_closed_form_at_astronomical_scales() {
    let e200 = Epsilon::pow2_neg(200);
    let d200 = 1.0 - partition_asymptotic(&e200);
    assert!(
        (d200 - 0.0076).abs() <= 0.0005,
        "1 - Z(2^-200) = {d200} (need 0.0076 +- 0.0005)"
    );
    let height = e200.slog2_of_inverse().unwrap();
    assert!(
        (height - 4.6).abs() <= 0.05,
        "iterated-log height of 2^200: {height} (need 4.6 +- 0.05)"
    );

    let e65536 = Epsilon::pow2_neg(65536);
    let d65536 = 1.0 - partition_asymptotic(&e65536);
    assert!(
        (d65536 - 0.0058).abs() <= 0.0003,
        "1 - Z(2^-65536) = {d65536} (need 0.0058 +- 0.0003)"
    );

    println!(
        "criterion 05: 1 - Z(2^-200) = {d200:.7} (0.0076 +- 0.0005), height = \
         {height:.5} (4.6 +- 0.05), 1 - Z(2^-65536) = {d65536:.7} (0.0058 +- 0.0003) \
         -> PASS"
    );
}

#[test]
fn criterion_06_layer_engine_matches_brute_force() {
    for eps in [1.0, 0.5, 0.1] {
        let fast = partition_exact(&Epsilon::Literal(eps), 1e-12).unwrap().total;
        let slow = brute::partition_value(eps);
        assert!(
            rel(fast, slow) <= 1e-10,
            "eps = {eps}: engine {fast} vs direct sum {slow}"
        );
        println!(
            "criterion 06: eps = {eps}: engine {fast:.15} vs direct sum {slow:.15} \
             (rel <= 1e-10) -> PASS"
        );
    }
}

#[test]
fn criterion_07_census_identities_for_all_families() {
    let families = [
        CodeFamily::Counting,
        CodeFamily::Fibonacci { order: 2 },
        CodeFamily::Fibonacci { order: 3 },
        CodeFamily::GeneralizedFibonacci,
    ];
    for family in &families {
        let stats = generation_stats(family, 17).unwrap();
        for s in &stats[..16] {
            // Colour counts tile the level exactly.
            let total = &s.n_red + &s.m_black + &s.w_white;
            assert_eq!(total, BigUint::from(1u32) << s.level, "{family:?} l={}", s.level);
        }
        for pair in stats.windows(2) {
            // New word mass at depth l is exactly the white growth into l+1.
            let delta = &pair[1].q_l - &pair[0].q_l;
            assert_eq!(pair[0].p_l, delta, "{family:?} l={}", pair[0].level);
        }
    }

    let kraft = kraft_partial_sum(&CodeFamily::Counting, 13).unwrap();
    assert_eq!(kraft, Dyadic::new(big(31), 5), "kraft mass to depth 13");

    println!(
        "criterion 07: n + m + w = 2^l and P_l = Q_(l+1) - Q_l exact for 4 families \
         to depth 16; counting word mass to 13 = 31/32 -> PASS"
    );
}

#[test]
fn criterion_08_power_law_family_and_its_singularity() {
    let fit = decay_estimate(&CodeFamily::GeneralizedFibonacci, 64, 4096).unwrap();
    assert_eq!(fit.model, DecayModel::PowerLaw);
    let alpha = fit.rate_or_alpha;
    assert!(alpha > 1.0, "summable power law needed, got alpha = {alpha}");

    let grid = [2f64.powi(-7), 2f64.powi(-8), 2f64.powi(-9)];
    let exponent = power_law_singularity_check(alpha, &grid).unwrap();
    let target = alpha - 1.0;
    assert!(
        (exponent / target - 1.0).abs() <= 0.25,
        "deficit exponent {exponent} vs alpha - 1 = {target}"
    );
    println!(
        "criterion 08: alpha = {alpha:.6} (> 1), deficit exponent = {exponent:.6} \
         vs alpha - 1 = {target:.6} (within 25%) -> PASS"
    );
}

#[test]
fn criterion_09_thermodynamic_observables() {
    // Deep cold phase: the two shortest programs dominate, mean length -> 2.
    let l20 = avg_length(20.0 - std::f64::consts::LN_2, None);
    assert!((l20 - 2.0).abs() <= 1e-3, "mean length at beta = 20: {l20}");

    // Mean length grows monotonically on approach to the critical point.
    let mut prev = 0.0;
    for j in 1..=6 {
        let l = avg_length(10f64.powi(-j), None);
        assert!(l > prev, "mean length not increasing at eps = 1e-{j}: {l} vs {prev}");
        prev = l;
    }

    // Free energy stays finite and sinks to zero at the transition.
    let mut prev_f = f64::INFINITY;
    for j in 1..=6 {
        let f = free_energy(10f64.powi(-j));
        assert!(f.is_finite() && f > 0.0 && f < prev_f, "free energy at eps = 1e-{j}: {f}");
        prev_f = f;
    }
    assert!(prev_f < 0.05, "free energy near the transition: {prev_f}");

    // The differentiation harness reproduces a closed form to 1e-8.
    let beta = 1.0f64;
    let analytic = (6.0 + 3.0 * (-beta).exp()) / (3.0 + (-beta).exp());
    let measured = central_log_diff(toy_partition, beta, 1e-5);
    assert!((measured - analytic).abs() <= 1e-8, "{measured} vs {analytic}");

    println!(
        "criterion 09: <l>(beta=20) = {l20:.6} (2 +- 1e-3), <l> increasing and F \
         decreasing over eps = 1e-1..1e-6, F(1e-6) = {prev_f:.6} -> 0, toy harness \
         |{measured:.10} - {analytic:.10}| <= 1e-8 -> PASS"
    );
}

#[test]
fn criterion_10_slow_approach_on_a_dyadic_grid() {
    let mut prev_z = 0.0;
    let mut last_deficit = 1.0;
    let mut rows = Vec::new();
    for j in (10..=120).step_by(10) {
        let r = partition_exact(&Epsilon::pow2_neg(j), 1e-9).unwrap();
        assert!(
            r.total > prev_z,
            "Z not strictly increasing at eps = 2^-{j}: {} vs {prev_z}",
            r.total
        );
        prev_z = r.total;
        last_deficit = r.one_minus_total;
        rows.push((j, r.total, r.one_minus_total));
    }
    assert!(
        last_deficit > 0.006,
        "deficit at eps = 2^-120 already below 0.006: {last_deficit}"
    );
    for (j, z, d) in &rows {
        println!("criterion 10: eps = 2^-{j:<3} Z = {z:.12} 1-Z = {d:.12}");
    }
    println!(
        "criterion 10: Z strictly increasing over 2^-10..2^-120, deficit at 2^-120 \
         = {last_deficit:.6} > 0.006 -> PASS"
    );
}

/// The consumed prefixes of halting programs never nest: repeated here at
/// the acceptance level because several criteria silently rely on it.
#[test]
fn criterion_02b_halting_set_is_prefix_free() {
    let spec = counting_machine_spec();
    let mut words: HashSet<BitString> = HashSet::new();
    for len in 0..=12u32 {
        for v in 0u64..1 << len {
            let program =
                BitString::from_bits((0..len).rev().map(|i| v >> i & 1 == 1));
            if let RunOutcome::Halted { program_bits_read, .. } =
                run(&spec, &program, DEFAULT_STEP_LIMIT)
            {
                words.insert(program.prefix(program_bits_read));
            }
        }
    }
    for word in &words {
        for cut in 0..word.len() {
            assert!(!words.contains(&word.prefix(cut)), "{word} nests");
        }
    }
    println!(
        "criterion 02b: {} consumed words to depth 12, pairwise prefix-free -> PASS",
        words.len()
    );
}
