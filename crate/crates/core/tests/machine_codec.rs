//! Cross-checks the counting machine against the software decoder: on
//! every input the two must agree bit for bit — same halting set, same
//! decoded value, same number of program bits consumed.

use std::collections::HashSet;

use chaitin_ensemble::bits::BitString;
use chaitin_ensemble::codec::{self, CodecError};
use chaitin_ensemble::machine::builtin::counting_machine_spec;
use chaitin_ensemble::machine::{run, MachineSpec, RunOutcome, DEFAULT_STEP_LIMIT};
use chaitin_ensemble::prefix::{generation_stats, CodeFamily};
use num_bigint::BigUint;

/// All bit strings of exactly `len` bits, counted up in numeric order.
fn strings_of_length(len: u32) -> impl Iterator<Item = BitString> {
    (0u64..1 << len).map(move |v| {
        BitString::from_bits((0..len).rev().map(move |i| v >> i & 1 == 1))
    })
}

/// Splitmix64: a tiny deterministic generator for reproducible sampling.
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

/// Runs the machine on `program` and checks it lands exactly where the
/// decoder says it should.
fn check_one(spec: &MachineSpec, program: &BitString) {
    let outcome = run(spec, program, DEFAULT_STEP_LIMIT);
    match codec::decode(program) {
        Ok(decoded) => match outcome {
            RunOutcome::Halted { output, program_bits_read, .. } => {
                let n_ones = BigUint::from(output.len());
                assert!(output.iter().all(|b| b), "program {program}: output not all ones");
                assert_eq!(n_ones, decoded.n, "program {program}: value mismatch");
                assert_eq!(
                    program_bits_read,
                    decoded.consumed,
                    "program {program}: consumption mismatch"
                );
            }
            other => panic!("program {program}: decoder halts but machine gave {other:?}"),
        },
        Err(CodecError::InsufficientBits { available }) => {
            assert_eq!(available, program.len(), "program {program}");
            assert_eq!(
                outcome,
                RunOutcome::ProgramExhausted { bits_available: program.len() },
                "program {program}: decoder starves but machine did not"
            );
        }
        Err(other) => panic!("program {program}: unexpected decode error {other:?}"),
    }
}

#[test]
fn exhaustive_agreement_up_to_14_bits() {
    let spec = counting_machine_spec();
    let mut halted_per_level = vec![0u64; 15];
    for len in 0..=14u32 {
        for program in strings_of_length(len) {
            check_one(&spec, &program);
            if codec::decode(&program).is_ok() {
                halted_per_level[len as usize] += 1;
            }
        }
    }

    // The halting counts must equal the tree census: a string halts iff
    // its node is red or white, i.e. everything except the black count.
    let stats = generation_stats(&CodeFamily::Counting, 14).unwrap();
    for s in &stats {
        let halted = BigUint::from(halted_per_level[s.level as usize]);
        let expected = (BigUint::from(1u32) << s.level) - &s.m_black;
        assert_eq!(halted, expected, "level {}", s.level);
    }
}

#[test]
fn random_long_programs_agree() {
    let spec = counting_machine_spec();
    let mut rng = SplitMix(0x5eed_cafe_0000_0001);
    for _ in 0..500 {
        let len = 15 + (rng.next() % 6) as u32; // 15..=20
        let word = rng.next();
        let program =
            BitString::from_bits((0..len).rev().map(|i| word >> (i % 64) & 1 == 1));
        check_one(&spec, &program);
    }
}

#[test]
fn consumed_words_form_a_prefix_free_set() {
    let spec = counting_machine_spec();
    let mut consumed_words: HashSet<BitString> = HashSet::new();
    for len in 0..=14u32 {
        for program in strings_of_length(len) {
            if let RunOutcome::Halted { program_bits_read, .. } =
                run(&spec, &program, DEFAULT_STEP_LIMIT)
            {
                consumed_words.insert(program.prefix(program_bits_read));
            }
        }
    }

    // No consumed word may be a proper prefix of another.
    for word in &consumed_words {
        for cut in 0..word.len() {
            assert!(
                !consumed_words.contains(&word.prefix(cut)),
                "{} has a halting proper prefix",
                word
            );
        }
    }

    // And the words are exactly the code words the enumerator lists.
    let listed: HashSet<BitString> = codec::enumerate_programs(14)
        .unwrap()
        .into_iter()
        .map(|(bits, _)| bits)
        .collect();
    assert_eq!(consumed_words, listed);
}

#[test]
fn machine_runs_are_reproducible() {
    let spec = counting_machine_spec();
    for text in ["", "1", "11100110100", "11101111111110", "110", "00"] {
        let program: BitString = text.parse().unwrap();
        let a = run(&spec, &program, DEFAULT_STEP_LIMIT);
        let b = run(&spec, &program, DEFAULT_STEP_LIMIT);
        assert_eq!(a, b, "program {text:?}");
    }
}
