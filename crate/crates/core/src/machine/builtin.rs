//! Ready-made machines: the unary expander and the counting machine.
//!
//! The **expander** starts from a binary numeral pre-loaded on the work
//! tape (least-significant bit under the head, growing rightward) and
//! halts with that many `1`s written to the right of the numeral's place.
//! It repeatedly decrements the numeral and appends one mark per count,
//! erasing its scratch when the numeral hits zero.
//!
//! The **counting machine** reads a self-delimiting code word (see
//! [`crate::codec`]) from the program tape and halts with the decoded
//! value written in unary.  It bootstraps a three-cell measuring gauge for
//! the first width field, then alternates two phases:
//!
//! 1. **copy** — overwrite the current run of `1`s (which has exactly the
//!    next field's width) with the field's bits, building a binary numeral
//!    with its low bit leftmost;
//! 2. **expand** — run the expander states to turn that numeral into a run
//!    of `1`s, which is simultaneously the candidate output *and* the
//!    gauge for the following field.
//!
//! Between phases it parks the program head on the flag bit: a `1` means
//! another field follows (and doubles as that field's leading bit), while
//! a `0` makes the machine halt, leaving the current run as the output.
//! The machine therefore consumes exactly the code word and never looks
//! past it, so the set of inputs it accepts is prefix-free.

use super::MachineSpec;

/// Unary expander: turns the pre-loaded numeral into that many `1`s.
///
/// The numeral reads least-significant-bit first from the head's starting
/// cell.  The program tape is ignored (run it with an empty program).
const EXPANDER_TABLE: &str = "\
start scan_right
# Walk to the numeral's end and drop a 0 separator after it.
scan_right      0 *   0 R scan_right      S
scan_right      1 *   1 R scan_right      S
scan_right      B *   0 R check_ones      S
# Return leftward over the marks emitted so far.
check_ones      B *   B L check_ones      S
check_ones      1 *   1 L check_ones      S
check_ones      0 *   0 L check_num       S
# Cross the numeral looking for a surviving 1.
check_num       0 *   0 L check_num       S
check_num       1 *   1 L check_num_seen  S
check_num       B *   B R cleanup         S
check_num_seen  0 *   0 L check_num_seen  S
check_num_seen  1 *   1 L check_num_seen  S
check_num_seen  B *   B R dec             S
# Binary decrement, low bit first: flip 0s until the first 1.
dec             0 *   1 R dec             S
dec             1 *   0 R seek_end        S
dec             B *   B R H               S
# Append one mark past the last one.
seek_end        0 *   0 R seek_end        S
seek_end        1 *   1 R seek_end        S
seek_end        B *   1 R check_ones      S
# Numeral exhausted: erase it (and the separator), halt on the marks.
cleanup         0 *   B R cleanup         S
cleanup         1 *   1 L H               S
cleanup         B *   B R H               S
";

/// Counting machine: decodes one code word from the program tape into a
/// unary run of `1`s.
const COUNTING_TABLE: &str = "\
start boot
# Step over the program tape's leading blank, then split on the first bit.
boot            B B   B R boot            A
boot            B 0   B L first_zero      A
boot            B 1   B L first_one       A
boot            0 *   0 R H               S
boot            1 *   1 R H               S
# 00 -> empty output; 01 -> a single 1.
first_zero      B 0   B R H               S
first_zero      B 1   1 R H               S
first_zero      B *   B R H               S
first_zero      0 *   0 R H               S
first_zero      1 *   1 R H               S
# 10 -> 11; 11 -> build the three-cell gauge for the first width field.
first_one       B 0   1 L pair            S
first_one       B 1   1 L gauge_b         A
first_one       B *   B R H               S
first_one       0 *   0 R H               S
first_one       1 *   1 R H               S
pair            B *   1 R H               S
pair            0 *   0 R H               S
pair            1 *   1 R H               S
gauge_b         B *   1 L gauge_c         S
gauge_b         0 *   0 R H               S
gauge_b         1 *   1 R H               S
gauge_c         B *   1 L gauge_back      S
gauge_c         0 *   0 R H               S
gauge_c         1 *   1 R H               S
gauge_back      B *   B R cleanup         S
gauge_back      0 *   0 R H               S
gauge_back      1 *   1 R H               S
# Dispatch hub: erase spent scratch rightward; on reaching the run of 1s,
# read the flag bit -- 0 halts (the run is the output), 1 starts a copy.
cleanup         0 *   B R cleanup         S
cleanup         1 0   1 L H               S
cleanup         1 1   1 R seek_gauge      S
cleanup         1 B   1 R H               S
cleanup         B *   B R H               S
# Park on the rightmost cell of the run, then copy the field backwards:
# stream order is most-significant first, so the numeral lands low-bit
# leftmost, ready for the expander.
seek_gauge      1 *   1 R seek_gauge      S
seek_gauge      B *   B L copy            S
seek_gauge      0 *   0 R H               S
copy            1 0   0 L copy            A
copy            1 1   1 L copy            A
copy            1 B   1 R H               S
copy            B *   B R scan_right      S
copy            0 *   0 R H               S
# Expander core (program head stays parked on the flag bit throughout).
scan_right      0 *   0 R scan_right      S
scan_right      1 *   1 R scan_right      S
scan_right      B *   0 R check_ones      S
check_ones      B *   B L check_ones      S
check_ones      1 *   1 L check_ones      S
check_ones      0 *   0 L check_num       S
check_num       0 *   0 L check_num       S
check_num       1 *   1 L check_num_seen  S
check_num       B *   B R cleanup         S
check_num_seen  0 *   0 L check_num_seen  S
check_num_seen  1 *   1 L check_num_seen  S
check_num_seen  B *   B R dec             S
dec             0 *   1 R dec             S
dec             1 *   0 R seek_end        S
dec             B *   B R H               S
seek_end        0 *   0 R seek_end        S
seek_end        1 *   1 R seek_end        S
seek_end        B *   1 R check_ones      S
";

/// The unary expander (7 states).  Pre-load the work tape with a binary
/// numeral, low bit under the head; run with an empty program.
pub fn expander_machine() -> MachineSpec {
    EXPANDER_TABLE.parse().expect("built-in expander table is well-formed")
}

/// The counting machine (16 states): reads one self-delimiting code word,
/// halts with the decoded value in unary.
pub fn counting_machine_spec() -> MachineSpec {
    COUNTING_TABLE.parse().expect("built-in counting table is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::machine::{run, run_with_work, RunOutcome, DEFAULT_STEP_LIMIT};

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn expand(work: &str) -> RunOutcome {
        run_with_work(&expander_machine(), &bits(work), &bits(""), DEFAULT_STEP_LIMIT)
    }

    fn count(program: &str) -> RunOutcome {
        run(&counting_machine_spec(), &bits(program), DEFAULT_STEP_LIMIT)
    }

    fn ones(n: usize) -> String {
        "1".repeat(n)
    }

    #[test]
    fn expander_state_budget() {
        assert_eq!(expander_machine().state_count(), 7);
        assert!(expander_machine().state_count() >= 5);
    }

    #[test]
    fn expander_examples() {
        match expand("01") {
            RunOutcome::Halted { output, .. } => assert_eq!(output.to_string(), "11"),
            other => panic!("unexpected outcome {other:?}"),
        }
        match expand("0") {
            RunOutcome::Halted { output, .. } => assert_eq!(output.to_string(), ""),
            other => panic!("unexpected outcome {other:?}"),
        }
        match expand("1001") {
            RunOutcome::Halted { output, .. } => assert_eq!(output.to_string(), ones(9)),
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn expander_matches_numeral_value() {
        for value in 0u32..40 {
            // Low bit first, no sign: the numeral as the tape expects it.
            let numeral: String =
                (0..6).map(|i| if value >> i & 1 == 1 { '1' } else { '0' }).collect();
            match expand(&numeral) {
                RunOutcome::Halted { output, .. } => {
                    assert_eq!(output.to_string(), ones(value as usize), "value {value}");
                }
                other => panic!("value {value}: unexpected outcome {other:?}"),
            }
        }
    }

    #[test]
    fn counting_state_budget() {
        assert_eq!(counting_machine_spec().state_count(), 16);
    }

    #[test]
    fn counting_short_words() {
        for (program, n, consumed) in
            [("00", 0usize, 2usize), ("01", 1, 2), ("10", 2, 2), ("110", 3, 3)]
        {
            match count(program) {
                RunOutcome::Halted { output, program_bits_read, .. } => {
                    assert_eq!(output.to_string(), ones(n), "program {program}");
                    assert_eq!(program_bits_read, consumed, "program {program}");
                }
                other => panic!("program {program}: unexpected outcome {other:?}"),
            }
        }
    }

    #[test]
    fn counting_ladder_words() {
        for (program, n, consumed) in [
            ("111000", 4usize, 6usize),
            ("1110011010", 13, 10),
            ("1110010000", 8, 10),
            ("11100110100", 13, 10), // junk suffix is ignored
        ] {
            match count(program) {
                RunOutcome::Halted { output, program_bits_read, .. } => {
                    assert_eq!(output.to_string(), ones(n), "program {program}");
                    assert_eq!(program_bits_read, consumed, "program {program}");
                }
                other => panic!("program {program}: unexpected outcome {other:?}"),
            }
        }
    }

    #[test]
    fn counting_exhausts_on_bare_prefix() {
        assert_eq!(count("11"), RunOutcome::ProgramExhausted { bits_available: 2 });
        assert_eq!(count("1"), RunOutcome::ProgramExhausted { bits_available: 1 });
        assert_eq!(count(""), RunOutcome::ProgramExhausted { bits_available: 0 });
        assert_eq!(count("1110"), RunOutcome::ProgramExhausted { bits_available: 4 });
    }

    #[test]
    fn counting_agrees_with_codec_spot_checks() {
        use num_bigint::BigUint;
        for n in (0u32..64).chain([100, 120, 127]) {
            let word = crate::codec::encode(&BigUint::from(n));
            match count(&word.bits.to_string()) {
                RunOutcome::Halted { output, program_bits_read, .. } => {
                    assert_eq!(output.len(), n as usize, "n = {n}");
                    assert!(output.iter().all(|b| b), "n = {n}");
                    assert_eq!(program_bits_read, word.bits.len(), "n = {n}");
                }
                other => panic!("n = {n}: unexpected outcome {other:?}"),
            }
        }
    }

    #[test]
    fn tables_round_trip_through_text() {
        for spec in [expander_machine(), counting_machine_spec()] {
            let reparsed: MachineSpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, reparsed);
        }
    }
}
