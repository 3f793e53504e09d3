//! Black-box tests of the `chaitin` binary: worked examples, output
//! formats, exit codes, config handling, and byte-for-byte determinism.

use std::process::{Command, Output};

use chaitin_ensemble::numerics::Epsilon;
use chaitin_ensemble::partition::partition_asymptotic;

fn chaitin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaitin"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

#[test]
fn encode_matches_the_worked_example() {
    let out = chaitin(&["encode", "13"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "1110011010\n");
}

#[test]
fn decode_reports_value_and_consumption() {
    let out = chaitin(&["decode", "110"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "n = 3\nconsumed = 3\n");

    let out = chaitin(&["decode", "11100110100"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "n = 13\nconsumed = 10\n");
}

#[test]
fn enumerate_lists_the_short_words() {
    let out = chaitin(&["enumerate", "--max-len", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().map(|l| l.trim()).collect();
    assert_eq!(
        lines,
        ["00 0", "01 1", "10 2", "110 3", "111000 4", "111010 5", "111100 6", "111110 7"]
    );
}

#[test]
fn enumerate_past_the_cap_is_a_resource_error() {
    let out = chaitin(&["enumerate", "--max-len", "31"]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1, "stderr must be a single line: {err:?}");
    assert!(err.starts_with("error code=3 kind=resource-bound:"), "{err:?}");
}

#[test]
fn asymptotic_partition_prints_the_closed_form() {
    let args = ["partition", "--eps-pow2", "200", "--method", "asymptotic"];
    let out = chaitin(&args);
    assert_eq!(out.status.code(), Some(0));
    let expected = partition_asymptotic(&Epsilon::pow2_neg(200));
    let text = stdout(&out);
    assert!(
        text.contains(&format!("z_asymptotic = {expected}\n")),
        "missing full-precision value in {text:?}"
    );
    // Rounded to twelve digits this is the documented 0.992532056827.
    assert!((expected - 0.992532056827).abs() < 5e-13);

    // Byte-identical on repetition.
    let again = chaitin(&args);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn csv_grid_has_pinned_columns_and_monotone_z() {
    let out = chaitin(&[
        "partition",
        "--eps-pow2-range",
        "10:120:10",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "eps_pow2,beta,z_exact,z_asymptotic,one_minus_z_exact,one_minus_z_asym,\
         k_max_used,truncation_bound"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 12);
    let mut prev = 0.0;
    for row in &rows {
        assert_eq!(row.len(), 8);
        let z: f64 = row[2].parse().unwrap();
        assert!(z > prev, "z_exact must increase along the grid");
        prev = z;
    }
    let last_deficit: f64 = rows.last().unwrap()[4].parse().unwrap();
    assert!(last_deficit > 0.006, "deficit at 2^-120: {last_deficit}");
}

#[test]
fn domain_errors_exit_2() {
    let out = chaitin(&["partition", "--eps", "1e-320"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error code=2 kind=domain:"), "{err:?}");

    // Missing offset flag entirely.
    let out = chaitin(&["partition"]);
    assert_eq!(out.status.code(), Some(2));

    // Unreadable table file.
    let out = chaitin(&["simulate", "/nonexistent/table.txt", "110"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn resource_bounds_exit_3() {
    let out = chaitin(&["partition", "--eps-pow2", "5000000000", "--method", "exact"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).starts_with("error code=3 kind=resource-bound:"));

    let out = chaitin(&[
        "simulate",
        "--builtin",
        "counting",
        "1110011010",
        "--step-limit",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("outcome = step-limit-exceeded"));
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1, "stderr must stay a single line: {err:?}");
}

#[test]
fn unreachable_tolerance_exits_4() {
    let out = chaitin(&["partition", "--eps", "1e-9", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).starts_with("error code=4 kind=tolerance-unreachable:"));
}

#[test]
fn simulate_builtin_counting_runs_the_worked_example() {
    let out = chaitin(&["simulate", "--builtin", "counting", "1110011010"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("outcome = halted"));
    assert!(text.contains(&format!("output = {}\n", "1".repeat(13))));
    assert!(text.contains("program_bits_read = 10"));
}

#[test]
fn simulate_reads_a_table_file() {
    let table = "\
start load
load * B B R load A
load * 1 1 R load A
load * 0 B L done S
done B * B L H S
done 0 * 0 L H S
done 1 * 1 L H S
";
    let path = std::env::temp_dir().join("chaitin_cli_test_copy_table.txt");
    std::fs::write(&path, table).unwrap();
    let out = chaitin(&["simulate", path.to_str().unwrap(), "1110"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("outcome = halted"), "{text}");
    assert!(text.contains("output = 111\n"), "{text}");
    assert!(text.contains("program_bits_read = 4"), "{text}");
}

#[test]
fn simulate_expander_turns_a_numeral_into_marks() {
    let out = chaitin(&["simulate", "--builtin", "expander", "", "--work", "1001"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains(&format!("output = {}\n", "1".repeat(9))), "{text}");
}

#[test]
fn trace_prints_one_line_per_step() {
    let out = chaitin(&["simulate", "--builtin", "counting", "00", "--trace"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let trace_lines = text.lines().filter(|l| l.starts_with("trace step=")).count();
    assert!(trace_lines >= 2, "expected steps in {text}");
    assert!(text.contains("state=boot"), "{text}");
}

#[test]
fn config_file_sets_defaults_and_flags_override() {
    let path = std::env::temp_dir().join("chaitin_cli_test_config.conf");
    std::fs::write(&path, "# defaults\ntol = 1e-6\nstep_limit = 500\n").unwrap();
    let cfg = path.to_str().unwrap();

    let out = chaitin(&["partition", "--eps", "0.5", "--method", "exact", "--config", cfg]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("k_max_used = 18"), "config tol should give k_max 18");

    let out = chaitin(&[
        "partition", "--eps", "0.5", "--method", "exact", "--config", cfg, "--tol", "1e-12",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("k_max_used = 38"), "flag tol should give k_max 38");

    let bad = std::env::temp_dir().join("chaitin_cli_test_bad.conf");
    std::fs::write(&bad, "tol = 1e-6\nunknown_key = 3\n").unwrap();
    let out = chaitin(&["partition", "--eps", "0.5", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_output_parses_and_is_deterministic() {
    let args = ["partition", "--eps", "0.1", "--format", "json"];
    let out = chaitin(&args);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let row = &value.as_array().unwrap()[0];
    assert_eq!(row["eps"], 0.1);
    assert!(row["z_exact"].is_f64());
    assert!(row["z_asymptotic"].is_f64());
    assert_eq!(row["method"], "exact");

    let again = chaitin(&args);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn prefix_stats_csv_has_the_documented_columns() {
    let out = chaitin(&[
        "prefix-stats", "--family", "counting", "--max-level", "6", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "l,n_red,m_black,w_white,P_l,Q_l,kraft_partial");
    let row2: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
    assert_eq!(row2, ["2", "3", "1", "0", "0.75", "0", "0.75"]);
}

#[test]
fn prefix_stats_decay_reports_the_power_law() {
    let out = chaitin(&[
        "prefix-stats",
        "--family",
        "generalized-fibonacci",
        "--max-level",
        "4",
        "--decay",
        "64:512",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("decay_model = power-law"), "{text}");
}

#[test]
fn thermo_csv_has_the_documented_columns() {
    let out = chaitin(&["thermo", "--eps", "0.01", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(
        text.lines().next().unwrap(),
        "eps,beta,z,F,avg_length,heat_capacity,avg_length_asym"
    );
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn verify_passes_and_reports_each_check() {
    let out = chaitin(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for check in [
        "codec-round-trip",
        "machine-decoder-agreement",
        "census-identities",
        "partition-vs-direct-sum",
        "critical-point-layers",
        "asymptotic-band",
    ] {
        assert!(text.contains(&format!("ok   {check}")), "missing {check} in {text}");
    }
}
