//! Binary-level tests: exit codes, report text, emitted files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn stabred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabred"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn validate_accepts_the_hyperelliptic_fixture() {
    let out = stabred(&["validate", fixture("hyperelliptic.fiber").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("valid"));
    assert!(stdout(&out).contains("p_a=2"));
}

#[test]
fn validate_rejects_divisibility_failure() {
    let out = stabred(&["validate", fixture("divisibility.fiber").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("non-integral self-intersection"));
}

#[test]
fn malformed_file_fails_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.fiber");
    std::fs::write(&path, "fiber kind=nc\ncomponent C genus=zero mult=1\n").unwrap();
    let out = stabred(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"));
}

#[test]
fn invariants_report_lists_edges_with_indices() {
    let out = stabred(&["invariants", fixture("theta.fiber").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("A: E2=-3 K.E=1 deg_omega=1 valence=3"));
    assert!(text.contains("edge 0: A--B"));
    assert!(text.contains("edge 2: A--B"));
    assert!(text.contains("p_a=2"));
}

#[test]
fn reduce_hyperelliptic_to_a_single_genus_two_component() {
    let dir = tempfile::tempdir().unwrap();
    let output = dir.path().join("stable.fiber");
    let trace = dir.path().join("moves.trace");
    let out = stabred(&[
        "reduce",
        fixture("hyperelliptic.fiber").to_str().unwrap(),
        "-o",
        output.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout(&out);
    assert!(report.contains("descent: N=2 via search (1 candidate)"));
    assert!(report.contains("genus audit: 2 -> 2 -> 2 ok"));
    let fiber = std::fs::read_to_string(&output).unwrap();
    assert_eq!(
        fiber,
        "fiber kind=stable genus=2\ncomponent C.sheet1 genus=2 mult=1\n"
    );
    let trace_text = std::fs::read_to_string(&trace).unwrap();
    assert!(trace_text.starts_with("1 SPLIT C -> C.sheet1:deg=2:g=2\n"));
    assert!(trace_text.contains("CONTRACT1 T5 -> C.sheet1"));
    assert_eq!(trace_text.lines().count(), 13);

    // determinism: a second run produces identical bytes
    let rerun = stabred(&[
        "reduce",
        fixture("hyperelliptic.fiber").to_str().unwrap(),
        "-o",
        output.to_str().unwrap(),
    ]);
    assert_eq!(rerun.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&output).unwrap(), fiber);
    assert_eq!(stdout(&out), {
        let mut first = stdout(&rerun);
        first.truncate(stdout(&out).len());
        first
    });
}

#[test]
fn reduce_on_stable_input_is_the_identity() {
    let dir = tempfile::tempdir().unwrap();
    let output = dir.path().join("same.fiber");
    let trace = dir.path().join("empty.trace");
    let out = stabred(&[
        "reduce",
        fixture("theta.fiber").to_str().unwrap(),
        "-o",
        output.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(std::fs::read_to_string(&trace).unwrap(), "");
    let fiber = std::fs::read_to_string(&output).unwrap();
    assert!(fiber.contains("component A genus=0 mult=1"));
    assert!(fiber.contains("component B genus=0 mult=1"));
    assert_eq!(fiber.matches("node A B").count(), 3);
}

#[test]
fn isolated_rational_component_exits_two_naming_zariski() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zariski.fiber");
    std::fs::write(
        &path,
        "fiber kind=reduced\ncomponent E genus=0 mult=1\ncomponent G genus=2 mult=1\n",
    )
    .unwrap();
    for cmd in ["stabilize", "reduce"] {
        let out = stabred(&[cmd, path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{cmd}");
        assert!(stderr(&out).contains("Zariski"), "{cmd}: {}", stderr(&out));
    }
}

#[test]
fn inconsistent_descent_exits_two_naming_genus_conservation() {
    let dir = tempfile::tempdir().unwrap();
    let fiber = dir.path().join("double.fiber");
    std::fs::write(
        &fiber,
        "fiber kind=nc\ncomponent A genus=0 mult=2\ncomponent B genus=0 mult=2\nnode A B\nnode A B\n",
    )
    .unwrap();
    let descent = dir.path().join("bad.descent");
    std::fs::write(
        &descent,
        "descent N=2\ncover A piece degree=2\ncover B piece degree=1\ncover B piece degree=1\n",
    )
    .unwrap();
    let out = stabred(&[
        "basechange",
        fiber.to_str().unwrap(),
        "--descent",
        descent.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("GenusNotConserved"));
}

#[test]
fn explicit_descent_file_drives_the_base_change() {
    let dir = tempfile::tempdir().unwrap();
    let descent = dir.path().join("hyper.descent");
    std::fs::write(&descent, "descent N=2\ncover C piece degree=2\n").unwrap();
    let output = dir.path().join("reduced.fiber");
    let out = stabred(&[
        "basechange",
        fixture("hyperelliptic.fiber").to_str().unwrap(),
        "--descent",
        descent.to_str().unwrap(),
        "-o",
        output.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&output).unwrap();
    assert!(text.starts_with("fiber kind=reduced genus=2\n"));
    assert!(text.contains("component C.sheet1 genus=2 mult=1"));
    // validate the emitted file through the binary again
    let check = stabred(&["validate", output.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0));
}

#[test]
fn indivisible_exponent_is_a_usage_error() {
    let out = stabred(&[
        "basechange",
        fixture("hyperelliptic.fiber").to_str().unwrap(),
        "--N",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not a multiple"));
}

#[test]
fn base_change_inserts_chains_on_stable_input() {
    let dir = tempfile::tempdir().unwrap();
    let output = dir.path().join("chains.fiber");
    let out = stabred(&[
        "basechange",
        fixture("theta.fiber").to_str().unwrap(),
        "--N",
        "3",
        "-o",
        output.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&output).unwrap();
    // every node becomes a chain of two rational curves
    assert_eq!(text.matches("genus=0 mult=1").count(), 2 + 6);
}

#[test]
fn dot_output_is_deterministic_and_quoted() {
    let a = stabred(&["dot", fixture("theta.fiber").to_str().unwrap()]);
    let b = stabred(&["dot", fixture("theta.fiber").to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    let text = stdout(&a);
    assert!(text.starts_with("graph fiber {\n"));
    assert!(text.contains("\"A\" [label=\"A\\ng=0 n=1 E2=-3\"];"));
    assert_eq!(text.matches("\"A\" -- \"B\";").count(), 3);
}

#[test]
fn numerology_prints_exact_key_values() {
    let out = stabred(&["numerology", "--genus", "2", "--hilbert", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "genus=2\nmoduli_dimension=3\ncanonical_degree=2\ntricanonical_dimension=5\n\
         embedding_target=4\nhurwitz_bound=84\nseveri_min_degree=3\n\
         tricanonical_very_ample=true\nhilbert_polynomial=5\n"
    );
    let out = stabred(&["numerology", "--genus", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn enumerate_lists_sorted_unique_classes() {
    let out = stabred(&["enumerate", "--genus", "2", "--max-vertices", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    let mut sorted = lines.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(lines, sorted);
    let out = stabred(&["enumerate", "--genus", "6", "--max-vertices", "5"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn local_subcommands_print_the_model() {
    let out = stabred(&["local", "node", "2", "2", "4"]);
    assert_eq!(
        stdout(&out),
        "branches=2\nalpha=1\nbeta=1\nchain_exponent=2\nchain_length=1\nsingularity=A_1\n"
    );
    let out = stabred(&["local", "split", "3", "6"]);
    assert_eq!(stdout(&out), "sheets=3\nexponent=2\nmultiplicity=1\n");
    let out = stabred(&["local", "witness", "2", "2"]);
    assert_eq!(stdout(&out), "injective=false\nzeta=-1\nxi=-1\n");
    let out = stabred(&["local", "witness", "2", "3"]);
    assert_eq!(stdout(&out), "injective=true\n");
    let out = stabred(&["local", "split", "4", "6"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn stabilize_requires_a_reduced_fiber() {
    let out = stabred(&[
        "stabilize",
        fixture("hyperelliptic.fiber").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("basechange first"));
}

#[test]
fn emitted_fiber_files_reparse_to_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.fiber");
    let second = dir.path().join("b.fiber");
    let out = stabred(&[
        "basechange",
        fixture("theta.fiber").to_str().unwrap(),
        "--N",
        "2",
        "-o",
        first.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    // identity reduction of the emitted file must re-emit identical bytes
    let out = stabred(&[
        "basechange",
        first.to_str().unwrap(),
        "--N",
        "1",
        "-o",
        second.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(
        std::fs::read_to_string(&first).unwrap(),
        std::fs::read_to_string(&second).unwrap()
    );
}
