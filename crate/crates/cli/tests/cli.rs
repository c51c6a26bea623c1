use std::fs;
use std::path::Path;
use std::process::Command;

use gatherline_cli::{parse_grid, run_cli, EXIT_OK, EXIT_REJECTED, EXIT_USAGE, EXIT_VIOLATION};
use gatherline_core::execution::TraceStatus;
use gatherline_core::geometry::Location;
use gatherline_core::protocol::TraceFile;

struct Output {
    code: u8,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_cli(
        std::iter::once("gatherline").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_fsync_gathers_at_the_center() {
    let o = cli(&[
        "run",
        "--init",
        "0:3,1:1,5/2:1,3:3",
        "--demon",
        "fsync",
        "--max-rounds",
        "100",
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stderr.contains("gathered at 3/2"));
    let file = TraceFile::parse(&o.stdout).unwrap();
    let at: Location = "3/2".parse().unwrap();
    assert_eq!(file.footer.unwrap().status, TraceStatus::Gathered { at });
}

#[test]
fn run_rejects_bivalent_start() {
    let o = cli(&["run", "--init", "0:2,1:2"]);
    assert_eq!(o.code, EXIT_REJECTED);
    assert!(o.stderr.contains("initial configuration is bivalent"));
    assert!(o.stdout.is_empty());
}

#[test]
fn bivalent_start_can_be_explored() {
    let o = cli(&[
        "run",
        "--init",
        "0:2,1:2",
        "--allow-forbidden",
        "--max-rounds",
        "5",
    ]);
    assert_eq!(o.code, EXIT_VIOLATION);
    let file = TraceFile::parse(&o.stdout).unwrap();
    assert_eq!(file.records.len(), 5);
    assert!(file
        .records
        .iter()
        .all(|r| r.forbidden && r.moving.is_empty()));
    assert_eq!(file.footer.unwrap().status, TraceStatus::MaxRounds);
}

#[test]
fn run_on_a_single_tower() {
    let o = cli(&[
        "run",
        "--init",
        "5:4",
        "--demon",
        "random-fair",
        "--k",
        "2",
        "--seed",
        "1",
    ]);
    assert_eq!(o.code, EXIT_OK);
    let file = TraceFile::parse(&o.stdout).unwrap();
    assert!(file.records.len() <= 1);
    let at: Location = "5".parse().unwrap();
    assert_eq!(file.footer.unwrap().status, TraceStatus::Gathered { at });
}

#[test]
fn negative_locations_are_values() {
    let o = cli(&[
        "run",
        "--init",
        "-3:2,0:1,1/2:4",
        "--demon",
        "round-robin",
        "--k",
        "2",
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
}

#[test]
fn run_usage_errors() {
    assert_eq!(cli(&["run", "--init", "0:x"]).code, EXIT_USAGE);
    assert_eq!(
        cli(&["run", "--init", "0,1,3", "--demon", "scripted"]).code,
        EXIT_USAGE
    );
    assert_eq!(
        cli(&[
            "run",
            "--init",
            "0,1,3",
            "--demon",
            "round-robin",
            "--k",
            "0"
        ])
        .code,
        EXIT_USAGE
    );
    assert_eq!(
        cli(&["run", "--init", "0,1,3", "--robogram", "nope"]).code,
        EXIT_USAGE
    );
    assert_eq!(cli(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(cli(&["--help"]).code, EXIT_OK);
}

#[test]
fn run_writes_trace_file_and_scripts_replay_it() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.jsonl");
    let o = cli(&[
        "run",
        "--init",
        "0:3,1:1,5/2:1,3:3",
        "--demon",
        "random-fair",
        "--k",
        "3",
        "--seed",
        "9",
        "--trace",
        path_str(&first),
    ]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.starts_with("gathered at"));

    // The recorded actions, fed back through the scripted demon, give the
    // same rounds.
    let second = dir.path().join("second.jsonl");
    let o = cli(&[
        "run",
        "--init",
        "0:3,1:1,5/2:1,3:3",
        "--demon",
        "scripted",
        "--script",
        path_str(&first),
        "--trace",
        path_str(&second),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let a = TraceFile::parse(&fs::read_to_string(&first).unwrap()).unwrap();
    let b = TraceFile::parse(&fs::read_to_string(&second).unwrap()).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.footer, b.footer);

    let replayed = cli(&["replay", path_str(&first)]);
    assert_eq!(replayed.code, EXIT_OK, "{}", replayed.stdout);
}

#[test]
fn script_of_json_actions() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("script.jsonl");
    fs::write(
        &script,
        "[{\"id\":3,\"zoom\":\"1\",\"reflect\":false},{\"id\":4,\"zoom\":\"2\",\"reflect\":true}]\n",
    )
    .unwrap();
    let o = cli(&[
        "run",
        "--init",
        "0:3,1:1,5/2:1,3:3",
        "--demon",
        "scripted",
        "--script",
        path_str(&script),
    ]);
    assert_eq!(o.code, EXIT_VIOLATION);
    let file = TraceFile::parse(&o.stdout).unwrap();
    assert_eq!(file.records.len(), 1);
    assert_eq!(file.records[0].config.to_string(), "0:3,3/2:2,3:3");
    assert_eq!(file.footer.unwrap().status, TraceStatus::Aborted);
}

#[test]
fn check_passes_for_the_gathering_program() {
    let o = cli(&["check", "--suite", "all", "--cases", "1000", "--seed", "7"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stdout);
    assert_eq!(o.stdout.lines().filter(|l| l.contains(": pass")).count(), 6);
}

#[test]
fn check_usage_errors() {
    assert_eq!(
        cli(&["check", "--suite", "never-forbidden", "--cases", "0"]).code,
        EXIT_USAGE
    );
    assert_eq!(cli(&["check", "--suite", "bogus"]).code, EXIT_USAGE);
}

#[test]
fn check_report_does_not_depend_on_workers() {
    let args = |w: &'static str| {
        vec![
            "check",
            "--suite",
            "round-decrease",
            "--cases",
            "300",
            "--seed",
            "3",
            "--json",
            "--workers",
            w,
        ]
    };
    assert_eq!(cli(&args("1")).stdout, cli(&args("4")).stdout);
}

#[test]
fn mutant_self_test_writes_a_replayable_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let cx = dir.path().join("cx.jsonl");
    let o = cli(&[
        "check",
        "--suite",
        "same-destination",
        "--cases",
        "2000",
        "--robogram",
        "go-to-max",
        "--counterexample",
        path_str(&cx),
    ]);
    assert_eq!(o.code, EXIT_VIOLATION);
    assert!(o.stdout.contains("FAIL"));
    let file = TraceFile::parse(&fs::read_to_string(&cx).unwrap()).unwrap();
    assert_eq!(file.header.robogram, "go-to-max");
    let replayed = cli(&["replay", path_str(&cx)]);
    assert_eq!(replayed.code, EXIT_VIOLATION);
    assert!(replayed.stdout.contains("same-destination violated"));
    assert!(!replayed.stdout.contains("does not match"));
}

#[test]
fn replay_detects_edited_records() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let o = cli(&["run", "--init", "0,1,3", "--trace", path_str(&trace)]);
    assert_eq!(o.code, EXIT_OK);
    let text = fs::read_to_string(&trace).unwrap();
    let edited = text.replacen("\"forbidden\":false", "\"forbidden\":true", 1);
    assert_ne!(edited, text);
    fs::write(&trace, edited).unwrap();
    let o = cli(&["replay", path_str(&trace)]);
    assert_eq!(o.code, EXIT_VIOLATION);
    assert!(o.stdout.contains("round 1: record does not match"));

    fs::write(&trace, "not json\n").unwrap();
    assert_eq!(cli(&["replay", path_str(&trace)]).code, EXIT_USAGE);
    assert_eq!(
        cli(&["replay", "/nonexistent/trace.jsonl"]).code,
        EXIT_USAGE
    );
}

#[test]
fn enumerate_examples() {
    let o = cli(&["enumerate", "--n", "3", "--grid", "0..3"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(
        o.stdout
            .contains("1728 (config,action) cases, 0 violations"),
        "{}",
        o.stdout
    );

    let o = cli(&["enumerate", "--n", "10", "--grid", "0..9"]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("budget exceeded"));

    assert_eq!(
        cli(&["enumerate", "--n", "1", "--grid", "0..1"]).code,
        EXIT_OK
    );
    assert_eq!(
        cli(&["enumerate", "--n", "3", "--grid", "0,1/2,1"]).code,
        EXIT_OK
    );
    assert_eq!(
        cli(&["enumerate", "--n", "2", "--grid", "-2..1"]).code,
        EXIT_OK
    );
    assert_eq!(
        cli(&[
            "enumerate",
            "--n",
            "3",
            "--grid",
            "0..3",
            "--robogram",
            "go-to-min"
        ])
        .code,
        EXIT_VIOLATION
    );
}

#[test]
fn grid_syntax() {
    let ints: Vec<String> = parse_grid("0..3")
        .unwrap()
        .iter()
        .map(|l| l.to_string())
        .collect();
    assert_eq!(ints, ["0", "1", "2", "3"]);
    let list: Vec<String> = parse_grid("0, 1/2 ,1")
        .unwrap()
        .iter()
        .map(|l| l.to_string())
        .collect();
    assert_eq!(list, ["0", "1/2", "1"]);
    assert!(parse_grid("3..0").is_err());
    assert!(parse_grid("a..b").is_err());
    assert!(parse_grid("0,,1").is_err());
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_gatherline");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(status(&["run", "--init", "0:2,1:2"]), Some(3));
    assert_eq!(status(&["run", "--init", "0,1,3"]), Some(0));
    assert_eq!(status(&["check", "--cases", "0"]), Some(2));
}
