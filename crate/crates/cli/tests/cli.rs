use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn lambdix(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_lambdix"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn program(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "programs", name].iter().collect();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn repl_mirrors_the_transcripts() {
    let o = lambdix(&[], "(de x 3)\nundefinedvar\n(de (from x) (cons x (from (+ x 1))))\n(cadr (from 2))\n");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "= 3\n** error - undefinedvar not defined **\n= from\n= 3\n");
}

#[test]
fn repl_honours_print_depth() {
    let o = lambdix(&["repl", "--print-depth", "3"], "(de ones (cons 1 ones))\nones\n");
    assert_eq!(stdout(&o), "= (1 1 1 ...)\n= (1 1 1 ...)\n");
}

#[test]
fn run_prints_only_what_print_emits() {
    let o = lambdix(&["run", &program("mapfun.lx")], "");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "(3 5 7)\n");
}

#[test]
fn divergence_under_value_is_a_limit_error() {
    let o = lambdix(&["run", "--strategy", "value", "--step-limit", "1000000", &program("f-test.lx")], "");
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("** error -"));
    let o = lambdix(&["run", "--strategy", "need", &program("f-test.lx")], "");
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "1\n"));
}

#[test]
fn empty_file_runs_silently() {
    let dir = std::env::temp_dir().join(format!("lambdix-empty-{}", std::process::id()));
    std::fs::write(&dir, "").unwrap();
    let o = lambdix(&["run", dir.to_str().unwrap()], "");
    std::fs::remove_file(&dir).unwrap();
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), ""));
}

#[test]
fn errors_and_missing_files_exit_nonzero() {
    let o = lambdix(&["run", "/nonexistent/file.lx"], "");
    assert_eq!(o.status.code(), Some(1));
    let file = std::env::temp_dir().join(format!("lambdix-err-{}", std::process::id()));
    std::fs::write(&file, "(print 1)\n(car 5)\n(print 2)\n").unwrap();
    let o = lambdix(&["run", file.to_str().unwrap()], "");
    std::fs::remove_file(&file).unwrap();
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(1), "1\n"));
}

#[test]
fn stats_go_to_stderr() {
    let o = lambdix(&["run", "--stats", &program("fib.lx")], "");
    assert_eq!(stdout(&o), "6765\n");
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("switch_tests\t") && err.contains("thunks_forced\t"), "{}", err);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(lambdix(&["--strategy", "lazy"], "").status.code(), Some(2));
    assert_eq!(lambdix(&["selftest", "--count", "0"], "").status.code(), Some(2));
    assert_eq!(lambdix(&["bench", "nosuch"], "").status.code(), Some(2));
    assert_eq!(lambdix(&["bench", "--reps", "0"], "").status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let o = lambdix(&["selftest", "--count", "50", "--seed", "7"], "");
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("differential: 50/50 programs matched"));
}

#[test]
fn bench_writes_tsv_and_json() {
    let json = std::env::temp_dir().join(format!("lambdix-bench-{}.json", std::process::id()));
    let o = lambdix(&["bench", "fib", "lcomp-equal", "--reps", "1", "--json", json.to_str().unwrap()], "");
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "program\tstrategy\tmedian_ms\tswitch_tests\tswitch_assignments\tthunks_created\tthunks_forced\tblocks_allocated\tdigest"
    );
    let rows: Vec<Vec<&str>> = lines.by_ref().take(4).map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 4);
    // Same output, same digest, whichever strategy produced it.
    assert_eq!(rows[0][8], rows[1][8]);
    assert_eq!(rows[2][8], rows[3][8]);
    assert_ne!(rows[0][8], rows[2][8]);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    std::fs::remove_file(&json).unwrap();
    assert_eq!(report["results"].as_array().unwrap().len(), 4);
    assert_eq!(report["results"][0]["digest"], rows[0][8]);
    assert_eq!(report["comparisons"].as_array().unwrap().len(), 2);
}

#[test]
fn bench_reports_limits() {
    let o = lambdix(&["bench", "tak", "--strategy", "value", "--reps", "1", "--step-limit", "100"], "");
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("limit-exceeded"));
}
