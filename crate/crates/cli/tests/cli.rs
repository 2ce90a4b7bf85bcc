use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const P5: &str = "tron v1\nn 5\nw 0 1/5\nw 1 1/5\nw 2 1/5\nw 3 1/5\nw 4 1/5\ne 0 1\ne 1 2\ne 2 3\ne 3 4\n";
const K13: &str = "tron v1\nn 4\nw 0 1/4\nw 1 1/4\nw 2 1/4\nw 3 1/4\ne 0 1\ne 0 2\ne 0 3\n";
const C4: &str = "tron v1\nn 4\nw 0 1\nw 1 1\nw 2 1\nw 3 1\ne 0 1\ne 1 2\ne 2 3\ne 0 3\n";

fn tron(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tron")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn solve_prints_value_starts_and_variation() {
    let dir = tempfile::tempdir().unwrap();
    let p5 = file(dir.path(), "p5.tron", P5);
    for backend in [None, Some("general"), Some("treepath")] {
        let mut args = vec!["solve", p5.to_str().unwrap()];
        if let Some(b) = backend {
            args.extend(["--backend", b]);
        }
        let o = tron(&args);
        assert_eq!(o.status.code(), Some(0));
        let out = stdout(&o);
        assert!(out.starts_with("delta = -1/5; optimal starts: {2}\n"), "{out}");
        assert!(out.contains("\n2 -1/5 0\n"), "{out}");
        assert!(out.contains("pv A+2 B+0 A>1 B-- A--"), "{out}");
    }
}

#[test]
fn normalize_flag_scales_weights() {
    let dir = tempfile::tempdir().unwrap();
    let c4 = file(dir.path(), "c4.tron", C4);
    assert_eq!(tron(&["solve", c4.to_str().unwrap()]).status.code(), Some(2));
    let o = tron(&["solve", c4.to_str().unwrap(), "--normalize"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("delta = 0/1;"), "{}", stdout(&o));
    assert_eq!(tron(&["solve", c4.to_str().unwrap(), "--normalize", "--backend", "treepath"]).status.code(), Some(2));
}

#[test]
fn certify_and_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let k13 = file(dir.path(), "k13.tron", K13);
    let o = tron(&["certify", k13.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("delta -1/4"), "{out}");
    assert!(out.contains("Eq3 AsStated true -1/4 Holds"), "{out}");
    let o = tron(&["analyze", k13.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("crossing edge:"));
}

#[test]
fn simulate_and_replay_agree() {
    let dir = tempfile::tempdir().unwrap();
    let p5 = file(dir.path(), "p5.tron", P5);
    let o = tron(&["simulate", p5.to_str().unwrap(), "--alice", "avoidbob:auto", "--bob", "longestpath"]);
    assert_eq!(o.status.code(), Some(0));
    let transcript = stdout(&o);
    let value_line = transcript.lines().last().unwrap().to_string();
    let t = file(dir.path(), "game.txt", &transcript);
    let o = tron(&["replay", p5.to_str().unwrap(), t.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("phase Finished"), "{out}");
    let value = value_line.trim_start_matches("# ");
    assert!(out.contains(value), "{out}\n{value}");

    let bad = file(dir.path(), "bad.txt", "A+2\nB+2\n");
    assert_eq!(tron(&["replay", p5.to_str().unwrap(), bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(tron(&["simulate", p5.to_str().unwrap(), "--bob", "avoidbob:auto"]).status.code(), Some(2));
}

#[test]
fn lab_verbs_are_deterministic() {
    let fuzz = ["fuzz", "--seed", "5", "--count", "60", "--n-max", "8"];
    let a = tron(&fuzz);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&tron(&fuzz)));
    assert!(stdout(&a).contains("violations 0"));

    let search = ["search", "--seed", "3", "--budget", "150", "--n-max", "4", "--climb-n", "7"];
    let a = tron(&search);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&tron(&search)));
    assert!(stdout(&a).contains("evaluations 150"));

    let o = tron(&["scan", "trees", "--n-max", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("exceedances 0"));
    let o = tron(&["scan", "cycles", "--count", "20", "--n-max", "8", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let o = tron(&["scan", "heuristic", "--n-max", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("gap_failures 0"));
}

#[test]
fn usage_and_input_errors_exit_2() {
    assert_eq!(tron(&["solve", "missing.tron"]).status.code(), Some(2));
    assert_eq!(tron(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(tron(&["solve"]).status.code(), Some(2));
    assert_eq!(tron(&["fuzz", "--count", "x"]).status.code(), Some(2));
    assert_eq!(tron(&["search", "--family", "cycle"]).status.code(), Some(2));
    assert_eq!(tron(&["search", "--weights", "grid:10"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let broken = file(dir.path(), "broken.tron", "tron v1\nn 2\nw 0 1/2\n");
    let o = tron(&["certify", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("error:"));
    assert_eq!(tron(&["--help"]).status.code(), Some(0));
}
