use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xsection"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn line_value(text: &str, prefix: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(prefix))
        .unwrap_or_else(|| panic!("no `{prefix}` line in\n{text}"))
        .trim()
        .to_string()
}

#[test]
fn discrete_check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.txt"), "3 2\n").unwrap();
    fs::write(dir.path().join("bad.txt"), "4 1\n").unwrap();
    fs::write(dir.path().join("q.txt"), "2 2 1\n").unwrap();
    fs::write(dir.path().join("junk.txt"), "2 x\n").unwrap();

    let ok = run(dir.path(), &["check", "--discrete", "p.txt", "q.txt"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(line_value(&stdout(&ok), "verdict:"), "feasible");

    let bad = run(dir.path(), &["check", "--discrete", "bad.txt", "q.txt"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(line_value(&stdout(&bad), "witness:"), "m=2 lhs=4 rhs=3");

    let err = run(dir.path(), &["check", "--discrete", "junk.txt", "q.txt"]);
    assert_eq!(err.status.code(), Some(2));
}

#[test]
fn matrix_outputs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.txt"), "3 2").unwrap();
    fs::write(dir.path().join("q.txt"), "2 2 1").unwrap();
    let o = run(dir.path(), &["realize-matrix", "p.txt", "q.txt", "-o", "m.pbm", "--verify-oracle"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(dir.path().join("m.pbm")).unwrap(), "P1\n3 2\n1 1 1\n1 1 0\n");
    let o = run(dir.path(), &["realize-matrix", "p.txt", "q.txt", "-o", "m.txt", "--method", "swap"]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("m.txt")).unwrap();
    let rows: Vec<usize> = text.lines().map(|l| l.matches('1').count()).collect();
    assert_eq!(rows, vec![3, 2]);
}

#[test]
fn realize_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("f.csv"), "breakpoint,value\n0,3/4\n0.25,1/2\n0.5,0.25\n0.75,0\n").unwrap();
    fs::write(dir.path().join("g.json"), r#"[{"b": "0", "v": "1/2"}, {"b": "1/2", "v": 0.25}]"#).unwrap();
    for (n, k, image) in [("2", "2", "set.pgm"), ("3", "0", "set.pbm"), ("3", "3", "set3.pgm")] {
        let built = run(
            dir.path(),
            &["realize-set", "f.csv", "g.json", "-N", n, "-K", k, "-o", image, "--trace", "t.txt", "--svg", "s.svg"],
        );
        let built_out = stdout(&built);
        assert_eq!(built.status.code(), Some(0), "{built_out}");
        let checked = run(dir.path(), &["verify", image, "f.csv", "g.json"]);
        let checked_out = stdout(&checked);
        assert_eq!(checked.status.code(), Some(0), "{checked_out}");
        assert_eq!(line_value(&checked_out, "horizontal section equals g:"), "yes");
        assert_eq!(line_value(&checked_out, "sections pass the realizability test:"), "yes");
        assert_eq!(line_value(&checked_out, "residual:"), line_value(&built_out, "residual:"));
        assert!(fs::read_to_string(dir.path().join("s.svg")).unwrap().starts_with("<svg"));
    }
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("ramp.csv"), "breakpoint,value\n0,1/2\n1,0\n").unwrap();
    let args = |out: &'static str, trace: &'static str| {
        vec!["realize-set", "ramp.csv", "ramp.csv", "-N", "3", "-K", "2", "--interp", "linear", "-o", out, "--trace", trace]
    };
    let a = run(dir.path(), &args("a.pgm", "a.txt"));
    let b = run(dir.path(), &args("b.pgm", "b.txt"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let read = |p: &str| fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("a.pgm"), read("b.pgm"));
    assert_eq!(read("a.txt"), read("b.txt"));
}

#[test]
fn verify_rejects_wrong_marginal() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("half.csv"), "breakpoint,value\n0,1/2\n").unwrap();
    fs::write(dir.path().join("quarter.csv"), "breakpoint,value\n0,1/4\n").unwrap();
    let o = run(dir.path(), &["realize-set", "half.csv", "half.csv", "-N", "1", "-K", "0", "-o", "s.pbm"]);
    assert_eq!(o.status.code(), Some(0));
    let v = run(dir.path(), &["verify", "s.pbm", "half.csv", "quarter.csv"]);
    assert_eq!(v.status.code(), Some(1));
    assert_eq!(line_value(&stdout(&v), "horizontal section equals g:"), "no");
}

#[test]
fn render_and_infeasible_continuous() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("two.csv"), "breakpoint,value\n0,2\n").unwrap();
    let o = run(dir.path(), &["render", "two.csv", "-o", "plot.svg"]);
    assert_eq!(o.status.code(), Some(0));
    let svg = fs::read_to_string(dir.path().join("plot.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    let c = run(dir.path(), &["check", "--continuous", "two.csv", "two.csv", "-N", "1", "-K", "0"]);
    assert_eq!(c.status.code(), Some(1));
    assert_eq!(line_value(&stdout(&c), "witness:"), "t=1 lhs=2 rhs=1");
    fs::write(dir.path().join("third.csv"), "breakpoint,value\n0,1/3\n").unwrap();
    let r = run(dir.path(), &["render", "third.csv", "-o", "x.svg"]);
    assert_eq!(r.status.code(), Some(2));
}
