use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn typical(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_typical")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn generate_then_verify() {
    let dir = TempDir::new().unwrap();
    let o = typical(
        dir.path(),
        &["generate", "--level", "3", "--dim", "2", "--constraint", "general-position", "--seed", "7", "--out", "c.json"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("c.json.manifest.json").exists());
    let v = typical(dir.path(), &["verify", "c.json", "--jobs", "2"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).starts_with("clean: 41664 tuples"));
    let v = typical(dir.path(), &["verify", "--in", "c.json"]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(typical(dir.path(), &["verify"]).status.code(), Some(1));
}

#[test]
fn planted_collinear_triple_exits_two() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "s.json",
        r#"{"dim":2,"backend":"exact","points":[["1/8","1/2"],["0","0"],["1/4","1/4"],["3/4","1/8"],["1/2","1/2"]]}"#,
    );
    let o = typical(dir.path(), &["verify", "s.json", "--constraint", "general-position"]);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert!(out.contains("tuple [1, 2, 4]"), "{out}");
    assert!(out.contains("(0, 0) (1/4, 1/4) (1/2, 1/2)"), "{out}");
}

#[test]
fn planted_equilateral_copy_is_found_with_tolerance() {
    let dir = TempDir::new().unwrap();
    let h = 3f64.sqrt() / 2.0;
    write(
        dir.path(),
        "s.json",
        &format!(r#"{{"dim":2,"backend":"float","points":[[0.0,0.0],[1.0,0.0],[0.5,{h}],[0.9,0.2]]}}"#),
    );
    let o = typical(dir.path(), &["verify", "s.json", "--constraint", "pattern", "--tol", "1e-9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("tuple [0, 1, 2]"));
}

#[test]
fn hausdorff_of_identical_files_is_zero() {
    let dir = TempDir::new().unwrap();
    let set = r#"{"dim":2,"backend":"exact","points":[["1/3","2/7"],["1","0"]]}"#;
    write(dir.path(), "a.json", set);
    write(dir.path(), "b.json", set);
    let o = typical(dir.path(), &["hausdorff", "a.json", "b.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0\n");
    write(dir.path(), "c.json", r#"{"dim":2,"backend":"exact","points":[["0","0"]]}"#);
    write(dir.path(), "d.json", r#"{"dim":2,"backend":"exact","points":[["3/5","4/5"]]}"#);
    assert_eq!(stdout(&typical(dir.path(), &["hausdorff", "c.json", "d.json"])), "1\n");
    assert_eq!(stdout(&typical(dir.path(), &["hausdorff", "a.json", "c.json"])), "1\n");
}

#[test]
fn identical_invocations_give_identical_bytes() {
    let dir = TempDir::new().unwrap();
    for out in ["a.json", "b.json"] {
        let o = typical(
            dir.path(),
            &["generate", "--level", "2", "--dim", "2", "--constraint", "angle", "--theta", "1.5707963267948966", "--seed", "3", "--out", out],
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(dir.path().join("a.json")).unwrap(), fs::read(dir.path().join("b.json")).unwrap());
}

#[test]
fn replay_reproduces_and_detects_mismatch() {
    let dir = TempDir::new().unwrap();
    let o = typical(dir.path(), &["sample-typical", "--dim", "2", "--levels", "1,2,3", "--seed", "11", "--out", "t.json"]);
    assert_eq!(o.status.code(), Some(0));
    let before = fs::read(dir.path().join("t.json")).unwrap();
    let r = typical(dir.path(), &["replay", "--manifest", "t.json.manifest.json"]);
    assert_eq!(r.status.code(), Some(0));
    assert!(stdout(&r).contains("reproduced t.json"));
    assert_eq!(fs::read(dir.path().join("t.json")).unwrap(), before);

    let path = dir.path().join("t.json.manifest.json");
    let text = fs::read_to_string(&path).unwrap();
    let mut m: serde_json::Value = serde_json::from_str(&text).unwrap();
    m["outputs"]["t.json"] = serde_json::json!("00");
    fs::write(&path, m.to_string()).unwrap();
    let r = typical(dir.path(), &["replay", "--manifest", "t.json.manifest.json"]);
    assert_eq!(r.status.code(), Some(1));
    assert!(stdout(&r).contains("mismatch t.json"));
}

#[test]
fn emitted_json_reads_back_unchanged() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "a.json", r#"{"dim":1,"backend":"exact","points":[["0"],["1/3"],["1"]]}"#);
    assert_eq!(typical(dir.path(), &["arith", "sum", "--set", "a.json", "--m", "2", "--out", "s.json"]).status.code(), Some(0));
    assert_eq!(typical(dir.path(), &["arith", "sum", "--set", "s.json", "--m", "1", "--out", "t.json"]).status.code(), Some(0));
    assert_eq!(fs::read(dir.path().join("s.json")).unwrap(), fs::read(dir.path().join("t.json")).unwrap());
    let s = fs::read_to_string(dir.path().join("s.json")).unwrap();
    assert!(s.contains("\"4/3\"") && s.contains("\"2/3\""));
}

#[test]
fn usage_and_input_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let o = typical(dir.path(), &["generate", "--level", "2", "--dim", "2", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    write(dir.path(), "bad.json", "{not json");
    let o = typical(dir.path(), &["dimension", "--set", "bad.json", "--max-level", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("point-set JSON"));
    write(dir.path(), "big.json", r#"{"dim":1,"backend":"exact","points":[["1/2"],["1/3"],["1/5"],["1/7"],["1/11"]]}"#);
    let o = typical(dir.path(), &["arith", "sum", "--set", "big.json", "--m", "4", "--cap", "50"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
    assert_eq!(typical(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn category_and_function_commands() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "e.json", r#"{"dim":1,"backend":"exact","points":[["1/2"]]}"#);
    write(dir.path(), "a.json", r#"{"kind":"finite","dim":1,"points":[["1/2"]]}"#);
    let o = typical(dir.path(), &["hit-test", "--set", "e.json", "--avoid", "a.json", "--level", "2", "--out", "f.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("E hits A: true"));

    write(dir.path(), "f0.json", r#"{"breakpoints":["0","1"],"values":["0","0"]}"#);
    write(dir.path(), "fib.json", r#"{"x":"1/2","values":["0"]}"#);
    assert_eq!(stdout(&typical(dir.path(), &["func", "hit-test", "--f", "f0.json", "--fiber", "fib.json"])), "true\n");
    let o = typical(dir.path(), &["func", "avoid", "--f", "f0.json", "--fiber", "fib.json", "--eps", "1/10", "--out", "g.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("d(f,g) 1/20"));
    assert_eq!(stdout(&typical(dir.path(), &["func", "hit-test", "--f", "g.json", "--fiber", "fib.json"])), "false\n");

    let o = typical(dir.path(), &["dimension", "--set", "e.json", "--max-level", "2"]);
    assert_eq!(stdout(&o), "n,count,slope\n0,1,\n1,2,1.000000\n2,2,0.500000\n");
    let o = typical(dir.path(), &["arith", "identity", "--set", "e.json", "--m", "3"]);
    assert_eq!(o.status.code(), Some(0));
}
