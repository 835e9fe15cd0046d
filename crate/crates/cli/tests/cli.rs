use std::path::PathBuf;
use std::process::{Command, Output};

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../examples").join(format!("{name}.qw"))
}

fn qbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbc")).args(args).env_remove("QBC_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_accepts_the_examples() {
    for name in ["bell", "bv", "dj", "grover", "simon", "period", "teleport"] {
        let o = qbc(&["check", example(name).to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn run_prints_tab_separated_counts() {
    let o = qbc(&["run", example("bell").to_str().unwrap(), "--shots", "500", "--seed", "3"]);
    assert!(o.status.success());
    let mut total = 0;
    for line in stdout(&o).lines() {
        let (bits, n) = line.split_once('\t').unwrap();
        assert!(bits == "00" || bits == "11", "{line}");
        total += n.parse::<usize>().unwrap();
    }
    assert_eq!(total, 500);
}

#[test]
fn seed_env_overrides_the_flag() {
    let path = example("grover");
    let run = |seed: &str, env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_qbc"));
        c.args(["run", path.to_str().unwrap(), "--shots", "200", "--seed", seed]).env_remove("QBC_SEED");
        if let Some(v) = env {
            c.env("QBC_SEED", v);
        }
        stdout(&c.output().unwrap())
    };
    assert_eq!(run("1", Some("42")), run("2", Some("42")));
    assert_eq!(run("42", None), run("9", Some("42")));
}

#[test]
fn defines_change_the_width() {
    let o = qbc(&["run", example("dj").to_str().unwrap(), "-D", "N=3", "--shots", "20"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().all(|l| l.split('\t').next().unwrap().len() == 3));
}

#[test]
fn stats_report_surviving_calls() {
    let path = example("simon");
    let inlined = stdout(&qbc(&["stats", path.to_str().unwrap()]));
    assert!(inlined.lines().any(|l| l == "calls=0"));
    assert!(inlined.lines().any(|l| l.starts_with("qubits=")));
    let raw = stdout(&qbc(&["stats", path.to_str().unwrap(), "--no-inline"]));
    assert!(!raw.lines().any(|l| l == "indirect_calls=0"), "{raw}");
}

#[test]
fn compile_writes_each_form() {
    let dir = std::env::temp_dir().join(format!("qbc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for emit in ["ast", "qwerty-ir", "qcircuit-ir", "qasm", "qir"] {
        let out = dir.join(emit);
        let o = qbc(&["compile", example("bv").to_str().unwrap(), "--emit", emit, "-o", out.to_str().unwrap()]);
        assert!(o.status.success(), "{emit}");
        assert!(!std::fs::read_to_string(&out).unwrap().is_empty());
    }
    let qasm = std::fs::read_to_string(dir.join("qasm")).unwrap();
    assert!(qasm.starts_with("OPENQASM 3.0;"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    let bad = std::env::temp_dir().join(format!("qbc-bad-{}.qw", std::process::id()));
    std::fs::write(&bad, "qpu main() -> bit { 'p' | {'0','1'} >> {'0'} | std.measure }\n").unwrap();
    let o = qbc(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    std::fs::remove_file(&bad).unwrap();

    assert_eq!(qbc(&["check", "/nonexistent/x.qw"]).status.code(), Some(2));
    assert_eq!(qbc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(qbc(&["compile", example("bv").to_str().unwrap(), "--emit", "llvm"]).status.code(), Some(2));
    assert_eq!(qbc(&["--help"]).status.code(), Some(0));

    let o = Command::new(env!("CARGO_BIN_EXE_qbc"))
        .args(["run", example("bell").to_str().unwrap()])
        .env("QBC_SEED", "abc")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn qir_refusal_is_a_diagnostic() {
    let o = qbc(&["compile", example("teleport").to_str().unwrap(), "--emit", "qir"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--emit qasm"));
}
