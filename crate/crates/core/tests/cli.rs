use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
[experiment]
phi = "0,1"
j = 2
epsilon = 0.05
n_grid = [1000, 3000]
h_exponent = 0.8

[output]
out_dir = "res"
"#;

fn polyrep(dir: &Path, args: &[&str], threads: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_polyrep"));
    c.current_dir(dir).args(args).env_remove("POLYREP_THREADS");
    if let Some(t) = threads {
        c.env("POLYREP_THREADS", t);
    }
    c.output().expect("binary runs")
}

fn setup(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.cfg"), config).unwrap();
    dir
}

#[test]
fn sieve_writes_cache_layout() {
    let dir = setup(CONFIG);
    let out = polyrep(dir.path(), &["sieve", "--limit", "1000", "--out", "c.bin"], None);
    assert!(out.status.success());
    let bytes = fs::read(dir.path().join("c.bin")).unwrap();
    assert_eq!(&bytes[..4], b"PRLB");
    assert_eq!(u64::from_le_bytes(bytes[5..13].try_into().unwrap()), 1000);
    assert_eq!(bytes.len(), 4 + 1 + 8 + 4 * 1001 + 8);
}

#[test]
fn avg_is_deterministic_across_thread_counts() {
    let dir = setup(CONFIG);
    let one = polyrep(dir.path(), &["avg", "--config", "exp.cfg", "--out", "a"], Some("1"));
    let three = polyrep(dir.path(), &["avg", "--config", "exp.cfg", "--out", "b"], Some("3"));
    assert!(one.status.success() && three.status.success());
    let a = fs::read(dir.path().join("a/avg.csv")).unwrap();
    let b = fs::read(dir.path().join("b/avg.csv")).unwrap();
    assert_eq!(a, b);
    assert!(String::from_utf8(a).unwrap().starts_with("N,H,sum,main,ratio,abs_dev,a_ref"));
}

#[test]
fn empty_grid_succeeds_and_plots_nothing() {
    let dir = setup(&CONFIG.replace("[1000, 3000]", "[]"));
    assert!(polyrep(dir.path(), &["avg", "--config", "exp.cfg"], None).status.success());
    let csv = fs::read_to_string(dir.path().join("res/avg.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    let out = polyrep(dir.path(), &["plot", "--report", "res/avg.csv", "--out", "p"], None);
    assert!(out.status.success());
    assert!(!dir.path().join("p").exists() || fs::read_dir(dir.path().join("p")).unwrap().count() == 0);
}

#[test]
fn plots_are_byte_identical() {
    let dir = setup(CONFIG);
    assert!(polyrep(dir.path(), &["avg", "--config", "exp.cfg", "--json"], None).status.success());
    assert!(dir.path().join("res/avg.json").exists());
    for d in ["p1", "p2"] {
        assert!(polyrep(dir.path(), &["plot", "--report", "res/avg.csv", "--out", d], None).status.success());
    }
    let a = fs::read(dir.path().join("p1/avg_ratio.svg")).unwrap();
    let b = fs::read(dir.path().join("p2/avg_ratio.svg")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn exit_codes() {
    let dir = setup(&CONFIG.replace("h_exponent = 0.8", "h_exponent = 0.55"));
    let out = polyrep(dir.path(), &["avg", "--config", "exp.cfg"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("admissible window"));
    assert!(!dir.path().join("res").exists());

    let dir = setup(CONFIG);
    assert_eq!(polyrep(dir.path(), &["avg", "--config", "missing.cfg"], None).status.code(), Some(2));
    assert_eq!(polyrep(dir.path(), &["avg", "--config", "exp.cfg"], Some("many")).status.code(), Some(2));
    let out = polyrep(dir.path(), &["sieve", "--limit", "0", "--out", "z.bin"], None);
    assert_eq!(out.status.code(), Some(3));

    // j < k is outside the average experiment.
    let dir = setup(&CONFIG.replace("j = 2", "j = 1"));
    assert_eq!(polyrep(dir.path(), &["avg", "--config", "exp.cfg"], None).status.code(), Some(2));
}

#[test]
fn decomp_and_kernel_run() {
    let dir = setup(CONFIG);
    let out = polyrep(dir.path(), &["decomp", "--config", "exp.cfg", "--n", "500"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = polyrep(dir.path(), &["kernel", "--config", "exp.cfg", "--n-grid", "100"], None);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("res/kernel.csv")).unwrap();
    assert_eq!(csv.lines().count(), 17);
}
