use std::fs;
use std::process::{Command, Output};

fn treemis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treemis"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = treemis(&[
        "run",
        "--n",
        "1500",
        "--seed",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["n"], 1500);
    assert_eq!(v["verdicts"]["independent"], true);
    assert_eq!(v["verdicts"]["maximal"], true);
    assert!(String::from_utf8_lossy(&o.stdout).contains("maximal=true"));
}

#[test]
fn run_is_deterministic() {
    let a = treemis(&[
        "run",
        "--n",
        "800",
        "--gen",
        "broom:400",
        "--mode",
        "in-space",
        "--seed",
        "9",
    ]);
    let b = treemis(&[
        "run",
        "--n",
        "800",
        "--gen",
        "broom:400",
        "--mode",
        "in-space",
        "--seed",
        "9",
    ]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn run_reads_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.txt");
    fs::write(&p, "4 3\n0 1\n1 2\n2 3\n").unwrap();
    let o = treemis(&["run", "--graph", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["n"], 4);
    assert_eq!(v["totals"]["mis_size"], 2);
}

#[test]
fn missing_graph_file() {
    let o = treemis(&["run", "--graph", "/definitely/not/here.txt"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("file not found"), "{}", stderr(&o));
}

#[test]
fn cyclic_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.txt");
    fs::write(&p, "3 3\n0 1\n1 2\n2 0\n").unwrap();
    let o = treemis(&["run", "--graph", p.to_str().unwrap()]);
    assert!(!o.status.success());
}

#[test]
fn bad_eps() {
    for eps in ["0", "1.5", "-0.2"] {
        let o = treemis(&["run", "--n", "100", &format!("--eps={eps}")]);
        assert!(!o.status.success());
        assert!(
            stderr(&o).contains("eps must lie in (0, 1]"),
            "{}",
            stderr(&o)
        );
    }
}

#[test]
fn sweep_csv_and_dedup() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = treemis(&[
        "sweep",
        "--n-list",
        "300,600,300",
        "--seeds",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("duplicate"));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "n,seed,mode,total_rounds,shatter_iters,gather_rounds,peak_mem,retries,verdict"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.ends_with(",pass")));
    assert!(lines[1].starts_with("300,0,naive,"));
    assert!(lines[4].starts_with("600,1,naive,"));
}

#[test]
fn sweep_range() {
    let o = treemis(&["sweep", "--n-range", "256:1024:2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 4);
}

#[test]
fn sweep_needs_sizes() {
    let o = treemis(&["sweep"]);
    assert!(!o.status.success());
    let o = treemis(&["sweep", "--n-range", "10:5:2"]);
    assert!(!o.status.success());
}
