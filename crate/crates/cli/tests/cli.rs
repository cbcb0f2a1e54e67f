use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/reference")
}

fn tips(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tips"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn solve(problem: &str, algo: &str, extra: &[&str]) -> Output {
    let dir = fixture();
    let mut args = vec![
        "solve",
        "--instance",
        dir.to_str().unwrap(),
        "--problem",
        problem,
        "--algo",
        algo,
        "-k",
        "2",
    ];
    args.extend_from_slice(extra);
    tips(&args)
}

#[test]
fn solve_fixture_with_each_solver() {
    let v = json(&solve("max-tips", "exact", &[]));
    assert_eq!(v["objective"], 12.0);
    assert_eq!(v["selected"], serde_json::json!([3, 4]));
    let v = json(&solve("max-tips", "exact", &["--gamma", "0.8"]));
    assert_eq!(v["objective"], 2.0);
    let v = json(&solve("max-tips", "mif", &[]));
    assert_eq!(v["objective"], 12.0);
    let v = json(&solve(
        "max-tips",
        "netclus",
        &["--tau-min", "1", "--tau-max", "64"],
    ));
    assert!(v["objective"].as_f64().unwrap() >= 12.0);
    for algo in ["exact", "great", "hcc"] {
        let v = json(&solve("avg-tips", algo, &["--sf", "1"]));
        assert!(v["objective"].as_f64().unwrap() >= 21.0, "{algo}");
    }
    assert_eq!(json(&solve("avg-tips", "great", &[]))["objective"], 21.0);
}

#[test]
fn input_errors_exit_with_two() {
    assert_eq!(solve("avg-tips", "mif", &[]).status.code(), Some(2));
    assert_eq!(
        solve("max-tips", "exact", &["--gamma", "1.5"])
            .status
            .code(),
        Some(2)
    );
    let out = tips(&[
        "solve",
        "--instance",
        "/no/such/dir",
        "--problem",
        "avg-tips",
        "--algo",
        "great",
        "-k",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(tips(&["solve", "--bogus"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("edges.txt"), "0 1 1\n1 0 1\n").unwrap();
    fs::write(dir.path().join("trajectories.txt"), "0: 0 1\n1: 0 5\n").unwrap();
    let out = tips(&[
        "solve",
        "--instance",
        dir.path().to_str().unwrap(),
        "--problem",
        "avg-tips",
        "--algo",
        "great",
        "-k",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2"));
}

#[test]
fn budget_errors_exit_with_three() {
    assert_eq!(
        solve("avg-tips", "exact", &["--budget", "2"]).status.code(),
        Some(3)
    );
    assert_eq!(
        solve("avg-tips", "great", &["--matrix-budget", "3"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn generate_index_and_solve_with_saved_index() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("grid");
    let gen = |out: &Path| {
        tips(&[
            "generate",
            "--width",
            "5",
            "--height",
            "5",
            "--count",
            "12",
            "--length",
            "5",
            "--seed",
            "3",
            "--out",
            out.to_str().unwrap(),
        ])
    };
    assert!(gen(&inst).status.success());
    let again = dir.path().join("again");
    assert!(gen(&again).status.success());
    for file in [
        "edges.txt",
        "trajectories.txt",
        "sites.txt",
        "facilities.txt",
    ] {
        assert_eq!(
            fs::read(inst.join(file)).unwrap(),
            fs::read(again.join(file)).unwrap()
        );
    }

    let index = dir.path().join("index.txt");
    let idx = |out: &Path| {
        tips(&[
            "index",
            "--instance",
            inst.to_str().unwrap(),
            "--tau-min",
            "100",
            "--tau-max",
            "3000",
            "--seed",
            "1",
            "--out",
            out.to_str().unwrap(),
        ])
    };
    assert!(idx(&index).status.success());
    let index2 = dir.path().join("index2.txt");
    assert!(idx(&index2).status.success());
    assert_eq!(fs::read(&index).unwrap(), fs::read(&index2).unwrap());

    let solve = |extra: &[&str]| {
        let mut args = vec![
            "solve",
            "--instance",
            inst.to_str().unwrap(),
            "--problem",
            "max-tips",
            "--algo",
            "netclus",
            "-k",
            "2",
            "--seed",
            "1",
            "--tau-min",
            "100",
            "--tau-max",
            "3000",
        ];
        args.extend_from_slice(extra);
        json(&tips(&args))
    };
    let from_file = solve(&["--index-file", index.to_str().unwrap()]);
    let built = solve(&[]);
    assert_eq!(from_file["selected"], built["selected"]);
    assert_eq!(from_file["objective"], built["objective"]);

    let out_file = dir.path().join("result.json");
    let out = tips(&[
        "solve",
        "--instance",
        inst.to_str().unwrap(),
        "--problem",
        "avg-tips",
        "--algo",
        "hcc",
        "-k",
        "2",
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_file).unwrap()).unwrap();
    assert_eq!(v["algorithm"], "hcc");
}

#[test]
fn sample_writes_a_reduced_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("grid");
    assert!(tips(&[
        "generate",
        "--width",
        "6",
        "--height",
        "6",
        "--count",
        "20",
        "--length",
        "5",
        "--out",
        inst.to_str().unwrap()
    ])
    .status
    .success());
    let reduced = dir.path().join("reduced");
    let out = tips(&[
        "sample",
        "--instance",
        inst.to_str().unwrap(),
        "--radius",
        "150",
        "--keep",
        "8",
        "--seed",
        "2",
        "--out",
        reduced.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let kept = fs::read_to_string(reduced.join("trajectories.txt")).unwrap();
    assert_eq!(kept.lines().filter(|l| !l.starts_with('#')).count(), 8);
    let sites = fs::read_to_string(reduced.join("sites.txt"))
        .unwrap()
        .lines()
        .count();
    assert!(sites > 0 && sites < 49);
    let v = json(&tips(&[
        "solve",
        "--instance",
        reduced.to_str().unwrap(),
        "--problem",
        "avg-tips",
        "--algo",
        "great",
        "-k",
        "2",
    ]));
    assert_eq!(v["selected"].as_array().unwrap().len(), 2);
}

#[test]
fn export_matches_golden_file() {
    let dir = fixture();
    let out = tips(&[
        "export-ilp",
        "--instance",
        dir.to_str().unwrap(),
        "--problem",
        "avg-tips",
        "-k",
        "2",
    ]);
    assert!(out.status.success());
    assert_eq!(out.stdout, fs::read(dir.join("lp/avg_tips_k2.lp")).unwrap());
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("m.lp");
    let out = tips(&[
        "export-ilp",
        "--instance",
        dir.to_str().unwrap(),
        "--problem",
        "max-tips",
        "-k",
        "2",
        "--gamma",
        "0.8",
        "--out",
        file.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(
        fs::read(file).unwrap(),
        fs::read(dir.join("lp/max_tips_k2_g08.lp")).unwrap()
    );
}

#[test]
fn bench_writes_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = fixture();
    let config = format!(
        "problem = \"avg-tips\"\nalgorithms = [\"exact\", \"great\"]\nk = [1, 2]\noutput = \"rows.csv\"\n\n[instance]\nedges = {:?}\ntrajectories = {:?}\nsites = {:?}\nfacilities = {:?}\n",
        dir.join("edges.txt"),
        dir.join("trajectories.txt"),
        dir.join("sites.txt"),
        dir.join("facilities.txt")
    );
    let cfg = tmp.path().join("bench.toml");
    fs::write(&cfg, config).unwrap();
    let out = tips(&["bench", "--config", cfg.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(tmp.path().join("rows.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "algorithm,k,gamma,seed,objective_m,wall_time_s,work"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines.iter().any(|l| l.starts_with("great,2,,0,21,")));

    fs::write(&cfg, "problem = \"avg-tips\"\nk = []\n").unwrap();
    assert_eq!(
        tips(&["bench", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}
