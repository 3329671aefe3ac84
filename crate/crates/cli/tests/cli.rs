use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn glcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glcap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_slice(&read(p)).unwrap()
}

#[test]
fn capacity_of_a_thick_annulus() {
    let o = glcap(&["capacity", "--R", "7.389"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    assert!(out.contains("Thick"));
    let value: f64 = out.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((value - PI / 7.389f64.ln()).abs() < 1e-9);
    assert!((value - PI / 2.0).abs() < 1e-4);
}

#[test]
fn capacity_rejects_small_radius() {
    let o = glcap(&["capacity", "--R", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("outer radius must exceed 1"));
}

#[test]
fn numeric_capacity_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cap.json");
    let o = glcap(&[
        "capacity",
        "--L",
        "0.5",
        "--method",
        "numeric",
        "--nr",
        "65",
        "--nphi",
        "64",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("Thin"));
    let v = json(&out);
    assert_eq!(v["method"], "Numeric");
    assert_eq!(v["classification"], "Thin");
    assert_eq!(v["mesh"]["nr"], 65);
    assert!((v["value"].as_f64().unwrap() / (2.0 * PI) - 1.0).abs() < 1e-3);
}

#[test]
fn certificate_is_valid_json() {
    let o = glcap(&[
        "certify", "--L", "2", "--rho", "1", "--kappa", "100", "--nmax", "200",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["valid"], true);
    assert_eq!(v["L"], 2.0);
    assert_eq!(v["rho"], 1.0);
    assert_eq!(v["kappa"], 100.0);
    assert_eq!(v["n_checked"], 200);
    assert!(v["margin"].as_f64().unwrap() > 0.0);
    let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    keys.sort();
    assert_eq!(
        keys,
        [
            "L",
            "kappa",
            "margin",
            "n_checked",
            "rho",
            "tail_note",
            "valid"
        ]
    );
}

#[test]
fn certificate_file_round_trips_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let o = glcap(&[
            "certify",
            "--L",
            "2",
            "--rho",
            "1",
            "--kappa",
            "1.2",
            "--nmax",
            "20",
            "--output",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        assert!(stdout(&o).starts_with("valid = false"));
    }
    assert_eq!(read(&a), read(&b));
    assert_eq!(json(&a)["valid"], false);
}

#[test]
fn mode_table_csv() {
    let o = glcap(&[
        "modes", "--L", "2", "--rho", "1", "--kappa", "10", "--nmax", "5",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,P,Q,alpha,beta,PQ,margin");
    assert_eq!(lines.len(), 6);
    for (k, line) in lines[1..].iter().enumerate() {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols[0], (k + 1) as f64);
        assert_eq!(cols[5], cols[1] * cols[2]);
        assert_eq!(cols[6], cols[4] - cols[3]);
        assert!(cols[5] > 1.0);
    }
    assert!(stderr(&o).contains("5 modes"));
}

#[test]
fn bvp_check_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bvp.json");
    for kind in ["real", "imag"] {
        let o = glcap(&[
            "bvp-check",
            "--L",
            "2",
            "--rho",
            "1",
            "--kappa",
            "10",
            "--n",
            "5",
            "--kind",
            kind,
            "--output",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let v = json(&out);
        assert_eq!(v["kind"], kind);
        assert!(v["discrepancy"].as_f64().unwrap() < 1e-8);
    }
    let o = glcap(&[
        "bvp-check",
        "--L",
        "2",
        "--kappa",
        "10",
        "--n",
        "1",
        "--scheme",
        "spline",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn linear_min_with_random_traces_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, name: &str| {
        let p = dir.path().join(name);
        let o = glcap(&[
            "linear-min",
            "--L",
            "2",
            "--rho",
            "1",
            "--kappa",
            "5",
            "--nmax",
            "50",
            "--trials",
            "3",
            "--order",
            "8",
            "--seed",
            seed,
            "--output",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        read(&p)
    };
    let (a, b, c) = (run("4", "a.json"), run("4", "b.json"), run("5", "c.json"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert!(v["value"].as_f64().unwrap() >= 2.0 * PI);
    assert!(v["excess"].as_f64().unwrap() > 0.0);
    assert!(v["max_decomposition_error"].as_f64().unwrap() < 1e-6);
    assert!(v["min_p0_term"].as_f64().unwrap() >= 0.0);
}

#[test]
fn minimize_outputs_are_reproducible_and_reloadable() {
    let dir = tempfile::tempdir().unwrap();
    let path = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let run = |tag: &str| {
        let o = glcap(&[
            "minimize",
            "--L",
            "0.5",
            "--kappa",
            "5",
            "--nr",
            "17",
            "--nphi",
            "64",
            "--save",
            &path(&format!("{tag}.snap")),
            "--output",
            &path(&format!("{tag}.json")),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(stdout(&o).lines().count(), 1);
    };
    run("a");
    run("b");
    assert_eq!(
        read(Path::new(&path("a.snap"))),
        read(Path::new(&path("b.snap")))
    );
    assert_eq!(
        read(Path::new(&path("a.json"))),
        read(Path::new(&path("b.json")))
    );
    let v = json(Path::new(&path("a.json")));
    assert_eq!(v["converged"], true);
    assert_eq!(v["vortices"].as_array().unwrap().len(), 0);
    let e = v["energy"].as_f64().unwrap();
    assert!(e < 2.0 * PI);

    let o = glcap(&[
        "minimize",
        "--L",
        "0.5",
        "--kappa",
        "5",
        "--init",
        &path("a.snap"),
        "--output",
        &path("c.json"),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let w = json(Path::new(&path("c.json")));
    assert_eq!(w["nr"], 17);
    assert!(w["energy"].as_f64().unwrap() <= e);
}

#[test]
fn scan_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let o = glcap(&[
            "scan",
            "--L",
            "1.5",
            "--kappas",
            "1,3",
            "--nr",
            "17",
            "--nphi",
            "64",
            "--max-iters",
            "300",
            "--output",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).starts_with("2 kappa values"));
        read(&p)
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "kappa,energy,gap_2pi,n_vortices,min_modulus,vortex_dist_outer,vortex_dist_inner,iterations,converged"
    );
    assert_eq!(lines.len(), 3);
    for line in &lines[1..] {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 9);
        let (energy, gap): (f64, f64) = (cols[1].parse().unwrap(), cols[2].parse().unwrap());
        assert_eq!(gap, 2.0 * PI - energy);
        assert!(cols[8] == "true" || cols[8] == "false");
    }
}

#[test]
fn config_file_supplies_flags_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# certificate run\nL = 2\nrho = 1\nkappa = 1.2\nnmax = 200\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();

    let o = glcap(&["certify", "--config", c]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("\"valid\":false"));

    let o = glcap(&["certify", "--config", c, "--kappa", "100"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("\"valid\":true"));
    assert!(stdout(&o).contains("\"kappa\":100.0"));

    std::fs::write(&cfg, "L = 2\nkappa = 5\nmax_iters = 3\n").unwrap();
    let o = glcap(&["certify", "--config", c]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown config key `max-iters`"));

    std::fs::write(&cfg, "L 2\n").unwrap();
    assert_eq!(glcap(&["certify", "--config", c]).status.code(), Some(2));
}

#[test]
fn failures_have_distinct_codes() {
    let o = glcap(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));

    let o = glcap(&["capacity"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing --R or --L"));

    let o = glcap(&["capacity", "--R", "3", "--L", "1"]);
    assert_eq!(o.status.code(), Some(2));

    let o = glcap(&["certify", "--L", "2", "--kappa", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kappa must exceed 1"));

    let o = glcap(&["certify", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(o.status.code(), Some(3));

    let o = glcap(&[
        "certify",
        "--L",
        "2",
        "--kappa",
        "10",
        "--output",
        "/nonexistent/dir/cert.json",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("cannot write"));

    let o = glcap(&[
        "minimize",
        "--L",
        "1",
        "--kappa",
        "2",
        "--init",
        "/nonexistent.snap",
    ]);
    assert_eq!(o.status.code(), Some(3));
}
