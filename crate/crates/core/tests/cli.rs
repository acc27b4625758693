//! Command-line runs against temporary directories.

use std::fs;
use std::path::Path;
use std::process::Command as Process;

use binrec::cli::{parse_config, run};
use binrec::pgm::read_pgm;
use binrec::Error;
use tempfile::TempDir;

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("run.cfg");
    fs::write(&p, body).unwrap();
    p
}

fn binrec(args: &[&str]) -> std::process::Output {
    Process::new(env!("CARGO_BIN_EXE_binrec"))
        .args(args)
        .output()
        .unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn recover_noise_free_three_bars() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        "pattern = three_bars\nalpha = 0.01\ngamma = 0\npotential = obstacle\n",
    );
    let res = binrec(&[
        "recover",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );

    let summary = csv_rows(&out.join("summary.csv"));
    assert_eq!(summary.len(), 2);
    let header = &summary[0];
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert_eq!(summary[1][col("E")].parse::<f64>().unwrap(), 0.0);
    assert_eq!(summary[1][col("converged")], "true");
    assert_eq!(summary[1][col("monotone")], "true");

    let solution = csv_rows(&out.join("solution.csv"));
    assert_eq!(solution[0], ["x", "u_true", "y_d", "u_rec"]);
    assert!(out.join("energy.csv").exists());
    assert!(fs::read_dir(&out).unwrap().all(|e| !e
        .unwrap()
        .file_name()
        .to_string_lossy()
        .ends_with(".partial")));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "pattern = three_bars\nalpha = 0.01\ngamma = 0.2\nseed = 7\n",
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let res = binrec(&[
            "compare",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(res.status.success());
    }
    let mut names: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 5);
    for name in names {
        assert_eq!(
            fs::read(a.join(&name)).unwrap(),
            fs::read(b.join(&name)).unwrap(),
            "{name:?}"
        );
    }
    assert_eq!(csv_rows(&a.join("summary.csv")).len(), 3);
}

#[test]
fn seed_flag_changes_the_data() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "pattern = three_bars\nalpha = 0.01\ngamma = 0.2\n",
    );
    let mut data = Vec::new();
    for seed in ["1", "2"] {
        let out = tmp.path().join(seed);
        let res = binrec(&[
            "synthesize",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            seed,
        ]);
        assert!(res.status.success());
        data.push(fs::read(out.join("data.csv")).unwrap());
    }
    assert_ne!(data[0], data[1]);
}

#[test]
fn sweep_writes_one_row_per_grid_point() {
    let tmp = TempDir::new().unwrap();
    let mut cfg =
        parse_config("pattern = three_bars\npotential = well\nn_realizations = 2\n").unwrap();
    cfg.command = binrec::cli::Command::Sweep;
    cfg.out_dir = tmp.path().to_path_buf();
    let report = run(&cfg).unwrap();
    let rows = csv_rows(&tmp.path().join("sweep.csv"));
    assert_eq!(rows.len(), 1 + 8);
    assert_eq!(report.lines.len(), 8);
    assert!(rows[1..].iter().all(|r| r[5] == "0"));
}

#[test]
fn sweep_rejects_images() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = parse_config("pattern = blob\n").unwrap();
    cfg.command = binrec::cli::Command::Sweep;
    cfg.out_dir = tmp.path().to_path_buf();
    assert!(matches!(run(&cfg), Err(Error::Unsupported(_))));
}

#[test]
fn oracle_check_passes_and_negative_control_fails() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "oracle_instances = 4\n");
    let ok_dir = tmp.path().join("ok");
    let res = binrec(&[
        "oracle-check",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        ok_dir.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0));
    let rows = csv_rows(&ok_dir.join("oracle.csv"));
    assert!(rows[1..].iter().all(|r| r.last().unwrap() == "PASS"));

    let bad = write_config(
        tmp.path(),
        "oracle_instances = 4\noracle_perturbation = 1e-3\n",
    );
    let bad_dir = tmp.path().join("bad");
    let res = binrec(&[
        "oracle-check",
        "--config",
        bad.to_str().unwrap(),
        "--out",
        bad_dir.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    let rows = csv_rows(&bad_dir.join("oracle.csv"));
    assert!(rows[1..].iter().any(|r| r.last().unwrap() == "FAIL"));
}

#[test]
fn failed_run_leaves_only_partial_files() {
    // Between the two reaction bounds: the well run completes, the obstacle step rejects rho.
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        "pattern = three_bars\nalpha = 0.01\ngamma = 0.2\nrho = 0.09\nmax_iters = 5\n",
    );
    let res = binrec(&[
        "compare",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    let names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(!names.is_empty());
    assert!(names.iter().all(|n| n.ends_with(".partial")), "{names:?}");
    assert!(names.contains(&"well_solution.csv.partial".to_string()));
    assert!(!names.iter().any(|n| n.starts_with("obstacle_solution")));
}

#[test]
fn bad_configs_exit_with_error_naming_the_line() {
    let tmp = TempDir::new().unwrap();
    for (body, line) in [
        ("alpha = 0.01\ngamma = 0.2\nwidth = 3\n", "line 3"),
        ("alpha = 0.01\nrho = -1\n", "line 2"),
        ("alpha = abc\n", "line 1"),
    ] {
        let cfg = write_config(tmp.path(), body);
        let res = binrec(&[
            "recover",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            tmp.path().join("x").to_str().unwrap(),
        ]);
        assert_eq!(res.status.code(), Some(2), "{body}");
        let err = String::from_utf8_lossy(&res.stderr);
        assert!(err.contains(line), "{body}: {err}");
    }
    let cfg = write_config(tmp.path(), "gamma = 0.2\n");
    let res = binrec(&[
        "recover",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("y").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn image_runs_write_pgm_files() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("img");
    let cfg = write_config(
        tmp.path(),
        "pattern = blob\nalpha = 0.001\ngamma = 0\nn_cells = 24\nmax_iters = 5\n",
    );
    let res = binrec(&[
        "recover",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    for name in ["u_rec.pgm", "y_d.pgm"] {
        let img = read_pgm(&out.join(name)).unwrap();
        assert_eq!((img.width, img.height), (25, 25));
    }
}
